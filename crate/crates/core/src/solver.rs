//! Fixed points of `u = ψ + λ𝓕u`, the norm response `N(λ) = ‖u_λ - ψ‖_{[0,1],1}`
//! and the search for `λ*` with `N(λ*) = ρ`.
//!
//! Fixed points come from damped Picard iteration, which contracts for small
//! `λ`, followed by Newton on the grid unknowns with a finite-difference
//! Jacobian when Picard stalls. The pair search walks `λ` upward from 0 with
//! warm starts until `N` crosses `ρ`, then refines the crossing by safeguarded
//! regula falsi (Illinois variant).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::funcspace::{norm_c1, GridFn, Interval};
use crate::hammerstein::Problem;
use crate::linalg::Lu;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target fixed-point residual in the C¹ grid norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial Picard damping in (0, 1]; halved whenever a step increases the residual.
    pub damping: f64,
    /// Picard iterations before switching to Newton.
    pub newton_after: usize,
    pub lambda_step: f64,
    pub lambda_max: f64,
    /// Relative tolerance on `|N(λ*) - ρ| / ρ` for the pair search.
    pub pair_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            damping: 1.0,
            newton_after: 50,
            lambda_step: 0.05,
            lambda_max: 100.0,
            pair_tol: 1e-9,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.tol > 0.0) {
            return bad(alloc::format!("tol must be > 0, got {}", self.tol));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(alloc::format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if !(self.lambda_step > 0.0) {
            return bad(alloc::format!("lambda_step must be > 0, got {}", self.lambda_step));
        }
        if !(self.lambda_max > 0.0) {
            return bad(alloc::format!("lambda_max must be > 0, got {}", self.lambda_max));
        }
        if !(self.pair_tol > 0.0 && self.pair_tol <= 1e-6) {
            return bad(alloc::format!("pair_tol must lie in (0, 1e-6], got {}", self.pair_tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        Ok(())
    }
}

/// A converged fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub u: GridFn,
    pub residual: f64,
    pub iterations: usize,
    pub newton_steps: usize,
}

/// A solution on the ρ-sphere of the translated cone.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub lambda_star: f64,
    pub u_star: GridFn,
    pub rho: f64,
    /// `N(λ*)` as computed for the returned `u_star`.
    pub norm: f64,
    pub residual: f64,
    /// Inner solver iterations summed over the search.
    pub n_iterations: usize,
    pub n_continuation_steps: usize,
    pub n_refinements: usize,
}

/// One row of a `λ ↦ N(λ)` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    /// NaN when the solve failed.
    pub n: f64,
    pub residual: f64,
    pub converged: bool,
}

/// `‖u - ψ‖_{[0,1],1}`
pub fn distance_from_psi(p: &Problem, u: &GridFn) -> Result<f64> {
    norm_c1(&u.sub(p.psi())?, &Interval::unit(p.grid()))
}

/// Unknowns are node values and derivatives on `(0, 1]`; everything on `[-r, 0]`
/// is pinned to `ψ` since `𝓕u` vanishes there.
struct Unknowns<'a> {
    p: &'a Problem,
    lambda: f64,
    first: usize,
}

impl<'a> Unknowns<'a> {
    fn new(p: &'a Problem, lambda: f64) -> Self {
        Self {
            p,
            lambda,
            first: p.grid().zero_index() + 1,
        }
    }

    fn count(&self) -> usize {
        2 * (self.p.grid().len() - self.first)
    }

    fn pin_history(&self, u: &GridFn) -> GridFn {
        let mut out = u.clone();
        let psi = self.p.psi();
        out.values_mut()[..self.first].copy_from_slice(&psi.values()[..self.first]);
        out.derivs_mut()[..self.first].copy_from_slice(&psi.derivs()[..self.first]);
        out
    }

    fn pack(&self, u: &GridFn) -> Vec<f64> {
        let mut x = u.values()[self.first..].to_vec();
        x.extend_from_slice(&u.derivs()[self.first..]);
        x
    }

    fn unpack(&self, x: &[f64]) -> GridFn {
        let mut u = self.p.psi().clone();
        let half = x.len() / 2;
        u.values_mut()[self.first..].copy_from_slice(&x[..half]);
        u.derivs_mut()[self.first..].copy_from_slice(&x[half..]);
        u
    }

    /// `x - T(x)` on the unknowns, with `T = ψ + λ𝓕`.
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.unpack(x);
        let image = self.p.affine_map(self.lambda, &u)?;
        Ok(self.pack(&image).iter().zip(x).map(|(t, xi)| xi - t).collect())
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
}

/// Solves `u = ψ + λ𝓕u` starting from `u0`.
pub fn fixed_point_solve(p: &Problem, lambda: f64, u0: &GridFn, opts: &SolveOptions) -> Result<FixedPoint> {
    opts.validate()?;
    if !(lambda >= 0.0) {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
        });
    }
    if u0.grid() != p.grid() {
        return Err(Error::Precondition("initial guess lives on a different grid".into()));
    }
    let sys = Unknowns::new(p, lambda);
    let mut trace = Vec::new();
    let fail = |trace: Vec<f64>, iterations| Error::NonConvergence {
        lambda,
        best_residual: trace.iter().copied().fold(f64::INFINITY, f64::min),
        iterations,
        trace,
    };

    if lambda == 0.0 {
        return Ok(FixedPoint {
            u: p.psi().clone(),
            residual: 0.0,
            iterations: 1,
            newton_steps: 0,
        });
    }

    // Damped Picard.
    let mut x = sys.pack(&sys.pin_history(u0));
    let mut damping = opts.damping;
    let mut iterations = 0;
    let mut state = sys.residual(&x).ok().map(|r| {
        let n = sup_norm(&r);
        (r, n)
    });
    if let Some((_, res)) = &state {
        trace.push(*res);
    }
    while let Some((r, res)) = &state {
        if *res <= opts.tol {
            return Ok(FixedPoint {
                u: sys.unpack(&x),
                residual: *res,
                iterations,
                newton_steps: 0,
            });
        }
        if iterations >= opts.newton_after.min(opts.max_iter) || damping < 1e-4 {
            break;
        }
        iterations += 1;
        let cand: Vec<f64> = x.iter().zip(r).map(|(xi, ri)| xi - damping * ri).collect();
        match sys.residual(&cand) {
            Ok(rc) if sup_norm(&rc) < *res => {
                let n = sup_norm(&rc);
                trace.push(n);
                x = cand;
                state = Some((rc, n));
            }
            _ => damping *= 0.5,
        }
    }
    if state.is_none() {
        // The initial guess itself could not be evaluated.
        x = sys.pack(p.psi());
        state = sys.residual(&x).ok().map(|r| {
            let n = sup_norm(&r);
            (r, n)
        });
    }
    let Some((mut r, mut res)) = state else {
        return Err(fail(trace, iterations));
    };

    // Newton with a one-sided finite-difference Jacobian.
    let n = sys.count();
    let mut newton_steps = 0;
    while iterations < opts.max_iter {
        if res <= opts.tol {
            return Ok(FixedPoint {
                u: sys.unpack(&x),
                residual: res,
                iterations,
                newton_steps,
            });
        }
        iterations += 1;
        newton_steps += 1;
        let mut jac = vec![0.0; n * n];
        let mut xp = x.clone();
        for c in 0..n {
            let eps = 1e-7 * (1.0 + x[c].abs());
            xp[c] = x[c] + eps;
            let rp = match sys.residual(&xp) {
                Ok(rp) => rp,
                Err(_) => return Err(fail(trace, iterations)),
            };
            xp[c] = x[c];
            for i in 0..n {
                jac[i * n + c] = (rp[i] - r[i]) / eps;
            }
        }
        let lu = Lu::factor(n, jac).map_err(|_| fail(trace.clone(), iterations))?;
        let dx = lu.solve(&r);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi - step * d).collect();
            if let Ok(rc) = sys.residual(&cand) {
                let nc = sup_norm(&rc);
                if nc < res {
                    x = cand;
                    r = rc;
                    res = nc;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        trace.push(res);
        if !accepted {
            break;
        }
    }
    if res <= opts.tol {
        return Ok(FixedPoint {
            u: sys.unpack(&x),
            residual: res,
            iterations,
            newton_steps,
        });
    }
    Err(fail(trace, iterations))
}

/// `N(λ)`, solving from `ψ`.
pub fn norm_response(p: &Problem, lambda: f64, opts: &SolveOptions) -> Result<f64> {
    let fp = fixed_point_solve(p, lambda, p.psi(), opts)?;
    distance_from_psi(p, &fp.u)
}

struct Point {
    lambda: f64,
    n: f64,
    fp: FixedPoint,
}

fn evaluate(p: &Problem, lambda: f64, warm: &GridFn, opts: &SolveOptions) -> Result<Point> {
    let fp = fixed_point_solve(p, lambda, warm, opts)?;
    let n = distance_from_psi(p, &fp.u)?;
    Ok(Point { lambda, n, fp })
}

/// Finds `(λ*, u*)` with `u* = ψ + λ*𝓕u*` and `‖u* - ψ‖_{[0,1],1} = ρ` at the
/// first crossing of `N(λ) = ρ` along the continuation.
pub fn find_pair(p: &Problem, rho: f64, opts: &SolveOptions) -> Result<PairResult> {
    opts.validate()?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
        });
    }
    let target_tol = (rho * opts.pair_tol).max(2.0 * opts.tol);
    let mut total_iter = 0;
    let mut lo = Point {
        lambda: 0.0,
        n: 0.0,
        fp: FixedPoint {
            u: p.psi().clone(),
            residual: 0.0,
            iterations: 0,
            newton_steps: 0,
        },
    };
    let mut steps = 0;
    let no_bracket = |lo: &Point, reason: String| Error::NoBracket {
        rho,
        last_lambda: lo.lambda,
        last_n: lo.n,
        reason,
    };

    // Continuation with step halving on solver failure; the step recovers
    // towards `lambda_step` after each success.
    let min_step = opts.lambda_step * 1e-4;
    let mut step = opts.lambda_step;
    let mut hi = loop {
        if lo.lambda >= opts.lambda_max {
            return Err(no_bracket(
                &lo,
                alloc::format!("lambda_max = {} reached", opts.lambda_max),
            ));
        }
        let lambda = (lo.lambda + step).min(opts.lambda_max);
        let pt = match evaluate(p, lambda, &lo.fp.u, opts) {
            Ok(pt) => pt,
            Err(_) if step > min_step => {
                step *= 0.5;
                continue;
            }
            Err(e) => {
                return Err(no_bracket(
                    &lo,
                    alloc::format!("solver failed at lambda = {lambda} (likely a fold): {e}"),
                ))
            }
        };
        steps += 1;
        total_iter += pt.fp.iterations;
        if pt.n >= rho {
            break pt;
        }
        lo = pt;
        step = (2.0 * step).min(opts.lambda_step);
    };

    let done = |pt: Point, total_iter: usize, refinements: usize| PairResult {
        lambda_star: pt.lambda,
        u_star: pt.fp.u,
        rho,
        norm: pt.n,
        residual: pt.fp.residual,
        n_iterations: total_iter,
        n_continuation_steps: steps,
        n_refinements: refinements,
    };

    // Illinois regula falsi on N(λ) - ρ over [lo, hi].
    let mut flo = lo.n - rho;
    let mut fhi = hi.n - rho;
    let mut last_side = 0i8;
    for refinements in 0..200 {
        if (hi.n - rho).abs() <= target_tol {
            return Ok(done(hi, total_iter, refinements));
        }
        if lo.lambda > 0.0 && (lo.n - rho).abs() <= target_tol {
            return Ok(done(lo, total_iter, refinements));
        }
        let width = hi.lambda - lo.lambda;
        if width <= 1e-15 * hi.lambda {
            let closest = if lo.lambda > 0.0 && (lo.n - rho).abs() < (hi.n - rho).abs() {
                lo
            } else {
                hi
            };
            return Ok(done(closest, total_iter, refinements));
        }
        let mut lambda = lo.lambda - flo * width / (fhi - flo);
        if !(lambda > lo.lambda + 1e-3 * width && lambda < hi.lambda - 1e-3 * width) {
            lambda = 0.5 * (lo.lambda + hi.lambda);
        }
        let warm = if lambda - lo.lambda < hi.lambda - lambda {
            &lo.fp.u
        } else {
            &hi.fp.u
        };
        let pt = evaluate(p, lambda, warm, opts)
            .map_err(|e| no_bracket(&lo, alloc::format!("refinement failed at lambda = {lambda}: {e}")))?;
        total_iter += pt.fp.iterations;
        let f = pt.n - rho;
        if f >= 0.0 {
            hi = pt;
            fhi = f;
            if last_side == 1 {
                flo *= 0.5;
            }
            last_side = 1;
        } else {
            lo = pt;
            flo = f;
            if last_side == -1 {
                fhi *= 0.5;
            }
            last_side = -1;
        }
    }
    Err(no_bracket(&lo, "refinement did not converge".into()))
}

/// Upper end `λ̄` of the interval guaranteed to contain `λ*`:
/// `(R + ‖ψ‖) / inf ‖𝓕u‖` with `R = sup ‖u‖_{[-r,1],1}` over the ρ-sphere.
///
/// On the sphere `u = ψ + v` with `v` vanishing on `[-r, 0]`, so
/// `R <= max(‖ψ‖_{[-r,0],1}, ‖ψ‖_{[0,1],1} + ρ)`, with equality when `ψ`
/// vanishes on `[0, 1]`.
pub fn lambda_bar_bound(p: &Problem, rho: f64, inf_f: f64) -> Result<f64> {
    if !(inf_f > 0.0) {
        return Err(Error::Precondition(alloc::format!(
            "inf ‖𝓕u‖ must be positive for the bound, got {inf_f}"
        )));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
        });
    }
    let grid = p.grid();
    let psi = p.psi();
    let past = norm_c1(psi, &Interval::history(grid))?;
    let future = norm_c1(psi, &Interval::unit(grid))?;
    let whole = norm_c1(psi, &Interval::whole(grid))?;
    let sphere_sup = past.max(future + rho);
    Ok((sphere_sup + whole) / inf_f)
}

/// Solves at one `λ` from `warm`, reporting failure in the row.
pub fn sweep_row(p: &Problem, lambda: f64, warm: &GridFn, opts: &SolveOptions) -> (SweepRow, Option<GridFn>) {
    match evaluate(p, lambda, warm, opts) {
        Ok(pt) => (
            SweepRow {
                lambda,
                n: pt.n,
                residual: pt.fp.residual,
                converged: true,
            },
            Some(pt.fp.u),
        ),
        Err(e) => {
            let residual = match e {
                Error::NonConvergence { best_residual, .. } => best_residual,
                _ => f64::INFINITY,
            };
            (
                SweepRow {
                    lambda,
                    n: f64::NAN,
                    residual,
                    converged: false,
                },
                None,
            )
        }
    }
}

/// `N(λ)` over `lambdas`, warm-starting each solve from the last converged one.
pub fn sweep(p: &Problem, lambdas: &[f64], opts: &SolveOptions) -> Vec<SweepRow> {
    let mut warm = p.psi().clone();
    lambdas
        .iter()
        .map(|&lambda| {
            let (row, u) = sweep_row(p, lambda, &warm, opts);
            if let Some(u) = u {
                warm = u;
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hammerstein::ProblemDef;
    use crate::registry::ConstantF;
    use alloc::boxed::Box;

    fn linear() -> Problem {
        ProblemDef::linear_bc3().build().unwrap()
    }

    #[test]
    fn zero_lambda_returns_psi() {
        let p = ProblemDef::example(crate::BcKind::Bc1).build().unwrap();
        let fp = fixed_point_solve(&p, 0.0, p.psi(), &SolveOptions::default()).unwrap();
        assert_eq!(&fp.u, p.psi());
        assert_eq!(fp.iterations, 1);
        assert_eq!(norm_response(&p, 0.0, &SolveOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn linear_fixed_point_is_closed_form() {
        let p = linear();
        for lam in [0.3, 1.0, 4.0] {
            let fp = fixed_point_solve(&p, lam, p.psi(), &SolveOptions::default()).unwrap();
            assert!(fp.residual <= 1e-10);
            for (j, t) in p.grid().nodes().enumerate() {
                let (v, d) = if t < 0.0 {
                    (0.0, 0.0)
                } else {
                    (lam * (t * t / 2.0 - t * t * t / 6.0), lam * (t - t * t / 2.0))
                };
                assert!((fp.u.values()[j] - v).abs() < 1e-10);
                assert!((fp.u.derivs()[j] - d).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn linear_response_and_pairs() {
        let p = linear();
        let opts = SolveOptions::default();
        let mut last = -1.0;
        for lam in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let n = norm_response(&p, lam, &opts).unwrap();
            assert!((n - lam / 2.0).abs() < 1e-9);
            assert!(n >= last);
            last = n;
        }
        let pair = find_pair(&p, 1.0, &opts).unwrap();
        assert!((pair.lambda_star - 2.0).abs() < 1e-6);
        let pair = find_pair(&p, 0.1, &opts).unwrap();
        assert!((pair.lambda_star - 0.2).abs() < 1e-7);
    }

    #[test]
    fn example_small_lambda_converges() {
        let p = ProblemDef::example(crate::BcKind::Bc1).build().unwrap();
        let fp = fixed_point_solve(&p, 0.1, p.psi(), &SolveOptions::default()).unwrap();
        assert!(fp.residual <= 1e-10);
        assert!(crate::in_cone_k0(&fp.u.sub(p.psi()).unwrap(), crate::CONE_TOL));
    }

    #[test]
    fn no_bracket_below_lambda_max() {
        let p = linear();
        let opts = SolveOptions {
            lambda_max: 1.0,
            ..SolveOptions::default()
        };
        match find_pair(&p, 5.0, &opts) {
            Err(Error::NoBracket {
                last_lambda, last_n, ..
            }) => {
                assert!((last_lambda - 1.0).abs() < 1e-12);
                assert!((last_n - 0.5).abs() < 1e-9);
            }
            other => panic!("expected NoBracket, got {other:?}"),
        }
        assert!(find_pair(&p, 0.0, &opts).is_err());
    }

    #[test]
    fn lambda_bar_formula() {
        let mut def = ProblemDef::linear_bc3();
        def.f = Box::new(ConstantF { c: 1.0 });
        let p = def.build().unwrap();
        assert_eq!(lambda_bar_bound(&p, 1.0, 0.5).unwrap(), 2.0);
        assert!(lambda_bar_bound(&p, 1.0, 0.0).is_err());
        assert!(lambda_bar_bound(&p, 1.0, 1e-12).unwrap() > 1e11);

        let ex = ProblemDef::example(crate::BcKind::Bc1).build().unwrap();
        assert!((lambda_bar_bound(&ex, 1.0, 0.8).unwrap() - 2.0 / 0.8).abs() < 1e-14);
    }

    #[test]
    fn sweep_rows() {
        let p = linear();
        let rows = sweep(&p, &[0.0, 1.0, 2.0], &SolveOptions::default());
        assert_eq!(rows.len(), 3);
        for (row, want) in rows.iter().zip([0.0, 0.5, 1.0]) {
            assert!(row.converged);
            assert!((row.n - want).abs() < 1e-9);
        }
        assert!(sweep(&p, &[], &SolveOptions::default()).is_empty());
    }

    #[test]
    fn options_are_validated() {
        let p = linear();
        let bad = SolveOptions {
            damping: 0.0,
            ..SolveOptions::default()
        };
        assert!(fixed_point_solve(&p, 1.0, p.psi(), &bad).is_err());
    }
}
