//! Checks a candidate `(λ, u)` against the differential form of the problem:
//! `u''' + λ F(t, u_t) = 0` on `[0, 1]`, `u = ψ` on `[-r, 0]`, the terminal
//! condition, and an independent re-integration by the method of steps.
//!
//! Only grid data, `F`, `B` and `ψ` are used here; the kernel weights and the
//! fixed-point machinery are never touched.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::funcspace::{GridFn, History};
use crate::hammerstein::Problem;
use crate::kernels::BcKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    pub ode: f64,
    pub bc: f64,
    pub history: f64,
    pub steps: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            ode: 1e-3,
            bc: 1e-6,
            history: 0.0,
            steps: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// `sup |u''' + λ F(t, u_t)|` over grid nodes in `[0, 1]`.
    pub ode_residual: f64,
    /// `|u(0)|`, `|u'(0)|` and the terminal residual.
    pub bc_residuals: [f64; 3],
    pub history_mismatch: f64,
    pub steps_deviation: f64,
    pub passed: bool,
}

impl VerifyReport {
    pub fn evaluate(&mut self, tol: &VerifyTolerances) {
        self.passed = self.ode_residual <= tol.ode
            && self.bc_residuals.iter().all(|&r| r <= tol.bc)
            && self.history_mismatch <= tol.history
            && self.steps_deviation <= tol.steps;
    }
}

fn check_grid(p: &Problem, u: &GridFn) -> Result<()> {
    if u.grid() != p.grid() {
        return Err(Error::Precondition("function lives on a different grid".into()));
    }
    Ok(())
}

fn unit_derivs(u: &GridFn) -> &[f64] {
    &u.derivs()[u.grid().zero_index()..]
}

/// Second derivative of `f` at index `i`, fourth order everywhere.
fn second_difference(f: &[f64], i: usize, h: f64) -> f64 {
    let n = f.len() - 1;
    let c = 12.0 * h * h;
    const EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    const EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    let one_sided = |coef: &[f64; 6], fwd: bool| -> f64 {
        coef.iter()
            .enumerate()
            .map(|(k, a)| a * if fwd { f[k] } else { f[n - k] })
            .sum::<f64>()
            / c
    };
    match i {
        0 => one_sided(&EDGE0, true),
        1 => one_sided(&EDGE1, true),
        _ if i == n => one_sided(&EDGE0, false),
        _ if i == n - 1 => one_sided(&EDGE1, false),
        _ => (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / c,
    }
}

/// One-sided fourth-order first derivative at the start (`fwd`) or end of `f`.
fn edge_difference(f: &[f64], h: f64, fwd: bool) -> f64 {
    const C: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let n = f.len() - 1;
    let s: f64 = C
        .iter()
        .enumerate()
        .map(|(k, a)| a * if fwd { f[k] } else { f[n - k] })
        .sum();
    if fwd {
        s / (12.0 * h)
    } else {
        -s / (12.0 * h)
    }
}

/// `sup_t |u'''(t) + λ F(t, u_t)|` over grid nodes in `[0, 1]`, with `u'''`
/// obtained by differencing the stored derivatives twice.
pub fn ode_residual(p: &Problem, lambda: f64, u: &GridFn) -> Result<f64> {
    check_grid(p, u)?;
    let grid = u.grid();
    if grid.m() < 32 {
        return Err(Error::Precondition(alloc::format!(
            "grid too coarse for finite differences (m = {}, need >= 32)",
            grid.m()
        )));
    }
    let f = unit_derivs(u);
    let k0 = grid.zero_index();
    let mut worst = 0.0_f64;
    for i in 0..f.len() {
        let t = grid.t(k0 + i);
        let d3 = second_difference(f, i, grid.h());
        let load = p.f().evaluate(t, &u.segment(t)?)?;
        worst = worst.max((d3 + lambda * load).abs());
    }
    Ok(worst)
}

/// `[|u(0)|, |u'(0)|, |u^{(i-1)}(1) - λ B[u]|]`.
pub fn bc_residual(p: &Problem, lambda: f64, u: &GridFn) -> Result<[f64; 3]> {
    check_grid(p, u)?;
    let grid = u.grid();
    let k0 = grid.zero_index();
    let last = grid.len() - 1;
    let target = lambda * p.boundary_term(lambda, u)?;
    let terminal = match p.bc() {
        BcKind::Bc1 => u.values()[last],
        BcKind::Bc2 => u.derivs()[last],
        BcKind::Bc3 => edge_difference(unit_derivs(u), grid.h(), false),
    };
    Ok([u.values()[k0].abs(), u.derivs()[k0].abs(), (terminal - target).abs()])
}

/// `max |u - ψ|, |u' - ψ'|` over nodes in `[-r, 0]`.
pub fn history_match(p: &Problem, u: &GridFn) -> Result<f64> {
    check_grid(p, u)?;
    let psi = p.psi_source();
    let k0 = u.grid().zero_index();
    Ok((0..=k0)
        .map(|j| {
            let (v, d) = psi.evaluate(u.grid().t(j));
            (u.values()[j] - v).abs().max((u.derivs()[j] - d).abs())
        })
        .fold(0.0, f64::max))
}

/// The trajectory built so far by the marching integrator.
struct Marched<'a> {
    p: &'a Problem,
    step: f64,
    values: &'a [f64],
    derivs: &'a [f64],
    seconds: &'a [f64],
    /// Current stage: time and state.
    t: f64,
    y: [f64; 3],
}

impl Marched<'_> {
    fn lookup(&self, theta: f64) -> (f64, f64) {
        if theta == 0.0 {
            return (self.y[0], self.y[1]);
        }
        let tau = self.t + theta;
        if tau <= 0.0 {
            return self.p.psi_source().evaluate(tau);
        }
        let n = self.values.len() - 1;
        let pos = tau / self.step;
        if pos >= n as f64 {
            // Inside the current step: Taylor from the last accepted node.
            let d = tau - n as f64 * self.step;
            let (v, v1, v2) = (self.values[n], self.derivs[n], self.seconds[n]);
            return (v + d * v1 + 0.5 * d * d * v2, v1 + d * v2);
        }
        let i = (pos as usize).min(n - 1);
        let s = pos - i as f64;
        let h = self.step;
        let (y0, y1, d0, d1) = (self.values[i], self.values[i + 1], self.derivs[i], self.derivs[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1;
        let dv = ((6.0 * s2 - 6.0 * s) * (y0 - y1)) / h + (3.0 * s2 - 4.0 * s + 1.0) * d0 + (3.0 * s2 - 2.0 * s) * d1;
        (v, dv)
    }
}

impl History for Marched<'_> {
    fn value(&self, theta: f64) -> f64 {
        self.lookup(theta).0
    }

    fn deriv(&self, theta: f64) -> f64 {
        self.lookup(theta).1
    }
}

/// Integrates `u''' = -λ F(t, u_t)` from `u(0) = u'(0) = 0` and `u''(0)` read
/// off the candidate, with classical RK4 at a quarter of the grid step, and
/// returns the largest deviation in value or derivative at grid nodes.
pub fn method_of_steps_check(p: &Problem, lambda: f64, u: &GridFn) -> Result<f64> {
    check_grid(p, u)?;
    const SUB: usize = 4;
    let grid = u.grid();
    let k0 = grid.zero_index();
    let step = grid.h() / SUB as f64;
    let total = grid.m() * SUB;
    let c = edge_difference(unit_derivs(u), grid.h(), true);

    let mut values = Vec::with_capacity(total + 1);
    let mut derivs = Vec::with_capacity(total + 1);
    let mut seconds = Vec::with_capacity(total + 1);
    let mut y = [0.0, 0.0, c];
    values.push(y[0]);
    derivs.push(y[1]);
    seconds.push(y[2]);

    let rhs = |t: f64, y: [f64; 3], v: &[f64], d: &[f64], s: &[f64]| -> Result<[f64; 3]> {
        let hist = Marched {
            p,
            step,
            values: v,
            derivs: d,
            seconds: s,
            t,
            y,
        };
        let load = p.f().evaluate(t, &hist)?;
        Ok([y[1], y[2], -lambda * load])
    };
    let axpy = |y: [f64; 3], a: f64, k: [f64; 3]| [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]];

    let mut worst = 0.0_f64;
    for n in 0..total {
        let t = n as f64 * step;
        let k1 = rhs(t, y, &values, &derivs, &seconds)?;
        let k2 = rhs(t + 0.5 * step, axpy(y, 0.5 * step, k1), &values, &derivs, &seconds)?;
        let k3 = rhs(t + 0.5 * step, axpy(y, 0.5 * step, k2), &values, &derivs, &seconds)?;
        let k4 = rhs(t + step, axpy(y, step, k3), &values, &derivs, &seconds)?;
        for i in 0..3 {
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::Evaluation {
                t: t + step,
                detail: "method-of-steps integration blew up".into(),
            });
        }
        values.push(y[0]);
        derivs.push(y[1]);
        seconds.push(y[2]);
        if (n + 1) % SUB == 0 {
            let j = k0 + (n + 1) / SUB;
            let dev = (y[0] - u.values()[j]).abs().max((y[1] - u.derivs()[j]).abs());
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// All four checks, judged against `tol`.
pub fn verify(p: &Problem, lambda: f64, u: &GridFn, tol: &VerifyTolerances) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        ode_residual: ode_residual(p, lambda, u)?,
        bc_residuals: bc_residual(p, lambda, u)?,
        history_mismatch: history_match(p, u)?,
        steps_deviation: method_of_steps_check(p, lambda, u)?,
        passed: false,
    };
    report.evaluate(tol);
    Ok(report)
}
