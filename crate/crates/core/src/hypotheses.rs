//! Numerical checks of the standing assumptions on `ψ, k, g, F, γ`, the
//! lower bounds `δ_ρ`, `η_ρ` and the positivity of
//!
//! ```text
//! sup_{t in [0,1]} { γ(t) η + ∫_0^1 k(t,s) g(s) δ(s) ds }
//! ```
//!
//! Bounds estimated from random points of the ρ-sphere are empirical: a finite
//! sample cannot certify an infimum, and the report says so.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::funcspace::{boundary_sample, norm_c1, GridFn, Interval};
use crate::hammerstein::Problem;
use crate::kernels;
use crate::quadrature::simpson;
use crate::solver::lambda_bar_bound;
use crate::CONE_TOL;

/// Outcome of one condition with the number that decided it.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub pass: bool,
    pub witness: f64,
    pub detail: String,
}

impl Check {
    fn new(pass: bool, witness: f64, detail: impl Into<String>) -> Self {
        Self {
            pass,
            witness,
            detail: detail.into(),
        }
    }
}

/// The six standing conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralChecks {
    /// `ψ >= 0`, `ψ = ψ' = 0` on `[0, 1]`; witness is the largest violation.
    pub c1: Check,
    /// `k >= 0`, `k = 0` for `t < 0`; witness is the largest violation.
    pub c2: Check,
    /// `∫ Ψ` with `Ψ(s) = max_t |∂_t k(t, s)|`.
    pub c3: Check,
    /// `∫_a^b Φ g` with `Φ(s) = max_t k(t, s)`.
    pub c4: Check,
    /// `min F(s, ψ_s)` over quadrature nodes.
    pub c5: Check,
    /// `γ >= 0`, `γ = γ' = 0` on `[-r, 0]`; witness is the largest violation.
    pub c6: Check,
}

impl StructuralChecks {
    pub fn all_pass(&self) -> bool {
        [&self.c1, &self.c2, &self.c3, &self.c4, &self.c5, &self.c6]
            .iter()
            .all(|c| c.pass)
    }
}

/// `η_ρ`, `δ_ρ` taken from the closed-form bounds the registry carries.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBounds {
    pub eta: f64,
    pub condc_value: f64,
    pub condc_argmax_t: f64,
    /// The bracket at `t = 1`.
    pub value_at_one: f64,
    /// Some sample had `B[u]` below `eta`.
    pub eta_violated: bool,
    /// Some sample had `F(s, u_s)` below `δ_ρ(s)` (beyond `1e-12`).
    pub delta_violated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub rho: f64,
    pub structural: StructuralChecks,
    /// `δ̂ >= 0`.
    pub a: Check,
    /// `η̂ >= 0`.
    pub b: Check,
    /// `condc_value > 0`.
    pub c: Check,
    pub condc_value: f64,
    pub condc_argmax_t: f64,
    pub eta_hat: f64,
    /// Nodes on which `delta_hat` is sampled (the quadrature nodes of `[0, 1]`).
    pub delta_t: Vec<f64>,
    pub delta_hat: Vec<f64>,
    pub inf_f_hat: f64,
    /// `inf_f_hat >= condc_value - 1e-8`.
    pub lwest_chain: bool,
    pub lambda_bar: Option<f64>,
    pub reference: Option<ReferenceBounds>,
    pub n_samples: usize,
    pub seed: u64,
    /// Always true: `eta_hat`, `delta_hat`, `inf_f_hat` come from samples.
    pub empirical: bool,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.structural.all_pass() && self.a.pass && self.b.pass && self.c.pass
    }
}

/// Slack for the chain `inf ‖𝓕u‖ >= condc(η̂, δ̂)`.
pub const LWEST_SLACK: f64 = 1e-8;

fn unit_indices(p: &Problem) -> core::ops::RangeInclusive<usize> {
    p.grid().zero_index()..=p.grid().len() - 1
}

/// Evaluates the conditions that do not involve ρ on grid and quadrature nodes.
pub fn check_structural(p: &Problem) -> StructuralChecks {
    let grid = p.grid();
    let rule = p.rule();
    let bc = p.bc();
    let k0 = grid.zero_index();
    let psi = p.psi();

    let mut c1 = 0.0_f64;
    for j in 0..grid.len() {
        c1 = c1.max(-psi.values()[j]);
        if j >= k0 {
            c1 = c1.max(psi.values()[j].abs()).max(psi.derivs()[j].abs());
        }
    }

    let mut c2 = 0.0_f64;
    let mut phi = alloc::vec![0.0_f64; rule.len()];
    let mut big_psi = alloc::vec![0.0_f64; rule.len()];
    for j in 0..grid.len() {
        let t = grid.t(j);
        for (i, s) in rule.nodes().enumerate() {
            let k = kernels::extend_k(bc, t, s).unwrap_or(f64::NAN);
            if t < 0.0 {
                c2 = c2.max(k.abs());
                continue;
            }
            c2 = c2.max(-k);
            phi[i] = phi[i].max(k);
            let dk = kernels::extend_dk_dt(bc, t, s).unwrap_or(f64::NAN);
            big_psi[i] = big_psi[i].max(dk.abs());
        }
    }
    let c3 = simpson(&big_psi, rule.h());

    let (a, b) = p.positivity_interval();
    let g = p.g_nodes();
    let min_g = g.iter().copied().fold(f64::INFINITY, f64::min);
    let phi_g: Vec<f64> = phi.iter().zip(g).map(|(f, g)| f * g).collect();
    let total = simpson(&phi_g, rule.h());
    let lo = libm::ceil(a / rule.h() - 1e-9) as usize;
    let hi = (libm::floor(b / rule.h() + 1e-9) as usize).min(rule.len() - 1);
    let c4 = if lo < hi {
        simpson(&phi_g[lo..=hi], rule.h())
    } else {
        0.0
    };

    let c5 = rule
        .nodes()
        .map(|s| {
            psi.segment(s)
                .and_then(|seg| p.f().evaluate(s, &seg))
                .unwrap_or(f64::NAN)
        })
        .fold(f64::INFINITY, |m, v| if v.is_nan() { f64::NAN } else { m.min(v) });

    let mut c6 = 0.0_f64;
    for t in grid.nodes() {
        c6 = c6.max(-p.gamma(t));
        if t <= 0.0 {
            c6 = c6.max(p.gamma(t).abs()).max(p.gamma_deriv(t).abs());
        }
    }

    StructuralChecks {
        c1: Check::new(
            c1 <= CONE_TOL,
            c1,
            "max violation of psi >= 0 and psi = psi' = 0 on [0,1]",
        ),
        c2: Check::new(
            c2 <= CONE_TOL && c2.is_finite(),
            c2,
            "max violation of k >= 0 and k = 0 for t < 0",
        ),
        c3: Check::new(c3.is_finite(), c3, "integral of max_t |dk/dt|"),
        c4: Check::new(
            min_g >= 0.0 && total.is_finite() && c4 > 0.0,
            c4,
            alloc::format!("integral of Phi g over [{a}, {b}]; min g = {min_g}"),
        ),
        c5: Check::new(
            c5 >= 0.0 && c5.is_finite(),
            c5,
            "min F(s, psi_s); built-in F are bounded by construction",
        ),
        c6: Check::new(
            c6 <= CONE_TOL,
            c6,
            "max violation of gamma >= 0 and gamma = gamma' = 0 on [-r,0]",
        ),
    }
}

/// `sup` over grid nodes `t in [0, 1]` of `γ(t) η + ∫ k(t,s) g(s) δ(s) ds`,
/// with `δ` given on the quadrature nodes.
pub fn condc_value(p: &Problem, eta: f64, delta: &[f64]) -> Result<(f64, f64)> {
    if delta.len() != p.rule().len() {
        return Err(Error::Precondition(alloc::format!(
            "delta has {} entries, the quadrature has {} nodes",
            delta.len(),
            p.rule().len()
        )));
    }
    let eta = if p.homogeneous_bc() { 0.0 } else { eta };
    let load: Vec<f64> = delta.iter().zip(p.g_nodes()).map(|(d, g)| d * g).collect();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in unit_indices(p) {
        let t = p.grid().t(j);
        let row = p.kernel_row(j).expect("node in [0, 1]");
        let v = p.gamma(t) * eta + row.iter().zip(&load).map(|(w, l)| w * l).sum::<f64>();
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

fn samples(p: &Problem, rho: f64, n: usize, seed: u64) -> Result<Vec<GridFn>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    boundary_sample(p.psi(), rho, n, seed)
}

fn eta_delta_of(p: &Problem, us: &[GridFn]) -> Result<(f64, Vec<f64>)> {
    let mut eta = f64::INFINITY;
    let mut delta = alloc::vec![f64::INFINITY; p.rule().len()];
    for u in us {
        eta = eta.min(p.b().evaluate(u)?);
        for (d, f) in delta.iter_mut().zip(p.f_at_nodes(u)?) {
            *d = d.min(f);
        }
    }
    Ok((eta, delta))
}

fn inf_f_of(p: &Problem, us: &[GridFn]) -> Result<f64> {
    let whole = Interval::whole(p.grid());
    us.iter()
        .try_fold(f64::INFINITY, |m, u| Ok(m.min(norm_c1(&p.apply_f_op(u)?, &whole)?)))
}

/// Empirical `η̂ = min B[u]` and `δ̂(s) = min F(s, u_s)` over `n` seeded points
/// of the ρ-sphere around `ψ`; `δ̂` lives on the quadrature nodes.
pub fn estimate_eta_delta(p: &Problem, rho: f64, n: usize, seed: u64) -> Result<(f64, Vec<f64>)> {
    eta_delta_of(p, &samples(p, rho, n, seed)?)
}

/// Empirical `min ‖𝓕u‖_{[-r,1],1}` over the same samples.
pub fn estimate_inf_f(p: &Problem, rho: f64, n: usize, seed: u64) -> Result<f64> {
    inf_f_of(p, &samples(p, rho, n, seed)?)
}

fn reference(p: &Problem, rho: f64, eta_hat: f64, delta_hat: &[f64]) -> Result<Option<ReferenceBounds>> {
    let eta = if p.homogeneous_bc() {
        Some(0.0)
    } else {
        p.b().lower_bound(rho)
    };
    let delta: Option<Vec<f64>> = p.rule().nodes().map(|s| p.f().lower_bound(s, rho)).collect();
    let (Some(eta), Some(delta)) = (eta, delta) else {
        return Ok(None);
    };
    let (value, argmax) = condc_value(p, eta, &delta)?;
    let load: Vec<f64> = delta.iter().zip(p.g_nodes()).map(|(d, g)| d * g).collect();
    let last = p.grid().len() - 1;
    let row = p.kernel_row(last).expect("t = 1 is a node");
    let eff_eta = if p.homogeneous_bc() { 0.0 } else { eta };
    let at_one = p.gamma(1.0) * eff_eta + row.iter().zip(&load).map(|(w, l)| w * l).sum::<f64>();
    Ok(Some(ReferenceBounds {
        eta,
        condc_value: value,
        condc_argmax_t: argmax,
        value_at_one: at_one,
        eta_violated: eta_hat < eta,
        delta_violated: delta_hat.iter().zip(&delta).any(|(h, d)| *h < d - 1e-12),
    }))
}

/// Structural checks plus the sampled bounds, all from one seeded sample set.
pub fn check(p: &Problem, rho: f64, n: usize, seed: u64) -> Result<HypothesisReport> {
    let us = samples(p, rho, n, seed)?;
    let structural = check_structural(p);
    let (eta_hat, delta_hat) = eta_delta_of(p, &us)?;
    let inf_f_hat = inf_f_of(p, &us)?;
    let (condc, argmax) = condc_value(p, eta_hat, &delta_hat)?;
    let min_delta = delta_hat.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_bar = if inf_f_hat > 0.0 {
        Some(lambda_bar_bound(p, rho, inf_f_hat)?)
    } else {
        None
    };
    let reference = reference(p, rho, eta_hat, &delta_hat)?;
    Ok(HypothesisReport {
        rho,
        structural,
        a: Check::new(min_delta >= 0.0, min_delta, "min of empirical delta"),
        b: Check::new(eta_hat >= 0.0 && eta_hat.is_finite(), eta_hat, "empirical eta"),
        c: Check::new(condc > 0.0, condc, "sup of the bracket with empirical eta, delta"),
        condc_value: condc,
        condc_argmax_t: argmax,
        eta_hat,
        delta_t: p.rule().nodes().collect(),
        delta_hat,
        inf_f_hat,
        lwest_chain: inf_f_hat >= condc - LWEST_SLACK,
        lambda_bar,
        reference,
        n_samples: n,
        seed,
        empirical: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hammerstein::ProblemDef;
    use crate::kernels::BcKind;
    use crate::registry::{ConstantB, ConstantF, IdentityHistory, PowerWeight};
    use alloc::boxed::Box;

    #[test]
    fn example_structure_passes() {
        for bc in BcKind::ALL {
            let p = ProblemDef::example(bc).build().unwrap();
            let s = check_structural(&p);
            assert!(s.all_pass(), "{bc:?}: {s:?}");
        }
    }

    #[test]
    fn identity_history_fails_c1() {
        let mut def = ProblemDef::example(BcKind::Bc1);
        def.psi = Box::new(IdentityHistory);
        let s = check_structural(&def.build().unwrap());
        assert!(!s.c1.pass);
        assert!(s.c1.witness >= 1.0);
    }

    #[test]
    fn zero_weight_fails_c4() {
        let mut def = ProblemDef::example(BcKind::Bc2);
        def.g = Box::new(PowerWeight { c: 0.0, p: 0.0 });
        let s = check_structural(&def.build().unwrap());
        assert!(!s.c4.pass);
        assert_eq!(s.c4.witness, 0.0);
    }

    #[test]
    fn condc_at_paper_bounds() {
        let p = ProblemDef::example(BcKind::Bc1).build().unwrap();
        let delta: Vec<f64> = p.rule().nodes().collect();
        let (v, _) = condc_value(&p, 0.5, &delta).unwrap();
        assert!(v >= 0.25);
        let r = reference(&p, 1.0, 1.0, &delta).unwrap().unwrap();
        assert!((r.value_at_one - 0.5).abs() < 1e-12);
        let zero = alloc::vec![0.0; p.rule().len()];
        assert_eq!(condc_value(&p, 0.0, &zero).unwrap().0, 0.0);
        assert!(condc_value(&p, 0.0, &zero[1..]).is_err());
    }

    #[test]
    fn constant_load_gives_constant_delta() {
        let mut def = ProblemDef::linear_bc3();
        def.f = Box::new(ConstantF { c: 0.75 });
        let p = def.build().unwrap();
        let (eta, delta) = estimate_eta_delta(&p, 1.0, 10, 3).unwrap();
        assert_eq!(eta, 0.0);
        assert!(delta.iter().all(|&d| d == 0.75));
    }

    #[test]
    fn linear_problem_infimum() {
        let p = ProblemDef::linear_bc3().build().unwrap();
        let inf = estimate_inf_f(&p, 1.0, 20, 1).unwrap();
        assert!((inf - 0.5).abs() < 1e-12, "{inf}");

        let mut def = ProblemDef::linear_bc3();
        def.f = Box::new(ConstantF { c: 0.0 });
        def.b = Box::new(ConstantB { c: 0.0 });
        assert_eq!(estimate_inf_f(&def.build().unwrap(), 1.0, 5, 1).unwrap(), 0.0);
    }

    #[test]
    fn report_is_deterministic_and_consistent() {
        let p = ProblemDef::example(BcKind::Bc1).build().unwrap();
        let a = check(&p, 1.0, 20, 7).unwrap();
        let b = check(&p, 1.0, 20, 7).unwrap();
        assert_eq!(a, b);
        let (v, t) = condc_value(&p, a.eta_hat, &a.delta_hat).unwrap();
        assert_eq!((v, t), (a.condc_value, a.condc_argmax_t));
        assert!(a.inf_f_hat >= 0.0);
        assert!(a.lwest_chain);
        assert!(a.passed());
        assert!(check(&p, 1.0, 0, 7).is_err());
    }
}
