//! The perturbed Hammerstein operator
//!
//! ```text
//! 𝓕u(t) = ∫_0^1 k(t,s) g(s) F(s, u_s) ds + γ(t) B[u]
//! ```
//!
//! and the affine map `ψ + λ𝓕`. Kernel quadrature weights for every grid node
//! in `[0, 1]` are computed once when the problem is built, so applying the
//! operator costs one pass of `F` over the quadrature nodes plus two
//! matrix-vector products.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::funcspace::{norm_c1, Grid, GridFn, Interval};
use crate::kernels::{self, BcKind};
use crate::quadrature::QuadRule;
use crate::registry::{
    self, BoundaryFunctional, ConstantB, ConstantF, InitialFunction, PowerWeight, QuadraticHistory, SegmentFunctional,
    WeightFunction,
};

/// Everything needed to pose the integral equation.
pub struct ProblemDef {
    pub bc: BcKind,
    /// Delay horizon.
    pub r: f64,
    /// Grid nodes per unit time; rounded up so that `r m` is an integer.
    pub m: usize,
    /// Simpson subintervals on `[0, 1]`; `None` means `2m`.
    pub quad: Option<usize>,
    pub psi: Box<dyn InitialFunction>,
    pub g: Box<dyn WeightFunction>,
    pub f: Box<dyn SegmentFunctional>,
    pub b: Box<dyn BoundaryFunctional>,
    /// Multiply `B[u]` by `λ` (the literal reading of the worked example).
    pub b_includes_lambda: bool,
    /// Drop the boundary term entirely.
    pub homogeneous_bc: bool,
    /// Interval `[a, b]` on which `∫ Φ g > 0` is required.
    pub positivity_interval: (f64, f64),
}

impl ProblemDef {
    /// The delay example: `F = t e^{u(t) + u'(t-1/2)²}(1 + u'(t)² + u(t-1/3)²)`,
    /// `B[u] = 1/(1+u(1/2)²) + ∫_{-1/2}^1 t³ u'² dt`, `ψ = H(-t) t²`, `r = 1/2`, `g ≡ 1`.
    pub fn example(bc: BcKind) -> Self {
        Self {
            bc,
            r: 0.5,
            m: 200,
            quad: None,
            psi: Box::new(QuadraticHistory { a: 1.0 }),
            g: Box::new(PowerWeight { c: 1.0, p: 0.0 }),
            f: Box::new(registry::example_segment_functional()),
            b: Box::new(registry::ExampleB),
            b_includes_lambda: false,
            homogeneous_bc: false,
            positivity_interval: (0.0, 1.0),
        }
    }

    /// `F ≡ 1`, `B ≡ 0`, `ψ ≡ 0` with the `u''(1)` condition; its fixed point is
    /// `λ (t²/2 - t³/6)`.
    pub fn linear_bc3() -> Self {
        Self {
            bc: BcKind::Bc3,
            r: 0.5,
            m: 200,
            quad: None,
            psi: Box::new(QuadraticHistory { a: 0.0 }),
            g: Box::new(PowerWeight { c: 1.0, p: 0.0 }),
            f: Box::new(ConstantF { c: 1.0 }),
            b: Box::new(ConstantB { c: 0.0 }),
            b_includes_lambda: false,
            homogeneous_bc: false,
            positivity_interval: (0.0, 1.0),
        }
    }

    pub fn with_resolution(mut self, m: usize, quad: Option<usize>) -> Self {
        self.m = m;
        self.quad = quad;
        self
    }

    pub fn build(self) -> Result<Problem> {
        Problem::new(self)
    }
}

/// A discretized problem ready for evaluation.
pub struct Problem {
    bc: BcKind,
    grid: Grid,
    rule: QuadRule,
    psi: GridFn,
    psi_source: Box<dyn InitialFunction>,
    g: Box<dyn WeightFunction>,
    g_nodes: Vec<f64>,
    f: Box<dyn SegmentFunctional>,
    b: Box<dyn BoundaryFunctional>,
    b_includes_lambda: bool,
    homogeneous_bc: bool,
    positivity_interval: (f64, f64),
    /// Rows for nodes `t_j >= 0`, indexed by `j - zero_index`.
    weights_val: Vec<Vec<f64>>,
    weights_der: Vec<Vec<f64>>,
}

impl core::fmt::Debug for Problem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Problem")
            .field("bc", &self.bc)
            .field("grid", &self.grid)
            .field("quad", &self.rule.subintervals())
            .field("psi", &self.psi_source.name())
            .field("g", &self.g.name())
            .field("F", &self.f.name())
            .field("B", &self.b.name())
            .finish()
    }
}

impl Problem {
    pub fn new(def: ProblemDef) -> Result<Self> {
        let grid = Grid::new(def.r, def.m)?;
        let r = grid.r();
        if def.f.max_lag() > r + 1e-12 {
            return Err(Error::InvalidParameter(alloc::format!(
                "F '{}' reads lag {} beyond the horizon r = {r}",
                def.f.name(),
                def.f.max_lag()
            )));
        }
        if def.b.min_horizon() > r + 1e-12 {
            return Err(Error::InvalidParameter(alloc::format!(
                "B '{}' needs horizon {} but r = {r}",
                def.b.name(),
                def.b.min_horizon()
            )));
        }
        let (a, b) = def.positivity_interval;
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "positivity interval [{a}, {b}] must satisfy 0 <= a < b <= 1"
            )));
        }
        let rule = QuadRule::new(def.quad.unwrap_or(2 * grid.m()))?;
        let psi = GridFn::from_fn(grid, |t| def.psi.evaluate(t));
        let g_nodes = rule.nodes().map(|s| def.g.evaluate(s)).collect();
        let k0 = grid.zero_index();
        let (weights_val, weights_der) = (k0..grid.len())
            .map(|j| {
                let t = grid.t(j);
                (
                    rule.kernel_weights(def.bc, t, false),
                    rule.kernel_weights(def.bc, t, true),
                )
            })
            .unzip();
        Ok(Self {
            bc: def.bc,
            grid,
            rule,
            psi,
            psi_source: def.psi,
            g: def.g,
            g_nodes,
            f: def.f,
            b: def.b,
            b_includes_lambda: def.b_includes_lambda,
            homogeneous_bc: def.homogeneous_bc,
            positivity_interval: def.positivity_interval,
            weights_val,
            weights_der,
        })
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    pub fn psi(&self) -> &GridFn {
        &self.psi
    }

    pub fn psi_source(&self) -> &dyn InitialFunction {
        self.psi_source.as_ref()
    }

    pub fn g(&self) -> &dyn WeightFunction {
        self.g.as_ref()
    }

    /// `g` at the quadrature nodes.
    pub fn g_nodes(&self) -> &[f64] {
        &self.g_nodes
    }

    pub fn f(&self) -> &dyn SegmentFunctional {
        self.f.as_ref()
    }

    pub fn b(&self) -> &dyn BoundaryFunctional {
        self.b.as_ref()
    }

    pub fn b_includes_lambda(&self) -> bool {
        self.b_includes_lambda
    }

    pub fn homogeneous_bc(&self) -> bool {
        self.homogeneous_bc
    }

    pub fn positivity_interval(&self) -> (f64, f64) {
        self.positivity_interval
    }

    /// `γ(t_j)` with the Heaviside extension.
    pub fn gamma(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            kernels::gamma_hat_unchecked(self.bc, t.min(1.0))
        }
    }

    pub fn gamma_deriv(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            kernels::gamma_hat_deriv_unchecked(self.bc, t.min(1.0))
        }
    }

    /// Quadrature weights of `∫_0^1 k(t_j, s) · ds` for node `j`; zero on `[-r, 0)`.
    pub fn kernel_row(&self, j: usize) -> Option<&[f64]> {
        j.checked_sub(self.grid.zero_index())
            .map(|i| self.weights_val[i].as_slice())
    }

    /// `B[u]` as it enters the equation at parameter `λ`.
    pub fn boundary_term(&self, lambda: f64, u: &GridFn) -> Result<f64> {
        if self.homogeneous_bc {
            return Ok(0.0);
        }
        let b = self.b.evaluate(u)?;
        Ok(if self.b_includes_lambda { lambda * b } else { b })
    }

    /// `F(s_i, u_{s_i})` at the quadrature nodes.
    pub fn f_at_nodes(&self, u: &GridFn) -> Result<Vec<f64>> {
        self.rule
            .nodes()
            .map(|s| {
                let seg = u.segment(s)?;
                let v = self.f.evaluate(s, &seg)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation {
                        t: s,
                        detail: alloc::format!("F returned {v}"),
                    })
                }
            })
            .collect()
    }

    /// `(t ↦ ∫ k(t,s) w(s) ds + γ(t) c, its t-derivative)` on the grid for a
    /// load `w` already multiplied by `g`.
    pub fn integrate_load(&self, w: &[f64], boundary: f64) -> GridFn {
        let k0 = self.grid.zero_index();
        let mut out = GridFn::zeros(self.grid);
        let dot = |a: &[f64]| a.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();
        for (i, (wv, wd)) in self.weights_val.iter().zip(&self.weights_der).enumerate() {
            let t = self.grid.t(k0 + i);
            out.values_mut()[k0 + i] = dot(wv) + self.gamma(t) * boundary;
            out.derivs_mut()[k0 + i] = dot(wd) + self.gamma_deriv(t) * boundary;
        }
        out
    }

    fn operator(&self, lambda: f64, u: &GridFn) -> Result<GridFn> {
        if u.grid() != &self.grid {
            return Err(Error::Precondition("function lives on a different grid".into()));
        }
        let boundary = self.boundary_term(lambda, u)?;
        let load: Vec<f64> = self
            .f_at_nodes(u)?
            .into_iter()
            .zip(&self.g_nodes)
            .map(|(f, g)| f * g)
            .collect();
        Ok(self.integrate_load(&load, boundary))
    }

    /// `𝓕u`; vanishes with its derivative on `[-r, 0]`. The boundary term is
    /// `B[u]` without any `λ` factor.
    pub fn apply_f_op(&self, u: &GridFn) -> Result<GridFn> {
        self.operator(1.0, u)
    }

    /// `ψ + λ 𝓕u`, where the boundary term carries the extra `λ` when configured.
    pub fn affine_map(&self, lambda: f64, u: &GridFn) -> Result<GridFn> {
        if !(lambda >= 0.0) {
            return Err(Error::Domain {
                what: "lambda",
                value: lambda,
            });
        }
        let v = self.operator(lambda, u)?;
        self.psi.add(&v.scale(lambda))
    }

    /// `‖u - (ψ + λ𝓕u)‖_{[-r,1],1}`.
    pub fn fixed_point_residual(&self, lambda: f64, u: &GridFn) -> Result<f64> {
        let image = self.affine_map(lambda, u)?;
        norm_c1(&u.sub(&image)?, &Interval::whole(&self.grid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{in_cone_k0, History};

    #[test]
    fn example_boundary_functional_at_psi() {
        let p = ProblemDef::example(BcKind::Bc1).build().unwrap();
        let b = p.b().evaluate(p.psi()).unwrap();
        assert!((b - 95.0 / 96.0).abs() < 1e-8, "B[psi] = {b}");
    }

    #[test]
    fn example_f_on_psi() {
        let p = ProblemDef::example(BcKind::Bc1).build().unwrap();
        let psi = p.psi();
        let f = |t: f64| p.f().evaluate(t, &psi.segment(t).unwrap()).unwrap();
        assert_eq!(f(0.0), 0.0);
        let expected = 0.25 * libm::exp(0.25) * (1.0 + (1.0f64 / 144.0).powi(2));
        assert!((f(0.25) - expected).abs() < 1e-12);
        for j in 0..=100 {
            let t = 0.5 + j as f64 / 200.0;
            assert!((f(t) - t).abs() < 1e-10);
        }
        let seg = psi.segment(0.25).unwrap();
        assert_eq!(seg.deriv(-0.5), -0.5);
    }

    #[test]
    fn zero_nonlinearities_give_zero() {
        let mut def = ProblemDef::linear_bc3();
        def.f = Box::new(ConstantF { c: 0.0 });
        let p = def.build().unwrap();
        let v = p.apply_f_op(p.psi()).unwrap();
        assert!(v.values().iter().chain(v.derivs()).all(|&x| x == 0.0));
    }

    #[test]
    fn affine_map_basics() {
        let p = ProblemDef::example(BcKind::Bc2).build().unwrap();
        let at_zero = p.affine_map(0.0, p.psi()).unwrap();
        assert_eq!(&at_zero, p.psi());
        assert!(p.affine_map(-1.0, p.psi()).is_err());

        let image = p.affine_map(1.0, p.psi()).unwrap();
        assert!(in_cone_k0(&image.sub(p.psi()).unwrap(), crate::CONE_TOL));
        let unit = Interval::unit(p.grid());
        for j in unit.indices() {
            let t = p.grid().t(j);
            assert!(image.values()[j] >= p.gamma(t) * 95.0 / 96.0 - 1e-12);
        }
        assert_eq!(p.fixed_point_residual(0.0, p.psi()).unwrap(), 0.0);
        let lam = 0.3;
        let expected = lam * norm_c1(&p.apply_f_op(p.psi()).unwrap(), &Interval::whole(p.grid())).unwrap();
        let res = p.fixed_point_residual(lam, p.psi()).unwrap();
        assert!((res - expected).abs() < 1e-14);
    }

    #[test]
    fn linear_residual_at_closed_form() {
        let p = ProblemDef::linear_bc3().build().unwrap();
        let lam = 1.7;
        let u = GridFn::from_fn(*p.grid(), |t| {
            if t < 0.0 {
                (0.0, 0.0)
            } else {
                (lam * (t * t / 2.0 - t * t * t / 6.0), lam * (t - t * t / 2.0))
            }
        });
        assert!(p.fixed_point_residual(lam, &u).unwrap() <= 1e-9);
    }

    #[test]
    fn overflow_is_reported_with_time() {
        let p = ProblemDef::example(BcKind::Bc1).build().unwrap();
        let huge = GridFn::from_fn(*p.grid(), |t| if t > 0.0 { (800.0 * t, 800.0) } else { (0.0, 0.0) });
        match p.apply_f_op(&huge) {
            Err(Error::Evaluation { t, .. }) => assert!(t > 0.0),
            other => panic!("expected evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_lags_beyond_horizon() {
        let mut def = ProblemDef::example(BcKind::Bc1);
        def.r = 0.25;
        assert!(def.build().is_err());
    }
}
