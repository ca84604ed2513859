//! Grid representation of C¹ functions on `[-r, 1]`.
//!
//! A [`GridFn`] stores node values and node derivatives on the uniform grid
//! `t_j = (j - k) / m`, where `k = r m` is the number of history steps. Values
//! between nodes come from cubic Hermite interpolation of the stored pairs, so
//! evaluation at a node returns the stored number exactly.
//!
//! Sup-norms are grid sups: they look at nodes only, and the resolution `m` is
//! the accuracy knob.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Smallest admissible resolution.
pub const MIN_RESOLUTION: usize = 16;

/// Tolerance used to decide whether a time lies on a grid node.
const NODE_SNAP: f64 = 1e-9;

/// Uniform grid with step `1/m` spanning `[-r, 1]`, with `r` a whole number of steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    m: usize,
    history_steps: usize,
}

impl Grid {
    /// Builds the grid for horizon `r`, rounding `m` up until `r m` is an integer.
    pub fn new(r: f64, m: usize) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain {
                what: "delay horizon r",
                value: r,
            });
        }
        if m < MIN_RESOLUTION {
            return Err(Error::InvalidParameter(alloc::format!(
                "resolution m = {m} is below the minimum {MIN_RESOLUTION}"
            )));
        }
        let limit = 64 * m + 4096;
        for cand in m..=limit {
            let steps = r * cand as f64;
            let rounded = libm::round(steps);
            if rounded >= 1.0 && (steps - rounded).abs() <= NODE_SNAP * steps.max(1.0) {
                return Ok(Self {
                    m: cand,
                    history_steps: rounded as usize,
                });
            }
        }
        Err(Error::InvalidParameter(alloc::format!(
            "no resolution in [{m}, {limit}] makes r = {r} a whole number of steps"
        )))
    }

    /// Nodes per unit time.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn r(&self) -> f64 {
        self.history_steps as f64 / self.m as f64
    }

    /// Index of the node `t = 0`.
    pub fn zero_index(&self) -> usize {
        self.history_steps
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.history_steps + self.m + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of node `j`.
    pub fn t(&self, j: usize) -> f64 {
        (j as f64 - self.history_steps as f64) / self.m as f64
    }

    /// Fractional node position of `t`.
    pub fn position(&self, t: f64) -> f64 {
        t * self.m as f64 + self.history_steps as f64
    }

    pub fn contains(&self, t: f64) -> bool {
        let x = self.position(t);
        x >= -NODE_SNAP && x <= (self.len() - 1) as f64 + NODE_SNAP
    }

    /// Index of the node at `t`, if `t` lies on one.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let x = self.position(t);
        let j = libm::round(x);
        if (x - j).abs() <= NODE_SNAP && j >= 0.0 && j <= (self.len() - 1) as f64 {
            Some(j as usize)
        } else {
            None
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.t(j))
    }
}

/// A C¹ function on `[-r, 1]` given by node values and node derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: Grid,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl GridFn {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: alloc::vec![0.0; grid.len()],
            derivs: alloc::vec![0.0; grid.len()],
        }
    }

    /// Samples `f(t) = (u(t), u'(t))` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (values, derivs) = grid.nodes().map(f).unzip();
        Self { grid, values, derivs }
    }

    pub fn from_parts(grid: Grid, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || derivs.len() != grid.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "expected {} nodes, got {} values and {} derivatives",
                grid.len(),
                values.len(),
                derivs.len()
            )));
        }
        Ok(Self { grid, values, derivs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn derivs_mut(&mut self) -> &mut [f64] {
        &mut self.derivs
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.values, self.derivs)
    }

    /// Locates `t`: either an exact node or an interval index with local coordinate in (0,1).
    fn locate(&self, t: f64) -> (usize, f64) {
        let last = self.grid.len() - 1;
        let x = self.grid.position(t).clamp(0.0, last as f64);
        let j = libm::round(x);
        if (x - j).abs() <= NODE_SNAP {
            return (j as usize, 0.0);
        }
        let lo = (libm::floor(x) as usize).min(last - 1);
        (lo, x - lo as f64)
    }

    /// Value at `t`, clamped to the domain.
    pub fn value(&self, t: f64) -> f64 {
        let (j, x) = self.locate(t);
        if x == 0.0 {
            return self.values[j];
        }
        let h = self.grid.h();
        let x2 = x * x;
        let x3 = x2 * x;
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = x3 - 2.0 * x2 + x;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = x3 - x2;
        h00 * self.values[j] + h10 * h * self.derivs[j] + h01 * self.values[j + 1] + h11 * h * self.derivs[j + 1]
    }

    /// Derivative at `t`, clamped to the domain.
    pub fn deriv(&self, t: f64) -> f64 {
        let (j, x) = self.locate(t);
        if x == 0.0 {
            return self.derivs[j];
        }
        let h = self.grid.h();
        let x2 = x * x;
        let d00 = 6.0 * x2 - 6.0 * x;
        let d10 = 3.0 * x2 - 4.0 * x + 1.0;
        let d01 = -6.0 * x2 + 6.0 * x;
        let d11 = 3.0 * x2 - 2.0 * x;
        (d00 * self.values[j] + d01 * self.values[j + 1]) / h + d10 * self.derivs[j] + d11 * self.derivs[j + 1]
    }

    pub fn checked_value(&self, t: f64) -> Result<f64> {
        if !self.grid.contains(t) {
            return Err(Error::Domain {
                what: "evaluation time",
                value: t,
            });
        }
        Ok(self.value(t))
    }

    pub fn checked_deriv(&self, t: f64) -> Result<f64> {
        if !self.grid.contains(t) {
            return Err(Error::Domain {
                what: "evaluation time",
                value: t,
            });
        }
        Ok(self.deriv(t))
    }

    /// History segment `u_t(θ) = u(t + θ)` on `[-r, 0]`.
    pub fn segment(&self, t: f64) -> Result<Segment<'_>> {
        segment(self, t)
    }

    fn zip_with(&self, other: &GridFn, op: impl Fn(f64, f64) -> f64) -> Result<GridFn> {
        if self.grid != other.grid {
            return Err(Error::Precondition("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        let derivs = self.derivs.iter().zip(&other.derivs).map(|(a, b)| op(*a, *b)).collect();
        Ok(GridFn {
            grid: self.grid,
            values,
            derivs,
        })
    }

    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> GridFn {
        GridFn {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
            derivs: self.derivs.iter().map(|v| c * v).collect(),
        }
    }
}

/// Read access to a history segment `φ` on `[-r, 0]`.
///
/// Nonlinearities see their argument only through this trait, so the same
/// functional can be evaluated on grid data or on a trajectory under
/// construction.
pub trait History {
    fn value(&self, theta: f64) -> f64;
    fn deriv(&self, theta: f64) -> f64;
}

/// The segment `u_t` of a grid function.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    origin: &'a GridFn,
    t: f64,
}

impl Segment<'_> {
    pub fn anchor(&self) -> f64 {
        self.t
    }

    pub fn origin(&self) -> &GridFn {
        self.origin
    }
}

impl History for Segment<'_> {
    fn value(&self, theta: f64) -> f64 {
        self.origin.value(self.t + theta)
    }

    fn deriv(&self, theta: f64) -> f64 {
        self.origin.deriv(self.t + theta)
    }
}

pub fn segment(u: &GridFn, t: f64) -> Result<Segment<'_>> {
    if !(-NODE_SNAP..=1.0 + NODE_SNAP).contains(&t) {
        return Err(Error::Domain {
            what: "segment anchor",
            value: t,
        });
    }
    Ok(Segment {
        origin: u,
        t: t.clamp(0.0, 1.0),
    })
}

/// Closed interval with endpoints snapped to grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    grid: Grid,
    lo: usize,
    hi: usize,
}

impl Interval {
    pub fn new(grid: &Grid, lo: f64, hi: f64) -> Result<Self> {
        if !grid.contains(lo) {
            return Err(Error::Domain {
                what: "interval start",
                value: lo,
            });
        }
        if !grid.contains(hi) {
            return Err(Error::Domain {
                what: "interval end",
                value: hi,
            });
        }
        let last = (grid.len() - 1) as f64;
        let lo_j = libm::round(grid.position(lo)).clamp(0.0, last) as usize;
        let hi_j = libm::round(grid.position(hi)).clamp(0.0, last) as usize;
        if lo_j >= hi_j {
            return Err(Error::Domain {
                what: "interval length",
                value: hi - lo,
            });
        }
        Ok(Self {
            grid: *grid,
            lo: lo_j,
            hi: hi_j,
        })
    }

    /// `[-r, 1]`
    pub fn whole(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            lo: 0,
            hi: grid.len() - 1,
        }
    }

    /// `[0, 1]`
    pub fn unit(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            lo: grid.zero_index(),
            hi: grid.len() - 1,
        }
    }

    /// `[-r, 0]`
    pub fn history(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            lo: 0,
            hi: grid.zero_index(),
        }
    }

    pub fn lo(&self) -> f64 {
        self.grid.t(self.lo)
    }

    pub fn hi(&self) -> f64 {
        self.grid.t(self.hi)
    }

    pub fn indices(&self) -> core::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    fn check(&self, u: &GridFn) -> Result<()> {
        if self.grid != u.grid {
            return Err(Error::Domain {
                what: "interval grid resolution",
                value: u.grid.m() as f64,
            });
        }
        Ok(())
    }
}

fn sup_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// `sup_{t in I} |u(t)|` over grid nodes.
pub fn norm_inf(u: &GridFn, interval: &Interval) -> Result<f64> {
    interval.check(u)?;
    Ok(sup_abs(&u.values[interval.indices()]))
}

/// `sup_{t in I} |u'(t)|` over grid nodes.
pub fn norm_inf_deriv(u: &GridFn, interval: &Interval) -> Result<f64> {
    interval.check(u)?;
    Ok(sup_abs(&u.derivs[interval.indices()]))
}

/// C¹ norm `max(‖u‖_∞, ‖u'‖_∞)` on `I`.
pub fn norm_c1(u: &GridFn, interval: &Interval) -> Result<f64> {
    Ok(norm_inf(u, interval)?.max(norm_inf_deriv(u, interval)?))
}

/// Membership in the cone of functions that are non-negative on `[-r, 1]`
/// and vanish together with their derivative on `[-r, 0]`.
pub fn in_cone_k0(u: &GridFn, tol: f64) -> bool {
    let k = u.grid.zero_index();
    let nonneg = u.values.iter().all(|&v| v >= -tol);
    let flat = (0..=k).all(|j| u.values[j].abs() <= tol && u.derivs[j].abs() <= tol);
    nonneg && flat
}

/// Squared quadratic bump `(1 - ((t - c)/w)²)²` on `|t - c| < w`, with derivative.
fn bump(t: f64, center: f64, width: f64) -> (f64, f64) {
    let x = (t - center) / width;
    if x.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - x * x;
    (q * q, -4.0 * x * q / width)
}

/// Draws `n` functions `psi + v` with `v` in the cone and `‖v‖_{[0,1],1} = rho`.
///
/// Each `v` is `t²` times a random non-negative combination of a constant and
/// a few shifted bumps, extended by zero to `[-r, 0]` and rescaled onto the
/// sphere. The sequence is a pure function of `seed`.
pub fn boundary_sample(psi: &GridFn, rho: f64, n: usize, seed: u64) -> Result<Vec<GridFn>> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain {
            what: "sphere radius rho",
            value: rho,
        });
    }
    let grid = psi.grid;
    let unit = Interval::unit(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let base: f64 = rng.random();
        let n_bumps = rng.random_range(1..=4usize);
        let bumps: Vec<(f64, f64, f64)> = (0..n_bumps)
            .map(|_| (rng.random::<f64>(), rng.random_range(0.1..0.6), rng.random::<f64>()))
            .collect();
        let v = GridFn::from_fn(grid, |t| {
            if t <= 0.0 {
                return (0.0, 0.0);
            }
            let (mut p, mut dp) = (base, 0.0);
            for &(c, w, a) in &bumps {
                let (b, db) = bump(t, c, w);
                p += a * b;
                dp += a * db;
            }
            (t * t * p, 2.0 * t * p + t * t * dp)
        });
        let norm = norm_c1(&v, &unit)?;
        if norm <= f64::MIN_POSITIVE {
            continue;
        }
        let v = v.scale(rho / norm);
        out.push(psi.add(&v)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_grid(m: usize) -> Grid {
        Grid::new(0.5, m).unwrap()
    }

    fn psi_example(grid: Grid) -> GridFn {
        GridFn::from_fn(grid, |t| if t < 0.0 { (t * t, 2.0 * t) } else { (0.0, 0.0) })
    }

    fn w_example(grid: Grid) -> GridFn {
        GridFn::from_fn(grid, |t| if t > 0.0 { (t * t, 2.0 * t) } else { (0.0, 0.0) })
    }

    #[test]
    fn grid_rounds_resolution_up() {
        let g = Grid::new(1.0 / 3.0, 200).unwrap();
        assert_eq!(g.m(), 201);
        assert_eq!(g.zero_index(), 67);
        let g = Grid::new(0.5, 200).unwrap();
        assert_eq!((g.m(), g.zero_index(), g.len()), (200, 100, 301));
        assert!(Grid::new(0.5, 8).is_err());
        assert!(Grid::new(-0.5, 32).is_err());
    }

    #[test]
    fn norms_of_reference_functions() {
        let g = half_grid(64);
        let unit = Interval::unit(&g);
        let whole = Interval::whole(&g);
        let zero = GridFn::zeros(g);
        assert_eq!(norm_inf(&zero, &whole).unwrap(), 0.0);
        assert_eq!(norm_c1(&zero, &whole).unwrap(), 0.0);

        let w = w_example(g);
        assert_eq!(norm_inf(&w, &unit).unwrap(), 1.0);
        assert_eq!(norm_c1(&w, &unit).unwrap(), 2.0);

        let psi = psi_example(g);
        let iv = Interval::new(&g, -0.5, 1.0).unwrap();
        assert_eq!(norm_inf(&psi, &iv).unwrap(), 0.25);
        assert_eq!(norm_c1(&psi, &iv).unwrap(), 1.0);
    }

    #[test]
    fn interval_outside_domain_is_rejected() {
        let g = half_grid(32);
        assert!(matches!(Interval::new(&g, -0.75, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(Interval::new(&g, 0.0, 1.5), Err(Error::Domain { .. })));
        assert!(Interval::new(&g, 0.5, 0.5).is_err());
        let iv = Interval::new(&g, 0.1, 0.9).unwrap();
        assert!((iv.lo() - 3.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn segments_shift_the_origin() {
        let g = half_grid(32);
        let lin = GridFn::from_fn(g, |t| (t, 1.0));
        let s = lin.segment(0.5).unwrap();
        assert_eq!(s.value(-0.5), 0.0);
        assert_eq!(s.value(0.0), 0.5);
        assert_eq!(s.deriv(-0.25), 1.0);

        let psi = psi_example(g);
        let s0 = psi.segment(0.0).unwrap();
        for theta in [-0.5, -0.3, -0.1, 0.0] {
            assert!((s0.value(theta) - theta * theta).abs() < 1e-15);
        }
        assert_eq!(psi.segment(0.5).unwrap().value(-0.5), 0.0);
        assert!(psi.segment(1.2).is_err());
        assert!(psi.segment(-0.1).is_err());
    }

    #[test]
    fn cone_membership() {
        let g = half_grid(32);
        assert!(in_cone_k0(&w_example(g), crate::CONE_TOL));
        assert!(!in_cone_k0(&GridFn::from_fn(g, |_| (-1.0, 0.0)), crate::CONE_TOL));
        assert!(!in_cone_k0(&psi_example(g), crate::CONE_TOL));
    }

    #[test]
    fn hermite_is_exact_at_nodes_and_for_cubics() {
        let g = half_grid(20);
        let p = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t - 3.0 * t * t * t;
        let dp = |t: f64| -2.0 + t - 9.0 * t * t;
        let u = GridFn::from_fn(g, |t| (p(t), dp(t)));
        for j in 0..g.len() {
            assert_eq!(u.value(g.t(j)), u.values()[j]);
        }
        for j in 0..g.len() - 1 {
            let mid = 0.5 * (g.t(j) + g.t(j + 1));
            assert!((u.value(mid) - p(mid)).abs() < 1e-13);
            assert!((u.deriv(mid) - dp(mid)).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_lie_on_the_sphere() {
        let g = half_grid(64);
        let psi = psi_example(g);
        let unit = Interval::unit(&g);
        let samples = boundary_sample(&psi, 0.7, 25, 11).unwrap();
        assert_eq!(samples.len(), 25);
        for u in &samples {
            let v = u.sub(&psi).unwrap();
            assert!(in_cone_k0(&v, 1e-12));
            assert!((norm_c1(&v, &unit).unwrap() - 0.7).abs() <= 1e-12);
        }
        assert_eq!(samples, boundary_sample(&psi, 0.7, 25, 11).unwrap());
        assert_ne!(samples, boundary_sample(&psi, 0.7, 25, 12).unwrap());
        assert!(boundary_sample(&psi, 1.0, 0, 1).unwrap().is_empty());
        assert!(boundary_sample(&psi, 0.0, 3, 1).is_err());
    }
}
