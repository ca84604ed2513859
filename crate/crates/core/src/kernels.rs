//! Green's functions of `-u''' = y` under `u(0) = u'(0) = 0` and one terminal
//! condition, their t-derivatives, the boundary profiles γ, and the Heaviside
//! extensions to `[-r, 1]`.
//!
//! The t-derivatives, differentiated by hand from each branch:
//!
//! ```text
//! BC1  ∂t k̂1 = s (1 - 2t + t s)   (s <= t)      (1 - s)² t   (s >= t)
//! BC2  ∂t k̂2 = s (1 - t)          (s <= t)      (1 - s) t    (s >= t)
//! BC3  ∂t k̂3 = s                  (s <= t)      t            (s >= t)
//! ```
//!
//! All three are continuous across `s = t`.

use crate::error::{Error, Result};
use crate::funcspace::GridFn;
use crate::quadrature::QuadRule;

/// Terminal condition family: `u(1)`, `u'(1)` or `u''(1)` equals `λ B[u]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcKind {
    Bc1,
    Bc2,
    Bc3,
}

impl BcKind {
    pub const ALL: [BcKind; 3] = [BcKind::Bc1, BcKind::Bc2, BcKind::Bc3];

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(BcKind::Bc1),
            2 => Ok(BcKind::Bc2),
            3 => Ok(BcKind::Bc3),
            _ => Err(Error::InvalidParameter(alloc::format!(
                "boundary condition kind must be 1, 2 or 3, got {i}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            BcKind::Bc1 => 1,
            BcKind::Bc2 => 2,
            BcKind::Bc3 => 3,
        }
    }

    /// Order of the derivative fixed at `t = 1`.
    pub fn terminal_order(self) -> usize {
        self.index() as usize - 1
    }
}

const SLACK: f64 = 1e-12;

fn check_unit(what: &'static str, x: f64) -> Result<()> {
    if (-SLACK..=1.0 + SLACK).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

pub(crate) fn k_hat_unchecked(bc: BcKind, t: f64, s: f64) -> f64 {
    match (bc, s <= t) {
        (BcKind::Bc1, true) => 0.5 * s * (1.0 - t) * (2.0 * t - t * s - s),
        (BcKind::Bc1, false) => 0.5 * (1.0 - s) * (1.0 - s) * t * t,
        (BcKind::Bc2, true) => 0.5 * (2.0 * t - t * t - s) * s,
        (BcKind::Bc2, false) => 0.5 * (1.0 - s) * t * t,
        (BcKind::Bc3, true) => 0.5 * s * (2.0 * t - s),
        (BcKind::Bc3, false) => 0.5 * t * t,
    }
}

pub(crate) fn dk_hat_dt_unchecked(bc: BcKind, t: f64, s: f64) -> f64 {
    match (bc, s <= t) {
        (BcKind::Bc1, true) => s * (1.0 - 2.0 * t + t * s),
        (BcKind::Bc1, false) => (1.0 - s) * (1.0 - s) * t,
        (BcKind::Bc2, true) => s * (1.0 - t),
        (BcKind::Bc2, false) => (1.0 - s) * t,
        (BcKind::Bc3, true) => s,
        (BcKind::Bc3, false) => t,
    }
}

/// Green's function `k̂_i(t, s)` on `[0,1]²`.
pub fn k_hat(bc: BcKind, t: f64, s: f64) -> Result<f64> {
    check_unit("t", t)?;
    check_unit("s", s)?;
    Ok(k_hat_unchecked(bc, t, s))
}

/// `∂_t k̂_i(t, s)`; at `t = s` both branches give the same value.
pub fn dk_hat_dt(bc: BcKind, t: f64, s: f64) -> Result<f64> {
    check_unit("t", t)?;
    check_unit("s", s)?;
    Ok(dk_hat_dt_unchecked(bc, t, s))
}

pub(crate) fn gamma_hat_unchecked(bc: BcKind, t: f64) -> f64 {
    match bc {
        BcKind::Bc1 => t * t,
        BcKind::Bc2 | BcKind::Bc3 => 0.5 * t * t,
    }
}

pub(crate) fn gamma_hat_deriv_unchecked(bc: BcKind, t: f64) -> f64 {
    match bc {
        BcKind::Bc1 => 2.0 * t,
        BcKind::Bc2 | BcKind::Bc3 => t,
    }
}

/// `γ̂_1 = t²`, `γ̂_2 = γ̂_3 = t²/2`.
pub fn gamma_hat(bc: BcKind, t: f64) -> Result<f64> {
    check_unit("t", t)?;
    Ok(gamma_hat_unchecked(bc, t))
}

pub fn gamma_hat_deriv(bc: BcKind, t: f64) -> Result<f64> {
    check_unit("t", t)?;
    Ok(gamma_hat_deriv_unchecked(bc, t))
}

fn check_extended(t: f64) -> Result<()> {
    if t.is_finite() && t <= 1.0 + SLACK {
        Ok(())
    } else {
        Err(Error::Domain { what: "t", value: t })
    }
}

/// `H(t) k̂_i(t, s)` for `t` in `[-r, 1]`.
pub fn extend_k(bc: BcKind, t: f64, s: f64) -> Result<f64> {
    check_extended(t)?;
    check_unit("s", s)?;
    Ok(if t < 0.0 { 0.0 } else { k_hat_unchecked(bc, t, s) })
}

pub fn extend_dk_dt(bc: BcKind, t: f64, s: f64) -> Result<f64> {
    check_extended(t)?;
    check_unit("s", s)?;
    Ok(if t < 0.0 { 0.0 } else { dk_hat_dt_unchecked(bc, t, s) })
}

/// `H(t) γ̂_i(t)` for `t` in `[-r, 1]`.
pub fn extend_gamma(bc: BcKind, t: f64) -> Result<f64> {
    check_extended(t)?;
    Ok(if t < 0.0 { 0.0 } else { gamma_hat_unchecked(bc, t) })
}

pub fn extend_gamma_deriv(bc: BcKind, t: f64) -> Result<f64> {
    check_extended(t)?;
    Ok(if t < 0.0 { 0.0 } else { gamma_hat_deriv_unchecked(bc, t) })
}

/// Solves `-u''' = y` on `[0, 1]` with the homogeneous conditions of `bc` by
/// quadrature against `k̂_i` and `∂_t k̂_i`; the result vanishes on `[-r, 0]`.
///
/// `y` is read on `[0, 1]` only.
pub fn green_solve(bc: BcKind, y: &GridFn, rule: &QuadRule) -> GridFn {
    let grid = *y.grid();
    let ys: alloc::vec::Vec<f64> = rule.nodes().map(|s| y.value(s)).collect();
    GridFn::from_fn(grid, |t| {
        if t < 0.0 {
            return (0.0, 0.0);
        }
        let wv = rule.kernel_weights(bc, t, false);
        let wd = rule.kernel_weights(bc, t, true);
        let v = wv.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let d = wd.iter().zip(&ys).map(|(a, b)| a * b).sum();
        (v, d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Grid;

    #[test]
    fn printed_values() {
        assert_eq!(k_hat(BcKind::Bc1, 0.5, 0.25).unwrap(), 0.0390625);
        assert!((k_hat(BcKind::Bc3, 0.3, 0.7).unwrap() - 0.045).abs() < 1e-16);
        for s in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert_eq!(k_hat(BcKind::Bc1, 1.0, s).unwrap(), 0.0);
            assert_eq!(dk_hat_dt(BcKind::Bc2, 1.0, s).unwrap(), 0.0);
        }
        for t in [0.1, 0.4, 0.8] {
            assert_eq!(dk_hat_dt(BcKind::Bc3, t, 0.95).unwrap(), t);
        }
        assert_eq!(gamma_hat(BcKind::Bc1, 1.0).unwrap(), 1.0);
        assert_eq!(gamma_hat(BcKind::Bc2, 1.0).unwrap(), 0.5);
        assert_eq!(gamma_hat(BcKind::Bc3, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(k_hat(BcKind::Bc1, 1.5, 0.2).is_err());
        assert!(k_hat(BcKind::Bc1, 0.5, -0.2).is_err());
        assert!(dk_hat_dt(BcKind::Bc2, -0.1, 0.2).is_err());
        assert!(gamma_hat(BcKind::Bc3, 2.0).is_err());
        assert!(extend_k(BcKind::Bc1, 0.5, 1.5).is_err());
        assert!(BcKind::from_index(4).is_err());
    }

    #[test]
    fn heaviside_extension() {
        assert_eq!(extend_k(BcKind::Bc1, -0.25, 0.5).unwrap(), 0.0);
        assert_eq!(extend_gamma(BcKind::Bc1, -0.1).unwrap(), 0.0);
        assert_eq!(extend_gamma_deriv(BcKind::Bc2, -0.1).unwrap(), 0.0);
        assert_eq!(extend_dk_dt(BcKind::Bc3, -0.3, 0.1).unwrap(), 0.0);
        assert!((extend_k(BcKind::Bc3, 0.3, 0.7).unwrap() - 0.045).abs() < 1e-16);
    }

    #[test]
    fn green_solve_constant_load() {
        let grid = Grid::new(0.5, 200).unwrap();
        let rule = QuadRule::new(400).unwrap();
        let one = GridFn::from_fn(grid, |_| (1.0, 0.0));
        let u1 = green_solve(BcKind::Bc1, &one, &rule);
        assert!((u1.value(0.5) - 1.0 / 48.0).abs() < 1e-12);
        let u3 = green_solve(BcKind::Bc3, &one, &rule);
        assert!((u3.value(1.0) - 1.0 / 3.0).abs() < 1e-12);
        let zero = green_solve(BcKind::Bc2, &GridFn::zeros(grid), &rule);
        assert!(zero.values().iter().chain(zero.derivs()).all(|&v| v == 0.0));
        assert!(u1.values()[..=grid.zero_index()].iter().all(|&v| v == 0.0));
    }
}
