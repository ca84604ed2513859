//! Composite Simpson rules, including kernel-weighted rules whose panels are
//! split at the kink `s = t` of a Green's function.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{self, BcKind};

/// Composite Simpson on equally spaced samples.
///
/// An odd number of intervals is closed with the 3/8 rule on the last three.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let even = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut acc = 0.0;
            for p in (0..even).step_by(2) {
                acc += values[p] + 4.0 * values[p + 1] + values[p + 2];
            }
            acc *= h / 3.0;
            if even < n {
                let v = &values[even..];
                acc += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            acc
        }
    }
}

/// Uniform composite Simpson rule on `[0, 1]` with an even number of subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadRule {
    panels: usize,
}

impl QuadRule {
    pub fn new(subintervals: usize) -> Result<Self> {
        if subintervals < 2 || !subintervals.is_multiple_of(2) {
            return Err(Error::InvalidParameter(alloc::format!(
                "quadrature needs an even number of subintervals >= 2, got {subintervals}"
            )));
        }
        Ok(Self { panels: subintervals })
    }

    pub fn subintervals(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.panels + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        1.0 / self.panels as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.panels as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Plain Simpson weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.len())
            .map(|i| {
                let c = if i == 0 || i == self.panels {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect()
    }

    /// Weights `ω_i` with `∫_0^1 kernel(s) w(s) ds ≈ Σ ω_i w(s_i)` for a kernel that
    /// is smooth on `[0, split]` and on `[split, 1]`.
    ///
    /// Panels not containing `split` use Simpson on `kernel · w`. The panel that
    /// contains it interpolates `w` by its Simpson quadratic and integrates
    /// `kernel · L_j` exactly on each side of the split with 3-point Gauss.
    pub fn split_weights(&self, split: f64, kernel: impl Fn(f64) -> f64) -> Vec<f64> {
        const GX: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const GW: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let h = self.h();
        let mut w = vec![0.0; self.len()];
        for p in 0..self.panels / 2 {
            let i0 = 2 * p;
            let a = self.node(i0);
            let b = self.node(i0 + 2);
            if split - a > 1e-14 && b - split > 1e-14 {
                let nodes = [a, a + h, b];
                let lagrange = |j: usize, s: f64| {
                    let mut l = 1.0;
                    for (k, &x) in nodes.iter().enumerate() {
                        if k != j {
                            l *= (s - x) / (nodes[j] - x);
                        }
                    }
                    l
                };
                for (lo, hi) in [(a, split), (split, b)] {
                    let half = 0.5 * (hi - lo);
                    let mid = 0.5 * (hi + lo);
                    for (gx, gw) in GX.iter().zip(GW) {
                        let s = mid + half * gx;
                        let ks = kernel(s) * gw * half;
                        for j in 0..3 {
                            w[i0 + j] += ks * lagrange(j, s);
                        }
                    }
                }
            } else {
                for (j, c) in [1.0, 4.0, 1.0].into_iter().enumerate() {
                    let s = self.node(i0 + j);
                    w[i0 + j] += c * h / 3.0 * kernel(s);
                }
            }
        }
        w
    }

    /// Weights for `∫_0^1 k(t,s) w(s) ds` (or `∂_t k`) with the extended kernel.
    pub fn kernel_weights(&self, bc: BcKind, t: f64, deriv: bool) -> Vec<f64> {
        if t < 0.0 {
            return vec![0.0; self.len()];
        }
        let t = t.min(1.0);
        if deriv {
            self.split_weights(t, |s| kernels::dk_hat_dt_unchecked(bc, t, s))
        } else {
            self.split_weights(t, |s| kernels::k_hat_unchecked(bc, t, s))
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `∫_0^1 k(t,s) w(s) ds` for `w` sampled on the nodes of `rule`.
pub fn integrate_kernel_weighted(rule: &QuadRule, bc: BcKind, t: f64, w: &[f64]) -> Result<f64> {
    if w.len() != rule.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "weight samples: expected {}, got {}",
            rule.len(),
            w.len()
        )));
    }
    Ok(dot(&rule.kernel_weights(bc, t, false), w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_cubics_exactly() {
        for n in [2usize, 3, 4, 7, 10] {
            let h = 1.0 / n as f64;
            let vals: Vec<f64> = (0..=n)
                .map(|i| {
                    let x = i as f64 * h;
                    x * x * x - x + 2.0
                })
                .collect();
            assert!((simpson(&vals, h) - (0.25 - 0.5 + 2.0)).abs() < 1e-14, "n = {n}");
        }
        assert_eq!(simpson(&[1.0], 0.1), 0.0);
    }

    #[test]
    fn rejects_odd_panel_counts() {
        assert!(QuadRule::new(5).is_err());
        assert!(QuadRule::new(0).is_err());
        assert!(QuadRule::new(4).is_ok());
    }

    #[test]
    fn bc3_at_right_end() {
        let rule = QuadRule::new(400).unwrap();
        let ones = vec![1.0; rule.len()];
        let v = integrate_kernel_weighted(&rule, BcKind::Bc3, 1.0, &ones).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-9);
        let zeros = vec![0.0; rule.len()];
        for t in [0.0, 0.3, 0.77, 1.0] {
            assert_eq!(integrate_kernel_weighted(&rule, BcKind::Bc3, t, &zeros).unwrap(), 0.0);
        }
        assert!(integrate_kernel_weighted(&rule, BcKind::Bc3, 0.5, &ones[1..]).is_err());
    }

    #[test]
    fn split_panel_matches_closed_form_off_node() {
        // ∫_0^1 k̂_1(t,s) ds = (t² - t³)/6 for any t, including t inside a panel.
        let rule = QuadRule::new(10).unwrap();
        let ones = vec![1.0; rule.len()];
        for t in [0.013, 0.25, 0.5, 0.61803, 0.999] {
            let v = integrate_kernel_weighted(&rule, BcKind::Bc1, t, &ones).unwrap();
            assert!((v - (t * t - t * t * t) / 6.0).abs() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn fourth_order_for_cubic_weights() {
        // Kernel times a cubic is a quintic per branch: Simpson error ~ h^4.
        let exact = {
            let fine = QuadRule::new(4096).unwrap();
            let w: Vec<f64> = fine.nodes().map(|s| 1.0 + s - 2.0 * s * s * s).collect();
            integrate_kernel_weighted(&fine, BcKind::Bc2, 0.4, &w).unwrap()
        };
        let err = |n: usize| {
            let rule = QuadRule::new(n).unwrap();
            let w: Vec<f64> = rule.nodes().map(|s| 1.0 + s - 2.0 * s * s * s).collect();
            (integrate_kernel_weighted(&rule, BcKind::Bc2, 0.4, &w).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(20), err(40));
        assert!(e1 > 0.0);
        let order = libm::log2(e1 / e2);
        assert!(order > 3.5, "observed order {order}");
    }
}
