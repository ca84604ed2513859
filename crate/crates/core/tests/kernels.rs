use fbvp_core::kernels::{dk_hat_dt, extend_dk_dt, extend_gamma, extend_k, gamma_hat, gamma_hat_deriv, k_hat};
use fbvp_core::BcKind;
use proptest::prelude::*;

// Branches written out independently of the library: (s <= t, s >= t).
fn branches(bc: BcKind, t: f64, s: f64) -> (f64, f64) {
    match bc {
        BcKind::Bc1 => (
            s * (1.0 - t) * (2.0 * t - t * s - s) / 2.0,
            (1.0 - s).powi(2) * t * t / 2.0,
        ),
        BcKind::Bc2 => ((2.0 * t - t * t - s) * s / 2.0, (1.0 - s) * t * t / 2.0),
        BcKind::Bc3 => (s * (2.0 * t - s) / 2.0, t * t / 2.0),
    }
}

#[test]
fn nonnegative_on_fine_grid() {
    for bc in BcKind::ALL {
        for i in 0..=200 {
            for j in 0..=200 {
                let (t, s) = (i as f64 / 200.0, j as f64 / 200.0);
                let k = k_hat(bc, t, s).unwrap();
                assert!(k >= 0.0, "{bc:?} k({t},{s}) = {k}");
            }
        }
    }
}

#[test]
fn branches_agree_on_diagonal() {
    for bc in BcKind::ALL {
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let (lo, hi) = branches(bc, t, t);
            assert!((lo - hi).abs() <= 1e-14, "{bc:?} t = {t}");
            assert!((k_hat(bc, t, t).unwrap() - lo).abs() <= 1e-14);
        }
    }
}

#[test]
fn gamma_at_tenths() {
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        assert_eq!(gamma_hat(BcKind::Bc1, t).unwrap(), t * t);
        assert_eq!(gamma_hat(BcKind::Bc2, t).unwrap(), t * t / 2.0);
        assert_eq!(gamma_hat(BcKind::Bc3, t).unwrap(), t * t / 2.0);
        assert_eq!(gamma_hat_deriv(BcKind::Bc1, t).unwrap(), 2.0 * t);
    }
}

fn bc_strategy() -> impl Strategy<Value = BcKind> {
    prop_oneof![Just(BcKind::Bc1), Just(BcKind::Bc2), Just(BcKind::Bc3)]
}

proptest! {
    #[test]
    fn matches_written_out_branches(bc in bc_strategy(), t in 0.0..=1.0f64, s in 0.0..=1.0f64) {
        let (lo, hi) = branches(bc, t, s);
        let want = if s <= t { lo } else { hi };
        prop_assert!((k_hat(bc, t, s).unwrap() - want).abs() <= 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference(bc in bc_strategy(), t in 0.01..0.99f64, s in 0.0..=1.0f64) {
        let e = 1e-6;
        prop_assume!((t - s).abs() > 3.0 * e);
        let fd = (k_hat(bc, t + e, s).unwrap() - k_hat(bc, t - e, s).unwrap()) / (2.0 * e);
        prop_assert!((dk_hat_dt(bc, t, s).unwrap() - fd).abs() <= 1e-6);
    }

    #[test]
    fn extensions_vanish_before_zero(bc in bc_strategy(), t in -2.0..0.0f64, s in 0.0..=1.0f64) {
        prop_assert_eq!(extend_k(bc, t, s).unwrap(), 0.0);
        prop_assert_eq!(extend_dk_dt(bc, t, s).unwrap(), 0.0);
        prop_assert_eq!(extend_gamma(bc, t).unwrap(), 0.0);
    }
}
