use std::time::Instant;

use fbvp_core::kernels::green_solve;
use fbvp_core::registry::{ConstantB, ConstantF, QuadraticHistory};
use fbvp_core::verify::bc_residual;
use fbvp_core::{BcKind, GridFn, ProblemDef};

/// `-u''' = t^n`, `u(0) = u'(0) = 0` and the homogeneous terminal condition:
/// `u = c t² - t^{n+3} / ((n+1)(n+2)(n+3))`.
fn oracle(bc: BcKind, n: i32, t: f64) -> (f64, f64) {
    let a = (n + 1) as f64;
    let b = (n + 2) as f64;
    let c3 = (n + 3) as f64;
    let c = match bc {
        BcKind::Bc1 => 1.0 / (a * b * c3),
        BcKind::Bc2 => 1.0 / (2.0 * a * b),
        BcKind::Bc3 => 1.0 / (2.0 * a),
    };
    (
        c * t * t - t.powi(n + 3) / (a * b * c3),
        2.0 * c * t - t.powi(n + 2) / (a * b),
    )
}

#[test]
fn monomial_loads_match_closed_forms() {
    for bc in BcKind::ALL {
        let mut def = ProblemDef::linear_bc3().with_resolution(200, Some(400));
        def.bc = bc;
        def.f = Box::new(ConstantF { c: 1.0 });
        def.b = Box::new(ConstantB { c: 0.0 });
        def.psi = Box::new(QuadraticHistory { a: 0.0 });
        let p = def.build().unwrap();
        for n in 0..=2 {
            let start = Instant::now();
            let y = GridFn::from_fn(*p.grid(), |s| {
                let s = s.max(0.0);
                (s.powi(n), if n == 0 { 0.0 } else { n as f64 * s.powi(n - 1) })
            });
            let u = green_solve(bc, &y, p.rule());
            let mut err = 0.0_f64;
            for (j, t) in p.grid().nodes().enumerate() {
                let (v, d) = if t < 0.0 { (0.0, 0.0) } else { oracle(bc, n, t) };
                err = err.max((u.values()[j] - v).abs()).max((u.derivs()[j] - d).abs());
            }
            assert!(err <= 1e-6, "{bc:?} y = s^{n}: error {err:e}");
            let res = bc_residual(&p, 0.0, &u).unwrap();
            assert!(res.iter().all(|&r| r <= 1e-6), "{bc:?} y = s^{n}: {res:?}");
            assert!(start.elapsed().as_secs_f64() < 1.0);
        }
    }
}
