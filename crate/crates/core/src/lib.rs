//! Numerical core for parameter-dependent perturbed Hammerstein equations
//!
//! ```text
//! u(t) = psi(t) + lambda * ( ∫_0^1 k(t,s) g(s) F(s, u_s) ds + gamma(t) B[u] ),   t in [-r, 1]
//! ```
//!
//! arising from third-order delay differential equations `u''' + lambda F(t, u_t) = 0`
//! with an initial history `u = psi` on `[-r, 0]` and a functional boundary
//! condition at `t = 1`. The crate finds pairs `(lambda*, u*)` with `u* - psi` on a
//! prescribed sphere of the cone of non-negative C¹ functions vanishing on
//! `[-r, 0]`, checks the hypotheses guaranteeing such pairs, and verifies
//! returned pairs against the differential formulation.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the command
//! line front end live in the `fbvp` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod funcspace;
pub mod hammerstein;
pub mod hypotheses;
pub mod kernels;
mod linalg;
pub mod quadrature;
pub mod registry;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use funcspace::{boundary_sample, in_cone_k0, norm_c1, norm_inf, Grid, GridFn, History, Interval, Segment};
pub use hammerstein::{Problem, ProblemDef};
pub use hypotheses::{check_structural, condc_value, estimate_eta_delta, estimate_inf_f, HypothesisReport};
pub use kernels::BcKind;
pub use solver::{
    find_pair, fixed_point_solve, lambda_bar_bound, norm_response, sweep, PairResult, SolveOptions, SweepRow,
};
pub use verify::{verify, VerifyReport, VerifyTolerances};

/// Default tolerance for cone membership tests.
pub const CONE_TOL: f64 = 1e-10;
