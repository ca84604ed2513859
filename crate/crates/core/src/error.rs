use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    Domain { what: &'static str, value: f64 },
    /// A constructor or registry parameter is invalid.
    InvalidParameter(String),
    /// A registry lookup failed.
    UnknownName {
        kind: &'static str,
        name: String,
        known: &'static [&'static str],
    },
    /// A nonlinearity could not be evaluated at time `t`.
    Evaluation { t: f64, detail: String },
    /// The operation's precondition does not hold.
    Precondition(String),
    /// Fixed-point iteration failed to reach the requested tolerance.
    NonConvergence {
        lambda: f64,
        best_residual: f64,
        iterations: usize,
        trace: Vec<f64>,
    },
    /// Continuation did not bracket the target norm.
    NoBracket {
        rho: f64,
        last_lambda: f64,
        last_n: f64,
        reason: String,
    },
    /// Newton step hit a singular Jacobian.
    Singular,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::UnknownName { kind, name, known } => {
                write!(f, "unknown {kind} '{name}' (known: {})", known.join(", "))
            }
            Error::Evaluation { t, detail } => write!(f, "evaluation failed at t = {t}: {detail}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::NonConvergence {
                lambda,
                best_residual,
                iterations,
                ..
            } => write!(
                f,
                "no convergence at lambda = {lambda} after {iterations} iterations (best residual {best_residual:e})"
            ),
            Error::NoBracket {
                rho,
                last_lambda,
                last_n,
                reason,
            } => write!(
                f,
                "could not bracket rho = {rho}: {reason} (last good lambda = {last_lambda}, N = {last_n})"
            ),
            Error::Singular => write!(f, "singular Jacobian"),
        }
    }
}

impl core::error::Error for Error {}
