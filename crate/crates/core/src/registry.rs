//! Built-in nonlinearities, weights and initial histories, looked up by name.
//!
//! Problems reference these by name plus numeric parameters. Every built-in
//! segment functional is non-negative on the affine cone and bounded on
//! bounded sets, so the Carathéodory-type requirements hold by construction.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::funcspace::{GridFn, History, Interval};
use crate::quadrature::simpson;

/// Named numeric parameters of a built-in.
pub type Params = BTreeMap<String, f64>;

/// Exponents above this are reported instead of overflowing.
pub const EXP_CLAMP: f64 = 700.0;

/// `F(t, φ)` acting on history segments.
pub trait SegmentFunctional: Send + Sync {
    fn name(&self) -> &str;

    fn evaluate(&self, t: f64, phi: &dyn History) -> Result<f64>;

    /// Largest lag `|θ|` read from the segment.
    fn max_lag(&self) -> f64 {
        0.0
    }

    /// A closed-form `δ_ρ(t)` with `F(t, u_t) >= δ_ρ(t)` on the ρ-sphere, if one is known.
    fn lower_bound(&self, _t: f64, _rho: f64) -> Option<f64> {
        None
    }
}

/// `B[u]` acting on the whole trajectory.
pub trait BoundaryFunctional: Send + Sync {
    fn name(&self) -> &str;

    fn evaluate(&self, u: &GridFn) -> Result<f64>;

    /// Smallest delay horizon `r` the functional needs.
    fn min_horizon(&self) -> f64 {
        0.0
    }

    /// A closed-form `η_ρ` with `B[u] >= η_ρ` on the ρ-sphere, if one is known.
    fn lower_bound(&self, _rho: f64) -> Option<f64> {
        None
    }
}

/// The weight `g(s)`.
pub trait WeightFunction: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, s: f64) -> f64;
}

/// The initial history `ψ` on `[-r, 1]`, returning `(ψ(t), ψ'(t))`.
pub trait InitialFunction: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, t: f64) -> (f64, f64);
}

pub const SEGMENT_FUNCTIONALS: &[&str] = &["constant", "example", "delay_poly"];
pub const BOUNDARY_FUNCTIONALS: &[&str] = &["zero", "constant", "example", "point_value"];
pub const WEIGHTS: &[&str] = &["constant", "power"];
pub const INITIAL_FUNCTIONS: &[&str] = &["zero", "example", "quadratic", "identity"];

/// Reads parameters by key and rejects keys nobody asked for.
struct ParamReader<'a> {
    kind: &'static str,
    name: &'a str,
    params: &'a Params,
    seen: BTreeSet<&'a str>,
}

impl<'a> ParamReader<'a> {
    fn new(kind: &'static str, name: &'a str, params: &'a Params) -> Self {
        Self {
            kind,
            name,
            params,
            seen: BTreeSet::new(),
        }
    }

    fn get(&mut self, key: &'a str, default: f64) -> Result<f64> {
        self.seen.insert(key);
        let v = self.params.get(key).copied().unwrap_or(default);
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{} '{}': parameter '{key}' must be finite",
                self.kind, self.name
            )));
        }
        Ok(v)
    }

    fn non_negative(&mut self, key: &'a str, default: f64) -> Result<f64> {
        let v = self.get(key, default)?;
        if v < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{} '{}': parameter '{key}' must be >= 0, got {v}",
                self.kind, self.name
            )));
        }
        Ok(v)
    }

    fn finish(self) -> Result<()> {
        let unknown: Vec<&str> = self
            .params
            .keys()
            .map(String::as_str)
            .filter(|k| !self.seen.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} '{}' does not take parameter(s): {}",
                self.kind,
                self.name,
                unknown.join(", ")
            )))
        }
    }
}

/// `F ≡ c`.
#[derive(Debug, Clone)]
pub struct ConstantF {
    pub c: f64,
}

impl SegmentFunctional for ConstantF {
    fn name(&self) -> &str {
        "constant"
    }

    fn evaluate(&self, _t: f64, _phi: &dyn History) -> Result<f64> {
        Ok(self.c)
    }

    fn lower_bound(&self, _t: f64, _rho: f64) -> Option<f64> {
        Some(self.c)
    }
}

type PointwiseFn = dyn Fn(f64, f64, f64, f64, f64) -> Result<f64> + Send + Sync;

/// `F(t, φ) = f(t, φ(0), φ'(0), φ(-r1), φ'(-r2))`.
pub struct DelayWrap {
    name: String,
    f: Box<PointwiseFn>,
    r1: f64,
    r2: f64,
    lower: Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl DelayWrap {
    pub fn new(
        name: impl Into<String>,
        r1: f64,
        r2: f64,
        f: impl Fn(f64, f64, f64, f64, f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        for (label, lag) in [("r1", r1), ("r2", r2)] {
            if !(lag.is_finite() && lag > 0.0) {
                return Err(Error::InvalidParameter(format!("delay {label} must be > 0, got {lag}")));
            }
        }
        Ok(Self {
            name: name.into(),
            f: Box::new(f),
            r1,
            r2,
            lower: None,
        })
    }

    pub fn with_lower_bound(mut self, lower: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lower = Some(Box::new(lower));
        self
    }

    pub fn lags(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }
}

impl SegmentFunctional for DelayWrap {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, t: f64, phi: &dyn History) -> Result<f64> {
        (self.f)(
            t,
            phi.value(0.0),
            phi.deriv(0.0),
            phi.value(-self.r1),
            phi.deriv(-self.r2),
        )
    }

    fn max_lag(&self) -> f64 {
        self.r1.max(self.r2)
    }

    fn lower_bound(&self, t: f64, rho: f64) -> Option<f64> {
        self.lower.as_ref().map(|f| f(t, rho))
    }
}

/// `f(t,u,v,p,q) = t e^{u + q²} (1 + v² + p²)` with `r1 = 1/3`, `r2 = 1/2`.
pub fn example_f(t: f64, u: f64, v: f64, p: f64, q: f64) -> Result<f64> {
    let exponent = u + q * q;
    if !(exponent <= EXP_CLAMP) {
        return Err(Error::Evaluation {
            t,
            detail: format!("exponent {exponent} exceeds {EXP_CLAMP}"),
        });
    }
    Ok(t * libm::exp(exponent) * (1.0 + v * v + p * p))
}

pub fn example_segment_functional() -> DelayWrap {
    DelayWrap::new("example", 1.0 / 3.0, 0.5, example_f)
        .expect("fixed lags are positive")
        // e^{u + q²} >= 1 and u >= 0 on the cone, so F >= t.
        .with_lower_bound(|t, _| t)
}

/// `B[u] = 1/(1 + u(1/2)²) + ∫_{-1/2}^1 t³ u'(t)² dt`, integrated by Simpson on grid nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExampleB;

impl BoundaryFunctional for ExampleB {
    fn name(&self) -> &str {
        "example"
    }

    fn evaluate(&self, u: &GridFn) -> Result<f64> {
        let grid = u.grid();
        let mid = u.value(0.5);
        let iv = Interval::new(grid, -0.5, 1.0)?;
        let integrand: Vec<f64> = iv
            .indices()
            .map(|j| {
                let t = grid.t(j);
                let d = u.derivs()[j];
                t * t * t * d * d
            })
            .collect();
        Ok(1.0 / (1.0 + mid * mid) + simpson(&integrand, grid.h()))
    }

    fn min_horizon(&self) -> f64 {
        0.5
    }

    fn lower_bound(&self, rho: f64) -> Option<f64> {
        Some(1.0 / (1.0 + rho * rho))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantB {
    pub c: f64,
}

impl BoundaryFunctional for ConstantB {
    fn name(&self) -> &str {
        if self.c == 0.0 {
            "zero"
        } else {
            "constant"
        }
    }

    fn evaluate(&self, _u: &GridFn) -> Result<f64> {
        Ok(self.c)
    }

    fn lower_bound(&self, _rho: f64) -> Option<f64> {
        Some(self.c)
    }
}

/// `B[u] = u(at)`.
#[derive(Debug, Clone, Copy)]
pub struct PointValueB {
    pub at: f64,
}

impl BoundaryFunctional for PointValueB {
    fn name(&self) -> &str {
        "point_value"
    }

    fn evaluate(&self, u: &GridFn) -> Result<f64> {
        u.checked_value(self.at)
    }

    fn min_horizon(&self) -> f64 {
        (-self.at).max(0.0)
    }

    fn lower_bound(&self, _rho: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// `g(s) = c s^p`.
#[derive(Debug, Clone, Copy)]
pub struct PowerWeight {
    pub c: f64,
    pub p: f64,
}

impl WeightFunction for PowerWeight {
    fn name(&self) -> &str {
        if self.p == 0.0 {
            "constant"
        } else {
            "power"
        }
    }

    fn evaluate(&self, s: f64) -> f64 {
        if self.p == 0.0 {
            self.c
        } else {
            self.c * libm::pow(s, self.p)
        }
    }
}

/// `ψ(t) = a H(-t) t²`.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticHistory {
    pub a: f64,
}

impl InitialFunction for QuadraticHistory {
    fn name(&self) -> &str {
        if self.a == 0.0 {
            "zero"
        } else if self.a == 1.0 {
            "example"
        } else {
            "quadratic"
        }
    }

    fn evaluate(&self, t: f64) -> (f64, f64) {
        if t < 0.0 {
            (self.a * t * t, 2.0 * self.a * t)
        } else {
            (0.0, 0.0)
        }
    }
}

/// `ψ(t) = t`; violates the requirements on `ψ`, kept as a counterexample.
#[derive(Debug, Clone, Copy)]
pub struct IdentityHistory;

impl InitialFunction for IdentityHistory {
    fn name(&self) -> &str {
        "identity"
    }

    fn evaluate(&self, t: f64) -> (f64, f64) {
        (t, 1.0)
    }
}

fn unknown(kind: &'static str, name: &str, known: &'static [&'static str]) -> Error {
    Error::UnknownName {
        kind,
        name: name.into(),
        known,
    }
}

pub fn segment_functional(name: &str, params: &Params) -> Result<Box<dyn SegmentFunctional>> {
    const KIND: &str = "segment functional F";
    let mut rd = ParamReader::new(KIND, name, params);
    let out: Box<dyn SegmentFunctional> = match name {
        "constant" => Box::new(ConstantF {
            c: rd.non_negative("c", 1.0)?,
        }),
        "example" => Box::new(example_segment_functional()),
        "delay_poly" => {
            // a + b_u u + b_v v² + b_p p + b_q q², non-negative when u, p >= 0.
            let c = [
                rd.non_negative("a", 0.0)?,
                rd.non_negative("b_u", 0.0)?,
                rd.non_negative("b_v", 0.0)?,
                rd.non_negative("b_p", 0.0)?,
                rd.non_negative("b_q", 0.0)?,
            ];
            let r1 = rd.get("r1", 0.5)?;
            let r2 = rd.get("r2", 0.5)?;
            let a = c[0];
            Box::new(
                DelayWrap::new("delay_poly", r1, r2, move |_, u, v, p, q| {
                    Ok(c[0] + c[1] * u + c[2] * v * v + c[3] * p + c[4] * q * q)
                })?
                // Every other term is non-negative on the cone.
                .with_lower_bound(move |_, _| a),
            )
        }
        _ => return Err(unknown(KIND, name, SEGMENT_FUNCTIONALS)),
    };
    rd.finish()?;
    Ok(out)
}

pub fn boundary_functional(name: &str, params: &Params) -> Result<Box<dyn BoundaryFunctional>> {
    const KIND: &str = "boundary functional B";
    let mut rd = ParamReader::new(KIND, name, params);
    let out: Box<dyn BoundaryFunctional> = match name {
        "zero" => Box::new(ConstantB { c: 0.0 }),
        "constant" => Box::new(ConstantB {
            c: rd.non_negative("c", 1.0)?,
        }),
        "example" => Box::new(ExampleB),
        "point_value" => {
            let at = rd.get("at", 1.0)?;
            if at > 1.0 {
                return Err(Error::InvalidParameter(format!("point_value: at = {at} exceeds 1")));
            }
            Box::new(PointValueB { at })
        }
        _ => return Err(unknown(KIND, name, BOUNDARY_FUNCTIONALS)),
    };
    rd.finish()?;
    Ok(out)
}

pub fn weight(name: &str, params: &Params) -> Result<Box<dyn WeightFunction>> {
    const KIND: &str = "weight g";
    let mut rd = ParamReader::new(KIND, name, params);
    let out = match name {
        "constant" => PowerWeight {
            c: rd.get("c", 1.0)?,
            p: 0.0,
        },
        "power" => PowerWeight {
            c: rd.get("c", 1.0)?,
            p: rd.non_negative("p", 1.0)?,
        },
        _ => return Err(unknown(KIND, name, WEIGHTS)),
    };
    rd.finish()?;
    Ok(Box::new(out))
}

pub fn initial_function(name: &str, params: &Params) -> Result<Box<dyn InitialFunction>> {
    const KIND: &str = "initial function psi";
    let mut rd = ParamReader::new(KIND, name, params);
    let out: Box<dyn InitialFunction> = match name {
        "zero" => Box::new(QuadraticHistory { a: 0.0 }),
        "example" => Box::new(QuadraticHistory { a: 1.0 }),
        "quadratic" => Box::new(QuadraticHistory { a: rd.get("a", 1.0)? }),
        "identity" => Box::new(IdentityHistory),
        _ => return Err(unknown(KIND, name, INITIAL_FUNCTIONS)),
    };
    rd.finish()?;
    Ok(out)
}
