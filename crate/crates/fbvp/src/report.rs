//! JSON output files. Every real is written as `{:.16e}` (17 significant
//! digits) so a load/save cycle reproduces the file byte for byte; non-finite
//! values are written as `null` and negative zero as zero.

use std::path::Path;

use fbvp_core::hypotheses::{Check, HypothesisReport, ReferenceBounds};
use fbvp_core::{GridFn, Problem, VerifyReport};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(format!("{:.16e}", self.0 + 0.0))
                .map_err(serde::ser::Error::custom)?
                .serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Real(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyJson {
    pub ode_residual: Real,
    pub bc_residuals: [Real; 3],
    pub history_mismatch: Real,
    pub steps_deviation: Real,
    pub passed: bool,
}

impl From<&VerifyReport> for VerifyJson {
    fn from(r: &VerifyReport) -> Self {
        Self {
            ode_residual: Real(r.ode_residual),
            bc_residuals: r.bc_residuals.map(Real),
            history_mismatch: Real(r.history_mismatch),
            steps_deviation: Real(r.steps_deviation),
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckJson {
    pub pass: bool,
    pub witness: Real,
    pub detail: String,
}

impl From<&Check> for CheckJson {
    fn from(c: &Check) -> Self {
        Self {
            pass: c.pass,
            witness: Real(c.witness),
            detail: c.detail.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceJson {
    pub eta: Real,
    pub condc_value: Real,
    pub condc_argmax_t: Real,
    pub value_at_one: Real,
    pub eta_violated: bool,
    pub delta_violated: bool,
}

impl From<&ReferenceBounds> for ReferenceJson {
    fn from(r: &ReferenceBounds) -> Self {
        Self {
            eta: Real(r.eta),
            condc_value: Real(r.condc_value),
            condc_argmax_t: Real(r.condc_argmax_t),
            value_at_one: Real(r.value_at_one),
            eta_violated: r.eta_violated,
            delta_violated: r.delta_violated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisJson {
    pub passed: bool,
    pub rho: Real,
    pub c1: CheckJson,
    pub c2: CheckJson,
    pub c3: CheckJson,
    pub c4: CheckJson,
    pub c5: CheckJson,
    pub c6: CheckJson,
    pub a: CheckJson,
    pub b: CheckJson,
    pub c: CheckJson,
    pub condc_value: Real,
    pub condc_argmax_t: Real,
    pub eta_hat: Real,
    pub inf_f_hat: Real,
    pub lwest_chain: bool,
    pub lambda_bar: Real,
    pub reference: Option<ReferenceJson>,
    pub n_samples: usize,
    pub seed: u64,
    pub empirical: bool,
    pub delta_t: Vec<Real>,
    pub delta_hat: Vec<Real>,
}

impl From<&HypothesisReport> for HypothesisJson {
    fn from(r: &HypothesisReport) -> Self {
        let s = &r.structural;
        Self {
            passed: r.passed(),
            rho: Real(r.rho),
            c1: (&s.c1).into(),
            c2: (&s.c2).into(),
            c3: (&s.c3).into(),
            c4: (&s.c4).into(),
            c5: (&s.c5).into(),
            c6: (&s.c6).into(),
            a: (&r.a).into(),
            b: (&r.b).into(),
            c: (&r.c).into(),
            condc_value: Real(r.condc_value),
            condc_argmax_t: Real(r.condc_argmax_t),
            eta_hat: Real(r.eta_hat),
            inf_f_hat: Real(r.inf_f_hat),
            lwest_chain: r.lwest_chain,
            lambda_bar: Real(r.lambda_bar.unwrap_or(f64::NAN)),
            reference: r.reference.as_ref().map(Into::into),
            n_samples: r.n_samples,
            seed: r.seed,
            empirical: r.empirical,
            delta_t: reals(&r.delta_t),
            delta_hat: reals(&r.delta_hat),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoBracket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    pub message: String,
    pub last_lambda: Real,
    pub last_n: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReportFile {
    pub status: Status,
    pub rho: Real,
    pub lambda_star: Real,
    pub norm: Real,
    pub residual: Real,
    pub iterations: usize,
    pub continuation_steps: usize,
    pub refinements: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerifyJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesisJson>,
    /// Rows `(t, u(t), u'(t))` over the whole grid `[-r, 1]`.
    pub grid: Vec<[Real; 3]>,
}

impl SolveReportFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
    }

    pub fn grid_rows(u: &GridFn) -> Vec<[Real; 3]> {
        u.grid()
            .nodes()
            .zip(u.values().iter().zip(u.derivs()))
            .map(|(t, (v, d))| [Real(t), Real(*v), Real(*d)])
            .collect()
    }

    /// The stored solution, checked against the nodes of `p`.
    pub fn solution(&self, p: &Problem) -> Result<GridFn> {
        let grid = *p.grid();
        if self.grid.len() != grid.len() {
            return Err(CliError::Input(format!(
                "solution has {} grid rows, the problem grid has {} nodes",
                self.grid.len(),
                grid.len()
            )));
        }
        for (j, row) in self.grid.iter().enumerate() {
            if (row[0].0 - grid.t(j)).abs() > 1e-12 {
                return Err(CliError::Input(format!(
                    "solution row {j} is at t = {}, expected {}",
                    row[0].0,
                    grid.t(j)
                )));
            }
        }
        let values = self.grid.iter().map(|r| r[1].0).collect();
        let derivs = self.grid.iter().map(|r| r[2].0).collect();
        Ok(GridFn::from_parts(grid, values, derivs)?)
    }
}
