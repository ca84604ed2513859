//! Problem files: JSON documents naming registry entries with numeric parameters.
//!
//! Missing keys take these defaults: `r = 0.5`, `m = 200`, `quad = 2m`,
//! `psi = zero`, `g = constant(c = 1)`, `B = zero` with both flags off,
//! `positivity_interval = [0, 1]`, and the solver settings of
//! [`SolveOptions::default`]. `F` is required.

use std::collections::BTreeMap;
use std::path::Path;

use fbvp_core::registry;
use fbvp_core::{BcKind, Problem, ProblemDef, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Built-in problems, addressable by name wherever a problem path is expected.
pub const BUILTINS: &[(&str, &str)] = &[
    ("linear_bc3", include_str!("../problems/linear_bc3.json")),
    ("example_bc1", include_str!("../problems/example_bc1.json")),
    ("example_bc2", include_str!("../problems/example_bc2.json")),
    ("example_bc3", include_str!("../problems/example_bc3.json")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl Component {
    fn named(name: &str) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub b_includes_lambda: bool,
    #[serde(default)]
    pub homogeneous_bc: bool,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self {
            name: "zero".into(),
            params: BTreeMap::new(),
            b_includes_lambda: false,
            homogeneous_bc: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub lambda_step: f64,
    pub lambda_max: f64,
    pub newton_after: usize,
    pub pair_tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = SolveOptions::default();
        Self {
            tol: o.tol,
            max_iter: o.max_iter,
            damping: o.damping,
            lambda_step: o.lambda_step,
            lambda_max: o.lambda_max,
            newton_after: o.newton_after,
            pair_tol: o.pair_tol,
        }
    }
}

fn default_r() -> f64 {
    0.5
}

fn default_m() -> usize {
    200
}

fn default_psi() -> Component {
    Component::named("zero")
}

fn default_g() -> Component {
    Component::named("constant")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub bc: u8,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub quad: Option<usize>,
    #[serde(default = "default_psi")]
    pub psi: Component,
    #[serde(default = "default_g")]
    pub g: Component,
    #[serde(rename = "F")]
    pub f: Component,
    #[serde(rename = "B", default)]
    pub b: BoundarySpec,
    #[serde(default)]
    pub positivity_interval: Option<[f64; 2]>,
    #[serde(default)]
    pub solver: SolverSpec,
}

impl ProblemFile {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::json(origin, e))
    }

    /// Reads `spec` as a file path, falling back to a built-in name.
    pub fn load(spec: &str) -> Result<Self> {
        let path = Path::new(spec);
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text, path),
            Err(e) => match BUILTINS.iter().find(|(name, _)| *name == spec) {
                Some((_, text)) => Self::parse(text, path),
                None => Err(CliError::io(path, e)),
            },
        }
    }

    pub fn options(&self) -> Result<SolveOptions> {
        let s = &self.solver;
        let o = SolveOptions {
            tol: s.tol,
            max_iter: s.max_iter,
            damping: s.damping,
            newton_after: s.newton_after,
            lambda_step: s.lambda_step,
            lambda_max: s.lambda_max,
            pair_tol: s.pair_tol,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn to_def(&self) -> Result<ProblemDef> {
        Ok(ProblemDef {
            bc: BcKind::from_index(self.bc)?,
            r: self.r,
            m: self.m,
            quad: self.quad,
            psi: registry::initial_function(&self.psi.name, &self.psi.params)?,
            g: registry::weight(&self.g.name, &self.g.params)?,
            f: registry::segment_functional(&self.f.name, &self.f.params)?,
            b: registry::boundary_functional(&self.b.name, &self.b.params)?,
            b_includes_lambda: self.b.b_includes_lambda,
            homogeneous_bc: self.b.homogeneous_bc,
            positivity_interval: self.positivity_interval.map_or((0.0, 1.0), |[a, b]| (a, b)),
        })
    }

    pub fn build(&self) -> Result<Problem> {
        Ok(self.to_def()?.build()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_build() {
        for (name, _) in BUILTINS {
            let pf = ProblemFile::load(name).unwrap();
            pf.build().unwrap();
            pf.options().unwrap();
        }
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let pf = ProblemFile::parse(r#"{"bc": 2, "F": {"name": "constant"}}"#, Path::new("-")).unwrap();
        assert_eq!((pf.r, pf.m, pf.quad), (0.5, 200, None));
        assert_eq!(pf.b, BoundarySpec::default());
        assert_eq!(pf.solver, SolverSpec::default());
        assert_eq!(pf.build().unwrap().rule().subintervals(), 400);
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        let e = ProblemFile::parse(r#"{"bc": 1, "F": {"name": "constant"}, "extra": 1}"#, Path::new("-"));
        assert!(matches!(e, Err(CliError::Json { .. })));
        let pf = ProblemFile::parse(r#"{"bc": 1, "F": {"name": "cubic"}}"#, Path::new("-")).unwrap();
        let msg = pf.build().unwrap_err().to_string();
        assert!(msg.contains("cubic") && msg.contains("delay_poly"), "{msg}");
        let pf = ProblemFile::parse(r#"{"bc": 4, "F": {"name": "constant"}}"#, Path::new("-")).unwrap();
        assert!(pf.build().is_err());
    }

    #[test]
    fn malformed_json_reports_position() {
        match ProblemFile::parse("{\n  \"bc\": 1,\n  oops\n}", Path::new("p.json")) {
            Err(CliError::Json { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
    }
}
