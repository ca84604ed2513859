use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fbvp_core::hypotheses;
use fbvp_core::kernels::{dk_hat_dt, k_hat};
use fbvp_core::solver::sweep_row;
use fbvp_core::{find_pair, sweep, verify, BcKind, Error as CoreError, SweepRow, VerifyTolerances};
use log::{info, warn};
use rayon::prelude::*;

use crate::error::{exit, CliError, Result};
use crate::problem::ProblemFile;
use crate::report::{to_json, write_json, Diagnostics, HypothesisJson, Real, SolveReportFile, Status, VerifyJson};

#[derive(Debug, Parser)]
#[command(
    name = "fbvp",
    version,
    about = "Eigenpairs of perturbed Hammerstein equations for third-order delay BVPs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find lambda* and u* with ||u* - psi||_[0,1] = rho and write a JSON report
    Solve(SolveArgs),
    /// Tabulate N(lambda) = ||u_lambda - psi|| on an even lambda grid as CSV
    Sweep(SweepArgs),
    /// Check the existence hypotheses and print the report as JSON
    Check(CheckArgs),
    /// Dump a Green's function and its t-derivative on a square grid as CSV
    Kernel(KernelArgs),
    /// Verify a stored solution against the differential problem
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file, or a built-in name (linear_bc3, example_bc1, ...)
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub rho: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the problem file's solver.lambda_max
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Attach a hypothesis report computed from seeded samples
    #[arg(long)]
    pub hypotheses: bool,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub lambda_max: f64,
    /// Number of intervals; rows are lambda_k = lambda_max k / steps, k = 0..=steps
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Solve rows independently from psi on all cores instead of warm-starting
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// 1, 2 or 3
    #[arg(long)]
    pub bc: u8,
    /// Points per axis of linspace(0, 1, n)
    #[arg(long)]
    pub grid_n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub problem: String,
    /// A report written by `solve`
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Kernel(a) => cmd_kernel(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn positive(what: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Input(format!(
            "{what} must be a positive finite number, got {x}"
        )))
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let pf = ProblemFile::load(&a.problem)?;
    let p = pf.build()?;
    let mut opts = pf.options()?;
    if let Some(l) = a.lambda_max {
        opts.lambda_max = positive("--lambda-max", l)?;
        opts.validate()?;
    }
    let rho = positive("--rho", a.rho)?;
    info!("solving {} for rho = {rho}", a.problem);
    let hyp = if a.hypotheses {
        Some(HypothesisJson::from(&hypotheses::check(&p, rho, a.samples, a.seed)?))
    } else {
        None
    };
    let (report, code) = match find_pair(&p, rho, &opts) {
        Ok(pr) => {
            let v = verify(&p, pr.lambda_star, &pr.u_star, &VerifyTolerances::default())?;
            if !v.passed {
                warn!("returned pair does not pass verification: {v:?}");
            }
            println!(
                "lambda* = {:.12}  N = {:.12}  residual = {:.3e}",
                pr.lambda_star, pr.norm, pr.residual
            );
            let report = SolveReportFile {
                status: Status::Ok,
                rho: Real(rho),
                lambda_star: Real(pr.lambda_star),
                norm: Real(pr.norm),
                residual: Real(pr.residual),
                iterations: pr.n_iterations,
                continuation_steps: pr.n_continuation_steps,
                refinements: pr.n_refinements,
                diagnostics: None,
                verification: Some(VerifyJson::from(&v)),
                hypotheses: hyp,
                grid: SolveReportFile::grid_rows(&pr.u_star),
            };
            (report, exit::OK)
        }
        Err(CoreError::NoBracket {
            last_lambda,
            last_n,
            reason,
            ..
        }) => {
            eprintln!("no bracket for rho = {rho}: {reason}");
            let report = SolveReportFile {
                status: Status::NoBracket,
                rho: Real(rho),
                lambda_star: Real(f64::NAN),
                norm: Real(last_n),
                residual: Real(f64::NAN),
                iterations: 0,
                continuation_steps: 0,
                refinements: 0,
                diagnostics: Some(Diagnostics {
                    message: reason,
                    last_lambda: Real(last_lambda),
                    last_n: Real(last_n),
                }),
                verification: None,
                hypotheses: hyp,
                grid: Vec::new(),
            };
            (report, exit::NO_BRACKET)
        }
        Err(e) => return Err(e.into()),
    };
    write_json(&a.out, &report)?;
    Ok(code)
}

fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let csv_err = |source| CliError::Csv {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["lambda", "N", "residual", "converged"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            fmt_real(r.lambda),
            fmt_real(r.n),
            fmt_real(r.residual),
            r.converged.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let pf = ProblemFile::load(&a.problem)?;
    let p = pf.build()?;
    let opts = pf.options()?;
    if !(a.lambda_max.is_finite() && a.lambda_max >= 0.0) {
        return Err(CliError::Input(format!(
            "--lambda-max must be >= 0, got {}",
            a.lambda_max
        )));
    }
    let lambdas: Vec<f64> = if a.steps == 0 {
        Vec::new()
    } else {
        (0..=a.steps)
            .map(|k| a.lambda_max * k as f64 / a.steps as f64)
            .collect()
    };
    let rows = if a.parallel {
        lambdas
            .par_iter()
            .map(|&l| sweep_row(&p, l, p.psi(), &opts).0)
            .collect()
    } else {
        sweep(&p, &lambdas, &opts)
    };
    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        warn!("{failed} of {} sweep rows did not converge", rows.len());
    }
    write_sweep(&a.out, &rows)?;
    info!("wrote {} rows to {}", rows.len(), a.out.display());
    Ok(exit::OK)
}

pub fn cmd_check(a: &CheckArgs) -> Result<i32> {
    let pf = ProblemFile::load(&a.problem)?;
    let p = pf.build()?;
    let rho = positive("--rho", a.rho)?;
    let report = hypotheses::check(&p, rho, a.samples, a.seed)?;
    let json = HypothesisJson::from(&report);
    print!("{}", to_json(&json));
    if let Some(out) = &a.out {
        write_json(out, &json)?;
    }
    Ok(if report.passed() { exit::OK } else { exit::CHECK_FAILED })
}

pub fn cmd_kernel(a: &KernelArgs) -> Result<i32> {
    let bc = BcKind::from_index(a.bc)?;
    if a.grid_n < 2 {
        return Err(CliError::Input(format!(
            "--grid-n must be at least 2, got {}",
            a.grid_n
        )));
    }
    let path = a.out.as_path();
    let csv_err = |source| CliError::Csv {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["t", "s", "k", "dk_dt"]).map_err(csv_err)?;
    let x = |i: usize| i as f64 / (a.grid_n - 1) as f64;
    for i in 0..a.grid_n {
        for j in 0..a.grid_n {
            let (t, s) = (x(i), x(j));
            w.write_record([
                fmt_real(t),
                fmt_real(s),
                fmt_real(k_hat(bc, t, s)?),
                fmt_real(dk_hat_dt(bc, t, s)?),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(exit::OK)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let pf = ProblemFile::load(&a.problem)?;
    let p = pf.build()?;
    let sol = SolveReportFile::load(&a.solution)?;
    let lambda = sol.lambda_star.0;
    if sol.status != Status::Ok || !lambda.is_finite() {
        return Err(CliError::Input(format!("{} holds no solution", a.solution.display())));
    }
    let u = sol.solution(&p)?;
    let report = verify(&p, lambda, &u, &VerifyTolerances::default())?;
    let json = VerifyJson::from(&report);
    print!("{}", to_json(&json));
    if let Some(out) = &a.out {
        write_json(out, &json)?;
    }
    Ok(if report.passed { exit::OK } else { exit::CHECK_FAILED })
}
