//! File formats and the `fbvp` command line on top of `fbvp-core`.

pub mod commands;
pub mod error;
pub mod problem;
pub mod report;

pub use commands::{run, Cli};
pub use error::{exit, CliError};
pub use problem::ProblemFile;
pub use report::SolveReportFile;
