//! Batch experiments for buffdyn: configuration, orchestration and
//! CSV/JSON/SVG output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use report::{ExperimentReport, Outcome};

/// Run `config` and write its outputs to `out_dir`, falling back to the
/// directory named in the config and then to `out`.
pub fn run_and_write(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<(ExperimentReport, Vec<PathBuf>)> {
    let outcome = experiments::run(config)?;
    let report = outcome.report(config.kind(), &config.name, config.echo.clone());
    let dir = out_dir.map(Path::to_path_buf).or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let written = report::write_outputs(&report, &outcome, &dir)?;
    Ok((report, written))
}
