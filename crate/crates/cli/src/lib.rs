//! Experiment orchestration for the colding crate: configs, the (N, λ) sample
//! grid, reports and the acceptance criteria.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod criteria;
pub mod report;
pub mod sweep;

use colding::{FlowSolution, PotentialSolution};

pub use config::{ConfigError, ExperimentConfig};
pub use criteria::{Status, Verdict};
pub use report::{Report, Row};

/// Samples every cell, fits the ladders and evaluates the criteria.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, ConfigError> {
    let (flow, sol) = cfg.build()?;
    Ok(run_with(cfg, &flow, &sol))
}

pub fn run_with(cfg: &ExperimentConfig, flow: &FlowSolution, sol: &PotentialSolution) -> Report {
    let rows = report::compute_rows(cfg, flow, sol);
    let fits = report::fits(cfg, &rows);
    let criteria = criteria::evaluate(&criteria::Experiment {
        cfg,
        flow,
        sol,
        rows: &rows,
    });
    Report {
        name: cfg.name.clone(),
        family: cfg.family().to_string(),
        config: cfg.clone(),
        rows,
        fits,
        criteria,
    }
}
