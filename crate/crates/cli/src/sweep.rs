//! Single-quantity sweeps over the (N, λ) grid.

use std::io::Write;

use clap::ValueEnum;
use colding::nspace::{self, ColdingSampler, NSpaceContext};
use colding::{FlowSolution, PotentialSolution, Result};
use rayon::prelude::*;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    #[value(name = "A_N")]
    AN,
    #[value(name = "rawA_N")]
    RawAN,
    #[value(name = "V_N")]
    VN,
    #[value(name = "W_N")]
    WN,
    #[value(name = "dWN")]
    DWN,
    #[value(name = "tail_bound")]
    TailBound,
    #[value(name = "phi_dev")]
    PhiDev,
    #[value(name = "hat_h_scaled")]
    HatHScaled,
    #[value(name = "b2_residual")]
    B2Residual,
    /// sup|(N/2)(|∇̂b|² − 1) − L|.
    #[value(name = "grad_b_leading_gap")]
    GradBLeadingGap,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::AN => "A_N",
            Quantity::RawAN => "rawA_N",
            Quantity::VN => "V_N",
            Quantity::WN => "W_N",
            Quantity::DWN => "dWN",
            Quantity::TailBound => "tail_bound",
            Quantity::PhiDev => "phi_dev",
            Quantity::HatHScaled => "hat_h_scaled",
            Quantity::B2Residual => "b2_residual",
            Quantity::GradBLeadingGap => "grad_b_leading_gap",
        }
    }
}

fn value(
    q: Quantity,
    cfg: &ExperimentConfig,
    flow: &FlowSolution,
    sol: &PotentialSolution,
    big_n: usize,
    lambda: f64,
) -> Result<f64> {
    let ctx = NSpaceContext::with_lambda0(big_n, flow.dim(), lambda, cfg.lambda0_fraction * lambda)?;
    let sampler = || ColdingSampler::new(flow, sol, big_n);
    Ok(match q {
        Quantity::AN => sampler()?.areas(lambda)?.area,
        Quantity::RawAN => sampler()?.areas(lambda)?.raw,
        Quantity::VN => sampler()?.volume(&ctx)?.v_n,
        Quantity::WN => sampler()?.w_n(&ctx)?,
        Quantity::DWN => sampler()?.dw_dlambda(&ctx, cfg.h_rel)?,
        Quantity::TailBound => sampler()?.volume(&ctx)?.tail_bound,
        Quantity::PhiDev => sampler()?.level_set(lambda)?.phi.map(|p| p - lambda).max_abs(),
        Quantity::HatHScaled => nspace::scaled_hat_laplacian_h(flow, sol, lambda, big_n)?.max_abs(),
        Quantity::B2Residual => nspace::hat_laplacian_b2_residual(flow, sol, lambda, big_n)?,
        Quantity::GradBLeadingGap => {
            let g = nspace::grad_b_sq_exact(flow, sol, lambda, big_n)?;
            let lead = nspace::grad_b_sq_leading(flow, sol, lambda)?;
            g.zip_with(&lead, |g, l| 0.5 * big_n as f64 * (g - 1.0) - l)?.max_abs()
        }
    })
}

/// (N, λ, value) in ladder-major order; failed cells carry the error text.
pub fn sweep(
    q: Quantity,
    cfg: &ExperimentConfig,
    flow: &FlowSolution,
    sol: &PotentialSolution,
) -> Vec<(usize, f64, std::result::Result<f64, String>)> {
    let cells: Vec<(usize, f64)> = cfg
        .n_ladder
        .iter()
        .flat_map(|&n| cfg.lambda_grid.iter().map(move |&l| (n, l)))
        .collect();
    cells
        .par_iter()
        .map(|&(n, l)| (n, l, value(q, cfg, flow, sol, n, l).map_err(|e| e.to_string())))
        .collect()
}

pub fn write_csv<W: Write>(
    q: Quantity,
    cells: &[(usize, f64, std::result::Result<f64, String>)],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "lambda", q.name(), "error"])?;
    for (n, l, v) in cells {
        let (val, err) = match v {
            Ok(x) => (format!("{x:e}"), String::new()),
            Err(e) => (String::new(), e.clone()),
        };
        w.write_record([n.to_string(), format!("{l:e}"), val, err])?;
    }
    w.flush()?;
    Ok(())
}
