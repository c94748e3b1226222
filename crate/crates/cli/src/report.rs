//! The (N, λ) sample grid, its fits, and the on-disk report.

use std::io::Write;
use std::path::Path;

use colding::asymptotics::{fit_rate, ConvergenceFit};
use colding::entropy;
use colding::nspace::{self, ColdingSampler, NSpaceContext};
use colding::{FlowSolution, PotentialSolution};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::criteria::Verdict;

/// Fixed CSV column order. Columns after `tail_bound` are diagnostics.
pub const COLUMNS: [&str; 16] = [
    "N",
    "lambda",
    "A_N",
    "rawA_N",
    "V_N",
    "W_N",
    "W",
    "dW",
    "dWN",
    "level_set_residual",
    "bachcho_residual",
    "tail_bound",
    "phi_dev",
    "hat_h_scaled",
    "b2_residual",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub big_n: usize,
    pub lambda: f64,
    pub a_n: f64,
    pub raw_a_n: f64,
    pub v_n: f64,
    pub w_n: f64,
    pub w: f64,
    pub dw: f64,
    pub dwn: f64,
    pub level_set_residual: f64,
    pub bachcho_residual: f64,
    pub tail_bound: f64,
    /// max|φ − λ|.
    pub phi_dev: f64,
    /// sup|r^{m−2}Δ̂h| at τ = λ.
    pub hat_h_scaled: f64,
    pub b2_residual: f64,
    pub error: Option<String>,
}

impl Row {
    pub fn m(&self, n: usize) -> f64 {
        (self.big_n + n + 1) as f64
    }

    fn csv_record(&self) -> Vec<String> {
        let g = |v: f64| format!("{v:e}");
        vec![
            self.big_n.to_string(),
            g(self.lambda),
            g(self.a_n),
            g(self.raw_a_n),
            g(self.v_n),
            g(self.w_n),
            g(self.w),
            g(self.dw),
            g(self.dwn),
            g(self.level_set_residual),
            g(self.bachcho_residual),
            g(self.tail_bound),
            g(self.phi_dev),
            g(self.hat_h_scaled),
            g(self.b2_residual),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Per-λ quantities that do not depend on N.
#[derive(Debug, Clone, Copy)]
struct LambdaData {
    w: f64,
    dw: f64,
    bachcho: f64,
}

fn lambda_data(flow: &FlowSolution, sol: &PotentialSolution, lambda: f64) -> colding::Result<LambdaData> {
    Ok(LambdaData {
        w: entropy::entropy_w(flow, sol, lambda)?,
        dw: entropy::entropy_derivative(flow, sol, lambda)?,
        bachcho: sol.on(flow)?.bachcho_residual(&[lambda])?,
    })
}

fn cell(
    cfg: &ExperimentConfig,
    flow: &FlowSolution,
    sol: &PotentialSolution,
    big_n: usize,
    lambda: f64,
    data: Option<LambdaData>,
) -> Row {
    let mut row = Row {
        big_n,
        lambda,
        a_n: f64::NAN,
        raw_a_n: f64::NAN,
        v_n: f64::NAN,
        w_n: f64::NAN,
        w: data.map_or(f64::NAN, |d| d.w),
        dw: data.map_or(f64::NAN, |d| d.dw),
        dwn: f64::NAN,
        level_set_residual: f64::NAN,
        bachcho_residual: data.map_or(f64::NAN, |d| d.bachcho),
        tail_bound: f64::NAN,
        phi_dev: f64::NAN,
        hat_h_scaled: f64::NAN,
        b2_residual: f64::NAN,
        error: None,
    };
    if let Err(e) = fill(cfg, flow, sol, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill(
    cfg: &ExperimentConfig,
    flow: &FlowSolution,
    sol: &PotentialSolution,
    row: &mut Row,
) -> colding::Result<()> {
    let (big_n, lambda) = (row.big_n, row.lambda);
    let sampler = ColdingSampler::new(flow, sol, big_n)?;
    let ls = sampler.level_set(lambda)?;
    row.phi_dev = ls.phi.map(|p| p - lambda).max_abs();
    row.hat_h_scaled = nspace::scaled_hat_laplacian_h(flow, sol, lambda, big_n)?.max_abs();
    row.b2_residual = nspace::hat_laplacian_b2_residual(flow, sol, lambda, big_n)?;
    let ctx = NSpaceContext::with_lambda0(big_n, flow.dim(), lambda, cfg.lambda0_fraction * lambda)?;
    // the unrejected estimate is reported even when the tail check fails
    let v = sampler.volume(&ctx)?;
    let a = sampler.areas(lambda)?;
    row.a_n = a.area;
    row.raw_a_n = a.raw;
    row.v_n = v.v_n;
    row.w_n = 2.0 * (ctx.m as f64 - 1.0) * v.v_n - a.area;
    row.tail_bound = v.tail_bound;
    row.level_set_residual = v.level_set_residual.max(a.level_set_residual);
    row.dwn = sampler.dw_dlambda(&ctx, cfg.h_rel)?;
    let cap = nspace::TAIL_CAP * (1.0 + a.area.abs());
    if v.tail_bound > cap {
        return Err(colding::Error::TailTooLarge {
            tail: v.tail_bound,
            cap,
        });
    }
    Ok(())
}

/// All (N, λ) rows in ladder-major order. Parallel over cells; the order
/// and every value are independent of the thread count.
pub fn compute_rows(cfg: &ExperimentConfig, flow: &FlowSolution, sol: &PotentialSolution) -> Vec<Row> {
    let per_lambda: Vec<Result<LambdaData, String>> = cfg
        .lambda_grid
        .par_iter()
        .map(|&l| lambda_data(flow, sol, l).map_err(|e| e.to_string()))
        .collect();
    let cells: Vec<(usize, usize)> = cfg
        .n_ladder
        .iter()
        .flat_map(|&n| (0..cfg.lambda_grid.len()).map(move |i| (n, i)))
        .collect();
    cells
        .par_iter()
        .map(|&(big_n, i)| {
            let lambda = cfg.lambda_grid[i];
            let data = per_lambda[i].as_ref().ok().copied();
            let mut row = cell(cfg, flow, sol, big_n, lambda, data);
            if let Err(e) = &per_lambda[i] {
                row.error.get_or_insert_with(|| e.clone());
            }
            row
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub quantity: String,
    pub lambda: f64,
    pub reference: Option<f64>,
    pub limit: Option<f64>,
    pub constant: Option<f64>,
    pub rate: Option<f64>,
    pub residual: Option<f64>,
    /// Set when the fit could not be formed (degenerate, too few rungs, …).
    pub note: Option<String>,
}

impl FitRecord {
    fn new(quantity: &str, lambda: f64, reference: Option<f64>, fit: colding::Result<ConvergenceFit>) -> Self {
        let mut r = FitRecord {
            quantity: quantity.into(),
            lambda,
            reference,
            limit: None,
            constant: None,
            rate: None,
            residual: None,
            note: None,
        };
        match fit {
            Ok(f) => {
                r.limit = Some(f.limit);
                r.constant = Some(f.constant);
                r.rate = Some(f.rate);
                r.residual = Some(f.residual);
            }
            Err(e) => r.note = Some(e.to_string()),
        }
        r
    }
}

/// Rows for one λ, ladder order.
pub fn ladder_of(rows: &[Row], lambda: f64, pick: impl Fn(&Row) -> f64) -> Vec<(usize, f64)> {
    rows.iter()
        .filter(|r| r.lambda == lambda)
        .map(|r| (r.big_n, pick(r)))
        .collect()
}

type Pick = Box<dyn Fn(&Row) -> f64>;

pub fn fits(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<FitRecord> {
    let n = cfg.dim();
    let mut out = Vec::new();
    for &lambda in &cfg.lambda_grid {
        let Some(first) = rows.iter().find(|r| r.lambda == lambda) else {
            continue;
        };
        let (w, dw) = (first.w, first.dw);
        let specs: [(&str, Option<f64>, Pick); 6] = [
            ("A_N", Some(w), Box::new(|r: &Row| r.a_n)),
            ("W_N", Some(w), Box::new(|r: &Row| r.w_n)),
            ("m*V_N-A_N", Some(0.0), Box::new(move |r: &Row| r.m(n) * r.v_n - r.a_n)),
            ("V_N-A_N/m", Some(0.0), Box::new(move |r: &Row| r.v_n - r.a_n / r.m(n))),
            ("dWN", Some(dw), Box::new(|r: &Row| r.dwn)),
            ("phi_dev", Some(0.0), Box::new(|r: &Row| r.phi_dev)),
        ];
        for (name, reference, pick) in specs {
            let ladder = ladder_of(rows, lambda, pick);
            out.push(FitRecord::new(name, lambda, reference, fit_rate(&ladder, reference)));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub family: String,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub fits: Vec<FitRecord>,
    pub criteria: Vec<Verdict>,
}

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    family: &'a str,
    config: &'a ExperimentConfig,
    columns: &'a [&'a str],
    failed_cells: Vec<FailedCell>,
    fits: &'a [FitRecord],
    criteria: &'a [Verdict],
}

#[derive(Serialize)]
struct FailedCell {
    #[serde(rename = "N")]
    big_n: usize,
    lambda: f64,
    error: String,
}

impl Report {
    pub fn failed_cells(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        let summary = Summary {
            name: &self.name,
            family: &self.family,
            config: &self.config,
            columns: &COLUMNS,
            failed_cells: self
                .rows
                .iter()
                .filter_map(|r| {
                    r.error.as_ref().map(|e| FailedCell {
                        big_n: r.big_n,
                        lambda: r.lambda,
                        error: e.clone(),
                    })
                })
                .collect(),
            fits: &self.fits,
            criteria: &self.criteria,
        };
        // NaN is not JSON; serde_json writes null for it
        serde_json::to_string_pretty(&summary).expect("summary is serializable") + "\n"
    }

    /// Writes the CSV and summary into `dir`, returning both paths.
    pub fn write(&self, dir: &Path) -> std::io::Result<(std::path::PathBuf, std::path::PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(&self.config.output.csv);
        let summary_path = dir.join(&self.config.output.summary);
        let file = std::fs::File::create(&csv_path)?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(std::io::Error::other)?;
        std::fs::write(&summary_path, self.summary_json())?;
        Ok((csv_path, summary_path))
    }
}
