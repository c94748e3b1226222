//! The acceptance criteria, each evaluated against one experiment.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use colding::asymptotics::{self, fit_rate, log_log_slope, richardson, scaled_variation};
use colding::entropy;
use colding::nspace::{self, ColdingSampler, NSpaceContext};
use colding::{Error, FlowSolution, PotentialSolution};
use serde::Serialize;

use crate::config::{ExperimentConfig, Family, PotentialSpec};
use crate::report::{ladder_of, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub id: u8,
    pub title: &'static str,
    pub status: Status,
    pub detail: String,
    /// Set when a numerical error, not a tolerance, decided the verdict.
    pub numerical_error: bool,
    /// Wall-clock seconds of the timed part; kept out of reports so they
    /// stay byte-identical.
    #[serde(skip)]
    pub elapsed_s: Option<f64>,
}

impl Verdict {
    pub fn line(&self) -> String {
        let mut s = format!("criterion {:>2} [{}] {}: {}", self.id, self.status, self.title, self.detail);
        if let Some(t) = self.elapsed_s {
            s.push_str(&format!(" (runtime {t:.2} s)"));
        }
        s
    }
}

pub const TITLES: [&str; 10] = [
    "closed-form entropy on the flat torus",
    "soliton nullity",
    "area converges to the entropy",
    "volume matches area over m",
    "monotonic volume and its derivative",
    "scaled hat-Laplacian of h is O(1/N)",
    "hat-Laplacian of b^2 is 2m|grad b|^2 + O(1/N)",
    "log-domain area equals the literal definition",
    "level set approaches tau = lambda",
    "monotonicity",
];

/// Everything a criterion may read.
pub struct Experiment<'a> {
    pub cfg: &'a ExperimentConfig,
    pub flow: &'a FlowSolution,
    pub sol: &'a PotentialSolution,
    pub rows: &'a [Row],
}

struct Outcome {
    ok: bool,
    detail: String,
    elapsed_s: Option<f64>,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome {
        ok,
        detail,
        elapsed_s: None,
    }
}

type Check = fn(&Experiment<'_>) -> Result<Outcome, CheckError>;

fn in_window(x: f64, w: [f64; 2]) -> bool {
    x >= w[0] && x <= w[1]
}

fn applies(id: u8, family: Family) -> bool {
    match id {
        1 => family == Family::TorusConstant,
        2 => family == Family::SphereSoliton,
        3..=5 => family == Family::TorusSpectral,
        _ => true,
    }
}

/// Runs criteria 1–10 in order.
pub fn evaluate(exp: &Experiment<'_>) -> Vec<Verdict> {
    let checks: [Check; 10] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10];
    let family = exp.cfg.family();
    checks
        .iter()
        .enumerate()
        .map(|(i, check)| {
            let id = i as u8 + 1;
            let title = TITLES[i];
            if !applies(id, family) {
                return Verdict {
                    id,
                    title,
                    status: Status::Skip,
                    detail: format!("not applicable to {family}"),
                    numerical_error: false,
                    elapsed_s: None,
                };
            }
            match check(exp) {
                Ok(o) => Verdict {
                    id,
                    title,
                    status: if o.ok { Status::Pass } else { Status::Fail },
                    detail: o.detail,
                    numerical_error: false,
                    elapsed_s: o.elapsed_s,
                },
                Err(e) => Verdict {
                    id,
                    title,
                    status: Status::Fail,
                    detail: format!("numerical error: {e}"),
                    numerical_error: true,
                    elapsed_s: None,
                },
            }
        })
        .collect()
}

/// Why a criterion could not be evaluated.
#[derive(Debug)]
enum CheckError {
    Core(Error),
    Cell {
        big_n: usize,
        lambda: f64,
        message: String,
    },
    Tampered(String),
}

impl From<Error> for CheckError {
    fn from(e: Error) -> Self {
        CheckError::Core(e)
    }
}

impl fmt::Display for CheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckError::Core(e) => e.fmt(f),
            CheckError::Cell {
                big_n,
                lambda,
                message,
            } => write!(f, "cell N={big_n}, lambda={lambda} failed: {message}"),
            CheckError::Tampered(msg) => write!(f, "tampered config: {msg}"),
        }
    }
}

fn cell_error(r: &Row) -> CheckError {
    CheckError::Cell {
        big_n: r.big_n,
        lambda: r.lambda,
        message: r.error.clone().unwrap_or_else(|| "non-finite value".into()),
    }
}

/// Rows of one λ, requiring that none of them errored. Used for quantities
/// built from V_N, which a failed tail check invalidates.
fn clean_ladder(
    exp: &Experiment<'_>,
    lambda: f64,
    pick: impl Fn(&Row) -> f64,
) -> Result<Vec<(usize, f64)>, CheckError> {
    if let Some(r) = exp.rows.iter().find(|r| r.lambda == lambda && r.error.is_some()) {
        return Err(cell_error(r));
    }
    Ok(ladder_of(exp.rows, lambda, pick))
}

/// Rows of one λ whose picked value was computed, whatever happened to the
/// rest of the cell.
fn finite_ladder(
    exp: &Experiment<'_>,
    lambda: f64,
    pick: impl Fn(&Row) -> f64,
) -> Result<Vec<(usize, f64)>, CheckError> {
    if let Some(r) = exp.rows.iter().find(|r| r.lambda == lambda && !pick(r).is_finite()) {
        return Err(cell_error(r));
    }
    Ok(ladder_of(exp.rows, lambda, pick))
}

/// Rate-window check; a degenerate fit (already converged) passes.
fn rate_check(ladder: &[(usize, f64)], reference: Option<f64>, window: [f64; 2]) -> (bool, String) {
    match fit_rate(ladder, reference) {
        Ok(f) => (
            in_window(f.rate, window),
            format!("rate {:.3} (window [{}, {}])", f.rate, window[0], window[1]),
        ),
        Err(Error::DegenerateFit { floor }) => (true, format!("converged below {floor:.1e}")),
        Err(e) => (false, e.to_string()),
    }
}

fn torus_constant_closed_form(exp: &Experiment<'_>, lambda: f64) -> (f64, f64) {
    let c = match exp.cfg.potential {
        PotentialSpec::ConstantInSpace { c } => c,
        _ => unreachable!("closed form only for constant_in_space"),
    };
    let n = exp.flow.dim() as f64;
    let vol = exp.flow.grid().map_or(1.0, |g| g.total_volume());
    let k = (4.0 * PI).powf(-0.5 * n) * (-c).exp() * vol;
    ((c - 0.5 * n * lambda.ln() - n) * k, -0.5 * n / lambda * k)
}

fn c1(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let lambda = 1.0;
    exp.flow.check_tau(lambda)?;
    let start = Instant::now();
    let (w_exact, dw_exact) = torus_constant_closed_form(exp, lambda);
    let w = entropy::entropy_w(exp.flow, exp.sol, lambda)?;
    let dw = entropy::entropy_derivative(exp.flow, exp.sol, lambda)?;
    let fd = asymptotics::central_derivative(|l| entropy::entropy_w(exp.flow, exp.sol, l), lambda, 1e-3)?;
    let elapsed = start.elapsed().as_secs_f64();
    let (ew, edw, efd) = ((w - w_exact).abs(), (dw - dw_exact).abs(), (fd - dw).abs());
    let efd_exact = (fd - dw_exact).abs();
    let ok = ew <= t.entropy_abs
        && edw <= t.entropy_derivative_abs
        && efd <= t.finite_difference_abs
        && efd_exact <= t.finite_difference_abs
        && elapsed < t.closed_form_runtime_s;
    Ok(Outcome {
        ok,
        detail: format!(
            "W(1) = {w:.12} vs {w_exact:.12} (err {ew:.1e}); dW(1) = {dw:.12} vs {dw_exact:.12} (err {edw:.1e}); finite difference err {efd:.1e}"
        ),
        elapsed_s: Some(elapsed),
    })
}

fn c2(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let (lo, hi) = exp.cfg.tau_range();
    let start = Instant::now();
    let mut worst_w = 0.0_f64;
    let mut worst_dw = 0.0_f64;
    let k = t.soliton_samples;
    for i in 0..k {
        let lambda = lo + (hi - lo) * (i as f64 + 1.0) / (k as f64 + 1.0);
        worst_w = worst_w.max(entropy::entropy_w(exp.flow, exp.sol, lambda)?.abs());
        worst_dw = worst_dw.max(entropy::entropy_derivative(exp.flow, exp.sol, lambda)?.abs());
    }
    let mut ok = worst_w <= t.soliton_abs && worst_dw <= t.soliton_abs;
    let mut rates = Vec::new();
    for &lambda in &exp.cfg.lambda_grid {
        let mut ladder = Vec::new();
        for &big_n in &exp.cfg.n_ladder {
            let sampler = ColdingSampler::new(exp.flow, exp.sol, big_n)?;
            let ctx = NSpaceContext::with_lambda0(big_n, exp.flow.dim(), lambda, exp.cfg.lambda0_fraction * lambda)?;
            ladder.push((big_n, sampler.w_n(&ctx)?));
        }
        match fit_rate(&ladder, Some(0.0)) {
            Ok(f) => {
                ok &= f.rate >= t.soliton_rate_min;
                rates.push(format!("{:.3}", f.rate));
            }
            Err(Error::DegenerateFit { .. }) => rates.push("converged".into()),
            Err(e) => {
                ok = false;
                rates.push(e.to_string());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < t.soliton_runtime_s;
    Ok(Outcome {
        ok,
        detail: format!(
            "max|W| = {worst_w:.1e}, max|dW| = {worst_dw:.1e} over {k} lambdas; |W_N| rates [{}] (min {})",
            rates.join(", "),
            t.soliton_rate_min
        ),
        elapsed_s: Some(elapsed),
    })
}

fn c3(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for &lambda in &exp.cfg.lambda_grid {
        let w = entropy::entropy_w(exp.flow, exp.sol, lambda)?;
        let ladder = exp
            .cfg
            .n_ladder
            .iter()
            .map(|&big_n| Ok((big_n, ColdingSampler::new(exp.flow, exp.sol, big_n)?.areas(lambda)?.area)))
            .collect::<Result<Vec<_>, Error>>()?;
        let (rate_ok, rate) = rate_check(&ladder, Some(w), t.area_rate);
        let k = ladder.len();
        let extrapolated = if k >= 2 {
            richardson(ladder[k - 2].1, ladder[k - 1].1, 1.0)
        } else {
            f64::NAN
        };
        let err = (extrapolated - w).abs();
        ok &= rate_ok && err <= t.area_richardson_abs;
        parts.push(format!("lambda {lambda}: {rate}, Richardson err {err:.1e}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < t.area_runtime_s;
    Ok(Outcome {
        ok,
        detail: parts.join("; "),
        elapsed_s: Some(elapsed),
    })
}

fn c4(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let n = exp.flow.dim();
    let mut ok = true;
    let mut parts = Vec::new();
    for &lambda in &exp.cfg.lambda_grid {
        let gap = clean_ladder(exp, lambda, |r| r.m(n) * r.v_n - r.a_n)?;
        let (rate_ok, rate) = rate_check(&gap, Some(0.0), t.volume_rate);
        let scaled = ladder_of(exp.rows, lambda, |r| r.v_n - r.a_n / r.m(n));
        let diag = fit_rate(&scaled, Some(0.0)).map_or_else(|e| e.to_string(), |f| format!("{:.3}", f.rate));
        let tails_ok = exp
            .rows
            .iter()
            .filter(|r| r.lambda == lambda && r.big_n >= t.tail_min_n)
            .all(|r| r.tail_bound < t.tail_cap * (1.0 + r.a_n.abs()));
        ok &= rate_ok && tails_ok;
        parts.push(format!(
            "lambda {lambda}: |m V_N - A_N| {rate}, tails {}; V_N - A_N/m rate {diag}",
            if tails_ok { "ok" } else { "too large" }
        ));
    }
    Ok(outcome(ok, parts.join("; ")))
}

/// λ at which the derivative checks run: 1 if sampled, else the middle λ.
fn derivative_lambda(cfg: &ExperimentConfig) -> f64 {
    if cfg.lambda_grid.contains(&1.0) {
        1.0
    } else {
        cfg.lambda_grid[cfg.lambda_grid.len() / 2]
    }
}

/// (N, dWN, dW) rungs and the calibrated K.
type Gaps = (Vec<(usize, f64, f64)>, f64);

/// Rungs N ≥ min with |dWN − dW|, and K = 2·N_top·|dWN_top − dW|.
fn derivative_gaps(exp: &Experiment<'_>, lambda: f64) -> Result<Gaps, CheckError> {
    let min_n = exp.cfg.tolerances.top_rung_min_n;
    let rungs: Vec<(usize, f64, f64)> = clean_ladder(exp, lambda, |r| r.dwn)?
        .into_iter()
        .zip(ladder_of(exp.rows, lambda, |r| r.dw))
        .filter(|((n, _), _)| *n >= min_n)
        .map(|((n, dwn), (_, dw))| (n, dwn, dw))
        .collect();
    let &(n_top, dwn_top, dw) = rungs
        .last()
        .ok_or_else(|| Error::Ladder(format!("no rung with N >= {min_n}")))?;
    Ok((rungs, 2.0 * n_top as f64 * (dwn_top - dw).abs()))
}

fn c5(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let mut ok = true;
    let mut parts = Vec::new();
    for &lambda in &exp.cfg.lambda_grid {
        let w = exp.rows.iter().find(|r| r.lambda == lambda).map_or(f64::NAN, |r| r.w);
        let ladder = clean_ladder(exp, lambda, |r| r.w_n)?;
        let (rate_ok, rate) = rate_check(&ladder, Some(w), t.monotone_rate);
        ok &= rate_ok;
        parts.push(format!("lambda {lambda}: |W_N - W| {rate}"));
    }
    let lambda = derivative_lambda(exp.cfg);
    let (rungs, k) = derivative_gaps(exp, lambda)?;
    let mut worst = 0.0_f64;
    for &(n, dwn, dw) in &rungs {
        let tol = t.dwn_abs_floor.max(k / n as f64);
        ok &= (dwn - dw).abs() <= tol;
        worst = worst.max((dwn - dw).abs() / tol);
    }
    let (_, dwn_top, dw) = rungs[rungs.len() - 1];
    parts.push(format!(
        "dWN({lambda}) = {dwn_top:.8} vs dW = {dw:.8}, K = {k:.3}, worst |gap|/tol {worst:.3}"
    ));
    Ok(outcome(ok, parts.join("; ")))
}

fn top_rungs(exp: &Experiment<'_>) -> Vec<usize> {
    let min_n = exp.cfg.tolerances.top_rung_min_n;
    exp.cfg.n_ladder.iter().copied().filter(|&n| n >= min_n).collect()
}

fn c6(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let rungs = top_rungs(exp);
    if rungs.len() < 2 {
        return Ok(outcome(false, format!("need >= 2 rungs with N >= {}", t.top_rung_min_n)));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for &lambda in &exp.cfg.lambda_grid {
        let ladder: Vec<(usize, f64)> = finite_ladder(exp, lambda, |r| r.hat_h_scaled)?
            .into_iter()
            .filter(|(n, _)| rungs.contains(n))
            .collect();
        let var = scaled_variation(&ladder, t.zero_floor);
        ok &= var < t.hat_h_variation;
        let top = ladder.last().map_or(f64::NAN, |&(n, q)| n as f64 * q);
        parts.push(format!("lambda {lambda}: N*sup {top:.4e}, variation {var:.3}"));
    }
    if let Some(tampered) = exp.cfg.tampered(t.tamper_decay) {
        let (flow, sol) = tampered.build().map_err(|e| CheckError::Tampered(e.to_string()))?;
        for &lambda in &exp.cfg.lambda_grid {
            let pts = rungs
                .iter()
                .map(|&n| Ok((n, n as f64 * nspace::scaled_hat_laplacian_h(&flow, &sol, lambda, n)?.max_abs())))
                .collect::<Result<Vec<_>, Error>>()?;
            let growth = log_log_slope(&pts)?;
            let grows = in_window(growth, t.tamper_growth);
            ok &= grows;
            parts.push(format!(
                "tampered (decay {}) lambda {lambda}: N*sup growth exponent {growth:.3}",
                t.tamper_decay
            ));
        }
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn c7(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let k = exp.cfg.n_ladder.len();
    if k < 3 {
        return Ok(outcome(false, "need >= 3 rungs".into()));
    }
    let rungs = &exp.cfg.n_ladder[k - 3..];
    let mut ok = true;
    let mut parts = Vec::new();
    for &lambda in &exp.cfg.lambda_grid {
        let ladder: Vec<(usize, f64)> = finite_ladder(exp, lambda, |r| r.b2_residual)?
            .into_iter()
            .filter(|(n, _)| rungs.contains(n))
            .collect();
        let var = scaled_variation(&ladder, t.zero_floor);
        ok &= var < t.b2_variation;
        let top = ladder.last().map_or(f64::NAN, |&(n, q)| n as f64 * q);
        parts.push(format!("lambda {lambda}: N*residual {top:.4e}, variation {var:.3}"));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn c8(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let mut worst = 0.0_f64;
    for &lambda in &exp.cfg.lambda_grid {
        for &big_n in &t.reduction_ns {
            let ctx = NSpaceContext::new(big_n, exp.flow.dim(), lambda)?;
            let fast = nspace::area_a_n(exp.flow, exp.sol, &ctx)?;
            let literal = nspace::area_a_n_literal(exp.flow, exp.sol, big_n, lambda)?;
            worst = worst.max((fast - literal).abs() / literal.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(outcome(
        worst <= t.reduction_rel,
        format!(
            "max relative gap {worst:.2e} over N in {:?} (tolerance {:.0e})",
            t.reduction_ns, t.reduction_rel
        ),
    ))
}

fn c9(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let mut ok = true;
    let mut parts = Vec::new();
    for &lambda in &exp.cfg.lambda_grid {
        let ladder = finite_ladder(exp, lambda, |r| r.phi_dev)?;
        let (rate_ok, rate) = rate_check(&ladder, Some(0.0), t.level_set_rate);
        ok &= rate_ok;
        parts.push(format!("lambda {lambda}: max|phi - lambda| {rate}"));
    }
    let worst = exp.rows.iter().map(|r| r.level_set_residual).fold(0.0, f64::max);
    ok &= worst <= t.newton_residual;
    parts.push(format!("worst Newton residual {worst:.1e}"));
    Ok(outcome(ok, parts.join("; ")))
}

fn c10(exp: &Experiment<'_>) -> Result<Outcome, CheckError> {
    let t = &exp.cfg.tolerances;
    let mut ok = true;
    let mut worst_dw = f64::NEG_INFINITY;
    let mut worst_ratio = f64::NEG_INFINITY;
    for &lambda in &exp.cfg.lambda_grid {
        let dw = entropy::entropy_derivative(exp.flow, exp.sol, lambda)?;
        worst_dw = worst_dw.max(dw);
        ok &= dw <= 0.0;
        let (rungs, k) = derivative_gaps(exp, lambda)?;
        for (n, dwn, _) in rungs {
            let eps = (k / n as f64).max(t.derivative_noise);
            ok &= dwn <= eps;
            worst_ratio = worst_ratio.max(dwn / eps);
        }
    }
    Ok(outcome(
        ok,
        format!("max dW/dlambda = {worst_dw:.3e}; max dWN/eps_N = {worst_ratio:.3} (N >= {})", t.top_rung_min_n),
    ))
}
