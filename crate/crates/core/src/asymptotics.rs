//! Rate fitting, Richardson extrapolation and refined central differences.
//!
//! An order claim "Q_N = Q_∞ + O(1/N^p)" is checked by fitting
//! ln|Q_N − Q_∞| against ln N over the upper half of a geometric N-ladder.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceFit {
    pub limit: f64,
    /// Signed C in Q_N ≈ limit + C·N^{−rate}.
    pub constant: f64,
    pub rate: f64,
    /// RMS residual of the log-log least-squares line.
    pub residual: f64,
    pub ladder: Vec<(usize, f64)>,
}

fn check_ladder(ladder: &[(usize, f64)]) -> Result<()> {
    if ladder.len() < 4 {
        return Err(Error::Ladder(format!("need >= 4 rungs, got {}", ladder.len())));
    }
    if ladder.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Ladder("N must be strictly increasing".into()));
    }
    if ladder.iter().any(|(_, q)| !q.is_finite()) {
        return Err(Error::Ladder("non-finite value on ladder".into()));
    }
    Ok(())
}

/// (ρ^p·Q_{ρN} − Q_N)/(ρ^p − 1) for a rung ratio ρ.
fn richardson_ratio(q_n: f64, q_next: f64, ratio: f64, p: f64) -> f64 {
    let w = ratio.powf(p);
    (w * q_next - q_n) / (w - 1.0)
}

/// Limit estimate from the top rungs: the rate is read off the last three
/// differences, then the top two rungs are Richardson-combined at that rate.
fn estimate_limit(ladder: &[(usize, f64)]) -> f64 {
    let k = ladder.len();
    let (n2, q2) = ladder[k - 2];
    let (n3, q3) = ladder[k - 1];
    let (n1, q1) = ladder[k - 3];
    let ratio = n3 as f64 / n2 as f64;
    let d1 = q1 - q2;
    let d2 = q2 - q3;
    let mut p = 1.0;
    if d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() {
        let r12 = n2 as f64 / n1 as f64;
        // exact for a geometric ladder; otherwise a reasonable estimate
        let est = (d1 / d2).ln() / ((r12 + ratio) / 2.0).ln();
        if est.is_finite() && est > 0.0 {
            p = est;
        }
    }
    richardson_ratio(q2, q3, ratio, p)
}

/// Slope, intercept and RMS residual of the least-squares line y = a + b·x.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / m;
    let ybar = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    (slope, intercept, residual)
}

/// Growth exponent: slope of ln|Q_N| against ln N over all rungs.
pub fn log_log_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Ladder(format!("need >= 2 points, got {}", points.len())));
    }
    if points.iter().any(|(_, q)| !(q.is_finite() && *q != 0.0)) {
        return Err(Error::Ladder("log-log slope needs finite nonzero values".into()));
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, q)| q.abs().ln()).collect();
    Ok(least_squares(&xs, &ys).0)
}

/// Least-squares fit of ln|Q_N − limit| = ln|C| − p ln N over the top half
/// of the ladder. With no reference the limit is extrapolated from the top
/// rungs.
pub fn fit_rate(ladder: &[(usize, f64)], reference: Option<f64>) -> Result<ConvergenceFit> {
    check_ladder(ladder)?;
    let limit = reference.unwrap_or_else(|| estimate_limit(ladder));
    let top = &ladder[ladder.len() / 2..];
    let scale = ladder
        .iter()
        .map(|(_, q)| q.abs())
        .fold(limit.abs(), f64::max);
    let floor = 1e2 * f64::EPSILON * scale;
    let mut xs = Vec::with_capacity(top.len());
    let mut ys = Vec::with_capacity(top.len());
    for &(n, q) in top {
        let d = (q - limit).abs();
        if d <= floor {
            return Err(Error::DegenerateFit { floor });
        }
        xs.push((n as f64).ln());
        ys.push(d.ln());
    }
    let (slope, intercept, residual) = least_squares(&xs, &ys);
    let sign = (top[top.len() - 1].1 - limit).signum();
    Ok(ConvergenceFit {
        limit,
        constant: sign * intercept.exp(),
        rate: -slope,
        residual,
        ladder: ladder.to_vec(),
    })
}

/// Eliminates a C/N^p term from a doubling pair: (2^p·Q_{2N} − Q_N)/(2^p − 1).
///
/// # Panics
/// If `p <= 0`.
pub fn richardson(q_n: f64, q_2n: f64, p: f64) -> f64 {
    assert!(p > 0.0, "Richardson rate must be positive");
    richardson_ratio(q_n, q_2n, 2.0, p)
}

/// Centered difference with one Richardson refinement:
/// (4·D(h/2) − D(h))/3 with h = h_rel·|x| (or h_rel at x = 0).
pub fn central_derivative<F>(f: F, x: f64, h_rel: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = if x == 0.0 { h_rel } else { h_rel * x.abs() };
    let d = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Relative spread (max − min)/max of N·|Q_N| over a set of rungs; values
/// whose scaled magnitudes all sit below `floor` count as exactly zero.
pub fn scaled_variation(rungs: &[(usize, f64)], floor: f64) -> f64 {
    let scaled: Vec<f64> = rungs.iter().map(|&(n, q)| n as f64 * q.abs()).collect();
    let max = scaled.iter().cloned().fold(0.0, f64::max);
    let min = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    if max <= floor {
        0.0
    } else {
        (max - min) / max
    }
}

/// Default N-ladder {2^7, …, 2^14}.
pub fn default_ladder() -> Vec<usize> {
    (7..=14).map(|k| 1usize << k).collect()
}
