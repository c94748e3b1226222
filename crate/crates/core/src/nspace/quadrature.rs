//! Gauss–Legendre rules and an adaptive panel integrator.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// The 16-point rule, built once.
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x)?;
        }
        Ok(half * sum)
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    /// Widest initial panel.
    pub max_panel: f64,
    /// Accept a panel when |whole − halves| ≤ rel_tol·scale·(width/total).
    pub rel_tol: f64,
    /// Unresolved disagreement above fail_above·max(scale, 1) is an error.
    pub fail_above: f64,
    pub max_depth: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            max_panel: 4.0,
            rel_tol: 1e-14,
            fail_above: 1e-11,
            max_depth: 12,
        }
    }
}

/// Minimum shrink factor of the panel disagreement per halving before it is
/// attributed to round-off rather than truncation.
const NOISE_RATIO: f64 = 3.0;

/// Adaptive 16-point Gauss–Legendre on [a, b]: each panel is compared with
/// the sum over its halves and split until they agree.
pub fn adaptive<F>(a: f64, b: f64, opts: AdaptiveOptions, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussLegendre::sixteen();
    let panels = ((b - a).abs() / opts.max_panel).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut coarse = Vec::with_capacity(panels);
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        coarse.push((lo, hi, rule.integrate(lo, hi, &mut f)?));
    }
    let scale = coarse.iter().map(|c| c.2.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let total = (b - a).abs();
    let fail_above = opts.fail_above * scale.max(1.0);
    let mut sum = 0.0;
    let mut stack: Vec<(f64, f64, f64, usize, f64)> = coarse
        .into_iter()
        .rev()
        .map(|(lo, hi, v)| (lo, hi, v, 0, f64::INFINITY))
        .collect();
    while let Some((lo, hi, whole, depth, parent_diff)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f)?;
        let right = rule.integrate(mid, hi, &mut f)?;
        let diff = (left + right - whole).abs();
        // truncation error of a smooth integrand drops by ~2^32 per halving;
        // a difference that barely shrinks is round-off in f
        let noise = diff * NOISE_RATIO > parent_diff && diff <= fail_above;
        if diff <= opts.rel_tol * scale * (hi - lo).abs() / total || noise {
            sum += left + right;
        } else if depth >= opts.max_depth {
            if diff > fail_above {
                return Err(Error::Quadrature {
                    lo,
                    hi,
                    disagreement: diff,
                });
            }
            sum += left + right;
        } else {
            stack.push((mid, hi, right, depth + 1, diff));
            stack.push((lo, mid, left, depth + 1, diff));
        }
    }
    Ok(sum)
}
