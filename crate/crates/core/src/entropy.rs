//! Perelman's W-entropy and its derivative along the flow.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{self, FlowSolution, MetricFamily, ScalarField};
use crate::potential::PotentialSolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySample {
    pub lambda: f64,
    pub w: f64,
    pub dw: f64,
    /// ∫ 2λ|Ric + ∇∇f − g/2λ|² (4πλ)^{−n/2} e^{−f} dν, assembled through a
    /// separate expansion of the square.
    pub integrand_norm: f64,
}

fn gaussian_weight(f: &ScalarField, lambda: f64, n: usize) -> ScalarField {
    let scale = (4.0 * PI * lambda).powf(-(n as f64) / 2.0);
    f.map(|x| scale * (-x).exp())
}

/// W(λ) = ∫ (λ(|∇f|² + R) + f − n)(4πλ)^{−n/2} e^{−f} dν.
pub fn entropy_w(flow: &FlowSolution, sol: &PotentialSolution, lambda: f64) -> Result<f64> {
    flow.check_tau(lambda)?;
    let ev = sol.on(flow)?;
    let n = flow.dim();
    let f = ev.f_at(lambda)?;
    let grad_sq = geometry::gradient_sq(&f)?;
    let r = flow.scalar_curvature_value(lambda);
    let weight = gaussian_weight(&f, lambda, n);
    let bracket = f.zip_with(&grad_sq, |fv, g| lambda * (g + r) + fv - n as f64)?;
    Ok(geometry::integrate(&bracket.zip_with(&weight, |a, b| a * b)?))
}

/// dW/dλ = −∫ 2λ|Ric + ∇∇f − g/(2λ)|² (4πλ)^{−n/2} e^{−f} dν.
pub fn entropy_derivative(flow: &FlowSolution, sol: &PotentialSolution, lambda: f64) -> Result<f64> {
    flow.check_tau(lambda)?;
    let ev = sol.on(flow)?;
    let f = ev.f_at(lambda)?;
    let hess = geometry::hessian(&f)?;
    let s = flow
        .ricci_unchecked(lambda)
        .combine(1.0, &hess, 1.0)?
        .combine(1.0, &flow.metric_unchecked(lambda), -1.0 / (2.0 * lambda))?;
    let norm = s.norm_sq();
    let weight = gaussian_weight(&f, lambda, flow.dim());
    let integrand = norm.zip_with(&weight, |a, b| 2.0 * lambda * a * b)?;
    Ok(-geometry::integrate(&integrand))
}

/// The derivative integrand expanded as
/// |Ric|² + |∇∇f|² + n/(4λ²) + 2⟨Ric,∇∇f⟩ − (R + Δf)/λ,
/// using that both model families are Einstein (Ric = (R/n)·g).
fn integrand_norm(flow: &FlowSolution, sol: &PotentialSolution, lambda: f64) -> Result<f64> {
    let ev = sol.on(flow)?;
    let n = flow.dim() as f64;
    let f = ev.f_at(lambda)?;
    let hess_sq = geometry::hessian(&f)?.norm_sq();
    let lap = geometry::laplacian(&f)?;
    let r = flow.scalar_curvature_value(lambda);
    let pointwise = hess_sq.zip_with(&lap, |h2, l| {
        r * r / n + h2 + n / (4.0 * lambda * lambda) + 2.0 * r * l / n - (r + l) / lambda
    })?;
    let weight = gaussian_weight(&f, lambda, flow.dim());
    Ok(geometry::integrate(
        &pointwise.zip_with(&weight, |a, b| 2.0 * lambda * a * b)?,
    ))
}

pub fn entropy_sample(flow: &FlowSolution, sol: &PotentialSolution, lambda: f64) -> Result<EntropySample> {
    Ok(EntropySample {
        lambda,
        w: entropy_w(flow, sol, lambda)?,
        dw: entropy_derivative(flow, sol, lambda)?,
        integrand_norm: integrand_norm(flow, sol, lambda)?,
    })
}
