use crate::error::{Error, Result};
use crate::geometry::{self, FlowSolution, ScalarField};
use crate::potential::{PotentialEvaluator, PotentialSolution};

use super::NSpaceContext;

const MAX_ITERS: usize = 50;
const STEP_TOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-12;
const MONOTONE_SAMPLES: usize = 16;

/// The level set {b = s} written as the graph τ = φ(x).
#[derive(Debug, Clone)]
pub struct LevelSet {
    pub lambda: f64,
    pub phi: ScalarField,
    pub grad_phi_sq: ScalarField,
    /// √(1 + (N·v/(2φ))|∇φ|²).
    pub area_correction: ScalarField,
    /// Largest Newton iteration count over the grid.
    pub newton_iters: usize,
    /// Largest relative residual |τe^{βf}/λ − 1| over the grid.
    pub residual: f64,
}

/// Solves τ·e^{2f(τ,x)/(m−2)} = λ for many λ at fixed (flow, f, N).
///
/// Construction checks that τ ↦ ln τ + βf(τ, x) is increasing on the whole
/// flow interval at every point, so each root is unique.
#[derive(Debug, Clone)]
pub struct LevelSetSolver<'a> {
    ev: PotentialEvaluator<'a>,
    big_n: usize,
    beta: f64,
}

impl<'a> LevelSetSolver<'a> {
    pub fn new(flow: &'a FlowSolution, sol: &'a PotentialSolution, big_n: usize) -> Result<Self> {
        let ev = sol.on(flow)?;
        let beta = 2.0 / (big_n + flow.dim() - 1) as f64;
        let (lo, hi) = (flow.tau_min(), flow.horizon());
        for p in 0..ev.points() {
            for k in 0..MONOTONE_SAMPLES {
                let tau = lo + (hi - lo) * k as f64 / (MONOTONE_SAMPLES - 1) as f64;
                let slope = 1.0 / tau + beta * ev.jet(tau, p).f_tau;
                if !(slope > 0.0) {
                    return Err(Error::NonMonotone {
                        point: p,
                        tau,
                        slope,
                    });
                }
            }
        }
        Ok(LevelSetSolver { ev, big_n, beta })
    }

    pub fn flow(&self) -> &FlowSolution {
        self.ev.flow()
    }

    pub fn big_n(&self) -> usize {
        self.big_n
    }

    pub fn evaluator(&self) -> &PotentialEvaluator<'a> {
        &self.ev
    }

    fn root(&self, lambda: f64, point: usize) -> Result<(f64, usize, f64)> {
        let flow = self.ev.flow();
        let target = lambda.ln();
        let fail = |iterations, residual| Error::NewtonFailed {
            point,
            iterations,
            residual,
        };
        let mut tau = lambda;
        let mut polished = false;
        for it in 1..=MAX_ITERS {
            let j = self.ev.jet(tau, point);
            let g = tau.ln() + self.beta * j.f - target;
            let slope = 1.0 / tau + self.beta * j.f_tau;
            let step = g / slope;
            tau -= step;
            if flow.check_tau(tau).is_err() {
                return Err(fail(it, g.abs()));
            }
            if polished {
                let j = self.ev.jet(tau, point);
                let residual = (tau.ln() + self.beta * j.f - target).exp_m1().abs();
                return if residual <= RESIDUAL_TOL {
                    Ok((tau, it, residual))
                } else {
                    Err(fail(it, residual))
                };
            }
            if step.abs() <= STEP_TOL * tau {
                polished = true;
            }
        }
        Err(fail(MAX_ITERS, f64::NAN))
    }

    pub fn solve(&self, lambda: f64) -> Result<LevelSet> {
        let flow = self.ev.flow();
        flow.check_tau(lambda)?;
        let roots: Vec<(f64, usize, f64)> = (0..self.ev.points())
            .map(|p| self.root(lambda, p))
            .collect::<Result<_>>()?;
        let newton_iters = roots.iter().map(|r| r.1).max().unwrap_or(0);
        let residual = roots.iter().map(|r| r.2).fold(0.0, f64::max);
        let r = |tau: f64| flow.scalar_curvature_value(tau);
        let nb = self.big_n as f64;
        let (phi, grad_phi_sq) = match flow.grid() {
            Some(grid) if !self.ev.is_uniform() => {
                let phi = ScalarField::from_fn(lambda, grid, |p| roots[p].0);
                let g = geometry::gradient_sq(&phi)?;
                (phi, g)
            }
            _ => {
                let d = flow.domain(lambda);
                (
                    ScalarField::uniform(lambda, d.clone(), roots[0].0),
                    ScalarField::uniform(lambda, d, 0.0),
                )
            }
        };
        let area_correction = phi.zip_with(&grad_phi_sq, |phi, g| {
            let v = 1.0 + 2.0 * phi * r(phi) / nb;
            (1.0 + nb * v / (2.0 * phi) * g).sqrt()
        })?;
        Ok(LevelSet {
            lambda,
            phi,
            grad_phi_sq,
            area_correction,
            newton_iters,
            residual,
        })
    }
}

/// One-shot level set for the context's N and λ.
pub fn level_set_solve(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    ctx: &NSpaceContext,
) -> Result<LevelSet> {
    LevelSetSolver::new(flow, sol, ctx.big_n)?.solve(ctx.lambda)
}
