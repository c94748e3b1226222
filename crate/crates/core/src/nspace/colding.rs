use crate::asymptotics;
use crate::error::{Error, Result};
use crate::geometry::{self, FlowSolution, ScalarField};
use crate::potential::PotentialSolution;

use super::gradient::grad_b_sq_minus_one;
use super::level_set::{LevelSet, LevelSetSolver};
use super::quadrature::{self, AdaptiveOptions};
use super::NSpaceContext;

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Lowest ξ the volume integral reaches; e^{−40} < 5e−18.
pub const XI_FLOOR: f64 = -40.0;

/// Samples with tail_bound above this times (1 + |A_N|) are rejected.
pub const TAIL_CAP: f64 = 1e-12;

/// 𝒜_N and the raw area 𝒜̄_N on one level set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaPair {
    pub area: f64,
    pub raw: f64,
    pub level_set_residual: f64,
    pub newton_iters: usize,
}

/// Truncated 𝒱_N with the bound on the discarded part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    pub v_n: f64,
    pub tail_bound: f64,
    /// Number of area evaluations used by the quadrature.
    pub evaluations: usize,
    /// Worst level-set residual over all quadrature nodes.
    pub level_set_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColdingSample {
    pub big_n: usize,
    pub lambda: f64,
    pub a_n: f64,
    pub raw_a_n: f64,
    pub v_n: f64,
    pub w_n: f64,
    pub tail_bound: f64,
    pub level_set_residual: f64,
}

fn integrate_on(ls: &LevelSet, flow: &FlowSolution, values: Vec<f64>) -> Result<f64> {
    let field = match flow.grid() {
        Some(grid) if values.len() > 1 => ScalarField::from_fn(ls.lambda, grid, |p| values[p]),
        // homogeneous: φ is constant and the measure is the one at τ = φ
        _ => ScalarField::uniform(ls.lambda, flow.domain(ls.phi.at(0)), values[0]),
    };
    if !field.is_finite() {
        return Err(Error::Configuration(format!(
            "non-finite area integrand at lambda = {}",
            ls.lambda
        )));
    }
    Ok(geometry::integrate(&field))
}

fn areas(solver: &LevelSetSolver<'_>, lambda: f64) -> Result<AreaPair> {
    let flow = solver.flow();
    let ctx = NSpaceContext::new(solver.big_n(), flow.dim(), lambda)?;
    let ls = solver.solve(lambda)?;
    let half_n = 0.5 * ctx.big_n as f64;
    let beta = 2.0 / (ctx.m as f64 - 2.0);
    let ev = solver.evaluator();
    let mut area = Vec::with_capacity(ls.phi.len());
    let mut raw = Vec::with_capacity(ls.phi.len());
    for p in 0..ls.phi.len() {
        let phi = ls.phi.at(p);
        let jet = ev.jet(phi, p);
        let gm1 = grad_b_sq_minus_one(&jet, phi, flow.scalar_curvature_value(phi), ctx.big_n, ctx.n);
        let g = 1.0 + gm1;
        // on the level set ln(φ/λ) = −2f/(m−2), which avoids amplifying the
        // round-off in φ by N/2
        let weight = (-half_n * beta * jet.f).exp() * ls.area_correction.at(p);
        area.push(weight * gm1 * g.sqrt());
        raw.push(weight * g * g.sqrt());
    }
    let pre = ctx.area_prefactor();
    Ok(AreaPair {
        area: pre * integrate_on(&ls, flow, area)?,
        raw: pre * integrate_on(&ls, flow, raw)?,
        level_set_residual: ls.residual,
        newton_iters: ls.newton_iters,
    })
}

fn volume(solver: &LevelSetSolver<'_>, ctx: &NSpaceContext) -> Result<VolumeEstimate> {
    let nb = ctx.big_n as f64;
    let m = ctx.m as f64;
    let xi_min = (0.5 * nb * (ctx.lambda0 / ctx.lambda).ln()).max(XI_FLOOR);
    let opts = AdaptiveOptions::default();
    let bottom = xi_min + opts.max_panel;
    let mut evaluations = 0;
    let mut k_sup = 0.0_f64;
    let mut worst = 0.0_f64;
    let v_n = quadrature::adaptive(xi_min, 0.0, opts, |xi| {
        let pair = areas(solver, ctx.lambda * (2.0 * xi / nb).exp())?;
        evaluations += 1;
        worst = worst.max(pair.level_set_residual);
        if xi <= bottom {
            k_sup = k_sup.max(pair.area.abs());
        }
        Ok((m * xi / nb).exp() * pair.area / nb)
    })?;
    Ok(VolumeEstimate {
        v_n,
        tail_bound: k_sup * (xi_min * (nb + 1.0) / nb).exp(),
        evaluations,
        level_set_residual: worst,
    })
}

/// Reusable evaluator of the Colding functionals for one (flow, f, N).
#[derive(Debug, Clone)]
pub struct ColdingSampler<'a> {
    solver: LevelSetSolver<'a>,
}

impl<'a> ColdingSampler<'a> {
    pub fn new(flow: &'a FlowSolution, sol: &'a PotentialSolution, big_n: usize) -> Result<Self> {
        Ok(ColdingSampler {
            solver: LevelSetSolver::new(flow, sol, big_n)?,
        })
    }

    pub fn big_n(&self) -> usize {
        self.solver.big_n()
    }

    pub fn areas(&self, lambda: f64) -> Result<AreaPair> {
        areas(&self.solver, lambda)
    }

    pub fn volume(&self, ctx: &NSpaceContext) -> Result<VolumeEstimate> {
        self.check(ctx)?;
        volume(&self.solver, ctx)
    }

    /// 2(m−1)·𝒱_N − 𝒜_N.
    pub fn w_n(&self, ctx: &NSpaceContext) -> Result<f64> {
        let v = self.volume(ctx)?;
        let a = self.areas(ctx.lambda)?;
        Ok(2.0 * (ctx.m as f64 - 1.0) * v.v_n - a.area)
    }

    /// Full sample; rejects when the truncation tail is not negligible.
    pub fn sample(&self, ctx: &NSpaceContext) -> Result<ColdingSample> {
        let v = self.volume(ctx)?;
        let a = self.areas(ctx.lambda)?;
        let cap = TAIL_CAP * (1.0 + a.area.abs());
        if v.tail_bound > cap {
            return Err(Error::TailTooLarge {
                tail: v.tail_bound,
                cap,
            });
        }
        Ok(ColdingSample {
            big_n: ctx.big_n,
            lambda: ctx.lambda,
            a_n: a.area,
            raw_a_n: a.raw,
            v_n: v.v_n,
            w_n: 2.0 * (ctx.m as f64 - 1.0) * v.v_n - a.area,
            tail_bound: v.tail_bound,
            level_set_residual: v.level_set_residual.max(a.level_set_residual),
        })
    }

    /// d𝒲_N/dλ at ctx.λ by a centered difference with one Richardson
    /// step; λ0/λ is held at the context's ratio.
    pub fn dw_dlambda(&self, ctx: &NSpaceContext, h_rel: f64) -> Result<f64> {
        self.check(ctx)?;
        asymptotics::central_derivative(|l| self.w_n(&ctx.at_lambda(l)?), ctx.lambda, h_rel)
    }

    pub fn level_set(&self, lambda: f64) -> Result<LevelSet> {
        self.solver.solve(lambda)
    }

    fn check(&self, ctx: &NSpaceContext) -> Result<()> {
        if ctx.big_n != self.big_n() || ctx.n != self.solver.flow().dim() {
            return Err(Error::Configuration(format!(
                "context (N={}, n={}) does not match sampler (N={}, n={})",
                ctx.big_n,
                ctx.n,
                self.big_n(),
                self.solver.flow().dim()
            )));
        }
        Ok(())
    }
}

/// Largest N for which the literal form stays inside f64 range.
pub const LITERAL_MAX_N: usize = 128;

/// 𝒜_N assembled directly from its definition: c_N with |S^N| from the
/// Gamma function, s^{m−1}, and the pulled-back area element
/// (2Nφ)^{N/2}·√(1 + (Nv/2φ)|∇φ|²)·|S^N| of the graph r = √(2Nφ(x)).
/// Only meaningful for small N; used to cross-check [`area_a_n`].
pub fn area_a_n_literal(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    big_n: usize,
    lambda: f64,
) -> Result<f64> {
    if big_n > LITERAL_MAX_N {
        return Err(Error::Range {
            what: "N (literal area)",
            value: big_n as f64,
            lo: super::MIN_N as f64,
            hi: LITERAL_MAX_N as f64,
        });
    }
    let n = flow.dim();
    let ctx = NSpaceContext::new(big_n, n, lambda)?;
    let nb = big_n as f64;
    let sphere = 2.0 * PI.powf(0.5 * (nb + 1.0)) / gamma(0.5 * (nb + 1.0));
    let c_n = (4.0 * PI).powf(-0.5 * n as f64) * (2.0 * nb).powf(0.5 * n as f64 + 1.0)
        / (4.0 * sphere);
    let ls = LevelSetSolver::new(flow, sol, big_n)?.solve(lambda)?;
    let ev = sol.on(flow)?;
    let values: Vec<f64> = (0..ls.phi.len())
        .map(|p| {
            let phi = ls.phi.at(p);
            let r_curv = flow.scalar_curvature_value(phi);
            let j = ev.jet(phi, p);
            let g = 1.0 + grad_b_sq_minus_one(&j, phi, r_curv, big_n, n);
            let v = 1.0 + 2.0 * phi * r_curv / nb;
            let r = (2.0 * nb * phi).sqrt();
            let dr_sq = nb * ls.grad_phi_sq.at(p) / (2.0 * phi);
            r.powf(nb) * (1.0 + v * dr_sq).sqrt() * sphere * (g - 1.0) * g.sqrt()
        })
        .collect();
    Ok(c_n / ctx.s.powf(ctx.m as f64 - 1.0) * integrate_on(&ls, flow, values)?)
}

pub fn area_pair(flow: &FlowSolution, sol: &PotentialSolution, ctx: &NSpaceContext) -> Result<AreaPair> {
    ColdingSampler::new(flow, sol, ctx.big_n)?.areas(ctx.lambda)
}

/// 𝒜_N = (N/2)(4πλ)^{−n/2}∫(φ/λ)^{N/2}·√(1 + (Nv/2φ)|∇φ|²)·(|∇̂b|² − 1)|∇̂b| dν.
pub fn area_a_n(flow: &FlowSolution, sol: &PotentialSolution, ctx: &NSpaceContext) -> Result<f64> {
    Ok(area_pair(flow, sol, ctx)?.area)
}

/// 𝒜̄_N, the same integral with weight |∇̂b|³.
pub fn raw_area(flow: &FlowSolution, sol: &PotentialSolution, ctx: &NSpaceContext) -> Result<f64> {
    Ok(area_pair(flow, sol, ctx)?.raw)
}

/// 𝒱_N = (1/N)∫_{ξmin}^0 e^{mξ/N}𝒜_N(λe^{2ξ/N}) dξ, ξmin = max(−40, (N/2)ln(λ0/λ)).
pub fn volume_v_n(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    ctx: &NSpaceContext,
) -> Result<VolumeEstimate> {
    ColdingSampler::new(flow, sol, ctx.big_n)?.volume(ctx)
}

pub fn monotonic_w_n(flow: &FlowSolution, sol: &PotentialSolution, ctx: &NSpaceContext) -> Result<f64> {
    ColdingSampler::new(flow, sol, ctx.big_n)?.w_n(ctx)
}

/// d𝒲_N/dλ with λ0 = λ/2 at every sampled λ.
pub fn dwn_dlambda(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    big_n: usize,
    lambda: f64,
    h_rel: f64,
) -> Result<f64> {
    let ctx = NSpaceContext::new(big_n, flow.dim(), lambda)?;
    ColdingSampler::new(flow, sol, big_n)?.dw_dlambda(&ctx, h_rel)
}

pub fn colding_sample(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    ctx: &NSpaceContext,
) -> Result<ColdingSample> {
    ColdingSampler::new(flow, sol, ctx.big_n)?.sample(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy;
    use crate::geometry::Grid;
    use crate::potential::Mode;

    fn t1(points: usize) -> FlowSolution {
        FlowSolution::flat_torus(Grid::standard(1, points).unwrap(), 2.0, 0.1).unwrap()
    }

    fn spectral() -> PotentialSolution {
        PotentialSolution::torus_spectral(
            1.0,
            vec![Mode {
                amplitude: 0.5,
                wave: vec![1],
            }],
        )
        .unwrap()
    }

    fn soliton() -> (FlowSolution, PotentialSolution) {
        (
            FlowSolution::round_sphere(2, 0.0, 2.0, 0.1).unwrap(),
            PotentialSolution::constant(1.0 - 2f64.ln()),
        )
    }

    #[test]
    fn literal_definition_matches_reduction() {
        let cases = [
            (t1(64), spectral()),
            (t1(16), PotentialSolution::constant(0.0)),
            soliton(),
            (
                FlowSolution::round_sphere(3, 1.0, 2.0, 0.1).unwrap(),
                PotentialSolution::constant(0.2),
            ),
        ];
        for (flow, sol) in &cases {
            for big_n in [8usize, 20, 64, 100] {
                for lambda in [0.6, 1.0] {
                    let ctx = NSpaceContext::new(big_n, flow.dim(), lambda).unwrap();
                    let fast = area_a_n(flow, sol, &ctx).unwrap();
                    let lit = area_a_n_literal(flow, sol, big_n, lambda).unwrap();
                    let rel = (fast - lit).abs() / lit.abs().max(1e-300);
                    assert!(rel < 1e-10, "N={big_n} lambda={lambda}: {fast} vs {lit}");
                }
            }
        }
    }

    #[test]
    fn pullback_determinant_is_a_rank_one_update() {
        // Induced metric on the graph r = ρ(x) in 2D: g + v·∇ρ⊗∇ρ
        for (gx, gy, v) in [(0.3f64, -1.2f64, 1.0f64), (2.0, 0.5, 1.7), (0.0, 0.0, 3.0)] {
            let m = [[1.0 + v * gx * gx, v * gx * gy], [v * gx * gy, 1.0 + v * gy * gy]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let rank_one = 1.0 + v * (gx * gx + gy * gy);
            assert!((det - rank_one).abs() < 1e-14 * rank_one);
        }
    }

    #[test]
    fn torus_constant_area_converges() {
        let flow = t1(16);
        let sol = PotentialSolution::constant(0.0);
        let target = -PI.sqrt();
        let mut prev = f64::INFINITY;
        for big_n in [256usize, 1024, 4096, 16384] {
            let ctx = NSpaceContext::new(big_n, 1, 1.0).unwrap();
            let err = (area_a_n(&flow, &sol, &ctx).unwrap() - target).abs();
            assert!(err < 5.0 / big_n as f64, "N={big_n}: {err}");
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn soliton_area_is_order_one_over_n() {
        let (flow, sol) = soliton();
        for big_n in [128usize, 1024, 8192] {
            let ctx = NSpaceContext::new(big_n, 2, 1.0).unwrap();
            let a = area_a_n(&flow, &sol, &ctx).unwrap();
            assert!(a.abs() * (big_n as f64) < 10.0, "N={big_n}: {a}");
        }
    }

    #[test]
    fn raw_area_normalization() {
        for (flow, sol) in [(t1(64), spectral()), soliton()] {
            let lambda = 1.0;
            let ev = sol.on(&flow).unwrap();
            let f = ev.f_at(lambda).unwrap();
            let n = flow.dim() as f64;
            let want = 0.5 * (4.0 * PI * lambda).powf(-0.5 * n) * geometry::integrate(&f.map(|v| (-v).exp()));
            let big_n = 16384;
            let ctx = NSpaceContext::new(big_n, flow.dim(), lambda).unwrap();
            let got = raw_area(&flow, &sol, &ctx).unwrap() / big_n as f64;
            assert!((got - want).abs() < 1e-3 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn spectral_area_tracks_entropy() {
        let flow = t1(64);
        let sol = spectral();
        let w = entropy::entropy_w(&flow, &sol, 1.0).unwrap();
        let ctx = NSpaceContext::new(8192, 1, 1.0).unwrap();
        let a = area_a_n(&flow, &sol, &ctx).unwrap();
        assert!((a - w).abs() < 1e-3, "{a} vs {w}");
    }

    #[test]
    fn volume_is_close_to_area_over_m() {
        let flow = t1(16);
        let sol = PotentialSolution::constant(0.0);
        let ctx = NSpaceContext::new(1024, 1, 1.0).unwrap();
        let v = volume_v_n(&flow, &sol, &ctx).unwrap();
        let a = area_a_n(&flow, &sol, &ctx).unwrap();
        let m = ctx.m as f64;
        assert!((m * v.v_n - a).abs() < 20.0 / 1024.0, "{} vs {a}", m * v.v_n);
        assert!(v.tail_bound < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn small_n_sample_is_rejected_for_tail() {
        let flow = t1(16);
        let sol = PotentialSolution::constant(0.0);
        let ctx = NSpaceContext::new(8, 1, 1.0).unwrap();
        assert!(matches!(colding_sample(&flow, &sol, &ctx), Err(Error::TailTooLarge { .. })));
        // the estimate itself is still available
        assert!(volume_v_n(&flow, &sol, &ctx).unwrap().tail_bound > 0.0);
    }

    #[test]
    fn sample_fields_are_consistent() {
        let flow = t1(32);
        let sol = spectral();
        let ctx = NSpaceContext::new(512, 1, 1.0).unwrap();
        let s = colding_sample(&flow, &sol, &ctx).unwrap();
        assert_eq!(s.w_n, 2.0 * (ctx.m as f64 - 1.0) * s.v_n - s.a_n);
        assert!(s.tail_bound <= 1e-12 * s.a_n.abs() + 1e-15);
        assert!(s.level_set_residual <= 1e-12);
    }

    #[test]
    fn dwn_tracks_entropy_derivative() {
        let flow = t1(16);
        let sol = PotentialSolution::constant(0.0);
        let d = dwn_dlambda(&flow, &sol, 4096, 1.0, 1e-3).unwrap();
        assert!((d + 0.5 * PI.sqrt()).abs() < 4.0 / 4096.0, "{d}");
        let (flow, sol) = soliton();
        assert!(dwn_dlambda(&flow, &sol, 1024, 1.0, 1e-3).unwrap().abs() < 1e-9);
    }

    #[test]
    fn sampler_rejects_mismatched_context() {
        let flow = t1(16);
        let sol = PotentialSolution::constant(0.0);
        let sampler = ColdingSampler::new(&flow, &sol, 256).unwrap();
        let ctx = NSpaceContext::new(512, 1, 1.0).unwrap();
        assert!(sampler.volume(&ctx).is_err());
    }
}
