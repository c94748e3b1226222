use crate::error::{Error, Result};
use crate::geometry::{FlowSolution, ScalarField};
use crate::potential::{Jet, PotentialSolution};

use super::gradient::grad_b_sq_minus_one;

/// A rotation-invariant function on N-space sampled at fixed τ, with the
/// derivatives the hat-Laplacian needs. One entry per evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct HatInput {
    pub tau: f64,
    pub h: Vec<f64>,
    pub h_tau: Vec<f64>,
    pub h_tautau: Vec<f64>,
    pub lap: Vec<f64>,
    /// ⟨∇R, ∇h⟩ on M.
    pub grad_r_dot: Vec<f64>,
}

impl HatInput {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    fn from_jets(tau: f64, jets: &[Jet], pick: impl Fn(&Jet) -> [f64; 4]) -> Self {
        let mut out = HatInput {
            tau,
            h: Vec::with_capacity(jets.len()),
            h_tau: Vec::with_capacity(jets.len()),
            h_tautau: Vec::with_capacity(jets.len()),
            lap: Vec::with_capacity(jets.len()),
            grad_r_dot: vec![0.0; jets.len()],
        };
        for j in jets {
            let [h, ht, htt, lap] = pick(j);
            out.h.push(h);
            out.h_tau.push(ht);
            out.h_tautau.push(htt);
            out.lap.push(lap);
        }
        out
    }
}

fn jets(flow: &FlowSolution, sol: &PotentialSolution, tau: f64) -> Result<Vec<Jet>> {
    flow.check_tau(tau)?;
    let ev = sol.on(flow)?;
    Ok((0..ev.points()).map(|p| ev.jet(tau, p)).collect())
}

fn assemble(flow: &FlowSolution, tau: f64, values: Vec<f64>) -> Result<ScalarField> {
    match flow.grid() {
        Some(grid) if values.len() == grid.len() && values.len() > 1 => {
            Ok(ScalarField::from_fn(tau, grid, |p| values[p]))
        }
        _ if values.len() == 1 => Ok(ScalarField::uniform(tau, flow.domain(tau), values[0])),
        _ => Err(Error::ShapeMismatch {
            expected: flow.grid().map_or(1, |g| g.len()),
            got: values.len(),
        }),
    }
}

/// Hat-Laplacian of a rotation-invariant function:
///
/// Δ̂h = (1/v)[(1 + (1+2τR)/N − 2(τR+τ²∂τR)/(N²v))∂τh + (2τ/N)∂²τh]
///      + Δh + τ⟨∇R,∇h⟩/(Nv).
pub fn hat_laplacian_scalar(
    input: &HatInput,
    flow: &FlowSolution,
    big_n: usize,
) -> Result<ScalarField> {
    let tau = input.tau;
    flow.check_tau(tau)?;
    let nb = big_n as f64;
    let r = flow.scalar_curvature_value(tau);
    let r_tau = flow.scalar_curvature_rate(tau);
    let v = 1.0 + 2.0 * tau * r / nb;
    let k = 1.0 + (1.0 + 2.0 * tau * r) / nb - 2.0 * (tau * r + tau * tau * r_tau) / (nb * nb * v);
    let values = (0..input.len())
        .map(|p| {
            (k * input.h_tau[p] + 2.0 * tau / nb * input.h_tautau[p]) / v
                + input.lap[p]
                + tau * input.grad_r_dot[p] / (nb * v)
        })
        .collect();
    assemble(flow, tau, values)
}

/// r^{m−2}h = (2N)^{−(m−2)/2}·τ^{−(m−2)/2}e^{−f}·r^{m−2} = e^{−f} as a
/// function of τ-derivatives: the r-power is absorbed into the derivative
/// formulas so the general operator can be applied to it.
pub fn scaled_h_input(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    big_n: usize,
) -> Result<HatInput> {
    let p = 0.5 * (big_n + flow.dim() - 1) as f64;
    let js = jets(flow, sol, tau)?;
    Ok(HatInput::from_jets(tau, &js, |j| {
        let e = (-j.f).exp();
        let q = p / tau + j.f_tau;
        [
            e,
            -q * e,
            e * (q * q + p / (tau * tau) - j.f_tautau),
            e * (j.grad_sq - j.lap),
        ]
    }))
}

/// b² = 2Nτe^{2f/(m−2)} with its derivatives.
pub fn b2_direct_input(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    big_n: usize,
) -> Result<HatInput> {
    let nb = big_n as f64;
    let beta = 2.0 / (big_n + flow.dim() - 1) as f64;
    let js = jets(flow, sol, tau)?;
    Ok(HatInput::from_jets(tau, &js, |j| {
        let e = 2.0 * nb * (beta * j.f).exp();
        let bf = beta * j.f_tau;
        [
            e * tau,
            e * (1.0 + tau * bf),
            e * (2.0 * bf + tau * bf * bf + tau * beta * j.f_tautau),
            e * tau * (beta * j.lap + beta * beta * j.grad_sq),
        ]
    }))
}

/// The scaled quantity E·e^{−f} = r^{m−2}Δ̂h, with h = r^{2−m}e^{−f}.
///
/// Writing p = (m−2)/2, q = p/τ + ∂τf and δ = q − N/(2τ), the O(N) parts of
/// the radial terms cancel analytically, leaving
/// E = (1/v)[−qκ + (2τ/N)(p/τ² − ∂²τf)] + |∇f|² − Δf,
/// κ = (1 + 2τR − 2τδ)/N − 2(τR + τ²∂τR)/(N²v).
/// R is spatially constant on both families so the ⟨∇R,∇f⟩ term is absent.
pub fn scaled_hat_laplacian_h(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    big_n: usize,
) -> Result<ScalarField> {
    let values = scaled_values(flow, sol, tau, big_n)?
        .into_iter()
        .map(|(e, j)| e * (-j.f).exp())
        .collect();
    assemble(flow, tau, values)
}

fn scaled_values(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    big_n: usize,
) -> Result<Vec<(f64, Jet)>> {
    let nb = big_n as f64;
    let n = flow.dim() as f64;
    let p = 0.5 * (nb + n - 1.0);
    let r = flow.scalar_curvature_value(tau);
    let r_tau = flow.scalar_curvature_rate(tau);
    let v = 1.0 + 2.0 * tau * r / nb;
    let tail = 2.0 * (tau * r + tau * tau * r_tau) / (nb * nb * v);
    Ok(jets(flow, sol, tau)?
        .into_iter()
        .map(|j| {
            let delta = 0.5 * (n - 1.0) / tau + j.f_tau;
            let q = 0.5 * nb / tau + delta;
            let kappa = (1.0 + 2.0 * tau * r - 2.0 * tau * delta) / nb - tail;
            let e = (-q * kappa + 2.0 * tau / nb * (p / (tau * tau) - j.f_tautau)) / v
                + j.grad_sq
                - j.lap;
            (e, j)
        })
        .collect())
}

/// sup|Δ̂b² − 2m|∇̂b|²| via Δ̂b² − 2m|∇̂b|² = (2/(2−m))·2Nτe^{mf/(m−2)}·r^{m−2}Δ̂h.
pub fn hat_laplacian_b2_residual(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    big_n: usize,
) -> Result<f64> {
    let m = (big_n + flow.dim() + 1) as f64;
    let scale = 4.0 * big_n as f64 * tau / (m - 2.0);
    Ok(scaled_values(flow, sol, tau, big_n)?
        .into_iter()
        .map(|(e, j)| (scale * (2.0 * j.f / (m - 2.0)).exp() * e).abs())
        .fold(0.0, f64::max))
}

/// Residual through the direct route: Δ̂ applied to b², minus 2m|∇̂b|².
/// Loses about log10(N) digits to cancellation; kept as a cross-check.
pub fn hat_laplacian_b2_direct_residual(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    big_n: usize,
) -> Result<f64> {
    let n = flow.dim();
    let m = (big_n + n + 1) as f64;
    let lap = hat_laplacian_scalar(&b2_direct_input(flow, sol, tau, big_n)?, flow, big_n)?;
    let r = flow.scalar_curvature_value(tau);
    let js = jets(flow, sol, tau)?;
    Ok(js
        .iter()
        .enumerate()
        .map(|(p, j)| {
            let g = 1.0 + grad_b_sq_minus_one(j, tau, r, big_n, n);
            (lap.at(p) - 2.0 * m * g).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
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

    fn pairs() -> Vec<(FlowSolution, PotentialSolution)> {
        vec![
            (t1(32), PotentialSolution::constant(0.0)),
            (
                FlowSolution::round_sphere(2, 0.0, 2.0, 0.1).unwrap(),
                PotentialSolution::constant(1.0 - 2f64.ln()),
            ),
            (
                FlowSolution::round_sphere(3, 1.0, 2.0, 0.1).unwrap(),
                PotentialSolution::constant(0.3),
            ),
            (t1(32), spectral()),
        ]
    }

    fn single(flow: &FlowSolution, tau: f64, h: f64, ht: f64, htt: f64, lap: f64) -> HatInput {
        let _ = flow;
        HatInput {
            tau,
            h: vec![h],
            h_tau: vec![ht],
            h_tautau: vec![htt],
            lap: vec![lap],
            grad_r_dot: vec![0.0],
        }
    }

    #[test]
    fn tau_independent_gives_spatial_laplacian() {
        let flow = t1(16);
        let out = hat_laplacian_scalar(&single(&flow, 0.7, 3.0, 0.0, 0.0, -1.25), &flow, 64).unwrap();
        assert_eq!(out.at(0), -1.25);
    }

    #[test]
    fn h_equal_tau_on_torus() {
        let flow = t1(16);
        for big_n in [8, 100, 4096] {
            let out = hat_laplacian_scalar(&single(&flow, 1.1, 1.1, 1.0, 0.0, 0.0), &flow, big_n)
                .unwrap();
            assert!((out.at(0) - (1.0 + 1.0 / big_n as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn frozen_zero_potential_limit() {
        let flow = t1(16);
        let sol = PotentialSolution::frozen(0.0);
        for big_n in [128, 1024, 16384] {
            let e = scaled_hat_laplacian_h(&flow, &sol, 1.0, big_n).unwrap().at(0);
            assert!((e - 0.5).abs() < 2.0 / big_n as f64, "N={big_n}: {e}");
        }
    }

    #[test]
    fn scaled_form_matches_general_operator() {
        for (flow, sol) in pairs() {
            for big_n in [8usize, 64, 512] {
                for tau in [0.3, 1.0, 1.7] {
                    let fast = scaled_hat_laplacian_h(&flow, &sol, tau, big_n).unwrap();
                    let general =
                        hat_laplacian_scalar(&scaled_h_input(&flow, &sol, tau, big_n).unwrap(), &flow, big_n)
                            .unwrap();
                    for p in 0..fast.len() {
                        // general route cancels O(N) terms
                        let tol = 1e-13 * (big_n as f64).powi(2);
                        assert!((fast.at(p) - general.at(p)).abs() < tol, "N={big_n} tau={tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn scaled_form_matches_unscaled_h_at_small_n() {
        // h = (2Nτ)^{−p}e^{−f} differentiated in τ by hand, then rescaled
        for (flow, sol) in pairs() {
            for big_n in [8usize, 16] {
                let tau = 0.9;
                let p = 0.5 * (big_n + flow.dim() - 1) as f64;
                let nb = big_n as f64;
                let ev = sol.on(&flow).unwrap();
                let js: Vec<Jet> = (0..ev.points()).map(|i| ev.jet(tau, i)).collect();
                let c = (2.0 * nb).powf(-p);
                let input = HatInput::from_jets(tau, &js, |j| {
                    let h = c * tau.powf(-p) * (-j.f).exp();
                    let d = -p / tau - j.f_tau;
                    [h, h * d, h * (d * d + p / (tau * tau) - j.f_tautau), h * (j.grad_sq - j.lap)]
                });
                let direct = hat_laplacian_scalar(&input, &flow, big_n).unwrap();
                let fast = scaled_hat_laplacian_h(&flow, &sol, tau, big_n).unwrap();
                let rescale = (2.0 * nb * tau).powf(p);
                for i in 0..fast.len() {
                    let want = direct.at(i) * rescale;
                    assert!((fast.at(i) - want).abs() < 1e-11 * want.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn exact_zero_for_harmonic_cases() {
        // h is exactly N-space harmonic for these two
        for (flow, sol) in pairs().into_iter().take(2) {
            for big_n in [128usize, 16384] {
                let e = scaled_hat_laplacian_h(&flow, &sol, 0.8, big_n).unwrap().max_abs();
                assert!(e < 1e-13, "{e}");
            }
        }
    }

    #[test]
    fn scaled_is_order_one_over_n() {
        let (flow, sol) = pairs().pop().unwrap();
        let ladder: Vec<(usize, f64)> = [1024usize, 2048, 4096, 8192, 16384]
            .iter()
            .map(|&n| (n, scaled_hat_laplacian_h(&flow, &sol, 1.0, n).unwrap().max_abs()))
            .collect();
        let fit = crate::asymptotics::fit_rate(&ladder, Some(0.0)).unwrap();
        assert!((fit.rate - 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn b2_residual_routes_agree() {
        for (flow, sol) in pairs() {
            for big_n in [16usize, 256, 4096] {
                let fast = hat_laplacian_b2_residual(&flow, &sol, 1.2, big_n).unwrap();
                let direct = hat_laplacian_b2_direct_residual(&flow, &sol, 1.2, big_n).unwrap();
                let tol = 1e-14 * (big_n as f64).powi(2) + 1e-7 * fast;
                assert!((fast - direct).abs() < tol, "N={big_n}: {fast} vs {direct}");
            }
        }
    }

    #[test]
    fn b2_residual_closed_form_for_constant_potential() {
        let flow = t1(16);
        let sol = PotentialSolution::frozen(0.4);
        let big_n = 200;
        let m = (big_n + 2) as f64;
        let tau = 1.3;
        let e = scaled_hat_laplacian_h(&flow, &sol, tau, big_n).unwrap().at(0);
        let want = (2.0 / (2.0 - m) * 2.0 * big_n as f64 * tau * (m * 0.4 / (m - 2.0)).exp() * e).abs();
        let got = hat_laplacian_b2_residual(&flow, &sol, tau, big_n).unwrap();
        assert!((got - want).abs() < 1e-13 * want);
    }

    #[test]
    fn b2_residual_halves_with_doubling() {
        let (flow, sol) = pairs().pop().unwrap();
        let a = hat_laplacian_b2_residual(&flow, &sol, 1.0, 4096).unwrap();
        let b = hat_laplacian_b2_residual(&flow, &sol, 1.0, 8192).unwrap();
        assert!((a / b - 2.0).abs() < 0.6);
    }
}
