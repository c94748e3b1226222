use crate::error::Result;
use crate::geometry::{FlowSolution, ScalarField};
use crate::potential::{Jet, PotentialSolution};

/// |∇̂b|² − 1 at one (τ, x), arranged so no O(1) terms cancel:
///
/// |∇̂b|² = e^{βf}(1 + τβ∂τf)²/v + 2Nτ e^{βf}|∇f|²/(m−2)², β = 2/(m−2),
/// using r∂_r f = 2τ∂τf.
pub fn grad_b_sq_minus_one(jet: &Jet, tau: f64, r: f64, big_n: usize, n: usize) -> f64 {
    let nb = big_n as f64;
    let d = (big_n + n - 1) as f64;
    let beta = 2.0 / d;
    let shift = 2.0 * tau * r / nb;
    let v = 1.0 + shift;
    let t = tau * beta * jet.f_tau;
    let radial = ((beta * jet.f).exp_m1() * (1.0 + t) * (1.0 + t) + t * (2.0 + t) - shift) / v;
    let spatial = 2.0 * nb * tau * (beta * jet.f).exp() * jet.grad_sq / (d * d);
    radial + spatial
}

fn pointwise(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    value: impl Fn(&Jet, f64) -> f64,
) -> Result<ScalarField> {
    flow.check_tau(tau)?;
    let ev = sol.on(flow)?;
    let r = flow.scalar_curvature_value(tau);
    Ok(match flow.grid() {
        Some(grid) if !ev.is_uniform() => {
            ScalarField::from_fn(tau, grid, |p| value(&ev.jet(tau, p), r))
        }
        _ => ScalarField::uniform(tau, flow.domain(tau), value(&ev.jet(tau, 0), r)),
    })
}

/// v = 1 + 2τR/N.
pub fn v_coeff(flow: &FlowSolution, tau: f64, big_n: usize) -> Result<ScalarField> {
    flow.check_tau(tau)?;
    let r = flow.scalar_curvature_value(tau);
    Ok(ScalarField::uniform(
        tau,
        flow.domain(tau),
        1.0 + 2.0 * tau * r / big_n as f64,
    ))
}

/// |∇̂b|² over M at fixed τ.
pub fn grad_b_sq_exact(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
    big_n: usize,
) -> Result<ScalarField> {
    let n = flow.dim();
    pointwise(flow, sol, tau, |j, r| {
        1.0 + grad_b_sq_minus_one(j, tau, r, big_n, n)
    })
}

/// Leading coefficient L = τ(2Δf − |∇f|² + R) + f − n of
/// (N/2)(|∇̂b|² − 1).
pub fn grad_b_sq_leading(
    flow: &FlowSolution,
    sol: &PotentialSolution,
    tau: f64,
) -> Result<ScalarField> {
    let n = flow.dim() as f64;
    pointwise(flow, sol, tau, |j, r| {
        tau * (2.0 * j.lap - j.grad_sq + r) + j.f - n
    })
}

/// ln h = (2 − m) ln r − f.
pub fn ln_h(r: f64, f: f64, m: usize) -> f64 {
    (2.0 - m as f64) * r.ln() - f
}

/// ln b = ln r + f/(m − 2).
pub fn ln_b(r: f64, f: f64, m: usize) -> f64 {
    r.ln() + f / (m as f64 - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;
    use crate::potential::Mode;
    use proptest::prelude::*;

    fn t1() -> FlowSolution {
        FlowSolution::flat_torus(Grid::standard(1, 64).unwrap(), 2.0, 0.1).unwrap()
    }

    fn soliton() -> FlowSolution {
        FlowSolution::round_sphere(2, 0.0, 2.0, 0.1).unwrap()
    }

    fn f_one() -> PotentialSolution {
        PotentialSolution::constant(1.0 - 2f64.ln())
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

    /// Direct transcription of the |∇̂b|² formula, no rearrangement.
    fn naive(j: &Jet, tau: f64, r: f64, big_n: usize, n: usize) -> f64 {
        let nb = big_n as f64;
        let d = (big_n + n - 1) as f64;
        let v = 1.0 + 2.0 * tau * r / nb;
        let e = (2.0 * j.f / d).exp();
        e / v * (1.0 + 2.0 * tau * j.f_tau / d).powi(2) + 2.0 * nb * tau * e * j.grad_sq / (d * d)
    }

    #[test]
    fn v_coeff_examples() {
        assert_eq!(v_coeff(&t1(), 1.0, 100).unwrap().at(0), 1.0);
        assert!((v_coeff(&soliton(), 0.7, 100).unwrap().at(0) - 1.02).abs() < 1e-15);
        let s3 = FlowSolution::round_sphere(3, 1.0, 2.0, 0.1).unwrap();
        assert!((v_coeff(&s3, 0.5, 10).unwrap().at(0) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn grad_b_sq_examples() {
        let frozen = PotentialSolution::frozen(0.0);
        assert_eq!(grad_b_sq_exact(&t1(), &frozen, 1.0, 100).unwrap().at(0), 1.0);
        let c0 = PotentialSolution::constant(0.0);
        let g = grad_b_sq_exact(&t1(), &c0, 1.0, 100).unwrap().at(0);
        assert!((g - 0.9801).abs() < 1e-15);
        let g = grad_b_sq_exact(&soliton(), &f_one(), 1.0, 100).unwrap().at(0);
        let expected = (2.0f64 / 101.0).exp() / 1.02;
        assert!((g - expected).abs() < 1e-15);
    }

    #[test]
    fn leading_coefficient_examples() {
        let c0 = PotentialSolution::constant(0.0);
        assert_eq!(grad_b_sq_leading(&t1(), &c0, 1.0).unwrap().at(0), -1.0);
        assert!(grad_b_sq_leading(&soliton(), &f_one(), 1.3).unwrap().at(0).abs() < 1e-15);
    }

    #[test]
    fn leading_order_is_first_order_accurate() {
        let flow = t1();
        let sol = spectral();
        let lead = grad_b_sq_leading(&flow, &sol, 1.0).unwrap();
        let ladder: Vec<(usize, f64)> = crate::asymptotics::default_ladder()
            .into_iter()
            .map(|big_n| {
                let g = grad_b_sq_exact(&flow, &sol, 1.0, big_n).unwrap();
                let sup = (0..g.len())
                    .map(|p| (0.5 * big_n as f64 * (g.at(p) - 1.0) - lead.at(p)).abs())
                    .fold(0.0, f64::max);
                (big_n, sup)
            })
            .collect();
        let fit = crate::asymptotics::fit_rate(&ladder, Some(0.0)).unwrap();
        assert!(fit.rate >= 0.9, "{fit:?}");
    }

    #[test]
    fn b_from_h_identity() {
        for (big_n, n) in [(8usize, 1usize), (1000, 2), (16384, 3)] {
            let m = big_n + n + 1;
            for (r, f) in [(3.0, 0.4), (150.0, -1.2), (0.5, 2.0)] {
                let from_h = ln_h(r, f, m) / (2.0 - m as f64);
                let direct = ln_b(r, f, m);
                assert!((from_h - direct).abs() <= 1e-13 * direct.abs().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn rearranged_form_matches_naive(
            f in -3.0f64..3.0, f_tau in -5.0f64..5.0, grad_sq in 0.0f64..4.0,
            tau in 0.1f64..2.0, r in 0.0f64..3.0, big_n in 8usize..200,
        ) {
            let j = Jet { f, f_tau, f_tautau: 0.0, grad_sq, lap: 0.0 };
            let a = 1.0 + grad_b_sq_minus_one(&j, tau, r, big_n, 2);
            let b = naive(&j, tau, r, big_n, 2);
            prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
        }
    }
}
