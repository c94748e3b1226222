//! Exact solutions f(τ, x) of ∂τf = Δf − |∇f|² + R − n/(2τ).
//!
//! f is related to the conjugate heat solution by u = τ^{−n/2} e^{−f}.
//! Every shipped family is closed form, so N-asymptotics are never mixed
//! with PDE discretization error.

use crate::error::{Error, Result};
use crate::geometry::{self, FlowKind, FlowSolution, Grid, ScalarField};

/// One cosine mode ε·cos(κ·x) of the torus heat solution, with κ the
/// physical wavevector of the integer mode `wave`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub amplitude: f64,
    pub wave: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSolution {
    /// Torus: f = c − (n/2) ln τ. Sphere: f = (n/2) ln(a(τ)/τ) + c.
    ConstantInSpace { c: f64 },
    /// f = −ln u − (n/2) ln τ with u = A + Σ ε_j cos(κ_j·x) e^{−d|κ_j|²τ}.
    ///
    /// `decay` is 1 for the genuine heat solution; other values give a
    /// tampered family that violates the evolution equation.
    TorusSpectral {
        base: f64,
        modes: Vec<Mode>,
        decay: f64,
    },
    /// f ≡ value for all τ. Not a solution; used as a control.
    Frozen { value: f64 },
}

/// f and the derivatives the N-space formulas consume, at one (τ, x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub f: f64,
    pub f_tau: f64,
    pub f_tautau: f64,
    pub grad_sq: f64,
    pub lap: f64,
}

impl PotentialSolution {
    pub fn constant(c: f64) -> Self {
        PotentialSolution::ConstantInSpace { c }
    }

    /// Heat-equation family. Positivity of u is certified by A > Σ|ε_j|.
    pub fn torus_spectral(base: f64, modes: Vec<Mode>) -> Result<Self> {
        Self::torus_spectral_with_decay(base, modes, 1.0)
    }

    pub fn torus_spectral_with_decay(base: f64, modes: Vec<Mode>, decay: f64) -> Result<Self> {
        let bound: f64 = modes.iter().map(|m| m.amplitude.abs()).sum();
        if !(base > bound) {
            return Err(Error::Positivity {
                amplitude: base,
                bound,
            });
        }
        if !(decay.is_finite() && decay >= 0.0) {
            return Err(Error::Configuration(format!("decay must be >= 0, got {decay}")));
        }
        Ok(PotentialSolution::TorusSpectral { base, modes, decay })
    }

    /// f ≡ 0 control.
    pub fn frozen(value: f64) -> Self {
        PotentialSolution::Frozen { value }
    }

    /// Bind the solution to a flow, precomputing the spatial tables.
    pub fn on<'a>(&'a self, flow: &'a FlowSolution) -> Result<PotentialEvaluator<'a>> {
        let tables = match (self, flow.kind()) {
            (PotentialSolution::TorusSpectral { modes, .. }, FlowKind::FlatTorus(grid)) => {
                Some(ModeTables::new(modes, grid)?)
            }
            (PotentialSolution::TorusSpectral { .. }, FlowKind::RoundSphere { .. }) => {
                return Err(Error::Configuration(
                    "torus_spectral potential requires a flat_torus flow".into(),
                ))
            }
            _ => None,
        };
        Ok(PotentialEvaluator {
            sol: self,
            flow,
            tables,
        })
    }
}

/// τ-independent per-point data of the cosine modes.
#[derive(Debug, Clone)]
struct ModeTables {
    /// |κ_j|²
    kappa_sq: Vec<f64>,
    /// κ_i·κ_j, row-major
    kappa_dot: Vec<f64>,
    /// cos(κ_j·x_p), indexed [p * modes + j]
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl ModeTables {
    fn new(modes: &[Mode], grid: &Grid) -> Result<Self> {
        let n = grid.dim();
        let kappas: Vec<Vec<f64>> = modes
            .iter()
            .map(|m| {
                if m.wave.len() != n {
                    return Err(Error::Configuration(format!(
                        "mode wave-vector has {} components, torus has dimension {n}",
                        m.wave.len()
                    )));
                }
                Ok((0..n).map(|a| grid.wavenumber(a, m.wave[a])).collect())
            })
            .collect::<Result<_>>()?;
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let m = modes.len();
        let mut kappa_dot = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                kappa_dot[i * m + j] = dot(&kappas[i], &kappas[j]);
            }
        }
        let mut cos = Vec::with_capacity(grid.len() * m);
        let mut sin = Vec::with_capacity(grid.len() * m);
        for p in 0..grid.len() {
            let x = grid.coordinates(p);
            for k in &kappas {
                let phase = dot(k, &x);
                cos.push(phase.cos());
                sin.push(phase.sin());
            }
        }
        Ok(ModeTables {
            kappa_sq: (0..m).map(|j| kappa_dot[j * m + j]).collect(),
            kappa_dot,
            cos,
            sin,
        })
    }
}

/// A potential bound to a flow; evaluates jets pointwise at any τ.
#[derive(Debug, Clone)]
pub struct PotentialEvaluator<'a> {
    sol: &'a PotentialSolution,
    flow: &'a FlowSolution,
    tables: Option<ModeTables>,
}

/// u and its derivatives for the torus family.
struct HeatJet {
    u: f64,
    u_tau: f64,
    u_tautau: f64,
    grad_sq: f64,
    lap: f64,
}

impl<'a> PotentialEvaluator<'a> {
    pub fn flow(&self) -> &FlowSolution {
        self.flow
    }

    pub fn solution(&self) -> &PotentialSolution {
        self.sol
    }

    /// True when f does not depend on x.
    pub fn is_uniform(&self) -> bool {
        self.tables.is_none()
    }

    /// Number of distinct evaluation points: the grid size, or 1 when f is
    /// spatially constant.
    pub fn points(&self) -> usize {
        match &self.tables {
            Some(t) => t.cos.len() / t.kappa_sq.len().max(1),
            None => 1,
        }
    }

    fn heat_jet(&self, tau: f64, point: usize) -> HeatJet {
        let PotentialSolution::TorusSpectral { base, modes, decay } = self.sol else {
            unreachable!("heat jets exist only for the torus family");
        };
        let t = self.tables.as_ref().expect("tables built for torus family");
        let m = modes.len();
        let row = point * m;
        let mut u = *base;
        let mut u_tau = 0.0;
        let mut u_tautau = 0.0;
        let mut lap = 0.0;
        let mut grad_sq = 0.0;
        for (j, mode) in modes.iter().enumerate() {
            let ksq = t.kappa_sq[j];
            let e = mode.amplitude * (-decay * ksq * tau).exp();
            let c = e * t.cos[row + j];
            u += c;
            u_tau -= decay * ksq * c;
            u_tautau += decay * decay * ksq * ksq * c;
            lap -= ksq * c;
            let sj = e * t.sin[row + j];
            for (i, mode_i) in modes.iter().enumerate() {
                let ei = mode_i.amplitude * (-decay * t.kappa_sq[i] * tau).exp();
                grad_sq += sj * ei * t.sin[row + i] * t.kappa_dot[i * m + j];
            }
        }
        HeatJet {
            u,
            u_tau,
            u_tautau,
            grad_sq,
            lap,
        }
    }

    /// f and derivatives at (τ, grid point). For spatially constant
    /// solutions `point` is ignored.
    pub fn jet(&self, tau: f64, point: usize) -> Jet {
        let n = self.flow.dim() as f64;
        match self.sol {
            PotentialSolution::Frozen { value } => Jet {
                f: *value,
                f_tau: 0.0,
                f_tautau: 0.0,
                grad_sq: 0.0,
                lap: 0.0,
            },
            PotentialSolution::ConstantInSpace { c } => match self.flow.kind() {
                FlowKind::FlatTorus(_) => Jet {
                    f: c - 0.5 * n * tau.ln(),
                    f_tau: -0.5 * n / tau,
                    f_tautau: 0.5 * n / (tau * tau),
                    grad_sq: 0.0,
                    lap: 0.0,
                },
                FlowKind::RoundSphere { .. } => {
                    let a = self.flow.sphere_scale(tau);
                    let rate = self.flow.sphere_scale_rate() / a;
                    Jet {
                        f: 0.5 * n * (a / tau).ln() + c,
                        f_tau: 0.5 * n * (rate - 1.0 / tau),
                        f_tautau: 0.5 * n * (1.0 / (tau * tau) - rate * rate),
                        grad_sq: 0.0,
                        lap: 0.0,
                    }
                }
            },
            PotentialSolution::TorusSpectral { .. } => {
                let h = self.heat_jet(tau, point);
                let q = h.u_tau / h.u;
                let g = h.grad_sq / (h.u * h.u);
                Jet {
                    f: -h.u.ln() - 0.5 * n * tau.ln(),
                    f_tau: -q - 0.5 * n / tau,
                    f_tautau: -h.u_tautau / h.u + q * q + 0.5 * n / (tau * tau),
                    grad_sq: g,
                    lap: -h.lap / h.u + g,
                }
            }
        }
    }

    fn field(&self, tau: f64, pick: impl Fn(&Jet) -> f64) -> ScalarField {
        let domain = self.flow.domain(tau);
        match (&self.tables, self.flow.grid()) {
            (Some(_), Some(grid)) => ScalarField::from_fn(tau, grid, |p| pick(&self.jet(tau, p))),
            _ => ScalarField::uniform(tau, domain, pick(&self.jet(tau, 0))),
        }
    }

    pub fn f_at(&self, tau: f64) -> Result<ScalarField> {
        self.flow.check_tau(tau)?;
        Ok(self.field(tau, |j| j.f))
    }

    pub fn df_dtau(&self, tau: f64) -> Result<ScalarField> {
        self.flow.check_tau(tau)?;
        Ok(self.field(tau, |j| j.f_tau))
    }

    /// The torus heat solution u(τ, x) = A + Σ ε cos(κ·x) e^{−d|κ|²τ}.
    pub fn heat_solution(&self, tau: f64) -> Result<(ScalarField, ScalarField)> {
        let grid = match (&self.tables, self.flow.grid()) {
            (Some(_), Some(g)) => g,
            _ => {
                return Err(Error::UnsupportedRepresentation(
                    "heat solution only defined for torus_spectral",
                ))
            }
        };
        self.flow.check_tau(tau)?;
        let jets: Vec<HeatJet> = (0..grid.len()).map(|p| self.heat_jet(tau, p)).collect();
        Ok((
            ScalarField::from_fn(tau, grid, |p| jets[p].u),
            ScalarField::from_fn(tau, grid, |p| jets[p].u_tau),
        ))
    }

    /// sup over τ samples and grid of |∂τf − (Δf − |∇f|² + R − n/(2τ))|,
    /// with the spatial operators taken spectrally from the sampled f.
    pub fn bachcho_residual(&self, tau_samples: &[f64]) -> Result<f64> {
        let n = self.flow.dim() as f64;
        let mut worst = 0.0_f64;
        for &tau in tau_samples {
            let f = self.f_at(tau)?;
            let f_tau = self.df_dtau(tau)?;
            let lap = geometry::laplacian(&f)?;
            let grad_sq = geometry::gradient_sq(&f)?;
            let r = self.flow.scalar_curvature_value(tau);
            for p in 0..f.len() {
                let rhs = lap.at(p) - grad_sq.at(p) + r - 0.5 * n / tau;
                worst = worst.max((f_tau.at(p) - rhs).abs());
            }
        }
        Ok(worst)
    }
}

/// u = τ^{−n/2} e^{−f}.
pub fn u_from_f(f: f64, tau: f64, n: usize) -> f64 {
    (-f - 0.5 * n as f64 * tau.ln()).exp()
}

/// f = −ln u − (n/2) ln τ.
pub fn f_from_u(u: f64, tau: f64, n: usize) -> f64 {
    -u.ln() - 0.5 * n as f64 * tau.ln()
}
