use super::field::{Domain, ScalarField, TensorField, TensorValues};
use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind {
    /// Flat metric with identity coefficients; Ric = 0 so the flow is static.
    FlatTorus(Grid),
    /// g(τ) = a(τ)·g_{S^n} with a(τ) = a0 + 2(n−1)τ.
    RoundSphere { a0: f64 },
}

/// Closed-form solution of ∂τg = 2Ric on `[tau_min, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    kind: FlowKind,
    n: usize,
    horizon: f64,
    tau_min: f64,
}

/// Anything that can be checked against ∂τg = 2Ric.
pub trait MetricFamily {
    fn tau_range(&self) -> (f64, f64);
    /// Metric without range checks (validators step slightly past the ends).
    fn metric_unchecked(&self, tau: f64) -> TensorField;
    fn ricci_unchecked(&self, tau: f64) -> TensorField;
}

impl FlowSolution {
    pub fn flat_torus(grid: Grid, horizon: f64, tau_min: f64) -> Result<Self> {
        let n = grid.dim();
        Self::checked(FlowKind::FlatTorus(grid), n, horizon, tau_min)
    }

    pub fn round_sphere(n: usize, a0: f64, horizon: f64, tau_min: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Configuration("sphere dimension must be >= 1".into()));
        }
        if !(a0 >= 0.0) {
            return Err(Error::Configuration(format!("sphere_a0 must be >= 0, got {a0}")));
        }
        Self::checked(FlowKind::RoundSphere { a0 }, n, horizon, tau_min)
    }

    fn checked(kind: FlowKind, n: usize, horizon: f64, tau_min: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Configuration(format!("horizon T must be positive, got {horizon}")));
        }
        if !(tau_min > 0.0 && tau_min < horizon) {
            return Err(Error::Configuration(format!(
                "tau_min must lie in (0, T), got {tau_min}"
            )));
        }
        let flow = FlowSolution {
            kind,
            n,
            horizon,
            tau_min,
        };
        if let FlowKind::RoundSphere { .. } = flow.kind {
            if flow.sphere_scale(tau_min) <= 0.0 {
                return Err(Error::Configuration(
                    "sphere metric degenerate at tau_min (a0 = 0 with n = 1?)".into(),
                ));
            }
        }
        Ok(flow)
    }

    pub fn kind(&self) -> &FlowKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.kind {
            FlowKind::FlatTorus(g) => Some(g),
            FlowKind::RoundSphere { .. } => None,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, FlowKind::FlatTorus(_))
    }

    pub fn check_tau(&self, tau: f64) -> Result<()> {
        if tau.is_finite() && tau >= self.tau_min && tau <= self.horizon {
            Ok(())
        } else {
            Err(Error::Range {
                what: "tau",
                value: tau,
                lo: self.tau_min,
                hi: self.horizon,
            })
        }
    }

    /// a(τ) for the sphere, 1 for the torus.
    pub fn sphere_scale(&self, tau: f64) -> f64 {
        match self.kind {
            FlowKind::FlatTorus(_) => 1.0,
            FlowKind::RoundSphere { a0 } => a0 + 2.0 * (self.n as f64 - 1.0) * tau,
        }
    }

    /// da/dτ (zero on the torus).
    pub fn sphere_scale_rate(&self) -> f64 {
        match self.kind {
            FlowKind::FlatTorus(_) => 0.0,
            FlowKind::RoundSphere { .. } => 2.0 * (self.n as f64 - 1.0),
        }
    }

    /// R(τ); spatially constant for both families.
    pub fn scalar_curvature_value(&self, tau: f64) -> f64 {
        match self.kind {
            FlowKind::FlatTorus(_) => 0.0,
            FlowKind::RoundSphere { .. } => {
                let n = self.n as f64;
                n * (n - 1.0) / self.sphere_scale(tau)
            }
        }
    }

    /// ∂τR(τ).
    pub fn scalar_curvature_rate(&self, tau: f64) -> f64 {
        match self.kind {
            FlowKind::FlatTorus(_) => 0.0,
            FlowKind::RoundSphere { .. } => {
                let n = self.n as f64;
                let a = self.sphere_scale(tau);
                -n * (n - 1.0) * self.sphere_scale_rate() / (a * a)
            }
        }
    }

    pub fn domain(&self, tau: f64) -> Domain {
        match &self.kind {
            FlowKind::FlatTorus(g) => Domain::Torus(g.clone()),
            FlowKind::RoundSphere { .. } => Domain::Sphere {
                n: self.n,
                scale: self.sphere_scale(tau),
            },
        }
    }

    pub fn metric_at(&self, tau: f64) -> Result<TensorField> {
        self.check_tau(tau)?;
        Ok(self.metric_unchecked(tau))
    }

    pub fn ricci_at(&self, tau: f64) -> Result<TensorField> {
        self.check_tau(tau)?;
        Ok(self.ricci_unchecked(tau))
    }

    pub fn scalar_curvature(&self, tau: f64) -> Result<ScalarField> {
        self.check_tau(tau)?;
        Ok(ScalarField::uniform(
            tau,
            self.domain(tau),
            self.scalar_curvature_value(tau),
        ))
    }
}

impl MetricFamily for FlowSolution {
    fn tau_range(&self) -> (f64, f64) {
        (self.tau_min, self.horizon)
    }

    fn metric_unchecked(&self, tau: f64) -> TensorField {
        match &self.kind {
            FlowKind::FlatTorus(g) => {
                TensorField::from_components(tau, g, |_, i, j| if i == j { 1.0 } else { 0.0 })
            }
            FlowKind::RoundSphere { .. } => TensorField {
                tau,
                domain: self.domain(tau),
                values: TensorValues::Homogeneous(self.sphere_scale(tau)),
            },
        }
    }

    fn ricci_unchecked(&self, tau: f64) -> TensorField {
        match &self.kind {
            FlowKind::FlatTorus(g) => TensorField::from_components(tau, g, |_, _, _| 0.0),
            // Ric of a·g_{S^n} is (n−1)·g_{S^n}, independent of a
            FlowKind::RoundSphere { .. } => TensorField {
                tau,
                domain: self.domain(tau),
                values: TensorValues::Homogeneous(self.n as f64 - 1.0),
            },
        }
    }
}

/// Sup-norm of ∂τg − 2Ric over `tau_samples`, with ∂τg from a centered
/// difference of step 1e−5·τ. Components are measured in a g(τ)-orthonormal
/// frame.
pub fn validate_backward_flow<F: MetricFamily>(flow: &F, tau_samples: &[f64]) -> Result<f64> {
    let (lo, hi) = flow.tau_range();
    let mut worst = 0.0_f64;
    for &tau in tau_samples {
        if !(tau >= lo && tau <= hi) {
            return Err(Error::Range {
                what: "tau",
                value: tau,
                lo,
                hi,
            });
        }
        let h = 1e-5 * tau;
        let plus = flow.metric_unchecked(tau + h);
        let minus = flow.metric_unchecked(tau - h);
        let dg = plus.combine(1.0 / (2.0 * h), &minus, -1.0 / (2.0 * h))?;
        let defect = dg.combine(1.0, &flow.ricci_unchecked(tau), -2.0)?;
        worst = worst.max(defect.frame_sup_norm(&flow.metric_unchecked(tau)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(n: usize, a0: f64) -> FlowSolution {
        FlowSolution::round_sphere(n, a0, 2.0, 0.1).unwrap()
    }

    #[test]
    fn sphere_scale_examples() {
        assert_eq!(sphere(2, 0.0).sphere_scale(1.0), 2.0);
        assert_eq!(sphere(3, 1.0).sphere_scale(0.5), 3.0);
    }

    #[test]
    fn scalar_curvature_examples() {
        // n(n−1)/a with a = 2
        assert!((sphere(2, 0.0).scalar_curvature(1.0).unwrap().at(0) - 1.0).abs() < 1e-15);
        assert!((sphere(3, 1.0).scalar_curvature(0.5).unwrap().at(0) - 2.0).abs() < 1e-15);
        let torus = FlowSolution::flat_torus(Grid::standard(1, 16).unwrap(), 2.0, 0.1).unwrap();
        assert_eq!(torus.scalar_curvature(1.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn flat_metric_is_static() {
        let torus = FlowSolution::flat_torus(Grid::standard(2, 8).unwrap(), 2.0, 0.1).unwrap();
        assert_eq!(torus.metric_at(0.3).unwrap().values, torus.metric_at(1.7).unwrap().values);
        assert_eq!(torus.metric_at(0.3).unwrap().component(5, 1, 1), 1.0);
        assert_eq!(torus.metric_at(0.3).unwrap().component(5, 0, 1), 0.0);
    }

    #[test]
    fn out_of_range_tau_is_rejected() {
        let s = sphere(2, 0.0);
        assert!(matches!(s.metric_at(2.5), Err(Error::Range { .. })));
        assert!(matches!(s.scalar_curvature(0.05), Err(Error::Range { .. })));
    }

    #[test]
    fn degenerate_circle_rejected() {
        assert!(FlowSolution::round_sphere(1, 0.0, 2.0, 0.1).is_err());
        assert!(FlowSolution::round_sphere(1, 1.0, 2.0, 0.1).is_ok());
    }

    #[test]
    fn backward_flow_residuals() {
        let torus = FlowSolution::flat_torus(Grid::standard(1, 16).unwrap(), 2.0, 0.1).unwrap();
        assert!(validate_backward_flow(&torus, &[0.1, 1.0, 2.0]).unwrap() <= 1e-12);
        for (n, a0) in [(2, 0.0), (3, 1.0), (4, 0.3)] {
            let r = validate_backward_flow(&sphere(n, a0), &[0.1, 0.7, 1.3, 2.0]).unwrap();
            assert!(r <= 1e-8, "n={n} residual {r}");
        }
    }

    /// Round metric frozen at a fixed scale: Ric ≠ 0 but ∂τg = 0.
    struct FrozenSphere {
        n: usize,
        a: f64,
    }

    impl MetricFamily for FrozenSphere {
        fn tau_range(&self) -> (f64, f64) {
            (0.1, 2.0)
        }
        fn metric_unchecked(&self, tau: f64) -> TensorField {
            TensorField {
                tau,
                domain: Domain::Sphere { n: self.n, scale: self.a },
                values: TensorValues::Homogeneous(self.a),
            }
        }
        fn ricci_unchecked(&self, tau: f64) -> TensorField {
            TensorField {
                tau,
                domain: Domain::Sphere { n: self.n, scale: self.a },
                values: TensorValues::Homogeneous(self.n as f64 - 1.0),
            }
        }
    }

    #[test]
    fn tampered_flow_has_residual() {
        for (n, a) in [(2, 1.5), (3, 4.0)] {
            let r = validate_backward_flow(&FrozenSphere { n, a }, &[0.5, 1.0]).unwrap();
            let expected = 2.0 * (n as f64 - 1.0) / a;
            assert!((r - expected).abs() < 1e-12, "{r} vs {expected}");
        }
    }
}
