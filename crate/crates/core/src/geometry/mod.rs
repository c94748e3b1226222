//! Model manifolds under backward Ricci flow, their differential operators
//! and quadrature.
//!
//! Two representations are supported. Flat tori carry fields on a periodic
//! grid and are differentiated spectrally. Round spheres are homogeneous:
//! every field is spatially constant, so derivatives vanish and integrals
//! are value times total volume.

mod field;
mod flow;
mod grid;
pub mod spectral;

pub use field::{unit_sphere_area, Domain, FieldValues, ScalarField, TensorField, TensorValues};
pub use flow::{validate_backward_flow, FlowKind, FlowSolution, MetricFamily};
pub use grid::Grid;

use crate::error::{Error, Result};

fn grid_values(field: &ScalarField) -> Result<Option<(&Grid, Vec<f64>)>> {
    match (&field.domain, &field.values) {
        (_, FieldValues::Uniform(_)) => Ok(None),
        (Domain::Torus(g), FieldValues::Grid(v)) => Ok(Some((g, v.clone()))),
        (Domain::Sphere { .. }, FieldValues::Grid(_)) => Err(Error::UnsupportedRepresentation(
            "non-constant field on a round sphere",
        )),
    }
}

fn zero_like(field: &ScalarField) -> ScalarField {
    ScalarField::uniform(field.tau, field.domain.clone(), 0.0)
}

/// Δf for the flat metric, spectrally.
pub fn laplacian(field: &ScalarField) -> Result<ScalarField> {
    let Some((grid, values)) = grid_values(field)? else {
        return Ok(zero_like(field));
    };
    let n = grid.dim();
    let mut out = vec![0.0; values.len()];
    for axis in 0..n {
        let mut alpha = vec![0; n];
        alpha[axis] = 2;
        let d2 = spectral::derivative(&values, grid, &alpha);
        for (o, d) in out.iter_mut().zip(d2) {
            *o += d;
        }
    }
    Ok(ScalarField::from_fn(field.tau, grid, |p| out[p]))
}

/// Components ∂_i f, one vector per axis.
pub fn gradient(field: &ScalarField) -> Result<Vec<ScalarField>> {
    let n = field.domain.dim();
    let Some((grid, values)) = grid_values(field)? else {
        return Ok(vec![zero_like(field); n]);
    };
    Ok((0..n)
        .map(|axis| {
            let d = spectral::partial(&values, grid, axis);
            ScalarField::from_fn(field.tau, grid, |p| d[p])
        })
        .collect())
}

/// |∇f|² for the flat metric.
pub fn gradient_sq(field: &ScalarField) -> Result<ScalarField> {
    let Some((grid, values)) = grid_values(field)? else {
        return Ok(zero_like(field));
    };
    let mut out = vec![0.0; values.len()];
    for axis in 0..grid.dim() {
        let d = spectral::partial(&values, grid, axis);
        for (o, d) in out.iter_mut().zip(d) {
            *o += d * d;
        }
    }
    Ok(ScalarField::from_fn(field.tau, grid, |p| out[p]))
}

/// ∇∇f. Flat Christoffel symbols vanish, so this is the matrix of second
/// partials.
pub fn hessian(field: &ScalarField) -> Result<TensorField> {
    let Some((grid, values)) = grid_values(field)? else {
        let values = match &field.domain {
            Domain::Torus(g) => TensorValues::Grid(vec![0.0; g.len() * g.dim() * g.dim()]),
            Domain::Sphere { .. } => TensorValues::Homogeneous(0.0),
        };
        return Ok(TensorField {
            tau: field.tau,
            domain: field.domain.clone(),
            values,
        });
    };
    let n = grid.dim();
    let mut parts = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in i..n {
            let mut alpha = vec![0; n];
            alpha[i] += 1;
            alpha[j] += 1;
            parts[i * n + j] = spectral::derivative(&values, grid, &alpha);
        }
    }
    Ok(TensorField::from_components(field.tau, grid, |p, i, j| {
        parts[i * n + j][p]
    }))
}

/// ∫_M field dν(τ), τ taken from the field.
///
/// Periodic trapezoid rule on the torus; value × volume on the sphere.
pub fn integrate(field: &ScalarField) -> f64 {
    match (&field.domain, &field.values) {
        (Domain::Torus(g), FieldValues::Grid(v)) => v.iter().sum::<f64>() * g.cell_volume(),
        (domain, FieldValues::Uniform(c)) => c * domain.total_volume(),
        (Domain::Sphere { .. }, FieldValues::Grid(_)) => {
            unreachable!("rejected at construction")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn torus_field(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        ScalarField::from_fn(1.0, grid, |p| f(&grid.coordinates(p)))
    }

    #[test]
    fn cosine_is_an_eigenfunction() {
        let g = Grid::standard(1, 32).unwrap();
        let f = torus_field(&g, |x| x[0].cos());
        let lap = laplacian(&f).unwrap();
        for p in 0..g.len() {
            assert!((lap.at(p) + g.coordinate(p, 0).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_fields_have_zero_derivatives() {
        let g = Grid::standard(2, 8).unwrap();
        let c = ScalarField::uniform(1.0, Domain::Torus(g.clone()), 3.0);
        assert_eq!(laplacian(&c).unwrap().max_abs(), 0.0);
        assert_eq!(gradient_sq(&c).unwrap().max_abs(), 0.0);
        assert_eq!(hessian(&c).unwrap().norm_sq().max_abs(), 0.0);
        let s = ScalarField::uniform(1.0, Domain::Sphere { n: 2, scale: 2.0 }, 3.0);
        assert_eq!(laplacian(&s).unwrap().max_abs(), 0.0);
        assert_eq!(hessian(&s).unwrap().values, TensorValues::Homogeneous(0.0));
    }

    #[test]
    fn two_dim_laplacian_matches_finite_differences() {
        let g = Grid::standard(2, 32).unwrap();
        let exact = |x: f64, y: f64| x.cos() + (2.0 * y).sin();
        let f = torus_field(&g, |x| exact(x[0], x[1]));
        let lap = laplacian(&f).unwrap();
        // finite-difference oracle at three fixed grid points, h → 0 via Richardson
        for p in [3usize, 200, 777] {
            let (x, y) = (g.coordinate(p, 0), g.coordinate(p, 1));
            let fd = |h: f64| {
                (exact(x + h, y) + exact(x - h, y) + exact(x, y + h) + exact(x, y - h)
                    - 4.0 * exact(x, y))
                    / (h * h)
            };
            let oracle = (4.0 * fd(5e-3) - fd(1e-2)) / 3.0;
            assert!((lap.at(p) - oracle).abs() < 1e-7, "p={p}");
            assert!((lap.at(p) - (-x.cos() - 4.0 * (2.0 * y).sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::standard(1, 16).unwrap();
        let one = ScalarField::uniform(0.5, Domain::Torus(g.clone()), 1.0);
        assert!((integrate(&one) - 2.0 * PI).abs() < 1e-14);
        let cos = torus_field(&g, |x| x[0].cos());
        assert!(integrate(&cos).abs() < 1e-14);
        let sphere = FlowSolution::round_sphere(2, 0.0, 2.0, 0.1).unwrap();
        let one = ScalarField::uniform(1.0, sphere.domain(1.0), 1.0);
        assert!((integrate(&one) - 8.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn sphere_rejects_nonconstant_fields() {
        let d = Domain::Sphere { n: 2, scale: 1.0 };
        let f = ScalarField {
            tau: 1.0,
            domain: d,
            values: FieldValues::Grid(vec![1.0, 2.0]),
        };
        assert!(matches!(laplacian(&f), Err(Error::UnsupportedRepresentation(_))));
        assert!(matches!(hessian(&f), Err(Error::UnsupportedRepresentation(_))));
    }

    /// Gaussian curvature of a·(dθ² + sin²θ dφ²) from a finite difference of
    /// √G, compared to the constant-curvature formula.
    #[test]
    fn round_curvature_matches_finite_difference_metric() {
        for (n, a0, tau) in [(2usize, 0.0, 1.0), (3, 1.0, 0.5)] {
            let flow = FlowSolution::round_sphere(n, a0, 2.0, 0.1).unwrap();
            let a = flow.sphere_scale(tau);
            // warped product a(dr² + w(r)² g_{S^{n−1}}), w = sin
            let r0 = 0.9_f64;
            let h = 1e-4;
            let w = |r: f64| r.sin();
            let w2 = (w(r0 + h) - 2.0 * w(r0) + w(r0 - h)) / (h * h);
            let w1 = (w(r0 + h) - w(r0 - h)) / (2.0 * h);
            let k = (n - 1) as f64;
            let unit = -2.0 * k * w2 / w(r0) + k * (k - 1.0) * (1.0 - w1 * w1) / (w(r0) * w(r0));
            let fd = unit / a;
            let exact = flow.scalar_curvature_value(tau);
            assert!((fd - exact).abs() < 1e-6, "n={n}: {fd} vs {exact}");
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let g = Grid::standard(2, 16).unwrap();
        let f = torus_field(&g, |x| (x[0] + 2.0 * x[1]).sin() + (x[0]).cos() * (x[1]).cos());
        let h = hessian(&f).unwrap();
        for p in 0..g.len() {
            assert_eq!(h.component(p, 0, 1), h.component(p, 1, 0));
        }
    }

    fn band_limited(coeffs: &[(f64, i64, i64)]) -> impl Fn(&[f64]) -> f64 + '_ {
        move |x: &[f64]| {
            coeffs
                .iter()
                .map(|&(c, kx, ky)| c * (kx as f64 * x[0] + ky as f64 * x[1] + 0.3 * c).cos())
                .sum()
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn single_mode_spectral_derivative(k in 1i64..15, phase in 0.0f64..std::f64::consts::TAU) {
            let g = Grid::standard(1, 32).unwrap();
            let f = torus_field(&g, |x| (k as f64 * x[0] + phase).cos());
            let lap = laplacian(&f).unwrap();
            let kk = (k * k) as f64;
            for p in 0..g.len() {
                let e = -kk * (k as f64 * g.coordinate(p, 0) + phase).cos();
                prop_assert!((lap.at(p) - e).abs() <= 1e-12 * kk);
            }
        }

        #[test]
        fn product_rule_holds(
            a in prop::collection::vec((-1.0f64..1.0, -3i64..4, -3i64..4), 1..4),
            b in prop::collection::vec((-1.0f64..1.0, -3i64..4, -3i64..4), 1..4),
        ) {
            let g = Grid::standard(2, 32).unwrap();
            let phi = torus_field(&g, band_limited(&a));
            let psi = torus_field(&g, band_limited(&b));
            let prod = phi.zip_with(&psi, |x, y| x * y).unwrap();
            let sum = phi.zip_with(&psi, |x, y| x + y).unwrap();
            // ⟨∇φ,∇ψ⟩ by polarization
            let gs = gradient_sq(&sum).unwrap();
            let ga = gradient_sq(&phi).unwrap();
            let gb = gradient_sq(&psi).unwrap();
            let lhs = laplacian(&prod).unwrap();
            let lphi = laplacian(&phi).unwrap();
            let lpsi = laplacian(&psi).unwrap();
            for p in 0..g.len() {
                let inner = 0.5 * (gs.at(p) - ga.at(p) - gb.at(p));
                let rhs = phi.at(p) * lpsi.at(p) + psi.at(p) * lphi.at(p) + 2.0 * inner;
                prop_assert!((lhs.at(p) - rhs).abs() < 1e-10);
            }
        }

        #[test]
        fn integrate_is_linear_and_positive(
            a in prop::collection::vec((-1.0f64..1.0, -3i64..4, -3i64..4), 1..4),
            s in -3.0f64..3.0,
        ) {
            let g = Grid::standard(2, 16).unwrap();
            let phi = torus_field(&g, band_limited(&a));
            let sq = phi.map(|x| x * x);
            let lin = phi.zip_with(&sq, |x, y| s * x + y).unwrap();
            let lhs = integrate(&lin);
            let rhs = s * integrate(&phi) + integrate(&sq);
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
            prop_assert!(integrate(&sq) >= 0.0);
        }

        #[test]
        fn sphere_flow_residual_small(a0 in 0.0f64..3.0, n in 2usize..6, tau in 0.1f64..2.0) {
            let flow = FlowSolution::round_sphere(n, a0, 2.0, 0.1).unwrap();
            prop_assert!(validate_backward_flow(&flow, &[tau]).unwrap() <= 1e-8);
        }
    }
}
