use std::f64::consts::PI;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Where a field lives: a periodic grid, or a homogeneous round sphere
/// (where all supported fields are spatially constant).
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Torus(Grid),
    /// Round n-sphere with metric `scale · g_{S^n}`.
    Sphere { n: usize, scale: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Torus(g) => g.dim(),
            Domain::Sphere { n, .. } => *n,
        }
    }

    /// Riemannian volume of the whole manifold.
    pub fn total_volume(&self) -> f64 {
        match self {
            Domain::Torus(g) => g.total_volume(),
            Domain::Sphere { n, scale } => unit_sphere_area(*n) * scale.powf(*n as f64 / 2.0),
        }
    }
}

/// Area of the unit n-sphere in R^{n+1}, by the two-step recursion
/// |S^n| = 2π/(n−1)·|S^{n−2}|.
pub fn unit_sphere_area(n: usize) -> f64 {
    let (mut area, start) = if n.is_multiple_of(2) { (2.0, 0) } else { (2.0 * PI, 1) };
    let mut k = start;
    while k < n {
        k += 2;
        area *= 2.0 * PI / (k as f64 - 1.0);
    }
    area
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    /// One value per grid point.
    Grid(Vec<f64>),
    /// Spatially constant.
    Uniform(f64),
}

/// Real-valued samples at a fixed flow time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub tau: f64,
    pub domain: Domain,
    pub values: FieldValues,
}

impl ScalarField {
    pub fn new(tau: f64, domain: Domain, values: FieldValues) -> Result<Self> {
        match (&domain, &values) {
            (Domain::Torus(g), FieldValues::Grid(v)) if v.len() != g.len() => {
                return Err(Error::ShapeMismatch {
                    expected: g.len(),
                    got: v.len(),
                })
            }
            (Domain::Sphere { .. }, FieldValues::Grid(_)) => {
                return Err(Error::UnsupportedRepresentation(
                    "sphere fields must be spatially constant",
                ))
            }
            _ => {}
        }
        Ok(ScalarField {
            tau,
            domain,
            values,
        })
    }

    pub fn uniform(tau: f64, domain: Domain, value: f64) -> Self {
        ScalarField {
            tau,
            domain,
            values: FieldValues::Uniform(value),
        }
    }

    /// Field from a closure over grid point indices.
    pub fn from_fn(tau: f64, grid: &Grid, f: impl Fn(usize) -> f64) -> Self {
        ScalarField {
            tau,
            domain: Domain::Torus(grid.clone()),
            values: FieldValues::Grid((0..grid.len()).map(f).collect()),
        }
    }

    /// Number of stored points: grid size, or 1 for homogeneous fields.
    pub fn len(&self) -> usize {
        match &self.values {
            FieldValues::Grid(v) => v.len(),
            FieldValues::Uniform(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, point: usize) -> f64 {
        match &self.values {
            FieldValues::Grid(v) => v[point],
            FieldValues::Uniform(c) => *c,
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.values, FieldValues::Uniform(_))
    }

    /// Grid values, expanding a uniform field on a torus.
    pub fn to_vec(&self) -> Vec<f64> {
        match (&self.values, &self.domain) {
            (FieldValues::Grid(v), _) => v.clone(),
            (FieldValues::Uniform(c), Domain::Torus(g)) => vec![*c; g.len()],
            (FieldValues::Uniform(c), Domain::Sphere { .. }) => vec![*c],
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = match &self.values {
            FieldValues::Grid(v) => FieldValues::Grid(v.iter().map(|&x| f(x)).collect()),
            FieldValues::Uniform(c) => FieldValues::Uniform(f(*c)),
        };
        ScalarField {
            tau: self.tau,
            domain: self.domain.clone(),
            values,
        }
    }

    /// Pointwise combination of two fields on the same domain.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if std::mem::discriminant(&self.domain) != std::mem::discriminant(&other.domain) {
            return Err(Error::UnsupportedRepresentation("fields on different domains"));
        }
        let values = match (&self.values, &other.values) {
            (FieldValues::Uniform(a), FieldValues::Uniform(b)) => FieldValues::Uniform(f(*a, *b)),
            _ => {
                let a = self.to_vec();
                let b = other.to_vec();
                if a.len() != b.len() {
                    return Err(Error::ShapeMismatch {
                        expected: a.len(),
                        got: b.len(),
                    });
                }
                FieldValues::Grid(a.iter().zip(&b).map(|(&x, &y)| f(x, y)).collect())
            }
        };
        Ok(ScalarField {
            tau: self.tau,
            domain: self.domain.clone(),
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        match &self.values {
            FieldValues::Grid(v) => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            FieldValues::Uniform(c) => c.abs(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.values {
            FieldValues::Grid(v) => v.iter().all(|x| x.is_finite()),
            FieldValues::Uniform(c) => c.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorValues {
    /// Row-major n×n matrix per grid point, symmetric by construction.
    Grid(Vec<f64>),
    /// Multiple of the unit round metric g_{S^n}.
    Homogeneous(f64),
}

/// Symmetric 2-tensor samples at a fixed flow time.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub tau: f64,
    pub domain: Domain,
    pub values: TensorValues,
}

impl TensorField {
    /// Build a grid tensor from the upper triangle `(i <= j)` of each point.
    pub fn from_components(
        tau: f64,
        grid: &Grid,
        component: impl Fn(usize, usize, usize) -> f64,
    ) -> Self {
        let n = grid.dim();
        let mut values = vec![0.0; grid.len() * n * n];
        for p in 0..grid.len() {
            for i in 0..n {
                for j in i..n {
                    let c = component(p, i, j);
                    values[p * n * n + i * n + j] = c;
                    values[p * n * n + j * n + i] = c;
                }
            }
        }
        TensorField {
            tau,
            domain: Domain::Torus(grid.clone()),
            values: TensorValues::Grid(values),
        }
    }

    pub fn component(&self, point: usize, i: usize, j: usize) -> f64 {
        let n = self.domain.dim();
        match &self.values {
            TensorValues::Grid(v) => v[point * n * n + i * n + j],
            TensorValues::Homogeneous(c) => {
                if i == j {
                    *c
                } else {
                    0.0
                }
            }
        }
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &TensorField, b: f64) -> Result<Self> {
        let values = match (&self.values, &other.values) {
            (TensorValues::Grid(x), TensorValues::Grid(y)) if x.len() == y.len() => {
                TensorValues::Grid(x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            }
            (TensorValues::Homogeneous(x), TensorValues::Homogeneous(y)) => {
                TensorValues::Homogeneous(a * x + b * y)
            }
            _ => return Err(Error::UnsupportedRepresentation("incompatible tensor fields")),
        };
        Ok(TensorField {
            tau: self.tau,
            domain: self.domain.clone(),
            values,
        })
    }

    /// Squared norm g^{ik}g^{jl}S_{ij}S_{kl} under the metric of the field's
    /// domain (identity coefficients on the flat torus, `scale·g_{S^n}` on
    /// the sphere).
    pub fn norm_sq(&self) -> ScalarField {
        match (&self.values, &self.domain) {
            (TensorValues::Grid(v), Domain::Torus(g)) => {
                let nn = g.dim() * g.dim();
                ScalarField {
                    tau: self.tau,
                    domain: self.domain.clone(),
                    values: FieldValues::Grid(
                        v.chunks(nn).map(|m| m.iter().map(|x| x * x).sum()).collect(),
                    ),
                }
            }
            (TensorValues::Homogeneous(c), Domain::Sphere { n, scale }) => {
                ScalarField::uniform(self.tau, self.domain.clone(), c * c * *n as f64 / (scale * scale))
            }
            (TensorValues::Homogeneous(c), Domain::Torus(_)) => {
                // flat metric: the unit-sphere coefficient reads as a multiple of the identity
                ScalarField::uniform(self.tau, self.domain.clone(), c * c * self.domain.dim() as f64)
            }
            (TensorValues::Grid(_), Domain::Sphere { .. }) => {
                unreachable!("grid tensors only live on tori")
            }
        }
    }

    /// Largest component in a frame orthonormal for `metric`
    /// (which must be diagonal per point).
    pub fn frame_sup_norm(&self, metric: &TensorField) -> f64 {
        match (&self.values, &metric.values) {
            (TensorValues::Homogeneous(c), TensorValues::Homogeneous(a)) => (c / a).abs(),
            _ => {
                let n = self.domain.dim();
                let points = match &self.values {
                    TensorValues::Grid(v) => v.len() / (n * n),
                    TensorValues::Homogeneous(_) => 1,
                };
                let mut sup = 0.0_f64;
                for p in 0..points {
                    for i in 0..n {
                        for j in 0..n {
                            let scale = (metric.component(p, i, i) * metric.component(p, j, j)).sqrt();
                            sup = sup.max((self.component(p, i, j) / scale).abs());
                        }
                    }
                }
                sup
            }
        }
    }
}
