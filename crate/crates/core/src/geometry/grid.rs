use crate::error::{Error, Result};

/// Uniform periodic tensor grid on a flat torus.
///
/// Points are stored row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    points_per_dim: usize,
    periods: Vec<f64>,
}

impl Grid {
    pub fn new(n: usize, points_per_dim: usize, periods: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Configuration("grid dimension must be >= 1".into()));
        }
        if points_per_dim < 8 || !points_per_dim.is_multiple_of(2) {
            return Err(Error::Configuration(format!(
                "points_per_dim must be even and >= 8, got {points_per_dim}"
            )));
        }
        if periods.len() != n {
            return Err(Error::Configuration(format!(
                "expected {n} periods, got {}",
                periods.len()
            )));
        }
        if periods.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Configuration("periods must be positive".into()));
        }
        Ok(Grid {
            n,
            points_per_dim,
            periods,
        })
    }

    /// The standard torus with every period equal to 2π.
    pub fn standard(n: usize, points_per_dim: usize) -> Result<Self> {
        Self::new(n, points_per_dim, vec![2.0 * std::f64::consts::PI; n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.points_per_dim.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.points_per_dim as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.n).map(|a| self.spacing(a)).product()
    }

    pub fn total_volume(&self) -> f64 {
        self.periods.iter().product()
    }

    /// Coordinate of `point` along `axis`.
    pub fn coordinate(&self, point: usize, axis: usize) -> f64 {
        let stride = self.points_per_dim.pow((self.n - 1 - axis) as u32);
        let idx = (point / stride) % self.points_per_dim;
        idx as f64 * self.spacing(axis)
    }

    pub fn coordinates(&self, point: usize) -> Vec<f64> {
        (0..self.n).map(|a| self.coordinate(point, a)).collect()
    }

    /// Physical wavenumber 2πk/L of an integer mode along `axis`.
    pub fn wavenumber(&self, axis: usize, k: i64) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.periods[axis]
    }

    /// Grid with the same periods and a different resolution.
    pub fn with_resolution(&self, points_per_dim: usize) -> Result<Self> {
        Self::new(self.n, points_per_dim, self.periods.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_small_resolution() {
        assert!(Grid::standard(1, 7).is_err());
        assert!(Grid::standard(1, 9).is_err());
        assert!(Grid::standard(1, 6).is_err());
        assert!(Grid::standard(2, 16).is_ok());
    }

    #[test]
    fn coordinates_are_row_major() {
        let g = Grid::new(2, 8, vec![8.0, 16.0]).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.coordinates(0), vec![0.0, 0.0]);
        assert_eq!(g.coordinates(1), vec![0.0, 2.0]);
        assert_eq!(g.coordinates(8), vec![1.0, 0.0]);
        assert_eq!(g.cell_volume(), 2.0);
        assert_eq!(g.total_volume(), 128.0);
    }
}
