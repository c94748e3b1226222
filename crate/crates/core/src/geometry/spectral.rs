//! Fourier differentiation on periodic tensor grids.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::Grid;

/// Forward or inverse FFT along every axis, in place.
fn transform(data: &mut [Complex64], grid: &Grid, inverse: bool) {
    let p = grid.points_per_dim();
    let n = grid.dim();
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(p)
    } else {
        planner.plan_fft_forward(p)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); p];
    for axis in 0..n {
        let stride = p.pow((n - 1 - axis) as u32);
        let block = stride * p;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, c) in line.iter_mut().enumerate() {
                    *c = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, c) in line.iter().enumerate() {
                    data[base + i * stride] = *c;
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / data.len() as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }
}

/// Signed integer frequency of FFT bin `i` on `p` points.
fn frequency(i: usize, p: usize) -> i64 {
    if i <= p / 2 {
        i as i64
    } else {
        i as i64 - p as i64
    }
}

/// Mixed partial derivative ∂^α of a real periodic field.
///
/// `alpha[axis]` is the derivative order along that axis. The Nyquist bin is
/// dropped for odd orders so the result stays real.
pub fn derivative(values: &[f64], grid: &Grid, alpha: &[usize]) -> Vec<f64> {
    debug_assert_eq!(alpha.len(), grid.dim());
    let p = grid.points_per_dim();
    let n = grid.dim();
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&mut data, grid, false);

    // per-axis multiplier tables
    let tables: Vec<Vec<Complex64>> = (0..n)
        .map(|axis| {
            (0..p)
                .map(|i| {
                    let order = alpha[axis];
                    if order == 0 {
                        return Complex64::new(1.0, 0.0);
                    }
                    if order % 2 == 1 && i == p / 2 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let k = grid.wavenumber(axis, frequency(i, p));
                    Complex64::new(0.0, k).powu(order as u32)
                })
                .collect()
        })
        .collect();

    for (flat, c) in data.iter_mut().enumerate() {
        let mut mult = Complex64::new(1.0, 0.0);
        for (axis, table) in tables.iter().enumerate() {
            if alpha[axis] == 0 {
                continue;
            }
            let stride = p.pow((n - 1 - axis) as u32);
            mult *= table[(flat / stride) % p];
        }
        *c *= mult;
    }
    transform(&mut data, grid, true);
    data.into_iter().map(|c| c.re).collect()
}

/// Partial derivative of order one along `axis`.
pub fn partial(values: &[f64], grid: &Grid, axis: usize) -> Vec<f64> {
    let mut alpha = vec![0; grid.dim()];
    alpha[axis] = 1;
    derivative(values, grid, &alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_derivatives_match_analytic() {
        let grid = Grid::new(1, 32, vec![3.0]).unwrap();
        for k in 1..15i64 {
            let kappa = grid.wavenumber(0, k);
            let f: Vec<f64> = (0..grid.len())
                .map(|p| (kappa * grid.coordinate(p, 0)).sin())
                .collect();
            let d1 = derivative(&f, &grid, &[1]);
            let d2 = derivative(&f, &grid, &[2]);
            for p in 0..grid.len() {
                let x = grid.coordinate(p, 0);
                let e1 = kappa * (kappa * x).cos();
                let e2 = -kappa * kappa * (kappa * x).sin();
                assert!((d1[p] - e1).abs() <= 1e-12 * kappa, "k={k}");
                assert!((d2[p] - e2).abs() <= 1e-12 * kappa * kappa, "k={k}");
            }
        }
    }

    #[test]
    fn mixed_partial_in_two_dims() {
        let grid = Grid::standard(2, 16).unwrap();
        let f: Vec<f64> = (0..grid.len())
            .map(|p| {
                let x = grid.coordinates(p);
                (2.0 * x[0]).sin() * (3.0 * x[1]).cos()
            })
            .collect();
        let dxy = derivative(&f, &grid, &[1, 1]);
        for (p, d) in dxy.iter().enumerate() {
            let x = grid.coordinates(p);
            let e = -6.0 * (2.0 * x[0]).cos() * (3.0 * x[1]).sin();
            assert!((d - e).abs() < 1e-12);
        }
        assert!((grid.periods()[0] - 2.0 * PI).abs() < 1e-15);
    }
}
