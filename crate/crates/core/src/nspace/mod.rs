//! Perelman's N-space (0, √(2NT)) × S^N × M with metric
//! ĝ = r²g_{S^N} + (1 + Rr²/N²)dr² + g, the almost-Green function
//! h = r^{2−m}e^{−f}, the distance-like b = h^{1/(2−m)} = r·e^{f/(m−2)},
//! and Colding's area, volume and monotonic volume on the level sets of b.
//!
//! Every quantity is rotation invariant, so the S^N factor is integrated
//! out analytically. Powers of r, s, b or φ/λ with exponents of order N are
//! only ever formed in log space.

mod colding;
mod gradient;
mod laplacian;
mod level_set;
pub mod quadrature;

pub use colding::{
    area_a_n, area_a_n_literal, area_pair, colding_sample, dwn_dlambda, monotonic_w_n, raw_area, volume_v_n,
    AreaPair, ColdingSample, ColdingSampler, VolumeEstimate, LITERAL_MAX_N, TAIL_CAP, XI_FLOOR,
};
pub use gradient::{
    grad_b_sq_exact, grad_b_sq_leading, grad_b_sq_minus_one, ln_b, ln_h, v_coeff,
};
pub use laplacian::{
    b2_direct_input, hat_laplacian_b2_direct_residual, hat_laplacian_b2_residual, hat_laplacian_scalar, scaled_h_input,
    scaled_hat_laplacian_h, HatInput,
};
pub use level_set::{level_set_solve, LevelSet, LevelSetSolver};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest N the toolkit accepts.
pub const MIN_N: usize = 8;

/// Fixed data of one (N, λ) evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NSpaceContext {
    pub big_n: usize,
    /// Dimension n of M.
    pub n: usize,
    /// m = N + n + 1, the dimension of the N-space.
    pub m: usize,
    pub lambda: f64,
    /// s = √(2Nλ).
    pub s: f64,
    /// Lower end of the volume integral in flow time.
    pub lambda0: f64,
    /// ln(c_N·|S^N|) = ln((4π)^{−n/2}(2N)^{n/2+1}/4).
    pub log_prefactor: f64,
}

impl NSpaceContext {
    /// Context with λ0 = λ/2.
    pub fn new(big_n: usize, n: usize, lambda: f64) -> Result<Self> {
        Self::with_lambda0(big_n, n, lambda, 0.5 * lambda)
    }

    pub fn with_lambda0(big_n: usize, n: usize, lambda: f64, lambda0: f64) -> Result<Self> {
        if big_n < MIN_N {
            return Err(Error::Configuration(format!("N must be >= {MIN_N}, got {big_n}")));
        }
        if n == 0 {
            return Err(Error::Configuration("n must be >= 1".into()));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Configuration(format!("lambda must be positive, got {lambda}")));
        }
        if !(lambda0 > 0.0 && lambda0 < lambda) {
            return Err(Error::Configuration(format!(
                "lambda0 must lie in (0, lambda), got {lambda0}"
            )));
        }
        let nb = big_n as f64;
        let nf = n as f64;
        Ok(NSpaceContext {
            big_n,
            n,
            m: big_n + n + 1,
            lambda,
            s: (2.0 * nb * lambda).sqrt(),
            lambda0,
            log_prefactor: -0.5 * nf * (4.0 * PI).ln() + (0.5 * nf + 1.0) * (2.0 * nb).ln()
                - 4f64.ln(),
        })
    }

    /// Same N and λ0/λ ratio at another λ.
    pub fn at_lambda(&self, lambda: f64) -> Result<Self> {
        Self::with_lambda0(self.big_n, self.n, lambda, lambda * self.lambda0 / self.lambda)
    }

    /// s̄ = √(2Nλ0).
    pub fn s_bar(&self) -> f64 {
        (2.0 * self.big_n as f64 * self.lambda0).sqrt()
    }

    /// c_N·|S^N| / s^{m−1} · (2Nλ)^{N/2}, which reduces to (N/2)(4πλ)^{−n/2}.
    pub fn area_prefactor(&self) -> f64 {
        0.5 * self.big_n as f64 * (4.0 * PI * self.lambda).powf(-0.5 * self.n as f64)
    }
}
