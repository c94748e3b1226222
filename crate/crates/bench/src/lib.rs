//! Fixtures shared by the benchmarks.

use colding::{FlowSolution, Grid, Mode, PotentialSolution};

/// Flat T¹ of period 2π on `points` grid points, τ ∈ [0.1, 2].
pub fn torus(points: usize) -> FlowSolution {
    FlowSolution::flat_torus(Grid::standard(1, points).unwrap(), 2.0, 0.1).unwrap()
}

/// u = 1 + 0.5·cos x·e^{−τ}.
pub fn spectral() -> PotentialSolution {
    PotentialSolution::torus_spectral(
        1.0,
        vec![Mode {
            amplitude: 0.5,
            wave: vec![1],
        }],
    )
    .unwrap()
}
