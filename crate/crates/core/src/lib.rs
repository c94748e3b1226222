//! Perelman's N-space over model backward Ricci flows, Colding's area,
//! volume and monotonic volume on level sets of `b`, and Perelman's
//! W-entropy they converge to as N → ∞.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod nspace;
pub mod potential;

pub use error::{Error, Result};
pub use geometry::{FlowKind, FlowSolution, Grid, ScalarField, TensorField};
pub use nspace::{ColdingSample, LevelSet, NSpaceContext};
pub use potential::{Mode, PotentialSolution};
pub use asymptotics::ConvergenceFit;
pub use entropy::EntropySample;
