//! Desk-scale numerical corroboration on a periodized grid.
//!
//! The plane is replaced by the torus `[0, L)²` and the spectrum by the
//! integer frequencies `k` with `k/L ∈ Ω`. Results are surrogates for the
//! infinite-dimensional statements, never proofs.

mod adversarial;
mod field;
mod probe;
mod witness;

pub use adversarial::adversarial_minimize;
pub use field::{interpolation_budget, spectrum_mask, synth_random, GridField};
pub use probe::{
    estimate_lower_frame_ratio, path_profile, probe, torus_bbox, ProbeReport, ProfilePoint, Resolution,
};
pub use witness::{gap_report, witness_gap, witness_lines, GapReport, SincWitness};

use crate::geometry::GeometryError;
use crate::trajectory::TrajectoryError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("spectrum mask is empty at this period")]
    MaskEmpty,
    #[error("mask frequency {k:?} does not fit a grid of size {n}")]
    MaskExceedsGrid { k: [i64; 2], n: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("trajectory has no samples in the fundamental cell")]
    EmptyPath,
    #[error("longest horizontal chord {chord} is shorter than 1")]
    ChordTooShort { chord: f64 },
    #[error("{0}")]
    FrequencyUnrepresentable(String),
    #[error("delta {delta} exceeds the inradius {depth} of the spectrum about its centroid")]
    DeltaTooLarge { delta: f64, depth: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid input: {0}")]
    Invalid(String),
}
