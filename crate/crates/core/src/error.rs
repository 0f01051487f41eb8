//! Crate-wide error wrapping the per-module errors.

use crate::decide::DecideError;
use crate::density::DensityError;
use crate::geometry::GeometryError;
use crate::trajectory::TrajectoryError;
use crate::uniqueness::UniquenessError;
use crate::verify::VerifyError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Uniqueness(#[from] UniquenessError),
}
