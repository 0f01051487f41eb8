//! Stable-sampling decisions for planar trajectory families.
//!
//! The crate decides whether parallel lines, dilations of a convex curve, or
//! translates of a circle form a stable sampling set for the Bernstein space
//! of a convex planar spectrum, transfers that verdict to mobile sampling in
//! Paley–Wiener spaces, evaluates uniqueness-set thresholds, and corroborates
//! verdicts numerically on a periodized grid.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decide;
pub mod density;
pub mod error;
pub mod geometry;
pub mod scenario;
pub mod trajectory;
pub mod uniqueness;
pub mod vec2;
pub mod verify;


pub use error::Error;
pub use geometry::{ConvexBody, Direction, TOL_GEOM};
pub use vec2::Vec2;
