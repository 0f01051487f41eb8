//! Uniformly discrete sets on the line and in the plane, their separation
//! constants, lower uniform densities and counting functions.
//!
//! Structured descriptions (arithmetic progressions, lattices) have exact
//! densities. Explicit finite lists only describe a set inside a truncation
//! radius, so anything computed from them is reported as windowed.

use crate::vec2::Vec2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::HashMap;
use std::f64::consts::PI;
use thiserror::Error;

/// `θ(t)/t` above this on every tail point of a schedule, and increasing,
/// is reported as an infinite slope.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Upper bound on the number of ball centres probed by a 2-D windowed
/// density estimate; the centre pitch is coarsened beyond it.
pub const MAX_DENSITY_CENTERS: usize = 1 << 20;

/// Window radius, as a multiple of the coarsest part spacing, used when a
/// union without explicit parts has to be materialized.
const UNION_WINDOW_FACTOR: f64 = 64.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("fewer than two points in the evaluation window")]
    TooFewPoints,
    #[error("window radius {radius} exceeds half the truncation radius {r_trunc}")]
    WindowExceedsTruncation { radius: f64, r_trunc: f64 },
    #[error("query radius {radius} exceeds the truncation radius {r_trunc}")]
    ExceedsTruncation { radius: f64, r_trunc: f64 },
    #[error("set contains the non-positive element {0}")]
    NonPositiveElement(f64),
    #[error("invalid discrete set: {0}")]
    Invalid(String),
    #[error("operation requires a {expected}-dimensional set")]
    WrongDimension { expected: u8 },
    #[error("radius schedule must be nonempty, positive and increasing")]
    BadSchedule,
}

#[derive(Clone, Debug, PartialEq)]
enum SetRepr {
    /// `{offset + k·step : k ∈ ℤ}`
    Arithmetic { step: f64, offset: f64 },
    /// `{offset + k·step : k ≥ 0}`
    HalfArithmetic { step: f64, offset: f64 },
    Explicit1 { points: Vec<f64>, r_trunc: f64 },
    /// `{offset + n₁b₁ + n₂b₂ : n ∈ ℤ²}`
    Lattice { basis: [Vec2; 2], offset: Vec2 },
    /// `{offset + k·step : k ∈ ℤ}` in the plane.
    Progression { step: Vec2, offset: Vec2 },
    Explicit2 { points: Vec<Vec2>, r_trunc: f64 },
    Union { dim: u8, parts: Vec<DiscreteSet> },
}

/// A described uniformly discrete subset of ℝ or ℝ².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetJson", into = "SetJson")]
pub struct DiscreteSet {
    repr: SetRepr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Windowed,
}

/// Lower uniform density value and how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub value: f64,
    pub exactness: Exactness,
    /// Largest window radius used (windowed reports only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window_radius: Option<f64>,
    /// Spacing of the probed ball centres (windowed reports only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub center_pitch: Option<f64>,
}

impl DensityReport {
    fn exact(value: f64) -> Self {
        DensityReport {
            value,
            exactness: Exactness::Exact,
            window_radius: None,
            center_pitch: None,
        }
    }
}

/// Limit inferior of `θ(t)/t`, possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    Finite(f64),
    Infinite,
}

impl Slope {
    pub fn value(self) -> f64 {
        match self {
            Slope::Finite(v) => v,
            Slope::Infinite => f64::INFINITY,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == f64::INFINITY {
            Slope::Infinite
        } else {
            Slope::Finite(v)
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Slope::Finite(v) => s.serialize_f64(*v),
            Slope::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Slope {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v >= 0.0 => Ok(Slope::Finite(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("negative slope {v}"))),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "+inf" | "infinity") => Ok(Slope::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unrecognised slope {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Coord {
    Scalar(f64),
    Pair(Vec2),
}

fn dim1() -> u8 {
    1
}
fn dim2() -> u8 {
    2
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SetJson {
    Arithmetic {
        #[serde(default = "dim1")]
        dim: u8,
        step: f64,
        #[serde(default)]
        offset: f64,
    },
    HalfArithmetic {
        #[serde(default = "dim1")]
        dim: u8,
        step: f64,
        offset: f64,
    },
    Explicit {
        #[serde(default = "dim1")]
        dim: u8,
        points: Vec<Coord>,
        r_trunc: f64,
    },
    Lattice {
        #[serde(default = "dim2")]
        dim: u8,
        basis: [Vec2; 2],
        #[serde(default)]
        offset: Vec2,
    },
    Progression {
        #[serde(default = "dim2")]
        dim: u8,
        step: Vec2,
        #[serde(default)]
        offset: Vec2,
    },
    Union {
        dim: u8,
        parts: Vec<DiscreteSet>,
    },
}

impl TryFrom<SetJson> for DiscreteSet {
    type Error = DensityError;
    fn try_from(j: SetJson) -> Result<Self, Self::Error> {
        let want = |dim: u8, expected: u8| {
            if dim == expected {
                Ok(())
            } else {
                Err(DensityError::Invalid(format!(
                    "dim {dim} does not match this kind (expected {expected})"
                )))
            }
        };
        match j {
            SetJson::Arithmetic { dim, step, offset } => {
                want(dim, 1)?;
                DiscreteSet::arithmetic(step, offset)
            }
            SetJson::HalfArithmetic { dim, step, offset } => {
                want(dim, 1)?;
                DiscreteSet::half_arithmetic(step, offset)
            }
            SetJson::Explicit { dim, points, r_trunc } => match dim {
                1 => {
                    let pts = points
                        .into_iter()
                        .map(|c| match c {
                            Coord::Scalar(v) => Ok(v),
                            Coord::Pair(_) => Err(DensityError::Invalid("dim 1 set with a 2-D point".into())),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    DiscreteSet::explicit(pts, r_trunc)
                }
                2 => {
                    let pts = points
                        .into_iter()
                        .map(|c| match c {
                            Coord::Pair(p) => Ok(p),
                            Coord::Scalar(_) => Err(DensityError::Invalid("dim 2 set with a scalar point".into())),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    DiscreteSet::explicit_2d(pts, r_trunc)
                }
                d => Err(DensityError::Invalid(format!("unsupported dim {d}"))),
            },
            SetJson::Lattice { dim, basis, offset } => {
                want(dim, 2)?;
                DiscreteSet::lattice_with_offset(basis, offset)
            }
            SetJson::Progression { dim, step, offset } => {
                want(dim, 2)?;
                DiscreteSet::progression_2d(step, offset)
            }
            SetJson::Union { dim, parts } => DiscreteSet::union(dim, parts),
        }
    }
}

impl From<DiscreteSet> for SetJson {
    fn from(s: DiscreteSet) -> Self {
        match s.repr {
            SetRepr::Arithmetic { step, offset } => SetJson::Arithmetic { dim: 1, step, offset },
            SetRepr::HalfArithmetic { step, offset } => SetJson::HalfArithmetic { dim: 1, step, offset },
            SetRepr::Explicit1 { points, r_trunc } => SetJson::Explicit {
                dim: 1,
                points: points.into_iter().map(Coord::Scalar).collect(),
                r_trunc,
            },
            SetRepr::Lattice { basis, offset } => SetJson::Lattice { dim: 2, basis, offset },
            SetRepr::Progression { step, offset } => SetJson::Progression { dim: 2, step, offset },
            SetRepr::Explicit2 { points, r_trunc } => SetJson::Explicit {
                dim: 2,
                points: points.into_iter().map(Coord::Pair).collect(),
                r_trunc,
            },
            SetRepr::Union { dim, parts } => SetJson::Union { dim, parts },
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), DensityError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(DensityError::Invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Shortest nonzero vector of a 2-D lattice by Lagrange–Gauss reduction.
fn shortest_lattice_vector(basis: [Vec2; 2]) -> f64 {
    let (mut u, mut v) = (basis[0], basis[1]);
    if u.norm_sq() > v.norm_sq() {
        std::mem::swap(&mut u, &mut v);
    }
    loop {
        let m = (u.dot(v) / u.norm_sq()).round();
        v = v - u * m;
        if v.norm_sq() >= u.norm_sq() {
            return u.norm();
        }
        std::mem::swap(&mut u, &mut v);
    }
}

/// Inclusive integer range `{k : lo ≤ offset + k·step ≤ hi}` (or strict).
fn index_range(step: f64, offset: f64, lo: f64, hi: f64, strict: bool) -> (i64, i64) {
    let inside = |k: i64| {
        let x = offset + k as f64 * step;
        if strict {
            x > lo && x < hi
        } else {
            x >= lo && x <= hi
        }
    };
    let mut a = ((lo - offset) / step).ceil() as i64;
    let mut b = ((hi - offset) / step).floor() as i64;
    while inside(a - 1) {
        a -= 1;
    }
    while a <= b && !inside(a) {
        a += 1;
    }
    while inside(b + 1) {
        b += 1;
    }
    while b >= a && !inside(b) {
        b -= 1;
    }
    (a, b)
}

/// Integer solutions `k` of `|w + k·s|² < r²` (or `≤` when not strict).
fn quadratic_range(s: Vec2, w: Vec2, r: f64, strict: bool) -> Option<(i64, i64)> {
    let inside = |k: i64| {
        let d = (w + s * k as f64).norm_sq();
        if strict {
            d < r * r
        } else {
            d <= r * r
        }
    };
    let a = s.norm_sq();
    let b = 2.0 * s.dot(w);
    let c = w.norm_sq() - r * r;
    let disc = b * b - 4.0 * a * c;
    let mid = -b / (2.0 * a);
    let half = if disc > 0.0 { disc.sqrt() / (2.0 * a) } else { 0.0 };
    let mut lo = (mid - half).ceil() as i64;
    let mut hi = (mid + half).floor() as i64;
    if lo > hi {
        let k = mid.round() as i64;
        if !inside(k) {
            return None;
        }
        lo = k;
        hi = k;
    }
    while inside(lo - 1) {
        lo -= 1;
    }
    while lo <= hi && !inside(lo) {
        lo += 1;
    }
    while inside(hi + 1) {
        hi += 1;
    }
    while hi >= lo && !inside(hi) {
        hi -= 1;
    }
    (lo <= hi).then_some((lo, hi))
}

/// Visits the lattice rows meeting the disk `|x − center| < radius` (or `≤`),
/// calling `f(n₂, n₁_lo, n₁_hi)` with inclusive `n₁` ranges.
fn lattice_rows(
    basis: [Vec2; 2],
    offset: Vec2,
    center: Vec2,
    radius: f64,
    strict: bool,
    mut f: impl FnMut(i64, i64, i64),
) {
    let [b1, b2] = basis;
    let det = b1.cross(b2);
    // second row of the inverse basis matrix
    let row2 = Vec2::new(-b1.y, b1.x) / det;
    let c2 = row2.dot(center - offset);
    let spread = radius * row2.norm();
    let lo = (c2 - spread).floor() as i64 - 1;
    let hi = (c2 + spread).ceil() as i64 + 1;
    for n2 in lo..=hi {
        let w = offset - center + b2 * n2 as f64;
        if let Some((a, b)) = quadratic_range(b1, w, radius, strict) {
            f(n2, a, b);
        }
    }
}

fn min_gap_1d(points: &[f64]) -> Option<f64> {
    points.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
}

fn min_pair_distance_2d(points: &[Vec2]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if pts[j].x - pts[i].x >= best {
                break;
            }
            best = best.min(pts[i].dist(pts[j]));
        }
    }
    Some(best)
}

impl DiscreteSet {
    pub fn arithmetic(step: f64, offset: f64) -> Result<Self, DensityError> {
        check_positive("step", step)?;
        if !offset.is_finite() {
            return Err(DensityError::Invalid("offset must be finite".into()));
        }
        Ok(DiscreteSet {
            repr: SetRepr::Arithmetic { step, offset },
        })
    }

    /// The one-sided progression `{offset + k·step : k ≥ 0}`.
    pub fn half_arithmetic(step: f64, offset: f64) -> Result<Self, DensityError> {
        check_positive("step", step)?;
        if !offset.is_finite() {
            return Err(DensityError::Invalid("offset must be finite".into()));
        }
        Ok(DiscreteSet {
            repr: SetRepr::HalfArithmetic { step, offset },
        })
    }

    /// `ℕ = {1, 2, 3, …}`.
    pub fn naturals() -> Self {
        DiscreteSet {
            repr: SetRepr::HalfArithmetic { step: 1.0, offset: 1.0 },
        }
    }

    pub fn integers() -> Self {
        DiscreteSet {
            repr: SetRepr::Arithmetic { step: 1.0, offset: 0.0 },
        }
    }

    /// Finite list describing a set inside `[-r_trunc, r_trunc]`.
    pub fn explicit(mut points: Vec<f64>, r_trunc: f64) -> Result<Self, DensityError> {
        check_positive("r_trunc", r_trunc)?;
        if let Some(p) = points.iter().find(|p| !p.is_finite() || p.abs() > r_trunc) {
            return Err(DensityError::Invalid(format!("point {p} outside truncation {r_trunc}")));
        }
        points.sort_by(f64::total_cmp);
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(DensityError::Invalid("duplicate point".into()));
        }
        Ok(DiscreteSet {
            repr: SetRepr::Explicit1 { points, r_trunc },
        })
    }

    pub fn lattice(basis: [Vec2; 2]) -> Result<Self, DensityError> {
        Self::lattice_with_offset(basis, Vec2::ZERO)
    }

    pub fn lattice_with_offset(basis: [Vec2; 2], offset: Vec2) -> Result<Self, DensityError> {
        if !basis[0].is_finite() || !basis[1].is_finite() || !offset.is_finite() {
            return Err(DensityError::Invalid("non-finite lattice data".into()));
        }
        if basis[0].cross(basis[1]).abs() <= 1e-12 {
            return Err(DensityError::Invalid("singular lattice basis".into()));
        }
        Ok(DiscreteSet {
            repr: SetRepr::Lattice { basis, offset },
        })
    }

    /// `ℤ²`.
    pub fn integer_lattice() -> Self {
        DiscreteSet {
            repr: SetRepr::Lattice {
                basis: [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
                offset: Vec2::ZERO,
            },
        }
    }

    /// `{offset + k·step : k ∈ ℤ}` in the plane.
    pub fn progression_2d(step: Vec2, offset: Vec2) -> Result<Self, DensityError> {
        if !step.is_finite() || !offset.is_finite() || step.norm() == 0.0 {
            return Err(DensityError::Invalid("progression step must be nonzero".into()));
        }
        Ok(DiscreteSet {
            repr: SetRepr::Progression { step, offset },
        })
    }

    /// Finite planar list describing a set inside the disk of radius `r_trunc`.
    pub fn explicit_2d(mut points: Vec<Vec2>, r_trunc: f64) -> Result<Self, DensityError> {
        check_positive("r_trunc", r_trunc)?;
        if let Some(p) = points.iter().find(|p| !p.is_finite() || p.norm() > r_trunc) {
            return Err(DensityError::Invalid(format!(
                "point ({}, {}) outside truncation {r_trunc}",
                p.x, p.y
            )));
        }
        points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(DensityError::Invalid("duplicate point".into()));
        }
        Ok(DiscreteSet {
            repr: SetRepr::Explicit2 { points, r_trunc },
        })
    }

    pub fn union(dim: u8, parts: Vec<DiscreteSet>) -> Result<Self, DensityError> {
        if parts.is_empty() {
            return Err(DensityError::Invalid("union needs at least one part".into()));
        }
        if let Some(p) = parts.iter().find(|p| p.dim() != dim) {
            return Err(DensityError::Invalid(format!(
                "union of dim {dim} has a part of dim {}",
                p.dim()
            )));
        }
        Ok(DiscreteSet {
            repr: SetRepr::Union { dim, parts },
        })
    }

    pub fn dim(&self) -> u8 {
        match &self.repr {
            SetRepr::Arithmetic { .. } | SetRepr::HalfArithmetic { .. } | SetRepr::Explicit1 { .. } => 1,
            SetRepr::Lattice { .. } | SetRepr::Progression { .. } | SetRepr::Explicit2 { .. } => 2,
            SetRepr::Union { dim, .. } => *dim,
        }
    }

    /// Radius of validity of the description; `None` for infinite forms.
    pub fn truncation(&self) -> Option<f64> {
        match &self.repr {
            SetRepr::Explicit1 { r_trunc, .. } | SetRepr::Explicit2 { r_trunc, .. } => Some(*r_trunc),
            SetRepr::Union { parts, .. } => parts
                .iter()
                .filter_map(|p| p.truncation())
                .reduce(f64::min),
            _ => None,
        }
    }

    /// Image under `x ↦ a·x`, `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<Self, DensityError> {
        check_positive("scale", a)?;
        let repr = match &self.repr {
            SetRepr::Arithmetic { step, offset } => SetRepr::Arithmetic {
                step: step * a,
                offset: offset * a,
            },
            SetRepr::HalfArithmetic { step, offset } => SetRepr::HalfArithmetic {
                step: step * a,
                offset: offset * a,
            },
            SetRepr::Explicit1 { points, r_trunc } => SetRepr::Explicit1 {
                points: points.iter().map(|p| p * a).collect(),
                r_trunc: r_trunc * a,
            },
            SetRepr::Lattice { basis, offset } => SetRepr::Lattice {
                basis: [basis[0] * a, basis[1] * a],
                offset: *offset * a,
            },
            SetRepr::Progression { step, offset } => SetRepr::Progression {
                step: *step * a,
                offset: *offset * a,
            },
            SetRepr::Explicit2 { points, r_trunc } => SetRepr::Explicit2 {
                points: points.iter().map(|p| *p * a).collect(),
                r_trunc: r_trunc * a,
            },
            SetRepr::Union { dim, parts } => SetRepr::Union {
                dim: *dim,
                parts: parts.iter().map(|p| p.scaled(a)).collect::<Result<_, _>>()?,
            },
        };
        Ok(DiscreteSet { repr })
    }

    /// Smallest element of a 1-D set, if bounded below.
    pub fn infimum(&self) -> Option<f64> {
        match &self.repr {
            SetRepr::HalfArithmetic { offset, .. } => Some(*offset),
            SetRepr::Explicit1 { points, .. } => points.first().copied(),
            SetRepr::Union { dim: 1, parts } => parts
                .iter()
                .map(|p| p.infimum())
                .collect::<Option<Vec<_>>>()?
                .into_iter()
                .reduce(f64::min),
            _ => None,
        }
    }

    /// Characteristic spacing used to size default windows.
    fn spacing_scale(&self) -> f64 {
        match &self.repr {
            SetRepr::Arithmetic { step, .. } | SetRepr::HalfArithmetic { step, .. } => *step,
            SetRepr::Lattice { basis, .. } => basis[0].norm().max(basis[1].norm()),
            SetRepr::Progression { step, .. } => step.norm(),
            SetRepr::Explicit1 { r_trunc, .. } | SetRepr::Explicit2 { r_trunc, .. } => *r_trunc / UNION_WINDOW_FACTOR,
            SetRepr::Union { parts, .. } => parts.iter().map(|p| p.spacing_scale()).fold(0.0, f64::max),
        }
    }

    fn check_window(&self, radius: f64) -> Result<(), DensityError> {
        match self.truncation() {
            Some(r_trunc) if radius > r_trunc * (1.0 + 1e-12) => {
                Err(DensityError::ExceedsTruncation { radius, r_trunc })
            }
            _ => Ok(()),
        }
    }

    /// Points in the closed interval `[lo, hi]` (1-D sets), ascending.
    pub fn points_in_interval(&self, lo: f64, hi: f64) -> Result<Vec<f64>, DensityError> {
        if self.dim() != 1 {
            return Err(DensityError::WrongDimension { expected: 1 });
        }
        self.check_window(lo.abs().max(hi.abs()))?;
        let mut out = match &self.repr {
            SetRepr::Arithmetic { step, offset } => {
                let (a, b) = index_range(*step, *offset, lo, hi, false);
                (a..=b).map(|k| offset + k as f64 * step).collect()
            }
            SetRepr::HalfArithmetic { step, offset } => {
                let (a, b) = index_range(*step, *offset, lo, hi, false);
                (a.max(0)..=b).map(|k| offset + k as f64 * step).collect()
            }
            SetRepr::Explicit1 { points, .. } => points.iter().copied().filter(|p| *p >= lo && *p <= hi).collect(),
            SetRepr::Union { parts, .. } => {
                let mut v = Vec::new();
                for p in parts {
                    v.extend(p.points_in_interval(lo, hi)?);
                }
                v
            }
            _ => unreachable!("dimension checked"),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        Ok(out)
    }

    /// Points in the closed disk `|x − center| ≤ radius` (2-D sets).
    pub fn points_in_disk(&self, center: Vec2, radius: f64) -> Result<Vec<Vec2>, DensityError> {
        if self.dim() != 2 {
            return Err(DensityError::WrongDimension { expected: 2 });
        }
        self.check_window(center.norm() + radius)?;
        let mut out = Vec::new();
        self.collect_disk(center, radius, &mut out)?;
        out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        out.dedup();
        Ok(out)
    }

    fn collect_disk(&self, center: Vec2, radius: f64, out: &mut Vec<Vec2>) -> Result<(), DensityError> {
        match &self.repr {
            SetRepr::Lattice { basis, offset } => {
                lattice_rows(*basis, *offset, center, radius, false, |n2, a, b| {
                    for n1 in a..=b {
                        out.push(*offset + basis[0] * n1 as f64 + basis[1] * n2 as f64);
                    }
                });
            }
            SetRepr::Progression { step, offset } => {
                if let Some((a, b)) = quadratic_range(*step, *offset - center, radius, false) {
                    out.extend((a..=b).map(|k| *offset + *step * k as f64));
                }
            }
            SetRepr::Explicit2 { points, .. } => {
                out.extend(points.iter().copied().filter(|p| p.dist(center) <= radius));
            }
            SetRepr::Union { parts, .. } => {
                for p in parts {
                    p.collect_disk(center, radius, out)?;
                }
            }
            _ => return Err(DensityError::WrongDimension { expected: 2 }),
        }
        Ok(())
    }

    /// Points in the closed axis-aligned box (2-D sets).
    pub fn points_in_box(&self, min: Vec2, max: Vec2) -> Result<Vec<Vec2>, DensityError> {
        let c = (min + max) * 0.5;
        let r = (max - min).norm() * 0.5;
        Ok(self
            .points_in_disk(c, r)?
            .into_iter()
            .filter(|p| p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y)
            .collect())
    }

    /// All points inside the closed ball of radius `radius` about the origin,
    /// as 2-D points (1-D sets are embedded on the first axis).
    fn materialize(&self, radius: f64) -> Result<Vec<Vec2>, DensityError> {
        if self.dim() == 1 {
            Ok(self
                .points_in_interval(-radius, radius)?
                .into_iter()
                .map(|x| Vec2::new(x, 0.0))
                .collect())
        } else {
            self.points_in_disk(Vec2::ZERO, radius)
        }
    }

    fn materialize_1d(&self, radius: f64) -> Result<Vec<f64>, DensityError> {
        self.points_in_interval(-radius, radius)
    }

    /// Radius within which a windowed computation may enumerate this set.
    fn working_radius(&self, fallback: f64) -> f64 {
        self.truncation().unwrap_or(fallback)
    }
}

/// Separation constant `inf |λ − λ'|` over distinct points.
///
/// Exact for progressions and lattices; for explicit lists and unions it is
/// the minimum over the truncation window (or a default window for unions of
/// infinite parts).
pub fn separation(set: &DiscreteSet) -> Result<f64, DensityError> {
    match &set.repr {
        SetRepr::Arithmetic { step, .. } | SetRepr::HalfArithmetic { step, .. } => Ok(*step),
        SetRepr::Lattice { basis, .. } => Ok(shortest_lattice_vector(*basis)),
        SetRepr::Progression { step, .. } => Ok(step.norm()),
        SetRepr::Explicit1 { points, .. } => min_gap_1d(points).ok_or(DensityError::TooFewPoints),
        SetRepr::Explicit2 { points, .. } => min_pair_distance_2d(points).ok_or(DensityError::TooFewPoints),
        SetRepr::Union { dim, .. } => {
            let r = set.working_radius(UNION_WINDOW_FACTOR * set.spacing_scale());
            let d = if *dim == 1 {
                min_gap_1d(&set.materialize_1d(r)?)
            } else {
                min_pair_distance_2d(&set.materialize(r)?)
            };
            match d {
                Some(d) if d > 0.0 => Ok(d),
                Some(_) => Err(DensityError::Invalid("union parts share a point".into())),
                None => Err(DensityError::TooFewPoints),
            }
        }
    }
}

fn check_schedule(windows: &[f64]) -> Result<f64, DensityError> {
    if windows.is_empty()
        || windows.iter().any(|w| !w.is_finite() || *w <= 0.0)
        || windows.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(DensityError::BadSchedule);
    }
    Ok(*windows.last().unwrap())
}

/// Doubling schedule up to half the truncation radius, starting from a few
/// separations; suitable for windowed estimates.
pub fn default_windows(set: &DiscreteSet) -> Vec<f64> {
    let top = match set.truncation() {
        Some(r) => r / 2.0,
        None => 32.0 * set.spacing_scale(),
    };
    let mut r = top;
    let mut out = vec![r];
    for _ in 0..5 {
        r /= 2.0;
        out.push(r);
    }
    out.reverse();
    out
}

/// Lower uniform density `lim_r inf_x #(Λ ∩ B_r(x)) / |B_r|`.
///
/// Exact for progressions (`1/step`, or 0 for one-sided and planar
/// progressions) and lattices (`1/|det|`). Otherwise the infimum over centres
/// is taken on a grid of pitch `δ/4` inside the window where the description
/// is valid, and the value at the largest radius is reported.
pub fn lower_uniform_density(set: &DiscreteSet, windows: &[f64]) -> Result<DensityReport, DensityError> {
    let top = check_schedule(windows)?;
    match &set.repr {
        SetRepr::Arithmetic { step, .. } => return Ok(DensityReport::exact(1.0 / step)),
        SetRepr::HalfArithmetic { .. } | SetRepr::Progression { .. } => return Ok(DensityReport::exact(0.0)),
        SetRepr::Lattice { basis, .. } => return Ok(DensityReport::exact(1.0 / basis[0].cross(basis[1]).abs())),
        _ => {}
    }
    let r_trunc = set.working_radius(2.0 * top);
    if top > r_trunc / 2.0 * (1.0 + 1e-12) {
        return Err(DensityError::WindowExceedsTruncation { radius: top, r_trunc });
    }
    let profile = if set.dim() == 1 {
        windowed_profile_1d(&set.materialize_1d(r_trunc)?, r_trunc, windows)
    } else {
        windowed_profile_2d(&set.materialize(r_trunc)?, r_trunc, windows)
    };
    let (value, pitch) = *profile.last().unwrap();
    Ok(DensityReport {
        value,
        exactness: Exactness::Windowed,
        window_radius: Some(top),
        center_pitch: Some(pitch),
    })
}

/// Per-radius windowed estimates `(estimate, centre pitch)` for a set given
/// explicitly on `[-r_trunc, r_trunc]`.
fn windowed_profile_1d(points: &[f64], r_trunc: f64, windows: &[f64]) -> Vec<(f64, f64)> {
    let delta = min_gap_1d(points).unwrap_or(windows[0]);
    let pitch = delta / 4.0;
    windows
        .iter()
        .map(|&r| {
            let reach = r_trunc - r;
            let steps = (reach / pitch).floor() as i64;
            let mut best = usize::MAX;
            for k in -steps..=steps {
                let x = k as f64 * pitch;
                let lo = points.partition_point(|p| *p < x - r);
                let hi = points.partition_point(|p| *p <= x + r);
                best = best.min(hi - lo);
            }
            (best as f64 / (2.0 * r), pitch)
        })
        .collect()
}

fn windowed_profile_2d(points: &[Vec2], r_trunc: f64, windows: &[f64]) -> Vec<(f64, f64)> {
    let delta = min_pair_distance_2d(points).unwrap_or(windows[0]);
    windows
        .iter()
        .map(|&r| {
            let reach = r_trunc - r;
            let mut pitch = delta / 4.0;
            let per_axis = |p: f64| 2 * (reach / p).floor() as usize + 1;
            while per_axis(pitch).pow(2) > MAX_DENSITY_CENTERS {
                pitch *= 2.0;
            }
            let cell = r;
            let mut buckets: HashMap<(i64, i64), Vec<Vec2>> = HashMap::new();
            for p in points {
                let key = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
                buckets.entry(key).or_default().push(*p);
            }
            let steps = (reach / pitch).floor() as i64;
            let mut best = usize::MAX;
            for i in -steps..=steps {
                for j in -steps..=steps {
                    let x = Vec2::new(i as f64 * pitch, j as f64 * pitch);
                    if x.norm() > reach {
                        continue;
                    }
                    let (cx, cy) = ((x.x / cell).floor() as i64, (x.y / cell).floor() as i64);
                    let mut count = 0;
                    for dx in -1..=1 {
                        for dy in -1..=1 {
                            if let Some(b) = buckets.get(&(cx + dx, cy + dy)) {
                                count += b.iter().filter(|p| p.dist(x) <= r).count();
                            }
                        }
                    }
                    best = best.min(count);
                }
            }
            (best as f64 / (PI * r * r), pitch)
        })
        .collect()
}

/// Per-radius windowed estimates for any non-exact set; exposes the
/// refinement behaviour that [`lower_uniform_density`] summarizes.
pub fn density_profile(set: &DiscreteSet, windows: &[f64]) -> Result<Vec<f64>, DensityError> {
    let top = check_schedule(windows)?;
    let r_trunc = set.working_radius(2.0 * top);
    if top > r_trunc / 2.0 * (1.0 + 1e-12) {
        return Err(DensityError::WindowExceedsTruncation { radius: top, r_trunc });
    }
    let prof = if set.dim() == 1 {
        windowed_profile_1d(&set.materialize_1d(r_trunc)?, r_trunc, windows)
    } else {
        windowed_profile_2d(&set.materialize(r_trunc)?, r_trunc, windows)
    };
    Ok(prof.into_iter().map(|(v, _)| v).collect())
}

/// `d⁻(Q) = D⁻(Q ∪ (−Q))` for a positive 1-D set.
pub fn symmetrized_density(q: &DiscreteSet, windows: &[f64]) -> Result<DensityReport, DensityError> {
    if q.dim() != 1 {
        return Err(DensityError::WrongDimension { expected: 1 });
    }
    check_positive_set(q)?;
    if let SetRepr::HalfArithmetic { step, .. } = &q.repr {
        check_schedule(windows)?;
        return Ok(DensityReport::exact(1.0 / step));
    }
    let top = check_schedule(windows)?;
    let r_trunc = q.working_radius(2.0 * top);
    let mut pts = q.points_in_interval(0.0, r_trunc)?;
    let mirrored: Vec<f64> = pts.iter().map(|p| -p).collect();
    pts.extend(mirrored);
    let sym = DiscreteSet::explicit(pts, r_trunc)?;
    lower_uniform_density(&sym, windows)
}

fn check_positive_set(q: &DiscreteSet) -> Result<(), DensityError> {
    match &q.repr {
        SetRepr::Arithmetic { step, offset } => Err(DensityError::NonPositiveElement(offset.rem_euclid(*step) - step)),
        SetRepr::HalfArithmetic { offset, .. } if *offset <= 0.0 => Err(DensityError::NonPositiveElement(*offset)),
        SetRepr::Explicit1 { points, .. } => match points.first() {
            Some(p) if *p <= 0.0 => Err(DensityError::NonPositiveElement(*p)),
            _ => Ok(()),
        },
        SetRepr::Union { parts, .. } => parts.iter().try_for_each(check_positive_set),
        _ => Ok(()),
    }
}

/// Checks that a 1-D set lies in `(0, ∞)`.
pub fn require_positive(q: &DiscreteSet) -> Result<(), DensityError> {
    if q.dim() != 1 {
        return Err(DensityError::WrongDimension { expected: 1 });
    }
    check_positive_set(q)
}

/// `θ(t) = #{V ∩ D_t}` with `D_t` the open disk (interval for 1-D sets) of
/// radius `t` about the origin.
pub fn counting(set: &DiscreteSet, t: f64) -> Result<u64, DensityError> {
    if !(t >= 0.0) {
        return Err(DensityError::Invalid(format!("counting radius {t}")));
    }
    set.check_window(t)?;
    Ok(match &set.repr {
        SetRepr::Arithmetic { step, offset } => {
            let (a, b) = index_range(*step, *offset, -t, t, true);
            (b - a + 1).max(0) as u64
        }
        SetRepr::HalfArithmetic { step, offset } => {
            let (a, b) = index_range(*step, *offset, -t, t, true);
            (b - a.max(0) + 1).max(0) as u64
        }
        SetRepr::Explicit1 { points, .. } => points.iter().filter(|p| p.abs() < t).count() as u64,
        SetRepr::Lattice { basis, offset } => {
            let mut n = 0u64;
            lattice_rows(*basis, *offset, Vec2::ZERO, t, true, |_, a, b| n += (b - a + 1) as u64);
            n
        }
        SetRepr::Progression { step, offset } => match quadratic_range(*step, *offset, t, true) {
            Some((a, b)) => (b - a + 1) as u64,
            None => 0,
        },
        SetRepr::Explicit2 { points, .. } => points.iter().filter(|p| p.norm() < t).count() as u64,
        SetRepr::Union { dim, .. } => {
            if *dim == 1 {
                set.points_in_interval(-t, t)?.into_iter().filter(|p| p.abs() < t).count() as u64
            } else {
                set.points_in_disk(Vec2::ZERO, t)?.into_iter().filter(|p| p.norm() < t).count() as u64
            }
        }
    })
}

/// Default schedule for [`liminf_slope`]: powers of two from `2¹⁶` to `2²⁴`
/// for infinite descriptions, or halvings of the truncation radius.
pub fn default_slope_schedule(set: &DiscreteSet) -> Vec<f64> {
    match set.truncation() {
        Some(r) => {
            let mut v: Vec<f64> = (0..8).map(|k| r / 2f64.powi(k)).collect();
            v.reverse();
            v
        }
        None => (16..=24).map(|k| 2f64.powi(k)).collect(),
    }
}

/// `liminf θ(t)/t` estimated over the tail (second half) of `schedule`.
pub fn liminf_slope(set: &DiscreteSet, schedule: &[f64]) -> Result<Slope, DensityError> {
    liminf_slope_with(set, schedule, DIVERGENCE_THRESHOLD)
}

pub fn liminf_slope_with(set: &DiscreteSet, schedule: &[f64], threshold: f64) -> Result<Slope, DensityError> {
    check_schedule(schedule)?;
    let ratios: Vec<f64> = schedule
        .iter()
        .map(|&t| counting(set, t).map(|n| n as f64 / t))
        .collect::<Result<_, _>>()?;
    let tail = &ratios[ratios.len() / 2..];
    let diverging = tail.iter().all(|r| *r > threshold) && tail.windows(2).all(|w| w[1] > w[0]);
    if diverging {
        Ok(Slope::Infinite)
    } else {
        Ok(Slope::Finite(tail.iter().copied().fold(f64::INFINITY, f64::min)))
    }
}
