//! Trajectory families: parallel lines, dilations of a convex curve,
//! translates of a circle, and generic polylines.
//!
//! Infinite families are only ever enumerated inside a bounded window (a ball
//! or a bounding box), through the underlying [`DiscreteSet`].

use crate::density::{self, DensityError, DiscreteSet, Exactness};
use crate::geometry::{ConvexBody, Direction, GeometryError, TOL_GEOM};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("ball of radius {radius} reaches beyond the truncation radius {r_trunc} of the parameter set")]
    UnboundedContribution { radius: f64, r_trunc: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Density(DensityError),
    #[error("invalid trajectory: {0}")]
    Invalid(String),
}

impl From<DensityError> for TrajectoryError {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::ExceedsTruncation { radius, r_trunc } => {
                TrajectoryError::UnboundedContribution { radius, r_trunc }
            }
            e => TrajectoryError::Density(e),
        }
    }
}

/// The family a trajectory belongs to, with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// Lines `{x : ⟨x, normal⟩ = h}` for `h` in `offsets`.
    ParallelLines { normal: Direction, offsets: DiscreteSet },
    /// Curves `q·∂body` for `q` in `dilations`.
    DilatedBoundary { body: ConvexBody, dilations: DiscreteSet },
    /// Circles `|x − v| = radius` for `v` in `centers`.
    TranslatedCircles { radius: f64, centers: DiscreteSet },
    /// Open polygonal chains.
    Polyline { chains: Vec<Vec<Vec2>> },
}

/// A validated trajectory `P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct Trajectory {
    family: Family,
}

impl TryFrom<Family> for Trajectory {
    type Error = TrajectoryError;
    fn try_from(f: Family) -> Result<Self, Self::Error> {
        match f {
            Family::ParallelLines { normal, offsets } => Trajectory::parallel_lines(normal, offsets),
            Family::DilatedBoundary { body, dilations } => Trajectory::dilated_boundary(body, dilations),
            Family::TranslatedCircles { radius, centers } => Trajectory::translated_circles(radius, centers),
            Family::Polyline { chains } => Trajectory::polyline(chains),
        }
    }
}

impl From<Trajectory> for Family {
    fn from(t: Trajectory) -> Self {
        t.family
    }
}

/// Closed axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BBox {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self, TrajectoryError> {
        if !(min.is_finite() && max.is_finite() && min.x < max.x && min.y < max.y) {
            return Err(TrajectoryError::Invalid("bounding box must have min < max".into()));
        }
        Ok(BBox { min, max })
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.x >= self.min.x - tol && p.x <= self.max.x + tol && p.y >= self.min.y - tol && p.y <= self.max.y + tol
    }

    fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    fn half_diagonal(&self) -> f64 {
        (self.max - self.min).norm() * 0.5
    }

    fn corners(&self) -> [Vec2; 4] {
        [
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ]
    }

    fn grown(&self, by: f64) -> BBox {
        BBox {
            min: self.min - Vec2::new(by, by),
            max: self.max + Vec2::new(by, by),
        }
    }
}

/// Outcome of the uniform upper-length check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum UpperLength {
    Holds { bound: f64, exactness: Exactness },
    Violated { at: Vec2, length: f64 },
    Indeterminate { reason: String },
}

impl UpperLength {
    pub fn holds(&self) -> bool {
        matches!(self, UpperLength::Holds { .. })
    }
}

/// Outcome of the local lower-length check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LowerLength {
    /// `threshold` is the largest radius certified analytically, if any.
    Holds {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        threshold: Option<f64>,
    },
    Violated { at: Vec2, delta: f64, length: f64 },
    Indeterminate { reason: String },
}

impl LowerLength {
    pub fn holds(&self) -> bool {
        matches!(self, LowerLength::Holds { .. })
    }
}

/// One discretization point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub point: Vec2,
    pub component: usize,
    /// Arc length from the start of the component.
    pub arclength: f64,
}

/// Equal-arc samples of one connected piece of `P ∩ bbox`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledComponent {
    pub points: Vec<Vec2>,
    pub arclengths: Vec<f64>,
    pub length: f64,
    pub closed: bool,
}

impl SampledComponent {
    /// Trapezoid weights for `∫ g ds` from samples.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let n = self.points.len();
        if n == 1 {
            return vec![self.length];
        }
        if self.closed {
            return vec![self.length / n as f64; n];
        }
        let h = self.length / (n - 1) as f64;
        let mut w = vec![h; n];
        w[0] = h / 2.0;
        w[n - 1] = h / 2.0;
        w
    }
}

#[derive(Clone, Copy, Debug)]
enum Prim {
    Seg(Vec2, Vec2),
    /// Counter-clockwise arc over `[t0, t1]`.
    Arc { c: Vec2, r: f64, t0: f64, t1: f64 },
}

impl Prim {
    fn length(&self) -> f64 {
        match *self {
            Prim::Seg(a, b) => a.dist(b),
            Prim::Arc { r, t0, t1, .. } => r * (t1 - t0),
        }
    }

    fn at(&self, s: f64) -> Vec2 {
        match *self {
            Prim::Seg(a, b) => {
                let l = a.dist(b);
                if l == 0.0 {
                    a
                } else {
                    a + (b - a) * (s / l)
                }
            }
            Prim::Arc { c, r, t0, .. } => c + Vec2::from_angle(t0 + s / r) * r,
        }
    }
}

/// A connected chain of primitives.
struct Piece {
    prims: Vec<Prim>,
    closed: bool,
}

impl Piece {
    fn length(&self) -> f64 {
        self.prims.iter().map(Prim::length).sum()
    }

    fn at(&self, mut s: f64) -> Vec2 {
        for p in &self.prims {
            let l = p.length();
            if s <= l {
                return p.at(s);
            }
            s -= l;
        }
        let last = self.prims.last().unwrap();
        last.at(last.length())
    }

    fn sample(&self, eta: f64) -> SampledComponent {
        let length = self.length();
        let n = ((length / eta) - 1e-9).ceil().max(1.0) as usize;
        let step = length / n as f64;
        let count = if self.closed {
            n
        } else if length < eta / 2.0 {
            // too short to hold two points η/2 apart: one midpoint covers it
            return SampledComponent {
                points: vec![self.at(length / 2.0)],
                arclengths: vec![length / 2.0],
                length,
                closed: false,
            };
        } else {
            n + 1
        };
        let arclengths: Vec<f64> = (0..count).map(|k| k as f64 * step).collect();
        SampledComponent {
            points: arclengths.iter().map(|&s| self.at(s)).collect(),
            arclengths,
            length,
            closed: self.closed,
        }
    }
}

/// Parameter interval `[t0, t1] ⊆ [0, 1]` of the segment inside the box.
fn clip_segment(a: Vec2, b: Vec2, bb: &BBox) -> Option<(f64, f64)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x - bb.min.x),
        (d.x, bb.max.x - a.x),
        (-d.y, a.y - bb.min.y),
        (d.y, bb.max.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Pieces of the full circle inside the box.
fn clip_circle(c: Vec2, r: f64, bb: &BBox) -> Vec<Piece> {
    let mut cuts = Vec::new();
    for (axis_x, v) in [(true, bb.min.x), (true, bb.max.x), (false, bb.min.y), (false, bb.max.y)] {
        let off = if axis_x { v - c.x } else { v - c.y };
        if off.abs() < r {
            let a = (off / r).acos();
            // x = c.x + r cos t  or  y = c.y + r sin t
            let (t1, t2) = if axis_x { (a, -a) } else { (PI / 2.0 - a, PI / 2.0 + a) };
            cuts.push(t1.rem_euclid(TAU));
            cuts.push(t2.rem_euclid(TAU));
        }
    }
    let inside = |t: f64| bb.contains(c + Vec2::from_angle(t) * r, 0.0);
    if cuts.is_empty() {
        return if inside(0.0) {
            vec![Piece {
                prims: vec![Prim::Arc { c, r, t0: 0.0, t1: TAU }],
                closed: true,
            }]
        } else {
            Vec::new()
        };
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let n = cuts.len();
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let t0 = cuts[i];
        let t1 = if i + 1 < n { cuts[i + 1] } else { cuts[0] + TAU };
        if t1 - t0 > 1e-15 && inside((t0 + t1) / 2.0) {
            match arcs.last_mut() {
                Some(last) if (last.1 - t0).abs() < 1e-15 => last.1 = t1,
                _ => arcs.push((t0, t1)),
            }
        }
    }
    if arcs.len() > 1 {
        let (f0, f1) = arcs[0];
        let last = *arcs.last().unwrap();
        if (last.1 - (f0 + TAU)).abs() < 1e-12 {
            arcs.pop();
            arcs[0] = (last.0 - TAU, f1);
        }
    }
    if arcs.len() == 1 && arcs[0].1 - arcs[0].0 >= TAU - 1e-12 {
        return vec![Piece {
            prims: vec![Prim::Arc { c, r, t0: 0.0, t1: TAU }],
            closed: true,
        }];
    }
    arcs.into_iter()
        .map(|(t0, t1)| Piece {
            prims: vec![Prim::Arc { c, r, t0, t1 }],
            closed: false,
        })
        .collect()
}

/// Pieces of a polygonal chain inside the box; `closed` chains wrap.
fn clip_chain(verts: &[Vec2], closed: bool, bb: &BBox) -> Vec<Piece> {
    let m = verts.len();
    let edges: Vec<(Vec2, Vec2)> = if closed {
        (0..m).map(|i| (verts[i], verts[(i + 1) % m])).collect()
    } else {
        verts.windows(2).map(|w| (w[0], w[1])).collect()
    };
    let clipped: Vec<Option<(f64, f64)>> = edges
        .iter()
        .map(|&(a, b)| clip_segment(a, b, bb).filter(|(t0, t1)| t1 > t0 || a == b))
        .collect();
    let full = |c: &Option<(f64, f64)>| matches!(c, Some((t0, t1)) if *t0 <= 0.0 && *t1 >= 1.0);
    if closed && clipped.iter().all(full) {
        return vec![Piece {
            prims: edges.iter().map(|&(a, b)| Prim::Seg(a, b)).collect(),
            closed: true,
        }];
    }
    // an edge continues the previous piece if both meet at the shared vertex
    let joins = |i: usize| -> bool {
        let prev = if i == 0 {
            if !closed {
                return false;
            }
            edges.len() - 1
        } else {
            i - 1
        };
        matches!((clipped[prev], clipped[i]), (Some((_, e)), Some((s, _))) if e >= 1.0 && s <= 0.0)
    };
    let n = edges.len();
    let start = if closed { (0..n).find(|&i| !joins(i)).unwrap_or(0) } else { 0 };
    let mut pieces: Vec<Piece> = Vec::new();
    let mut current: Vec<Prim> = Vec::new();
    for k in 0..n {
        let i = (start + k) % n;
        let Some((t0, t1)) = clipped[i] else {
            if !current.is_empty() {
                pieces.push(Piece { prims: std::mem::take(&mut current), closed: false });
            }
            continue;
        };
        if !joins(i) && !current.is_empty() {
            pieces.push(Piece { prims: std::mem::take(&mut current), closed: false });
        }
        let (a, b) = edges[i];
        current.push(Prim::Seg(a + (b - a) * t0, a + (b - a) * t1));
    }
    if !current.is_empty() {
        pieces.push(Piece { prims: current, closed: false });
    }
    pieces.retain(|p| p.length() > 0.0);
    pieces
}

/// Length of the segment `[a, b]` inside the closed disk `B_r(c)`.
pub fn segment_length_in_ball(a: Vec2, b: Vec2, c: Vec2, r: f64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sq();
    if l2 == 0.0 {
        return 0.0;
    }
    let w = a - c;
    let bq = w.dot(d) / l2;
    let cq = (w.norm_sq() - r * r) / l2;
    let disc = bq * bq - cq;
    if disc <= 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t0 = (-bq - s).max(0.0);
    let t1 = (-bq + s).min(1.0);
    (t1 - t0).max(0.0) * l2.sqrt()
}

/// Length of the circle `|x − o| = rho` inside the closed disk `B_r(c)`.
pub fn circle_length_in_ball(o: Vec2, rho: f64, c: Vec2, r: f64) -> f64 {
    let d = o.dist(c);
    if d + rho <= r {
        return TAU * rho;
    }
    if d >= r + rho || rho >= d + r {
        return 0.0;
    }
    let cos_half = ((d * d + rho * rho - r * r) / (2.0 * d * rho)).clamp(-1.0, 1.0);
    2.0 * rho * cos_half.acos()
}

impl Trajectory {
    /// Lines orthogonal to `normal` at signed offsets `offsets` along it.
    pub fn parallel_lines(normal: Direction, offsets: DiscreteSet) -> Result<Self, TrajectoryError> {
        if offsets.dim() != 1 {
            return Err(TrajectoryError::Invalid("line offsets must be a 1-D set".into()));
        }
        Ok(Trajectory {
            family: Family::ParallelLines { normal, offsets },
        })
    }

    pub fn dilated_boundary(body: ConvexBody, dilations: DiscreteSet) -> Result<Self, TrajectoryError> {
        if body.origin_depth() <= TOL_GEOM {
            return Err(GeometryError::OriginNotInterior.into());
        }
        density::require_positive(&dilations)?;
        Ok(Trajectory {
            family: Family::DilatedBoundary { body, dilations },
        })
    }

    pub fn translated_circles(radius: f64, centers: DiscreteSet) -> Result<Self, TrajectoryError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(TrajectoryError::Invalid(format!("circle radius must be positive, got {radius}")));
        }
        if centers.dim() != 2 {
            return Err(TrajectoryError::Invalid("circle centers must be a 2-D set".into()));
        }
        Ok(Trajectory {
            family: Family::TranslatedCircles { radius, centers },
        })
    }

    /// Chains need at least one vertex; degenerate edges are accepted here
    /// and flagged by the length checks.
    pub fn polyline(chains: Vec<Vec<Vec2>>) -> Result<Self, TrajectoryError> {
        if chains.is_empty() || chains.iter().any(|c| c.is_empty()) {
            return Err(TrajectoryError::Invalid("polyline needs nonempty chains".into()));
        }
        if chains.iter().flatten().any(|p| !p.is_finite()) {
            return Err(TrajectoryError::Invalid("non-finite polyline vertex".into()));
        }
        Ok(Trajectory {
            family: Family::Polyline { chains },
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::ParallelLines { .. } => "parallel_lines",
            Family::DilatedBoundary { .. } => "dilated_boundary",
            Family::TranslatedCircles { .. } => "translated_circles",
            Family::Polyline { .. } => "polyline",
        }
    }

    /// Dilation factors whose curves can meet the ball `B_r(c)`.
    fn dilations_near(body: &ConvexBody, q: &DiscreteSet, c: Vec2, r: f64) -> Result<Vec<f64>, TrajectoryError> {
        let g = body.gauge(c)?;
        let spread = r / body.origin_depth();
        let lo = (g - spread).max(0.0);
        Ok(q.points_in_interval(lo, g + spread)?)
    }

    /// Total length of `P` inside the closed ball `B_r(c)`.
    pub fn arc_length_in_ball(&self, c: Vec2, r: f64) -> Result<f64, TrajectoryError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(TrajectoryError::Invalid(format!("ball radius must be positive, got {r}")));
        }
        Ok(match &self.family {
            Family::ParallelLines { normal, offsets } => {
                let s = c.dot(normal.vec());
                offsets
                    .points_in_interval(s - r, s + r)?
                    .into_iter()
                    .map(|h| 2.0 * (r * r - (h - s) * (h - s)).max(0.0).sqrt())
                    .sum()
            }
            Family::DilatedBoundary { body, dilations } => {
                let qs = Self::dilations_near(body, dilations, c, r)?;
                match body.as_disk() {
                    Some((o, rho)) => qs.iter().map(|q| circle_length_in_ball(o * *q, rho * q, c, r)).sum(),
                    None => {
                        let v = body.vertices().unwrap();
                        qs.iter()
                            .map(|q| {
                                (0..v.len())
                                    .map(|i| segment_length_in_ball(v[i] * *q, v[(i + 1) % v.len()] * *q, c, r))
                                    .sum::<f64>()
                            })
                            .sum()
                    }
                }
            }
            Family::TranslatedCircles { radius, centers } => centers
                .points_in_disk(c, r + radius)?
                .into_iter()
                .map(|o| circle_length_in_ball(o, *radius, c, r))
                .sum(),
            Family::Polyline { chains } => chains
                .iter()
                .flat_map(|ch| ch.windows(2))
                .map(|w| segment_length_in_ball(w[0], w[1], c, r))
                .sum(),
        })
    }

    /// Uniform bound on `∫_{P ∩ B_r(u)} ds` over all centres `u`.
    ///
    /// Structured families are bounded from the separation of their
    /// parameter set; polylines by a sup over a centre grid of pitch `r/2`
    /// with balls enlarged to cover every ball of radius `r`.
    pub fn check_upper_length_condition(&self, r: f64) -> Result<UpperLength, TrajectoryError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(TrajectoryError::Invalid(format!("ball radius must be positive, got {r}")));
        }
        let exactness_of = |s: &DiscreteSet| {
            if s.truncation().is_some() {
                Exactness::Windowed
            } else {
                Exactness::Exact
            }
        };
        // number of u.d. points of separation δ in an interval of length w
        let count_1d = |w: f64, sep: Result<f64, DensityError>| -> Result<f64, TrajectoryError> {
            match sep {
                Ok(d) => Ok((w / d).floor() + 1.0),
                Err(DensityError::TooFewPoints) => Ok(1.0),
                Err(e) => Err(e.into()),
            }
        };
        Ok(match &self.family {
            Family::ParallelLines { offsets, .. } => UpperLength::Holds {
                bound: count_1d(2.0 * r, density::separation(offsets))? * 2.0 * r,
                exactness: exactness_of(offsets),
            },
            Family::DilatedBoundary { body, dilations } => {
                let n = count_1d(2.0 * r / body.origin_depth(), density::separation(dilations))?;
                UpperLength::Holds {
                    bound: n * TAU * r,
                    exactness: exactness_of(dilations),
                }
            }
            Family::TranslatedCircles { radius, centers } => {
                let n = match density::separation(centers) {
                    Ok(d) => (2.0 * (r + radius) / d + 1.0).powi(2).floor(),
                    Err(DensityError::TooFewPoints) => 1.0,
                    Err(e) => return Err(e.into()),
                };
                UpperLength::Holds {
                    bound: n * TAU * radius.min(r),
                    exactness: exactness_of(centers),
                }
            }
            Family::Polyline { chains } => {
                if let Some(ch) = chains.iter().find(|ch| ch.len() < 2 || ch.windows(2).any(|w| w[0] == w[1])) {
                    return Ok(UpperLength::Indeterminate {
                        reason: format!("degenerate chain starting at ({}, {})", ch[0].x, ch[0].y),
                    });
                }
                let pts: Vec<Vec2> = chains.iter().flatten().copied().collect();
                let (mut lo, mut hi) = (pts[0], pts[0]);
                for p in &pts {
                    lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
                }
                let pitch = r / 2.0;
                let reach = r + pitch * std::f64::consts::FRAC_1_SQRT_2;
                let nx = ((hi.x - lo.x + 2.0 * r) / pitch).ceil() as i64;
                let ny = ((hi.y - lo.y + 2.0 * r) / pitch).ceil() as i64;
                let mut bound: f64 = 0.0;
                for i in 0..=nx {
                    for j in 0..=ny {
                        let c = Vec2::new(lo.x - r + i as f64 * pitch, lo.y - r + j as f64 * pitch);
                        bound = bound.max(self.arc_length_in_ball(c, reach)?);
                    }
                }
                UpperLength::Holds {
                    bound,
                    exactness: Exactness::Windowed,
                }
            }
        })
    }

    /// `∫_{P ∩ B_δ(x)} ds ≥ δ` for all `δ ≤ r` and `x ∈ P`.
    ///
    /// Lines always pass. Closed convex curves pass for every `δ` up to
    /// their perimeter: either the curve leaves `B_δ(x)`, and both arcs from
    /// `x` to the exit have length at least `δ`, or it lies inside and
    /// contributes its full perimeter. Polylines are probed at vertices and
    /// edge midpoints over `δ = r, r/2, …, r/2⁸`.
    pub fn check_local_lower_length(&self, r: f64) -> Result<LowerLength, TrajectoryError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(TrajectoryError::Invalid(format!("radius must be positive, got {r}")));
        }
        let curvature_scale = |threshold: f64| {
            if r <= threshold {
                LowerLength::Holds {
                    threshold: Some(threshold),
                }
            } else {
                LowerLength::Indeterminate {
                    reason: format!("radius {r} exceeds the certified scale {threshold}"),
                }
            }
        };
        Ok(match &self.family {
            Family::ParallelLines { .. } => LowerLength::Holds { threshold: None },
            Family::DilatedBoundary { body, dilations } => match dilations.infimum() {
                Some(q) => curvature_scale(q * body.perimeter()),
                None => LowerLength::Indeterminate {
                    reason: "dilation set has no smallest element".into(),
                },
            },
            Family::TranslatedCircles { radius, .. } => curvature_scale(TAU * radius),
            Family::Polyline { chains } => {
                let mut probes: Vec<Vec2> = chains.iter().flatten().copied().collect();
                probes.extend(chains.iter().flat_map(|ch| ch.windows(2)).map(|w| (w[0] + w[1]) * 0.5));
                for x in probes {
                    for k in 0..=8 {
                        let delta = r / f64::from(1u32 << k);
                        let length = self.arc_length_in_ball(x, delta)?;
                        if length < delta * (1.0 - 1e-12) {
                            return Ok(LowerLength::Violated { at: x, delta, length });
                        }
                    }
                }
                LowerLength::Holds { threshold: None }
            }
        })
    }

    fn pieces(&self, bb: &BBox) -> Result<Vec<Piece>, TrajectoryError> {
        let mut out = Vec::new();
        match &self.family {
            Family::ParallelLines { normal, offsets } => {
                let v = normal.vec();
                let u = v.perp();
                let proj: Vec<f64> = bb.corners().iter().map(|p| p.dot(v)).collect();
                let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let span = bb.half_diagonal() + 1.0;
                let s0 = bb.center().dot(u);
                for h in offsets.points_in_interval(lo, hi)? {
                    let a = v * h + u * (s0 - span);
                    let b = v * h + u * (s0 + span);
                    if let Some((t0, t1)) = clip_segment(a, b, bb) {
                        if t1 > t0 {
                            out.push(Piece {
                                prims: vec![Prim::Seg(a + (b - a) * t0, a + (b - a) * t1)],
                                closed: false,
                            });
                        }
                    }
                }
            }
            Family::DilatedBoundary { body, dilations } => {
                let hi = bb
                    .corners()
                    .iter()
                    .map(|p| body.gauge(*p))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                let lo = (body.gauge(bb.center())? - bb.half_diagonal() / body.origin_depth()).max(0.0);
                for q in dilations.points_in_interval(lo, hi)? {
                    match body.as_disk() {
                        Some((o, rho)) => out.extend(clip_circle(o * q, rho * q, bb)),
                        None => {
                            let v: Vec<Vec2> = body.vertices().unwrap().iter().map(|p| *p * q).collect();
                            out.extend(clip_chain(&v, true, bb));
                        }
                    }
                }
            }
            Family::TranslatedCircles { radius, centers } => {
                let g = bb.grown(*radius);
                for o in centers.points_in_box(g.min, g.max)? {
                    out.extend(clip_circle(o, *radius, bb));
                }
            }
            Family::Polyline { chains } => {
                for ch in chains {
                    if ch.len() >= 2 {
                        out.extend(clip_chain(ch, false, bb));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Equal-arc samples of each connected piece of `P ∩ bbox`, spacing at
    /// most `eta` along the curve.
    pub fn sample_components(&self, eta: f64, bbox: &BBox) -> Result<Vec<SampledComponent>, TrajectoryError> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(TrajectoryError::Invalid(format!("eta must be positive, got {eta}")));
        }
        Ok(self.pieces(bbox)?.iter().map(|p| p.sample(eta)).collect())
    }

    /// Points `Λ ⊂ P` with `P ∩ bbox ⊂ Λ + B_η(0)` and separation at least
    /// `η/2`. Samples of different components closer than `η/2` to an
    /// already kept sample are dropped, which keeps the cover within `η`.
    pub fn discretize(&self, eta: f64, bbox: &BBox) -> Result<Vec<PathSample>, TrajectoryError> {
        let comps = self.sample_components(eta, bbox)?;
        let cell = eta / 2.0;
        let key = |p: Vec2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
        let mut grid: HashMap<(i64, i64), Vec<(Vec2, usize)>> = HashMap::new();
        let mut out = Vec::new();
        for (id, comp) in comps.iter().enumerate() {
            for (p, s) in comp.points.iter().zip(&comp.arclengths) {
                let (kx, ky) = key(*p);
                let clash = (-1..=1).any(|dx| {
                    (-1..=1).any(|dy| {
                        grid.get(&(kx + dx, ky + dy))
                            .is_some_and(|v| v.iter().any(|(q, c)| *c != id && q.dist(*p) < cell))
                    })
                });
                if clash {
                    continue;
                }
                grid.entry((kx, ky)).or_default().push((*p, id));
                out.push(PathSample {
                    point: *p,
                    component: id,
                    arclength: *s,
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{directed_hausdorff, hausdorff_distance};

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn integer_lines() -> Trajectory {
        Trajectory::parallel_lines(Direction::e1(), DiscreteSet::integers()).unwrap()
    }

    fn unit_circle() -> Trajectory {
        let c = DiscreteSet::explicit_2d(vec![Vec2::ZERO], 100.0).unwrap();
        Trajectory::translated_circles(1.0, c).unwrap()
    }

    fn naturals_circles() -> Trajectory {
        Trajectory::dilated_boundary(ConvexBody::disk(Vec2::ZERO, 1.0).unwrap(), DiscreteSet::naturals()).unwrap()
    }

    /// Midpoint-rule length of `P ∩ B_r(c)` from dense curve samples.
    fn quadrature_length(p: &Trajectory, c: Vec2, r: f64) -> f64 {
        let bb = BBox::new(c - v(r + 1.0, r + 1.0), c + v(r + 1.0, r + 1.0)).unwrap();
        let mut total = 0.0;
        for comp in p.sample_components(1e-4, &bb).unwrap() {
            let n = comp.points.len();
            let h = if comp.closed { comp.length / n as f64 } else { comp.length / (n - 1) as f64 };
            let m = if comp.closed { n } else { n - 1 };
            for i in 0..m {
                let a = comp.points[i];
                let b = comp.points[(i + 1) % n];
                if ((a + b) * 0.5).dist(c) <= r {
                    total += h;
                }
            }
        }
        total
    }

    #[test]
    fn arc_length_examples() {
        let one_line =
            Trajectory::parallel_lines(Direction::e1(), DiscreteSet::explicit(vec![0.0], 50.0).unwrap()).unwrap();
        assert!((one_line.arc_length_in_ball(v(0.0, 3.0), 2.5).unwrap() - 5.0).abs() < 1e-12);
        let c = unit_circle();
        assert!((c.arc_length_in_ball(Vec2::ZERO, 3.0).unwrap() - TAU).abs() < 1e-12);
        let l = integer_lines().arc_length_in_ball(v(0.5, 0.0), 1.0).unwrap();
        assert!((l - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((quadrature_length(&integer_lines(), v(0.5, 0.0), 1.0) - 2.0 * 3f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn arc_length_matches_quadrature() {
        let cases = [
            (naturals_circles(), v(1.7, 0.4), 1.3),
            (unit_circle(), v(0.9, -0.6), 0.8),
            (
                Trajectory::dilated_boundary(ConvexBody::centered_square(1.0).unwrap(), DiscreteSet::naturals())
                    .unwrap(),
                v(1.2, 1.9),
                1.1,
            ),
        ];
        for (p, c, r) in cases {
            let exact = p.arc_length_in_ball(c, r).unwrap();
            let quad = quadrature_length(&p, c, r);
            assert!((exact - quad).abs() < 1e-3, "{} {exact} vs {quad}", p.family_name());
        }
    }

    #[test]
    fn arc_length_truncation_error() {
        let c = unit_circle();
        assert!(matches!(
            c.arc_length_in_ball(v(99.0, 0.0), 3.0),
            Err(TrajectoryError::UnboundedContribution { .. })
        ));
    }

    #[test]
    fn upper_length_examples() {
        match integer_lines().check_upper_length_condition(1.0).unwrap() {
            UpperLength::Holds { bound, exactness } => {
                assert_eq!(bound, 6.0);
                assert_eq!(exactness, Exactness::Exact);
            }
            o => panic!("{o:?}"),
        }
        match naturals_circles().check_upper_length_condition(1.0).unwrap() {
            UpperLength::Holds { bound, .. } => assert!((bound - 3.0 * TAU).abs() < 1e-12),
            o => panic!("{o:?}"),
        }
        let degenerate = Trajectory::polyline(vec![vec![v(1.0, 1.0)]]).unwrap();
        assert!(matches!(
            degenerate.check_upper_length_condition(1.0).unwrap(),
            UpperLength::Indeterminate { .. }
        ));
    }

    #[test]
    fn upper_bound_dominates_sampled_balls() {
        let fams = [integer_lines(), naturals_circles()];
        for p in fams {
            let UpperLength::Holds { bound, .. } = p.check_upper_length_condition(1.0).unwrap() else {
                panic!()
            };
            for i in 0..40 {
                let c = v(0.37 * i as f64, 0.91 * (i % 7) as f64);
                assert!(p.arc_length_in_ball(c, 1.0).unwrap() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn lower_length_examples() {
        assert!(integer_lines().check_local_lower_length(1.0).unwrap().holds());
        assert!(unit_circle().check_local_lower_length(0.5).unwrap().holds());
        // arc of a unit circle inside B_δ(x), x on the circle, exceeds δ
        for k in 1..=50 {
            let delta = 0.5 * k as f64 / 50.0;
            let arc = circle_length_in_ball(Vec2::ZERO, 1.0, v(1.0, 0.0), delta);
            assert!(arc >= delta, "{delta} {arc}");
        }
        let dashes: Vec<Vec<Vec2>> = (0..5)
            .map(|i| vec![v(i as f64, 0.0), v(i as f64 + 0.01, 0.0)])
            .collect();
        match Trajectory::polyline(dashes).unwrap().check_local_lower_length(0.5).unwrap() {
            LowerLength::Violated { at, delta, length } => {
                assert_eq!(at, v(0.0, 0.0));
                assert_eq!(delta, 0.5);
                assert!((length - 0.01).abs() < 1e-12);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn discretize_examples() {
        let bb = BBox::new(v(-5.0, -5.0), v(5.0, 5.0)).unwrap();
        let pts = unit_circle().discretize(TAU / 8.0, &bb).unwrap();
        assert_eq!(pts.len(), 8);
        let sep = pts[0].point.dist(pts[1].point);
        assert!((sep - 2.0 * (PI / 8.0).sin()).abs() < 1e-12);

        let seg = Trajectory::polyline(vec![vec![v(0.0, 0.0), v(1.0, 0.0)]]).unwrap();
        assert_eq!(seg.discretize(0.25, &bb).unwrap().len(), 5);

        let unit = BBox::new(v(0.0, 0.0), v(1.0, 1.0)).unwrap();
        let pts = integer_lines().discretize(0.5, &unit).unwrap();
        assert!(pts.iter().all(|p| p.point.x == 0.0 || p.point.x == 1.0));
        let lam: Vec<Vec2> = pts.iter().map(|p| p.point).collect();
        let dense: Vec<Vec2> = (0..=1000)
            .flat_map(|i| [v(0.0, i as f64 / 1000.0), v(1.0, i as f64 / 1000.0)])
            .collect();
        assert!(hausdorff_distance(&dense, &lam).unwrap() <= 0.5);
    }

    #[test]
    fn discretize_covers_and_separates() {
        let bb = BBox::new(v(-3.2, -2.1), v(4.3, 3.7)).unwrap();
        let fams = [
            integer_lines(),
            naturals_circles(),
            Trajectory::dilated_boundary(ConvexBody::centered_square(1.0).unwrap(), DiscreteSet::naturals())
                .unwrap(),
            Trajectory::translated_circles(0.7, DiscreteSet::integer_lattice()).unwrap(),
        ];
        for p in fams {
            for eta in [0.3, 0.11] {
                let lam: Vec<Vec2> = p.discretize(eta, &bb).unwrap().iter().map(|s| s.point).collect();
                let dense: Vec<Vec2> = p
                    .sample_components(eta / 50.0, &bb)
                    .unwrap()
                    .into_iter()
                    .flat_map(|c| c.points)
                    .collect();
                let h = directed_hausdorff(&dense, &lam).unwrap();
                assert!(h <= eta, "{} eta={eta} cover={h}", p.family_name());
                for (i, a) in lam.iter().enumerate() {
                    for b in &lam[i + 1..] {
                        assert!(a.dist(*b) >= eta / 2.0 - 1e-12, "{}", p.family_name());
                    }
                }
                assert!(lam.iter().all(|q| bb.contains(*q, 1e-12)));
            }
        }
    }

    #[test]
    fn dilated_polygon_perimeter_scales() {
        let sq = ConvexBody::centered_square(1.0).unwrap();
        let q = DiscreteSet::explicit(vec![1.0, 2.5, 4.0], 10.0).unwrap();
        let p = Trajectory::dilated_boundary(sq.clone(), q).unwrap();
        let bb = BBox::new(v(-9.0, -9.0), v(9.0, 9.0)).unwrap();
        let comps = p.sample_components(0.1, &bb).unwrap();
        assert_eq!(comps.len(), 3);
        let mut lens: Vec<f64> = comps.iter().map(|c| c.length).collect();
        lens.sort_by(f64::total_cmp);
        for (l, q) in lens.iter().zip([1.0, 2.5, 4.0]) {
            assert!((l - q * sq.perimeter()).abs() <= 1e-12 * l);
        }
        assert!(comps.iter().all(|c| c.closed));
    }

    #[test]
    fn clipped_circle_arcs_sum_to_inside_length() {
        let bb = BBox::new(v(-0.5, -2.0), v(2.0, 0.3)).unwrap();
        let pieces = clip_circle(Vec2::ZERO, 1.0, &bb);
        let total: f64 = pieces.iter().map(Piece::length).sum();
        // brute force over angles
        let n = 200_000;
        let inside = (0..n)
            .filter(|k| bb.contains(Vec2::from_angle(TAU * (*k as f64 + 0.5) / n as f64), 0.0))
            .count();
        assert!((total - TAU * inside as f64 / n as f64).abs() < 1e-4);
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"family":"parallel_lines","normal":[1,0],"offsets":{"kind":"arithmetic","step":1}}"#;
        let t: Trajectory = serde_json::from_str(s).unwrap();
        assert_eq!(t, integer_lines());
        let back: Trajectory = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"family":"translated_circles","radius":-1,"centers":{"kind":"lattice","basis":[[1,0],[0,1]]}}"#;
        assert!(serde_json::from_str::<Trajectory>(bad).is_err());
        let bad_q = r#"{"family":"dilated_boundary","body":{"kind":"disk","center":[0,0],"radius":1},"dilations":{"kind":"arithmetic","step":1}}"#;
        assert!(serde_json::from_str::<Trajectory>(bad_q).is_err());
    }
}
