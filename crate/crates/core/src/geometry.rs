//! Convex-geometry kernel for planar spectra and dilation shapes.
//!
//! Bodies are convex polygons or disks. Polygons are kept in canonical form:
//! counter-clockwise, strictly convex, starting at the lexicographically
//! smallest vertex. All predicates take an explicit tolerance; [`TOL_GEOM`] is
//! the default used throughout the crate.

use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Absolute tolerance for membership tests and vertex deduplication.
pub const TOL_GEOM: f64 = 1e-9;

/// Vertex count of the polygonal inscription used for the polar of an
/// off-centre disk (an ellipse, which has no exact representation here).
pub const POLAR_DISK_VERTICES: usize = 720;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate body: {0}")]
    Degenerate(String),
    #[error("origin is not strictly interior to the body")]
    OriginNotInterior,
    #[error("point set is empty")]
    EmptySet,
    #[error("direction must be a nonzero finite vector")]
    BadDirection,
}

/// Unit vector in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec2", into = "Vec2")]
pub struct Direction(Vec2);

impl Direction {
    /// Accepts `v` only if its norm is within `1e-12` of one.
    pub fn new(v: Vec2) -> Result<Self, GeometryError> {
        if v.is_finite() && (v.norm() - 1.0).abs() <= 1e-12 {
            Ok(Direction(v))
        } else {
            Err(GeometryError::BadDirection)
        }
    }

    pub fn normalize(v: Vec2) -> Result<Self, GeometryError> {
        let n = v.norm();
        if !v.is_finite() || n == 0.0 {
            return Err(GeometryError::BadDirection);
        }
        Ok(Direction(v / n))
    }

    pub fn from_angle(theta: f64) -> Self {
        Direction(Vec2::from_angle(theta))
    }

    pub const fn e1() -> Self {
        Direction(Vec2::new(1.0, 0.0))
    }

    pub const fn e2() -> Self {
        Direction(Vec2::new(0.0, 1.0))
    }

    #[inline]
    pub fn vec(self) -> Vec2 {
        self.0
    }
}

impl TryFrom<Vec2> for Direction {
    type Error = GeometryError;
    /// JSON inputs are normalized rather than rejected.
    fn try_from(v: Vec2) -> Result<Self, Self::Error> {
        Direction::normalize(v)
    }
}

impl From<Direction> for Vec2 {
    fn from(d: Direction) -> Self {
        d.0
    }
}

/// Three-valued membership answer of [`ConvexBody::contains`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Closure of the set of extreme points of a body.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtremeSet {
    Points(Vec<Vec2>),
    /// Every boundary point of the disk is extreme.
    Circle { center: Vec2, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
enum Shape {
    Polygon(Vec<Vec2>),
    Disk { center: Vec2, radius: f64 },
}

/// Compact convex planar set of positive area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyRepr", into = "BodyRepr")]
pub struct ConvexBody {
    shape: Shape,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BodyRepr {
    Polygon { vertices: Vec<Vec2> },
    Disk { center: Vec2, radius: f64 },
}

impl TryFrom<BodyRepr> for ConvexBody {
    type Error = GeometryError;
    fn try_from(r: BodyRepr) -> Result<Self, Self::Error> {
        match r {
            BodyRepr::Polygon { vertices } => ConvexBody::hull(&vertices),
            BodyRepr::Disk { center, radius } => ConvexBody::disk(center, radius),
        }
    }
}

impl From<ConvexBody> for BodyRepr {
    fn from(b: ConvexBody) -> Self {
        match b.shape {
            Shape::Polygon(vertices) => BodyRepr::Polygon { vertices },
            Shape::Disk { center, radius } => BodyRepr::Disk { center, radius },
        }
    }
}

/// Convex hull by monotone chain. Points within `tol` of a hull edge line are
/// dropped, so the output is strictly convex, counter-clockwise and starts at
/// the lexicographically smallest point.
pub fn convex_hull(points: &[Vec2], tol: f64) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) <= tol);
    if pts.len() < 3 {
        return pts;
    }
    let turn_ok = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o) > tol * (b - o).norm();
    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && !turn_ok(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && !turn_ok(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn shoelace(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Rotates a CCW polygon so its first vertex is the lowest (then leftmost).
fn start_at_bottom(v: &[Vec2]) -> Vec<Vec2> {
    let k = (0..v.len())
        .min_by(|&i, &j| v[i].y.total_cmp(&v[j].y).then(v[i].x.total_cmp(&v[j].x)))
        .unwrap_or(0);
    v[k..].iter().chain(v[..k].iter()).copied().collect()
}

/// Minkowski sum of two CCW convex polygons by merging edge sequences.
fn minkowski_sum(a: &[Vec2], b: &[Vec2]) -> Vec<Vec2> {
    let a = start_at_bottom(a);
    let b = start_at_bottom(b);
    let (n, m) = (a.len(), b.len());
    let mut out = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0usize, 0usize);
    while i < n || j < m {
        out.push(a[i % n] + b[j % m]);
        let ea = a[(i + 1) % n] - a[i % n];
        let eb = b[(j + 1) % m] - b[j % m];
        let c = if i >= n {
            -1.0
        } else if j >= m {
            1.0
        } else {
            ea.cross(eb)
        };
        if c > 0.0 {
            i += 1;
        } else if c < 0.0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    out
}

impl ConvexBody {
    /// Convex hull of `points`. Fails if the hull has area below [`TOL_GEOM`].
    pub fn hull(points: &[Vec2]) -> Result<Self, GeometryError> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::Degenerate("non-finite vertex".into()));
        }
        let h = convex_hull(points, TOL_GEOM);
        if h.len() < 3 {
            return Err(GeometryError::Degenerate(format!(
                "hull has {} vertices",
                h.len()
            )));
        }
        let area = shoelace(&h);
        if area < TOL_GEOM {
            return Err(GeometryError::Degenerate(format!("area {area:e}")));
        }
        Ok(ConvexBody {
            shape: Shape::Polygon(h),
        })
    }

    pub fn disk(center: Vec2, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() || !radius.is_finite() || radius <= 0.0 {
            return Err(GeometryError::Degenerate(format!("disk radius {radius}")));
        }
        Ok(ConvexBody {
            shape: Shape::Disk { center, radius },
        })
    }

    /// Axis-aligned rectangle `[min.x, max.x] × [min.y, max.y]`.
    pub fn rect(min: Vec2, max: Vec2) -> Result<Self, GeometryError> {
        ConvexBody::hull(&[
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    /// Square `[-h, h]²`.
    pub fn centered_square(h: f64) -> Result<Self, GeometryError> {
        ConvexBody::rect(Vec2::new(-h, -h), Vec2::new(h, h))
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.shape, Shape::Disk { .. })
    }

    /// Canonical CCW vertex list, or `None` for disks.
    pub fn vertices(&self) -> Option<&[Vec2]> {
        match &self.shape {
            Shape::Polygon(v) => Some(v),
            Shape::Disk { .. } => None,
        }
    }

    /// `(center, radius)` for disks.
    pub fn as_disk(&self) -> Option<(Vec2, f64)> {
        match self.shape {
            Shape::Disk { center, radius } => Some((center, radius)),
            Shape::Polygon(_) => None,
        }
    }

    /// Edges as `(start, end, outward unit normal, offset)` with
    /// `⟨normal, x⟩ ≤ offset` describing the polygon.
    fn edges(v: &[Vec2]) -> impl Iterator<Item = (Vec2, Vec2, Vec2, f64)> + '_ {
        let n = v.len();
        (0..n).map(move |i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            let e = b - a;
            let nrm = Vec2::new(e.y, -e.x) / e.norm();
            (a, b, nrm, nrm.dot(a))
        })
    }

    /// Support function `max_{u ∈ body} ⟨u, y⟩`.
    pub fn support(&self, y: Vec2) -> f64 {
        match &self.shape {
            Shape::Polygon(v) => v.iter().map(|p| p.dot(y)).fold(f64::NEG_INFINITY, f64::max),
            Shape::Disk { center, radius } => center.dot(y) + radius * y.norm(),
        }
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(v) => shoelace(v),
            Shape::Disk { radius, .. } => PI * radius * radius,
        }
    }

    pub fn perimeter(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(v) => Self::edges(v).map(|(a, b, _, _)| a.dist(b)).sum(),
            Shape::Disk { radius, .. } => 2.0 * PI * radius,
        }
    }

    /// Area centroid (the centre for disks).
    pub fn centroid(&self) -> Vec2 {
        match &self.shape {
            Shape::Polygon(v) => {
                let n = v.len();
                let mut acc = Vec2::ZERO;
                let mut a2 = 0.0;
                for i in 0..n {
                    let c = v[i].cross(v[(i + 1) % n]);
                    acc += (v[i] + v[(i + 1) % n]) * c;
                    a2 += c;
                }
                acc / (3.0 * a2)
            }
            Shape::Disk { center, .. } => *center,
        }
    }

    /// Image under `x ↦ s·x` (dilation about the origin), `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self, GeometryError> {
        match &self.shape {
            Shape::Polygon(v) => {
                let w: Vec<Vec2> = v.iter().map(|p| *p * s).collect();
                ConvexBody::hull(&w)
            }
            Shape::Disk { center, radius } => ConvexBody::disk(*center * s, radius * s),
        }
    }

    pub fn translated(&self, t: Vec2) -> Self {
        let shape = match &self.shape {
            Shape::Polygon(v) => Shape::Polygon(v.iter().map(|p| *p + t).collect()),
            Shape::Disk { center, radius } => Shape::Disk {
                center: *center + t,
                radius: *radius,
            },
        };
        ConvexBody { shape }
    }

    /// Signed Euclidean distance to the boundary: negative inside.
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        match &self.shape {
            Shape::Polygon(v) => {
                let s = Self::edges(v)
                    .map(|(_, _, n, h)| n.dot(x) - h)
                    .fold(f64::NEG_INFINITY, f64::max);
                if s <= 0.0 {
                    s
                } else {
                    Self::edges(v)
                        .map(|(a, b, _, _)| point_segment_distance(x, a, b))
                        .fold(f64::INFINITY, f64::min)
                }
            }
            Shape::Disk { center, radius } => x.dist(*center) - radius,
        }
    }

    /// Inside if signed distance `< -tol`, Outside if `> tol`, else Boundary.
    pub fn contains(&self, x: Vec2, tol: f64) -> Containment {
        let d = self.signed_distance(x);
        if d < -tol {
            Containment::Inside
        } else if d > tol {
            Containment::Outside
        } else {
            Containment::Boundary
        }
    }

    /// `Ω − Ω = {x − y : x, y ∈ Ω}`, always origin-symmetric.
    pub fn minkowski_self_difference(&self) -> Self {
        match &self.shape {
            Shape::Polygon(v) => {
                let neg: Vec<Vec2> = v.iter().map(|p| -*p).collect();
                let sum = minkowski_sum(v, &neg);
                let shape = Shape::Polygon(convex_hull(&sum, TOL_GEOM));
                ConvexBody { shape }
            }
            Shape::Disk { radius, .. } => ConvexBody {
                shape: Shape::Disk {
                    center: Vec2::ZERO,
                    radius: 2.0 * radius,
                },
            },
        }
    }

    /// Distance from the origin to the boundary when the origin is inside,
    /// negative otherwise.
    pub fn origin_depth(&self) -> f64 {
        -self.signed_distance(Vec2::ZERO)
    }

    /// Polar set `{x : ⟨x, y⟩ ≤ 1 for all y in body}`.
    ///
    /// Polygon edges `⟨x, n⟩ = h` map to vertices `n / h`. A disk centred at
    /// the origin maps to the disk of reciprocal radius; an off-centre disk
    /// has an elliptical polar, returned as a [`POLAR_DISK_VERTICES`]-gon
    /// inscribed through `u / H(u)`.
    pub fn polar_dual(&self) -> Result<Self, GeometryError> {
        if self.origin_depth() <= TOL_GEOM {
            return Err(GeometryError::OriginNotInterior);
        }
        match &self.shape {
            Shape::Polygon(v) => {
                let pts: Vec<Vec2> = Self::edges(v).map(|(_, _, n, h)| n / h).collect();
                ConvexBody::hull(&pts)
            }
            Shape::Disk { center, radius } => {
                if *center == Vec2::ZERO {
                    return ConvexBody::disk(Vec2::ZERO, 1.0 / radius);
                }
                let pts: Vec<Vec2> = (0..POLAR_DISK_VERTICES)
                    .map(|k| {
                        let u = Vec2::from_angle(2.0 * PI * k as f64 / POLAR_DISK_VERTICES as f64);
                        u / self.support(u)
                    })
                    .collect();
                ConvexBody::hull(&pts)
            }
        }
    }

    pub fn extreme_points(&self) -> ExtremeSet {
        match &self.shape {
            Shape::Polygon(v) => ExtremeSet::Points(v.clone()),
            Shape::Disk { center, radius } => ExtremeSet::Circle {
                center: *center,
                radius: *radius,
            },
        }
    }

    /// Length of the longest segment in the body parallel to `v`.
    pub fn max_chord_length(&self, v: Direction) -> f64 {
        let (a, b) = self.longest_chord(v);
        a.dist(b)
    }

    /// Endpoints of a longest segment in the body parallel to `v`.
    pub fn longest_chord(&self, v: Direction) -> (Vec2, Vec2) {
        let d = v.vec();
        match &self.shape {
            Shape::Polygon(verts) => {
                // Chord length is concave in the transverse offset, so the
                // maximum sits on a line through a vertex.
                let mut best = (verts[0], verts[0], 0.0);
                for &p in verts {
                    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                    let mut empty = false;
                    for (_, _, n, h) in Self::edges(verts) {
                        let a = n.dot(d);
                        let b = h - n.dot(p);
                        if a > 1e-15 {
                            hi = hi.min(b / a);
                        } else if a < -1e-15 {
                            lo = lo.max(b / a);
                        } else if b < -TOL_GEOM {
                            empty = true;
                        }
                    }
                    if !empty && hi - lo > best.2 {
                        best = (p + d * lo, p + d * hi, hi - lo);
                    }
                }
                (best.0, best.1)
            }
            Shape::Disk { center, radius } => (*center - d * *radius, *center + d * *radius),
        }
    }

    /// `max{t ≥ 0 : t·v ∈ body}`, or `None` if the origin is outside.
    pub fn radial_extent(&self, v: Direction) -> Option<f64> {
        if self.signed_distance(Vec2::ZERO) > TOL_GEOM {
            return None;
        }
        let d = v.vec();
        match &self.shape {
            Shape::Polygon(verts) => Some(
                Self::edges(verts)
                    .filter_map(|(_, _, n, h)| {
                        let a = n.dot(d);
                        (a > 1e-15).then(|| (h / a).max(0.0))
                    })
                    .fold(f64::INFINITY, f64::min),
            ),
            Shape::Disk { center, radius } => {
                let b = d.dot(*center);
                let disc = b * b - center.norm_sq() + radius * radius;
                Some((b + disc.max(0.0).sqrt()).max(0.0))
            }
        }
    }

    /// Minkowski gauge `inf{g > 0 : x ∈ g·body}`; requires the origin inside.
    pub fn gauge(&self, x: Vec2) -> Result<f64, GeometryError> {
        if self.origin_depth() <= TOL_GEOM {
            return Err(GeometryError::OriginNotInterior);
        }
        Ok(match &self.shape {
            Shape::Polygon(v) => Self::edges(v)
                .map(|(_, _, n, h)| n.dot(x) / h)
                .fold(0.0, f64::max),
            Shape::Disk { center, radius } => {
                let a = center.norm_sq() - radius * radius;
                let b = x.dot(*center);
                (b - (b * b - a * x.norm_sq()).max(0.0).sqrt()) / a
            }
        })
    }

    /// Largest distance from the origin to a point of the body.
    pub fn max_norm(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(v) => v.iter().map(|p| p.norm()).fold(0.0, f64::max),
            Shape::Disk { center, radius } => center.norm() + radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Polygon(v) => {
                let mut d: f64 = 0.0;
                for (i, a) in v.iter().enumerate() {
                    for b in &v[i + 1..] {
                        d = d.max(a.dist(*b));
                    }
                }
                d
            }
            Shape::Disk { radius, .. } => 2.0 * radius,
        }
    }

    /// Two points realising the diameter.
    pub fn diameter_pair(&self) -> (Vec2, Vec2) {
        match &self.shape {
            Shape::Polygon(v) => {
                let mut best = (v[0], v[1], 0.0);
                for (i, a) in v.iter().enumerate() {
                    for b in &v[i + 1..] {
                        let d = a.dist(*b);
                        if d > best.2 {
                            best = (*a, *b, d);
                        }
                    }
                }
                (best.0, best.1)
            }
            Shape::Disk { center, radius } => (
                *center - Vec2::new(*radius, 0.0),
                *center + Vec2::new(*radius, 0.0),
            ),
        }
    }

    /// Boundary outline; disks are sampled with `disk_points` vertices.
    pub fn outline(&self, disk_points: usize) -> Vec<Vec2> {
        match &self.shape {
            Shape::Polygon(v) => v.clone(),
            Shape::Disk { center, radius } => (0..disk_points)
                .map(|k| *center + Vec2::from_angle(2.0 * PI * k as f64 / disk_points as f64) * *radius)
                .collect(),
        }
    }
}

/// `max_{a ∈ A} min_{b ∈ B} |a − b|`.
pub fn directed_hausdorff(a: &[Vec2], b: &[Vec2]) -> Result<f64, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::EmptySet);
    }
    let mut worst: f64 = 0.0;
    for p in a {
        let mut best = f64::INFINITY;
        for q in b {
            let d = p.dist(*q);
            if d < best {
                best = d;
                if best <= worst {
                    break;
                }
            }
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Symmetric Hausdorff distance between two finite point samples.
pub fn hausdorff_distance(a: &[Vec2], b: &[Vec2]) -> Result<f64, GeometryError> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}
