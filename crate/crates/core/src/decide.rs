//! Exact stable-sampling predicates for the structured trajectory families,
//! and the logical transfer of a verdict to Paley–Wiener mobile sampling.

use crate::density::{self, DensityError, DensityReport, DiscreteSet, Exactness};
use crate::geometry::{ConvexBody, Direction, ExtremeSet, GeometryError, TOL_GEOM};
use crate::trajectory::{Family, Trajectory};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecideError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("condition (c) (uniform upper length bound) is required for the transfer")]
    MissingConditionC,
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    SS,
    NotSS,
    Boundary,
    Indeterminate,
}

/// Which decision rule produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `D⁻(Λ) > |Ω|` on the line.
    Beurling1d,
    /// `D⁻(H)·v ∉ Ω−Ω`.
    ParallelLines,
    /// `d⁻(Q)·v ∉ Ω−Ω` for every extreme `v` of the polar body.
    DilatedCurves,
    /// Disk-shaped `D` centred at the origin: `diam(Ω) < d⁻(Q)/ρ`.
    DilatedDiskDiameter,
    /// `D⁻(V) > 0`.
    TranslatedCircles,
    /// No rule covers the family (generic polylines).
    Unsupported,
}

/// Offending direction or a density value backing a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Point(Vec2),
    Value(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub rule: Rule,
    /// Signed distance of the tested point(s) to `∂(Ω−Ω)`, positive outside;
    /// the density itself for translated circles.
    pub margin: f64,
    pub witnesses: Vec<Witness>,
    pub exactness: Exactness,
    /// Largest window radius when the density is windowed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window_radius: Option<f64>,
}

impl Verdict {
    fn from_margin(rule: Rule, margin: f64, tol: f64, witnesses: Vec<Witness>, density: &DensityReport) -> Self {
        let status = if margin.abs() <= tol {
            Status::Boundary
        } else if margin > 0.0 {
            Status::SS
        } else {
            Status::NotSS
        };
        Verdict {
            status,
            rule,
            margin,
            witnesses,
            exactness: density.exactness,
            window_radius: density.window_radius,
        }
    }
}

/// Knobs shared by the predicates.
#[derive(Clone, Debug, PartialEq)]
pub struct DecideOptions {
    pub tol: f64,
    /// Window schedule for windowed densities; derived from the set if `None`.
    pub windows: Option<Vec<f64>>,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            tol: TOL_GEOM,
            windows: None,
        }
    }
}

impl DecideOptions {
    fn windows_for(&self, s: &DiscreteSet) -> Vec<f64> {
        self.windows.clone().unwrap_or_else(|| density::default_windows(s))
    }
}

/// Stable sampling on the line for the spectrum `[a, b]`.
pub fn beurling_1d(lambda: &DiscreteSet, a: f64, b: f64, opts: &DecideOptions) -> Result<Verdict, DecideError> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(DecideError::Invalid(format!("interval [{a}, {b}] must have b > a")));
    }
    if lambda.dim() != 1 {
        return Err(DensityError::WrongDimension { expected: 1 }.into());
    }
    let d = density::lower_uniform_density(lambda, &opts.windows_for(lambda))?;
    Ok(Verdict::from_margin(Rule::Beurling1d, d.value - (b - a), opts.tol, vec![Witness::Value(d.value)], &d))
}

/// Lines `⟨x, v⟩ = h`, `h ∈ H`: SS iff `D⁻(H)·v ∉ Ω−Ω`.
pub fn decide_parallel_lines(
    h: &DiscreteSet,
    normal: Direction,
    omega: &ConvexBody,
    opts: &DecideOptions,
) -> Result<Verdict, DecideError> {
    let d = density::lower_uniform_density(h, &opts.windows_for(h))?;
    let diff = omega.minkowski_self_difference();
    let margin = diff.signed_distance(normal.vec() * d.value);
    Ok(Verdict::from_margin(Rule::ParallelLines, margin, opts.tol, vec![Witness::Value(d.value)], &d))
}

/// Dilations `Q·∂D`: SS iff `d⁻(Q)·v ∉ Ω−Ω` for all `v ∈ Ext(D°)`.
///
/// A disk `D` centred at the origin has a circle of extreme points in its
/// polar; the test then reduces to comparing `diam(Ω)` with `d⁻(Q)/ρ`.
pub fn decide_dilated(
    body: &ConvexBody,
    q: &DiscreteSet,
    omega: &ConvexBody,
    opts: &DecideOptions,
) -> Result<Verdict, DecideError> {
    let polar = body.polar_dual()?;
    let d = density::symmetrized_density(q, &opts.windows_for(q))?;
    match polar.extreme_points() {
        ExtremeSet::Circle { center, radius } if center.norm() <= TOL_GEOM => {
            let margin = d.value * radius - omega.diameter();
            Ok(Verdict::from_margin(
                Rule::DilatedDiskDiameter,
                margin,
                opts.tol,
                vec![Witness::Value(d.value)],
                &d,
            ))
        }
        ExtremeSet::Circle { .. } => unreachable!("polar of a body with interior origin is centred or a polygon"),
        ExtremeSet::Points(ext) => {
            let diff = omega.minkowski_self_difference();
            let dists: Vec<(Vec2, f64)> = ext.iter().map(|w| (*w, diff.signed_distance(*w * d.value))).collect();
            let margin = dists.iter().map(|(_, s)| *s).fold(f64::INFINITY, f64::min);
            let witnesses = dists
                .iter()
                .filter(|(_, s)| *s <= opts.tol)
                .map(|(w, _)| Witness::Point(*w))
                .collect();
            Ok(Verdict::from_margin(Rule::DilatedCurves, margin, opts.tol, witnesses, &d))
        }
    }
}

/// Translates `V + {|x| = r}`: SS iff `D⁻(V) > 0`, whatever `Ω`.
///
/// A density of exactly zero is `NotSS`; `Boundary` is reserved for positive
/// values within `tol` of zero.
pub fn decide_translated_circles(
    v: &DiscreteSet,
    r: f64,
    _omega: &ConvexBody,
    opts: &DecideOptions,
) -> Result<Verdict, DecideError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(DecideError::Invalid(format!("circle radius must be positive, got {r}")));
    }
    if v.dim() != 2 {
        return Err(DensityError::WrongDimension { expected: 2 }.into());
    }
    let d = density::lower_uniform_density(v, &opts.windows_for(v))?;
    let status = if d.value > opts.tol {
        Status::SS
    } else if d.value > 0.0 {
        Status::Boundary
    } else {
        Status::NotSS
    };
    Ok(Verdict {
        status,
        rule: Rule::TranslatedCircles,
        margin: d.value,
        witnesses: vec![Witness::Value(d.value)],
        exactness: d.exactness,
        window_radius: d.window_radius,
    })
}

/// Dispatches on the trajectory family.
pub fn decide(p: &Trajectory, omega: &ConvexBody, opts: &DecideOptions) -> Result<Verdict, DecideError> {
    match p.family() {
        Family::ParallelLines { normal, offsets } => decide_parallel_lines(offsets, *normal, omega, opts),
        Family::DilatedBoundary { body, dilations } => decide_dilated(body, dilations, omega, opts),
        Family::TranslatedCircles { radius, centers } => decide_translated_circles(centers, *radius, omega, opts),
        Family::Polyline { .. } => Ok(Verdict {
            status: Status::Indeterminate,
            rule: Rule::Unsupported,
            margin: 0.0,
            witnesses: Vec::new(),
            exactness: Exactness::Exact,
            window_radius: None,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferStatus {
    /// Sampling trajectory for `PW^p` over the returned spectrum, `1 ≤ p < ∞`.
    ST,
    /// Not a sampling trajectory for `PW^p` over the returned spectrum.
    NotST,
    Boundary,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferVerdict {
    pub status: TransferStatus,
    pub epsilon: f64,
    /// `(1−ε)Ω` for a positive claim, `(1+ε)Ω` for a negative one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spectrum: Option<ConvexBody>,
    pub source: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

/// Transfers a Bernstein-space verdict to mobile sampling in `PW^p`.
///
/// Requires the uniform upper length bound (`c_holds`). A positive verdict
/// transfers to `(1−ε)Ω` only if the local lower length bound also holds;
/// without it the positive conclusion is not available.
pub fn transfer_to_paley_wiener(
    v: &Verdict,
    omega: &ConvexBody,
    epsilon: f64,
    cc_holds: bool,
    c_holds: bool,
) -> Result<TransferVerdict, DecideError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(DecideError::Invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !c_holds {
        return Err(DecideError::MissingConditionC);
    }
    let (status, spectrum, reason) = match v.status {
        Status::SS if cc_holds => (TransferStatus::ST, Some(omega.scaled(1.0 - epsilon)?), None),
        Status::SS => (
            TransferStatus::Indeterminate,
            None,
            Some("local lower length bound not established".to_string()),
        ),
        Status::NotSS => (TransferStatus::NotST, Some(omega.scaled(1.0 + epsilon)?), None),
        Status::Boundary => (TransferStatus::Boundary, None, None),
        Status::Indeterminate => (TransferStatus::Indeterminate, None, None),
    };
    Ok(TransferVerdict {
        status,
        epsilon,
        spectrum,
        source: v.status,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn disk(r: f64) -> ConvexBody {
        ConvexBody::disk(Vec2::ZERO, r).unwrap()
    }

    fn strip() -> ConvexBody {
        ConvexBody::hull(&[v(0.0, 0.0), v(10.0, 10.0), v(10.3, 10.0), v(0.3, 0.0)]).unwrap()
    }

    fn opts() -> DecideOptions {
        DecideOptions::default()
    }

    fn random_polygon(rng: &mut ChaCha8Rng, scale: f64) -> ConvexBody {
        loop {
            let n = rng.random_range(3..9);
            let c = v(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let pts: Vec<Vec2> = (0..n)
                .map(|_| c + Vec2::from_angle(rng.random_range(0.0..6.3)) * (scale * rng.random_range(0.2..1.0)))
                .collect();
            if let Ok(b) = ConvexBody::hull(&pts) {
                return b;
            }
        }
    }

    #[test]
    fn beurling_examples() {
        let z = DiscreteSet::integers();
        assert_eq!(beurling_1d(&z, -0.4, 0.4, &opts()).unwrap().status, Status::SS);
        assert_eq!(beurling_1d(&z, -0.6, 0.6, &opts()).unwrap().status, Status::NotSS);
        assert_eq!(beurling_1d(&z, -0.5, 0.5, &opts()).unwrap().status, Status::Boundary);
    }

    #[test]
    fn parallel_lines_examples() {
        let h = DiscreteSet::integers();
        let e1 = Direction::e1();
        assert_eq!(decide_parallel_lines(&h, e1, &disk(0.49), &opts()).unwrap().status, Status::SS);
        assert_eq!(decide_parallel_lines(&h, e1, &disk(0.51), &opts()).unwrap().status, Status::NotSS);
        let b = decide_parallel_lines(&h, e1, &disk(0.5), &opts()).unwrap();
        assert_eq!(b.status, Status::Boundary);
        assert!(b.margin.abs() <= 1e-12);
    }

    #[test]
    fn dilated_examples() {
        let q = DiscreteSet::naturals();
        let unit = disk(1.0);
        let ss = decide_dilated(&unit, &q, &disk(0.4), &opts()).unwrap();
        assert_eq!((ss.status, ss.rule), (Status::SS, Rule::DilatedDiskDiameter));
        assert!((ss.margin - 0.2).abs() < 1e-12);
        let wide = ConvexBody::rect(v(0.0, 0.0), v(1.0, 0.2)).unwrap();
        assert!(wide.diameter() > 1.0);
        assert_eq!(decide_dilated(&unit, &q, &wide, &opts()).unwrap().status, Status::NotSS);

        let square = ConvexBody::centered_square(1.0).unwrap();
        let s = decide_dilated(&square, &q, &strip(), &opts()).unwrap();
        assert_eq!((s.status, s.rule), (Status::SS, Rule::DilatedCurves));
        assert!(s.witnesses.is_empty());
        assert!((strip().area() - 3.0).abs() < 1e-9);

        let n = decide_dilated(&square, &q, &disk(0.51), &opts()).unwrap();
        assert_eq!(n.status, Status::NotSS);
        assert_eq!(n.witnesses.len(), 4);

        let off = ConvexBody::disk(v(1.0, 0.0), 0.5).unwrap();
        assert_eq!(decide_dilated(&off, &q, &disk(0.4), &opts()), Err(GeometryError::OriginNotInterior.into()));
    }

    #[test]
    fn translated_circle_examples() {
        let any = disk(0.4);
        let z2 = DiscreteSet::integer_lattice();
        assert_eq!(decide_translated_circles(&z2, 0.3, &any, &opts()).unwrap().status, Status::SS);
        let pts: Vec<Vec2> = (1..=10).map(|n| v(2f64.powi(n), 0.0)).collect();
        let sparse = DiscreteSet::explicit_2d(pts, 1024.0).unwrap();
        let r = decide_translated_circles(&sparse, 0.3, &any, &opts()).unwrap();
        assert_eq!((r.status, r.exactness), (Status::NotSS, Exactness::Windowed));
        let axis = DiscreteSet::progression_2d(v(1.0, 0.0), Vec2::ZERO).unwrap();
        assert_eq!(decide_translated_circles(&axis, 1.0, &any, &opts()).unwrap().status, Status::NotSS);
    }

    #[test]
    fn transfer_examples() {
        let ss = decide_parallel_lines(&DiscreteSet::integers(), Direction::e1(), &disk(0.4), &opts()).unwrap();
        let t = transfer_to_paley_wiener(&ss, &disk(0.4), 0.1, true, true).unwrap();
        assert_eq!(t.status, TransferStatus::ST);
        assert!((t.spectrum.unwrap().as_disk().unwrap().1 - 0.36).abs() < 1e-12);

        let not = decide_parallel_lines(&DiscreteSet::integers(), Direction::e1(), &disk(0.51), &opts()).unwrap();
        let t = transfer_to_paley_wiener(&not, &disk(0.51), 0.1, true, true).unwrap();
        assert_eq!(t.status, TransferStatus::NotST);
        assert!((t.spectrum.unwrap().as_disk().unwrap().1 - 0.561).abs() < 1e-12);

        let t = transfer_to_paley_wiener(&ss, &disk(0.4), 0.1, false, true).unwrap();
        assert_eq!(t.status, TransferStatus::Indeterminate);
        assert_eq!(
            transfer_to_paley_wiener(&ss, &disk(0.4), 0.1, true, false),
            Err(DecideError::MissingConditionC)
        );
        assert!(transfer_to_paley_wiener(&ss, &disk(0.4), 1.0, true, true).is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let q = DiscreteSet::naturals();
        let sq = ConvexBody::centered_square(1.0).unwrap();
        let n = decide_dilated(&sq, &q, &disk(0.51), &opts()).unwrap();
        let j: serde_json::Value = serde_json::to_value(&n).unwrap();
        assert_eq!(j["status"], "NotSS");
        assert_eq!(j["rule"], "dilated_curves");
        assert_eq!(j["exactness"], "exact");
        assert_eq!(j["witnesses"].as_array().unwrap().len(), 4);
        let back: Verdict = serde_json::from_value(j).unwrap();
        assert_eq!(back, n);
    }

    #[test]
    fn scale_covariance_and_translation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let omega = random_polygon(&mut rng, 0.8);
            let step = rng.random_range(0.3..2.0);
            let h = DiscreteSet::arithmetic(step, rng.random_range(0.0..1.0)).unwrap();
            let dir = Direction::from_angle(rng.random_range(0.0..6.3));
            let base = decide_parallel_lines(&h, dir, &omega, &opts()).unwrap();
            // spacing a·step pairs with the spectrum Ω/a
            let a = rng.random_range(0.2..5.0);
            let scaled = decide_parallel_lines(&h.scaled(a).unwrap(), dir, &omega.scaled(1.0 / a).unwrap(), &opts())
                .unwrap();
            assert_eq!(base.status, scaled.status);
            let t = v(rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0));
            let moved = decide_parallel_lines(&h, dir, &omega.translated(t), &opts()).unwrap();
            assert_eq!(base.status, moved.status);
        }
    }

    #[test]
    fn monotone_in_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = DiscreteSet::naturals();
        let sq = ConvexBody::centered_square(1.0).unwrap();
        for _ in 0..50 {
            let big = random_polygon(&mut rng, 0.6);
            let small = big.scaled(rng.random_range(0.3..1.0)).unwrap();
            // scaling about the origin need not nest; shrink about the centroid
            let c = big.centroid();
            let small = small.translated(c - small.centroid());
            let h = DiscreteSet::integers();
            let dir = Direction::from_angle(rng.random_range(0.0..6.3));
            if decide_parallel_lines(&h, dir, &big, &opts()).unwrap().status == Status::SS {
                assert_eq!(decide_parallel_lines(&h, dir, &small, &opts()).unwrap().status, Status::SS);
            }
            if decide_dilated(&sq, &q, &big, &opts()).unwrap().status == Status::SS {
                assert_eq!(decide_dilated(&sq, &q, &small, &opts()).unwrap().status, Status::SS);
            }
        }
    }

    #[test]
    fn disk_and_square_shortcuts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let unit = disk(1.0);
        let sq = ConvexBody::centered_square(1.0).unwrap();
        for _ in 0..100 {
            let step = rng.random_range(0.5..2.0);
            let q = DiscreteSet::half_arithmetic(step, rng.random_range(0.1..3.0)).unwrap();
            let omega = random_polygon(&mut rng, 0.7);
            let d = 1.0 / step;
            let verdict = decide_dilated(&unit, &q, &omega, &opts()).unwrap();
            let expect = if omega.diameter() < d - 1e-9 {
                Status::SS
            } else if omega.diameter() > d + 1e-9 {
                Status::NotSS
            } else {
                Status::Boundary
            };
            assert_eq!(verdict.status, expect);

            let sv = decide_dilated(&sq, &q, &omega, &opts()).unwrap();
            let axis_ok = omega.max_chord_length(Direction::e1()) < d - 1e-9
                && omega.max_chord_length(Direction::e2()) < d - 1e-9;
            assert_eq!(sv.status == Status::SS, axis_ok);
        }
    }

    #[test]
    fn membership_and_chord_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let omega = random_polygon(&mut rng, 1.0);
            let dir = Direction::from_angle(rng.random_range(0.0..6.3));
            let step = rng.random_range(0.3..2.0);
            let h = DiscreteSet::arithmetic(step, 0.0).unwrap();
            let verdict = decide_parallel_lines(&h, dir, &omega, &opts()).unwrap();
            let chord = omega.max_chord_length(dir);
            if (chord - 1.0 / step).abs() > 1e-6 {
                assert_eq!(verdict.status == Status::SS, chord < 1.0 / step);
            }
        }
    }

    #[test]
    fn polylines_are_undecided() {
        let p = Trajectory::polyline(vec![vec![v(0.0, 0.0), v(1.0, 0.0)]]).unwrap();
        assert_eq!(decide(&p, &disk(0.3), &opts()).unwrap().status, Status::Indeterminate);
    }
}
