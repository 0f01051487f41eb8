use super::field::GridField;
use super::VerifyError;
use crate::geometry::{ConvexBody, Direction};
use crate::trajectory::{BBox, Trajectory};
use crate::vec2::Vec2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `sin(πx₁)`: bounded by one, zero on every line `x₁ ∈ ℤ`.
///
/// Its spectrum `{±1/2}·e₁` fits in `Ω` once `Ω` is centred on the midpoint
/// of a horizontal chord of length at least one; the returned field records
/// that midpoint as its spectral offset.
pub fn witness_lines(omega: &ConvexBody, n: usize, period: f64) -> Result<GridField, VerifyError> {
    let (a, b) = omega.longest_chord(Direction::e1());
    let chord = a.dist(b);
    if chord < 1.0 {
        return Err(VerifyError::ChordTooShort { chord });
    }
    let half = period / 2.0;
    if half.fract() != 0.0 {
        return Err(VerifyError::FrequencyUnrepresentable(format!(
            "frequency 1/2 needs an even integer period, got {period}"
        )));
    }
    let k = half as i64;
    if 2 * k >= n as i64 {
        return Err(VerifyError::FrequencyUnrepresentable(format!(
            "frequency index {k} does not fit a grid of size {n}"
        )));
    }
    let c = Complex64::new(0.0, -0.5);
    GridField::from_coefficients(period, n, vec![[k, 0], [-k, 0]], vec![c, -c], (a + b) * 0.5)
}

/// `sinc(δ(x − center))` with `sinc(x) = (sin x₁/x₁)(sin x₂/x₂)`.
///
/// Not periodic, so it is evaluated in closed form rather than on a torus
/// grid. Its spectrum is the square of half-side `δ/2π`, inside `B_δ(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SincWitness {
    pub delta: f64,
    pub center: Vec2,
}

#[inline]
fn sinc1(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

impl SincWitness {
    pub fn eval(&self, x: Vec2) -> f64 {
        let d = (x - self.center) * self.delta;
        sinc1(d.x) * sinc1(d.y)
    }

    /// `min(1, 1/(δ|y₁|))·min(1, 1/(δ|y₂|))` at `y = x − center`.
    pub fn envelope(&self, x: Vec2) -> f64 {
        let d = (x - self.center) * self.delta;
        (1.0 / d.x.abs()).min(1.0) * (1.0 / d.y.abs()).min(1.0)
    }
}

/// One witness per gap centre; requires `B_δ(c) ⊆ Ω` around the centroid.
pub fn witness_gap(omega: &ConvexBody, delta: f64, centers: &[Vec2]) -> Result<Vec<SincWitness>, VerifyError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(VerifyError::Invalid(format!("delta must be positive, got {delta}")));
    }
    let depth = -omega.signed_distance(omega.centroid());
    if delta > depth {
        return Err(VerifyError::DeltaTooLarge { delta, depth });
    }
    Ok(centers.iter().map(|c| SincWitness { delta, center: *c }).collect())
}

/// Decay of a gap witness along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub delta: f64,
    pub center: Vec2,
    pub value_at_center: f64,
    /// Smallest distance from the centre to a path sample.
    pub gap_radius: f64,
    pub path_sup: f64,
    /// `1/(δ·gap_radius)`.
    pub envelope: f64,
    pub path_points: usize,
}

/// Evaluates `w` on `P ∩ window`, sampled at spacing `eta`.
pub fn gap_report(w: &SincWitness, p: &Trajectory, eta: f64, window: &BBox) -> Result<GapReport, VerifyError> {
    let comps = p.sample_components(eta, window)?;
    let pts: Vec<Vec2> = comps.into_iter().flat_map(|c| c.points).collect();
    if pts.is_empty() {
        return Err(VerifyError::EmptyPath);
    }
    let gap_radius = pts.iter().map(|x| x.dist(w.center)).fold(f64::INFINITY, f64::min);
    let path_sup = pts.iter().map(|x| w.eval(*x).abs()).fold(0.0, f64::max);
    Ok(GapReport {
        delta: w.delta,
        center: w.center,
        value_at_center: w.eval(w.center),
        gap_radius,
        path_sup,
        envelope: 1.0 / (w.delta * gap_radius),
        path_points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DiscreteSet;
    use crate::verify::probe::probe;

    fn disk(r: f64) -> ConvexBody {
        ConvexBody::disk(Vec2::ZERO, r).unwrap()
    }

    #[test]
    fn line_witness_examples() {
        let f = witness_lines(&disk(0.51), 256, 16.0).unwrap();
        let lines = Trajectory::parallel_lines(Direction::e1(), DiscreteSet::integers()).unwrap();
        assert!(probe(&lines, &f, 1.0 / 16.0).unwrap().sup_ratio <= 1e-9);
        assert!((f.grid_sup() - 1.0).abs() < 1e-12);
        assert!(matches!(
            witness_lines(&disk(0.49), 256, 16.0),
            Err(VerifyError::ChordTooShort { .. })
        ));
        assert!(matches!(
            witness_lines(&disk(0.51), 256, 15.0),
            Err(VerifyError::FrequencyUnrepresentable(_))
        ));
        // centring on the chord midpoint puts ±1/2 inside the shifted body
        let off = ConvexBody::disk(Vec2::new(3.0, 1.0), 0.6).unwrap();
        let g = witness_lines(&off, 64, 16.0).unwrap();
        for k in g.mask() {
            let xi = Vec2::new(k[0] as f64, k[1] as f64) / 16.0 + g.spectrum_offset();
            assert!(off.signed_distance(xi) <= 1e-12);
        }
    }

    #[test]
    fn sinc_envelopes() {
        let w = witness_gap(&disk(0.5), 0.3, &[Vec2::ZERO]).unwrap()[0];
        assert_eq!(w.eval(Vec2::ZERO), 1.0);
        for k in 0..64 {
            let dir = Vec2::from_angle(0.1 + k as f64 * 0.37);
            for r in [1.0, 5.0, 17.0, 60.0] {
                let x = dir * r;
                assert!(w.eval(x).abs() <= w.envelope(x) + 1e-15);
                let y = x * w.delta;
                if y.x.abs() > 0.0 && y.y.abs() > 0.0 {
                    assert!(w.eval(x).abs() <= 1.0 / (y.x * y.y).abs() + 1e-15);
                }
            }
        }
        assert!(matches!(
            witness_gap(&disk(0.2), 0.3, &[Vec2::ZERO]),
            Err(VerifyError::DeltaTooLarge { .. })
        ));
    }

    #[test]
    fn gap_decay_below_envelope() {
        let pts: Vec<Vec2> = (-60i32..=60)
            .flat_map(|i| (-60i32..=60).map(move |j| Vec2::new(i as f64, j as f64)))
            .filter(|v| v.norm() >= 20.5 && v.norm() <= 60.0)
            .collect();
        let centers = DiscreteSet::explicit_2d(pts, 60.0).unwrap();
        let p = Trajectory::translated_circles(0.5, centers).unwrap();
        let w = witness_gap(&disk(0.4), 0.3, &[Vec2::ZERO]).unwrap()[0];
        let window = BBox::new(Vec2::new(-40.0, -40.0), Vec2::new(40.0, 40.0)).unwrap();
        let r = gap_report(&w, &p, 0.1, &window).unwrap();
        assert_eq!(r.value_at_center, 1.0);
        assert!(r.gap_radius >= 20.0 - 1e-9);
        assert!(r.path_sup <= 1.0 / (0.3 * 20.0), "{r:?}");
    }
}
