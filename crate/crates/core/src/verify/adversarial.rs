use super::field::{synth_random, GridField};
use super::probe::{probe, torus_bbox, ProbeReport};
use super::VerifyError;
use crate::geometry::ConvexBody;
use crate::trajectory::Trajectory;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

const POWER_STEPS: usize = 30;

/// Weighted path-evaluation operator `(Ec)_p = √w_p Σ_k c_k e^{2πi⟨k, x_p⟩/L}`.
struct PathOperator {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols`.
    entries: Vec<Complex64>,
}

impl PathOperator {
    fn new(p: &Trajectory, f: &GridField, eta: f64) -> Result<Self, VerifyError> {
        let comps = p.sample_components(eta, &torus_bbox(f.period()))?;
        let mut pts = Vec::new();
        for c in &comps {
            for (x, w) in c.points.iter().zip(c.quadrature_weights()) {
                pts.push((*x, w.sqrt()));
            }
        }
        if pts.is_empty() {
            return Err(VerifyError::EmptyPath);
        }
        let cols = f.mask().len();
        let scale = TAU / f.period();
        let entries = pts
            .par_iter()
            .flat_map_iter(|(x, sw)| {
                f.mask().iter().map(move |k| {
                    Complex64::from_polar(*sw, scale * (k[0] as f64 * x.x + k[1] as f64 * x.y))
                })
            })
            .collect();
        Ok(PathOperator {
            rows: pts.len(),
            cols,
            entries,
        })
    }

    fn apply(&self, c: &[Complex64]) -> Vec<Complex64> {
        self.entries
            .par_chunks(self.cols)
            .map(|row| row.iter().zip(c).map(|(e, ci)| e * ci).sum())
            .collect()
    }

    fn apply_adjoint(&self, r: &[Complex64]) -> Vec<Complex64> {
        (0..self.cols)
            .into_par_iter()
            .map(|j| (0..self.rows).map(|i| self.entries[i * self.cols + j].conj() * r[i]).sum())
            .collect()
    }

    fn normal(&self, c: &[Complex64]) -> Vec<Complex64> {
        self.apply_adjoint(&self.apply(c))
    }
}

fn norm(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Heuristic search for a field that is small on `P`.
///
/// Starts from the random field of `seed` and takes damped gradient steps
/// `c ← c − μ E^H E c` on the path energy, renormalizing `‖c‖₂` each step;
/// `μ = 0.5 / (1.05 λ_max)` with `λ_max` from a short power iteration. The
/// result is a numerical indication only, never a certificate.
pub fn adversarial_minimize(
    omega: &ConvexBody,
    p: &Trajectory,
    n: usize,
    period: f64,
    eta: f64,
    iterations: usize,
    seed: u64,
) -> Result<ProbeReport, VerifyError> {
    let init = synth_random(omega, n, period, seed)?;
    if iterations == 0 {
        return probe(p, &init, eta);
    }
    let op = PathOperator::new(p, &init, eta)?;

    let mut v = vec![Complex64::ONE; op.cols];
    let mut lambda = 0.0;
    for _ in 0..POWER_STEPS {
        let w = op.normal(&v);
        lambda = norm(&w) / norm(&v);
        let s = norm(&w);
        v = w.into_iter().map(|z| z / s).collect();
    }
    let mu = 0.5 / (1.05 * lambda);

    let mut c = init.coefficients().to_vec();
    let s = norm(&c);
    c.iter_mut().for_each(|z| *z /= s);
    for _ in 0..iterations {
        let g = op.normal(&c);
        c.iter_mut().zip(&g).for_each(|(ci, gi)| *ci -= gi * mu);
        let s = norm(&c);
        c.iter_mut().for_each(|z| *z /= s);
    }
    let f = GridField::from_coefficients(period, n, init.mask().to_vec(), c, init.spectrum_offset())?;
    let mut report = probe(p, &f, eta)?;
    report.seed = Some(seed);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DiscreteSet;
    use crate::geometry::Direction;
    use crate::vec2::Vec2;

    fn lines() -> Trajectory {
        Trajectory::parallel_lines(Direction::e1(), DiscreteSet::integers()).unwrap()
    }

    fn disk(r: f64) -> ConvexBody {
        ConvexBody::disk(Vec2::ZERO, r).unwrap()
    }

    #[test]
    fn zero_iterations_is_the_initial_probe() {
        let a = adversarial_minimize(&disk(0.4), &lines(), 64, 16.0, 0.25, 0, 9).unwrap();
        let b = probe(&lines(), &synth_random(&disk(0.4), 64, 16.0, 9).unwrap(), 0.25).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn search_separates_sampling_from_non_sampling() {
        let not_ss = adversarial_minimize(&disk(0.51), &lines(), 64, 16.0, 0.25, 200, 1).unwrap();
        let ss = adversarial_minimize(&disk(0.49), &lines(), 64, 16.0, 0.25, 200, 1).unwrap();
        assert!(not_ss.sup_ratio <= 1e-3, "{not_ss:?}");
        assert!(ss.sup_ratio >= 10.0 * not_ss.sup_ratio, "{ss:?}");
    }

    #[test]
    fn search_is_deterministic() {
        let a = adversarial_minimize(&disk(0.51), &lines(), 64, 16.0, 0.25, 20, 4).unwrap();
        let b = adversarial_minimize(&disk(0.51), &lines(), 64, 16.0, 0.25, 20, 4).unwrap();
        assert_eq!(a, b);
    }
}
