use super::VerifyError;
use crate::geometry::{ConvexBody, TOL_GEOM};
use crate::vec2::Vec2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

/// Band-limited trigonometric polynomial on the torus `[0, L)²`,
///
/// `f(x) = Σ_k c_k e^{2πi⟨k, x⟩/L}` over an integer frequency mask,
///
/// sampled with its first and mixed derivatives on an `N × N` grid for
/// bicubic Hermite interpolation.
#[derive(Clone, Debug)]
pub struct GridField {
    period: f64,
    n: usize,
    mask: Vec<[i64; 2]>,
    coeffs: Vec<Complex64>,
    /// The mask is relative to this spectral shift; a modulation that does
    /// not change `|f|`.
    spectrum_offset: Vec2,
    seed: Option<u64>,
    values: Vec<Complex64>,
    dx: Vec<Complex64>,
    dy: Vec<Complex64>,
    dxy: Vec<Complex64>,
}

/// Integer frequencies `k` with `k/L ∈ Ω` (closed, to [`TOL_GEOM`]), ordered
/// by `k₂` then `k₁`.
pub fn spectrum_mask(omega: &ConvexBody, period: f64, n: usize) -> Result<Vec<[i64; 2]>, VerifyError> {
    check_grid(period, n)?;
    let reach = (omega.max_norm() * period).ceil() as i64 + 1;
    let mut mask = Vec::new();
    for k2 in -reach..=reach {
        for k1 in -reach..=reach {
            let xi = Vec2::new(k1 as f64, k2 as f64) / period;
            if omega.signed_distance(xi) <= TOL_GEOM {
                mask.push([k1, k2]);
            }
        }
    }
    if mask.is_empty() {
        return Err(VerifyError::MaskEmpty);
    }
    check_mask(&mask, n)?;
    Ok(mask)
}

fn check_grid(period: f64, n: usize) -> Result<(), VerifyError> {
    if !n.is_power_of_two() || n < 4 {
        return Err(VerifyError::InvalidGrid(format!("grid size {n} must be a power of two ≥ 4")));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(VerifyError::InvalidGrid(format!("period {period} must be positive")));
    }
    Ok(())
}

fn check_mask(mask: &[[i64; 2]], n: usize) -> Result<(), VerifyError> {
    let half = (n / 2) as i64;
    match mask.iter().find(|k| k[0].abs() >= half || k[1].abs() >= half) {
        Some(k) => Err(VerifyError::MaskExceedsGrid { k: *k, n }),
        None => Ok(()),
    }
}

/// Independent standard complex Gaussian coefficients on the mask of `Ω`.
pub fn synth_random(omega: &ConvexBody, n: usize, period: f64, seed: u64) -> Result<GridField, VerifyError> {
    let mask = spectrum_mask(omega, period, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = mask
        .iter()
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * FRAC_1_SQRT_2
        })
        .collect();
    let mut f = GridField::from_coefficients(period, n, mask, coeffs, Vec2::ZERO)?;
    f.seed = Some(seed);
    Ok(f)
}

/// In-place unnormalized 2-D inverse DFT of a row-major `n × n` array.
fn inverse_fft_2d(planner: &mut FftPlanner<f64>, data: &mut [Complex64], n: usize) {
    let fft = planner.plan_fft_inverse(n);
    fft.process(data);
    transpose(data, n);
    fft.process(data);
    transpose(data, n);
}

fn forward_fft_2d(planner: &mut FftPlanner<f64>, data: &mut [Complex64], n: usize) {
    let fft = planner.plan_fft_forward(n);
    fft.process(data);
    transpose(data, n);
    fft.process(data);
    transpose(data, n);
}

fn transpose(data: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in j + 1..n {
            data.swap(j * n + i, i * n + j);
        }
    }
}

/// Cubic Hermite basis `(h₀₀, h₁₀, h₀₁, h₁₁)` at `t`.
#[inline]
fn hermite(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2]
}

/// Worst-case bicubic Hermite error for a unit exponential of frequency `k`
/// on a grid of spacing `h = L/N`: `Σᵢ (2π|kᵢ|h/L)⁴ / 384`.
pub fn interpolation_budget(k: [i64; 2], period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    k.iter()
        .map(|&ki| (TAU * ki.abs() as f64 * h / period).powi(4) / 384.0)
        .sum()
}

impl GridField {
    pub fn from_coefficients(
        period: f64,
        n: usize,
        mask: Vec<[i64; 2]>,
        coeffs: Vec<Complex64>,
        spectrum_offset: Vec2,
    ) -> Result<Self, VerifyError> {
        check_grid(period, n)?;
        if mask.is_empty() {
            return Err(VerifyError::MaskEmpty);
        }
        if mask.len() != coeffs.len() {
            return Err(VerifyError::Invalid("mask and coefficient lengths differ".into()));
        }
        check_mask(&mask, n)?;
        let w = TAU / period;
        let mut planner = FftPlanner::new();
        let mut grids: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::ZERO; n * n]);
        let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
        for (k, c) in mask.iter().zip(&coeffs) {
            let idx = wrap(k[1]) * n + wrap(k[0]);
            let i1 = Complex64::new(0.0, w * k[0] as f64);
            let i2 = Complex64::new(0.0, w * k[1] as f64);
            grids[0][idx] = *c;
            grids[1][idx] = *c * i1;
            grids[2][idx] = *c * i2;
            grids[3][idx] = *c * i1 * i2;
        }
        for g in grids.iter_mut() {
            inverse_fft_2d(&mut planner, g, n);
        }
        let [values, dx, dy, dxy] = grids;
        Ok(GridField {
            period,
            n,
            mask,
            coeffs,
            spectrum_offset,
            seed: None,
            values,
            dx,
            dy,
            dxy,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> &[[i64; 2]] {
        &self.mask
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn spectrum_offset(&self) -> Vec2 {
        self.spectrum_offset
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Grid values, row-major: entry `j·N + i` is `f(i·L/N, j·L/N)`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `max |f|` over the grid nodes.
    pub fn grid_sup(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖f‖₂²` over one period cell, by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.period * self.period * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Direct evaluation of the trigonometric sum.
    pub fn eval_exact(&self, x: Vec2) -> Complex64 {
        let w = TAU / self.period;
        self.mask
            .iter()
            .zip(&self.coeffs)
            .map(|(k, c)| c * Complex64::from_polar(1.0, w * (k[0] as f64 * x.x + k[1] as f64 * x.y)))
            .sum()
    }

    /// Bicubic Hermite interpolation from the grid (periodic).
    pub fn interpolate(&self, x: Vec2) -> Complex64 {
        let n = self.n;
        let h = self.period / n as f64;
        let (ux, uy) = (x.x / h, x.y / h);
        let (fx, fy) = (ux.floor(), uy.floor());
        let (tx, ty) = (ux - fx, uy - fy);
        let i0 = (fx as i64).rem_euclid(n as i64) as usize;
        let j0 = (fy as i64).rem_euclid(n as i64) as usize;
        let i1 = (i0 + 1) % n;
        let j1 = (j0 + 1) % n;
        let bx = hermite(tx);
        let by = hermite(ty);
        // (value basis, slope basis) per corner index 0/1
        let vx = [(bx[0], bx[1]), (bx[2], bx[3])];
        let vy = [(by[0], by[1]), (by[2], by[3])];
        let mut acc = Complex64::ZERO;
        for (a, ii) in [i0, i1].into_iter().enumerate() {
            for (b, jj) in [j0, j1].into_iter().enumerate() {
                let idx = jj * n + ii;
                let (px, sx) = vx[a];
                let (py, sy) = vy[b];
                acc += self.values[idx] * (px * py)
                    + self.dx[idx] * (h * sx * py)
                    + self.dy[idx] * (h * px * sy)
                    + self.dxy[idx] * (h * h * sx * sy);
            }
        }
        acc
    }

    /// Fraction of grid energy outside the mask after a forward transform.
    pub fn off_mask_energy(&self) -> f64 {
        let n = self.n;
        let mut data = self.values.clone();
        forward_fft_2d(&mut FftPlanner::new(), &mut data, n);
        let mut on = vec![false; n * n];
        for k in &self.mask {
            on[k[1].rem_euclid(n as i64) as usize * n + k[0].rem_euclid(n as i64) as usize] = true;
        }
        let (mut inside, mut outside) = (0.0, 0.0);
        for (z, m) in data.iter().zip(&on) {
            if *m {
                inside += z.norm_sqr();
            } else {
                outside += z.norm_sqr();
            }
        }
        if inside + outside == 0.0 {
            0.0
        } else {
            outside / (inside + outside)
        }
    }
}
