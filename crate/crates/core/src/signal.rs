//! Finite signal space `C^L`: DFT, time-frequency shifts, the short-time
//! Fourier transform on the full `L x L` grid, window generators and norms.
//!
//! All indexing is circular (mod `L`). The forward DFT is unnormalized,
//! `F(w) = sum_t f(t) exp(-2 pi i w t / L)`, and the inverse carries the
//! `1/L` factor, so inner products of time-frequency atoms stay literal.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{QuiltError, Result};

/// Smallest admissible signal length. Below this, lattices and
/// time-frequency partitions degenerate.
pub const MIN_LEN: usize = 4;

/// A complex signal of length `L` with circular indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<Complex64>,
}

impl Signal {
    /// Wraps a sample vector. Fails for lengths below [`MIN_LEN`].
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < MIN_LEN {
            return Err(QuiltError::Domain(format!(
                "signal length {} is below the minimum {}",
                samples.len(),
                MIN_LEN
            )));
        }
        Ok(Self { samples })
    }

    /// All-zero signal of length `l`.
    pub fn zeros(l: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); l])
    }

    /// Unit impulse at index `t` (reduced mod `l`).
    pub fn delta(l: usize, t: usize) -> Result<Self> {
        let mut s = Self::zeros(l)?;
        s.samples[t % l] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Real-valued signal from `f64` samples.
    pub fn from_real(samples: &[f64]) -> Result<Self> {
        Self::new(samples.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Sample at circular index `t` (any integer).
    pub fn at(&self, t: i64) -> Complex64 {
        let l = self.samples.len() as i64;
        self.samples[t.rem_euclid(l) as usize]
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `<self, other> = sum_t self(t) conj(other(t))`.
    pub fn inner(&self, other: &Signal) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        self.samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Signal {
        debug_assert_eq!(self.len(), other.len());
        Signal {
            samples: self
                .samples
                .iter()
                .zip(other.samples.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        debug_assert_eq!(self.len(), other.len());
        Signal {
            samples: self
                .samples
                .iter()
                .zip(other.samples.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Pointwise product with a real weight vector.
    pub fn mul_real(&self, weights: &[f64]) -> Signal {
        debug_assert_eq!(self.len(), weights.len());
        Signal {
            samples: self
                .samples
                .iter()
                .zip(weights.iter())
                .map(|(z, &w)| z * w)
                .collect(),
        }
    }

    /// Rescales to unit Euclidean norm. Fails on the zero signal.
    pub fn normalized(&self) -> Result<Signal> {
        let n = self.norm();
        if n == 0.0 {
            return Err(QuiltError::Domain("cannot normalize the zero signal".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.samples)
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Result<Signal> {
        Signal::new(v.iter().copied().collect())
    }
}

impl std::ops::Index<usize> for Signal {
    type Output = Complex64;
    fn index(&self, t: usize) -> &Complex64 {
        &self.samples[t]
    }
}

/// A point on the `L x L` time-frequency grid, both coordinates reduced
/// mod `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TFPoint {
    /// Time shift in samples.
    pub x: usize,
    /// Frequency shift in bins.
    pub omega: usize,
}

impl TFPoint {
    pub fn new(x: usize, omega: usize, l: usize) -> Self {
        Self {
            x: x % l,
            omega: omega % l,
        }
    }

    /// Reduces arbitrary integer coordinates mod `l`.
    pub fn reduced(x: i64, omega: i64, l: usize) -> Self {
        let l_i = l as i64;
        Self {
            x: x.rem_euclid(l_i) as usize,
            omega: omega.rem_euclid(l_i) as usize,
        }
    }

    /// Componentwise difference `self - other`, reduced mod `l`.
    pub fn sub_mod(&self, other: &TFPoint, l: usize) -> TFPoint {
        TFPoint::reduced(
            self.x as i64 - other.x as i64,
            self.omega as i64 - other.omega as i64,
            l,
        )
    }

    /// Squared Euclidean length with circularly wrapped coordinates
    /// (each component mapped to `[-L/2, L/2]`).
    pub fn wrapped_norm_sqr(&self, l: usize) -> f64 {
        let dx = self.x.min(l - self.x) as f64;
        let dw = self.omega.min(l - self.omega) as f64;
        dx * dx + dw * dw
    }
}

/// Unnormalized forward DFT: `F(w) = sum_t f(t) exp(-2 pi i w t / L)`.
pub fn dft(f: &Signal) -> Signal {
    let mut buf = f.samples.clone();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    Signal { samples: buf }
}

/// Inverse DFT; carries the `1/L` normalization so `idft(dft(f)) = f`.
pub fn idft(f: &Signal) -> Signal {
    let l = f.len();
    let mut buf = f.samples.clone();
    FftPlanner::new().plan_fft_inverse(l).process(&mut buf);
    let scale = 1.0 / l as f64;
    for z in &mut buf {
        *z *= scale;
    }
    Signal { samples: buf }
}

/// Time-frequency shift `pi(lambda) = M_omega T_x`:
/// `(pi(lambda) f)(t) = exp(2 pi i omega t / L) f(t - x)`.
pub fn tf_shift(f: &Signal, lambda: TFPoint) -> Signal {
    let l = f.len();
    let samples = (0..l)
        .map(|t| {
            let phase = 2.0 * PI * (lambda.omega as f64) * (t as f64) / (l as f64);
            Complex64::from_polar(1.0, phase) * f.at(t as i64 - lambda.x as i64)
        })
        .collect();
    Signal { samples }
}

/// Full-grid short-time Fourier transform: entry `(x, w)` is
/// `<f, pi(x, w) g>`. Computed as one DFT per time shift.
pub fn stft(f: &Signal, g: &Signal) -> Result<DMatrix<Complex64>> {
    let l = f.len();
    if g.len() != l {
        return Err(QuiltError::DimensionMismatch {
            expected: l,
            found: g.len(),
        });
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(l);
    let mut out = DMatrix::zeros(l, l);
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for x in 0..l {
        for (t, slot) in buf.iter_mut().enumerate() {
            *slot = f.samples[t] * g.at(t as i64 - x as i64).conj();
        }
        fft.process(&mut buf);
        for w in 0..l {
            out[(x, w)] = buf[w];
        }
    }
    Ok(out)
}

/// Periodized Gaussian window centered at `L/2`, unit Euclidean norm:
/// `g(t) proportional to sum_k exp(-pi (t - L/2 + k L)^2 / L)`.
pub fn periodized_gaussian(l: usize) -> Result<Signal> {
    periodized_gaussian_impl(l, 1.0, 8)
}

/// Periodized Gaussian with its squared spread scaled by `width`:
/// `g(t) proportional to sum_k exp(-pi (t - L/2 + k L)^2 / (width L))`.
/// `width = a/b` matches the window spread to a `(a, b)` lattice.
pub fn periodized_gaussian_scaled(l: usize, width: f64) -> Result<Signal> {
    periodized_gaussian_impl(l, width, 8)
}

/// Periodization with an explicit number of summation terms on each side.
/// Eight terms already reach machine precision for every practical `L`.
pub fn periodized_gaussian_terms(l: usize, terms: i64) -> Result<Signal> {
    periodized_gaussian_impl(l, 1.0, terms)
}

fn periodized_gaussian_impl(l: usize, width: f64, terms: i64) -> Result<Signal> {
    if l < MIN_LEN {
        return Err(QuiltError::Domain(format!(
            "window length {l} is below the minimum {MIN_LEN}"
        )));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(QuiltError::Domain(format!(
            "gaussian width must be positive, got {width}"
        )));
    }
    let lf = l as f64;
    let center = lf / 2.0;
    let samples: Vec<f64> = (0..l)
        .map(|t| {
            (-terms..=terms)
                .map(|k| {
                    let d = t as f64 - center + k as f64 * lf;
                    (-PI * d * d / (width * lf)).exp()
                })
                .sum()
        })
        .collect();
    Signal::from_real(&samples)?.normalized()
}

/// Truncated Gaussian centered at `L/2`: hard zero outside
/// `[L/2 - radius, L/2 + radius]`, unit norm. The decay is tied to the
/// radius so the edge samples sit near 1e-4 before truncation.
pub fn truncated_gaussian(l: usize, radius: usize) -> Result<Signal> {
    if radius == 0 || 2 * radius + 1 > l {
        return Err(QuiltError::Config(format!(
            "truncated Gaussian radius {radius} does not fit signal length {l}"
        )));
    }
    let center = (l / 2) as i64;
    // Decay chosen so the outermost kept samples sit near 1e-4.
    let sigma_sq = (radius as f64).powi(2) / (2.0 * 1e4f64.ln());
    let samples: Vec<f64> = (0..l as i64)
        .map(|t| {
            let mut d = (t - center).rem_euclid(l as i64);
            if d > l as i64 / 2 {
                d -= l as i64;
            }
            if d.unsigned_abs() as usize <= radius {
                (-(d as f64).powi(2) / (2.0 * sigma_sq)).exp()
            } else {
                0.0
            }
        })
        .collect();
    Signal::from_real(&samples)?.normalized()
}

/// Raised-cosine (Hann) window centered at `L/2` with hard zeros outside
/// `[L/2 - radius, L/2 + radius]`, unit norm.
pub fn raised_cosine_window(l: usize, radius: usize) -> Result<Signal> {
    if radius == 0 || 2 * radius + 1 > l {
        return Err(QuiltError::Config(format!(
            "raised cosine radius {radius} does not fit signal length {l}"
        )));
    }
    let center = (l / 2) as i64;
    let half_width = (radius + 1) as f64;
    let samples: Vec<f64> = (0..l as i64)
        .map(|t| {
            let mut d = (t - center).rem_euclid(l as i64);
            if d > l as i64 / 2 {
                d -= l as i64;
            }
            if d.unsigned_abs() as usize <= radius {
                let c = (PI * d as f64 / (2.0 * half_width)).cos();
                c * c
            } else {
                0.0
            }
        })
        .collect();
    Signal::from_real(&samples)?.normalized()
}

/// Relative reconstruction error `|rec - reference| / |reference|`.
pub fn relative_error(rec: &Signal, reference: &Signal) -> Result<f64> {
    if rec.len() != reference.len() {
        return Err(QuiltError::DimensionMismatch {
            expected: reference.len(),
            found: rec.len(),
        });
    }
    let denom = reference.norm();
    if denom == 0.0 {
        return Err(QuiltError::Domain(
            "relative error undefined for a zero reference signal".into(),
        ));
    }
    Ok(rec.sub(reference).norm() / denom)
}

/// Seeded random signal with independent complex standard normal entries.
pub fn random_signal(l: usize, seed: u64) -> Result<Signal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..l)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    Signal::new(samples)
}

/// Minimal circular index interval `(start, width)` containing every
/// nonzero sample. Returns `None` for the zero signal; `width == L` means
/// the support wraps the whole circle (no zero sample).
pub fn support_interval(g: &Signal) -> Option<(usize, usize)> {
    let l = g.len();
    let nonzero: Vec<bool> = g.samples.iter().map(|z| z.norm_sqr() > 0.0).collect();
    if nonzero.iter().all(|&b| !b) {
        return None;
    }
    if nonzero.iter().all(|&b| b) {
        return Some((0, l));
    }
    // The minimal circular support is the complement of the longest run
    // of zeros.
    let mut best_start = 0usize;
    let mut best_len = 0usize;
    let mut t = 0usize;
    while t < l {
        if !nonzero[t] {
            let run_start = t;
            let mut run_len = 0usize;
            while run_len < l && !nonzero[(run_start + run_len) % l] {
                run_len += 1;
            }
            if run_len > best_len {
                best_len = run_len;
                best_start = run_start;
            }
            t = run_start + run_len;
        } else {
            t += 1;
        }
    }
    let support_start = (best_start + best_len) % l;
    Some((support_start, l - best_len))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    #[test]
    fn rejects_short_signals() {
        assert!(Signal::zeros(3).is_err());
        assert!(Signal::zeros(4).is_ok());
    }

    #[test]
    fn dft_of_impulse_is_all_ones() {
        let f = Signal::delta(8, 0).unwrap();
        let spec = dft(&f);
        for w in 0..8 {
            assert!((spec[w] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn dft_of_constant_is_scaled_impulse() {
        let f = Signal::new(vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        let spec = dft(&f);
        assert!((spec[0] - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        for w in 1..8 {
            assert!(spec[w].norm() < 1e-12);
        }
    }

    #[test]
    fn dft_round_trip_and_plancherel() {
        let f = random_signal(16, 11).unwrap();
        let back = idft(&dft(&f));
        assert!(relative_error(&back, &f).unwrap() < 1e-12);
        let ratio = dft(&f).norm().powi(2) / f.norm().powi(2);
        assert_close(ratio, 16.0, 1e-10, "Plancherel ratio");
    }

    #[test]
    fn tf_shift_identity_and_translation() {
        let f = random_signal(8, 3).unwrap();
        let same = tf_shift(&f, TFPoint::new(0, 0, 8));
        assert_eq!(same.samples(), f.samples());

        let d = Signal::delta(8, 0).unwrap();
        let shifted = tf_shift(&d, TFPoint::new(3, 0, 8));
        let expected = Signal::delta(8, 3).unwrap();
        assert!(shifted.sub(&expected).norm() < 1e-15);
    }

    #[test]
    fn tf_shift_is_unitary() {
        let f = random_signal(12, 5).unwrap();
        for &(x, w) in &[(1, 0), (0, 5), (7, 3), (11, 11)] {
            let shifted = tf_shift(&f, TFPoint::new(x, w, 12));
            assert_close(shifted.norm(), f.norm(), 1e-13, "shift norm");
        }
    }

    #[test]
    fn tf_shift_composition_matches_combined() {
        let f = random_signal(16, 9).unwrap();
        let x = 5;
        let w = 11;
        let step = tf_shift(&tf_shift(&f, TFPoint::new(x, 0, 16)), TFPoint::new(0, w, 16));
        let combined = tf_shift(&f, TFPoint::new(x, w, 16));
        assert_eq!(step.samples(), combined.samples());
    }

    #[test]
    fn stft_of_impulse_pair() {
        let d = Signal::delta(4, 0).unwrap();
        let v = stft(&d, &d).unwrap();
        for x in 0..4 {
            for w in 0..4 {
                let expected = if x == 0 { 1.0 } else { 0.0 };
                assert!((v[(x, w)] - Complex64::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn stft_full_grid_energy_identity() {
        let f = random_signal(16, 21).unwrap();
        let g = random_signal(16, 22).unwrap().normalized().unwrap();
        let v = stft(&f, &g).unwrap();
        let energy: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let expected = 16.0 * f.norm().powi(2);
        assert!((energy - expected).abs() / expected < 1e-9);
    }

    // Oracle: direct O(L^3) inner products against the FFT path.
    #[test]
    fn stft_matches_direct_inner_products() {
        for &l in &[4usize, 8, 12, 16] {
            let f = random_signal(l, 100 + l as u64).unwrap();
            let g = random_signal(l, 200 + l as u64).unwrap();
            let fast = stft(&f, &g).unwrap();
            let mut max_diff = 0.0f64;
            for x in 0..l {
                for w in 0..l {
                    let atom = tf_shift(&g, TFPoint::new(x, w, l));
                    let direct = f.inner(&atom);
                    max_diff = max_diff.max((fast[(x, w)] - direct).norm());
                }
            }
            assert!(max_diff < 1e-12, "L={l}: max deviation {max_diff}");
        }
    }

    #[test]
    fn stft_rejects_length_mismatch() {
        let f = Signal::zeros(8).unwrap();
        let g = Signal::zeros(12).unwrap();
        assert!(matches!(
            stft(&f, &g),
            Err(QuiltError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_is_normalized_symmetric_and_peaked() {
        let g = periodized_gaussian(144).unwrap();
        assert_close(g.norm(), 1.0, 1e-13, "gaussian norm");
        let argmax = (0..144)
            .max_by(|&a, &b| g[a].norm().partial_cmp(&g[b].norm()).unwrap())
            .unwrap();
        assert_eq!(argmax, 72);
        for j in 1..72 {
            assert!((g[72 + j] - g[72 - j]).norm() < 1e-14, "asymmetry at {j}");
        }
        for t in 0..144 {
            assert!(g[t].re > 0.0 && g[t].im == 0.0);
        }
    }

    // Oracle: summing more periodization terms must not change anything.
    #[test]
    fn gaussian_periodization_tail_is_negligible() {
        let few = periodized_gaussian_terms(144, 3).unwrap();
        let more = periodized_gaussian_terms(144, 4).unwrap();
        let max_diff = few
            .samples()
            .iter()
            .zip(more.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_diff <= 1e-15, "tail contribution {max_diff}");
    }

    #[test]
    fn relative_error_basics() {
        let r = random_signal(16, 33).unwrap();
        assert_close(relative_error(&r, &r).unwrap(), 0.0, 1e-15, "self error");
        let doubled = r.scale(Complex64::new(2.0, 0.0));
        assert_close(relative_error(&doubled, &r).unwrap(), 1.0, 1e-13, "2r error");
        let zero = Signal::zeros(16).unwrap();
        assert!(matches!(
            relative_error(&r, &zero),
            Err(QuiltError::Domain(_))
        ));
    }

    #[test]
    fn relative_error_orthogonal_perturbation() {
        // e orthogonal to r with norm 0.1 |r| gives exactly 0.1.
        let l = 16;
        let r = random_signal(l, 41).unwrap();
        let mut e = random_signal(l, 42).unwrap();
        // Gram-Schmidt step.
        let proj = e.inner(&r) / Complex64::new(r.norm().powi(2), 0.0);
        e = e.sub(&r.scale(proj));
        let e = e
            .normalized()
            .unwrap()
            .scale(Complex64::new(0.1 * r.norm(), 0.0));
        let rec = r.add(&e);
        assert_close(
            relative_error(&rec, &r).unwrap(),
            0.1,
            1e-12,
            "orthogonal perturbation",
        );
    }

    #[test]
    fn random_signal_is_deterministic() {
        let a = random_signal(32, 7).unwrap();
        let b = random_signal(32, 7).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn support_interval_finds_wrapped_support() {
        // Support {14, 15, 0, 1} on L = 16.
        let mut v = vec![Complex64::new(0.0, 0.0); 16];
        for &t in &[14usize, 15, 0, 1] {
            v[t] = Complex64::new(1.0, 0.0);
        }
        let s = Signal::new(v).unwrap();
        assert_eq!(support_interval(&s), Some((14, 4)));

        let z = Signal::zeros(8).unwrap();
        assert_eq!(support_interval(&z), None);

        let full = random_signal(8, 1).unwrap();
        assert_eq!(support_interval(&full), Some((0, 8)));
    }

    #[test]
    fn compact_windows_have_exact_support() {
        for (name, w) in [
            ("truncated gaussian", truncated_gaussian(144, 8).unwrap()),
            ("raised cosine", raised_cosine_window(144, 8).unwrap()),
        ] {
            assert_close(w.norm(), 1.0, 1e-13, name);
            let (start, width) = support_interval(&w).unwrap();
            assert_eq!(width, 17, "{name} width");
            assert_eq!(start, 72 - 8, "{name} start");
            for t in 0..144usize {
                let inside = (t + 144 - start) % 144 < width;
                if !inside {
                    assert_eq!(w[t], Complex64::new(0.0, 0.0), "{name} leak at {t}");
                }
            }
        }
    }
}
