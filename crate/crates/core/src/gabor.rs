//! Gabor frames on `C^L`: separable lattices, analysis and synthesis
//! operators, the frame operator, frame bounds, and canonical dual and
//! tight windows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{QuiltError, Result};
use crate::linalg::{HermitianEigen, SINGULARITY_FLOOR};
use crate::signal::{tf_shift, Signal, TFPoint};

/// Separable time-frequency lattice `{(n a, m b)}` on the `L x L` grid.
/// Both steps must divide `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    a: usize,
    b: usize,
    l: usize,
}

impl Lattice {
    pub fn new(a: usize, b: usize, l: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(QuiltError::Config("lattice steps must be positive".into()));
        }
        if l % a != 0 || l % b != 0 {
            return Err(QuiltError::Config(format!(
                "lattice steps ({a}, {b}) must divide the signal length {l}"
            )));
        }
        Ok(Self { a, b, l })
    }

    pub fn time_step(&self) -> usize {
        self.a
    }

    pub fn frequency_step(&self) -> usize {
        self.b
    }

    pub fn signal_len(&self) -> usize {
        self.l
    }

    /// Number of lattice points, `(L/a)(L/b)`.
    pub fn point_count(&self) -> usize {
        (self.l / self.a) * (self.l / self.b)
    }

    /// Atoms per signal dimension, `L / (a b)`.
    pub fn redundancy(&self) -> f64 {
        self.l as f64 / (self.a * self.b) as f64
    }

    /// Lattice points in the fixed coefficient order: time index outer,
    /// frequency index inner.
    pub fn points(&self) -> Vec<TFPoint> {
        let mut pts = Vec::with_capacity(self.point_count());
        for n in 0..self.l / self.a {
            for m in 0..self.l / self.b {
                pts.push(TFPoint::new(n * self.a, m * self.b, self.l));
            }
        }
        pts
    }

    /// Whether `p` lies on the lattice.
    pub fn contains(&self, p: &TFPoint) -> bool {
        p.x % self.a == 0 && p.omega % self.b == 0
    }

    /// Whether every point of `self` is a point of `other`.
    pub fn is_sublattice_of(&self, other: &Lattice) -> bool {
        self.l == other.l && self.a % other.a == 0 && self.b % other.b == 0
    }
}

/// A Gabor system: one window shifted along a separable lattice.
///
/// Seed windows are unit-norm by convention; canonical dual and tight
/// windows are stored as computed.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborFrame {
    window: Signal,
    lattice: Lattice,
    id: usize,
}

impl GaborFrame {
    pub fn new(window: Signal, lattice: Lattice, id: usize) -> Result<Self> {
        if window.len() != lattice.signal_len() {
            return Err(QuiltError::DimensionMismatch {
                expected: lattice.signal_len(),
                found: window.len(),
            });
        }
        Ok(Self {
            window,
            lattice,
            id,
        })
    }

    pub fn window(&self) -> &Signal {
        &self.window
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn signal_len(&self) -> usize {
        self.lattice.signal_len()
    }

    /// Same lattice and id, different window.
    pub fn with_window(&self, window: Signal) -> Result<Self> {
        GaborFrame::new(window, self.lattice, self.id)
    }

    /// Same frame under a new identifier.
    pub fn with_id(&self, id: usize) -> Self {
        Self {
            window: self.window.clone(),
            lattice: self.lattice,
            id,
        }
    }

    /// The time-frequency shifted atom `pi(lambda) g`.
    pub fn atom(&self, lambda: TFPoint) -> Signal {
        tf_shift(&self.window, lambda)
    }

    /// Analysis coefficients `c(lambda) = <f, pi(lambda) g>` in lattice
    /// point order, computed with one FFT per lattice time shift.
    pub fn analysis(&self, f: &Signal) -> Result<Vec<Complex64>> {
        let l = self.signal_len();
        if f.len() != l {
            return Err(QuiltError::DimensionMismatch {
                expected: l,
                found: f.len(),
            });
        }
        let a = self.lattice.a;
        let b = self.lattice.b;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(l);
        let mut coeffs = Vec::with_capacity(self.lattice.point_count());
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for n in 0..l / a {
            let x = n * a;
            for (t, slot) in buf.iter_mut().enumerate() {
                *slot = f.samples()[t] * self.window.at(t as i64 - x as i64).conj();
            }
            fft.process(&mut buf);
            for m in 0..l / b {
                coeffs.push(buf[m * b]);
            }
        }
        Ok(coeffs)
    }

    /// Synthesis `sum_lambda c(lambda) pi(lambda) g`, adjoint of
    /// [`GaborFrame::analysis`].
    pub fn synthesis(&self, coeffs: &[Complex64]) -> Result<Signal> {
        if coeffs.len() != self.lattice.point_count() {
            return Err(QuiltError::DimensionMismatch {
                expected: self.lattice.point_count(),
                found: coeffs.len(),
            });
        }
        let l = self.signal_len();
        let mut acc = vec![Complex64::new(0.0, 0.0); l];
        for (c, lambda) in coeffs.iter().zip(self.lattice.points()) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let atom = self.atom(lambda);
            for (slot, v) in acc.iter_mut().zip(atom.samples()) {
                *slot += c * v;
            }
        }
        Signal::new(acc)
    }

    /// Stacked analysis matrix: one row per lattice point holding the
    /// conjugated atom, so that `analysis(f) = M f`.
    pub fn analysis_matrix(&self) -> DMatrix<Complex64> {
        analysis_matrix_for_atoms(self.signal_len(), self.lattice.points().iter().map(|&p| (self, p)))
    }

    /// The frame operator `S = sum_lambda (pi(lambda) g)(pi(lambda) g)^*`
    /// as a dense Hermitian matrix.
    pub fn frame_operator(&self) -> DMatrix<Complex64> {
        let m = self.analysis_matrix();
        m.adjoint() * m
    }

    /// Optimal frame bounds from the frame operator spectrum.
    pub fn frame_bounds(&self) -> FrameBounds {
        FrameBounds::from_operator(&self.frame_operator())
    }

    /// Canonical dual window `S^{-1} g`.
    pub fn canonical_dual_window(&self) -> Result<Signal> {
        let eig = HermitianEigen::new(&self.frame_operator());
        if eig.is_singular() {
            return Err(QuiltError::NotAFrame {
                lower: eig.min().max(0.0),
                upper: eig.max(),
            });
        }
        let dual = eig.apply_function(|l| 1.0 / l, &self.window.to_dvector());
        Signal::from_dvector(&dual)
    }

    /// Canonical tight window `S^{-1/2} g`; the frame it generates has
    /// bounds `A = B = 1`.
    pub fn canonical_tight_window(&self) -> Result<Signal> {
        let eig = HermitianEigen::new(&self.frame_operator());
        if eig.is_singular() {
            return Err(QuiltError::NotAFrame {
                lower: eig.min().max(0.0),
                upper: eig.max(),
            });
        }
        let tight = eig.apply_function(|l| 1.0 / l.sqrt(), &self.window.to_dvector());
        Signal::from_dvector(&tight)
    }

    /// Replaces the window by its canonical tight counterpart.
    pub fn tightened(&self) -> Result<Self> {
        self.with_window(self.canonical_tight_window()?)
    }
}

/// Stacks conjugated atoms as matrix rows; shared by single frames and
/// quilted systems.
pub(crate) fn analysis_matrix_for_atoms<'a>(
    l: usize,
    atoms: impl Iterator<Item = (&'a GaborFrame, TFPoint)>,
) -> DMatrix<Complex64> {
    let rows: Vec<Signal> = atoms.map(|(frame, p)| frame.atom(p)).collect();
    let mut m = DMatrix::zeros(rows.len(), l);
    for (i, atom) in rows.iter().enumerate() {
        for (t, v) in atom.samples().iter().enumerate() {
            m[(i, t)] = v.conj();
        }
    }
    m
}

/// Optimal frame bounds `A = lambda_min(S)`, `B = lambda_max(S)` and the
/// frame-operator condition number `B/A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    /// Optimal lower frame bound (0 when the system is not a frame).
    pub lower: f64,
    /// Optimal upper frame bound.
    pub upper: f64,
    /// `B / A`; infinite when `A` is negligible.
    pub condition: f64,
}

impl FrameBounds {
    /// Extracts bounds from a Hermitian positive semidefinite operator.
    /// A lower bound below `1e-12 B` is reported as "not a frame":
    /// `A = 0` with infinite condition number.
    pub fn from_operator(operator: &DMatrix<Complex64>) -> FrameBounds {
        let eig = HermitianEigen::new(operator);
        Self::from_extremes(eig.min(), eig.max())
    }

    pub(crate) fn from_extremes(min: f64, max: f64) -> FrameBounds {
        let upper = max.max(0.0);
        let lower = min.max(0.0);
        if lower <= SINGULARITY_FLOOR * upper {
            FrameBounds {
                lower: 0.0,
                upper,
                condition: f64::INFINITY,
            }
        } else {
            FrameBounds {
                lower,
                upper,
                condition: upper / lower,
            }
        }
    }

    pub fn is_frame(&self) -> bool {
        self.lower > 0.0
    }

    /// Whether the bounds describe a tight frame up to `tol` on the
    /// condition number.
    pub fn is_tight(&self, tol: f64) -> bool {
        self.is_frame() && self.condition <= 1.0 + tol
    }

    /// Condition number of the stacked analysis matrix,
    /// `sqrt(B/A)` (singular values instead of eigenvalues).
    pub fn analysis_condition(&self) -> f64 {
        self.condition.sqrt()
    }
}

/// Applies a dense operator to a signal.
pub fn apply_operator(op: &DMatrix<Complex64>, f: &Signal) -> Signal {
    let v: DVector<Complex64> = op * f.to_dvector();
    Signal::from_dvector(&v).expect("operator output length matches input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{periodized_gaussian, random_signal, relative_error, stft};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian_frame(l: usize, a: usize, b: usize) -> GaborFrame {
        GaborFrame::new(
            periodized_gaussian(l).unwrap(),
            Lattice::new(a, b, l).unwrap(),
            0,
        )
        .unwrap()
    }

    #[test]
    fn lattice_counts_and_redundancy() {
        let fine = Lattice::new(4, 8, 144).unwrap();
        assert_eq!(fine.point_count(), 648);
        assert!((fine.redundancy() - 4.5).abs() < 1e-15);

        let coarse = Lattice::new(8, 16, 144).unwrap();
        assert_eq!(coarse.point_count(), 162);
        assert!((coarse.redundancy() - 1.125).abs() < 1e-15);

        let single = Lattice::new(8, 8, 8).unwrap();
        assert_eq!(single.points(), vec![TFPoint::new(0, 0, 8)]);

        assert!(Lattice::new(5, 8, 144).is_err());
        assert!(Lattice::new(0, 8, 144).is_err());
    }

    #[test]
    fn lattice_point_order_is_time_major() {
        let lat = Lattice::new(6, 4, 12).unwrap();
        let pts = lat.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], TFPoint::new(0, 0, 12));
        assert_eq!(pts[1], TFPoint::new(0, 4, 12));
        assert_eq!(pts[3], TFPoint::new(6, 0, 12));
    }

    #[test]
    fn analysis_of_single_atom_hits_one() {
        let frame = gaussian_frame(48, 4, 8);
        let lambda = TFPoint::new(8, 16, 48);
        let f = frame.atom(lambda);
        let coeffs = frame.analysis(&f).unwrap();
        let pts = frame.lattice().points();
        let idx = pts.iter().position(|&p| p == lambda).unwrap();
        assert!((coeffs[idx] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn analysis_of_zero_is_zero() {
        let frame = gaussian_frame(16, 4, 4);
        let coeffs = frame.analysis(&Signal::zeros(16).unwrap()).unwrap();
        assert!(coeffs.iter().all(|c| c.norm() == 0.0));
    }

    // Oracle: full-grid STFT sampled at lattice points.
    #[test]
    fn analysis_matches_stft_samples() {
        let frame = gaussian_frame(48, 6, 8);
        let f = random_signal(48, 17).unwrap();
        let grid = stft(&f, frame.window()).unwrap();
        let coeffs = frame.analysis(&f).unwrap();
        let mut max_diff = 0.0f64;
        for (c, p) in coeffs.iter().zip(frame.lattice().points()) {
            max_diff = max_diff.max((c - grid[(p.x, p.omega)]).norm());
        }
        assert!(max_diff < 1e-12, "max deviation {max_diff}");
    }

    #[test]
    fn synthesis_of_unit_coefficient_is_atom() {
        let frame = gaussian_frame(24, 4, 6);
        let pts = frame.lattice().points();
        let target = 7usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); pts.len()];
        coeffs[target] = Complex64::new(1.0, 0.0);
        let out = frame.synthesis(&coeffs).unwrap();
        let expected = frame.atom(pts[target]);
        assert!(out.sub(&expected).norm() < 1e-13);
    }

    // Oracle: adjointness <analysis(f), c> = <f, synthesis(c)>.
    #[test]
    fn analysis_synthesis_adjointness() {
        let frame = gaussian_frame(24, 4, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let f = random_signal(24, 1000 + trial).unwrap();
            let c: Vec<Complex64> = (0..frame.lattice().point_count())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let tf = frame.analysis(&f).unwrap();
            let lhs: Complex64 = tf.iter().zip(&c).map(|(a, b)| a * b.conj()).sum();
            let rhs = f.inner(&frame.synthesis(&c).unwrap());
            assert!((lhs - rhs).norm() < 1e-12, "trial {trial}");
        }
    }

    #[test]
    fn full_grid_frame_operator_is_scaled_identity() {
        let frame = gaussian_frame(12, 1, 1);
        let s = frame.frame_operator();
        let expected = DMatrix::from_diagonal_element(12, 12, Complex64::new(12.0, 0.0));
        assert!(crate::linalg::max_abs_diff(&s, &expected) < 1e-10);
        let bounds = frame.frame_bounds();
        assert!((bounds.lower - 12.0).abs() < 1e-9);
        assert!((bounds.upper - 12.0).abs() < 1e-9);
        assert!((bounds.condition - 1.0).abs() < 1e-10);
    }

    // Oracle: operator action vs synthesis(analysis(f)).
    #[test]
    fn frame_operator_matches_composition() {
        let frame = gaussian_frame(48, 8, 6);
        let s = frame.frame_operator();
        for trial in 0..5 {
            let f = random_signal(48, 300 + trial).unwrap();
            let via_matrix = apply_operator(&s, &f);
            let via_ops = frame.synthesis(&frame.analysis(&f).unwrap()).unwrap();
            assert!(via_matrix.sub(&via_ops).norm() < 1e-12 * f.norm().max(1.0));
        }
    }

    #[test]
    fn frame_operator_is_hermitian_psd() {
        let frame = gaussian_frame(36, 6, 6);
        let s = frame.frame_operator();
        assert!(crate::linalg::max_abs_diff(&s, &s.adjoint()) < 1e-13);
        let eig = HermitianEigen::new(&s);
        assert!(eig.min() > -1e-12);
    }

    #[test]
    fn zero_window_gives_zero_operator() {
        let frame = GaborFrame::new(
            Signal::zeros(12).unwrap(),
            Lattice::new(3, 4, 12).unwrap(),
            0,
        )
        .unwrap();
        let s = frame.frame_operator();
        assert!(s.iter().all(|z| z.norm() == 0.0));
    }

    // Oracle: dense SVD of the stacked analysis matrix.
    #[test]
    fn frame_bounds_match_svd_of_analysis_matrix() {
        let frame = gaussian_frame(12, 3, 4);
        let bounds = frame.frame_bounds();
        let svd = frame.analysis_matrix().svd(false, false);
        let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
        let smin = svd
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, &s| a.min(s));
        assert!((bounds.upper - smax * smax).abs() <= 1e-9 * bounds.upper);
        assert!((bounds.lower - smin * smin).abs() <= 1e-9 * bounds.upper);
    }

    #[test]
    fn undersampled_lattice_is_not_a_frame() {
        // a * b > L: fewer atoms than dimensions.
        let frame = gaussian_frame(12, 4, 4);
        let bounds = frame.frame_bounds();
        assert_eq!(bounds.lower, 0.0);
        assert!(bounds.condition.is_infinite());
        assert!(!bounds.is_frame());
        assert!(frame.canonical_dual_window().is_err());
        assert!(frame.canonical_tight_window().is_err());
    }

    #[test]
    fn frame_inequality_holds_on_random_signals() {
        let frame = gaussian_frame(48, 4, 8);
        let bounds = frame.frame_bounds();
        assert!(bounds.is_frame());
        for trial in 0..50 {
            let f = random_signal(48, 2000 + trial).unwrap();
            let energy: f64 = frame
                .analysis(&f)
                .unwrap()
                .iter()
                .map(|c| c.norm_sqr())
                .sum();
            let nf = f.norm().powi(2);
            assert!(energy >= bounds.lower * nf - 1e-9 * nf);
            assert!(energy <= bounds.upper * nf + 1e-9 * nf);
        }
    }

    #[test]
    fn dual_window_reconstructs() {
        let frame = gaussian_frame(144, 4, 8);
        let dual = frame.canonical_dual_window().unwrap();
        let dual_frame = frame.with_window(dual.clone()).unwrap();
        for trial in 0..10 {
            let f = random_signal(144, 500 + trial).unwrap();
            let coeffs = dual_frame.analysis(&f).unwrap();
            let rec = frame.synthesis(&coeffs).unwrap();
            assert!(relative_error(&rec, &f).unwrap() < 1e-10, "trial {trial}");
        }
    }

    #[test]
    fn dual_of_tight_frame_is_scaled_window() {
        // Full grid: S = L I, so the dual is g / L.
        let frame = gaussian_frame(16, 1, 1);
        let dual = frame.canonical_dual_window().unwrap();
        let expected = frame.window().scale(Complex64::new(1.0 / 16.0, 0.0));
        assert!(dual.sub(&expected).norm() < 1e-12);
    }

    // Oracle: the dual of the dual frame is the original window.
    #[test]
    fn dual_is_an_involution() {
        let frame = gaussian_frame(48, 4, 8);
        let dual = frame.canonical_dual_window().unwrap();
        let back = frame
            .with_window(dual)
            .unwrap()
            .canonical_dual_window()
            .unwrap();
        assert!(back.sub(frame.window()).norm() < 1e-10);
    }

    #[test]
    fn tight_window_yields_condition_one() {
        for &(a, b) in &[(4usize, 8usize), (16, 8)] {
            let tight = gaussian_frame(144, a, b).tightened().unwrap();
            let bounds = tight.frame_bounds();
            assert!(
                bounds.condition <= 1.0 + 1e-8,
                "(a={a}, b={b}): condition {}",
                bounds.condition
            );
        }
    }

    #[test]
    fn tight_window_of_tight_frame_is_scaled_window() {
        // Full grid with A = B = L: S^{-1/2} g = g / sqrt(L).
        let frame = gaussian_frame(16, 1, 1);
        let tight = frame.canonical_tight_window().unwrap();
        let expected = frame.window().scale(Complex64::new(0.25, 0.0));
        assert!(tight.sub(&expected).norm() < 1e-12);
    }

    #[test]
    fn tightening_is_idempotent_up_to_scale() {
        let first = gaussian_frame(48, 4, 8).tightened().unwrap();
        let second = first.tightened().unwrap();
        let dir_a = first.window().normalized().unwrap();
        let dir_b = second.window().normalized().unwrap();
        assert!(dir_a.sub(&dir_b).norm() < 1e-10);
    }

    #[test]
    fn randomized_bounds_match_svd_oracle() {
        // Randomized lattices and windows at L in {12, 48}.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for &l in &[12usize, 48] {
            let divisors: Vec<usize> = (1..=l).filter(|d| l % d == 0).collect();
            for _ in 0..6 {
                let a = divisors[rng.gen_range(0..divisors.len())];
                let b = divisors[rng.gen_range(0..divisors.len())];
                let window = random_signal(l, rng.gen()).unwrap().normalized().unwrap();
                let frame =
                    GaborFrame::new(window, Lattice::new(a, b, l).unwrap(), 0).unwrap();
                let bounds = frame.frame_bounds();
                let svd = frame.analysis_matrix().svd(false, false);
                let smax = svd.singular_values.iter().fold(0.0f64, |x, &s| x.max(s));
                let smin = if frame.lattice().point_count() < l {
                    0.0
                } else {
                    svd.singular_values
                        .iter()
                        .fold(f64::INFINITY, |x, &s| x.min(s))
                };
                let scale = bounds.upper.max(1e-300);
                assert!(
                    (bounds.upper - smax * smax).abs() <= 1e-9 * scale,
                    "upper mismatch at L={l}, a={a}, b={b}"
                );
                assert!(
                    (bounds.lower - smin * smin).abs() <= 1e-9 * scale,
                    "lower mismatch at L={l}, a={a}, b={b}"
                );
            }
        }
    }
}
