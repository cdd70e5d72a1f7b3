//! Dense linear algebra helpers: Hermitian eigendecompositions, spectral
//! functions of positive operators, and operator norms via SVD and power
//! iteration.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QuiltError, Result};

/// Relative eigenvalue floor below which a Hermitian operator is treated
/// as singular.
pub const SINGULARITY_FLOOR: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Computed by cyclic Jacobi rotations. Slower than tridiagonalization
/// but accurate to a small multiple of machine epsilon even on strongly
/// clustered spectra, which the frame certificates depend on.
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

impl HermitianEigen {
    pub fn new(matrix: &DMatrix<Complex64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "matrix must be square");
        let n = matrix.nrows();
        let mut a = matrix.clone();
        let mut v: DMatrix<Complex64> = DMatrix::identity(n, n);

        let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let stop = (scale * 1e-15).max(f64::MIN_POSITIVE);
        const MAX_SWEEPS: usize = 64;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = {
                let mut acc = 0.0;
                for p in 0..n {
                    for q in (p + 1)..n {
                        acc += a[(p, q)].norm_sqr();
                    }
                }
                (2.0 * acc).sqrt()
            };
            if off <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let b = a[(p, q)];
                    let beta = b.norm();
                    if beta <= stop / (n as f64) {
                        continue;
                    }
                    // Unitary 2x2 rotation: phase-align the pivot, then a
                    // real Jacobi rotation on [[app, beta], [beta, aqq]].
                    let alpha = b.conj() / beta;
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * beta);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let (cc, ss) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
                    // Columns: A <- A U with U[p,p]=c, U[p,q]=s,
                    // U[q,p]=-s alpha, U[q,q]=c alpha.
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = cc * akp - ss * alpha * akq;
                        a[(k, q)] = ss * akp + cc * alpha * akq;
                    }
                    // Rows: A <- U^H A.
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = cc * apk - ss * alpha.conj() * aqk;
                        a[(q, k)] = ss * apk + cc * alpha.conj() * aqk;
                    }
                    // Accumulate V <- V U.
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = cc * vkp - ss * alpha * vkq;
                        v[(k, q)] = ss * vkp + cc * alpha * vkq;
                    }
                    // Restore exact Hermitian symmetry of the pivot pair.
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            eigenvectors.set_column(col, &v.column(i));
        }
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// Whether the smallest eigenvalue is negligible against the largest.
    pub fn is_singular(&self) -> bool {
        self.min() <= SINGULARITY_FLOOR * self.max().max(0.0)
    }

    /// Applies `f` to the spectrum: returns `V diag(f(lambda)) V^H x`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut coeffs = self.eigenvectors.adjoint() * x;
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            coeffs[i] *= Complex64::new(f(lambda), 0.0);
        }
        &self.eigenvectors * coeffs
    }

    /// Materializes `V diag(f(lambda)) V^H` as a matrix.
    pub fn function_matrix(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            let factor = Complex64::new(f(lambda), 0.0);
            for r in 0..n {
                scaled[(r, i)] *= factor;
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }
}

/// Largest singular value of a complex matrix; zero for empty shapes.
pub fn operator_norm_svd(matrix: &DMatrix<Complex64>) -> f64 {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return 0.0;
    }
    matrix
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |acc, &s| acc.max(s))
}

/// Largest singular value estimated by power iteration on `A^H A`,
/// independent of the SVD path. Deterministic for a fixed seed.
pub fn operator_norm_power(
    matrix: &DMatrix<Complex64>,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Ok(0.0);
    }
    let n = matrix.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_iterator(
        n,
        (0..n).map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        }),
    );
    let norm = v.norm();
    if norm == 0.0 {
        return Err(QuiltError::Domain("power iteration start vector is zero".into()));
    }
    v /= Complex64::new(norm, 0.0);
    let mut estimate = 0.0f64;
    for iter in 0..max_iter {
        let w = matrix.adjoint() * (matrix * &v);
        let next = w.norm();
        if next == 0.0 {
            return Ok(0.0);
        }
        let diff = (next - estimate).abs();
        estimate = next;
        v = w / Complex64::new(next, 0.0);
        if iter > 0 && diff <= tol * estimate.max(1.0) {
            return Ok(estimate.sqrt());
        }
    }
    Err(QuiltError::NonConvergence {
        iterations: max_iter,
        residual: estimate,
    })
}

/// Maximum absolute entry difference between two equally sized matrices.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
