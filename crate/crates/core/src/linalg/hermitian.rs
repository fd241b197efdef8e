use std::ops::Deref;

use num_complex::Complex;

use crate::error::{dim_err, Error, Result};
use crate::linalg::matrix::Matrix;
use crate::scalar::{creal, RealScalar};

/// Maximum number of cyclic Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius residual at which the Jacobi iteration stops (scaled by `max(1, ‖M‖_F)`).
pub const OFF_DIAGONAL_THRESHOLD: f64 = 1e-12;
/// Eigenvalues in `[-PSD_TOLERANCE, 0)` count as zero; anything lower is a genuine negative.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Square complex matrix equal to its adjoint.
///
/// Construction replaces the input `M` by `(M + M†)/2`, so the stored matrix is
/// exactly Hermitian up to the rounding of that average.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix<T> {
    inner: Matrix<T>,
}

/// Spectral decomposition `M = V diag(values) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: RealScalar> HermMatrix<T> {
    /// Symmetrizes any square matrix.
    pub fn symmetrize(m: Matrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(dim_err(format!("Hermitian matrix must be square, got {:?}", m.shape())));
        }
        let n = m.rows();
        let half = T::cst(0.5);
        let inner = Matrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * half);
        Ok(Self { inner })
    }

    /// Like [`HermMatrix::symmetrize`] but refuses inputs whose anti-Hermitian part
    /// exceeds `1e-9 · dim` in Frobenius norm.
    pub fn new(m: Matrix<T>) -> Result<Self> {
        let n = m.rows();
        let residual = m.hermitian_residual();
        let tol = T::cst(1e-9 * n as f64).max(T::epsilon() * T::cst(100.0 * n as f64));
        if residual > tol {
            return Err(Error::Invariant {
                invariant: "hermitian",
                residual: residual.to_f64_lossy(),
            });
        }
        Self::symmetrize(m)
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Matrix::identity(n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: Matrix::zeros(n, n) }
    }

    pub fn from_real_diag(diag: &[T]) -> Self {
        Self { inner: Matrix::from_real_diag(diag) }
    }

    /// `|v><v|` (not normalized).
    pub fn projector_onto(v: &[Complex<T>]) -> Self {
        Self { inner: Matrix::outer(v, v) }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.inner
    }

    /// Real trace.
    pub fn real_trace(&self) -> T {
        self.inner.trace().re
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        Ok(Self { inner: self.inner.try_add(&rhs.inner)? })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        Ok(Self { inner: self.inner.try_sub(&rhs.inner)? })
    }

    pub fn scale(&self, s: T) -> Self {
        Self { inner: self.inner.scale(s) }
    }

    /// `A B A` for Hermitian `A`, `B`, symmetrized.
    pub fn sandwich(&self, middle: &Self) -> Result<Self> {
        Self::symmetrize(self.inner.matmul(&middle.inner)?.matmul(&self.inner)?)
    }

    /// `S M S†` for arbitrary square `S`, symmetrized.
    pub fn congruence(&self, s: &Matrix<T>) -> Result<Self> {
        Self::symmetrize(self.inner.conjugate_by(s)?)
    }

    pub fn eig(&self) -> Result<Eigen<T>> {
        herm_eig(self)
    }

    pub fn sqrt(&self) -> Result<Self> {
        herm_sqrt(self)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eig()?.values[0])
    }

    pub fn max_eigenvalue(&self) -> Result<T> {
        Ok(*self.eig()?.values.last().expect("non-empty spectrum"))
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let e = self.eig()?;
        let mapped: Vec<T> = e.values.iter().map(|&l| f(l)).collect();
        Ok(e.reconstruct_with(&mapped))
    }

    /// Nearest positive semidefinite matrix in Frobenius norm.
    pub fn psd_part(&self) -> Result<Self> {
        self.map_spectrum(|l| l.max(T::zero()))
    }

    /// Rank counted as eigenvalues above `rel_tol · max(|λ|)`.
    pub fn rank(&self, rel_tol: T) -> Result<usize> {
        let e = self.eig()?;
        let scale = e.values.iter().fold(T::zero(), |a, l| a.max(l.abs()));
        if scale == T::zero() {
            return Ok(0);
        }
        Ok(e.values.iter().filter(|&&l| l > rel_tol * scale).count())
    }

    pub fn is_projection(&self, tol: T) -> Result<bool> {
        Ok(self.inner.matmul(&self.inner)?.distance(&self.inner)? <= tol)
    }
}

impl<T> Deref for HermMatrix<T> {
    type Target = Matrix<T>;
    fn deref(&self) -> &Matrix<T> {
        &self.inner
    }
}

impl<T: RealScalar> Eigen<T> {
    /// `V diag(values) V†` for a replacement spectrum.
    pub fn reconstruct_with(&self, values: &[T]) -> HermMatrix<T> {
        let v = &self.vectors;
        let n = v.rows();
        let m = Matrix::from_fn(n, n, |i, j| {
            values
                .iter()
                .enumerate()
                .fold(creal(T::zero()), |acc, (k, &l)| acc + v[(i, k)] * v[(j, k)].conj() * l)
        });
        HermMatrix::symmetrize(m).expect("square by construction")
    }

    pub fn reconstruct(&self) -> HermMatrix<T> {
        self.reconstruct_with(&self.values)
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies the real symmetric Jacobi rotation, so the
/// accumulated transform stays unitary.
pub fn herm_eig<T: RealScalar>(m: &HermMatrix<T>) -> Result<Eigen<T>> {
    let n = m.dim();
    let mut a = m.matrix().clone();
    let mut v = Matrix::<T>::identity(n);
    let norm = a.frobenius_norm();
    let threshold = T::cst(OFF_DIAGONAL_THRESHOLD)
        .max(T::epsilon() * T::cst(100.0))
        * norm.max(T::one());
    let tiny = T::min_positive_value().sqrt();

    let off = |a: &Matrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s = s + a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut residual = off(&a);
    let mut sweeps = 0;
    while residual > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                residual: residual.to_f64_lossy(),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tiny {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (T::cst(2.0) * r);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let g_pp = creal(c);
                let g_pq = creal(s);
                let g_qp = phase.conj() * (-s);
                let g_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                a[(p, q)] = creal(T::zero());
                a[(q, p)] = creal(T::zero());
                a[(p, p)] = creal(a[(p, p)].re);
                a[(q, q)] = creal(a[(q, q)].re);
            }
        }
        sweeps += 1;
        residual = off(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Eigen { values, vectors })
}

/// Unique positive square root. Eigenvalues in `[-1e-9, 0)` are treated as zero.
pub fn herm_sqrt<T: RealScalar>(m: &HermMatrix<T>) -> Result<HermMatrix<T>> {
    let e = herm_eig(m)?;
    let min = e.values[0];
    if min < -T::cst(PSD_TOLERANCE) {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min.to_f64_lossy(),
        });
    }
    let noise = round_off_floor(&e.values);
    let roots: Vec<T> = e
        .values
        .iter()
        .map(|&l| if l <= noise { T::zero() } else { l.sqrt() })
        .collect();
    Ok(e.reconstruct_with(&roots))
}

// Eigenvalues this close to zero are indistinguishable from rounding noise of
// the solver; their square roots would otherwise inflate to ~1e-8.
fn round_off_floor<T: RealScalar>(values: &[T]) -> T {
    let scale = values.iter().fold(T::one(), |a, l| a.max(l.abs()));
    T::epsilon() * T::cst(16.0 * values.len() as f64) * scale
}

/// `(M + ridge·1)^{-1/2}` for positive semidefinite `M`.
pub fn herm_inv_sqrt<T: RealScalar>(m: &HermMatrix<T>, ridge: T) -> Result<HermMatrix<T>> {
    let e = herm_eig(m)?;
    if e.values[0] < -T::cst(PSD_TOLERANCE) {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: e.values[0].to_f64_lossy(),
        });
    }
    let inv: Vec<T> = e
        .values
        .iter()
        .map(|&l| T::one() / (l.max(T::zero()) + ridge).sqrt())
        .collect();
    Ok(e.reconstruct_with(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_spectrum() {
        let e = herm_eig(&HermMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let e = herm_eig(&HermMatrix::<f64>::from_real_diag(&[0.75, 0.25])).unwrap();
        assert!((e.values[0] - 0.25).abs() < 1e-15);
        assert!((e.values[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = Matrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]).unwrap();
        let e = herm_eig(&HermMatrix::new(x.clone()).unwrap()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
        assert!(e.reconstruct().distance(&x).unwrap() < 1e-9);
    }

    #[test]
    fn complex_pivot_is_diagonalized() {
        let y = Matrix::from_rows(vec![
            vec![c(0.3, 0.), c(0.1, -0.4), c(0., 0.2)],
            vec![c(0.1, 0.4), c(-0.2, 0.), c(0.5, 0.5)],
            vec![c(0., -0.2), c(0.5, -0.5), c(1.0, 0.)],
        ])
        .unwrap();
        let h = HermMatrix::new(y.clone()).unwrap();
        let e = herm_eig(&h).unwrap();
        let v = &e.vectors;
        assert!((&v.adjoint() * v).distance(&Matrix::identity(3)).unwrap() < 1e-9);
        assert!(e.reconstruct().distance(&y).unwrap() < 1e-9);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sqrt_examples() {
        let id = HermMatrix::<f64>::identity(3);
        assert!(herm_sqrt(&id).unwrap().distance(&id).unwrap() < 1e-12);

        let p = HermMatrix::projector_onto(&[c(0.6, 0.), c(0., 0.8)]);
        assert!(herm_sqrt(&p).unwrap().distance(&p).unwrap() < 1e-9);

        let m = HermMatrix::from_real_diag(&[0.4, 0.9]);
        let expected = Matrix::from_real_diag(&[2.0 / 10f64.sqrt(), 3.0 / 10f64.sqrt()]);
        assert!(herm_sqrt(&m).unwrap().distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn sqrt_rejects_negative_and_clamps_roundoff() {
        let bad = HermMatrix::from_real_diag(&[-1e-6, 1.0]);
        assert!(matches!(herm_sqrt(&bad), Err(Error::NotPositiveSemidefinite { .. })));
        let ok = HermMatrix::from_real_diag(&[-1e-10, 1.0]);
        let r = herm_sqrt(&ok).unwrap();
        assert!(r.distance(&Matrix::from_real_diag(&[0.0, 1.0])).unwrap() < 1e-12);
    }

    #[test]
    fn new_rejects_non_hermitian() {
        let m = Matrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]]).unwrap();
        assert!(matches!(HermMatrix::new(m), Err(Error::Invariant { invariant: "hermitian", .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let m = HermMatrix::<f32>::from_real_diag(&[4.0, 9.0]);
        let r = herm_sqrt(&m).unwrap();
        assert!((r[(0, 0)].re - 2.0).abs() < 1e-5);
        assert!((r[(1, 1)].re - 3.0).abs() < 1e-5);
    }
}
