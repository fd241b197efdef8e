use num_complex::Complex;

use crate::error::{dim_err, Error, Result};
use crate::linalg::matrix::{basis_vector, inner, vec_norm, Matrix};
use crate::scalar::RealScalar;

const ORTHONORMAL_TOLERANCE: f64 = 1e-9;
// A standard basis vector whose residual after projection falls below this is
// treated as lying in the span already collected.
const DEPENDENCE_THRESHOLD: f64 = 1e-7;

/// Multiplies `v` by a unit phase so its first entry of non-negligible magnitude
/// is real and positive.
pub fn fix_phase<T: RealScalar>(v: &mut [Complex<T>]) {
    let cutoff = T::cst(1e-12).max(T::epsilon() * T::cst(10.0));
    if let Some(pivot) = v.iter().copied().find(|z| z.norm() > cutoff) {
        let phase = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|z| *z = *z * phase);
    }
}

/// Extends orthonormal `columns` to a unitary on `C^dim`.
///
/// The input vectors become the leading columns unchanged. Remaining columns come
/// from Gram–Schmidt over `e_0, e_1, …` in index order (dependent candidates are
/// skipped), each phase-fixed with [`fix_phase`], so the result is fully
/// determined by the input.
pub fn complete_to_unitary<T: RealScalar>(columns: &[Vec<Complex<T>>], dim: usize) -> Result<Matrix<T>> {
    if dim == 0 {
        return Err(dim_err("dimension must be positive"));
    }
    if columns.len() > dim || columns.iter().any(|c| c.len() != dim) {
        return Err(dim_err(format!(
            "expected at most {dim} vectors of length {dim}"
        )));
    }
    let mut gram_residual = T::zero();
    for (i, u) in columns.iter().enumerate() {
        for (j, w) in columns.iter().enumerate() {
            let target = if i == j { T::one() } else { T::zero() };
            gram_residual = gram_residual + (inner(u, w) - Complex::new(target, T::zero())).norm_sqr();
        }
    }
    let gram_residual = gram_residual.sqrt();
    if gram_residual > T::cst(ORTHONORMAL_TOLERANCE).max(T::epsilon() * T::cst(100.0)) {
        return Err(Error::NotIsometry {
            residual: gram_residual.to_f64_lossy(),
        });
    }

    let mut basis: Vec<Vec<Complex<T>>> = columns.to_vec();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = basis_vector::<T>(dim, k);
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for u in &basis {
                let proj = inner(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi = *vi - *ui * proj;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm <= T::cst(DEPENDENCE_THRESHOLD) {
            continue;
        }
        v.iter_mut().for_each(|z| *z = *z / norm);
        fix_phase(&mut v);
        basis.push(v);
    }
    debug_assert_eq!(basis.len(), dim);
    Matrix::from_columns(&basis)
}

/// `‖U†U − 1‖_F`
pub fn unitarity_residual<T: RealScalar>(u: &Matrix<T>) -> T {
    if !u.is_square() {
        return T::infinity();
    }
    let g = &u.adjoint() * u;
    g.distance(&Matrix::identity(u.rows())).unwrap_or(T::infinity())
}

/// Normalizes `v`, failing on the zero vector.
pub fn normalized<T: RealScalar>(v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let n = vec_norm(v);
    if n <= T::epsilon() || v.is_empty() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|&z| z / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn e(n: usize, k: usize) -> Vec<Complex64> {
        basis_vector(n, k)
    }

    #[test]
    fn full_standard_basis_is_identity() {
        let u = complete_to_unitary(&[e(3, 0), e(3, 1), e(3, 2)], 3).unwrap();
        assert_eq!(u, Matrix::identity(3));
    }

    #[test]
    fn single_e2_completes_with_e1() {
        let u = complete_to_unitary(&[e(2, 1)], 2).unwrap();
        let expected = Matrix::from_columns(&[e(2, 1), e(2, 0)]).unwrap();
        assert!(u.distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn hadamard_column_completion() {
        let s = 1.0 / 2f64.sqrt();
        let plus = vec![Complex64::new(s, 0.), Complex64::new(s, 0.)];
        let minus = vec![Complex64::new(s, 0.), Complex64::new(-s, 0.)];
        let u = complete_to_unitary(std::slice::from_ref(&plus), 2).unwrap();
        let expected = Matrix::from_columns(&[plus, minus]).unwrap();
        assert!(u.distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_non_orthonormal_input() {
        let v = vec![Complex64::new(1., 0.), Complex64::new(1., 0.)];
        assert!(matches!(complete_to_unitary(&[v], 2), Err(Error::NotIsometry { .. })));
    }

    #[test]
    fn phase_fix_makes_leading_entry_positive() {
        let mut v = vec![Complex64::new(0., 0.), Complex64::new(0., -1.)];
        fix_phase(&mut v);
        assert!((v[1] - Complex64::new(1., 0.)).norm() < 1e-15);
    }
}
