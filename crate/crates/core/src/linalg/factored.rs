//! Kernels for operators given in factored, low-rank form.

use nalgebra::DMatrix;

use super::{rank_tolerance, singular_values, ComplexMatrix, C64};

/// Trace norm of `A M A^dagger` without forming the `d x d` product.
///
/// With the thin QR factorization `A = Q R`, the nonzero singular values of
/// `A M A^dagger` coincide with those of `R M R^dagger`.
pub fn trace_norm_factored(a: &DMatrix<C64>, middle: &DMatrix<C64>) -> f64 {
    assert_eq!(a.ncols(), middle.nrows(), "factor/middle shape mismatch");
    assert_eq!(middle.nrows(), middle.ncols(), "middle block must be square");
    if a.is_empty() {
        return 0.0;
    }
    if a.ncols() >= a.nrows() {
        let full = a * middle * a.adjoint();
        return singular_values(&full).iter().sum();
    }
    let r = a.clone().qr().r();
    let small = &r * middle * r.adjoint();
    singular_values(&small).iter().sum()
}

/// Eigenpairs of `F F^dagger` on its support, computed from the `m x m` Gram
/// matrix `F^dagger F`.
///
/// Returns ascending nonzero eigenvalues and the matching orthonormal
/// eigenvectors as the columns of a `d x rank` matrix.
pub fn orthonormal_eigenbasis(factor: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let gram = factor.adjoint() * factor;
    let eig = ComplexMatrix::from_inner(gram)
        .and_then(|g| g.eigh())
        .expect("Gram matrix of a factor is Hermitian");
    let tol = rank_tolerance(factor.nrows().max(factor.ncols()), &eig.eigenvalues);
    let v = eig.eigenvectors.inner();
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > tol)
        .collect();
    let mut basis = DMatrix::zeros(factor.nrows(), keep.len());
    for (col, &k) in keep.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[k].sqrt();
        let vk = v.column(k);
        let mut out = basis.column_mut(col);
        out.copy_from(&(factor * vk));
        out.scale_mut(scale);
    }
    (keep.iter().map(|&k| eig.eigenvalues[k]).collect(), basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::trace_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<C64> {
        DMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn factored_trace_norm_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(20, 4, &mut rng);
        let mut middle = DMatrix::<C64>::zeros(4, 4);
        for k in 0..4 {
            middle[(k, k)] = C64::new(if k < 2 { 1.0 } else { -1.0 }, 0.0);
        }
        let dense = ComplexMatrix::from_inner(&a * &middle * a.adjoint()).unwrap();
        let want = trace_norm(&dense);
        assert!((trace_norm_factored(&a, &middle) - want).abs() < 1e-10 * want.max(1.0));
    }

    #[test]
    fn eigenbasis_of_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random(12, 3, &mut rng);
        let (values, basis) = orthonormal_eigenbasis(&f);
        assert_eq!(values.len(), 3);
        let gram = basis.adjoint() * &basis;
        assert!((gram - DMatrix::<C64>::identity(3, 3)).norm() < 1e-12);
        let mut scaled = basis.clone();
        for (k, v) in values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*v);
        }
        let rebuilt = scaled * basis.adjoint();
        assert!((rebuilt - &f * f.adjoint()).norm() < 1e-12);
    }
}
