use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, MAX_DIM};

fn ginibre_column(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * s, im * s)
        })
        .collect()
}

/// First `cols` columns of a Haar unitary on `C^dim`.
///
/// Columns of a complex Ginibre matrix are orthonormalized in order with two
/// Gram-Schmidt passes; the triangular factor then has a positive diagonal,
/// which is the phase convention that makes the result Haar distributed.
/// Drawing `k < cols` columns from the same stream yields a prefix of the
/// larger draw.
pub fn haar_isometry(dim: usize, cols: usize, rng: &mut impl Rng) -> Result<DMatrix<C64>> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, cap: MAX_DIM });
    }
    if cols > dim {
        return Err(Error::RankTooLarge { rank: cols, dim });
    }
    let mut q = DMatrix::<C64>::zeros(dim, cols);
    for j in 0..cols {
        let mut v = ginibre_column(dim, rng);
        loop {
            for _pass in 0..2 {
                for i in 0..j {
                    let qi = q.column(i);
                    let overlap: C64 = qi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vk, qk) in v.iter_mut().zip(qi.iter()) {
                        *vk -= overlap * qk;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for (k, vk) in v.iter().enumerate() {
                    q[(k, j)] = vk / norm;
                }
                break;
            }
            v = ginibre_column(dim, rng);
        }
    }
    Ok(q)
}

pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    ComplexMatrix::from_inner(haar_isometry(dim, dim, rng)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_dimensional_draw_is_a_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(1, &mut rng).unwrap();
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn draws_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(haar_unitary(64, &mut rng).unwrap().is_unitary(1e-10));
    }

    #[test]
    fn isometry_is_prefix_of_unitary() {
        let u = haar_unitary(16, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let v = haar_isometry(16, 5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(u.inner().columns(0, 5), v.columns(0, 5));
    }

    #[test]
    fn first_moment_is_maximally_mixed() {
        let d = 8;
        let samples = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut acc = DMatrix::<C64>::from_element(d, d, ZERO);
        for _ in 0..samples {
            let v = haar_isometry(d, 1, &mut rng).unwrap();
            acc += &v * v.adjoint();
        }
        acc /= C64::new(samples as f64, 0.0);
        let tol = 5.0 / (samples as f64).sqrt();
        for r in 0..d {
            for c in 0..d {
                let want = if r == c { 1.0 / d as f64 } else { 0.0 };
                assert!((acc[(r, c)] - C64::new(want, 0.0)).norm() < tol);
            }
        }
    }

    #[test]
    fn rejects_oversized_requests() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(haar_isometry(4, 5, &mut rng), Err(Error::RankTooLarge { .. })));
    }
}
