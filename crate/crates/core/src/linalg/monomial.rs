use nalgebra::DMatrix;

use super::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Sparse operator with at most one nonzero entry per row and per column.
///
/// Pauli strings, products of `S^+`/`S^-`, diagonal phases, basis permutations
/// and their sector restrictions all have this shape. Column `c` maps
/// `|c>` to `value |row>` (or to zero).
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialOp {
    dim: usize,
    cols: Vec<Option<(usize, C64)>>,
}

impl MonomialOp {
    pub fn new(dim: usize, cols: Vec<Option<(usize, C64)>>) -> Result<Self> {
        if cols.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: cols.len() });
        }
        let mut seen = vec![false; dim];
        for &(row, _) in cols.iter().flatten() {
            if row >= dim || seen[row] {
                return Err(Error::NotMonomial);
            }
            seen[row] = true;
        }
        Ok(Self { dim, cols })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, cols: (0..dim).map(|c| Some((c, ONE))).collect() }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        Self {
            dim: values.len(),
            cols: values
                .iter()
                .enumerate()
                .map(|(c, &v)| (v != ZERO).then_some((c, v)))
                .collect(),
        }
    }

    /// Basis permutation `|c> -> |images[c]>`.
    pub fn permutation(images: &[usize]) -> Result<Self> {
        Self::new(images.len(), images.iter().map(|&r| Some((r, ONE))).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, c: usize) -> Option<(usize, C64)> {
        self.cols[c]
    }

    /// Reads a dense matrix; entries with modulus `<= tol` count as zero.
    pub fn from_dense(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        let n = m.dim();
        let mut cols = Vec::with_capacity(n);
        for c in 0..n {
            let mut entry = None;
            for r in 0..n {
                let v = m.get(r, c);
                if v.norm() > tol {
                    if entry.is_some() {
                        return Err(Error::NotMonomial);
                    }
                    entry = Some((r, v));
                }
            }
            cols.push(entry);
        }
        Self::new(n, cols)
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        for (c, entry) in self.cols.iter().enumerate() {
            if let Some((r, v)) = *entry {
                m.set(r, c, v);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut cols = vec![None; self.dim];
        for (c, entry) in self.cols.iter().enumerate() {
            if let Some((r, v)) = *entry {
                cols[r] = Some((c, v.conj()));
            }
        }
        Self { dim: self.dim, cols }
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let cols = other
            .cols
            .iter()
            .map(|entry| {
                entry.and_then(|(mid, v)| {
                    self.cols[mid].and_then(|(r, w)| {
                        let prod = w * v;
                        (prod != ZERO).then_some((r, prod))
                    })
                })
            })
            .collect();
        Self { dim: self.dim, cols }
    }

    pub fn scale(&self, factor: C64) -> Self {
        if factor == ZERO {
            return Self { dim: self.dim, cols: vec![None; self.dim] };
        }
        Self {
            dim: self.dim,
            cols: self.cols.iter().map(|e| e.map(|(r, v)| (r, v * factor))).collect(),
        }
    }

    /// A full permutation whose entries all have unit modulus.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.cols
            .iter()
            .all(|e| matches!(e, Some((_, v)) if (v.norm() - 1.0).abs() <= tol))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let mut out = vec![ZERO; self.dim];
        for (c, entry) in self.cols.iter().enumerate() {
            if let Some((r, w)) = *entry {
                out[r] += w * v[c];
            }
        }
        out
    }

    /// `self * m` for a (possibly rectangular) dense block with `dim` rows.
    pub fn apply_to_columns(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        assert_eq!(m.nrows(), self.dim, "dimension mismatch");
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            for (c, entry) in self.cols.iter().enumerate() {
                if let Some((r, w)) = *entry {
                    out[(r, j)] = w * m[(c, j)];
                }
            }
        }
        out
    }

    /// `B A B^dagger`.
    pub fn conjugate(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(a)?;
        let mut out = ComplexMatrix::zeros(self.dim);
        for (c2, e2) in self.cols.iter().enumerate() {
            let Some((r2, v2)) = *e2 else { continue };
            let v2c = v2.conj();
            for (c1, e1) in self.cols.iter().enumerate() {
                if let Some((r1, v1)) = *e1 {
                    out.set(r1, r2, v1 * a.get(c1, c2) * v2c);
                }
            }
        }
        Ok(out)
    }

    /// `Tr(A B)`.
    pub fn trace_with(&self, a: &ComplexMatrix) -> Result<C64> {
        self.check(a)?;
        Ok(self
            .cols
            .iter()
            .enumerate()
            .filter_map(|(c, e)| e.map(|(r, v)| a.get(c, r) * v))
            .sum())
    }

    /// `Tr(X B Y B^dagger)` in `O(dim^2)` without temporaries.
    pub fn sandwich_trace(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<C64> {
        self.check(x)?;
        self.check(y)?;
        let mut total = ZERO;
        for (c2, e2) in self.cols.iter().enumerate() {
            let Some((r2, v2)) = *e2 else { continue };
            let mut acc = ZERO;
            for (c1, e1) in self.cols.iter().enumerate() {
                if let Some((r1, v1)) = *e1 {
                    acc += x.get(r2, r1) * v1 * y.get(c1, c2);
                }
            }
            total += acc * v2.conj();
        }
        Ok(total)
    }

    fn check(&self, a: &ComplexMatrix) -> Result<()> {
        if a.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.dim() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>()))
    }

    fn sample_op() -> MonomialOp {
        // partial permutation with phases and one annihilated column
        MonomialOp::new(
            4,
            vec![Some((2, C64::new(0.0, 1.0))), None, Some((0, C64::new(-1.0, 0.0))), Some((3, ONE))],
        )
        .unwrap()
    }

    #[test]
    fn rejects_repeated_rows() {
        assert!(matches!(
            MonomialOp::new(2, vec![Some((0, ONE)), Some((0, ONE))]),
            Err(Error::NotMonomial)
        ));
    }

    #[test]
    fn dense_round_trip_and_algebra() {
        let b = sample_op();
        let dense = b.to_dense();
        assert_eq!(MonomialOp::from_dense(&dense, 1e-14).unwrap(), b);
        assert_eq!(b.adjoint().to_dense(), dense.adjoint());
        let c = MonomialOp::permutation(&[1, 2, 3, 0]).unwrap();
        assert!(b.compose(&c).to_dense().max_abs_diff(&(&dense * &c.to_dense())) < 1e-15);
        assert!(!b.is_unitary(1e-12));
        assert!(c.is_unitary(1e-12));
    }

    #[test]
    fn fast_kernels_match_dense_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = sample_op();
        let bd = b.to_dense();
        let x = random_matrix(4, &mut rng);
        let y = random_matrix(4, &mut rng);
        let want = &(&bd * &x) * &bd.adjoint();
        assert!(b.conjugate(&x).unwrap().max_abs_diff(&want) < 1e-14);
        assert!((b.trace_with(&x).unwrap() - (&x * &bd).trace()).norm() < 1e-14);
        let sandwich = (&(&(&x * &bd) * &y) * &bd.adjoint()).trace();
        assert!((b.sandwich_trace(&x, &y).unwrap() - sandwich).norm() < 1e-14);
        let cols = DMatrix::from_fn(4, 2, |i, j| C64::new(i as f64, j as f64));
        assert!((b.apply_to_columns(&cols) - bd.inner() * &cols).norm() < 1e-14);
    }
}
