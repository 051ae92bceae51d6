//! Dense complex linear algebra.
//!
//! Every state and operator in the crate is ultimately a [`ComplexMatrix`]: a
//! square, dense, complex matrix capped at [`MAX_DIM`]. Storage is backed by
//! `nalgebra`; the wrapper adds the Hermitian/unitary/PSD predicates and the
//! handful of matrix functions the diagnostics need (square root of a PSD
//! matrix, trace norm, Uhlmann fidelity, purity).
//!
//! Eigenvalues whose magnitude is at rounding level (see
//! [`HermitianEig::rank_tolerance`]) are treated as exact zeros by the matrix
//! functions. Without that, rank-deficient states pick up spurious `sqrt(eps)`
//! contributions in every square-root based quantity.

mod factored;
mod monomial;

use std::ops::{Add, Mul, Sub};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use factored::{orthonormal_eigenbasis, trace_norm_factored};
pub use monomial::MonomialOp;

pub type C64 = Complex64;

/// Largest side length accepted for dense matrices (2^12).
pub const MAX_DIM: usize = 1 << 12;

/// Tolerance used to accept a matrix as Hermitian in PSD operations.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// Most negative eigenvalue tolerated (and clamped to zero) by PSD operations.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Tolerance on `|Tr(rho) - 1|` for density matrices.
pub const TRACE_TOLERANCE: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub(crate) fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Square dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, cap: MAX_DIM });
    }
    Ok(())
}

impl ComplexMatrix {
    /// # Panics
    /// If `dim` is zero or exceeds [`MAX_DIM`].
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim).expect("invalid matrix dimension");
        Self { inner: DMatrix::zeros(dim, dim) }
    }

    /// # Panics
    /// If `dim` is zero or exceeds [`MAX_DIM`].
    pub fn identity(dim: usize) -> Self {
        check_dim(dim).expect("invalid matrix dimension");
        Self { inner: DMatrix::identity(dim, dim) }
    }

    /// # Panics
    /// If `dim` is zero or exceeds [`MAX_DIM`].
    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        check_dim(dim).expect("invalid matrix dimension");
        Self { inner: DMatrix::from_fn(dim, dim, f) }
    }

    pub fn from_row_major(dim: usize, entries: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { inner: DMatrix::from_row_slice(dim, dim, &entries) })
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        self.inner.transpose().as_slice().to_vec()
    }

    pub fn from_inner(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::DimensionMismatch { expected: inner.nrows(), found: inner.ncols() });
        }
        check_dim(inner.nrows())?;
        Ok(Self { inner })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.inner[(i, i)] = v;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.inner[(i, i)] = real(v);
        }
        m
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        check_dim(a.len())?;
        Ok(Self { inner: DMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * b[j].conj()) })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.inner[(row, col)] = value;
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { inner: &self.inner * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(real(factor))
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let dim = self.dim() * other.dim();
        check_dim(dim)?;
        Ok(Self { inner: self.inner.kronecker(&other.inner) })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `M - M^dagger`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                dev = dev.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let prod = self.inner.adjoint() * &self.inner;
        let n = self.dim();
        prod.iter().enumerate().all(|(idx, z)| {
            let (i, j) = (idx % n, idx / n);
            let target = if i == j { ONE } else { ZERO };
            (z - target).norm() <= tol
        })
    }

    /// Hermitian within `tol` and no eigenvalue below `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match self.eigenvalues() {
            Ok(ev) => ev.first().is_none_or(|&min| min >= -tol),
            Err(_) => false,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.inner[(i, j)] == ZERO))
    }

    fn is_real(&self) -> bool {
        self.inner.iter().all(|z| z.im == 0.0)
    }

    fn hermitian_scale(&self) -> f64 {
        self.max_abs().max(1.0)
    }

    fn require_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOLERANCE * self.hermitian_scale() {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    /// Ascending eigenvalues of a Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let mut values: Vec<f64> = if self.is_diagonal() {
            (0..self.dim()).map(|i| self.inner[(i, i)].re).collect()
        } else if self.is_real() {
            let sym = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
                0.5 * (self.inner[(i, j)].re + self.inner[(j, i)].re)
            });
            symmetric_eigen(sym, false)?.0
        } else {
            symmetric_eigen(hermitian_part(&self.inner), false)?.0
        };
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
    pub fn eigh(&self) -> Result<HermitianEig> {
        self.require_hermitian()?;
        let n = self.dim();
        let (values, vectors): (Vec<f64>, DMatrix<C64>) = if self.is_diagonal() {
            ((0..n).map(|i| self.inner[(i, i)].re).collect(), DMatrix::identity(n, n))
        } else if self.is_real() {
            let sym = DMatrix::from_fn(n, n, |i, j| {
                0.5 * (self.inner[(i, j)].re + self.inner[(j, i)].re)
            });
            let (values, vectors) = symmetric_eigen(sym, true)?;
            (values, vectors.expect("requested").map(real))
        } else {
            let (values, vectors) = symmetric_eigen(hermitian_part(&self.inner), true)?;
            (values, vectors.expect("requested"))
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues = order.iter().map(|&k| values[k]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
        Ok(HermitianEig { eigenvalues, eigenvectors: Self { inner: eigenvectors } })
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.inner)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().into_iter().fold(0.0, f64::max)
    }
}

/// Spectral shifts, in units of the largest entry, retried when the implicit QR
/// iteration breaks down (it can on exactly degenerate dyadic input such as
/// stabilizer states).
const EIGEN_RETRY_SHIFTS: [f64; 3] = [0.5, -0.371, 1.137];

/// Eigenvalues (unsorted) and optionally eigenvectors of a symmetric/Hermitian matrix.
pub(crate) fn symmetric_eigen<T>(m: DMatrix<T>, vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<T>>)>
where
    T: ComplexField<RealField = f64>,
{
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    let attempt = |m: DMatrix<T>, shift: f64| -> (Vec<f64>, Option<DMatrix<T>>) {
        if vectors {
            let eig = m.symmetric_eigen();
            (eig.eigenvalues.iter().map(|x| x - shift).collect(), Some(eig.eigenvectors))
        } else {
            (m.symmetric_eigenvalues().iter().map(|x| x - shift).collect(), None)
        }
    };
    let first = attempt(m.clone(), 0.0);
    if finite(&first.0) {
        return Ok(first);
    }
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.clone().modulus())).max(f64::MIN_POSITIVE);
    for unit in EIGEN_RETRY_SHIFTS {
        let shift = unit * scale;
        let shifted = &m + DMatrix::<T>::identity(n, n) * T::from_real(shift);
        let out = attempt(shifted, shift);
        if finite(&out.0) && out.1.as_ref().is_none_or(|v| v.iter().all(|x| x.clone().is_finite())) {
            log::debug!("eigensolver recovered with spectral shift {shift:e}");
            return Ok(out);
        }
    }
    Err(Error::EigenSolver)
}

/// Singular values; falls back to the square roots of the eigenvalues of
/// `M^dagger M` if the SVD iteration breaks down.
pub(crate) fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let values: Vec<f64> = m.singular_values().iter().copied().collect();
    if values.iter().all(|x| x.is_finite()) {
        return values;
    }
    let gram = m.adjoint() * m;
    match symmetric_eigen(hermitian_part(&gram), false) {
        Ok((eig, _)) => eig.into_iter().map(|x| x.max(0.0).sqrt()).collect(),
        Err(_) => values,
    }
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * real(0.5)
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

/// Spectral data of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|x| x)
    }

    /// `V f(diag) V^dagger`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = self.eigenvectors.inner();
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let fk = f(lambda);
            scaled.column_mut(k).scale_mut(fk);
        }
        debug_assert_eq!(scaled.ncols(), n);
        ComplexMatrix { inner: scaled * v.adjoint() }
    }

    /// Magnitude below which an eigenvalue is indistinguishable from zero:
    /// `dim * 4 eps * max(1, max |lambda|)`.
    pub fn rank_tolerance(&self) -> f64 {
        rank_tolerance(self.eigenvalues.len(), &self.eigenvalues)
    }

    /// Eigenpairs whose eigenvalue exceeds [`Self::rank_tolerance`].
    pub fn support(&self) -> (Vec<f64>, DMatrix<C64>) {
        let tol = self.rank_tolerance();
        let keep: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&k| self.eigenvalues[k] > tol)
            .collect();
        let v = self.eigenvectors.inner();
        let values = keep.iter().map(|&k| self.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(v.nrows(), keep.len(), |i, j| v[(i, keep[j])]);
        (values, vectors)
    }
}

pub(crate) fn rank_tolerance(dim: usize, eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    dim as f64 * 4.0 * f64::EPSILON * scale
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-1e-9, 0)` are clamped to zero; anything more negative is
/// reported as [`Error::NotPsd`].
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.is_diagonal() {
        m.require_hermitian()?;
        let diag: Vec<f64> = (0..m.dim()).map(|i| m.get(i, i).re).collect();
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        let tol = rank_tolerance(diag.len(), &diag);
        return Ok(ComplexMatrix::from_real_diagonal(
            &diag.iter().map(|&x| if x > tol { x.sqrt() } else { 0.0 }).collect::<Vec<_>>(),
        ));
    }
    let eig = m.eigh()?;
    let min = eig.eigenvalues[0];
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    let (values, vectors) = eig.support();
    let mut scaled = vectors.clone();
    for (k, lambda) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(lambda.sqrt());
    }
    Ok(ComplexMatrix { inner: scaled * vectors.adjoint() })
}

/// Sum of singular values (no factor 1/2).
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    if m.hermitian_deviation() <= 1e-12 * m.hermitian_scale() {
        if let Ok(values) = m.eigenvalues() {
            return values.iter().map(|x| x.abs()).sum();
        }
    }
    m.singular_values().iter().sum()
}

/// Purity `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().inner().iter().map(|z| z.norm_sqr()).sum()
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let s = matrix_sqrt_psd(rho.matrix())?;
    let inner = &(&s * sigma.matrix()) * &s;
    let values = inner.eigenvalues()?;
    let tol = rank_tolerance(values.len(), &values);
    let total: f64 = values.iter().filter(|&&x| x > tol).map(|x| x.sqrt()).sum();
    Ok(total.clamp(0.0, 1.0))
}

/// Hermitian, PSD, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity (within 1e-9).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        matrix.require_hermitian()?;
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(Error::NotNormalized { trace: trace.re });
        }
        let values = matrix.eigenvalues()?;
        if values[0] < -PSD_TOLERANCE {
            return Err(Error::NotPsd { min_eigenvalue: values[0] });
        }
        Ok(Self { matrix })
    }

    /// `rho = F F^dagger`; positive by construction, so only the trace is checked.
    pub fn from_factor(factor: &DMatrix<C64>) -> Result<Self> {
        let matrix = ComplexMatrix::from_inner(factor * factor.adjoint())?;
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NotNormalized { trace });
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &[C64]) -> Result<Self> {
        let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::NotNormalized { trace: norm });
        }
        Ok(Self { matrix: ComplexMatrix::outer(state, state)? })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!((matrix.trace().re - 1.0).abs() < 1e-8);
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `B rho B^dagger`, renormalized; errors if the result vanishes.
    pub fn conjugated(&self, op: &MonomialOp) -> Result<Self> {
        let m = op.conjugate(&self.matrix)?;
        let trace = m.trace().re;
        if trace < 1e-14 {
            return Err(Error::NotNormalized { trace });
        }
        Ok(Self { matrix: m.scale_real(1.0 / trace) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        ComplexMatrix::from_inner(hermitian_part(&g)).unwrap()
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = ComplexMatrix::from_real_diagonal(&[4.0, 1.0]);
        let s = matrix_sqrt_psd(&m).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[2.0, 1.0])) < 1e-15);
        let id = ComplexMatrix::identity(7);
        assert!(matrix_sqrt_psd(&id).unwrap().max_abs_diff(&id) < 1e-15);
    }

    #[test]
    fn sqrt_rejects_bad_input() {
        let neg = ComplexMatrix::from_real_diagonal(&[1.0, -0.1]);
        assert!(matches!(matrix_sqrt_psd(&neg), Err(Error::NotPsd { .. })));
        let mut skew = ComplexMatrix::identity(2);
        skew.set(0, 1, real(0.5));
        assert!(matches!(matrix_sqrt_psd(&skew), Err(Error::NotHermitian { .. })));
        // tiny negative eigenvalue is clamped
        let ok = ComplexMatrix::from_real_diagonal(&[1.0, -1e-12]);
        assert_eq!(matrix_sqrt_psd(&ok).unwrap().get(1, 1), ZERO);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 5, 16, 64] {
            let h = random_hermitian(dim, &mut rng);
            let psd = &h * &h;
            let s = matrix_sqrt_psd(&psd).unwrap();
            assert!(s.is_hermitian(1e-12));
            assert!((&s * &s).max_abs_diff(&psd) < 1e-9);
        }
    }

    #[test]
    fn eig_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [1, 3, 32, 256] {
            let h = random_hermitian(dim, &mut rng);
            let eig = h.eigh().unwrap();
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(eig.eigenvectors.is_unitary(1e-10));
            let diff = &eig.reconstruct() - &h;
            assert!(diff.operator_norm() < 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn trace_norm_basics() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(4)), 0.0);
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -2.0, 0.5]);
        assert!((trace_norm(&m) - 3.5).abs() < 1e-14);
        // non-Hermitian: |0><1| has one singular value 1
        let mut e01 = ComplexMatrix::zeros(2);
        e01.set(0, 1, ONE);
        assert!((trace_norm(&e01) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_cases() {
        let zero = DensityMatrix::pure(&[ONE, ZERO]).unwrap();
        let one = DensityMatrix::pure(&[ZERO, ONE]).unwrap();
        assert_eq!(fidelity(&zero, &one).unwrap(), 0.0);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2);
        // F(|0>, I/2) = sqrt(1/2)
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        let m = ComplexMatrix::from_real_diagonal(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotNormalized { .. })));
        let m = ComplexMatrix::from_real_diagonal(&[1.2, -0.2]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPsd { .. })));
        assert!(ComplexMatrix::from_row_major(2, vec![ONE; 3]).is_err());
        assert!(matches!(
            ComplexMatrix::from_inner(DMatrix::zeros(MAX_DIM + 1, MAX_DIM + 1)),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn purity_values() {
        let zero = DensityMatrix::pure(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        assert!((purity(&zero) - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed(8)) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn row_major_round_trip() {
        let entries: Vec<C64> = (0..9).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let m = ComplexMatrix::from_row_major(3, entries.clone()).unwrap();
        assert_eq!(m.get(0, 1), entries[1]);
        assert_eq!(m.get(1, 0), entries[3]);
        assert_eq!(m.to_row_major(), entries);
    }
}
