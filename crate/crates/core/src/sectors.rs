//! Symmetry generators, charged operators and symmetry sectors.
//!
//! Site `i` (1-based) is bit `N - i` of a basis index, so site 1 is the most
//! significant bit and bitstrings read left to right in index order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{real, ComplexMatrix, MonomialOp, C64, MAX_DIM, ONE, ZERO};

/// Largest qubit count whose full Hilbert space fits under [`MAX_DIM`].
pub const MAX_QUBITS: usize = MAX_DIM.trailing_zeros() as usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliKind {
    /// `X̄ = X_1 X_2 ... X_N`.
    GlobalFlip,
    SingleZ(usize),
    SingleX(usize),
    /// `(X + iY)/2 = |0><1|`.
    SPlus(usize),
    /// `(X - iY)/2 = |1><0|`.
    SMinus(usize),
    /// `Σ_i (I - Z_i)/2`, the Hamming weight.
    Charge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliSpec {
    pub n: usize,
    pub kind: PauliKind,
}

impl PauliSpec {
    pub fn new(n: usize, kind: PauliKind) -> Result<Self> {
        let spec = Self { n, kind };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.n)?;
        match self.kind {
            PauliKind::SingleZ(i) | PauliKind::SingleX(i) | PauliKind::SPlus(i) | PauliKind::SMinus(i) => {
                check_site(i, self.n)
            }
            PauliKind::GlobalFlip | PauliKind::Charge => Ok(()),
        }
    }
}

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    Ok(())
}

pub(crate) fn check_site(site: usize, n: usize) -> Result<()> {
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    Ok(())
}

/// Bit mask of `site` in an `n`-qubit basis index.
#[inline]
pub fn site_mask(site: usize, n: usize) -> usize {
    1 << (n - site)
}

/// Monomial form of a Pauli-type operator.
pub fn pauli_monomial(spec: &PauliSpec) -> Result<MonomialOp> {
    spec.validate()?;
    let n = spec.n;
    let dim = 1usize << n;
    let all = dim - 1;
    let cols: Vec<Option<(usize, C64)>> = match spec.kind {
        PauliKind::GlobalFlip => (0..dim).map(|c| Some((c ^ all, ONE))).collect(),
        PauliKind::SingleX(i) => {
            let m = site_mask(i, n);
            (0..dim).map(|c| Some((c ^ m, ONE))).collect()
        }
        PauliKind::SingleZ(i) => {
            let m = site_mask(i, n);
            (0..dim).map(|c| Some((c, if c & m == 0 { ONE } else { -ONE }))).collect()
        }
        PauliKind::SPlus(i) => {
            let m = site_mask(i, n);
            (0..dim).map(|c| (c & m != 0).then_some((c ^ m, ONE))).collect()
        }
        PauliKind::SMinus(i) => {
            let m = site_mask(i, n);
            (0..dim).map(|c| (c & m == 0).then_some((c ^ m, ONE))).collect()
        }
        PauliKind::Charge => (0..dim)
            .map(|c| {
                let w = c.count_ones();
                (w > 0).then_some((c, real(w as f64)))
            })
            .collect(),
    };
    MonomialOp::new(dim, cols)
}

pub fn build_pauli(spec: &PauliSpec) -> Result<ComplexMatrix> {
    Ok(pauli_monomial(spec)?.to_dense())
}

/// `(I + X̄)/2`.
pub fn z2_projector(n: usize) -> Result<ComplexMatrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let all = dim - 1;
    Ok(ComplexMatrix::from_fn(dim, |r, c| {
        let mut v = 0.0;
        if r == c {
            v += 0.5;
        }
        if r == c ^ all {
            v += 0.5;
        }
        real(v)
    }))
}

/// Image of basis state `x` under the CNOT chain `CNOT(1,2) CNOT(2,3) ... CNOT(N-1,N)`
/// applied in that order: bit `k` becomes the parity of bits `1..=k`.
pub fn encoder_image(n: usize, x: usize) -> usize {
    let mut out = 0;
    let mut parity = 0;
    for site in 1..=n {
        let m = site_mask(site, n);
        parity ^= usize::from(x & m != 0);
        if parity == 1 {
            out |= m;
        }
    }
    out
}

/// Inverse of [`encoder_image`]: bit `k` becomes `b_{k-1} xor b_k`.
pub fn encoder_preimage(y: usize) -> usize {
    y ^ (y >> 1)
}

pub fn encoder_permutation(n: usize) -> Result<MonomialOp> {
    check_qubits(n)?;
    let images: Vec<usize> = (0..1usize << n).map(|x| encoder_image(n, x)).collect();
    MonomialOp::permutation(&images)
}

/// Basis states of Hamming weight `q`, in increasing index order.
pub fn hamming_weight_states(n: usize, q: usize) -> Vec<usize> {
    (0..1usize << n).filter(|x| x.count_ones() as usize == q).collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorLabel {
    Z2Even,
    U1(usize),
}

/// Orthonormal basis of a symmetry sector, stored as sparse full-space columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorBasis {
    pub n: usize,
    pub label: SectorLabel,
    columns: Vec<Vec<(usize, f64)>>,
}

impl SectorBasis {
    pub fn dim_sector(&self) -> usize {
        self.columns.len()
    }

    pub fn full_dim(&self) -> usize {
        1 << self.n
    }

    /// Sparse full-space amplitudes of each sector basis vector.
    pub fn basis_index_map(&self) -> &[Vec<(usize, f64)>] {
        &self.columns
    }

    /// Bitstrings of the U(1) basis states; `None` for the ℤ₂ sector.
    pub fn bitstrings(&self) -> Option<Vec<String>> {
        match self.label {
            SectorLabel::U1(_) => Some(
                self.columns
                    .iter()
                    .map(|col| format!("{:0width$b}", col[0].0, width = self.n))
                    .collect(),
            ),
            SectorLabel::Z2Even => None,
        }
    }

    pub fn projector(&self) -> ComplexMatrix {
        match self.label {
            SectorLabel::Z2Even => z2_projector(self.n).expect("validated qubit count"),
            SectorLabel::U1(q) => u1_projector(self.n, q).expect("validated sector"),
        }
    }

    /// `V M` for a `dim_sector x k` block.
    pub fn embed(&self, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if m.nrows() != self.dim_sector() {
            return Err(Error::DimensionMismatch { expected: self.dim_sector(), found: m.nrows() });
        }
        let mut out = DMatrix::zeros(self.full_dim(), m.ncols());
        for j in 0..m.ncols() {
            for (s, col) in self.columns.iter().enumerate() {
                let v = m[(s, j)];
                if v == ZERO {
                    continue;
                }
                for &(row, amp) in col {
                    out[(row, j)] += v * amp;
                }
            }
        }
        Ok(out)
    }

    /// `V† M` for a `full_dim x k` block.
    pub fn restrict_columns(&self, m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if m.nrows() != self.full_dim() {
            return Err(Error::DimensionMismatch { expected: self.full_dim(), found: m.nrows() });
        }
        let mut out = DMatrix::zeros(self.dim_sector(), m.ncols());
        for j in 0..m.ncols() {
            for (s, col) in self.columns.iter().enumerate() {
                out[(s, j)] = col.iter().map(|&(row, amp)| m[(row, j)] * amp).sum();
            }
        }
        Ok(out)
    }

    /// `V† A V`.
    pub fn restrict(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.dim() != self.full_dim() {
            return Err(Error::DimensionMismatch { expected: self.full_dim(), found: a.dim() });
        }
        let d = self.dim_sector();
        Ok(ComplexMatrix::from_fn(d, |s, t| {
            let mut acc = ZERO;
            for &(r, ar) in &self.columns[s] {
                for &(c, ac) in &self.columns[t] {
                    acc += a.get(r, c) * (ar * ac);
                }
            }
            acc
        }))
    }
}

pub fn u1_sector(n: usize, q: usize) -> Result<SectorBasis> {
    check_qubits(n)?;
    if q > n {
        return Err(Error::ChargeOutOfRange { q, n });
    }
    let columns = hamming_weight_states(n, q).into_iter().map(|x| vec![(x, 1.0)]).collect();
    Ok(SectorBasis { n, label: SectorLabel::U1(q), columns })
}

pub fn u1_projector(n: usize, q: usize) -> Result<ComplexMatrix> {
    check_qubits(n)?;
    if q > n {
        return Err(Error::ChargeOutOfRange { q, n });
    }
    let diag: Vec<f64> =
        (0..1usize << n).map(|x| if x.count_ones() as usize == q { 1.0 } else { 0.0 }).collect();
    Ok(ComplexMatrix::from_real_diagonal(&diag))
}

/// Even sector of `X̄`, with basis vectors `Enc(|+> ⊗ |j>)` for `j` over the
/// `N-1` trailing qubits.
pub fn z2_sector(n: usize) -> Result<SectorBasis> {
    check_qubits(n)?;
    let half = 1usize << (n - 1);
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let columns = (0..half)
        .map(|j| {
            let a = encoder_image(n, j);
            let b = encoder_image(n, j | half);
            let mut col = vec![(a, amp), (b, amp)];
            col.sort_by_key(|e| e.0);
            col
        })
        .collect();
    Ok(SectorBasis { n, label: SectorLabel::Z2Even, columns })
}

/// Dense `2^N x dim_sector` isometry.
pub fn sector_isometry(basis: &SectorBasis) -> DMatrix<C64> {
    let mut v = DMatrix::zeros(basis.full_dim(), basis.dim_sector());
    for (s, col) in basis.columns.iter().enumerate() {
        for &(row, amp) in col {
            v[(row, s)] = real(amp);
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli(n: usize, kind: PauliKind) -> ComplexMatrix {
        build_pauli(&PauliSpec::new(n, kind).unwrap()).unwrap()
    }

    fn dense(rows: &[&[f64]]) -> ComplexMatrix {
        let d = rows.len();
        ComplexMatrix::from_fn(d, |r, c| real(rows[r][c]))
    }

    #[test]
    fn single_site_operators() {
        assert_eq!(pauli(1, PauliKind::SPlus(1)), dense(&[&[0.0, 1.0], &[0.0, 0.0]]));
        assert_eq!(pauli(1, PauliKind::SMinus(1)), dense(&[&[0.0, 0.0], &[1.0, 0.0]]));
        assert_eq!(pauli(1, PauliKind::SingleZ(1)), dense(&[&[1.0, 0.0], &[0.0, -1.0]]));
        let x = pauli(1, PauliKind::SingleX(1));
        assert_eq!(pauli(2, PauliKind::GlobalFlip), x.kron(&x).unwrap());
        assert_eq!(
            pauli(2, PauliKind::Charge),
            ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0, 2.0])
        );
    }

    #[test]
    fn splus_matches_x_plus_iy() {
        let n = 3;
        let i = 2;
        let x = pauli(n, PauliKind::SingleX(i));
        let z = pauli(n, PauliKind::SingleZ(i));
        // Y = i X Z
        let y = (&x * &z).scale(C64::new(0.0, 1.0));
        let want = (&x + &y.scale(C64::new(0.0, 1.0))).scale_real(0.5);
        assert!(pauli(n, PauliKind::SPlus(i)).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn site_indices_are_validated() {
        assert!(matches!(PauliSpec::new(3, PauliKind::SingleZ(0)), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(PauliSpec::new(3, PauliKind::SPlus(4)), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(PauliSpec::new(0, PauliKind::Charge), Err(Error::QubitCount(0))));
        assert!(matches!(u1_sector(4, 5), Err(Error::ChargeOutOfRange { .. })));
    }

    #[test]
    fn z2_projector_properties() {
        let p1 = z2_projector(1).unwrap();
        assert!(p1.max_abs_diff(&dense(&[&[0.5, 0.5], &[0.5, 0.5]])) < 1e-15);
        let p = z2_projector(3).unwrap();
        assert!((p.trace().re - 4.0).abs() < 1e-12);
        assert!((&p * &p).max_abs_diff(&p) < 1e-12);
        let flip = pauli(3, PauliKind::GlobalFlip);
        assert!((&flip * &p).max_abs_diff(&p) < 1e-12);
        assert!((&p * &flip).max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn u1_bases_are_lexicographic() {
        let s = u1_sector(4, 2).unwrap();
        assert_eq!(s.dim_sector(), 6);
        assert_eq!(
            s.bitstrings().unwrap(),
            vec!["0011", "0101", "0110", "1001", "1010", "1100"]
        );
        assert_eq!(u1_sector(4, 0).unwrap().bitstrings().unwrap(), vec!["0000"]);
        let mut total = ComplexMatrix::zeros(32);
        for q in 0..=5 {
            total = &total + &u1_projector(5, q).unwrap();
            assert_eq!(u1_sector(5, q).unwrap().dim_sector(), binomial(5, q));
        }
        assert_eq!(total, ComplexMatrix::identity(32));
    }

    #[test]
    fn charge_commutes_with_sector_projectors() {
        let qhat = pauli(5, PauliKind::Charge);
        for q in 0..=5 {
            let p = u1_projector(5, q).unwrap();
            assert!((&(&p * &qhat) - &(&qhat * &p)).max_abs() < 1e-12);
            assert!((&qhat * &p).max_abs_diff(&p.scale_real(q as f64)) < 1e-12);
        }
    }

    #[test]
    fn isometries_span_their_sectors() {
        let v = sector_isometry(&u1_sector(2, 1).unwrap());
        assert_eq!(v[(1, 0)], ONE);
        assert_eq!(v[(2, 1)], ONE);
        for basis in [z2_sector(3).unwrap(), u1_sector(3, 1).unwrap(), z2_sector(6).unwrap()] {
            let v = sector_isometry(&basis);
            let gram = v.adjoint() * &v;
            let eye = DMatrix::<C64>::identity(basis.dim_sector(), basis.dim_sector());
            assert!((gram - eye).norm() < 1e-10);
            // V V† against the projector built independently
            let vv = ComplexMatrix::from_inner(&v * v.adjoint()).unwrap();
            assert!(vv.max_abs_diff(&basis.projector()) < 1e-10);
        }
    }

    #[test]
    fn z2_isometry_is_flip_invariant_and_encoded() {
        for n in 1..=5 {
            let basis = z2_sector(n).unwrap();
            let v = sector_isometry(&basis);
            let flip = pauli_monomial(&PauliSpec::new(n, PauliKind::GlobalFlip).unwrap()).unwrap();
            assert!((flip.apply_to_columns(&v) - &v).norm() < 1e-10);
            // Enc(|+> ⊗ |j>) built from the dense encoder permutation
            let enc = encoder_permutation(n).unwrap();
            let half = 1usize << (n - 1);
            let mut plus = DMatrix::<C64>::zeros(1 << n, half);
            for j in 0..half {
                plus[(j, j)] = real(std::f64::consts::FRAC_1_SQRT_2);
                plus[(j | half, j)] = real(std::f64::consts::FRAC_1_SQRT_2);
            }
            assert!((enc.apply_to_columns(&plus) - &v).norm() < 1e-12);
        }
    }

    #[test]
    fn encoder_matches_cnot_chain() {
        let n = 4;
        for x in 0..16usize {
            let mut y = x;
            for control in 1..n {
                if y & site_mask(control, n) != 0 {
                    y ^= site_mask(control + 1, n);
                }
            }
            assert_eq!(encoder_image(n, x), y);
            assert_eq!(encoder_preimage(y), x);
        }
    }

    #[test]
    fn charged_operator_algebra() {
        let n = 3;
        let flip = pauli(n, PauliKind::GlobalFlip);
        for i in 1..=n {
            let z = pauli(n, PauliKind::SingleZ(i));
            assert!((&(&flip * &z) * &flip).max_abs_diff(&z.scale_real(-1.0)) < 1e-12);
        }
        // S+ lowers the charge by one, so U(θ) S+ U(θ)† = e^{-iθ} S+.
        let theta = std::f64::consts::PI / 3.0;
        let phases: Vec<C64> =
            (0..1usize << n).map(|x| C64::from_polar(1.0, theta * x.count_ones() as f64)).collect();
        let u = ComplexMatrix::from_diagonal(&phases);
        for i in 1..=n {
            let sp = pauli(n, PauliKind::SPlus(i));
            let rotated = &(&u * &sp) * &u.adjoint();
            assert!(rotated.max_abs_diff(&sp.scale(C64::from_polar(1.0, -theta))) < 1e-10);
        }
    }

    #[test]
    fn restrict_and_embed_round_trip() {
        let basis = z2_sector(4).unwrap();
        let m = DMatrix::from_fn(8, 3, |i, j| C64::new(i as f64 - j as f64, 0.5 * j as f64));
        let full = basis.embed(&m).unwrap();
        assert!((basis.restrict_columns(&full).unwrap() - &m).norm() < 1e-12);
        let p = basis.projector();
        let restricted = basis.restrict(&p).unwrap();
        assert!(restricted.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
    }
}
