//! Strong-to-weak symmetry breaking diagnostics.
//!
//! For a charged operator `O` and sites `i != j`, with `B = O_i O_j†`:
//!
//! * `C  = Tr(rho B)`
//! * `R2 = Tr(rho B rho B†) / Tr(rho^2)`
//! * `R1 = Tr(sqrt(rho) B sqrt(rho) B†)`
//! * `F  = Tr sqrt(sqrt(rho) B rho B† sqrt(rho))` (unitary `O` only)

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::ensembles::Symmetry;
use crate::error::{Error, Result};
use crate::linalg::{
    orthonormal_eigenbasis, rank_tolerance, real, trace_norm, trace_norm_factored, ComplexMatrix,
    DensityMatrix, MonomialOp, C64, ZERO,
};
use crate::sectors::{check_site, pauli_monomial, PauliKind, PauliSpec};

/// Largest admissible imaginary part of `C`.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

/// Smallest purity for which `R2` is reported.
pub const MIN_PURITY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChargedOperator {
    Z,
    X,
    #[serde(rename = "splus")]
    SPlus,
}

impl ChargedOperator {
    pub fn is_unitary(self) -> bool {
        !matches!(self, ChargedOperator::SPlus)
    }

    /// Charged operator natural to each symmetry.
    pub fn default_for(symmetry: Symmetry) -> Self {
        match symmetry {
            Symmetry::Z2 => ChargedOperator::Z,
            Symmetry::U1 => ChargedOperator::SPlus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelatorKind {
    C,
    R1,
    R2,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorReport {
    pub i: usize,
    pub j: usize,
    pub kind: CorrelatorKind,
    pub value: f64,
    pub operator_kind: ChargedOperator,
}

/// `B = O_i O_j†` on `n` qubits.
pub fn pair_operator(n: usize, i: usize, j: usize, op: ChargedOperator) -> Result<MonomialOp> {
    check_site(i, n)?;
    check_site(j, n)?;
    if i == j {
        return Err(Error::SameSite(i));
    }
    let (oi, oj_dag) = match op {
        ChargedOperator::Z => (PauliKind::SingleZ(i), PauliKind::SingleZ(j)),
        ChargedOperator::X => (PauliKind::SingleX(i), PauliKind::SingleX(j)),
        ChargedOperator::SPlus => (PauliKind::SPlus(i), PauliKind::SMinus(j)),
    };
    let a = pauli_monomial(&PauliSpec::new(n, oi)?)?;
    let b = pauli_monomial(&PauliSpec::new(n, oj_dag)?)?;
    Ok(a.compose(&b))
}

fn qubits_of(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::DimensionMismatch { expected: dim.next_power_of_two().max(2), found: dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

#[derive(Clone, Debug)]
enum Representation {
    /// Full matrix and its square root.
    Dense { rho: ComplexMatrix, sqrt: ComplexMatrix },
    /// `rho = E diag(lambda) E†` on its support.
    Spectral { lambda: Vec<f64>, basis: DMatrix<C64> },
}

/// Precomputed state data shared by all correlators of one state.
///
/// Low-rank states (`rank^2 <= dim`) are handled in their eigenbasis at
/// `O(dim rank^2)` per pair; others use the dense square root at `O(dim^2)`.
#[derive(Clone, Debug)]
pub struct CorrelatorEngine {
    n: usize,
    purity: f64,
    repr: Representation,
}

impl CorrelatorEngine {
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let n = qubits_of(rho.dim())?;
        let m = rho.matrix();
        let purity = crate::linalg::purity(rho);
        if m.is_diagonal() {
            let sqrt = crate::linalg::matrix_sqrt_psd(m)?;
            return Ok(Self { n, purity, repr: Representation::Dense { rho: m.clone(), sqrt } });
        }
        let eig = m.eigh()?;
        if eig.eigenvalues[0] < -crate::linalg::PSD_TOLERANCE {
            return Err(Error::NotPsd { min_eigenvalue: eig.eigenvalues[0] });
        }
        let (lambda, basis) = eig.support();
        if lambda.len() * lambda.len() <= m.dim() {
            return Ok(Self { n, purity, repr: Representation::Spectral { lambda, basis } });
        }
        let mut scaled = basis.clone();
        for (k, l) in lambda.iter().enumerate() {
            scaled.column_mut(k).scale_mut(l.sqrt());
        }
        let sqrt = ComplexMatrix::from_inner(scaled * basis.adjoint())?;
        Ok(Self { n, purity, repr: Representation::Dense { rho: m.clone(), sqrt } })
    }

    /// `rho = F F†`; `F` must have unit Frobenius norm.
    pub fn from_factor(factor: &DMatrix<C64>) -> Result<Self> {
        let n = qubits_of(factor.nrows())?;
        let trace: f64 = factor.iter().map(|z| z.norm_sqr()).sum();
        if (trace - 1.0).abs() > crate::linalg::TRACE_TOLERANCE {
            return Err(Error::NotNormalized { trace });
        }
        let (lambda, basis) = orthonormal_eigenbasis(factor);
        if lambda.len() * lambda.len() > factor.nrows() {
            return Self::from_density(&DensityMatrix::from_factor(factor)?);
        }
        let purity = lambda.iter().map(|l| l * l).sum();
        Ok(Self { n, purity, repr: Representation::Spectral { lambda, basis } })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn is_spectral(&self) -> bool {
        matches!(self.repr, Representation::Spectral { .. })
    }

    /// `E† B E` in the spectral representation.
    fn projected(basis: &DMatrix<C64>, b: &MonomialOp) -> DMatrix<C64> {
        basis.adjoint() * b.apply_to_columns(basis)
    }

    pub fn c(&self, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
        let b = pair_operator(self.n, i, j, op)?;
        let value = match &self.repr {
            Representation::Dense { rho, .. } => b.trace_with(rho)?,
            Representation::Spectral { lambda, basis } => {
                let be = Self::projected(basis, &b);
                lambda.iter().enumerate().map(|(a, l)| be[(a, a)] * *l).sum()
            }
        };
        if value.im.abs() > IMAGINARY_TOLERANCE {
            return Err(Error::ComplexCorrelator(value.im));
        }
        Ok(value.re)
    }

    pub fn r2(&self, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
        if self.purity < MIN_PURITY {
            return Err(Error::VanishingPurity(self.purity));
        }
        let b = pair_operator(self.n, i, j, op)?;
        let numerator = match &self.repr {
            Representation::Dense { rho, .. } => b.sandwich_trace(rho, rho)?.re,
            Representation::Spectral { lambda, basis } => {
                let be = Self::projected(basis, &b);
                let mut acc = 0.0;
                for a in 0..lambda.len() {
                    for c in 0..lambda.len() {
                        acc += lambda[a] * lambda[c] * be[(a, c)].norm_sqr();
                    }
                }
                acc
            }
        };
        Ok(numerator / self.purity)
    }

    pub fn r1(&self, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
        let b = pair_operator(self.n, i, j, op)?;
        Ok(match &self.repr {
            Representation::Dense { sqrt, .. } => b.sandwich_trace(sqrt, sqrt)?.re,
            Representation::Spectral { lambda, basis } => {
                let be = Self::projected(basis, &b);
                let roots: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
                let mut acc = 0.0;
                for a in 0..roots.len() {
                    for c in 0..roots.len() {
                        acc += roots[a] * roots[c] * be[(a, c)].norm_sqr();
                    }
                }
                acc
            }
        })
    }

    pub fn f(&self, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
        if !op.is_unitary() {
            return Err(Error::NonUnitaryOperator);
        }
        let b = pair_operator(self.n, i, j, op)?;
        let total = match &self.repr {
            Representation::Dense { rho, sqrt } => {
                let sigma = b.conjugate(rho)?;
                let inner = &(sqrt * &sigma) * sqrt;
                let values = inner.eigenvalues()?;
                let tol = rank_tolerance(values.len(), &values);
                values.iter().filter(|&&x| x > tol).map(|x| x.sqrt()).sum()
            }
            Representation::Spectral { lambda, basis } => {
                let be = Self::projected(basis, &b);
                let roots: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
                let m = DMatrix::from_fn(roots.len(), roots.len(), |a, c| be[(a, c)] * (roots[a] * roots[c]));
                crate::linalg::singular_values(&m).iter().sum::<f64>()
            }
        };
        Ok(f64::clamp(total, 0.0, 1.0))
    }

    pub fn correlator(&self, kind: CorrelatorKind, i: usize, j: usize, op: ChargedOperator) -> Result<CorrelatorReport> {
        let value = match kind {
            CorrelatorKind::C => self.c(i, j, op)?,
            CorrelatorKind::R1 => self.r1(i, j, op)?,
            CorrelatorKind::R2 => self.r2(i, j, op)?,
            CorrelatorKind::F => self.f(i, j, op)?,
        };
        Ok(CorrelatorReport { i, j, kind, value, operator_kind: op })
    }

    /// Mean of `R1(i, j)` over ordered pairs `i != j`.
    ///
    /// `R1(i, j) = R1(j, i)` by cyclicity of the trace, so unordered pairs suffice.
    pub fn aggregate_r1(&self, op: ChargedOperator) -> Result<f64> {
        let n = self.n;
        let mut total = 0.0;
        for i in 1..=n {
            for j in i + 1..=n {
                total += self.r1(i, j, op)?;
            }
        }
        Ok(2.0 * total / (n * (n - 1)) as f64)
    }
}

pub fn correlator_c(rho: &DensityMatrix, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
    CorrelatorEngine::from_density(rho)?.c(i, j, op)
}

pub fn correlator_r2(rho: &DensityMatrix, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
    CorrelatorEngine::from_density(rho)?.r2(i, j, op)
}

pub fn correlator_r1(rho: &DensityMatrix, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
    CorrelatorEngine::from_density(rho)?.r1(i, j, op)
}

pub fn correlator_f(rho: &DensityMatrix, i: usize, j: usize, op: ChargedOperator) -> Result<f64> {
    if !op.is_unitary() {
        return Err(Error::NonUnitaryOperator);
    }
    CorrelatorEngine::from_density(rho)?.f(i, j, op)
}

pub fn aggregate_r1(rho: &DensityMatrix, op: ChargedOperator) -> Result<f64> {
    CorrelatorEngine::from_density(rho)?.aggregate_r1(op)
}

/// Trace-norm distances from strong symmetry, weak symmetry and commutation
/// with the generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryResiduals {
    /// `|| P rho P - rho ||` with `P` the (most populated) symmetry sector.
    pub strong: f64,
    /// `max || U rho U† - rho ||` over the tested group elements.
    pub weak: f64,
    /// `|| [G, rho] ||` for the generator `G` (`X̄` or `Q̂`).
    pub commutator: f64,
}

/// Weak-symmetry angles for U(1): `2 pi / 2^N` and `pi / 5`.
pub fn u1_test_angles(n: usize) -> [f64; 2] {
    [2.0 * std::f64::consts::PI / (1u64 << n) as f64, std::f64::consts::PI / 5.0]
}

fn charge_phase(n: usize, theta: f64) -> MonomialOp {
    let diag: Vec<C64> = (0..1usize << n).map(|x| C64::from_polar(1.0, theta * x.count_ones() as f64)).collect();
    MonomialOp::diagonal(&diag)
}

fn sector_mask(symmetry: Symmetry, n: usize, weights: &[f64]) -> Vec<bool> {
    match symmetry {
        Symmetry::Z2 => vec![true; 1 << n],
        Symmetry::U1 => {
            let best = (0..weights.len())
                .max_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(b.cmp(&a)))
                .unwrap_or(0);
            (0..1usize << n).map(|x| x.count_ones() as usize == best).collect()
        }
    }
}

fn generator(symmetry: Symmetry, n: usize) -> Result<MonomialOp> {
    pauli_monomial(&PauliSpec::new(
        n,
        match symmetry {
            Symmetry::Z2 => PauliKind::GlobalFlip,
            Symmetry::U1 => PauliKind::Charge,
        },
    )?)
}

fn weak_elements(symmetry: Symmetry, n: usize) -> Result<Vec<MonomialOp>> {
    Ok(match symmetry {
        Symmetry::Z2 => vec![generator(Symmetry::Z2, n)?],
        Symmetry::U1 => u1_test_angles(n).iter().map(|&t| charge_phase(n, t)).collect(),
    })
}

pub fn symmetry_residuals(rho: &DensityMatrix, symmetry: Symmetry) -> Result<SymmetryResiduals> {
    let n = qubits_of(rho.dim())?;
    let m = rho.matrix();
    let strong_projected = match symmetry {
        Symmetry::Z2 => {
            let p = crate::sectors::z2_projector(n)?;
            &(&p * m) * &p
        }
        Symmetry::U1 => {
            let mut weights = vec![0.0; n + 1];
            for x in 0..m.dim() {
                weights[x.count_ones() as usize] += m.get(x, x).re;
            }
            let mask = sector_mask(symmetry, n, &weights);
            ComplexMatrix::from_fn(m.dim(), |r, c| if mask[r] && mask[c] { m.get(r, c) } else { ZERO })
        }
    };
    let strong = trace_norm(&(&strong_projected - m));
    let mut weak: f64 = 0.0;
    for u in weak_elements(symmetry, n)? {
        weak = weak.max(trace_norm(&(&u.conjugate(m)? - m)));
    }
    let g = generator(symmetry, n)?.to_dense();
    let commutator = trace_norm(&(&(&g * m) - &(m * &g)));
    Ok(SymmetryResiduals { strong, weak, commutator })
}

fn hstack(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

fn signed_block(k: usize, off_diagonal: bool) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for a in 0..k {
        if off_diagonal {
            m[(a, k + a)] = real(1.0);
            m[(k + a, a)] = real(-1.0);
        } else {
            m[(a, a)] = real(1.0);
            m[(k + a, k + a)] = real(-1.0);
        }
    }
    m
}

/// [`symmetry_residuals`] for `rho = F F†` without forming `rho`.
pub fn symmetry_residuals_factor(factor: &DMatrix<C64>, symmetry: Symmetry) -> Result<SymmetryResiduals> {
    let n = qubits_of(factor.nrows())?;
    let k = factor.ncols();
    let diff = signed_block(k, false);
    let projected = match symmetry {
        Symmetry::Z2 => {
            // (I + X̄)/2 F
            let flip = generator(Symmetry::Z2, n)?;
            (factor + flip.apply_to_columns(factor)) * real(0.5)
        }
        Symmetry::U1 => {
            let mut weights = vec![0.0; n + 1];
            for (x, row) in factor.row_iter().enumerate() {
                weights[x.count_ones() as usize] += row.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
            let mask = sector_mask(symmetry, n, &weights);
            let mut p = factor.clone();
            for (x, mut row) in p.row_iter_mut().enumerate() {
                if !mask[x] {
                    row.fill(ZERO);
                }
            }
            p
        }
    };
    let strong = trace_norm_factored(&hstack(&projected, factor), &diff);
    let mut weak: f64 = 0.0;
    for u in weak_elements(symmetry, n)? {
        weak = weak.max(trace_norm_factored(&hstack(&u.apply_to_columns(factor), factor), &diff));
    }
    let g = generator(symmetry, n)?;
    let commutator = trace_norm_factored(&hstack(&g.apply_to_columns(factor), factor), &signed_block(k, true));
    Ok(SymmetryResiduals { strong, weak, commutator })
}

/// Simulated SWAP test on a state of known purity: each shot succeeds with
/// probability `(1 + purity)/2`. Returns `2 f - 1` and its binomial standard error.
pub fn swap_test_from_purity(purity: f64, shots: u64, rng: &mut impl Rng) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::InvalidConfig("SWAP test needs at least one shot".into()));
    }
    let p = ((1.0 + purity) / 2.0).clamp(0.0, 1.0);
    let successes = Binomial::new(shots, p)
        .map_err(|e| Error::InvalidConfig(format!("binomial parameters: {e}")))?
        .sample(rng);
    let f = successes as f64 / shots as f64;
    Ok((2.0 * f - 1.0, 2.0 * (f * (1.0 - f) / shots as f64).sqrt()))
}

pub fn swap_test_purity(rho: &DensityMatrix, shots: u64, rng: &mut impl Rng) -> Result<(f64, f64)> {
    swap_test_from_purity(crate::linalg::purity(rho), shots, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{reference_state, sample_z2_factor, EnsembleSpec, Randomness, UnitaryMode};
    use crate::sectors::build_pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ghz(n: usize) -> DensityMatrix {
        let dim = 1usize << n;
        let mut psi = vec![ZERO; dim];
        psi[0] = real(std::f64::consts::FRAC_1_SQRT_2);
        psi[dim - 1] = real(std::f64::consts::FRAC_1_SQRT_2);
        DensityMatrix::pure(&psi).unwrap()
    }

    fn basis_state(n: usize, x: usize) -> DensityMatrix {
        let mut psi = vec![ZERO; 1 << n];
        psi[x] = real(1.0);
        DensityMatrix::pure(&psi).unwrap()
    }

    /// Direct dense evaluation of all four correlators.
    fn dense_oracle(rho: &DensityMatrix, i: usize, j: usize, op: ChargedOperator) -> [f64; 4] {
        let n = rho.dim().trailing_zeros() as usize;
        let b = pair_operator(n, i, j, op).unwrap().to_dense();
        let bd = b.adjoint();
        let m = rho.matrix();
        let s = crate::linalg::matrix_sqrt_psd(m).unwrap();
        let c = (m * &b).trace().re;
        let r2 = (&(&(m * &b) * m) * &bd).trace().re / crate::linalg::purity(rho);
        let r1 = (&(&(&s * &b) * &s) * &bd).trace().re;
        let f = if op.is_unitary() {
            let sigma = DensityMatrix::new(&(&b * m) * &bd).unwrap();
            crate::linalg::fidelity(rho, &sigma).unwrap()
        } else {
            f64::NAN
        };
        [c, r1, r2, f]
    }

    #[test]
    fn pair_operator_is_product() {
        let n = 3;
        let b = pair_operator(n, 1, 3, ChargedOperator::SPlus).unwrap().to_dense();
        let sp = build_pauli(&PauliSpec::new(n, PauliKind::SPlus(1)).unwrap()).unwrap();
        let sm = build_pauli(&PauliSpec::new(n, PauliKind::SMinus(3)).unwrap()).unwrap();
        assert_eq!(b, &sp * &sm);
        assert!(matches!(pair_operator(3, 2, 2, ChargedOperator::Z), Err(Error::SameSite(2))));
        assert!(matches!(pair_operator(3, 1, 4, ChargedOperator::Z), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn reference_z2_values() {
        let rho = reference_state(Symmetry::Z2, 4, None).unwrap();
        let engine = CorrelatorEngine::from_density(&rho).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                if i == j {
                    continue;
                }
                assert!(engine.c(i, j, ChargedOperator::Z).unwrap().abs() < 1e-9);
                assert!((engine.r1(i, j, ChargedOperator::Z).unwrap() - 1.0).abs() < 1e-9);
                assert!((engine.r2(i, j, ChargedOperator::Z).unwrap() - 1.0).abs() < 1e-9);
                assert!((engine.f(i, j, ChargedOperator::Z).unwrap() - 1.0).abs() < 1e-9);
            }
        }
        assert!((engine.aggregate_r1(ChargedOperator::Z).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reference_u1_values() {
        let rho = reference_state(Symmetry::U1, 4, Some(2)).unwrap();
        assert!((correlator_r1(&rho, 1, 2, ChargedOperator::SPlus).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(correlator_c(&rho, 1, 2, ChargedOperator::SPlus).unwrap().abs() < 1e-12);
        let rho6 = reference_state(Symmetry::U1, 6, Some(3)).unwrap();
        assert!((aggregate_r1(&rho6, ChargedOperator::SPlus).unwrap() - 0.3).abs() < 1e-12);
        assert!(matches!(
            correlator_f(&rho, 1, 2, ChargedOperator::SPlus),
            Err(Error::NonUnitaryOperator)
        ));
    }

    #[test]
    fn ghz_and_product_states() {
        let g = ghz(4);
        assert!((correlator_c(&g, 1, 4, ChargedOperator::Z).unwrap() - 1.0).abs() < 1e-12);
        let zero = basis_state(3, 0);
        assert!(correlator_r2(&zero, 1, 2, ChargedOperator::SPlus).unwrap().abs() < 1e-12);
        // X_1 X_2 maps |000> to |110>, orthogonal to it
        assert!(correlator_f(&zero, 1, 2, ChargedOperator::X).unwrap().abs() < 1e-12);
    }

    #[test]
    fn engines_agree_with_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for (r, op) in [(1, ChargedOperator::Z), (2, ChargedOperator::X), (4, ChargedOperator::Z), (16, ChargedOperator::SPlus)] {
            let spec = EnsembleSpec::z2(5, r, UnitaryMode::Haar, Randomness::Keyed(0)).unwrap();
            let draw = sample_z2_factor(&spec, &mut rng).unwrap();
            let rho = draw.density().unwrap();
            let spectral = CorrelatorEngine::from_factor(&draw.factor).unwrap();
            let dense = CorrelatorEngine::from_density(&rho).unwrap();
            assert_eq!(spectral.is_spectral(), r * r <= 32);
            for (i, j) in [(1, 2), (2, 5), (4, 3)] {
                let want = dense_oracle(&rho, i, j, op);
                for engine in [&spectral, &dense] {
                    assert!((engine.c(i, j, op).unwrap() - want[0]).abs() < 1e-10);
                    assert!((engine.r1(i, j, op).unwrap() - want[1]).abs() < 1e-10);
                    assert!((engine.r2(i, j, op).unwrap() - want[2]).abs() < 1e-10);
                    if op.is_unitary() {
                        assert!((engine.f(i, j, op).unwrap() - want[3]).abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn projector_states_satisfy_correlator_inequalities() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..10 {
            let spec = EnsembleSpec::z2(6, 4, UnitaryMode::Haar, Randomness::Keyed(0)).unwrap();
            let draw = sample_z2_factor(&spec, &mut rng).unwrap();
            let e = CorrelatorEngine::from_factor(&draw.factor).unwrap();
            let r1 = e.r1(1, 6, ChargedOperator::Z).unwrap();
            let r2 = e.r2(1, 6, ChargedOperator::Z).unwrap();
            let f = e.f(1, 6, ChargedOperator::Z).unwrap();
            assert!((r1 - r2).abs() < 1e-8);
            assert!(r1 <= f + 1e-8 && f <= r1.sqrt() + 1e-8);
        }
    }

    #[test]
    fn residuals_of_reference_and_classical_mixture() {
        let rho0 = reference_state(Symmetry::Z2, 4, None).unwrap();
        let res = symmetry_residuals(&rho0, Symmetry::Z2).unwrap();
        assert!(res.strong < 1e-10 && res.weak < 1e-10 && res.commutator < 1e-10);
        let mixed = DensityMatrix::new(&basis_state(4, 0).matrix().scale_real(0.5) + &basis_state(4, 15).matrix().scale_real(0.5)).unwrap();
        let res = symmetry_residuals(&mixed, Symmetry::Z2).unwrap();
        assert!(res.weak < 1e-12);
        assert!((res.strong - 0.5).abs() < 1e-12);
        let rho_q = reference_state(Symmetry::U1, 4, Some(2)).unwrap();
        let res = symmetry_residuals(&rho_q, Symmetry::U1).unwrap();
        assert!(res.strong < 1e-10 && res.weak < 1e-10 && res.commutator < 1e-10);
    }

    #[test]
    fn factored_residuals_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let f = DMatrix::from_fn(16, 3, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let f = &f / real(f.norm());
        let rho = DensityMatrix::from_factor(&f).unwrap();
        for sym in [Symmetry::Z2, Symmetry::U1] {
            let a = symmetry_residuals(&rho, sym).unwrap();
            let b = symmetry_residuals_factor(&f, sym).unwrap();
            assert!((a.strong - b.strong).abs() < 1e-10, "{sym:?}");
            assert!((a.weak - b.weak).abs() < 1e-10, "{sym:?}");
            assert!((a.commutator - b.commutator).abs() < 1e-10, "{sym:?}");
        }
    }

    #[test]
    fn swap_test_estimates() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let pure = basis_state(3, 5);
        let (est, _) = swap_test_purity(&pure, 10_000, &mut rng).unwrap();
        assert_eq!(est, 1.0);
        let rho0 = reference_state(Symmetry::Z2, 6, None).unwrap();
        let (est, err) = swap_test_purity(&rho0, 100_000, &mut rng).unwrap();
        assert!((est - 1.0 / 32.0).abs() < 3.0 * err);
        assert!(swap_test_from_purity(0.5, 0, &mut rng).is_err());
    }
}
