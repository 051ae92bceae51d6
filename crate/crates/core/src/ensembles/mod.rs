//! Random-state ensembles with strong ℤ₂ or U(1) symmetry.
//!
//! ℤ₂ states are `V U Π_r U† V† / r` with `V` the even-sector isometry and
//! `U` drawn on the `2^{N-1}`-dimensional sector. U(1) states are the charge-`Q`
//! projection of `U Π_r U† / r` with `U` drawn on the full space. `Π_r`
//! projects onto the first `r` computational basis states.

mod clifford;
mod haar;
mod pfc;
pub mod rng;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use clifford::{random_clifford, CliffordTableau, Pauli, MAX_DENSE_CLIFFORD_QUBITS};
pub use haar::{haar_isometry, haar_unitary};
pub use pfc::{keyed_phase_bit, KeyedPermutation, PfcUnitary};

use crate::error::{Error, Result};
use crate::linalg::{real, ComplexMatrix, DensityMatrix, C64, TRACE_TOLERANCE, ZERO};
use crate::sectors::{
    check_qubits, encoder_permutation, u1_projector, u1_sector, z2_sector, MAX_QUBITS,
};

/// Smallest acceptance probability accepted by the U(1) projection.
pub const MIN_ACCEPTANCE: f64 = 1e-12;

/// Upper bound on charge measurements per postselected draw.
pub const MAX_POSTSELECTION_ATTEMPTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Z2,
    U1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitaryMode {
    Haar,
    Clifford,
    Pfc,
}

impl UnitaryMode {
    pub const ALL: [UnitaryMode; 3] = [UnitaryMode::Haar, UnitaryMode::Clifford, UnitaryMode::Pfc];

    pub fn name(self) -> &'static str {
        match self {
            UnitaryMode::Haar => "haar",
            UnitaryMode::Clifford => "clifford",
            UnitaryMode::Pfc => "pfc",
        }
    }
}

/// Keyed draws are reproducible from the seed; fresh draws take a master
/// seed from the operating system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Randomness {
    Fresh,
    Keyed(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preparation {
    /// Deterministic projection onto the target charge.
    #[default]
    Project,
    /// Repeated charge measurement until the target charge is observed.
    Postselect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PreparationPath {
    Formula,
    Circuit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub r: usize,
    pub symmetry: Symmetry,
    pub q: Option<usize>,
    pub unitary_mode: UnitaryMode,
    pub randomness: Randomness,
    pub preparation: Preparation,
}

impl EnsembleSpec {
    pub fn z2(n: usize, r: usize, unitary_mode: UnitaryMode, randomness: Randomness) -> Result<Self> {
        let spec = Self {
            n,
            r,
            symmetry: Symmetry::Z2,
            q: None,
            unitary_mode,
            randomness,
            preparation: Preparation::Project,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn u1(
        n: usize,
        q: usize,
        r: usize,
        unitary_mode: UnitaryMode,
        randomness: Randomness,
    ) -> Result<Self> {
        let spec = Self {
            n,
            r,
            symmetry: Symmetry::U1,
            q: Some(q),
            unitary_mode,
            randomness,
            preparation: Preparation::Project,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_preparation(mut self, preparation: Preparation) -> Self {
        self.preparation = preparation;
        self
    }

    /// Qubits acted on by the random unitary.
    pub fn unitary_qubits(&self) -> usize {
        match self.symmetry {
            Symmetry::Z2 => self.n - 1,
            Symmetry::U1 => self.n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_qubits(self.n)?;
        if self.symmetry == Symmetry::Z2 && self.n < 2 {
            return Err(Error::QubitCount(self.n));
        }
        if !self.r.is_power_of_two() {
            return Err(Error::RankNotPowerOfTwo(self.r));
        }
        let dim = 1usize << self.unitary_qubits();
        if self.r > dim {
            return Err(Error::RankTooLarge { rank: self.r, dim });
        }
        if self.unitary_mode != UnitaryMode::Haar && self.unitary_qubits() > MAX_QUBITS {
            return Err(Error::QubitCount(self.n));
        }
        match (self.symmetry, self.q) {
            (Symmetry::U1, None) => {
                return Err(Error::InvalidConfig("U(1) ensembles need a target charge".into()))
            }
            (Symmetry::U1, Some(q)) => {
                if q > self.n {
                    return Err(Error::ChargeOutOfRange { q, n: self.n });
                }
                let offset = (q as f64 - self.n as f64 / 2.0).abs();
                if offset > (self.n as f64).sqrt() {
                    log::warn!(
                        "charge {q} is far from N/2 = {}; postselection overhead grows quickly",
                        self.n as f64 / 2.0
                    );
                }
            }
            (Symmetry::Z2, Some(_)) => {
                return Err(Error::InvalidConfig("ℤ₂ ensembles take no charge".into()))
            }
            (Symmetry::Z2, None) => {}
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub spec: EnsembleSpec,
    pub draw: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreparedState {
    pub rho: DensityMatrix,
    pub acceptance_probability: f64,
    pub provenance: Provenance,
}

/// Low-rank draw `rho = F F†` with `F` of shape `2^N x r` (zero rows outside the sector).
#[derive(Clone, Debug, PartialEq)]
pub struct StateFactor {
    pub factor: DMatrix<C64>,
    pub acceptance_probability: f64,
    /// Charge measurements spent (1 without postselection).
    pub attempts: usize,
}

impl StateFactor {
    pub fn density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_factor(&self.factor)
    }
}

/// Dense random unitary on `n` qubits.
pub fn sample_unitary(
    n: usize,
    mode: UnitaryMode,
    randomness: Randomness,
    rng: &mut impl Rng,
) -> Result<ComplexMatrix> {
    sample_isometry(n, 1 << n, mode, randomness, rng).and_then(ComplexMatrix::from_inner)
}

/// First `cols` columns of the unitary [`sample_unitary`] would return for the same stream.
pub fn sample_isometry(
    n: usize,
    cols: usize,
    mode: UnitaryMode,
    randomness: Randomness,
    rng: &mut impl Rng,
) -> Result<DMatrix<C64>> {
    let dim = 1usize << n;
    match mode {
        UnitaryMode::Haar => haar_isometry(dim, cols, rng),
        UnitaryMode::Clifford => {
            if n == 0 {
                return Ok(DMatrix::from_element(1, cols, real(1.0)));
            }
            CliffordTableau::random(n, rng)?.columns(cols)
        }
        UnitaryMode::Pfc => {
            if n == 0 {
                return Ok(DMatrix::from_element(1, cols, real(1.0)));
            }
            let pfc = match randomness {
                Randomness::Fresh => PfcUnitary::fresh(n, rng)?,
                Randomness::Keyed(_) => PfcUnitary::keyed(n, rng.random::<u64>())?,
            };
            pfc.columns(cols)
        }
    }
}

/// Dense PFC unitary; keyed mode draws its key from `rng`.
pub fn pfc_unitary(n: usize, randomness: Randomness, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    sample_unitary(n, UnitaryMode::Pfc, randomness, rng)
}

/// CNOT staircase `CNOT(N-1,N) ... CNOT(2,3) CNOT(1,2)`, applied with control 1 first.
pub fn encoder_circuit(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::QubitCount(n));
    }
    Ok(encoder_permutation(n)?.to_dense())
}

/// Replaces the last `m` qubits by the maximally mixed state.
pub fn depolarize_last_qubits(rho: &ComplexMatrix, m: usize) -> ComplexMatrix {
    let dim = rho.dim();
    let block = 1usize << m;
    let hi = dim / block;
    let mut reduced = vec![ZERO; hi * hi];
    for a in 0..hi {
        for b in 0..hi {
            reduced[a * hi + b] = (0..block).map(|l| rho.get(a * block + l, b * block + l)).sum();
        }
    }
    let inv = 1.0 / block as f64;
    ComplexMatrix::from_fn(dim, |row, col| {
        if row % block == col % block {
            reduced[(row / block) * hi + col / block] * inv
        } else {
            ZERO
        }
    })
}

/// `(I ⊗ U) rho (I ⊗ U)†` with `U` acting on the trailing qubits.
fn apply_on_trailing(rho: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    let sub = u.dim();
    let blocks = rho.dim() / sub;
    let mut out = DMatrix::<C64>::zeros(rho.dim(), rho.dim());
    let ud = u.inner().adjoint();
    for bi in 0..blocks {
        for bj in 0..blocks {
            let block = rho.inner().view((bi * sub, bj * sub), (sub, sub));
            let rotated = u.inner() * block * &ud;
            out.view_mut((bi * sub, bj * sub), (sub, sub)).copy_from(&rotated);
        }
    }
    ComplexMatrix::from_inner(out).expect("dimension bounded by input")
}

fn require_symmetry(spec: &EnsembleSpec, want: Symmetry) -> Result<()> {
    spec.validate()?;
    if spec.symmetry != want {
        return Err(Error::InvalidConfig(format!(
            "expected a {want:?} ensemble, got {:?}",
            spec.symmetry
        )));
    }
    Ok(())
}

/// Low-rank ℤ₂ draw `F = V W / sqrt(r)` with `W` the first `r` columns of the sector unitary.
pub fn sample_z2_factor(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<StateFactor> {
    require_symmetry(spec, Symmetry::Z2)?;
    let w = sample_isometry(spec.n - 1, spec.r, spec.unitary_mode, spec.randomness, rng)?;
    let basis = z2_sector(spec.n)?;
    let factor = basis.embed(&w)? * real(1.0 / (spec.r as f64).sqrt());
    Ok(StateFactor { factor, acceptance_probability: 1.0, attempts: 1 })
}

pub fn prepare_z2_state(
    spec: &EnsembleSpec,
    rng: &mut impl Rng,
    path: PreparationPath,
) -> Result<PreparedState> {
    require_symmetry(spec, Symmetry::Z2)?;
    let rho = match path {
        PreparationPath::Formula => sample_z2_factor(spec, rng)?.density()?,
        PreparationPath::Circuit => {
            let n = spec.n;
            let u = sample_unitary(n - 1, spec.unitary_mode, spec.randomness, rng)?;
            let dim = 1usize << n;
            let half = dim / 2;
            // |+><+| ⊗ |0...0><0...0|
            let mut input = ComplexMatrix::zeros(dim);
            for (a, b) in [(0, 0), (0, half), (half, 0), (half, half)] {
                input.set(a, b, real(0.5));
            }
            let mixed = depolarize_last_qubits(&input, spec.r.trailing_zeros() as usize);
            let rotated = apply_on_trailing(&mixed, &u);
            let encoded = encoder_permutation(n)?.conjugate(&rotated)?;
            let trace = encoded.trace().re;
            if (trace - 1.0).abs() > TRACE_TOLERANCE {
                return Err(Error::NotNormalized { trace });
            }
            DensityMatrix::from_trusted(encoded)
        }
    };
    Ok(PreparedState {
        rho,
        acceptance_probability: 1.0,
        provenance: Provenance { spec: *spec, draw: None },
    })
}

/// Probability of each charge `0..=n` for `rho = F F†`.
pub fn charge_distribution(factor: &DMatrix<C64>, n: usize) -> Vec<f64> {
    let mut probs = vec![0.0; n + 1];
    for (x, row) in factor.row_iter().enumerate() {
        probs[x.count_ones() as usize] += row.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    probs
}

/// Inverse-CDF draw from a discrete distribution.
pub fn sample_charge(probs: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (q, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return q;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Charge measurement channel: outcome `Q` with probability `Tr(P_Q sigma)` and
/// post-measurement state `P_Q sigma P_Q / p_Q`.
pub fn charge_measurement(
    sigma: &DensityMatrix,
    rng: &mut impl Rng,
) -> Result<(usize, DensityMatrix, f64)> {
    let dim = sigma.dim();
    if !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch { expected: dim.next_power_of_two(), found: dim });
    }
    let n = dim.trailing_zeros() as usize;
    let m = sigma.matrix();
    let mut probs = vec![0.0; n + 1];
    for x in 0..dim {
        probs[x.count_ones() as usize] += m.get(x, x).re;
    }
    let q = sample_charge(&probs, rng);
    let p = probs[q];
    let post = ComplexMatrix::from_fn(dim, |r, c| {
        if r.count_ones() as usize == q && c.count_ones() as usize == q {
            m.get(r, c) / p
        } else {
            ZERO
        }
    });
    Ok((q, DensityMatrix::from_trusted(post), p))
}

/// Rows of charge `Q` of `U Π_r`, i.e. `P_Q U Π_r` restricted to the sector (shape `d_Q x r`).
pub fn sample_u1_block(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<DMatrix<C64>> {
    require_symmetry(spec, Symmetry::U1)?;
    let w = sample_isometry(spec.n, spec.r, spec.unitary_mode, spec.randomness, rng)?;
    let q = spec.q.expect("validated");
    u1_sector(spec.n, q)?.restrict_columns(&w)
}

/// Low-rank U(1) draw: `P_Q sigma P_Q / Tr(P_Q sigma)` with `sigma = U Π_r U† / r`.
pub fn sample_u1_factor(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<StateFactor> {
    require_symmetry(spec, Symmetry::U1)?;
    let q = spec.q.expect("validated");
    let w = sample_isometry(spec.n, spec.r, spec.unitary_mode, spec.randomness, rng)?;
    let scale = 1.0 / (spec.r as f64).sqrt();
    let sigma_factor = &w * real(scale);
    let probs = charge_distribution(&sigma_factor, spec.n);
    let p = probs[q];
    let attempts = match spec.preparation {
        Preparation::Project => 1,
        Preparation::Postselect => {
            let mut attempts = 0;
            loop {
                attempts += 1;
                if sample_charge(&probs, rng) == q {
                    break attempts;
                }
                if attempts >= MAX_POSTSELECTION_ATTEMPTS {
                    return Err(Error::PostselectionExhausted(attempts));
                }
            }
        }
    };
    if p < MIN_ACCEPTANCE {
        return Err(Error::DegenerateProjection(p));
    }
    let mut factor = sigma_factor;
    for (x, mut row) in factor.row_iter_mut().enumerate() {
        if x.count_ones() as usize == q {
            row /= real(p.sqrt());
        } else {
            row.fill(ZERO);
        }
    }
    Ok(StateFactor { factor, acceptance_probability: p, attempts })
}

pub fn prepare_u1_state(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<PreparedState> {
    let draw = sample_u1_factor(spec, rng)?;
    Ok(PreparedState {
        rho: draw.density()?,
        acceptance_probability: draw.acceptance_probability,
        provenance: Provenance { spec: *spec, draw: None },
    })
}

/// `(I + X̄)/2^N` or `P_Q / d_Q`.
pub fn reference_state(symmetry: Symmetry, n: usize, q: Option<usize>) -> Result<DensityMatrix> {
    check_qubits(n)?;
    match (symmetry, q) {
        (Symmetry::Z2, _) => {
            let p = crate::sectors::z2_projector(n)?;
            Ok(DensityMatrix::from_trusted(p.scale_real(2.0 / (1usize << n) as f64)))
        }
        (Symmetry::U1, Some(q)) => {
            let p = u1_projector(n, q)?;
            let d_q = crate::sectors::binomial(n, q) as f64;
            Ok(DensityMatrix::from_trusted(p.scale_real(1.0 / d_q)))
        }
        (Symmetry::U1, None) => Err(Error::InvalidConfig("U(1) reference needs a charge".into())),
    }
}

/// Low-rank factor of the reference state (columns are scaled sector basis vectors).
pub fn reference_factor(symmetry: Symmetry, n: usize, q: Option<usize>) -> Result<DMatrix<C64>> {
    let basis = match (symmetry, q) {
        (Symmetry::Z2, _) => z2_sector(n)?,
        (Symmetry::U1, Some(q)) => u1_sector(n, q)?,
        (Symmetry::U1, None) => {
            return Err(Error::InvalidConfig("U(1) reference needs a charge".into()))
        }
    };
    let d = basis.dim_sector();
    Ok(crate::sectors::sector_isometry(&basis) * real(1.0 / (d as f64).sqrt()))
}

/// Per-draw streams derived from a master seed.
#[derive(Clone, Copy, Debug)]
pub struct EnsembleSampler {
    pub spec: EnsembleSpec,
    master_seed: u64,
}

impl EnsembleSampler {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let master_seed = match spec.randomness {
            Randomness::Keyed(seed) => seed,
            Randomness::Fresh => rand::rng().random(),
        };
        Ok(Self { spec, master_seed })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let tag = match self.spec.symmetry {
            Symmetry::Z2 => rng::domain::Z2_DRAW,
            Symmetry::U1 => rng::domain::U1_DRAW,
        };
        rng::stream_rng(self.master_seed, tag, index)
    }

    pub fn factor(&self, index: u64) -> Result<StateFactor> {
        let mut rng = self.rng(index);
        match self.spec.symmetry {
            Symmetry::Z2 => sample_z2_factor(&self.spec, &mut rng),
            Symmetry::U1 => sample_u1_factor(&self.spec, &mut rng),
        }
    }

    pub fn state(&self, index: u64, path: PreparationPath) -> Result<PreparedState> {
        let mut rng = self.rng(index);
        let mut state = match self.spec.symmetry {
            Symmetry::Z2 => prepare_z2_state(&self.spec, &mut rng, path)?,
            Symmetry::U1 => prepare_u1_state(&self.spec, &mut rng)?,
        };
        state.provenance.draw = Some(index);
        Ok(state)
    }
}
