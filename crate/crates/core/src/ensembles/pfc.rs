//! Permutation-phase-Clifford unitaries `U = C F P`.

use nalgebra::DMatrix;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::clifford::{CliffordTableau, MAX_DENSE_CLIFFORD_QUBITS};
use super::rng::{domain, mix64};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MonomialOp, C64, ONE};
use crate::sectors::check_qubits;

const FEISTEL_ROUNDS: u64 = 6;

/// Keyed permutation of `0..2^n`: a balanced Feistel network on `2 ceil(n/2)`
/// bits with cycle walking back into range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyedPermutation {
    n: usize,
    key: u64,
}

impl KeyedPermutation {
    pub fn new(n: usize, key: u64) -> Self {
        Self { n, key }
    }

    fn round(&self, round: u64, half: u64) -> u64 {
        mix64(self.key ^ mix64(round.wrapping_mul(0x1000_0000_01b3) ^ mix64(half)))
    }

    fn feistel(&self, x: u64) -> u64 {
        let h = self.n.div_ceil(2);
        let mask = (1u64 << h) - 1;
        let (mut left, mut right) = (x >> h, x & mask);
        for round in 0..FEISTEL_ROUNDS {
            let next = left ^ (self.round(round, right) & mask);
            left = right;
            right = next;
        }
        (left << h) | right
    }

    pub fn apply(&self, x: usize) -> usize {
        let limit = 1u64 << self.n;
        let mut y = self.feistel(x as u64);
        while y >= limit {
            y = self.feistel(y);
        }
        y as usize
    }
}

/// Keyed binary phase `(-1)^{f(x)}`.
pub fn keyed_phase_bit(key: u64, x: usize) -> bool {
    mix64(key ^ domain::PFC_PHASE ^ mix64(x as u64)) & 1 == 1
}

/// The three factors of a PFC unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct PfcUnitary {
    n: usize,
    /// `P|x> = |perm[x]>`.
    pub perm: Vec<usize>,
    /// `F|y> = (-1)^{phase[y]} |y>`.
    pub phase: Vec<bool>,
    pub clifford: CliffordTableau,
}

impl PfcUnitary {
    /// Fresh draw: uniform permutation, uniform phase bits and Clifford from `rng`.
    pub fn fresh(n: usize, rng: &mut impl Rng) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(rng);
        let phase = (0..dim).map(|_| rng.random()).collect();
        let clifford = CliffordTableau::random(n, rng)?;
        Ok(Self { n, perm, phase, clifford })
    }

    /// Keyed draw: every factor is a deterministic function of `(key, n)`.
    pub fn keyed(n: usize, key: u64) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let p = KeyedPermutation::new(n, key);
        let perm = (0..dim).map(|x| p.apply(x)).collect();
        let phase = (0..dim).map(|y| keyed_phase_bit(key, y)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(key));
        let clifford = CliffordTableau::random(n, &mut rng)?;
        Ok(Self { n, perm, phase, clifford })
    }

    pub fn permutation_op(&self) -> MonomialOp {
        MonomialOp::permutation(&self.perm).expect("bijection by construction")
    }

    pub fn phase_op(&self) -> MonomialOp {
        let diag: Vec<C64> = self.phase.iter().map(|&b| if b { -ONE } else { ONE }).collect();
        MonomialOp::diagonal(&diag)
    }

    /// First `count` columns: column `x` is `(-1)^{phase[perm[x]]}` times column `perm[x]` of `C`.
    pub fn columns(&self, count: usize) -> Result<DMatrix<C64>> {
        let dim = 1usize << self.n;
        if count > dim {
            return Err(Error::RankTooLarge { rank: count, dim });
        }
        let mut out = self.clifford.select_columns(&self.perm[..count])?;
        for x in 0..count {
            if self.phase[self.perm[x]] {
                out.column_mut(x).neg_mut();
            }
        }
        Ok(out)
    }

    pub fn to_unitary(&self) -> Result<ComplexMatrix> {
        if self.n > MAX_DENSE_CLIFFORD_QUBITS {
            return Err(Error::DimensionTooLarge {
                dim: 1 << self.n,
                cap: 1 << MAX_DENSE_CLIFFORD_QUBITS,
            });
        }
        ComplexMatrix::from_inner(self.columns(1 << self.n)?)
    }
}
