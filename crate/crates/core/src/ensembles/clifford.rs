//! Uniform random Clifford unitaries from a symplectic tableau.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::sectors::{check_qubits, site_mask};

/// Largest qubit count for a dense Clifford matrix.
pub const MAX_DENSE_CLIFFORD_QUBITS: usize = 8;

/// Hermitian Pauli `(-1)^sign i^{|x & z|} X^x Z^z` with bit masks in basis-index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Pauli {
    pub x: usize,
    pub z: usize,
    pub sign: bool,
}

impl Pauli {
    pub fn phase(&self) -> C64 {
        let base = match (self.x & self.z).count_ones() % 4 {
            0 => ONE,
            1 => C64::new(0.0, 1.0),
            2 => -ONE,
            _ => C64::new(0.0, -1.0),
        };
        if self.sign {
            -base
        } else {
            base
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let phase = self.phase();
        let mut out = vec![ZERO; v.len()];
        for (b, &amp) in v.iter().enumerate() {
            let s = if (self.z & b).count_ones() % 2 == 0 { phase } else { -phase };
            out[b ^ self.x] = s * amp;
        }
        out
    }

    pub fn to_dense(&self, n: usize) -> ComplexMatrix {
        let dim = 1usize << n;
        let mut m = ComplexMatrix::zeros(dim);
        let phase = self.phase();
        for b in 0..dim {
            let s = if (self.z & b).count_ones() % 2 == 0 { phase } else { -phase };
            m.set(b ^ self.x, b, s);
        }
        m
    }
}

/// Images of `X_j` and `Z_j` (site `j` at index `j - 1`) under conjugation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordTableau {
    n: usize,
    x_images: Vec<Pauli>,
    z_images: Vec<Pauli>,
}

fn symplectic(a: u64, b: u64, n: usize) -> u32 {
    let mask = (1u64 << n) - 1;
    let (ax, az) = (a & mask, a >> n);
    let (bx, bz) = (b & mask, b >> n);
    ((ax & bz) ^ (az & bx)).count_ones() & 1
}

impl CliffordTableau {
    /// Uniform over the Clifford group modulo global phase: a uniformly random
    /// symplectic basis `(v_j, w_j)` built pair by pair inside the symplectic
    /// complement of the previous pairs, plus independent random signs.
    pub fn random(n: usize, rng: &mut impl Rng) -> Result<Self> {
        check_qubits(n)?;
        let full = (1u64 << (2 * n)) - 1;
        let mut pairs: Vec<(u64, u64)> = Vec::with_capacity(n);
        let project = |x: u64, pairs: &[(u64, u64)]| {
            pairs.iter().fold(x, |acc, &(v, w)| {
                let mut y = acc;
                if symplectic(x, w, n) == 1 {
                    y ^= v;
                }
                if symplectic(x, v, n) == 1 {
                    y ^= w;
                }
                y
            })
        };
        for _ in 0..n {
            let v = loop {
                let cand = project(rng.random::<u64>() & full, &pairs);
                if cand != 0 {
                    break cand;
                }
            };
            let w = loop {
                let cand = project(rng.random::<u64>() & full, &pairs);
                if symplectic(v, cand, n) == 1 {
                    break cand;
                }
            };
            pairs.push((v, w));
        }
        let mask = (1u64 << n) - 1;
        let to_pauli = |bits: u64, sign: bool| Pauli {
            x: (bits & mask) as usize,
            z: (bits >> n) as usize,
            sign,
        };
        let mut x_images = Vec::with_capacity(n);
        let mut z_images = Vec::with_capacity(n);
        for &(v, w) in &pairs {
            x_images.push(to_pauli(v, rng.random()));
            z_images.push(to_pauli(w, rng.random()));
        }
        Ok(Self { n, x_images, z_images })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_image(&self, site: usize) -> Pauli {
        self.x_images[site - 1]
    }

    pub fn z_image(&self, site: usize) -> Pauli {
        self.z_images[site - 1]
    }

    /// Common +1 eigenvector of the `Z` images, i.e. the image of `|0...0>`.
    fn vacuum(&self) -> Vec<C64> {
        let dim = 1usize << self.n;
        for s in 0..dim {
            let mut v = vec![ZERO; dim];
            v[s] = ONE;
            for p in &self.z_images {
                let pv = p.apply(&v);
                for (a, b) in v.iter_mut().zip(pv) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                v.iter_mut().for_each(|z| *z /= norm);
                return v;
            }
        }
        unreachable!("stabilizer group of independent commuting Paulis has a joint eigenvector")
    }

    /// First `count` columns of the unitary, `U|x> = prod_{x_j = 1} P(X_j) U|0>`.
    pub fn columns(&self, count: usize) -> Result<DMatrix<C64>> {
        let dim = 1usize << self.n;
        if count > dim {
            return Err(Error::RankTooLarge { rank: count, dim });
        }
        self.select_columns(&(0..count).collect::<Vec<_>>())
    }

    /// Columns `xs[0], xs[1], ...` of the unitary.
    pub fn select_columns(&self, xs: &[usize]) -> Result<DMatrix<C64>> {
        let dim = 1usize << self.n;
        let vacuum = self.vacuum();
        let mut out = DMatrix::zeros(dim, xs.len());
        for (j, &x) in xs.iter().enumerate() {
            if x >= dim {
                return Err(Error::RankTooLarge { rank: x + 1, dim });
            }
            let mut v = vacuum.clone();
            for site in 1..=self.n {
                if x & site_mask(site, self.n) != 0 {
                    v = self.x_image(site).apply(&v);
                }
            }
            for (k, z) in v.into_iter().enumerate() {
                out[(k, j)] = z;
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

pub fn random_clifford(n: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    if n > MAX_DENSE_CLIFFORD_QUBITS {
        return Err(Error::DimensionTooLarge { dim: 1 << n, cap: 1 << MAX_DENSE_CLIFFORD_QUBITS });
    }
    CliffordTableau::random(n, rng)?.to_unitary()
}
