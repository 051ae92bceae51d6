//! Unitary Weingarten calculus over `S_k` and exact Haar moments.
//!
//! Tensor-factor convention: in `(C^D)^{⊗k}` the first factor is the most
//! significant digit of the flat index, and a permutation acts as
//! `σ̂ |i_1, .., i_k> = |i_{σ⁻¹(1)}, .., i_{σ⁻¹(k)}>`, a representation of `S_k`.

mod perm;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

pub use perm::{sk_elements, Permutation, MAX_DEGREE};

use crate::error::{Error, Result};
use crate::linalg::{real, ComplexMatrix, MonomialOp, C64, MAX_DIM, ONE, ZERO};
use crate::sectors::{binomial, check_qubits, z2_sector};

/// `Wg_d` on `S_k`, solved from the Gram system `G Wg = e_identity`
/// with `G_{στ} = d^{|στ⁻¹|}`.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    pub k: usize,
    pub d: usize,
    elements: Vec<Permutation>,
    /// `Wg(σ)` in the order of `elements`.
    values: Vec<f64>,
    by_class: BTreeMap<Vec<usize>, f64>,
}

impl WeingartenTable {
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    /// `Wg(σ)` as a class function.
    pub fn value(&self, sigma: &Permutation) -> f64 {
        self.by_class[&sigma.cycle_type()]
    }

    /// Values keyed by cycle type.
    pub fn classes(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.by_class
    }

    /// Largest relative residual of `G Wg = e_identity`, each row scaled by
    /// `sum_τ |G_{στ} Wg(τ)|`.
    pub fn gram_identity_residual(&self) -> f64 {
        let d = self.d as f64;
        let mut worst: f64 = 0.0;
        for sigma in &self.elements {
            let mut acc = 0.0;
            let mut scale = 0.0;
            for (tau, w) in self.elements.iter().zip(&self.values) {
                let term = d.powi(sigma.compose(&tau.inverse()).cycle_count() as i32) * w;
                acc += term;
                scale += term.abs();
            }
            let target = if sigma.is_identity() { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).abs() / scale.max(f64::MIN_POSITIVE));
        }
        worst
    }

    /// `c_σ = sum_τ Wg(στ⁻¹) t_τ`, the coefficients of the twirl `sum_σ c_σ σ̂`
    /// for invariants `t_τ = Tr(τ̂† O)`.
    pub fn twirl_coefficients(&self, invariants: &[C64]) -> Vec<C64> {
        assert_eq!(invariants.len(), self.elements.len(), "one invariant per element");
        self.elements
            .iter()
            .map(|sigma| {
                self.elements
                    .iter()
                    .zip(invariants)
                    .map(|(tau, t)| t * self.value(&sigma.compose(&tau.inverse())))
                    .sum()
            })
            .collect()
    }
}

pub fn weingarten_table(k: usize, d: usize) -> Result<WeingartenTable> {
    let elements = sk_elements(k)?;
    if d < k {
        return Err(Error::DimensionBelowDegree { d, k });
    }
    let m = elements.len();
    let df = d as f64;
    let gram = DMatrix::from_fn(m, m, |s, t| {
        df.powi(elements[s].compose(&elements[t].inverse()).cycle_count() as i32)
    });
    let mut rhs = DVector::zeros(m);
    rhs[0] = 1.0;
    let values: Vec<f64> = gram
        .lu()
        .solve(&rhs)
        .ok_or(Error::DimensionBelowDegree { d, k })?
        .iter()
        .copied()
        .collect();
    let mut sums: BTreeMap<Vec<usize>, (f64, usize)> = BTreeMap::new();
    for (p, v) in elements.iter().zip(&values) {
        let e = sums.entry(p.cycle_type()).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let by_class = sums.into_iter().map(|(c, (s, n))| (c, s / n as f64)).collect();
    Ok(WeingartenTable { k, d, elements, values, by_class })
}

/// `sum_{σ ∈ S_k} d^{|σ|}` and `(d-1+k)!/(d-1)!`, both exact.
pub fn gram_sum_check(k: usize, d: usize) -> Result<(u128, u128)> {
    let elements = sk_elements(k)?;
    let lhs = elements.iter().map(|p| (d as u128).pow(p.cycle_count() as u32)).sum();
    let rhs = (0..k).map(|j| (d + j) as u128).product();
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WgBoundReport {
    pub k: usize,
    pub d: usize,
    /// `max_σ |Wg(σ)| / (2 d^{-k} (d/4)^{|σ|-k})`; at most 1 when the bound holds.
    pub max_bound_ratio: f64,
    /// `|Wg(e) d^k - 1|`.
    pub identity_deviation: f64,
    /// `2 k^2 / d^2`.
    pub identity_bound: f64,
    pub holds: bool,
}

/// Explicit-constant form of the Weingarten magnitude bounds, valid for `d >= 4 k^2`.
pub fn wg_bound_check(k: usize, d: usize) -> Result<WgBoundReport> {
    if d < 4 * k * k {
        return Err(Error::OutsideBoundRegime { d, k });
    }
    let table = weingarten_table(k, d)?;
    let df = d as f64;
    let ki = k as i32;
    let max_bound_ratio = table
        .elements
        .iter()
        .map(|s| {
            let bound = 2.0 * df.powi(-ki) * (df / 4.0).powi(s.cycle_count() as i32 - ki);
            table.value(s).abs() / bound
        })
        .fold(0.0, f64::max);
    let identity_deviation = (table.value(&Permutation::identity(k)) * df.powi(ki) - 1.0).abs();
    let identity_bound = 2.0 * (k * k) as f64 / (df * df);
    Ok(WgBoundReport {
        k,
        d,
        max_bound_ratio,
        identity_deviation,
        identity_bound,
        holds: max_bound_ratio <= 1.0 && identity_deviation <= identity_bound,
    })
}

fn tensor_dim(d: usize, k: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..k {
        dim = dim.checked_mul(d).filter(|&x| x <= MAX_DIM).ok_or(Error::DimensionTooLarge {
            dim: d.saturating_pow(k as u32),
            cap: MAX_DIM,
        })?;
    }
    Ok(dim)
}

/// Flat index of `sigmâ |i>`.
fn permute_index(sigma: &Permutation, d: usize, index: usize) -> usize {
    let k = sigma.degree();
    let mut digits = vec![0; k];
    let mut x = index;
    for m in (0..k).rev() {
        digits[m] = x % d;
        x /= d;
    }
    // factor sigma(m) of the output carries digit m of the input
    let mut out_digits = vec![0; k];
    for m in 0..k {
        out_digits[sigma.apply(m)] = digits[m];
    }
    out_digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// `σ̂` on `(C^d)^{⊗k}` as a permutation matrix.
pub fn permutation_operator(sigma: &Permutation, d: usize) -> Result<MonomialOp> {
    let dim = tensor_dim(d, sigma.degree())?;
    let images: Vec<usize> = (0..dim).map(|i| permute_index(sigma, d, i)).collect();
    MonomialOp::permutation(&images)
}

/// `Tr(τ̂† O) = sum_i O[τ̂ i, i]` for every `τ` in the table order.
fn invariants(table: &WeingartenTable, o: &ComplexMatrix) -> Result<Vec<C64>> {
    let dim = tensor_dim(table.d, table.k)?;
    Ok(table
        .elements
        .iter()
        .map(|tau| (0..dim).map(|i| o.get(permute_index(tau, table.d, i), i)).sum())
        .collect())
}

fn assemble(table: &WeingartenTable, coefficients: &[C64]) -> Result<ComplexMatrix> {
    let dim = tensor_dim(table.d, table.k)?;
    let mut out = ComplexMatrix::zeros(dim);
    for (sigma, c) in table.elements.iter().zip(coefficients) {
        if *c == ZERO {
            continue;
        }
        for i in 0..dim {
            let row = permute_index(sigma, table.d, i);
            out.set(row, i, out.get(row, i) + c);
        }
    }
    Ok(out)
}

/// Exact `E_U [U^{⊗k} O U^{†⊗k}]` over Haar `U` on `C^d`.
pub fn haar_twirl(o: &ComplexMatrix, k: usize, d: usize) -> Result<ComplexMatrix> {
    let dim = tensor_dim(d, k)?;
    if o.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: o.dim() });
    }
    let table = weingarten_table(k, d)?;
    let t = invariants(&table, o)?;
    assemble(&table, &table.twirl_coefficients(&t))
}

/// Twirl coefficients of `Π_r^{⊗k} / r^k`: `t_τ = r^{|τ| - k}`.
fn projector_coefficients(table: &WeingartenTable, r: usize) -> Vec<C64> {
    let rf = r as f64;
    let k = table.k as i32;
    let t: Vec<C64> = table
        .elements
        .iter()
        .map(|tau| real(rf.powi(tau.cycle_count() as i32 - k)))
        .collect();
    table.twirl_coefficients(&t)
}

fn check_z2(n: usize, r: usize) -> Result<usize> {
    check_qubits(n)?;
    if n < 2 {
        return Err(Error::QubitCount(n));
    }
    if !r.is_power_of_two() {
        return Err(Error::RankNotPowerOfTwo(r));
    }
    let d = 1usize << (n - 1);
    if r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    Ok(d)
}

/// Exact `E ρ^{⊗k}` of the ℤ₂ ensemble in the sector basis (dimension `(2^{N-1})^k`).
pub fn exact_moment_z2(n: usize, r: usize, k: usize) -> Result<ComplexMatrix> {
    let d = check_z2(n, r)?;
    tensor_dim(d, k)?;
    let table = weingarten_table(k, d)?;
    assemble(&table, &projector_coefficients(&table, r))
}

/// `Tr(σ̂ (A_1 ⊗ .. ⊗ A_k))` as a product of traces over the cycles of `σ`;
/// the cycle `(m, σ(m), .., σ^{L-1}(m))` contributes `Tr(A_{σ^{L-1}(m)} .. A_{σ(m)} A_m)`.
pub fn trace_perm_tensor(sigma: &Permutation, mats: &[&ComplexMatrix]) -> Result<C64> {
    if mats.len() != sigma.degree() {
        return Err(Error::DimensionMismatch { expected: sigma.degree(), found: mats.len() });
    }
    let mut total = ONE;
    for cycle in sigma.cycles() {
        let mut product = mats[cycle[0]].clone();
        for &m in &cycle[1..] {
            product = mats[m] * &product;
        }
        total *= product.trace();
    }
    Ok(total)
}

/// Exact ensemble mean of `R1(i, j)` for the ℤ₂ ensemble with a 2-design unitary.
///
/// Draws are projector-proportional, so `R1 = r Tr(ρ B ρ B†)`, a degree-two
/// polynomial in `ρ` evaluated with the exact second moment.
pub fn exact_r1_z2(n: usize, r: usize, b: &MonomialOp) -> Result<f64> {
    let d = check_z2(n, r)?;
    let basis = z2_sector(n)?;
    let b_sector = basis.restrict(&b.to_dense())?;
    let b_dag = b_sector.adjoint();
    let table = weingarten_table(2, d)?;
    let c = projector_coefficients(&table, r);
    let swap = Permutation::transposition(2, 0, 1);
    let mut total = ZERO;
    for (sigma, coefficient) in table.elements.iter().zip(&c) {
        total += coefficient * trace_perm_tensor(&swap.compose(sigma), &[&b_sector, &b_dag])?;
    }
    Ok(r as f64 * total.re)
}

/// Trace distance between `a I + b S` on `(C^d)^{⊗2}` with `Tr = 1`,
/// `Tr(S ·) = purity`, and `(I/d)^{⊗2}`: equals `|purity - 1/d|`.
pub fn commutant_two_copy_distance(d: usize, purity: f64) -> f64 {
    (purity - 1.0 / d as f64).abs()
}

/// Trace distance of `c_e I + c_π S` from `(I/d)^{⊗2}` via the symmetric and
/// antisymmetric eigenspaces.
pub fn two_copy_distance(d: usize, c_identity: f64, c_swap: f64) -> f64 {
    let df = d as f64;
    let base = 1.0 / (df * df);
    df * (df + 1.0) / 2.0 * (c_identity + c_swap - base).abs()
        + df * (df - 1.0) / 2.0 * (c_identity - c_swap - base).abs()
}

/// Closed-form `|| E ρ^{⊗2} - ρ₀^{⊗2} ||_tr` for the ℤ₂ ensemble.
pub fn two_copy_distance_z2(n: usize, r: usize) -> Result<f64> {
    let d = check_z2(n, r)?;
    let table = weingarten_table(2, d)?;
    let c = projector_coefficients(&table, r);
    Ok(two_copy_distance(d, c[0].re, c[1].re))
}

fn check_u1(n: usize, q: usize, r: usize, k: usize) -> Result<(usize, usize)> {
    check_qubits(n)?;
    if q > n {
        return Err(Error::ChargeOutOfRange { q, n });
    }
    let d = 1usize << n;
    if r == 0 || r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    if d < k {
        return Err(Error::DimensionBelowDegree { d, k });
    }
    Ok((d, binomial(n, q)))
}

/// `f(k) = E (Tr ρ̃)^k` with `ρ̃ = (d / (r d_Q)) P_Q U Π_r U† P_Q`.
pub fn f_moment_u1(n: usize, q: usize, r: usize, k: usize) -> Result<f64> {
    let (d, d_q) = check_u1(n, q, r, k)?;
    let table = weingarten_table(k, d)?;
    let (rf, dq) = (r as f64, d_q as f64);
    let mut total = 0.0;
    for sigma in &table.elements {
        for tau in &table.elements {
            total += table.value(&sigma.compose(&tau.inverse()))
                * rf.powi(tau.cycle_count() as i32)
                * dq.powi(sigma.cycle_count() as i32);
        }
    }
    Ok((d as f64 / (rf * dq)).powi(k as i32) * total)
}

/// `E Tr(ρ̃^2)`.
pub fn exact_rho_tilde_purity(n: usize, q: usize, r: usize) -> Result<f64> {
    let (d, d_q) = check_u1(n, q, r, 2)?;
    let table = weingarten_table(2, d)?;
    let (rf, dq) = (r as f64, d_q as f64);
    let swap = Permutation::transposition(2, 0, 1);
    let mut total = 0.0;
    for sigma in &table.elements {
        for tau in &table.elements {
            total += table.value(&sigma.compose(&tau.inverse()))
                * rf.powi(tau.cycle_count() as i32)
                * dq.powi(swap.compose(sigma).cycle_count() as i32);
        }
    }
    Ok((d as f64 / (rf * dq)).powi(2) * total)
}
