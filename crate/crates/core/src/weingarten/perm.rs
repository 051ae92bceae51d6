use itertools::Itertools;

use crate::error::{Error, Result};

/// Largest supported permutation degree.
pub const MAX_DEGREE: usize = 6;

/// Bijection on `{0, .., k-1}` (one-line notation, zero-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &x in &images {
            if x >= k || seen[x] {
                return Err(Error::InvalidConfig(format!("{images:?} is not a permutation")));
            }
            seen[x] = true;
        }
        Ok(Self { images })
    }

    /// From one-based one-line notation.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::InvalidConfig("one-line notation is one-based".into()));
        }
        Self::new(images.iter().map(|x| x - 1).collect())
    }

    pub fn identity(k: usize) -> Self {
        Self { images: (0..k).collect() }
    }

    /// Transposition of `a` and `b` (zero-based).
    pub fn transposition(k: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..k).collect();
        images.swap(a, b);
        Self { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|x| x + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        Self { images: other.images.iter().map(|&x| self.images[x]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        Self { images }
    }

    /// Cycles, each starting at its smallest element, ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    /// Number of cycles, including fixed points.
    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Cycle lengths in decreasing order (the conjugacy class).
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lengths: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }
}

/// All of `S_k` in lexicographic one-line order (identity first).
pub fn sk_elements(k: usize) -> Result<Vec<Permutation>> {
    if k == 0 || k > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(k));
    }
    Ok((0..k).permutations(k).map(|images| Permutation { images }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_groups() {
        let s1 = sk_elements(1).unwrap();
        assert_eq!(s1.len(), 1);
        assert_eq!(s1[0].cycle_count(), 1);
        let s2 = sk_elements(2).unwrap();
        assert_eq!(s2.iter().map(Permutation::cycle_count).collect::<Vec<_>>(), vec![2, 1]);
        let mut counts: Vec<usize> = sk_elements(3).unwrap().iter().map(Permutation::cycle_count).collect();
        counts.sort_unstable();
        assert_eq!(counts, vec![1, 1, 2, 2, 2, 3]);
        assert_eq!(sk_elements(6).unwrap().len(), 720);
        assert!(matches!(sk_elements(7), Err(Error::DegreeTooLarge(7))));
        assert!(sk_elements(4).unwrap()[0].is_identity());
    }

    #[test]
    fn one_line_round_trip() {
        let p = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        assert_eq!(p.one_line(), vec![2, 3, 1]);
        assert_eq!(p.cycle_type(), vec![3]);
        assert!(Permutation::from_one_line(&[1, 1]).is_err());
        assert!(Permutation::from_one_line(&[0, 1]).is_err());
    }

    fn perm_strategy(k: usize) -> impl Strategy<Value = Permutation> {
        Just((0..k).collect::<Vec<_>>()).prop_shuffle().prop_map(|images| Permutation { images })
    }

    proptest! {
        #[test]
        fn group_laws(k in 1usize..=6, seed in any::<u64>()) {
            let elems = sk_elements(k).unwrap();
            let n = elems.len() as u64;
            let a = &elems[(seed % n) as usize];
            let b = &elems[((seed / n) % n) as usize];
            let c = &elems[((seed / (n * n)) % n) as usize];
            prop_assert_eq!(a.compose(&b.compose(c)), a.compose(b).compose(c));
            prop_assert!(a.compose(&a.inverse()).is_identity());
            // cycle count is a class function
            prop_assert_eq!(b.compose(a).compose(&b.inverse()).cycle_count(), a.cycle_count());
            prop_assert_eq!(a.compose(&b.inverse()).cycle_count(), b.compose(&a.inverse()).cycle_count());
        }

        #[test]
        fn cycle_count_in_range(p in (1usize..=6).prop_flat_map(perm_strategy)) {
            let c = p.cycle_count();
            prop_assert!(c >= 1 && c <= p.degree());
            prop_assert_eq!(p.cycle_type().iter().sum::<usize>(), p.degree());
        }
    }
}
