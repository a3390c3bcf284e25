//! Strategy subsets over a ground set `{0, .., n-1}`.
//!
//! Strategies are zero-based indices, sorted agent-wise: agent 0 owns the
//! first block, agent 1 the next, and so on.

use std::fmt;

use crate::error::{Error, Result};

/// Size of the strategy universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("ground set must be nonempty".into()));
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check(&self, p: usize) -> Result<()> {
        if p < self.n {
            Ok(())
        } else {
            Err(Error::StrategyOutOfRange {
                strategy: p,
                size: self.n,
            })
        }
    }
}

/// A subset of the ground set stored as a fixed-width bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StrategySet {
    n: usize,
    words: Vec<u64>,
}

impl StrategySet {
    pub fn empty(n: usize) -> Self {
        StrategySet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for p in 0..n {
            s.insert(p);
        }
        s
    }

    /// Builds a set from its low `n` bits; requires `n <= 64`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= 64, "from_bits supports at most 64 strategies");
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        StrategySet {
            n,
            words: if n == 0 { vec![] } else { vec![bits & mask] },
        }
    }

    pub fn from_members(n: usize, members: &[usize]) -> Result<Self> {
        let mut s = Self::empty(n);
        for &p in members {
            if p >= n {
                return Err(Error::StrategyOutOfRange {
                    strategy: p,
                    size: n,
                });
            }
            s.insert(p);
        }
        Ok(s)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// Inserts `p`, returning whether it was absent. Panics when `p >= n`.
    pub fn insert(&mut self, p: usize) -> bool {
        assert!(p < self.n, "strategy {p} out of range {}", self.n);
        let (w, b) = (p / 64, p % 64);
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, p: usize) -> bool {
        if p >= self.n {
            return false;
        }
        let (w, b) = (p / 64, p % 64);
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        had
    }

    pub fn contains(&self, p: usize) -> bool {
        p < self.n && self.words[p / 64] >> (p % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &StrategySet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &StrategySet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for StrategySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_roundtrip() {
        let mut s = StrategySet::empty(130);
        assert!(s.insert(0));
        assert!(s.insert(129));
        assert!(!s.insert(129));
        assert_eq!(s.to_vec(), vec![0, 129]);
        assert!(s.remove(0));
        assert!(!s.remove(0));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn from_members_rejects_out_of_range() {
        assert!(matches!(
            StrategySet::from_members(3, &[0, 3]),
            Err(Error::StrategyOutOfRange {
                strategy: 3,
                size: 3
            })
        ));
    }

    #[test]
    fn from_bits_masks_high_bits() {
        let s = StrategySet::from_bits(3, 0b1101);
        assert_eq!(s.to_vec(), vec![0, 2]);
        assert_eq!(s, StrategySet::from_members(3, &[0, 2]).unwrap());
    }

    #[test]
    fn ground_set_rejects_empty() {
        assert!(GroundSet::new(0).is_err());
        let g = GroundSet::new(4).unwrap();
        assert!(g.check(3).is_ok());
        assert!(g.check(4).is_err());
    }
}
