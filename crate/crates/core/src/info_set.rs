//! Sparse `(strategy, probability)` sets exchanged between agents.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::MembershipVector;

/// Overshoot above 1 that is treated as accumulation error and clamped.
pub const PROBABILITY_CAP_TOL: f64 = 1e-9;

/// Nonzero coordinates of an agent's local membership vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InformationSet {
    entries: BTreeMap<usize, f64>,
}

impl InformationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut set = Self::new();
        for (p, a) in entries {
            if !(a > 0.0 && a <= 1.0 + PROBABILITY_CAP_TOL) {
                return Err(Error::Protocol(format!("probability {a} for strategy {p}")));
            }
            set.entries.insert(p, a.min(1.0));
        }
        Ok(set)
    }

    pub fn from_dense(x: &MembershipVector) -> Self {
        InformationSet {
            entries: x
                .as_slice()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(p, &v)| (p, v))
                .collect(),
        }
    }

    pub fn get(&self, p: usize) -> f64 {
        self.entries.get(&p).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&p, &a)| (p, a))
    }

    pub fn range(&self, block: Range<usize>) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.range(block).map(|(&p, &a)| (p, a))
    }

    pub fn block_sum(&self, block: Range<usize>) -> f64 {
        self.range(block).map(|(_, a)| a).sum()
    }

    pub fn to_dense(&self, n: usize) -> Result<MembershipVector> {
        let mut values = vec![0.0; n];
        for (p, a) in self.iter() {
            if p >= n {
                return Err(Error::StrategyOutOfRange {
                    strategy: p,
                    size: n,
                });
            }
            values[p] = a;
        }
        MembershipVector::new(values)
    }

    /// `F ⊕ {(p, α), ..}`: adds `α` to existing entries, inserts missing ones.
    pub fn oplus(&self, additions: &[(usize, f64)]) -> Result<Self> {
        let mut out = self.clone();
        for &(p, alpha) in additions {
            if !(alpha > 0.0) {
                return Err(Error::Protocol(format!(
                    "nonpositive increment {alpha} for strategy {p}"
                )));
            }
            let entry = out.entries.entry(p).or_insert(0.0);
            let next = *entry + alpha;
            if next > 1.0 + PROBABILITY_CAP_TOL {
                return Err(Error::Protocol(format!(
                    "strategy {p} probability reached {next}"
                )));
            }
            *entry = next.min(1.0);
        }
        Ok(out)
    }
}

/// Keywise maximum over the union of keys. The empty collection yields the
/// empty set, the identity of the operation.
pub fn max_merge<'a>(sets: impl IntoIterator<Item = &'a InformationSet>) -> InformationSet {
    let mut out = InformationSet::new();
    for set in sets {
        for (p, a) in set.iter() {
            let e = out.entries.entry(p).or_insert(a);
            if a > *e {
                *e = a;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fs(e: &[(usize, f64)]) -> InformationSet {
        InformationSet::from_entries(e.iter().copied()).unwrap()
    }

    #[test]
    fn oplus_insert_and_accumulate() {
        let empty = InformationSet::new();
        assert_eq!(empty.oplus(&[(3, 0.1)]).unwrap(), fs(&[(3, 0.1)]));
        assert_eq!(fs(&[(3, 0.1)]).oplus(&[(3, 0.1)]).unwrap(), fs(&[(3, 0.2)]));
        let got = fs(&[(3, 0.1), (5, 0.4)])
            .oplus(&[(5, 0.2), (7, 0.1)])
            .unwrap();
        assert_eq!(got.get(3), 0.1);
        assert!((got.get(5) - 0.6).abs() < 1e-15);
        assert_eq!(got.get(7), 0.1);
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn oplus_cap() {
        let almost = fs(&[(0, 0.9)]);
        assert!(almost.oplus(&[(0, 0.2)]).is_err());
        let mut acc = InformationSet::new();
        for _ in 0..7 {
            acc = acc.oplus(&[(0, 1.0 / 7.0)]).unwrap();
        }
        assert!(acc.get(0) <= 1.0 && (acc.get(0) - 1.0).abs() < 1e-12);
        assert!(acc.oplus(&[(1, 0.0)]).is_err());
    }

    #[test]
    fn max_merge_cases() {
        let a = fs(&[(3, 0.1)]);
        assert_eq!(max_merge([&a, &InformationSet::new()]), a);
        let b = fs(&[(3, 0.1), (5, 0.5)]);
        let c = fs(&[(3, 0.2), (7, 0.1)]);
        assert_eq!(max_merge([&b, &c]), fs(&[(3, 0.2), (5, 0.5), (7, 0.1)]));
        assert_eq!(max_merge([&b, &b]), b);
        assert_eq!(max_merge(std::iter::empty()), InformationSet::new());
    }

    #[test]
    fn dense_roundtrip() {
        let x = MembershipVector::new(vec![0.0, 0.25, 0.0, 1.0]).unwrap();
        let f = InformationSet::from_dense(&x);
        assert_eq!(f.len(), 2);
        assert_eq!(f.to_dense(4).unwrap(), x);
        assert!(f.to_dense(3).is_err());
        assert_eq!(f.block_sum(1..4), 1.25);
    }

    fn arb_set() -> impl Strategy<Value = InformationSet> {
        proptest::collection::btree_map(0usize..12, 0.01f64..=1.0, 0..8)
            .prop_map(|m| InformationSet::from_entries(m).unwrap())
    }

    proptest! {
        #[test]
        fn max_merge_is_commutative_idempotent_upper_bound(a in arb_set(), b in arb_set()) {
            let ab = max_merge([&a, &b]);
            prop_assert_eq!(&ab, &max_merge([&b, &a]));
            prop_assert_eq!(&max_merge([&ab, &a]), &ab);
            for p in 0..12 {
                prop_assert!(ab.get(p) >= a.get(p) && ab.get(p) >= b.get(p));
                prop_assert!(ab.get(p) == a.get(p) || ab.get(p) == b.get(p));
            }
        }
    }
}
