//! Enumeration-based reference computations of the multilinear extension,
//! its derivatives, and total curvature.
//!
//! Everything here costs `O(2ⁿ)` oracle calls and exists to check the
//! sampled routines. A guard rejects ground sets above `max_n`.

use crate::error::{Error, Result};
use crate::matroid::MembershipVector;
use crate::oracle::ValueOracle;
use crate::set::StrategySet;

pub const DEFAULT_MAX_N: usize = 20;

/// Exact evaluator over a value oracle with an enumeration guard.
#[derive(Debug, Clone, Copy)]
pub struct Exact<'a> {
    f: &'a ValueOracle,
    max_n: usize,
}

impl<'a> Exact<'a> {
    pub fn new(f: &'a ValueOracle) -> Self {
        Exact {
            f,
            max_n: DEFAULT_MAX_N,
        }
    }

    pub fn with_max_n(mut self, max_n: usize) -> Self {
        self.max_n = max_n.min(63);
        self
    }

    fn guard(&self, what: &'static str) -> Result<usize> {
        let n = self.f.ground_size();
        if n > self.max_n {
            return Err(Error::GuardExceeded {
                what,
                required: 1u128 << n.min(127),
                limit: 1u128 << self.max_n,
            });
        }
        Ok(n)
    }

    fn check_vector(&self, x: &MembershipVector, n: usize) -> Result<()> {
        if x.len() != n {
            return Err(Error::InvalidVector(format!(
                "length {} but ground set has {n} strategies",
                x.len()
            )));
        }
        Ok(())
    }

    fn check_strategy(&self, p: usize, n: usize) -> Result<()> {
        if p >= n {
            return Err(Error::StrategyOutOfRange {
                strategy: p,
                size: n,
            });
        }
        Ok(())
    }

    /// `Σ_R f(R) Π_{p∈R} x_p Π_{p∉R} (1 − x_p)` over all `2ⁿ` subsets.
    pub fn multilinear(&self, x: &MembershipVector) -> Result<f64> {
        let n = self.guard("multilinear extension")?;
        self.check_vector(x, n)?;
        let mut total = 0.0;
        for bits in 0..1u64 << n {
            let w = weight(x, bits, u64::MAX);
            if w != 0.0 {
                total += w * self.f.value(&StrategySet::from_bits(n, bits));
            }
        }
        Ok(total)
    }

    /// `∂F/∂x_p = E[f(R ∪ {p}) − f(R \ {p})]`, enumerating subsets of `P \ {p}`.
    pub fn partial(&self, x: &MembershipVector, p: usize) -> Result<f64> {
        let n = self.guard("first derivative")?;
        self.check_vector(x, n)?;
        self.check_strategy(p, n)?;
        let bit = 1u64 << p;
        let mut total = 0.0;
        for bits in (0..1u64 << n).filter(|b| b & bit == 0) {
            let w = weight(x, bits, !bit);
            if w != 0.0 {
                let without = self.f.value(&StrategySet::from_bits(n, bits));
                let with = self.f.value(&StrategySet::from_bits(n, bits | bit));
                total += w * (with - without);
            }
        }
        Ok(total)
    }

    /// Mixed second derivative `∂²F/∂x_p∂x_q` via the four-term expectation.
    pub fn second_partial(&self, x: &MembershipVector, p: usize, q: usize) -> Result<f64> {
        let n = self.guard("second derivative")?;
        self.check_vector(x, n)?;
        self.check_strategy(p, n)?;
        self.check_strategy(q, n)?;
        if p == q {
            return Err(Error::Config(
                "diagonal second derivative of a multilinear function is identically zero".into(),
            ));
        }
        let (bp, bq) = (1u64 << p, 1u64 << q);
        let mut total = 0.0;
        for bits in (0..1u64 << n).filter(|b| b & (bp | bq) == 0) {
            let w = weight(x, bits, !(bp | bq));
            if w != 0.0 {
                let v = |b: u64| self.f.value(&StrategySet::from_bits(n, b));
                total += w * (v(bits | bp | bq) - v(bits | bq) - v(bits | bp) + v(bits));
            }
        }
        Ok(total)
    }

    /// `c = 1 − min_{p, S∌p} Δ(p|S) / Δ(p|∅)`, skipping strategies whose
    /// singleton gain is zero.
    pub fn total_curvature(&self) -> Result<f64> {
        let n = self.guard("total curvature")?;
        let table: Vec<f64> = (0..1u64 << n)
            .map(|b| self.f.value(&StrategySet::from_bits(n, b)))
            .collect();
        let mut min_ratio = f64::INFINITY;
        for p in 0..n {
            let bit = 1usize << p;
            let single = table[bit] - table[0];
            if single <= 0.0 {
                continue;
            }
            for s in (0..table.len()).filter(|s| s & bit == 0) {
                min_ratio = min_ratio.min((table[s | bit] - table[s]) / single);
            }
        }
        if min_ratio.is_infinite() {
            return Err(Error::DegenerateCurvature);
        }
        Ok((1.0 - min_ratio).clamp(0.0, 1.0))
    }

    /// Exhaustive check of `f(∅) = 0`, monotonicity, and diminishing returns
    /// within absolute tolerance `tol`.
    pub fn audit(&self, tol: f64) -> Result<Audit> {
        let n = self.guard("submodularity audit")?;
        let table: Vec<f64> = (0..1u64 << n)
            .map(|b| self.f.value(&StrategySet::from_bits(n, b)))
            .collect();
        let mut audit = Audit {
            normalized: table[0].abs() <= tol,
            monotone: true,
            submodular: true,
        };
        for s in 0..table.len() {
            for p in (0..n).filter(|p| s >> p & 1 == 0) {
                let gain = table[s | 1 << p] - table[s];
                if gain < -tol {
                    audit.monotone = false;
                }
                // Δ(p|A) ≥ Δ(p|S) for every A ⊆ S; one-element removals suffice.
                for r in (0..n).filter(|r| s >> r & 1 == 1) {
                    let a = s & !(1 << r);
                    if table[a | 1 << p] - table[a] < gain - tol {
                        audit.submodular = false;
                    }
                }
            }
        }
        Ok(audit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Audit {
    pub normalized: bool,
    pub monotone: bool,
    pub submodular: bool,
}

impl Audit {
    pub fn ok(&self) -> bool {
        self.normalized && self.monotone && self.submodular
    }
}

/// Probability of the subset `bits` restricted to coordinates in `mask`.
fn weight(x: &MembershipVector, bits: u64, mask: u64) -> f64 {
    let mut w = 1.0;
    for (p, &xp) in x.as_slice().iter().enumerate() {
        if mask >> p & 1 == 0 {
            continue;
        }
        w *= if bits >> p & 1 == 1 { xp } else { 1.0 - xp };
        if w == 0.0 {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::WeightedCoverage;

    fn wc(weights: Vec<f64>, covers: Vec<Vec<usize>>) -> ValueOracle {
        ValueOracle::new(WeightedCoverage::new(weights, covers).unwrap())
    }

    fn x(v: &[f64]) -> MembershipVector {
        MembershipVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn multilinear_at_origin_and_vertices() {
        let f = wc(vec![1.0, 2.0, 4.0], vec![vec![0, 1], vec![1, 2], vec![2]]);
        let e = Exact::new(&f);
        assert_eq!(e.multilinear(&MembershipVector::zeros(3)).unwrap(), 0.0);
        for bits in 0..8u64 {
            let s = StrategySet::from_bits(3, bits);
            let fx = e.multilinear(&MembershipVector::indicator(&s)).unwrap();
            assert_eq!(fx, f.value(&s));
        }
    }

    #[test]
    fn multilinear_at_half_is_mean_of_four() {
        // covers(0) = {a}, covers(1) = {a, b}; w = (1, 2).
        let f = wc(vec![1.0, 2.0], vec![vec![0], vec![0, 1]]);
        let got = Exact::new(&f).multilinear(&x(&[0.5, 0.5])).unwrap();
        // f(∅)=0, f({0})=1, f({1})=3, f({0,1})=3
        assert!((got - 0.25 * (0.0 + 1.0 + 3.0 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn partial_of_modular_is_weight() {
        let f = ValueOracle::new(WeightedCoverage::modular(vec![1.5, 2.0, 0.25]).unwrap());
        let e = Exact::new(&f);
        for pt in [[0.0, 0.0, 0.0], [0.3, 0.9, 0.1], [1.0, 1.0, 1.0]] {
            for (p, w) in [1.5, 2.0, 0.25].iter().enumerate() {
                assert!((e.partial(&x(&pt), p).unwrap() - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_ignores_own_coordinate() {
        let f = wc(vec![1.0, 2.0, 4.0], vec![vec![0, 1], vec![1, 2], vec![2]]);
        let e = Exact::new(&f);
        let a = e.partial(&x(&[0.1, 0.4, 0.7]), 1).unwrap();
        let b = e.partial(&x(&[0.1, 0.95, 0.7]), 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn partial_three_strategy_brute_force() {
        // covers: 0 → {a, b}, 1 → {b, c}, 2 → {c}; w = (1, 2, 4).
        let f = wc(vec![1.0, 2.0, 4.0], vec![vec![0, 1], vec![1, 2], vec![2]]);
        let pt = [0.3, 0.6, 0.1];
        // Oracle: enumerate the four subsets of {1, 2} for p = 0 by hand.
        let fv = |m: &[usize]| f.value(&StrategySet::from_members(3, m).unwrap());
        let mut expected = 0.0;
        for (others, prob) in [
            (vec![], 0.4 * 0.9),
            (vec![1], 0.6 * 0.9),
            (vec![2], 0.4 * 0.1),
            (vec![1, 2], 0.6 * 0.1),
        ] {
            let mut with = others.clone();
            with.push(0);
            expected += prob * (fv(&with) - fv(&others));
        }
        let got = Exact::new(&f).partial(&x(&pt), 0).unwrap();
        assert!((got - expected).abs() < 1e-12);
        // Independent value: Δ(0|∅)=3, Δ(0|{1})=1, Δ(0|{2})=3, Δ(0|{1,2})=1.
        assert!((got - (0.36 * 3.0 + 0.54 * 1.0 + 0.04 * 3.0 + 0.06 * 1.0)).abs() < 1e-12);
    }

    #[test]
    fn second_partial_cases() {
        let modular = ValueOracle::new(WeightedCoverage::modular(vec![1.0, 2.0]).unwrap());
        assert_eq!(
            Exact::new(&modular)
                .second_partial(&x(&[0.2, 0.7]), 0, 1)
                .unwrap(),
            0.0
        );

        // Identical covers on a shared element of weight 5.
        let dup = wc(vec![5.0], vec![vec![0], vec![0]]);
        let e = Exact::new(&dup);
        let v = e.second_partial(&x(&[0.5, 0.5]), 0, 1).unwrap();
        assert!((v + 5.0).abs() < 1e-12);
        assert!(e.second_partial(&x(&[0.5, 0.5]), 1, 1).is_err());
    }

    #[test]
    fn curvature_cases() {
        let modular = ValueOracle::new(WeightedCoverage::modular(vec![1.0, 2.0, 3.0]).unwrap());
        assert_eq!(Exact::new(&modular).total_curvature().unwrap(), 0.0);

        let dup = wc(vec![5.0, 1.0], vec![vec![0], vec![0], vec![1]]);
        assert_eq!(Exact::new(&dup).total_curvature().unwrap(), 1.0);

        let zero = wc(vec![0.0], vec![vec![0], vec![0]]);
        assert_eq!(
            Exact::new(&zero).total_curvature(),
            Err(Error::DegenerateCurvature)
        );
    }

    #[test]
    fn curvature_four_strategy_brute_force() {
        // covers: 0 → {a, b}, 1 → {b, c}, 2 → {c, d}, 3 → {d, a}; w = (1, 2, 3, 4).
        let f = wc(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        );
        // Independent oracle: all 4·2³ pairs (p, S ∌ p) straight from the oracle.
        let mut min_ratio = f64::INFINITY;
        for p in 0..4 {
            let single = f.marginal_gain(p, &StrategySet::empty(4)).unwrap();
            for bits in 0..16u64 {
                if bits >> p & 1 == 1 {
                    continue;
                }
                let s = StrategySet::from_bits(4, bits);
                min_ratio = min_ratio.min(f.marginal_gain(p, &s).unwrap() / single);
            }
        }
        // p=0 with S={1,3} leaves 0 of 3 => ratio 0; hence c = 1.
        assert_eq!(min_ratio, 0.0);
        assert_eq!(Exact::new(&f).total_curvature().unwrap(), 1.0);

        // Partial overlap only: 0 → {a, b}, 1 → {b, c}; min ratio 1/3 for p=0.
        let g = wc(vec![1.0, 2.0, 3.0], vec![vec![0, 1], vec![1, 2]]);
        let c = Exact::new(&g).total_curvature().unwrap();
        assert!((c - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn guard_rejects_large_ground_sets() {
        let f = ValueOracle::new(WeightedCoverage::modular(vec![1.0; 6]).unwrap());
        let e = Exact::new(&f).with_max_n(5);
        assert!(matches!(
            e.multilinear(&MembershipVector::zeros(6)),
            Err(Error::GuardExceeded { .. })
        ));
        assert!(e.total_curvature().is_err());
    }

    #[test]
    fn audit_flags_non_submodular() {
        struct Square;
        impl crate::oracle::SetFunction for Square {
            fn ground_size(&self) -> usize {
                3
            }
            fn eval(&self, s: &StrategySet) -> f64 {
                (s.len() * s.len()) as f64
            }
        }
        let f = ValueOracle::new(Square);
        let a = Exact::new(&f).audit(1e-12).unwrap();
        assert!(a.normalized && a.monotone && !a.submodular);

        let g = wc(vec![1.0, 2.0], vec![vec![0], vec![0, 1], vec![1]]);
        assert!(Exact::new(&g).audit(1e-12).unwrap().ok());
    }
}
