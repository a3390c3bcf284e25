//! Monte Carlo estimation of the multilinear-extension gradient.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matroid::{AgentPartition, MembershipVector};
use crate::oracle::ValueOracle;
use crate::rng::StreamKey;
use crate::set::StrategySet;

/// `K` random sets, each containing strategy `p` independently with probability `x_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub sets: Vec<StrategySet>,
    /// Stream the batch was drawn from, when drawn through a [`StreamKey`].
    pub stream: Option<StreamKey>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Draws `k` independent sets. Coordinates at 0 or 1 consume no randomness;
/// every other coordinate consumes exactly one uniform per set, in index order.
pub fn draw_samples<R: Rng + ?Sized>(x: &MembershipVector, k: usize, rng: &mut R) -> SampleBatch {
    let n = x.len();
    let sets = (0..k)
        .map(|_| {
            let mut s = StrategySet::empty(n);
            for (p, &xp) in x.as_slice().iter().enumerate() {
                let include = if xp >= 1.0 {
                    true
                } else if xp <= 0.0 {
                    false
                } else {
                    rng.gen::<f64>() < xp
                };
                if include {
                    s.insert(p);
                }
            }
            s
        })
        .collect();
    SampleBatch { sets, stream: None }
}

pub fn draw_samples_from(x: &MembershipVector, k: usize, key: StreamKey) -> SampleBatch {
    let mut batch = draw_samples(x, k, &mut key.rng());
    batch.stream = Some(key);
    batch
}

/// Empirical gradient restricted to a support.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    values: Vec<f64>,
    in_support: Vec<bool>,
    pub samples: usize,
}

impl GradientEstimate {
    /// Entry for `p`, or `None` when `p` was outside the support.
    pub fn get(&self, p: usize) -> Option<f64> {
        self.in_support
            .get(p)
            .copied()
            .unwrap_or(false)
            .then(|| self.values[p])
    }

    /// Dense view with zeros outside the support.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Entry `p = (1/K) Σ_k [f(Rᵏ ∪ {p}) − f(Rᵏ \ {p})]` for each `p` in `support`
/// (all strategies when `None`). Uses exactly `2·K·|support|` oracle calls.
pub fn estimate_gradient(
    f: &ValueOracle,
    x: &MembershipVector,
    batch: &SampleBatch,
    support: Option<&[usize]>,
) -> Result<GradientEstimate> {
    let n = f.ground_size();
    if x.len() != n {
        return Err(Error::InvalidVector(format!(
            "length {} for ground set {n}",
            x.len()
        )));
    }
    if batch.is_empty() {
        return Err(Error::Config("sample batch is empty".into()));
    }
    let all: Vec<usize>;
    let support = match support {
        Some(s) => s,
        None => {
            all = (0..n).collect();
            &all
        }
    };
    if support.is_empty() {
        return Err(Error::Config("gradient support is empty".into()));
    }
    let mut values = vec![0.0; n];
    let mut in_support = vec![false; n];
    for &p in support {
        if p >= n {
            return Err(Error::StrategyOutOfRange {
                strategy: p,
                size: n,
            });
        }
        in_support[p] = true;
    }
    let mut scratch = StrategySet::empty(n);
    for &p in support {
        let mut sum = 0.0;
        for set in &batch.sets {
            scratch.clone_from(set);
            scratch.insert(p);
            let with = f.value(&scratch);
            scratch.remove(p);
            let without = f.value(&scratch);
            sum += with - without;
        }
        values[p] = sum / batch.len() as f64;
    }
    Ok(GradientEstimate {
        values,
        in_support,
        samples: batch.len(),
    })
}

/// Hoeffding-style accuracy statement for the sampled gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingReport {
    /// Deviation threshold `f* / (2T)` for one coordinate.
    pub threshold: f64,
    /// Probability that one coordinate deviates by more than the threshold:
    /// `2·exp(−K / (8T²))`. Not clamped; values above 1 mean the bound is vacuous.
    pub per_coordinate_failure: f64,
    /// Success probability `1 − 2·T·n·exp(−K / (8T²))` for the whole run.
    pub aggregate_success: f64,
}

pub fn hoeffding_confidence(
    samples: usize,
    horizon: usize,
    n: usize,
    f_star_bound: f64,
) -> HoeffdingReport {
    let t = horizon as f64;
    let tail = (-(samples as f64) / (8.0 * t * t)).exp();
    HoeffdingReport {
        threshold: f_star_bound / (2.0 * t),
        per_coordinate_failure: 2.0 * tail,
        aggregate_success: 1.0 - 2.0 * t * n as f64 * tail,
    }
}

/// `(Πᵢ (1 − 2·exp(−Kᵢ/(8T²)))^{|Pᵢ|})^T`, the per-run success probability
/// with heterogeneous sample counts.
pub fn product_success(partition: &AgentPartition, samples: &[usize], horizon: usize) -> f64 {
    let t = horizon as f64;
    let mut log = 0.0;
    for (i, &k) in samples.iter().enumerate().take(partition.agents()) {
        let per = 1.0 - 2.0 * (-(k as f64) / (8.0 * t * t)).exp();
        if per <= 0.0 {
            return 0.0;
        }
        log += partition.block(i).len() as f64 * per.ln();
    }
    (t * log).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Exact;
    use crate::utility::WeightedCoverage;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zero = draw_samples(&MembershipVector::zeros(5), 20, &mut rng);
        assert!(zero.sets.iter().all(StrategySet::is_empty));
        let one = draw_samples(&MembershipVector::filled(5, 1.0).unwrap(), 20, &mut rng);
        assert!(one.sets.iter().all(|s| *s == StrategySet::full(5)));
    }

    #[test]
    fn inclusion_frequency_near_half() {
        // 10000 Bernoulli(0.5): 3σ = 0.015 < 0.02.
        let x = MembershipVector::filled(4, 0.5).unwrap();
        let batch = draw_samples(&x, 10_000, &mut ChaCha8Rng::seed_from_u64(9));
        for p in 0..4 {
            let freq = batch.sets.iter().filter(|s| s.contains(p)).count() as f64 / 10_000.0;
            assert!((freq - 0.5).abs() < 0.02, "p={p} freq={freq}");
        }
    }

    #[test]
    fn modular_estimate_is_exact() {
        let f = ValueOracle::new(WeightedCoverage::modular(vec![1.0, 2.5, 4.0]).unwrap());
        let x = MembershipVector::new(vec![0.3, 0.8, 0.5]).unwrap();
        let batch = draw_samples(&x, 17, &mut ChaCha8Rng::seed_from_u64(3));
        let g = estimate_gradient(&f, &x, &batch, None).unwrap();
        assert_eq!(g.values(), &[1.0, 2.5, 4.0]);
        assert_eq!(f.calls(), 2 * 17 * 3);
    }

    #[test]
    fn support_restriction_and_accounting() {
        let f = ValueOracle::new(WeightedCoverage::modular(vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let x = MembershipVector::filled(4, 0.5).unwrap();
        let batch = draw_samples(&x, 10, &mut ChaCha8Rng::seed_from_u64(3));
        let g = estimate_gradient(&f, &x, &batch, Some(&[2, 3])).unwrap();
        assert_eq!(g.get(0), None);
        assert_eq!(g.get(3), Some(4.0));
        assert_eq!(f.calls(), 2 * 10 * 2);
        assert!(estimate_gradient(&f, &x, &batch, Some(&[])).is_err());
    }

    #[test]
    fn saturated_duplicate_has_zero_gain() {
        // Strategies 0 and 1 cover the same element; x_1 = 1 puts 1 in every sample.
        let f = ValueOracle::new(WeightedCoverage::new(vec![2.0], vec![vec![0], vec![0]]).unwrap());
        let x = MembershipVector::new(vec![0.4, 1.0]).unwrap();
        let batch = draw_samples(&x, 50, &mut ChaCha8Rng::seed_from_u64(5));
        let g = estimate_gradient(&f, &x, &batch, Some(&[0])).unwrap();
        assert_eq!(g.get(0), Some(0.0));
    }

    #[test]
    fn large_batch_converges_to_exact() {
        let f = ValueOracle::new(
            WeightedCoverage::new(vec![1.0, 2.0, 4.0], vec![vec![0, 1], vec![1, 2], vec![2]])
                .unwrap(),
        );
        let x = MembershipVector::new(vec![0.3, 0.6, 0.1]).unwrap();
        let k = 20_000;
        let batch = draw_samples(&x, k, &mut ChaCha8Rng::seed_from_u64(11));
        let g = estimate_gradient(&f, &x, &batch, None).unwrap();
        // Hoeffding with range b − a = f(P) = 7: P(|dev| > 0.1) ≤ 2·exp(−2·K·0.01/49).
        for p in 0..3 {
            let exact = Exact::new(&f).partial(&x, p).unwrap();
            assert!((g.values()[p] - exact).abs() < 0.1, "p={p}");
        }
    }

    #[test]
    fn determinism_given_key() {
        let x = MembershipVector::new(vec![0.2, 0.5, 0.9]).unwrap();
        let key = StreamKey::new(42, 1, 3, crate::rng::Phase::Sampling);
        assert_eq!(
            draw_samples_from(&x, 100, key),
            draw_samples_from(&x, 100, key)
        );
    }

    #[test]
    fn hoeffding_values() {
        let r = hoeffding_confidence(8 * 25, 5, 1, 1.0);
        assert!((r.per_coordinate_failure - 2.0 / std::f64::consts::E).abs() < 1e-12);
        let r = hoeffding_confidence(10_000, 10, 3, 4.0);
        assert!((r.per_coordinate_failure - 2.0 * (-12.5f64).exp()).abs() < 1e-18);
        assert!((r.per_coordinate_failure - 7.4533e-6).abs() < 1e-9);
        assert_eq!(r.threshold, 0.2);
        assert!((r.aggregate_success - (1.0 - 60.0 * (-12.5f64).exp())).abs() < 1e-15);
        let field = hoeffding_confidence(1000, 50, 22, 1.0);
        assert!((field.per_coordinate_failure - 1.9025).abs() < 1e-4);
        assert!(field.aggregate_success < 0.0);
    }

    #[test]
    fn product_success_bounds_aggregate() {
        let part = AgentPartition::new(&[2, 3], &[1, 1]).unwrap();
        let prod = product_success(&part, &[5000, 5000], 10);
        let agg = hoeffding_confidence(5000, 10, 5, 1.0).aggregate_success;
        assert!(prod >= agg && prod <= 1.0);
    }
}
