#![allow(dead_code)]

use dcg_core::utility::{UtilityInstance, WeightedCoverage};
use dcg_core::{AgentPartition, MembershipVector, ValueOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weighted coverage over a universe of `m` elements; every strategy covers
/// one to three random elements.
pub fn random_coverage(rng: &mut ChaCha8Rng, n: usize, m: usize) -> WeightedCoverage {
    let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..5.0)).collect();
    let covers = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3usize.min(m));
            let mut c: Vec<usize> = (0..k).map(|_| rng.gen_range(0..m)).collect();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    WeightedCoverage::new(weights, covers).unwrap()
}

pub fn random_oracle(seed: u64, n: usize, m: usize) -> ValueOracle {
    ValueOracle::new(random_coverage(&mut rng(seed), n, m))
}

pub fn instance_of(w: &WeightedCoverage) -> UtilityInstance {
    UtilityInstance::WeightedCoverage {
        weights: w.weights().to_vec(),
        covers: w.covers().to_vec(),
    }
}

/// Splits `n` strategies over `agents` blocks of near-equal size with budgets
/// drawn from `1..=min(2, block)`.
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize, agents: usize) -> AgentPartition {
    let sizes: Vec<usize> = (0..agents)
        .map(|i| n / agents + usize::from(i < n % agents))
        .collect();
    let budgets: Vec<usize> = sizes.iter().map(|&s| rng.gen_range(1..=s.min(2))).collect();
    AgentPartition::new(&sizes, &budgets).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> MembershipVector {
    MembershipVector::new((0..n).map(|_| rng.gen::<f64>()).collect()).unwrap()
}
