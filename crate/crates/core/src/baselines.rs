//! Reference solvers: exhaustive search, sequential greedy over a route,
//! and centralized sampled continuous greedy.

use rayon::prelude::*;

use crate::distributed::{select_top, RoundConfig};
use crate::error::{Error, Result};
use crate::graph::CommGraph;
use crate::info_set::PROBABILITY_CAP_TOL;
use crate::matroid::{AgentPartition, MembershipVector};
use crate::oracle::ValueOracle;
use crate::pipage::round_all;
use crate::rng::{Phase, StreamKey};
use crate::sampling::{draw_samples_from, estimate_gradient};
use crate::set::StrategySet;

/// Largest number of feasible combinations brute force will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// A walk over the communication graph that visits every agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitSequence {
    order: Vec<usize>,
}

impl VisitSequence {
    pub fn new(order: Vec<usize>, g: &CommGraph) -> Result<Self> {
        if let Some(&a) = order.iter().find(|&&a| a >= g.agents()) {
            return Err(Error::Config(format!("route visits unknown agent {a}")));
        }
        if let Some(w) = order.windows(2).find(|w| !g.is_adjacent(w[0], w[1])) {
            return Err(Error::Config(format!(
                "route steps between non-adjacent agents {} and {}",
                w[0], w[1]
            )));
        }
        let mut seen = vec![false; g.agents()];
        for &a in &order {
            seen[a] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Config(format!("route never visits agent {missing}")));
        }
        Ok(VisitSequence { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i + 1) as u128
    })
}

/// All `k`-subsets of `block` in lexicographic order.
fn combinations(block: std::ops::Range<usize>, k: usize) -> Vec<Vec<usize>> {
    let items: Vec<usize> = block.collect();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < items.len() - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exhaustive maximum over bases of the partition matroid. Ties keep the
/// lexicographically first combination.
pub fn brute_force_opt(f: &ValueOracle, partition: &AgentPartition) -> Result<(StrategySet, f64)> {
    let total = (0..partition.agents()).fold(1u128, |acc, i| {
        acc.saturating_mul(binomial(partition.block(i).len(), partition.budget(i)))
    });
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded {
            what: "brute-force combinations",
            required: total,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let per_block: Vec<Vec<Vec<usize>>> = (0..partition.agents())
        .map(|i| combinations(partition.block(i), partition.budget(i)))
        .collect();
    let n = partition.ground_size();
    let decode = |mut index: u128| {
        let mut set = StrategySet::empty(n);
        for combos in per_block.iter().rev() {
            let len = combos.len() as u128;
            for &p in &combos[(index % len) as usize] {
                set.insert(p);
            }
            index /= len;
        }
        set
    };
    let best = (0..total as u64)
        .into_par_iter()
        .map(|index| (f.value(&decode(index as u128)), index))
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok((decode(best.1 as u128), best.0))
}

/// Agents act in route order on their first visit, each adding its `κᵢ`
/// best strategies one at a time by marginal gain (ties to the lower id).
pub fn sequential_greedy(
    f: &ValueOracle,
    partition: &AgentPartition,
    seq: &VisitSequence,
) -> StrategySet {
    let mut chosen = StrategySet::empty(partition.ground_size());
    let mut acted = vec![false; partition.agents()];
    for &i in seq.order() {
        if std::mem::replace(&mut acted[i], true) {
            continue;
        }
        for _ in 0..partition.budget(i) {
            let base = f.value(&chosen);
            let mut best: Option<(usize, f64)> = None;
            for p in partition.block(i) {
                if chosen.contains(p) {
                    continue;
                }
                chosen.insert(p);
                let gain = f.value(&chosen) - base;
                chosen.remove(p);
                if best.is_none_or(|(_, g)| gain > g) {
                    best = Some((p, gain));
                }
            }
            if let Some((p, _)) = best {
                chosen.insert(p);
            }
        }
    }
    chosen
}

#[derive(Debug, Clone)]
pub struct CentralizedRun {
    /// `x(t)` for `t = 1..=T`.
    pub trajectory: Vec<MembershipVector>,
    pub selections: Vec<Vec<Vec<usize>>>,
    pub x: MembershipVector,
    pub rounded: StrategySet,
}

/// Sampled continuous greedy run by one coordinator. Block `i` is sampled
/// with agent `i`'s substream, so the run matches the distributed protocol
/// with diameter-many consensus rounds.
pub fn centralized_cg(
    f: &ValueOracle,
    partition: &AgentPartition,
    cfg: &RoundConfig,
) -> Result<CentralizedRun> {
    cfg.validate(partition)?;
    let n = partition.ground_size();
    if f.ground_size() != n {
        return Err(Error::Config(format!(
            "utility has {} strategies but partition has {n}",
            f.ground_size()
        )));
    }
    let step = cfg.step();
    let mut x = MembershipVector::zeros(n);
    let mut trajectory = Vec::with_capacity(cfg.horizon);
    let mut selections = Vec::with_capacity(cfg.horizon);
    for t in 0..cfg.horizon {
        let picks: Vec<Vec<usize>> = (0..partition.agents())
            .into_par_iter()
            .map(|i| {
                let block = partition.block(i);
                let key = StreamKey::new(cfg.seed, i, t, Phase::Sampling);
                let batch = draw_samples_from(&x, cfg.samples[i], key);
                let support: Vec<usize> = block.clone().collect();
                let grad = estimate_gradient(f, &x, &batch, Some(&support))?;
                Ok(select_top(block, grad.values(), partition.budget(i)))
            })
            .collect::<Result<_>>()?;
        let mut next = x.clone().into_vec();
        for &p in picks.iter().flatten() {
            let v = next[p] + step;
            if v > 1.0 + PROBABILITY_CAP_TOL {
                return Err(Error::Protocol(format!(
                    "strategy {p} probability reached {v}"
                )));
            }
            next[p] = v.min(1.0);
        }
        x = MembershipVector::new(next)?;
        trajectory.push(x.clone());
        selections.push(picks);
    }
    let rounded = round_all(&x, partition, cfg.seed, 0)?;
    Ok(CentralizedRun {
        trajectory,
        selections,
        x,
        rounded,
    })
}
