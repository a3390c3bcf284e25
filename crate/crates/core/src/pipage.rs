//! Per-agent stochastic pipage rounding of a fractional block.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::Exact;
use crate::matroid::{AgentPartition, MembershipVector};
use crate::oracle::ValueOracle;
use crate::rng::{Phase, StreamKey};
use crate::set::StrategySet;

/// Distance from 0 or 1 below which a coordinate counts as integral.
pub const SNAP_TOL: f64 = 1e-9;

/// One agent's block during rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingState {
    pub fractional: BTreeMap<usize, f64>,
    /// Strategies that reached 1, in the order they did.
    pub selected: Vec<usize>,
    pub block: Range<usize>,
}

impl RoundingState {
    /// Starts from the block's coordinates of `x`, snapping near-integral values.
    pub fn new(x: &MembershipVector, block: Range<usize>) -> Result<Self> {
        if block.end > x.len() {
            return Err(Error::InvalidVector(format!(
                "block {block:?} outside vector of length {}",
                x.len()
            )));
        }
        let mut state = RoundingState {
            fractional: BTreeMap::new(),
            selected: Vec::new(),
            block: block.clone(),
        };
        for p in block {
            state.settle(p, x.get(p));
        }
        Ok(state)
    }

    fn settle(&mut self, p: usize, v: f64) {
        if v >= 1.0 - SNAP_TOL {
            self.fractional.remove(&p);
            self.selected.push(p);
        } else if v <= SNAP_TOL {
            self.fractional.remove(&p);
        } else {
            self.fractional.insert(p, v);
        }
    }

    pub fn mass(&self) -> f64 {
        self.selected.len() as f64 + self.fractional.values().sum::<f64>()
    }

    pub fn is_integral(&self) -> bool {
        self.fractional.is_empty()
    }
}

/// The two-coordinate transfer. With probability `δq/(δp+δq)` (decided by
/// `u < δq/(δp+δq)`) moves `δp = min(yp, 1−yq)` from `p` to `q`; otherwise
/// moves `δq = min(1−yp, yq)` from `q` to `p`.
pub fn pipage_pair(yp: f64, yq: f64, u: f64) -> (f64, f64) {
    let dp = yp.min(1.0 - yq);
    let dq = (1.0 - yp).min(yq);
    if u * (dp + dq) < dq {
        (yp - dp, yq + dp)
    } else {
        (yp + dq, yq - dq)
    }
}

/// Applies one transfer between fractional coordinates `p` and `q`.
pub fn pipage_step<R: Rng + ?Sized>(
    state: &mut RoundingState,
    p: usize,
    q: usize,
    rng: &mut R,
) -> Result<()> {
    if p == q {
        return Err(Error::Invariant(format!(
            "pipage step on identical strategies {p}"
        )));
    }
    let (yp, yq) = match (state.fractional.get(&p), state.fractional.get(&q)) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            return Err(Error::Invariant(format!(
                "pipage step on non-fractional pair ({p}, {q})"
            )))
        }
    };
    let (np, nq) = pipage_pair(yp, yq, rng.gen::<f64>());
    state.settle(p, np);
    state.settle(q, nq);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedBlock {
    /// Selected strategies in ascending order.
    pub selected: Vec<usize>,
    pub steps: usize,
}

/// Rounds the block to exactly `budget` strategies, always pairing the two
/// lowest fractional identifiers.
pub fn round_block<R: Rng + ?Sized>(
    x: &MembershipVector,
    block: Range<usize>,
    budget: usize,
    rng: &mut R,
) -> Result<RoundedBlock> {
    let mut state = RoundingState::new(x, block)?;
    let mass = state.mass();
    if (mass - budget as f64).abs() > SNAP_TOL {
        return Err(Error::Protocol(format!(
            "block {:?} has mass {mass}, expected {budget}",
            state.block
        )));
    }
    let mut steps = 0;
    while !state.is_integral() {
        let mut keys = state.fractional.keys();
        let (p, q) = match (keys.next(), keys.next()) {
            (Some(&p), Some(&q)) => (p, q),
            _ => {
                return Err(Error::Invariant(format!(
                    "lone fractional coordinate in block {:?}",
                    state.block
                )))
            }
        };
        pipage_step(&mut state, p, q, rng)?;
        steps += 1;
    }
    let mut selected = state.selected;
    selected.sort_unstable();
    if selected.len() != budget {
        return Err(Error::Invariant(format!(
            "rounding selected {} strategies, expected {budget}",
            selected.len()
        )));
    }
    Ok(RoundedBlock { selected, steps })
}

/// Rounds every agent's block with its own substream; `repetition` separates
/// independent roundings of the same vector.
pub fn round_all(
    x: &MembershipVector,
    partition: &AgentPartition,
    seed: u64,
    repetition: usize,
) -> Result<StrategySet> {
    let mut out = StrategySet::empty(partition.ground_size());
    for i in 0..partition.agents() {
        let mut rng = StreamKey::new(seed, i, repetition, Phase::Rounding).rng();
        for p in round_block(x, partition.block(i), partition.budget(i), &mut rng)?.selected {
            out.insert(p);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingReport {
    pub estimate: f64,
    pub std_error: f64,
    /// Exact multilinear value at the fractional point.
    pub exact: f64,
    pub trials: usize,
}

impl RoundingReport {
    /// `estimate + 3·SE ≥ F(x̄)`.
    pub fn pass(&self) -> bool {
        self.estimate + 3.0 * self.std_error + SNAP_TOL >= self.exact
    }

    /// `|estimate − F(x̄)| ≤ 3·SE`, the test for the equality case.
    pub fn matches(&self) -> bool {
        (self.estimate - self.exact).abs() <= 3.0 * self.std_error + SNAP_TOL
    }

    pub fn margin(&self) -> f64 {
        self.estimate - self.exact
    }
}

/// Monte Carlo mean of `f` over `trials` independent roundings, next to the
/// exact `F(x̄)`.
pub fn rounding_expectation_check(
    f: &ValueOracle,
    xbar: &MembershipVector,
    partition: &AgentPartition,
    trials: usize,
    seed: u64,
) -> Result<RoundingReport> {
    if trials < 2 {
        return Err(Error::Config(
            "rounding check needs at least two trials".into(),
        ));
    }
    let exact = Exact::new(f).multilinear(xbar)?;
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|r| round_all(xbar, partition, seed, r).map(|s| f.value(&s)))
        .collect::<Result<_>>()?;
    let m = trials as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(RoundingReport {
        estimate: mean,
        std_error: (var / m).sqrt(),
        exact,
        trials,
    })
}
