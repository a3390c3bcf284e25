//! Synchronous distributed continuous greedy with max-consensus.
//!
//! Each round has two barrier-separated phases. In the ascent phase every
//! agent samples from its own local vector, estimates the gradient on its
//! block, and adds `1/T` to its `κᵢ` best strategies. In the consensus phase
//! every agent replaces its information set by the keywise max over itself
//! and its neighbors, repeated `rounds` times.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CommGraph;
use crate::info_set::{max_merge, InformationSet};
use crate::matroid::{AgentPartition, MembershipVector, POLYTOPE_TOL};
use crate::oracle::ValueOracle;
use crate::rng::{Phase, StreamKey};
use crate::sampling::{draw_samples_from, estimate_gradient};

/// Number of max-merge repetitions per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusRounds {
    One,
    Diameter,
    Fixed(usize),
}

impl ConsensusRounds {
    pub fn resolve(&self, g: &CommGraph) -> usize {
        match *self {
            ConsensusRounds::One => 1,
            ConsensusRounds::Diameter => g.diameter().max(1),
            ConsensusRounds::Fixed(r) => r,
        }
    }
}

impl std::str::FromStr for ConsensusRounds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "one" => Ok(ConsensusRounds::One),
            "diam" | "diameter" => Ok(ConsensusRounds::Diameter),
            other => other
                .parse::<usize>()
                .ok()
                .filter(|&r| r >= 1)
                .map(ConsensusRounds::Fixed)
                .ok_or_else(|| Error::Config(format!("unknown consensus rounds {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundConfig {
    /// Number of ascent steps `T`; the step size is `1/T`.
    pub horizon: usize,
    /// Samples per agent per round.
    pub samples: Vec<usize>,
    pub consensus: ConsensusRounds,
    /// Trial seed from which all substreams derive.
    pub seed: u64,
}

impl RoundConfig {
    pub fn uniform(horizon: usize, samples: usize, agents: usize, seed: u64) -> Self {
        RoundConfig {
            horizon,
            samples: vec![samples; agents],
            consensus: ConsensusRounds::One,
            seed,
        }
    }

    pub fn with_consensus(mut self, consensus: ConsensusRounds) -> Self {
        self.consensus = consensus;
        self
    }

    pub fn step(&self) -> f64 {
        1.0 / self.horizon as f64
    }

    pub fn validate(&self, partition: &AgentPartition) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon T must be at least 1".into()));
        }
        if self.samples.len() != partition.agents() {
            return Err(Error::Config(format!(
                "{} sample counts for {} agents",
                self.samples.len(),
                partition.agents()
            )));
        }
        if let Some(i) = self.samples.iter().position(|&k| k == 0) {
            return Err(Error::Config(format!("agent {i} has zero samples")));
        }
        if self.consensus == ConsensusRounds::Fixed(0) {
            return Err(Error::Config("consensus rounds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub info: InformationSet,
    pub block: Range<usize>,
    pub budget: usize,
}

impl AgentState {
    pub fn initial(partition: &AgentPartition) -> Vec<AgentState> {
        (0..partition.agents())
            .map(|i| AgentState {
                id: i,
                info: InformationSet::new(),
                block: partition.block(i),
                budget: partition.budget(i),
            })
            .collect()
    }

    pub fn own_block_sum(&self) -> f64 {
        self.info.block_sum(self.block.clone())
    }
}

/// Result of one agent's ascent phase.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    /// The agent's set after adding `1/T` to each selected strategy.
    pub propagated: InformationSet,
    /// Selected strategies in ascending order.
    pub selected: Vec<usize>,
    /// Gradient estimate on the agent's block, indexed from the block start.
    pub gradient: Vec<f64>,
}

/// The `k` strategies of `block` with the largest weight; ties go to the
/// lower identifier. Returned in ascending order.
pub fn select_top(block: Range<usize>, weights: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = block.collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

pub fn local_ascent_step(
    agent: &AgentState,
    f: &ValueOracle,
    cfg: &RoundConfig,
    round: usize,
) -> Result<AscentOutcome> {
    if round >= cfg.horizon {
        return Err(Error::Protocol(format!(
            "round {round} beyond horizon {}",
            cfg.horizon
        )));
    }
    if agent.block.len() < agent.budget {
        return Err(Error::Config(format!(
            "agent {} has budget {} but {} strategies",
            agent.id,
            agent.budget,
            agent.block.len()
        )));
    }
    let n = f.ground_size();
    let x = agent.info.to_dense(n)?;
    let key = StreamKey::new(cfg.seed, agent.id, round, Phase::Sampling);
    let batch = draw_samples_from(&x, cfg.samples[agent.id], key);
    let support: Vec<usize> = agent.block.clone().collect();
    let grad = estimate_gradient(f, &x, &batch, Some(&support))?;
    let selected = select_top(agent.block.clone(), grad.values(), agent.budget);
    let step = cfg.step();
    let additions: Vec<(usize, f64)> = selected.iter().map(|&p| (p, step)).collect();
    Ok(AscentOutcome {
        propagated: agent.info.oplus(&additions)?,
        gradient: grad.values()[agent.block.clone()].to_vec(),
        selected,
    })
}

/// `rounds` synchronous max-merge steps over closed neighborhoods.
pub fn consensus_round(
    states: &[InformationSet],
    g: &CommGraph,
    rounds: usize,
) -> Result<Vec<InformationSet>> {
    if states.len() != g.agents() {
        return Err(Error::Config(format!(
            "{} states for a graph of {} agents",
            states.len(),
            g.agents()
        )));
    }
    let mut current = states.to_vec();
    for _ in 0..rounds {
        current = (0..g.agents())
            .map(|i| {
                max_merge(
                    std::iter::once(&current[i]).chain(g.neighbors(i).iter().map(|&j| &current[j])),
                )
            })
            .collect();
    }
    Ok(current)
}

/// `x̄` built from each agent's own block, checked against the keywise max
/// over all agents.
pub fn aggregate_vector(
    states: &[InformationSet],
    partition: &AgentPartition,
) -> Result<MembershipVector> {
    let n = partition.ground_size();
    let mut own = vec![0.0; n];
    for (i, state) in states.iter().enumerate() {
        for (p, a) in state.range(partition.block(i)) {
            own[p] = a;
        }
    }
    let merged = max_merge(states).to_dense(n)?;
    for (p, (&a, &b)) in own.iter().zip(merged.as_slice()).enumerate() {
        if (a - b).abs() > POLYTOPE_TOL {
            return Err(Error::Invariant(format!(
                "strategy {p}: owner holds {a} but some agent holds {b}"
            )));
        }
    }
    MembershipVector::new(own)
}

/// State of the network after one round (ascent plus consensus).
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// Round number `t`, counting from 1.
    pub round: usize,
    pub xbar: MembershipVector,
    /// Each agent's local vector after consensus.
    pub locals: Vec<MembershipVector>,
    /// Strategies each agent selected this round.
    pub selections: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rounds: Vec<RoundRecord>,
}

#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub finals: Vec<AgentState>,
    pub xbar: MembershipVector,
    pub trace: Trace,
    pub consensus_rounds: usize,
}

pub fn run_distributed_cg(
    f: &ValueOracle,
    partition: &AgentPartition,
    g: &CommGraph,
    cfg: &RoundConfig,
) -> Result<DistributedRun> {
    cfg.validate(partition)?;
    if f.ground_size() != partition.ground_size() {
        return Err(Error::Config(format!(
            "utility has {} strategies but partition has {}",
            f.ground_size(),
            partition.ground_size()
        )));
    }
    if g.agents() != partition.agents() {
        return Err(Error::Config(format!(
            "graph has {} agents but partition has {}",
            g.agents(),
            partition.agents()
        )));
    }
    let rounds = cfg.consensus.resolve(g);
    let n = partition.ground_size();
    let mut agents = AgentState::initial(partition);
    let mut trace = Trace::default();
    for t in 0..cfg.horizon {
        let outcomes: Vec<AscentOutcome> = agents
            .par_iter()
            .map(|a| local_ascent_step(a, f, cfg, t))
            .collect::<Result<_>>()?;
        let propagated: Vec<InformationSet> =
            outcomes.iter().map(|o| o.propagated.clone()).collect();
        let updated = consensus_round(&propagated, g, rounds)?;
        let xbar = aggregate_vector(&updated, partition)?;
        let locals = updated
            .iter()
            .map(|s| s.to_dense(n))
            .collect::<Result<Vec<_>>>()?;
        trace.rounds.push(RoundRecord {
            round: t + 1,
            xbar,
            locals,
            selections: outcomes.into_iter().map(|o| o.selected).collect(),
        });
        for (agent, info) in agents.iter_mut().zip(updated) {
            agent.info = info;
        }
    }
    let xbar = trace
        .rounds
        .last()
        .map(|r| r.xbar.clone())
        .unwrap_or_else(|| MembershipVector::zeros(n));
    Ok(DistributedRun {
        finals: agents,
        xbar,
        trace,
        consensus_rounds: rounds,
    })
}

/// Outcome of checking a trace against the protocol's guarantees.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceAudit {
    pub violations: Vec<String>,
    /// Largest `(1/κ)·1·(x̄ − xᵢ)` seen over agents and rounds.
    pub max_disagreement: f64,
    pub checks: usize,
}

impl TraceAudit {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !cond {
            self.violations.push(msg());
        }
    }
}

/// Checks the disagreement bound, the per-round progress identity, block
/// ownership, monotone growth, polytope membership, and final block sums.
pub fn audit_trace(
    trace: &Trace,
    partition: &AgentPartition,
    diameter: usize,
    horizon: usize,
) -> TraceAudit {
    const TOL: f64 = 1e-9;
    let mut audit = TraceAudit::default();
    let n = partition.ground_size();
    let step = 1.0 / horizon as f64;
    let kappa = partition.total_budget() as f64;
    let zeros = MembershipVector::zeros(n);
    let mut prev_xbar = &zeros;
    let mut prev_locals: Vec<&MembershipVector> = vec![&zeros; partition.agents()];
    for rec in &trace.rounds {
        let t = rec.round;
        let xbar = &rec.xbar;
        audit.check(partition.in_polytope(xbar), || {
            format!("round {t}: x̄ outside polytope")
        });
        for (i, local) in rec.locals.iter().enumerate() {
            audit.check(partition.in_polytope(local), || {
                format!("round {t}: agent {i} outside polytope")
            });
            let gap = (xbar.total() - local.total()) / kappa;
            audit.max_disagreement = audit.max_disagreement.max(gap);
            audit.check(gap >= -TOL && gap <= diameter as f64 * step + TOL, || {
                format!("round {t}: agent {i} disagreement {gap}")
            });
            for p in 0..n {
                let owner = partition.owner(p).unwrap_or(i);
                audit.check(local.get(p) <= rec.locals[owner].get(p) + TOL, || {
                    format!("round {t}: agent {i} exceeds owner {owner} on strategy {p}")
                });
                audit.check(local.get(p) + TOL >= prev_locals[i].get(p), || {
                    format!("round {t}: agent {i} decreased strategy {p}")
                });
            }
        }
        let mut expected = prev_xbar.as_slice().to_vec();
        for sel in &rec.selections {
            for &p in sel {
                expected[p] += step;
            }
        }
        for p in 0..n {
            audit.check((xbar.get(p) - expected[p].min(1.0)).abs() <= TOL, || {
                format!("round {t}: x̄ increment wrong at strategy {p}")
            });
        }
        for i in 0..partition.agents() {
            let inc = partition.block_sum(xbar, i) - partition.block_sum(prev_xbar, i);
            let want = partition.budget(i) as f64 * step;
            audit.check((inc - want).abs() <= TOL, || {
                format!("round {t}: agent {i} block increment {inc}, expected {want}")
            });
        }
        prev_xbar = xbar;
        prev_locals = rec.locals.iter().collect();
    }
    if trace.rounds.len() == horizon {
        for i in 0..partition.agents() {
            let sum = partition.block_sum(prev_locals[i], i);
            let want = partition.budget(i) as f64;
            audit.check((sum - want).abs() <= TOL, || {
                format!("agent {i} final block sum {sum}, expected {want}")
            });
        }
    }
    audit
}
