//! Partition matroid over agent-owned strategy blocks, in set and polytope form.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::StrategySet;

/// Absolute tolerance on block sums and on vertex coordinates.
pub const POLYTOPE_TOL: f64 = 1e-9;

/// Contiguous per-agent strategy blocks with selection budgets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionSpec", into = "PartitionSpec")]
pub struct AgentPartition {
    starts: Vec<usize>,
    budgets: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PartitionSpec {
    block_sizes: Vec<usize>,
    budgets: Vec<usize>,
}

impl TryFrom<PartitionSpec> for AgentPartition {
    type Error = Error;

    fn try_from(spec: PartitionSpec) -> Result<Self> {
        AgentPartition::new(&spec.block_sizes, &spec.budgets)
    }
}

impl From<AgentPartition> for PartitionSpec {
    fn from(p: AgentPartition) -> Self {
        PartitionSpec {
            block_sizes: p.block_sizes(),
            budgets: p.budgets,
        }
    }
}

impl AgentPartition {
    pub fn new(block_sizes: &[usize], budgets: &[usize]) -> Result<Self> {
        if block_sizes.is_empty() {
            return Err(Error::Config("partition needs at least one agent".into()));
        }
        if block_sizes.len() != budgets.len() {
            return Err(Error::Config(format!(
                "{} blocks but {} budgets",
                block_sizes.len(),
                budgets.len()
            )));
        }
        let mut starts = vec![0];
        for (i, (&size, &k)) in block_sizes.iter().zip(budgets).enumerate() {
            if k == 0 || k > size {
                return Err(Error::Config(format!(
                    "agent {i}: budget {k} must lie in 1..={size}"
                )));
            }
            starts.push(starts[i] + size);
        }
        Ok(AgentPartition {
            starts,
            budgets: budgets.to_vec(),
        })
    }

    pub fn agents(&self) -> usize {
        self.budgets.len()
    }

    pub fn ground_size(&self) -> usize {
        *self.starts.last().unwrap()
    }

    pub fn block(&self, agent: usize) -> Range<usize> {
        self.starts[agent]..self.starts[agent + 1]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.starts.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn budget(&self, agent: usize) -> usize {
        self.budgets[agent]
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    /// κ = Σᵢ κᵢ.
    pub fn total_budget(&self) -> usize {
        self.budgets.iter().sum()
    }

    pub fn owner(&self, p: usize) -> Option<usize> {
        if p >= self.ground_size() {
            return None;
        }
        Some(self.starts.partition_point(|&s| s <= p) - 1)
    }

    pub fn is_independent(&self, set: &StrategySet) -> bool {
        let mut counts = vec![0usize; self.agents()];
        for p in set.iter() {
            match self.owner(p) {
                Some(i) => counts[i] += 1,
                None => return false,
            }
        }
        counts.iter().zip(&self.budgets).all(|(c, k)| c <= k)
    }

    pub fn block_sum(&self, x: &MembershipVector, agent: usize) -> f64 {
        x.values[self.block(agent)].iter().sum()
    }

    pub fn in_polytope(&self, x: &MembershipVector) -> bool {
        x.len() == self.ground_size()
            && (0..self.agents())
                .all(|i| self.block_sum(x, i) <= self.budgets[i] as f64 + POLYTOPE_TOL)
    }

    pub fn is_vertex(&self, x: &MembershipVector) -> bool {
        x.values
            .iter()
            .all(|&v| v <= POLYTOPE_TOL || v >= 1.0 - POLYTOPE_TOL)
            && self.in_polytope(x)
    }
}

/// A point of `[0, 1]ⁿ`: the independent inclusion probability of each strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipVector {
    values: Vec<f64>,
}

impl MembershipVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((p, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidVector(format!(
                "coordinate {p} = {v} outside [0, 1]"
            )));
        }
        Ok(MembershipVector { values })
    }

    pub fn zeros(n: usize) -> Self {
        MembershipVector {
            values: vec![0.0; n],
        }
    }

    pub fn filled(n: usize, v: f64) -> Result<Self> {
        Self::new(vec![v; n])
    }

    pub fn indicator(set: &StrategySet) -> Self {
        let mut values = vec![0.0; set.ground_size()];
        set.iter().for_each(|p| values[p] = 1.0);
        MembershipVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, p: usize) -> f64 {
        self.values[p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Copy with coordinate `p` replaced.
    pub fn with(&self, p: usize, v: f64) -> Result<Self> {
        let mut values = self.values.clone();
        values[p] = v;
        Self::new(values)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
