//! Undirected, connected communication graph over agents.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    adj: Vec<Vec<usize>>,
}

impl CommGraph {
    /// Builds the graph and rejects self-loops, unknown endpoints, and
    /// disconnected topologies.
    pub fn new(agents: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if agents == 0 {
            return Err(Error::Config("graph needs at least one agent".into()));
        }
        let mut adj = vec![Vec::new(); agents];
        for &(a, b) in edges {
            if a >= agents || b >= agents {
                return Err(Error::Config(format!(
                    "edge ({a}, {b}) outside {agents} agents"
                )));
            }
            if a == b {
                return Err(Error::Config(format!("self-loop at agent {a}")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let g = CommGraph { adj };
        if g.hops_from(0).iter().any(Option::is_none) {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn ring(agents: usize) -> Result<Self> {
        let edges: Vec<_> = match agents {
            0 | 1 => vec![],
            2 => vec![(0, 1)],
            _ => (0..agents).map(|i| (i, (i + 1) % agents)).collect(),
        };
        Self::new(agents, &edges)
    }

    pub fn path(agents: usize) -> Result<Self> {
        let edges: Vec<_> = (1..agents).map(|i| (i - 1, i)).collect();
        Self::new(agents, &edges)
    }

    pub fn complete(agents: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for a in 0..agents {
            for b in a + 1..agents {
                edges.push((a, b));
            }
        }
        Self::new(agents, &edges)
    }

    pub fn agents(&self) -> usize {
        self.adj.len()
    }

    /// Neighbors of `agent`, excluding itself, ascending.
    pub fn neighbors(&self, agent: usize) -> &[usize] {
        &self.adj[agent]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    /// BFS hop counts from `source`; `None` for unreachable agents.
    pub fn hops_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.agents()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Longest shortest path, via BFS from every agent.
    pub fn diameter(&self) -> usize {
        (0..self.agents())
            .flat_map(|s| self.hops_from(s))
            .map(|d| d.expect("graph is connected by construction"))
            .max()
            .unwrap_or(0)
    }
}

/// Serialized graph description used in scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Ring,
    Path,
    Complete,
    Custom { edges: Vec<(usize, usize)> },
}

impl GraphSpec {
    pub fn build(&self, agents: usize) -> Result<CommGraph> {
        match self {
            GraphSpec::Ring => CommGraph::ring(agents),
            GraphSpec::Path => CommGraph::path(agents),
            GraphSpec::Complete => CommGraph::complete(agents),
            GraphSpec::Custom { edges } => CommGraph::new(agents, edges),
        }
    }
}
