//! Scenario files, trial orchestration, result records, and bound checks.
//!
//! A scenario is a JSON document:
//!
//! ```text
//! {"id": "small",
//!  "master_seed": 7,
//!  "trials": 10,
//!  "utility": {"source": "inline", "instance": {...}}       // or
//!             {"source": "file", "path": "instance.json"}    // or
//!             {"source": "random_field", "sources": 2000, "sites": 10,
//!              "field": [1.0, 1.0], "agent_sites": [10, 5, 3, 2, 2],
//!              "depot": [0.5, 0.5], "cluster_radius": 0.1},   // both optional
//!  "agents": {"block_sizes": [...], "budgets": [...]},
//!  "graph": {"kind": "ring"},
//!  "horizon": 50,
//!  "samples": [1000],          // one count for all agents, or one per agent
//!  "consensus": "one",         // "one" | "diameter" | {"fixed": r}
//!  "solvers": ["ds", "central", "brute", "seq"],
//!  "sequences": [{"name": "a", "order": [0, 1, 2, 3, 4]}]}
//! ```
//!
//! Each trial `k` runs under `trial_seed(master_seed, k)`; instances drawn by
//! `random_field` come from that seed's instance stream, so a record's seed
//! and the scenario together reproduce it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{brute_force_opt, centralized_cg, sequential_greedy, VisitSequence};
use crate::bounds::{agreement_factor, distributed_factor, sequential_factor};
use crate::distributed::{audit_trace, run_distributed_cg, ConsensusRounds, RoundConfig, Trace};
use crate::error::{Error, Result};
use crate::exact::{Exact, DEFAULT_MAX_N};
use crate::graph::{CommGraph, GraphSpec};
use crate::matroid::{AgentPartition, MembershipVector};
use crate::oracle::ValueOracle;
use crate::pipage::{round_all, rounding_expectation_check};
use crate::rng::{fold, trial_seed, Phase, StreamKey};
use crate::sampling::{hoeffding_confidence, product_success, HoeffdingReport};
use crate::set::StrategySet;
use crate::utility::{Point, Utility, UtilityInstance};

use rand::Rng;

/// Ground sets up to this size get exact `F(x̄)` in traces.
const TRACE_EXACT_MAX_N: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum UtilitySource {
    Inline {
        instance: UtilityInstance,
    },
    File {
        path: PathBuf,
    },
    /// Random sources and sites in a rectangle, redrawn for every trial.
    /// Agent `i` may use sites `0..agent_sites[i]`. Sources are uniform unless
    /// `cluster_radius` is set, in which case each source lands uniformly in a
    /// disk of that radius around a random site, clamped to the field.
    RandomField {
        sources: usize,
        sites: usize,
        field: [f64; 2],
        agent_sites: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depot: Option<Point>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cluster_radius: Option<f64>,
    },
}

impl UtilitySource {
    pub fn instance(&self, seed: u64) -> Result<UtilityInstance> {
        match self {
            UtilitySource::Inline { instance } => Ok(instance.clone()),
            UtilitySource::File { path } => UtilityInstance::load(path),
            UtilitySource::RandomField {
                sources,
                sites,
                field,
                agent_sites,
                depot,
                cluster_radius,
            } => {
                if let Some(&s) = agent_sites.iter().find(|&&s| s > *sites || s == 0) {
                    return Err(Error::Config(format!(
                        "agent site count {s} outside 1..={sites}"
                    )));
                }
                if !(field[0] > 0.0 && field[1] > 0.0) {
                    return Err(Error::Config("field dimensions must be positive".into()));
                }
                let mut rng = StreamKey::new(seed, 0, 0, Phase::Instance).rng();
                let (source_points, site_points) = match cluster_radius {
                    None => {
                        let mut point = || -> Point {
                            [rng.gen::<f64>() * field[0], rng.gen::<f64>() * field[1]]
                        };
                        let src: Vec<Point> = (0..*sources).map(|_| point()).collect();
                        let st: Vec<Point> = (0..*sites).map(|_| point()).collect();
                        (src, st)
                    }
                    Some(r) => {
                        if !(r.is_finite() && *r >= 0.0) {
                            return Err(Error::Config(
                                "cluster_radius must be finite and non-negative".into(),
                            ));
                        }
                        let st: Vec<Point> = (0..*sites)
                            .map(|_| [rng.gen::<f64>() * field[0], rng.gen::<f64>() * field[1]])
                            .collect();
                        let src = (0..*sources)
                            .map(|_| {
                                let c = st[rng.gen_range(0..st.len())];
                                let rho = r * rng.gen::<f64>().sqrt();
                                let theta = std::f64::consts::TAU * rng.gen::<f64>();
                                [
                                    (c[0] + rho * theta.cos()).clamp(0.0, field[0]),
                                    (c[1] + rho * theta.sin()).clamp(0.0, field[1]),
                                ]
                            })
                            .collect();
                        (src, st)
                    }
                };
                Ok(UtilityInstance::Coverage2d {
                    sources: source_points,
                    sites: site_points,
                    site_of_strategy: agent_sites.iter().flat_map(|&s| 0..s).collect(),
                    depot: Some(depot.unwrap_or([field[0] / 2.0, field[1] / 2.0])),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedSequence {
    pub name: String,
    pub order: Vec<usize>,
}

/// A solver selector as written in scenario files and on the command line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SolverSpec {
    Distributed,
    Centralized,
    BruteForce,
    /// Sequential greedy over every scenario route.
    SequentialAll,
    Sequential(String),
}

impl FromStr for SolverSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ds" => SolverSpec::Distributed,
            "central" => SolverSpec::Centralized,
            "brute" => SolverSpec::BruteForce,
            "seq" => SolverSpec::SequentialAll,
            other => match other.strip_prefix("seq:") {
                Some(name) if !name.is_empty() => SolverSpec::Sequential(name.to_string()),
                _ => return Err(Error::Config(format!("unknown solver {other:?}"))),
            },
        })
    }
}

impl TryFrom<String> for SolverSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SolverSpec> for String {
    fn from(s: SolverSpec) -> String {
        match s {
            SolverSpec::Distributed => "ds".into(),
            SolverSpec::Centralized => "central".into(),
            SolverSpec::BruteForce => "brute".into(),
            SolverSpec::SequentialAll => "seq".into(),
            SolverSpec::Sequential(name) => format!("seq:{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub master_seed: u64,
    pub trials: usize,
    pub utility: UtilitySource,
    pub agents: AgentPartition,
    pub graph: GraphSpec,
    pub horizon: usize,
    pub samples: Vec<usize>,
    #[serde(default = "default_consensus")]
    pub consensus: ConsensusRounds,
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub sequences: Vec<NamedSequence>,
}

fn default_consensus() -> ConsensusRounds {
    ConsensusRounds::One
}

impl Scenario {
    /// Reads a scenario; relative instance paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut scenario: Scenario = serde_json::from_str(&text)?;
        if let UtilitySource::File { path: inner } = &mut scenario.utility {
            if inner.is_relative() {
                if let Some(dir) = path.parent() {
                    *inner = dir.join(&*inner);
                }
            }
        }
        Ok(scenario)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Stable 64-bit digest of the serialized scenario.
    pub fn digest(&self) -> Result<u64> {
        let text = serde_json::to_string(self)?;
        Ok(text.bytes().fold(0, |h, b| fold(h, b as u64)))
    }

    pub fn graph(&self) -> Result<CommGraph> {
        self.graph.build(self.agents.agents())
    }

    pub fn round_config(&self, seed: u64) -> RoundConfig {
        let agents = self.agents.agents();
        let samples = if self.samples.len() == 1 {
            vec![self.samples[0]; agents]
        } else {
            self.samples.clone()
        };
        RoundConfig {
            horizon: self.horizon,
            samples,
            consensus: self.consensus,
            seed,
        }
    }

    pub fn routes(&self, g: &CommGraph) -> Result<Vec<(String, VisitSequence)>> {
        self.sequences
            .iter()
            .map(|s| Ok((s.name.clone(), VisitSequence::new(s.order.clone(), g)?)))
            .collect()
    }

    /// Checks dimensions across utility, partition, graph, and routes.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("scenario needs at least one trial".into()));
        }
        let g = self.graph()?;
        self.round_config(0).validate(&self.agents)?;
        let routes = self.routes(&g)?;
        let n = match &self.utility {
            UtilitySource::RandomField { agent_sites, .. } => agent_sites.iter().sum(),
            other => other.instance(0)?.ground_size(),
        };
        if n != self.agents.ground_size() {
            return Err(Error::Config(format!(
                "utility has {n} strategies but agent blocks cover {}",
                self.agents.ground_size()
            )));
        }
        if let UtilitySource::RandomField { agent_sites, .. } = &self.utility {
            if *agent_sites != self.agents.block_sizes() {
                return Err(Error::Config(
                    "agent_sites must equal the agent block sizes".into(),
                ));
            }
        }
        for s in &self.solvers {
            if let SolverSpec::Sequential(name) = s {
                if !routes.iter().any(|(n, _)| n == name) {
                    return Err(Error::Config(format!("no route named {name:?}")));
                }
            }
        }
        Ok(())
    }

    fn expanded_solvers(&self) -> Vec<(String, SolverSpec)> {
        let mut out = Vec::new();
        for s in &self.solvers {
            match s {
                SolverSpec::SequentialAll => {
                    for seq in &self.sequences {
                        out.push((
                            format!("seq:{}", seq.name),
                            SolverSpec::Sequential(seq.name.clone()),
                        ));
                    }
                }
                other => out.push((String::from(other.clone()), other.clone())),
            }
        }
        out
    }
}

/// Budgets of the five-agent field scenario.
pub const FIELD_BUDGETS: [usize; 5] = [5, 2, 1, 1, 1];
/// Sites available to each agent: nested prefixes of the ten sites.
pub const FIELD_AGENT_SITES: [usize; 5] = [10, 5, 3, 2, 2];

/// Five agents on a ring sharing ten sites over a unit field with 2000
/// sources; `T = 50`, `K = 1000`, 50 trials, distributed solver and six
/// sequential-greedy routes.
pub fn generate_paper_scenario(master_seed: u64) -> Scenario {
    let routes: [(&str, [usize; 5]); 6] = [
        ("a", [0, 1, 2, 3, 4]),
        ("b", [1, 2, 3, 4, 0]),
        ("c", [2, 3, 4, 0, 1]),
        ("d", [2, 1, 0, 4, 3]),
        ("e", [3, 2, 1, 0, 4]),
        ("f", [4, 3, 2, 1, 0]),
    ];
    Scenario {
        id: "field".into(),
        master_seed,
        trials: 50,
        utility: UtilitySource::RandomField {
            sources: 2000,
            sites: 10,
            field: [1.0, 1.0],
            agent_sites: FIELD_AGENT_SITES.to_vec(),
            depot: None,
            cluster_radius: None,
        },
        agents: AgentPartition::new(&FIELD_AGENT_SITES, &FIELD_BUDGETS)
            .expect("valid constant partition"),
        graph: GraphSpec::Ring,
        horizon: 50,
        samples: vec![1000],
        consensus: ConsensusRounds::One,
        solvers: vec![SolverSpec::Distributed, SolverSpec::SequentialAll],
        sequences: routes
            .iter()
            .map(|(name, order)| NamedSequence {
                name: name.to_string(),
                order: order.to_vec(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record wall-clock time; off keeps result files byte-identical on replay.
    pub timing: bool,
    /// Keep per-round summaries for the trace file.
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: usize,
    pub block_sums: Vec<f64>,
    pub max_disagreement: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario_id: String,
    pub scenario_digest: u64,
    pub solver: String,
    pub trial: usize,
    pub seed: u64,
    pub value: Option<f64>,
    pub sites_covered: Option<usize>,
    pub oracle_calls: u64,
    pub wall_ms: u64,
    pub bound_ok: Option<bool>,
    pub error: Option<String>,
    /// Process exit code of the error, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_code: Option<i32>,
    pub selected: Vec<usize>,
    /// Final fractional point for the continuous solvers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xbar: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundSummary>,
}

/// Utility of one trial, shared by every solver of that trial.
pub fn trial_utility(scenario: &Scenario, seed: u64) -> Result<Utility> {
    let instance = scenario.utility.instance(seed)?;
    if instance.ground_size() != scenario.agents.ground_size() {
        return Err(Error::Config(format!(
            "utility has {} strategies but agent blocks cover {}",
            instance.ground_size(),
            scenario.agents.ground_size()
        )));
    }
    instance.build()
}

/// `f(R*)` and total curvature when both are affordable.
struct Reference {
    f_star: f64,
    curvature: f64,
}

fn reference(f: &ValueOracle, partition: &AgentPartition) -> Option<Reference> {
    if partition.ground_size() > DEFAULT_MAX_N {
        return None;
    }
    let scratch = f.fresh();
    let (_, f_star) = brute_force_opt(&scratch, partition).ok()?;
    let curvature = match Exact::new(&scratch).total_curvature() {
        Ok(c) => c,
        Err(Error::DegenerateCurvature) => 1.0,
        Err(_) => return None,
    };
    Some(Reference { f_star, curvature })
}

fn summarize(trace: &Trace, partition: &AgentPartition, f: &ValueOracle) -> Vec<RoundSummary> {
    let exact = (partition.ground_size() <= TRACE_EXACT_MAX_N).then(|| f.fresh());
    let kappa = partition.total_budget() as f64;
    trace
        .rounds
        .iter()
        .map(|r| RoundSummary {
            round: r.round,
            block_sums: (0..partition.agents())
                .map(|i| partition.block_sum(&r.xbar, i))
                .collect(),
            max_disagreement: r
                .locals
                .iter()
                .map(|l| (r.xbar.total() - l.total()) / kappa)
                .fold(0.0, f64::max),
            f_exact: exact
                .as_ref()
                .and_then(|o| Exact::new(o).multilinear(&r.xbar).ok()),
        })
        .collect()
}

struct Outcome {
    selected: StrategySet,
    xbar: Option<MembershipVector>,
    rounds: Vec<RoundSummary>,
    calls: u64,
}

fn run_solver(
    spec: &SolverSpec,
    scenario: &Scenario,
    f: &ValueOracle,
    g: &CommGraph,
    seed: u64,
    opts: RunOptions,
) -> Result<Outcome> {
    let partition = &scenario.agents;
    let cfg = scenario.round_config(seed);
    let outcome = match spec {
        SolverSpec::Distributed => {
            let run = run_distributed_cg(f, partition, g, &cfg)?;
            let audit = audit_trace(&run.trace, partition, g.diameter(), cfg.horizon);
            if !audit.ok() {
                return Err(Error::Invariant(audit.violations.join("; ")));
            }
            let calls = f.calls();
            Outcome {
                selected: round_all(&run.xbar, partition, seed, 0)?,
                rounds: if opts.trace {
                    summarize(&run.trace, partition, f)
                } else {
                    Vec::new()
                },
                xbar: Some(run.xbar),
                calls,
            }
        }
        SolverSpec::Centralized => {
            let run = centralized_cg(f, partition, &cfg)?;
            Outcome {
                selected: run.rounded,
                xbar: Some(run.x),
                rounds: Vec::new(),
                calls: f.calls(),
            }
        }
        SolverSpec::BruteForce => {
            let (selected, _) = brute_force_opt(f, partition)?;
            Outcome {
                selected,
                xbar: None,
                rounds: Vec::new(),
                calls: f.calls(),
            }
        }
        SolverSpec::Sequential(name) => {
            let route = scenario
                .routes(g)?
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|(_, r)| r)
                .ok_or_else(|| Error::Config(format!("no route named {name:?}")))?;
            Outcome {
                selected: sequential_greedy(f, partition, &route),
                xbar: None,
                rounds: Vec::new(),
                calls: f.calls(),
            }
        }
        SolverSpec::SequentialAll => return Err(Error::Config("unexpanded solver group".into())),
    };
    if !partition.is_independent(&outcome.selected) {
        return Err(Error::Invariant(format!(
            "solver {spec:?} returned a dependent set"
        )));
    }
    Ok(outcome)
}

fn bound_holds(
    spec: &SolverSpec,
    reference: &Reference,
    scenario: &Scenario,
    g: &CommGraph,
    f: &ValueOracle,
    outcome: &Outcome,
    value: f64,
) -> Option<bool> {
    const TOL: f64 = 1e-9;
    let kappa = scenario.agents.total_budget();
    let c = reference.curvature;
    let continuous = |factor: f64| -> Option<bool> {
        let fx = Exact::new(&f.fresh())
            .multilinear(outcome.xbar.as_ref()?)
            .ok()?;
        Some(fx + TOL >= factor * reference.f_star)
    };
    match spec {
        SolverSpec::Distributed => {
            let d = g.diameter();
            if scenario.consensus.resolve(g) >= d {
                continuous(agreement_factor(c, kappa, scenario.horizon))
            } else {
                continuous(distributed_factor(c, kappa, d, scenario.horizon))
            }
        }
        SolverSpec::Centralized => continuous(agreement_factor(c, kappa, scenario.horizon)),
        SolverSpec::BruteForce => Some((value - reference.f_star).abs() <= TOL),
        SolverSpec::Sequential(_) => Some(value + TOL >= sequential_factor(c) * reference.f_star),
        SolverSpec::SequentialAll => None,
    }
}

fn run_trial(
    scenario: &Scenario,
    digest: u64,
    trial: usize,
    opts: RunOptions,
) -> Vec<ResultRecord> {
    let seed = trial_seed(scenario.master_seed, trial as u64);
    let solvers = scenario.expanded_solvers();
    let blank = |solver: &str| ResultRecord {
        scenario_id: scenario.id.clone(),
        scenario_digest: digest,
        solver: solver.to_string(),
        trial,
        seed,
        value: None,
        sites_covered: None,
        oracle_calls: 0,
        wall_ms: 0,
        bound_ok: None,
        error: None,
        error_code: None,
        selected: Vec::new(),
        xbar: None,
        rounds: Vec::new(),
    };
    let setup = trial_utility(scenario, seed).and_then(|u| Ok((u, scenario.graph()?)));
    let (utility, g) = match setup {
        Ok(v) => v,
        Err(e) => {
            return solvers
                .iter()
                .map(|(name, _)| ResultRecord {
                    error: Some(e.to_string()),
                    error_code: Some(e.exit_code()),
                    ..blank(name)
                })
                .collect()
        }
    };
    let instance = utility.instance();
    let base = match instance.build() {
        Ok(u) => ValueOracle::new(u),
        Err(e) => {
            return solvers
                .iter()
                .map(|(name, _)| ResultRecord {
                    error: Some(e.to_string()),
                    error_code: Some(e.exit_code()),
                    ..blank(name)
                })
                .collect()
        }
    };
    let reference = reference(&base, &scenario.agents);
    solvers
        .iter()
        .map(|(name, spec)| {
            let f = base.fresh();
            let start = Instant::now();
            let result = run_solver(spec, scenario, &f, &g, seed, opts);
            let wall_ms = if opts.timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            match result {
                Ok(outcome) => {
                    let value = base.fresh().value(&outcome.selected);
                    ResultRecord {
                        value: Some(value),
                        sites_covered: utility.distinct_sites(&outcome.selected),
                        oracle_calls: outcome.calls,
                        wall_ms,
                        bound_ok: reference.as_ref().and_then(|r| {
                            bound_holds(spec, r, scenario, &g, &base, &outcome, value)
                        }),
                        selected: outcome.selected.to_vec(),
                        xbar: outcome.xbar.map(MembershipVector::into_vec),
                        rounds: outcome.rounds,
                        ..blank(name)
                    }
                }
                Err(e) => ResultRecord {
                    error: Some(e.to_string()),
                    error_code: Some(e.exit_code()),
                    oracle_calls: f.calls(),
                    wall_ms,
                    ..blank(name)
                },
            }
        })
        .collect()
}

/// Runs every solver on every trial. Trials run in parallel; records come
/// back in (trial, solver) order. Solver failures become error records.
pub fn run_experiment(scenario: &Scenario, opts: RunOptions) -> Result<Vec<ResultRecord>> {
    scenario.validate()?;
    let digest = scenario.digest()?;
    let per_trial: Vec<Vec<ResultRecord>> = (0..scenario.trials)
        .into_par_iter()
        .map(|t| run_trial(scenario, digest, t, opts))
        .collect();
    Ok(per_trial.into_iter().flatten().collect())
}

pub const CSV_HEADER: &str =
    "scenario_id,solver,seed,value,sites_covered,oracle_calls,wall_ms,bound_ok,trial,scenario_digest,error";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn records_to_csv(records: &[ResultRecord]) -> String {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:016x},{}",
            csv_field(&r.scenario_id),
            csv_field(&r.solver),
            r.seed,
            opt(r.value.map(|v| v.to_string())),
            opt(r.sites_covered.map(|v| v.to_string())),
            r.oracle_calls,
            r.wall_ms,
            opt(r.bound_ok.map(|v| v.to_string())),
            r.trial,
            r.scenario_digest,
            csv_field(r.error.as_deref().unwrap_or("")),
        );
    }
    out
}

pub fn write_results(path: &Path, records: &[ResultRecord]) -> Result<()> {
    std::fs::write(path, records_to_csv(records))?;
    Ok(())
}

/// Full records, including selections, final points, and round summaries.
pub fn write_trace(path: &Path, records: &[ResultRecord]) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(records)? + "\n")?;
    Ok(())
}

/// Per-solver means over successful records, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub solver: String,
    pub runs: usize,
    pub errors: usize,
    /// `None` when every run failed.
    pub mean_value: Option<f64>,
    pub mean_sites: Option<f64>,
}

pub fn summarize_records(records: &[ResultRecord]) -> Vec<SolverSummary> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.solver.as_str()) {
            names.push(&r.solver);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let all: Vec<&ResultRecord> = records.iter().filter(|r| r.solver == name).collect();
            let ok: Vec<&ResultRecord> =
                all.iter().copied().filter(|r| r.error.is_none()).collect();
            let m = ok.len().max(1) as f64;
            let sites: Option<Vec<usize>> = ok.iter().map(|r| r.sites_covered).collect();
            SolverSummary {
                solver: name.to_string(),
                runs: all.len(),
                errors: all.len() - ok.len(),
                mean_value: (!ok.is_empty())
                    .then(|| ok.iter().filter_map(|r| r.value).sum::<f64>() / m),
                mean_sites: sites
                    .filter(|s| !s.is_empty())
                    .map(|s| s.iter().sum::<usize>() as f64 / m),
            }
        })
        .collect()
}

/// One continuous-solver record checked against its guarantees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub trial: usize,
    pub solver: String,
    pub seed: u64,
    pub f_star: f64,
    pub curvature: f64,
    pub factor: f64,
    /// Exact multilinear value at the final fractional point.
    pub f_xbar: f64,
    pub fractional_ok: bool,
    pub fractional_margin: f64,
    pub rounding_mean: f64,
    pub rounding_se: f64,
    /// Mean rounded value (plus three standard errors) against the factor.
    pub rounded_ok: bool,
    pub per_coordinate_failure: f64,
    pub aggregate_success: f64,
    pub product_success: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
    pub skipped: Vec<String>,
}

impl BoundReport {
    pub fn passed(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.fractional_ok && c.rounded_ok)
            .count()
    }
}

/// Checks each continuous-solver record: `F(x̄)` against the approximation
/// factor times `f(R*)`, and the mean of `rounding_trials` roundings against
/// the same target. Records that need unaffordable enumeration are skipped
/// with a notice.
pub fn verify_bounds(
    records: &[ResultRecord],
    scenario: &Scenario,
    rounding_trials: usize,
) -> Result<BoundReport> {
    let mut report = BoundReport::default();
    let g = scenario.graph()?;
    let kappa = scenario.agents.total_budget();
    let n = scenario.agents.ground_size();
    let cfg = scenario.round_config(0);
    for r in records {
        let Some(x) = &r.xbar else { continue };
        let label = format!("trial {} solver {}", r.trial, r.solver);
        if r.error.is_some() {
            report.skipped.push(format!("{label}: solver failed"));
            continue;
        }
        if n > DEFAULT_MAX_N {
            report.skipped.push(format!(
                "{label}: {n} strategies exceed the exact limit {DEFAULT_MAX_N}"
            ));
            continue;
        }
        let f = ValueOracle::new(trial_utility(scenario, r.seed)?);
        let reference = match brute_force_opt(&f, &scenario.agents) {
            Ok((_, v)) => v,
            Err(e @ Error::GuardExceeded { .. }) => {
                report.skipped.push(format!("{label}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let curvature = match Exact::new(&f).total_curvature() {
            Ok(c) => c,
            Err(Error::DegenerateCurvature) => 1.0,
            Err(e) => return Err(e),
        };
        let full_agreement =
            r.solver == "central" || scenario.consensus.resolve(&g) >= g.diameter();
        let factor = if full_agreement {
            agreement_factor(curvature, kappa, scenario.horizon)
        } else {
            distributed_factor(curvature, kappa, g.diameter(), scenario.horizon)
        };
        let x = MembershipVector::new(x.clone())?;
        let target = factor * reference;
        let rounding = rounding_expectation_check(
            &f,
            &x,
            &scenario.agents,
            rounding_trials,
            StreamKey::new(r.seed, 0, 0, Phase::Verify).id(),
        )?;
        let k_min = cfg.samples.iter().copied().min().unwrap_or(0);
        let HoeffdingReport {
            per_coordinate_failure,
            aggregate_success,
            ..
        } = hoeffding_confidence(k_min, scenario.horizon, n, reference);
        report.checks.push(BoundCheck {
            trial: r.trial,
            solver: r.solver.clone(),
            seed: r.seed,
            f_star: reference,
            curvature,
            factor,
            f_xbar: rounding.exact,
            fractional_ok: rounding.exact + 1e-9 >= target,
            fractional_margin: rounding.exact - target,
            rounding_mean: rounding.estimate,
            rounding_se: rounding.std_error,
            rounded_ok: rounding.estimate + 3.0 * rounding.std_error + 1e-9 >= target,
            per_coordinate_failure,
            aggregate_success,
            product_success: product_success(&scenario.agents, &cfg.samples, scenario.horizon),
        });
    }
    Ok(report)
}
