use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dcg_core::distributed::ConsensusRounds;
use dcg_core::experiment::{
    generate_paper_scenario, run_experiment, summarize_records, verify_bounds, write_results,
    write_trace, RunOptions, Scenario, SolverSpec,
};

#[derive(Parser)]
#[command(
    name = "dcg",
    version,
    about = "Distributed continuous greedy simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver of a scenario over its trials and write a results CSV.
    Run(RunArgs),
    /// Run a scenario and check the continuous solvers against their guarantees.
    Verify(VerifyArgs),
    /// Write the five-agent field scenario.
    GenScenario(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        matches!(self, Switch::On)
    }
}

#[derive(Args)]
struct Overrides {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Solver to run (ds, central, brute, seq, seq:NAME); repeatable.
    #[arg(long = "solver")]
    solvers: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of ascent steps.
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Samples per agent per step.
    #[arg(long)]
    samples: Option<usize>,
    /// Max-merge repetitions per step: 1 or diam.
    #[arg(long = "consensus-rounds")]
    consensus_rounds: Option<String>,
}

impl Overrides {
    fn load(&self) -> anyhow::Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)
            .with_context(|| format!("loading scenario {}", self.scenario.display()))?;
        if !self.solvers.is_empty() {
            s.solvers = self
                .solvers
                .iter()
                .map(|n| n.parse())
                .collect::<Result<Vec<SolverSpec>, _>>()?;
        }
        if let Some(t) = self.trials {
            s.trials = t;
        }
        if let Some(seed) = self.seed {
            s.master_seed = seed;
        }
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        if let Some(k) = self.samples {
            s.samples = vec![k];
        }
        if let Some(r) = &self.consensus_rounds {
            s.consensus = r.parse::<ConsensusRounds>()?;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: Overrides,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-record detail to OUT with a .trace.json extension.
    #[arg(long, value_enum, default_value = "off")]
    trace: Switch,
    /// Record wall-clock milliseconds; off keeps replays byte-identical.
    #[arg(long, value_enum, default_value = "off")]
    timing: Switch,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    scenario: Overrides,
    /// Roundings per record for the rounded-value check.
    #[arg(long, default_value_t = 5000)]
    rounding_trials: usize,
    /// Bound report (JSON); a summary is always printed.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "T")]
    horizon: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn trace_path(out: &Path) -> PathBuf {
    out.with_extension("trace.json")
}

/// Returns the most severe exit code among failed records (0 when none failed).
fn run(args: RunArgs) -> anyhow::Result<u8> {
    let scenario = args.scenario.load()?;
    let opts = RunOptions {
        timing: args.timing.on(),
        trace: args.trace.on(),
    };
    let records = run_experiment(&scenario, opts)?;
    match &args.out {
        Some(path) => {
            write_results(path, &records)?;
            if opts.trace {
                write_trace(&trace_path(path), &records)?;
            }
        }
        None => {
            if opts.trace {
                bail!("--trace on needs --out");
            }
            print!("{}", dcg_core::experiment::records_to_csv(&records));
        }
    }
    for s in summarize_records(&records) {
        let value = s.mean_value.map_or("-".to_string(), |v| format!("{v:.6}"));
        let sites = s
            .mean_sites
            .map(|m| format!(" sites={m:.3}"))
            .unwrap_or_default();
        eprintln!(
            "{:<10} runs={} errors={} value={value}{sites}",
            s.solver, s.runs, s.errors
        );
    }
    let worst = records
        .iter()
        .filter_map(|r| r.error_code)
        .max()
        .unwrap_or(0);
    Ok(worst as u8)
}

fn verify(args: VerifyArgs) -> anyhow::Result<()> {
    let scenario = args.scenario.load()?;
    let records = run_experiment(&scenario, RunOptions::default())?;
    let report = verify_bounds(&records, &scenario, args.rounding_trials)?;
    for c in &report.checks {
        println!(
            "trial={} solver={} f*={:.6} c={:.4} factor={:.4} F(x)={:.6} fractional={} rounded_mean={:.6}±{:.6} rounded={} hoeffding_success>={:.4}",
            c.trial,
            c.solver,
            c.f_star,
            c.curvature,
            c.factor,
            c.f_xbar,
            if c.fractional_ok { "pass" } else { "FAIL" },
            c.rounding_mean,
            c.rounding_se,
            if c.rounded_ok { "pass" } else { "FAIL" },
            c.aggregate_success,
        );
    }
    for s in &report.skipped {
        println!("skipped: {s}");
    }
    println!("{}/{} checks passed", report.passed(), report.checks.len());
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(())
}

fn gen_scenario(args: GenArgs) -> anyhow::Result<()> {
    let mut s = generate_paper_scenario(args.seed);
    if let Some(t) = args.trials {
        s.trials = t;
    }
    if let Some(h) = args.horizon {
        s.horizon = h;
    }
    if let Some(k) = args.samples {
        s.samples = vec![k];
    }
    s.validate()?;
    s.save(&args.out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Verify(a) => verify(a).map(|()| 0),
        Command::GenScenario(a) => gen_scenario(a).map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .chain()
                .find_map(|c| c.downcast_ref::<dcg_core::Error>())
                .map_or(1, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
