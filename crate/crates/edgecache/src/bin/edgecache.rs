//! Thin CLI around the simulation harness.
//!
//! `edgecache run --scenario ins1.1 --policies rh1,myopic,lru-m,lb,offline
//!  --reps 100 --seed 42 --out results.csv [--json results.json]
//!  [--solver exact|flow|greedy]`
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 solver cap
//! exceeded.

use clap::{Parser, Subcommand, ValueEnum};

use edgecache::harness::{run_experiment, ScenarioSpec};
use edgecache::policies::{PolicySpec, SolverMode};

#[derive(Parser)]
#[command(name = "edgecache", version, about = "Collaborative edge-cache simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SolverArg {
    Exact,
    Flow,
    Greedy,
}

impl From<SolverArg> for SolverMode {
    fn from(value: SolverArg) -> SolverMode {
        match value {
            SolverArg::Exact => SolverMode::Exact,
            SolverArg::Flow => SolverMode::SingleCopyFlow,
            SolverArg::Greedy => SolverMode::Greedy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write the per-policy report.
    Run {
        /// Preset name (ins1.1 .. ins7.4) or path to a scenario JSON file.
        #[arg(long)]
        scenario: String,
        /// Comma-separated policy list, e.g. rh1,rh2,myopic,onestep,lru-s,lru-m,greedy1,lb,offline.
        #[arg(long, default_value = "rh1,myopic,onestep,lru-s,lru-m,lb,offline")]
        policies: String,
        /// Replication count override.
        #[arg(long)]
        reps: Option<u32>,
        /// Base seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path.
        #[arg(long)]
        out: String,
        /// Optional JSON report path.
        #[arg(long)]
        json: Option<String>,
        /// Solver override for the forecast-driven policies.
        #[arg(long)]
        solver: Option<SolverArg>,
    },
}

fn main() {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, policies, reps, seed, out, json, solver } => {
            if let Err(err) = run(&scenario, &policies, reps, seed, &out, json.as_deref(), solver) {
                eprintln!("error: {err}");
                std::process::exit(err.exit_code());
            }
        }
    }
}

fn run(
    scenario: &str,
    policies: &str,
    reps: Option<u32>,
    seed: Option<u64>,
    out: &str,
    json: Option<&str>,
    solver: Option<SolverArg>,
) -> edgecache::Result<()> {
    let mut spec = ScenarioSpec::load(scenario)?;
    if let Some(reps) = reps {
        spec.replications = reps;
    }
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    spec.validate()?;

    let mut parsed: Vec<PolicySpec> = Vec::new();
    for token in policies.split(',').filter(|t| !t.trim().is_empty()) {
        let mut policy = PolicySpec::parse(token)?;
        if let Some(mode) = solver {
            if policy.is_forecast_driven() {
                policy.solver = Some(mode.into());
            }
        }
        parsed.push(policy);
    }
    if parsed.is_empty() {
        return Err(edgecache::Error::Validation("no policies requested".into()));
    }

    let report = run_experiment(&spec, &parsed)?;
    std::fs::write(out, report.to_csv())?;
    if let Some(path) = json {
        std::fs::write(path, report.to_json())?;
    }
    print!("{}", report.to_table());
    println!("wrote {out}{}", json.map(|j| format!(" and {j}")).unwrap_or_default());
    Ok(())
}
