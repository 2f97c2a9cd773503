use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use utilcache::harness::{self, offline, validate, ExperimentSpec};
use utilcache::topology::load_network;
use utilcache::workload::{generate, write_trace, ZipfCatalog};

#[derive(Parser)]
#[command(name = "lcmsim", version, about = "Link-cost-aware cache network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single-point spec and print one CSV row per strategy and seed
    Run {
        spec: PathBuf,
        #[arg(long)]
        paper_scale: bool,
        /// Also write <prefix>.csv and <prefix>.json
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the full parameter sweep and write CSV plus a JSON summary
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        paper_scale: bool,
        /// Output prefix; defaults to the spec's `output` key, then $LCMSIM_OUTPUT_DIR/results, then ./results
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Greedy placement for a topology and demand file
    Offline { topology: PathBuf, demand: PathBuf },
    /// Run the built-in invariant suites
    Validate {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Print the request trace of a spec's first point as CSV
    TraceDump {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paper_scale: bool,
    },
}

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn load_spec(path: &Path, paper_scale: bool) -> Result<ExperimentSpec> {
    let spec = ExperimentSpec::load(path)?;
    Ok(if paper_scale { spec.paper_scale() } else { spec })
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { spec, paper_scale, output } => {
            let spec = load_spec(&spec, paper_scale)?;
            if spec.zipf_alpha.len() * spec.cache_ratio.len() != 1 {
                return Err("`run` takes one zipf_alpha and one cache_ratio; use `sweep` for several".into());
            }
            let rows = harness::run_experiment(&spec)?;
            harness::write_csv(io::stdout().lock(), &rows)?;
            if let Some(prefix) = output {
                harness::write_outputs(&prefix, &rows)?;
            }
        }
        Command::Sweep { spec, paper_scale, output } => {
            let spec = load_spec(&spec, paper_scale)?;
            let prefix = output.or_else(|| harness::output_prefix(&spec)).unwrap_or_else(|| PathBuf::from("results"));
            eprintln!("{} runs", spec.point_count() * spec.strategies.len() * spec.seeds.len());
            let rows = harness::run_experiment(&spec)?;
            let (csv, json) = harness::write_outputs(&prefix, &rows)?;
            let mut out = io::stdout().lock();
            writeln!(out, "{:<10} {:<6} {:>6} {:>8} {:>14} {:>12}", "strategy", "policy", "alpha", "ratio", "gain", "std")?;
            for s in harness::summarize(&rows) {
                writeln!(
                    out,
                    "{:<10} {:<6} {:>6} {:>8} {:>14.1} {:>12.1}",
                    s.strategy, s.policy, s.alpha, s.ratio, s.mean_caching_gain, s.std_caching_gain
                )?;
            }
            writeln!(out, "wrote {} and {}", csv.display(), json.display())?;
        }
        Command::Offline { topology, demand } => {
            let net = load_network(&std::fs::read_to_string(&topology)?)?;
            let demand = offline::parse_demand(&std::fs::read_to_string(&demand)?, &net)?;
            let result = offline::solve(&net, &demand)?;
            print!("{}", offline::format_result(&result));
        }
        Command::Validate { seed } => {
            let report = validate::validate_with(&validate::ValidateOptions { seed, ..Default::default() });
            print!("{report}");
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::TraceDump { spec, seed, paper_scale } => {
            let spec = load_spec(&spec, paper_scale)?;
            spec.validate()?;
            let net = harness::load_topology(&spec.topology)?;
            let catalog = ZipfCatalog::new(spec.catalog_size, spec.zipf_alpha[0])?;
            let requesters = net.requesters(spec.catalog_size)?;
            let seed = seed.unwrap_or(spec.seeds[0]);
            let stream = generate(&catalog, &requesters, spec.rate, spec.warmup + spec.measure, seed)?;
            write_trace(io::stdout().lock(), stream)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
