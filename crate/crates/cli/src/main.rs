//! `techmap`: map AIGER networks onto a genlib library, check and score the
//! results, and tune the mapper's heuristic genome.
//!
//! Exit codes are listed in [`exit`].

mod commands;
mod exit;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

#[derive(Parser, Debug)]
#[command(name = "techmap", version, about = "Standard-cell technology mapping for and-inverter graphs")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map one AIGER file and write the netlist as BLIF.
    Map(MapCmd),
    /// Check a BLIF netlist against an AIGER file.
    Cec(CecCmd),
    /// Map every AIGER file of a directory and tabulate the results.
    Suite(SuiteCmd),
    /// Compare a candidate run report against a baseline report.
    Score(ScoreCmd),
    /// Tune the heuristic genome on a benchmark suite.
    Evolve(EvolveCmd),
    /// Print size and depth of an AIGER file.
    Stats(StatsCmd),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rounds {
    pub delay: usize,
    pub flow: usize,
    pub exact: usize,
}

fn parse_rounds(s: &str) -> Result<Rounds, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected three counts: delay,flow,exact".into());
    }
    let n = |p: &str| p.parse::<usize>().map_err(|e| format!("{p}: {e}"));
    Ok(Rounds { delay: n(parts[0])?, flow: n(parts[1])?, exact: n(parts[2])? })
}

/// Library and mapper settings shared by `map` and `suite`.
#[derive(Args, Debug, Clone)]
pub struct MappingArgs {
    /// Genlib cell library; a built-in library when omitted.
    #[arg(long)]
    pub genlib: Option<PathBuf>,
    /// Maximum cut size.
    #[arg(long, default_value_t = 4)]
    pub cut_size: usize,
    /// Cuts kept per node.
    #[arg(long, default_value_t = 16)]
    pub cut_limit: usize,
    /// Round counts as delay,flow,exact.
    #[arg(long, value_parser = parse_rounds, default_value = "1,2,2")]
    pub rounds: Rounds,
    /// Arrival-time weight per delay and flow round, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha_schedule: Option<Vec<f64>>,
    /// Heuristic genome (JSON); the default genome when omitted.
    #[arg(long)]
    pub genome: Option<PathBuf>,
    /// Lower bound on the required-time target ("inf" drops timing constraints).
    #[arg(long)]
    pub target_delay: Option<f64>,
}

/// Equivalence checking settings.
#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Largest input count checked on every input pattern.
    #[arg(long, default_value_t = 16)]
    pub exhaustive_limit: usize,
    /// Random patterns for larger circuits.
    #[arg(long, default_value_t = 1 << 16)]
    pub vectors: u64,
    /// Seed for random patterns.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// External checker for circuits above the exhaustive limit; `{aig}` and
    /// `{blif}` are replaced by file paths, exit 0 means equivalent.
    #[arg(long)]
    pub external: Option<String>,
}

#[derive(Args, Debug)]
pub struct MapCmd {
    pub aiger: PathBuf,
    /// BLIF output file; stdout when omitted and `--json` is not set.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write the JSON report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Skip the equivalence check of the result.
    #[arg(long)]
    pub no_check: bool,
    /// Print the JSON report on stdout.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub mapping: MappingArgs,
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Args, Debug)]
pub struct CecCmd {
    pub aiger: PathBuf,
    pub blif: PathBuf,
    /// Genlib library the netlist's gates come from.
    #[arg(long)]
    pub genlib: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Args, Debug)]
pub struct SuiteCmd {
    /// Directory searched recursively for *.aig and *.aag files.
    pub suite_dir: PathBuf,
    /// Write the run report (JSON) to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Baseline run report to compare against.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    /// Area weight of the overall score.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Record mapper runtimes in the JSON report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub mapping: MappingArgs,
    #[command(flatten)]
    pub check: CheckArgs,
}

#[derive(Args, Debug)]
pub struct ScoreCmd {
    /// Benchmark directory; restricts scoring to the circuits found there.
    pub suite_dir: PathBuf,
    pub baseline_report: PathBuf,
    pub candidate_report: PathBuf,
    /// Area weight of the overall score.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct EvolveCmd {
    /// TOML configuration.
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured worker count.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Overrides the configured number of outer iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Write the full evolution report (JSON) here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the best genome (JSON) here.
    #[arg(long)]
    pub genome_out: Option<PathBuf>,
    /// Print the evolution report on stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct StatsCmd {
    pub aiger: PathBuf,
    #[arg(long)]
    pub json: bool,
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => LevelFilter::Error,
        (false, 0) => LevelFilter::Warn,
        (false, 1) => LevelFilter::Info,
        (false, 2) => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    init_logging(cli.verbose, cli.quiet);
    let outcome = match cli.command {
        Command::Map(c) => commands::map(c),
        Command::Cec(c) => commands::cec(c),
        Command::Suite(c) => commands::suite(c),
        Command::Score(c) => commands::score(c),
        Command::Evolve(c) => commands::evolve(c),
        Command::Stats(c) => commands::stats(c),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("techmap: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
