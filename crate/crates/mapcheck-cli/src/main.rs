//! Command-line front end: parse models, run any algorithm, launch or join
//! distributed runs, and emit CSV benchmark data.
//!
//! Exit codes: 0 no cycle found (or successful reachability), 1 accepting
//! cycle found, 2 usage or configuration error, 3 runtime fault. Besides
//! the human-readable report, every check prints one machine-readable line:
//!
//! ```text
//! RESULT=CYCLE STATES=4 ITER=2 WITNESS=00000002
//! RESULT=NO_CYCLE STATES=3 ITER=1
//! RESULT=REACH STATES=4 ITER=1 TRANSITIONS=4
//! ```

mod bench;
mod model_spec;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mapcheck_core::baselines::{self, SearchError};
use mapcheck_core::gcl;
use mapcheck_dist::tcp::{parse_hosts, run_tcp, TcpConfig, TcpRunOptions};
use mapcheck_dist::{run_sim, DistError, Mode, SimOptions, SimPolicy};

use model_spec::{load_model, LoadedModel};
use report::{print_search_report, ExitStatus, Report};

pub(crate) const EXIT_NO_CYCLE: u8 = 0;
pub(crate) const EXIT_CYCLE: u8 = 1;
pub(crate) const EXIT_CONFIG: u8 = 2;
pub(crate) const EXIT_FAULT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mapcheck",
    version,
    about = "Explicit-state accepting-cycle checker with a distributed MAP search"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one algorithm on one model and report the verdict.
    Check(CheckArgs),
    /// Run a matrix of configurations and write a CSV.
    Bench(bench::BenchArgs),
    /// Parse a model and report its shape and state count.
    Parse(ParseArgs),
    /// Pretty-print a GCL model to stdout.
    Fmt(FmtArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub(crate) enum Algorithm {
    /// Sequential breadth-first reachability.
    Bfs,
    /// Sequential depth-first reachability.
    Dfs,
    /// Sequential nested depth-first cycle search.
    Ndfs,
    /// Sequential MAP cycle search.
    MapSeq,
    /// Distributed MAP cycle search.
    MapDist,
    /// Distributed reachability (one MAP iteration, acceptance ignored).
    ReachDist,
}

impl Algorithm {
    pub(crate) fn name(self) -> &'static str {
        match self {
            Algorithm::Bfs => "bfs",
            Algorithm::Dfs => "dfs",
            Algorithm::Ndfs => "ndfs",
            Algorithm::MapSeq => "map-seq",
            Algorithm::MapDist => "map-dist",
            Algorithm::ReachDist => "reach-dist",
        }
    }

    pub(crate) fn is_distributed(self) -> bool {
        matches!(self, Algorithm::MapDist | Algorithm::ReachDist)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransportKind {
    Sim,
    Tcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Random,
    TokenFirst,
}

#[derive(Args)]
struct CheckArgs {
    /// Model: path to a .gcl or .graph file, or builtin:<name>:K=V[,K=V...]
    #[arg(long)]
    model: String,

    #[arg(long, value_enum, default_value_t = Algorithm::MapDist)]
    alg: Algorithm,

    /// Worker count (sim transport; tcp derives it from the hosts file).
    #[arg(long)]
    workers: Option<usize>,

    #[arg(long, value_enum, default_value_t = TransportKind::Sim)]
    transport: TransportKind,

    /// Schedule seed for the sim transport.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long, default_value_t = 10_000_000)]
    state_cap: u64,

    /// State records per outbound frame.
    #[arg(long, default_value_t = 64)]
    batch_size: usize,

    /// Hosts file for tcp: one host:port per line, line i = worker i.
    #[arg(long)]
    hosts: Option<PathBuf>,

    /// This process's worker index under tcp
    /// (the MAPCHECK_WORKER_INDEX environment variable overrides).
    #[arg(long)]
    worker_index: Option<usize>,

    /// Sim delivery policy.
    #[arg(long, value_enum, default_value_t = PolicyArg::Random)]
    policy: PolicyArg,

    /// Write the sim scheduler event log to this file.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct ParseArgs {
    #[arg(long)]
    model: String,

    /// Dump the abstract syntax tree (GCL models only).
    #[arg(long)]
    ast: bool,

    #[arg(long, default_value_t = 10_000_000)]
    state_cap: u64,
}

#[derive(Args)]
struct FmtArgs {
    /// Path to a .gcl file.
    file: PathBuf,
}

/// Config/usage failure (exit 2) or runtime fault (exit 3).
#[derive(Debug)]
pub(crate) enum CliError {
    Config(String),
    Fault(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Fault(_) => EXIT_FAULT,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Fault(m) => m,
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        CliError::Fault(e.to_string())
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::Config(m) => CliError::Config(m),
            other => CliError::Fault(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Check(args) => cmd_check(&args),
        Cmd::Bench(args) => bench::cmd_bench(&args).map(|()| EXIT_NO_CYCLE),
        Cmd::Parse(args) => cmd_parse(&args).map(|()| EXIT_NO_CYCLE),
        Cmd::Fmt(args) => cmd_fmt(&args).map(|()| EXIT_NO_CYCLE),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mapcheck: error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_check(args: &CheckArgs) -> Result<u8, CliError> {
    let loaded = load_model(&args.model)?;
    let start = Instant::now();
    let report = run_algorithm(args, &loaded)?;
    let wall = start.elapsed();
    print_search_report(&loaded, args.alg.name(), &report, wall);
    Ok(match report.status {
        ExitStatus::CycleFound => EXIT_CYCLE,
        ExitStatus::Clean => EXIT_NO_CYCLE,
    })
}

fn run_algorithm(args: &CheckArgs, loaded: &LoadedModel) -> Result<Report, CliError> {
    let model = loaded.system.as_ref();
    match args.alg {
        Algorithm::Bfs => Ok(Report::from_reach(baselines::bfs_reach(model, args.state_cap)?)),
        Algorithm::Dfs => Ok(Report::from_reach(baselines::dfs_reach(model, args.state_cap)?)),
        Algorithm::Ndfs => Ok(Report::from_cycle(
            baselines::ndfs_cycle(model, args.state_cap)?,
            model,
        )),
        Algorithm::MapSeq => Ok(Report::from_cycle(
            baselines::map_sequential(model, args.state_cap)?,
            model,
        )),
        Algorithm::MapDist | Algorithm::ReachDist => run_distributed(args, loaded),
    }
}

fn run_distributed(args: &CheckArgs, loaded: &LoadedModel) -> Result<Report, CliError> {
    let mode = if args.alg == Algorithm::ReachDist {
        Mode::ReachOnly
    } else {
        Mode::Map
    };
    match args.transport {
        TransportKind::Sim => {
            let workers = args.workers.unwrap_or(1);
            if workers == 0 {
                return Err(CliError::Config("--workers must be at least 1".into()));
            }
            let opts = SimOptions {
                mode,
                batch_size: args.batch_size,
                state_cap: args.state_cap,
                policy: match args.policy {
                    PolicyArg::Random => SimPolicy::Random,
                    PolicyArg::TokenFirst => SimPolicy::TokenFirst,
                },
                collect_log: args.log.is_some(),
                collect_states: false,
            };
            let out = run_sim(loaded.system.as_ref(), workers, args.seed, &opts)?;
            if let Some(path) = &args.log {
                std::fs::write(path, out.log.join("\n") + "\n")
                    .map_err(|e| CliError::Fault(format!("writing {}: {e}", path.display())))?;
            }
            Ok(Report::from_verdict(
                out.verdict,
                loaded.system.as_ref(),
                workers,
            ))
        }
        TransportKind::Tcp => {
            let hosts_path = args.hosts.as_ref().ok_or_else(|| {
                CliError::Config("tcp transport requires --hosts <file>".into())
            })?;
            let text = std::fs::read_to_string(hosts_path)
                .map_err(|e| CliError::Config(format!("reading {}: {e}", hosts_path.display())))?;
            let hosts = parse_hosts(&text)?;
            if let Some(w) = args.workers {
                if w != hosts.len() {
                    return Err(CliError::Config(format!(
                        "--workers {w} contradicts the hosts file ({} entries)",
                        hosts.len()
                    )));
                }
            }
            let self_index = worker_index(args)?;
            if self_index >= hosts.len() {
                return Err(CliError::Config(format!(
                    "worker index {self_index} out of range for {} hosts",
                    hosts.len()
                )));
            }
            let cfg = TcpConfig::new(hosts.clone(), self_index, loaded.model_hash);
            let opts = TcpRunOptions {
                mode,
                batch_size: args.batch_size,
                state_cap: args.state_cap,
            };
            let verdict = run_tcp(loaded.system.as_ref(), &cfg, &opts)?;
            Ok(Report::from_verdict(
                verdict,
                loaded.system.as_ref(),
                hosts.len(),
            ))
        }
    }
}

fn worker_index(args: &CheckArgs) -> Result<usize, CliError> {
    if let Ok(v) = std::env::var("MAPCHECK_WORKER_INDEX") {
        return v
            .parse()
            .map_err(|_| CliError::Config(format!("MAPCHECK_WORKER_INDEX=`{v}` is not a number")));
    }
    args.worker_index
        .ok_or_else(|| CliError::Config("tcp transport requires --worker-index (or MAPCHECK_WORKER_INDEX)".into()))
}

fn cmd_parse(args: &ParseArgs) -> Result<(), CliError> {
    let loaded = load_model(&args.model)?;
    println!("model: {}", loaded.descriptor);
    println!("kind: {}", loaded.kind);
    println!("state width: {} bytes", loaded.system.state_width());
    if let Some(ast) = &loaded.gcl_ast {
        println!(
            "variables: {}, processes: {}, commands: {}",
            ast.vars.len(),
            ast.procs.len(),
            ast.procs.iter().map(|p| p.commands.len()).sum::<usize>()
        );
        if args.ast {
            println!("{ast:#?}");
        }
    }
    let stats = baselines::bfs_reach(loaded.system.as_ref(), args.state_cap)?;
    println!("states: {}", stats.states);
    println!("transitions: {}", stats.transitions);
    Ok(())
}

fn cmd_fmt(args: &FmtArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.file)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", args.file.display())))?;
    let ast = gcl::parse(&text).map_err(|e| CliError::Config(e.to_string()))?;
    print!("{}", gcl::format_model(&ast));
    Ok(())
}
