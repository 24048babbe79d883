macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        writeln!(std::io::stdout().lock(), $($t)*)?;
    }};
}

macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        write!(std::io::stdout().lock(), $($t)*)?;
    }};
}

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtpasp::credal::DEFAULT_FACT_CAP;
use dtpasp::stable::DEFAULT_ATOM_CAP;
use dtpasp::ErrorKind;

#[derive(Debug, Parser)]
#[command(name = "dtpasp", version, about = "Decision theory over probabilistic answer set programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for enumeration (default: all cores).
    #[arg(long, global = true, env = "DTPASP_JOBS")]
    pub jobs: Option<usize>,
    /// Largest number of rule-derivable atoms the answer-set solver accepts.
    #[arg(long, global = true, env = "DTPASP_ATOM_CAP", default_value_t = DEFAULT_ATOM_CAP)]
    pub atom_cap: usize,
    /// Largest number of probabilistic facts enumerated.
    #[arg(long, global = true, env = "DTPASP_FACT_CAP", default_value_t = DEFAULT_FACT_CAP)]
    pub fact_cap: usize,
    /// Wall-clock limit in seconds for solving.
    #[arg(long, global = true, env = "DTPASP_TIMEOUT")]
    pub timeout: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Enum,
    Amc3,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchMethod {
    Enum,
    Amc3,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lower and upper probability of conjunctive queries.
    Query {
        file: PathBuf,
        /// Comma-separated literals forming one conjunction, e.g. `qr` or `qr,not nqr`; repeatable.
        #[arg(long, required = true)]
        query: Vec<String>,
    },
    /// Strategies maximizing the lower and upper expected utility.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Run a generated benchmark family and write CSV rows.
    Bench {
        /// One of t1..t6.
        #[arg(long)]
        suite: String,
        /// Sizes, e.g. `n=2,d=1..8` for t1/t2 or `size=1..4` for t3..t6.
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = BenchMethod::Enum)]
        method: BenchMethod,
        /// CSV destination (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a program or DIMACS file to a circuit.
    Compile {
        file: PathBuf,
        /// Write the circuit in NNF text format.
        #[arg(long)]
        dump_nnf: Option<PathBuf>,
        /// Tier assignment for DIMACS input, e.g. `outer=1,2;middle=3`.
        #[arg(long)]
        tiers: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Ordered tree decomposition of a program or DIMACS file.
    Td {
        file: PathBuf,
        /// Tier assignment for DIMACS input, e.g. `outer=1,2;middle=3`.
        #[arg(long)]
        tiers: Option<String>,
        /// Write the decomposition in PACE `.td` format.
        #[arg(long)]
        out_td: Option<PathBuf>,
        /// Ignore definability when separating the tiers.
        #[arg(long)]
        no_definability: bool,
    },
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<dtpasp::Error>() {
            return match err.kind() {
                ErrorKind::Parse => 1,
                ErrorKind::Semantic => 2,
                ErrorKind::Resource => 3,
            };
        }
        if cause.downcast_ref::<dtpasp::ParseError>().is_some() {
            return 1;
        }
    }
    2
}

/// Contexts down to the first library error, whose own message already
/// includes its source.
fn message(e: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in e.chain() {
        parts.push(cause.to_string());
        if cause.downcast_ref::<dtpasp::Error>().is_some() {
            break;
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let out = match cli.command {
        Command::Query { file, query } => commands::query(g, &file, &query),
        Command::Solve { file, method } => commands::solve(g, &file, method),
        Command::Bench { suite, params, seed, method, out } => {
            commands::bench(g, &suite, &params, seed, method, out.as_deref())
        }
        Command::Compile { file, dump_nnf, tiers, method } => {
            commands::compile(g, &file, dump_nnf.as_deref(), tiers.as_deref(), method)
        }
        Command::Td { file, tiers, out_td, no_definability } => {
            commands::td(g, &file, tiers.as_deref(), out_td.as_deref(), no_definability)
        }
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
