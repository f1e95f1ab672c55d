//! Command-line front end: simulate, compile, transform and check automata
//! stored in the JSON format described in `docs/automaton-format.md`.

mod commands;
mod error;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qfa", version, about = "Quantum finite automata toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one word and print acceptance, rejection and leftover probability.
    Run {
        file: PathBuf,
        /// Input word without end-markers; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        /// Print one line per step.
        #[arg(long)]
        trace: bool,
    },
    /// Acceptance probability of every word up to a length, in shortlex order.
    ProbTable {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Compile a boolean combination of subsequence atoms into an MM-QFA.
    Compile {
        #[arg(long)]
        alphabet: String,
        /// For example '"ab" & !"c"'.
        #[arg(long)]
        expr: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Apply a closure construction.
    Construct {
        #[command(subcommand)]
        op: ConstructOp,
    },
    /// Structural checks on a DFA file.
    #[command(group(ArgGroup::new("property").required(true).args(["partial_order", "gfa", "rfa", "irreversible"])))]
    Check {
        file: PathBuf,
        #[arg(long)]
        partial_order: bool,
        #[arg(long)]
        gfa: bool,
        #[arg(long)]
        rfa: bool,
        #[arg(long)]
        irreversible: bool,
    },
    /// Decide equivalence of two MO-QFAs or linear systems.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Convert an MO-QFA into a PFA with the same cut-point classification.
    ToPfa {
        file: PathBuf,
        /// Defaults to the file's cut_point, or 0.
        #[arg(long)]
        cut_point: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write a gallery automaton.
    Example {
        name: ExampleName,
        /// Defaults to standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report well-formedness diagnostics.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
enum ConstructOp {
    /// Swap accepting and rejecting states, or with --one-sided build the
    /// bounded-error complement of a positive one-sided automaton.
    Complement {
        input: PathBuf,
        #[arg(long)]
        one_sided: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Inverse image under a homomorphism given as --map a=xy pairs.
    InverseHom {
        input: PathBuf,
        /// One per domain symbol; the right side may be empty.
        #[arg(long = "map", required = true)]
        maps: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Word quotient by a fixed word.
    Quotient {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, value_enum)]
        side: Side,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fold the left end-marker into the first-symbol matrices.
    StripEndmarker {
        input: PathBuf,
        /// JSON matrix or a file holding one; defaults to the file's cent.
        #[arg(long)]
        cent_matrix: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    Tensor {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    Power {
        input: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    Union {
        a: PathBuf,
        b: PathBuf,
        /// Amplification powers as s,t; chosen automatically when absent.
        #[arg(long)]
        powers: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    Intersect {
        a: PathBuf,
        b: PathBuf,
        /// Power of the second automaton; chosen automatically when absent.
        #[arg(long)]
        k: Option<u32>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExampleName {
    Rotation,
    FreeGroup,
    Parity,
    EndsWithB,
    EndmarkDemo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
