//! `lclgrid`: classify, synthesize, simulate and verify LCL problems on
//! directed cycles and oriented toroidal grids.
//!
//! Exit codes: 0 success, 1 verification failed, 2 invalid input,
//! 3 inconclusive, 4 solver backend failure.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lclgrid::sat::{Branching, SOLVER_ENV};
use lclgrid::sim::symmetry::DEFAULT_STRATEGY;
use lclgrid::synth::CspEncoding;
use report::{Failure, Inputs, Report, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "lclgrid", version, about)]
struct Cli {
    /// Write the JSON report to this file (`-` for standard output).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BranchingArg {
    Activity,
    Lowest,
}

impl From<BranchingArg> for Branching {
    fn from(b: BranchingArg) -> Self {
        match b {
            BranchingArg::Activity => Branching::Activity,
            BranchingArg::Lowest => Branching::Lowest,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EncodingArg {
    Auto,
    Direct,
    Compact,
}

impl From<EncodingArg> for CspEncoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Auto => CspEncoding::Auto,
            EncodingArg::Direct => CspEncoding::Direct,
            EncodingArg::Compact => CspEncoding::Compact,
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct SolverArgs {
    /// SAT backend: `internal` or `external`.
    #[arg(long, default_value = "internal")]
    backend: String,
    /// External solver command; the CNF path is appended.
    #[arg(long, env = SOLVER_ENV)]
    solver_cmd: Option<String>,
    /// Decision heuristic of the internal solver.
    #[arg(long, value_enum, default_value = "activity")]
    branching: BranchingArg,
}

#[derive(Args, Clone, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    max_k: usize,
    /// Window dimensions tried for every k, e.g. `3x2,3x3`.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Vec<(usize, usize)>>,
    #[arg(long, value_enum, default_value = "auto")]
    encoding: EncodingArg,
    #[command(flatten)]
    solver: SolverArgs,
}

fn parse_dims(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(|d| {
            let (a, b) = d.trim().split_once(['x', 'X']).ok_or_else(|| format!("expected AxB, got `{d}`"))?;
            let a: usize = a.parse().map_err(|_| format!("bad row count in `{d}`"))?;
            let b: usize = b.parse().map_err(|_| format!("bad column count in `{d}`"))?;
            if a == 0 || b == 0 {
                return Err(format!("empty window `{d}`"));
            }
            Ok((a, b))
        })
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Classify a cycle problem; for LOGSTAR also write its algorithm.
    ClassifyCycle {
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a normal-form algorithm for a grid problem.
    Synthesize {
        spec: String,
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the tiles of an anchor window.
    Tiles {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// Run an algorithm file on a seeded instance.
    Simulate {
        algorithm: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the per-phase round breakdown.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value = DEFAULT_STRATEGY)]
        strategy: String,
    },
    /// Solve a small torus exactly, or print UNSAT.
    Oracle {
        spec: String,
        #[arg(long)]
        n: usize,
        /// Search beyond the default size guard.
        #[arg(long)]
        force: bool,
    },
    /// Check a labelling file against a problem.
    Verify { spec: String, labelling: PathBuf },
    /// Synthesize, then simulate and verify on every (n, seed).
    Pipeline {
        spec: String,
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seed: Vec<u64>,
        #[arg(long, default_value = DEFAULT_STRATEGY)]
        strategy: String,
    },
    /// Write the shipped problem zoo as problem files.
    Zoo {
        #[arg(default_value = "zoo")]
        dir: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ClassifyCycle { .. } => "classify-cycle",
            Command::Synthesize { .. } => "synthesize",
            Command::Tiles { .. } => "tiles",
            Command::Simulate { .. } => "simulate",
            Command::Oracle { .. } => "oracle",
            Command::Verify { .. } => "verify",
            Command::Pipeline { .. } => "pipeline",
            Command::Zoo { .. } => "zoo",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let name = cli.command.name();
    let mut inputs = Inputs::default();
    let result = match cli.command {
        Command::ClassifyCycle { spec, out } => commands::classify_cycle(&spec, out, &mut inputs),
        Command::Synthesize { spec, synth, out } => commands::synthesize(&spec, &synth, out, &mut inputs),
        Command::Tiles { k, rows, cols, count_only } => commands::tiles(k, rows, cols, count_only, &mut inputs),
        Command::Simulate { algorithm, n, seed, trace, strategy } => {
            commands::simulate(&algorithm, n, seed, trace, &strategy, &mut inputs)
        }
        Command::Oracle { spec, n, force } => commands::oracle(&spec, n, force, &mut inputs),
        Command::Verify { spec, labelling } => commands::verify(&spec, &labelling, &mut inputs),
        Command::Pipeline { spec, synth, n, seed, strategy } => {
            commands::pipeline(&spec, &synth, &n, &seed, &strategy, &mut inputs)
        }
        Command::Zoo { dir } => commands::export_zoo(&dir, &mut inputs),
    };
    let (code, report) = match result {
        Ok(o) => {
            if cli.report.as_deref() != Some(std::path::Path::new("-")) {
                print!("{}", o.text);
            }
            (
                o.code,
                Report {
                    command: name.into(),
                    inputs_digest: inputs.digest(name),
                    exit_code: o.code,
                    outputs: o.outputs,
                    timings: o.timings,
                },
            )
        }
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            let outputs = serde_json::json!({ "error": message });
            (
                code,
                Report {
                    command: name.into(),
                    inputs_digest: inputs.digest(name),
                    exit_code: code,
                    outputs,
                    timings: serde_json::json!({}),
                },
            )
        }
    };
    if let Some(path) = cli.report {
        let mut doc = serde_json::to_string_pretty(&report).expect("reports always serialize");
        doc.push('\n');
        if path.as_os_str() == "-" {
            print!("{doc}");
        } else if let Err(e) = std::fs::write(&path, doc) {
            eprintln!("error: writing report {}: {e}", path.display());
        }
    }
    ExitCode::from(code as u8)
}
