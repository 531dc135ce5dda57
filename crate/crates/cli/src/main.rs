use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

use commands::Failure;

#[derive(Parser)]
#[command(name = "lclr", version, about = "Encode, gadget, compile and verify locally checkable labelings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
pub struct SchemeArgs {
    /// Largest input degree accepted by the encoding
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
    /// Largest input label accepted by the encoding
    #[arg(long, default_value_t = 2)]
    pub max_label: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Back,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMode {
    Local,
    Slocal,
    A1,
    A2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reading {
    Shared,
    Literal,
}

#[derive(Subcommand)]
pub enum Command {
    /// Encode a labeled graph of degree at most 3 as an unlabeled cubic graph
    #[command(name = "encode-ab", alias = "encode")]
    EncodeAb {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the gadget map
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Decode a cubic graph back into a labeled graph
    #[command(name = "decode-ab", alias = "decode")]
    DecodeAb {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Lift a labeling between a graph and its encoding
    #[command(name = "lift-ab")]
    LiftAb {
        /// Source problem (LCL with node outputs)
        #[arg(long)]
        problem: PathBuf,
        /// The source graph; its encoding is recomputed
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        #[arg(long, value_enum, default_value = "forward")]
        direction: Direction,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replace every edge of a cubic graph by a chain of gadgets
    #[command(name = "gadget-bd")]
    GadgetBd {
        #[arg(long)]
        instance: PathBuf,
        /// `auto` or a JSON file mapping "u-v" to chain lengths
        #[arg(long, default_value = "auto")]
        coloring: String,
        #[arg(long, default_value_t = 1)]
        radius: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Contract gadget chains back into single edges
    #[command(name = "contract-db")]
    ContractDb {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the recovered chain lengths
        #[arg(long)]
        coloring_out: Option<PathBuf>,
    },
    /// Search for colorings violating the gadget coloring theorem
    #[command(name = "check-theorem")]
    CheckTheorem {
        /// Gadgeted graph as written by gadget-bd
        #[arg(long, conflicts_with = "fixture")]
        instance: Option<PathBuf>,
        /// `theta:L1,L2,...` or `twin:L`
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long, default_value_t = 1)]
        radius: u32,
        #[arg(long, default_value_t = 64)]
        max_vertices: usize,
        #[arg(long, default_value_t = 5_000_000)]
        budget: u64,
        #[arg(long, value_enum, default_value = "shared")]
        reading: Reading,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lift a B labeling onto a gadgeted graph
    #[command(name = "lift-bd")]
    LiftBd {
        #[arg(long)]
        problem: PathBuf,
        /// Gadgeted graph as written by gadget-bd
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        /// Vertex coloring file; defaults to v+1
        #[arg(long)]
        chi: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report the constants of the half-edge problem derived from B
    #[command(name = "compile-re")]
    CompileRe {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lift a D labeling to half-edge labels
    #[command(name = "lift-de")]
    LiftDe {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Read a D labeling back from half-edge labels
    #[command(name = "lift-ed")]
    LiftEd {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        labeling: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a labeling against a problem
    Verify {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// The labeling to check
        #[arg(long)]
        output: PathBuf,
        /// Where to write the verdict
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Find a labeling by exhaustive search
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a built-in algorithm and record the radius each vertex used
    Simulate {
        #[arg(long, value_enum)]
        mode: SimMode,
        /// `builtin:<name>[:T]`
        #[arg(long)]
        alg: String,
        #[arg(long)]
        instance: PathBuf,
        /// Round budget; defaults to the algorithm's locality
        #[arg(long)]
        rounds: Option<u32>,
        /// Seed for identifiers
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// SLOCAL processing order as a JSON array; defaults to increasing identifier
        #[arg(long)]
        order: Option<PathBuf>,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a range of reduction stages with verification at every boundary
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Problem file; defaults to 4-coloring
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, conflicts_with = "fixture")]
        instance: Option<PathBuf>,
        #[arg(long)]
        fixture: Option<String>,
        /// `A-B`, `A-E`, `B-E`, ...
        #[arg(long)]
        stages: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Leave timings out of the report
        #[arg(long)]
        no_timings: bool,
        /// Write the resolved config, constants included
        #[arg(long)]
        write_config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Export a graph as JSON or DOT
    Export {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: ExportFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a named instance fixture with every label 0, or list them
    Fixture {
        /// Graph id, `theta:L1,L2,...` or `twin:L`
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lclr: {f}");
            ExitCode::from(match f {
                Failure::Verify(_) => 1,
                Failure::Input(_) => 2,
                Failure::Budget(_) => 3,
            })
        }
    }
}
