//! `shapeforge` command-line front end.

mod assemble;
mod eval;
mod exec;
mod export;
mod failure;
mod files;
mod generate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser)]
#[command(name = "shapeforge", version, about = "Shape-program tools: dataset synthesis, execution, assembly and evaluation")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "SHAPEFORGE_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn ext(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Ply => "ply",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sharded part dataset.
    Generate {
        /// JSON run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Family weight override, e.g. `boolean=2.5`. Repeatable.
        #[arg(long = "weight", value_name = "FAMILY=W", allow_hyphen_values = true)]
        weights: Vec<String>,
        #[arg(long)]
        shard_size: Option<usize>,
        /// Also write each record's mesh as PLY.
        #[arg(long)]
        write_meshes: bool,
        /// Also write each record's surface samples as PLY.
        #[arg(long)]
        write_clouds: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a program and write its meshes.
    Exec {
        program: PathBuf,
        #[arg(long, value_enum, default_value = "obj")]
        export: MeshFormat,
        /// One file per part instead of one merged mesh.
        #[arg(long)]
        per_part: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write an assembly input directory (part meshes, canonical
        /// codes and `parts.json`).
        #[arg(long)]
        assembly_dir: Option<PathBuf>,
    },
    /// Assemble part meshes and canonical codes into one program.
    Assemble {
        /// Directory holding `parts.json`.
        parts_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Acceptance report path (default: `<out>.report.json`).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        category: Option<String>,
        /// Fail with exit code 5 if any part is rejected.
        #[arg(long)]
        strict: bool,
        /// Surface samples per part for the fit check.
        #[arg(long, default_value_t = 16384)]
        fit_points: usize,
        #[arg(long, default_value_t = 0)]
        fit_seed: u64,
    },
    /// Score predicted programs against ground-truth shapes.
    Eval {
        /// Ground truth: an OBJ/PLY mesh or a program.
        #[arg(required_unless_present = "batch")]
        gt: Option<PathBuf>,
        /// Predicted program.
        #[arg(required_unless_present = "batch")]
        pred: Option<PathBuf>,
        /// JSON list of `{"gt": .., "pred": ..}` pairs.
        #[arg(long, conflicts_with_all = ["gt", "pred"])]
        batch: Option<PathBuf>,
        /// `default` or a JSON protocol file.
        #[arg(long, default_value = "default")]
        protocol: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Sample a program's surface into a PLY point cloud.
    Export {
        program: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 16384)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Map into [-1, 1]^3.
        #[arg(long)]
        normalize: bool,
        /// Apply training augmentation (settings from --config).
        #[arg(long)]
        augment: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Generate {
            config,
            count,
            seed,
            weights,
            shard_size,
            write_meshes,
            write_clouds,
            out,
        } => generate::run(generate::Args {
            config,
            count,
            seed,
            weights,
            shard_size,
            write_meshes,
            write_clouds,
            out,
        }),
        Command::Exec {
            program,
            export,
            per_part,
            out,
            assembly_dir,
        } => exec::run(&program, export, per_part, &out, assembly_dir.as_deref()),
        Command::Assemble {
            parts_dir,
            out,
            report,
            name,
            category,
            strict,
            fit_points,
            fit_seed,
        } => assemble::run(assemble::Args {
            parts_dir,
            out,
            report,
            name,
            category,
            strict,
            fit_points,
            fit_seed,
        }),
        Command::Eval {
            gt,
            pred,
            batch,
            protocol,
            out,
        } => eval::run(gt, pred, batch, &protocol, &out),
        Command::Export {
            program,
            out,
            points,
            seed,
            normalize,
            augment,
            config,
        } => export::run(export::Args {
            program,
            out,
            points,
            seed,
            normalize,
            augment,
            config,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
