use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Largest circuit the functional commands accept.
pub const MAX_FUNCTIONAL_MU: u32 = 24;

#[derive(Parser, Debug)]
#[command(name = "zkspeed", version, about = "HyperPlonk prover core and accelerator model")]
struct Cli {
    /// Bound on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct WorkloadArgs {
    /// Circuit size as log2 of the gate count.
    #[arg(long)]
    pub mu: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Witness fractions of zero, one and dense scalars: `z,o,d`.
    #[arg(long, default_value = "0.45,0.45,0.10")]
    pub sparsity: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a workload description.
    GenWorkload {
        #[command(flatten)]
        workload: WorkloadArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prove a mock circuit and write the proof bundle.
    Prove {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Workload file; overrides --mu, --seed and --sparsity.
        #[arg(long)]
        workload_file: Option<PathBuf>,
        /// Curve description (TOML); BLS12-381 G1 by default.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check a proof bundle written by `prove`.
    SelfVerify {
        /// Directory written by `prove`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Per-kernel modmul census.
    Census {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Also run the instrumented prover and compare.
        #[arg(long)]
        functional: bool,
        /// Fixed Pippenger window for every MSM.
        #[arg(long)]
        window: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate the design space and extract Pareto frontiers.
    Dse {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Knob domains (TOML); the full published space by default.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Cost tables (TOML).
        #[arg(long)]
        costs: Option<PathBuf>,
        /// Restrict to these bandwidths (GB/s), comma separated.
        #[arg(long)]
        bandwidth: Option<String>,
        /// Evaluate one design instead of the whole space.
        #[arg(long)]
        design: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// MSM and SumCheck speedup against PEs and bandwidth.
    SweepBandwidth {
        #[command(flatten)]
        workload: WorkloadArgs,
        /// Base design; the swept knobs are overridden.
        #[arg(long)]
        design: Option<String>,
        #[arg(long)]
        costs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inversion batch-size sweep.
    SweepBatch {
        #[arg(long, default_value_t = 12)]
        max_log2: u32,
        #[arg(long)]
        costs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the bundled cost tables and knob domains.
    DumpCosts {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{message}")]
    Failure { kind: &'static str, message: String },
}

impl CliError {
    pub fn fail(kind: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Failure {
            kind,
            message: e.to_string(),
        }
    }

    fn report(&self) -> (u8, String) {
        let (code, kind, message) = match self {
            CliError::Usage(m) => (2, "usage", m.as_str()),
            CliError::Failure { kind, message } => (1, *kind, message.as_str()),
        };
        let line = serde_json::json!({ "error": kind, "message": message });
        (code, line.to_string())
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::fail("threads", e))?;
    }
    match cli.command {
        Command::GenWorkload { workload, out } => commands::gen_workload(&workload, &out),
        Command::Prove {
            workload,
            workload_file,
            config,
            out,
        } => commands::prove(&workload, workload_file.as_deref(), config.as_deref(), &out),
        Command::SelfVerify { out, config } => commands::self_verify(&out, config.as_deref()),
        Command::Census {
            workload,
            functional,
            window,
            out,
        } => commands::census(&workload, functional, window, out.as_deref()),
        Command::Dse {
            workload,
            config,
            costs,
            bandwidth,
            design,
            out,
        } => commands::dse(
            &workload,
            config.as_deref(),
            costs.as_deref(),
            bandwidth.as_deref(),
            design.as_deref(),
            out.as_deref(),
        ),
        Command::SweepBandwidth {
            workload,
            design,
            costs,
            out,
        } => commands::sweep_bandwidth(&workload, design.as_deref(), costs.as_deref(), out.as_deref()),
        Command::SweepBatch { max_log2, costs, out } => {
            commands::sweep_batch(max_log2, costs.as_deref(), out.as_deref())
        }
        Command::DumpCosts { out } => commands::dump_costs(out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            if !summary.is_empty() {
                let _ = commands::to_stdout(summary.as_bytes());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (code, line) = e.report();
            eprintln!("{line}");
            ExitCode::from(code)
        }
    }
}
