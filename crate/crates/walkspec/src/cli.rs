use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "walkspec", version, about = "Spectral radius, speed and return probabilities of biased random walks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Graph model, e.g. `tree:d=4` or `free:2,1`.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Write the result table here (CSV unless --json).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON instead of CSV / text.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, env = "WALKSPEC_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<u64>,
    #[arg(long, global = true)]
    pub replicas: Option<u64>,
    /// `key=value` file supplying defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record wall time (makes output depend on the machine).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral radius by closed form, fixed-point solver and/or series.
    Rho {
        #[arg(long, value_enum, default_value_t = Method::All)]
        method: Method,
    },
    /// Closed-form speed against simulation.
    Speed,
    /// Return and first-return probability tables.
    Dp,
    /// Raw simulation summary: speed, occupation and run-length statistics.
    Simulate {
        #[arg(long)]
        burn_in: Option<u64>,
    },
    /// ρ and speed over a λ grid.
    Sweep {
        #[arg(long)]
        lambda_lo: Option<f64>,
        /// Defaults to λ_c.
        #[arg(long)]
        lambda_hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Also write a gnuplot script next to --out.
        #[arg(long)]
        gnuplot_script: bool,
    },
    /// Run verification checks. Exit status is nonzero if any fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Smaller simulations; skips the coverage check.
        #[arg(long)]
        fast: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Closed,
    Solver,
    Dp,
    All,
}
