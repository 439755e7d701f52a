use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "point-stability", version, about = "Stability functional of the fermionic point-interaction system")]
pub struct Cli {
    /// Output format on standard output.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Upper bound on worker threads (default: all cores).
    #[arg(long, env = "POINT_STABILITY_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Tolerances {
    /// Relative tolerance of the radial quadrature.
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Supremum Lambda_beta(m) over the reduced (Q, b) domain.
    Lambda {
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Simplex termination tolerance of the refinement stage.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[command(flatten)]
        quad: Tolerances,
    },
    /// Mass ratio m* at which Lambda_beta(m*) = 1.
    CriticalMass {
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 1e-3)]
        m_tol: f64,
        #[command(flatten)]
        quad: Tolerances,
    },
    /// Lambda, Lambda_1, Lambda_2 and the analytic bound on a log-spaced mass grid (CSV).
    Scan {
        #[arg(long, default_value_t = 0.1)]
        m_min: f64,
        #[arg(long, default_value_t = 20.0)]
        m_max: f64,
        #[arg(long, default_value_t = 60)]
        points: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        betas: Vec<f64>,
        /// CSV destination; standard output when omitted in text mode.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        quad: Tolerances,
    },
    /// Reduced objective on a uniform (Q, b) grid (CSV).
    Landscape {
        #[arg(long)]
        m: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 65)]
        grid: usize,
        #[arg(long, default_value_t = 3.0)]
        q_max: f64,
        /// Upper end of the b axis; defaults to min(3, 2 + m).
        #[arg(long)]
        b_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        quad: Tolerances,
    },
    /// Closed-form upper bounds and the energy lower bound.
    Bounds {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        beta: Option<f64>,
        /// Coupling for the energy lower bound.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Lambda(m) to use in the energy bound; computed numerically when omitted.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Run the validation oracles; exit status 0 iff every report passes.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,5")]
        masses: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        angular_points: usize,
        /// Base points of the orientation check (each with 12 orientations).
        #[arg(long, default_value_t = 6)]
        orientation_points: usize,
        #[arg(long, default_value_t = 50)]
        probe_samples: usize,
        /// Report destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Angular,
    Orientation,
    Probe,
    Thm1,
    Thm2,
    All,
}

impl Suite {
    pub fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}
