//! Command-line front end for `point-stability-core`.
//!
//! [`run`] is the whole program minus process plumbing: it parses the
//! arguments, executes the subcommand on a thread pool of the requested
//! size and returns the exit status. Data goes to `stdout` (or the `--out`
//! file), diagnostics to `stderr`.

pub mod args;
mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use point_stability_core::Error as CoreError;

pub use args::{Cli, Command, Format, Suite};
pub use output::OutputRecord;

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    /// A validation report failed.
    pub const VALIDATION_FAILED: i32 = 1;
    /// A quadrature or root search did not converge.
    pub const NON_CONVERGENCE: i32 = 2;
    /// Bad arguments or parameters outside the domain.
    pub const USAGE: i32 = 64;
    /// An output file could not be written.
    pub const IO: i32 = 74;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} validation report(s) failed")]
    ValidationFailed(usize),
    #[error("{0} scan row(s) did not converge")]
    Incomplete(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(CoreError::Domain(_)) => exit::USAGE,
            CliError::Core(CoreError::NonConvergence { .. } | CoreError::NoBracket { .. }) => exit::NON_CONVERGENCE,
            CliError::Core(CoreError::DerivationMismatch { .. }) | CliError::ValidationFailed(_) => {
                exit::VALIDATION_FAILED
            }
            CliError::Incomplete(_) => exit::NON_CONVERGENCE,
            CliError::Io { .. } => exit::IO,
        }
    }
}

pub(crate) type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the program on `argv` (including the program name) and returns the
/// exit status.
pub fn run<I, T>(argv: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut (dyn Write + Send) = if informational { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return if informational { exit::OK } else { exit::USAGE };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| commands::dispatch(cli, stdout, stderr))
}
