//! Command-line front end for the `gwel` library.

pub mod cli;
pub mod commands;
pub mod error;
pub mod lattice_config;
pub mod parse;
pub mod report;

use cli::Cli;
use error::CliError;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "GWEL_THREADS";

/// Thread count from the environment, then the flag; `None` leaves rayon's
/// default.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Param(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?,
        ),
        _ => None,
    };
    match from_env.or(flag) {
        Some(0) => Err(CliError::Param("thread count must be positive".into())),
        other => Ok(other),
    }
}

/// Compute the report for `cli` and render it in the requested format.
///
/// A requested thread count gets its own pool, so repeated calls in one
/// process may use different counts.
pub fn render(cli: &Cli) -> Result<String, CliError> {
    let report = match resolve_threads(cli.common.threads)? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Param(format!("cannot start {n} threads: {e}")))?
            .install(|| commands::run(&cli.command, cli.common.seed))?,
        None => commands::run(&cli.command, cli.common.seed)?,
    };
    Ok(report.render(cli.common.format))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let text = render(cli)?;
    report::write_output(&text, cli.common.out.as_deref())
}
