//! Command-line front end: config resolution, subcommands and run manifests.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use anyhow::{Context, Result};

pub use args::{Cli, CommandKind};
pub use commands::RunReport;
pub use config::RunConfig;

/// Resolves the configuration of `cli` and runs its command.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let cfg = cli.resolve()?;
    run_with_config(cli.command.kind(), &cfg)
}

/// Runs `kind` on a resolved configuration, capped at `cfg.threads`
/// workers when set.
pub fn run_with_config(kind: CommandKind, cfg: &RunConfig) -> Result<RunReport> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(|| commands::execute(kind, cfg)),
        None => commands::execute(kind, cfg),
    }
}
