//! `covswe` command-line driver.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, unknown
//! scenario, invalid configuration), 1 on runtime failures.

mod config;
mod mesh_cmd;
mod run;
mod table;

use std::fmt;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Invalid input from the user; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Parser)]
#[command(name = "covswe", version, about = "Shallow water solver on manifolds in covariant coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation.
    Run(config::RunArgs),
    /// Reproduce one of the reference error tables.
    Table(table::TableArgs),
    /// Generate and save a polygonal mesh.
    Mesh(mesh_cmd::MeshArgs),
    /// List the scenario catalog.
    List,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("COVSWE_THREADS") else {
        return Ok(());
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) => n,
        Err(_) => return usage(format!("COVSWE_THREADS must be a non-negative integer, got `{raw}`")),
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn list() -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{:<22} {:>3} {:<11} {:>6} {:>7}  description", "scenario", "dim", "metric", "cells", "t_end")?;
    for s in covswe::scenarios::catalog() {
        writeln!(
            out,
            "{:<22} {:>3} {:<11} {:>6} {:>7}  {}",
            s.name,
            s.dimension(),
            s.metric.name(),
            s.default_cells,
            s.default_t_end,
            s.description
        )?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Run(args) => run::run(config::RunSettings::resolve(args)?),
        Command::Table(args) => table::table(args),
        Command::Mesh(args) => mesh_cmd::mesh(args),
        Command::List => {
            // a closed pipe (`covswe list | head`) is not an error
            let _ = list();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
