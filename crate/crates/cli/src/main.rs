use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spectra_core::cli::{run, CommandName, RunConfig};
use spectra_core::exec::configure_threads_from_env;

/// Local-dimension spectra of weak Gibbs measures on Markov interval maps.
///
/// Maps, potentials and command parameters come from the TOML config; the
/// flags only override the command and the output directory. The thread
/// count can be set with SPECTRA_THREADS.
#[derive(Debug, Parser)]
#[command(name = "spectra", version)]
struct Args {
    /// Path of the TOML run configuration.
    config: PathBuf,
    /// Run this command instead of the one named in the config.
    #[arg(long)]
    command: Option<String>,
    /// Write artifacts here instead of the configured output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    configure_threads_from_env();
    let loaded = RunConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(c) = &args.command {
            cfg.command.name = CommandName::parse(c)?;
        }
        Ok(cfg)
    });
    let cfg = match loaded {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            return ExitCode::from(1);
        }
    };
    let out = args.output.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let outcome = match run(&cfg, &out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            return ExitCode::from(1);
        }
    };
    let m = &outcome.manifest;
    println!("{} {}", m.command, m.status);
    for (name, [lo, value, hi]) in &m.brackets {
        println!("{name} = {value} in [{lo}, {hi}]");
    }
    for (name, ok) in &m.checks {
        println!("{name}: {ok}");
    }
    for note in &m.notes {
        println!("note: {note}");
    }
    if let (Some(name), Some(msg)) = (&m.error, &m.error_message) {
        eprintln!("error[{name}]: {msg}");
    }
    for path in &outcome.written {
        println!("wrote {}", path.display());
    }
    ExitCode::from(outcome.exit_code() as u8)
}
