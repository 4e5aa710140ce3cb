use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use locnorm_cli::{load_input, run, Command, Format, RunConfig};
use locnorm_core::Error;

/// Lattices, centraliser algebras, Stone spaces and radicals of filtered
/// finite groups.
#[derive(Parser, Debug)]
#[command(name = "locnorm", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Group spec JSON file, or `@name` for a built-in group.
    #[arg(long)]
    input: String,
    #[arg(long)]
    margin_i: Option<usize>,
    #[arg(long)]
    margin_j: Option<usize>,
    #[arg(long)]
    max_witness: Option<usize>,
    /// Clopen level (tree commands) or chain level (`ld`).
    #[arg(long)]
    depth: Option<usize>,
    /// Class-count cap for lattices, order cap for radicals.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the artifact here instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Suite for `verify`: all, boolean, modularity, stone, centlat, branch,
    /// radicals, identities.
    #[arg(long)]
    suite: Option<String>,
    /// Build centraliser algebras even when screening fails.
    #[arg(long = "unsafe")]
    unsafe_mode: bool,
}

fn fail(e: &Error) -> ExitCode {
    let reason = serde_json::json!({ "error": e });
    eprintln!("{}", serde_json::to_string(&reason).expect("json"));
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        margin_i: cli.margin_i,
        margin_j: cli.margin_j,
        max_witness: cli.max_witness,
        depth: cli.depth,
        budget: cli.budget,
        format: cli.format,
        suite: cli.suite.clone(),
        unsafe_mode: cli.unsafe_mode,
    };
    if cli.budget == Some(0) {
        return fail(&Error::input("budget must be positive"));
    }
    let artifact = match load_input(&cli.input).and_then(|l| run(cli.command, &l, &cfg)) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let text = match artifact.render(cli.format) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        return fail(&Error::input(format!("cannot write output: {e}")));
    }
    if artifact.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
