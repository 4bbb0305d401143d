use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use indicial::context::Dimension;
use indicial::render::Format;
use indicial::session::{repl, run_script, Session};

/// Symbolic indicial tensor algebra: run a script or start a REPL.
#[derive(Parser)]
#[command(name = "indicial", version)]
struct Cli {
    /// Run the statements in FILE and print the transcript.
    #[arg(long, value_name = "FILE", conflicts_with = "repl")]
    script: Option<PathBuf>,
    /// Start an interactive session (the default without --script).
    #[arg(long)]
    repl: bool,
    /// Fix the dimension (otherwise traces stay the symbol `dim`).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    dim: Option<u32>,
    /// Output format: plain, latex, json or script.
    #[arg(long, default_value = "plain")]
    format: Format,
    /// Print the intermediate steps of eulerlagrange.
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut session = Session::new();
    session.trace = cli.trace;
    if let Some(n) = cli.dim {
        session.ctx.set_dimension(Dimension::Fixed(n));
    }
    match cli.script {
        Some(path) => {
            let src = match std::fs::read_to_string(&path) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("indicial: cannot read {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            let outcome = run_script(&mut session, &src, cli.format);
            // A closed pipe (e.g. `| head`) just ends the transcript early.
            let mut out = io::stdout().lock();
            for line in &outcome.transcript {
                if writeln!(out, "{line}").is_err() {
                    break;
                }
            }
            for d in &outcome.diagnostics {
                eprintln!("{d}");
            }
            ExitCode::from(outcome.status as u8)
        }
        None => match repl(&mut session, io::stdin().lock(), &mut io::stdout(), cli.format) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("indicial: {e}");
                ExitCode::from(2)
            }
        },
    }
}
