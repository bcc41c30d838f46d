use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qheat::harness::{execute, Task};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Trace,
    Aq,
    Zeta,
    Expand,
    Verify,
}

/// Heat traces, Mellin invariants and small-beta expansions of explicit spectra.
///
/// Exit status: 0 on success, 1 on input or computation errors, 2 when a
/// verify run completes but does not pass.
#[derive(Debug, Parser)]
#[command(name = "qheat", version)]
struct Cli {
    #[arg(value_enum)]
    task: Cmd,
    /// Run configuration (`[section]` headers with `key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; defaults to `[run] output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let task = match cli.task {
        Cmd::Trace => Task::Trace,
        Cmd::Aq => Task::Aq,
        Cmd::Zeta => Task::Zeta,
        Cmd::Expand => Task::Expand,
        Cmd::Verify => Task::Verify,
    };
    let code = execute(task, &cli.config, cli.out.as_deref());
    ExitCode::from(code as u8)
}
