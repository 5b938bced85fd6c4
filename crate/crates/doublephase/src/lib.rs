//! Command-line driver for `doublephase-core`: config files, key-value
//! reports and CSV dumps.
//!
//! Exit codes of [`run`]: 0 success, 1 hypothesis or property violation,
//! 2 solver non-convergence, 3 config, parse or IO error.

pub mod commands;
pub mod config;
pub mod dump;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{CommandError, Status};
use crate::config::Config;
use crate::report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "doublephase", version, about = "Double-phase problems with variable exponents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Path to the configuration file.
    #[arg(short, long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct OptionalConfigArg {
    /// Path to a configuration file; the built-in worked example otherwise.
    #[arg(short, long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the standing hypotheses on the configured fields.
    Check(ConfigArg),
    /// Analytic constants of the existence argument.
    Constants(ConfigArg),
    /// Norm-modular relations on seeded random fields.
    Props(ConfigArg),
    /// Solve the convective problem.
    #[command(name = "solve-p")]
    SolveP(ConfigArg),
    /// Minimize the parametric energy from the cut-off start.
    #[command(name = "solve-plambda")]
    SolvePlambda(ConfigArg),
    /// Ginzburg-Landau type problem.
    Gl(ConfigArg),
    /// Reproduce the published worked-example figures.
    #[command(name = "example41")]
    Example41(OptionalConfigArg),
}

fn dispatch(cmd: &Command, out: &mut Report) -> Result<Status, CommandError> {
    let load = |arg: &ConfigArg| Config::load(&arg.config);
    match cmd {
        Command::Check(a) => commands::check(&load(a)?, out),
        Command::Constants(a) => commands::constants_cmd(&load(a)?, out),
        Command::Props(a) => commands::props(&load(a)?, out),
        Command::SolveP(a) => commands::solve_p(&load(a)?, out),
        Command::SolvePlambda(a) => commands::solve_plambda(&load(a)?, out),
        Command::Gl(a) => commands::gl(&load(a)?, out),
        Command::Example41(a) => {
            let cfg = match &a.config {
                Some(path) => Config::load(path)?,
                None => Config::worked_example(),
            };
            commands::example41(&cfg, out)
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand, prints the
/// report on stdout and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut out = Report::new();
    let result = dispatch(&cli.command, &mut out);
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = lock.write_all(out.render().as_bytes());
    let _ = lock.flush();
    match result {
        Ok(Status::Ok) => EXIT_OK,
        Ok(Status::Violation) => EXIT_VIOLATION,
        Ok(Status::NonConvergence) => EXIT_NONCONVERGENCE,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
