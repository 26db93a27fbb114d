//! `adtnet`: command-line front end for ADT network coding.
//!
//! Exit codes: 0 on success or a feasible result, 2 on an infeasible
//! result, 1 on usage, parse and semantic errors.

mod commands;
mod fixtures;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use adtnet_core::erasim::Mode;
use adtnet_core::mincut::Method;
use adtnet_core::netmodel::ConnectionClass;
use clap::{Args, Parser, Subcommand};

use report::{Format, Outcome};

#[derive(Parser, Debug)]
#[command(name = "adtnet", version, about = "Algebraic network coding on deterministic relay networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Override the field with GF(q).
    #[arg(long)]
    pub q: Option<u32>,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check structure and pipeline gating.
    Validate {
        /// Network file.
        file: PathBuf,
        /// Require an acyclic port graph (default unless the file sets `delay`).
        #[arg(long, conflicts_with = "delay")]
        r#static: bool,
        /// Allow cycles; they are handled with unit link delay.
        #[arg(long)]
        delay: bool,
    },
    /// Min-cut between a source and a destination (all pairs by default).
    Mincut {
        /// Network file.
        file: PathBuf,
        /// Source node name.
        #[arg(long)]
        source: Option<String>,
        /// Destination node name.
        #[arg(long)]
        dest: Option<String>,
        /// `enumeration`, `algebraic` or `auto`.
        #[arg(long, default_value = "auto", value_parser = parse_method)]
        method: Method,
        /// Random codes tried by the algebraic method.
        #[arg(long, default_value_t = adtnet_core::mincut::DEFAULT_TRIALS)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Find a code for the file's connection set.
    Code {
        /// Network file.
        file: PathBuf,
        /// Re-tag the connection set with this class.
        #[arg(long, value_parser = parse_class)]
        class: Option<ConnectionClass>,
        /// Random codes to draw.
        #[arg(long, default_value_t = adtnet_core::codecon::DEFAULT_TRIALS)]
        trials: usize,
        /// Write the assignment here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check an assignment file against the file's connection set.
    Verify {
        /// Network file.
        file: PathBuf,
        /// Assignment file written by `code --out`.
        assignment: PathBuf,
        /// Override the field with GF(q).
        #[arg(long)]
        q: Option<u32>,
    },
    /// Time-average min-cuts and static solutions under link failures.
    Erasure {
        /// Network file.
        file: PathBuf,
        /// `exact` or `monte-carlo`.
        #[arg(long, default_value = "exact", value_parser = parse_mode)]
        mode: Mode,
        /// Monte Carlo samples.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Independent failure probability per edge, replacing the file's model.
        #[arg(long)]
        iid: Option<f64>,
        /// Also search for one code that survives every failure pattern.
        #[arg(long)]
        r#static: bool,
        /// Random draws for the static search.
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// System matrix over GF(q)(D) with unit link delay.
    Delay {
        /// Network file.
        file: PathBuf,
        /// Assignment file; a random code is drawn when absent.
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Series order for the expansion (default: twice the port count).
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// List, print or write the bundled example networks.
    Fixtures {
        /// Print one fixture.
        #[arg(long, conflicts_with = "out")]
        show: Option<String>,
        /// Write all fixtures and their README into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_class(s: &str) -> Result<ConnectionClass, String> {
    s.parse()
}

fn run(cli: Cli) -> Result<Outcome, commands::CliError> {
    match cli.command {
        Command::Validate { file, r#static, delay } => {
            let delay = if r#static {
                Some(false)
            } else if delay {
                Some(true)
            } else {
                None
            };
            commands::validate(&file, delay)
        }
        Command::Mincut { file, source, dest, method, trials, common } => {
            commands::mincut(&file, source.as_deref(), dest.as_deref(), method, trials, &common)
        }
        Command::Code { file, class, trials, out, common } => commands::code(&file, class, trials, out.as_deref(), &common),
        Command::Verify { file, assignment, q } => commands::verify(&file, &assignment, q),
        Command::Erasure { file, mode, samples, iid, r#static, trials, common } => {
            commands::erasure(&file, mode, samples, iid, r#static, trials, &common)
        }
        Command::Delay { file, assignment, order, common } => commands::delay(&file, assignment.as_deref(), order, &common),
        Command::Fixtures { show, out } => fixtures::run(show.as_deref(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let format = cli.format;
    let name = cli.command.name();
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.render(format, name));
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            if format == Format::Json {
                print!("{}", report::error_envelope(name, &e.to_string()));
            }
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Mincut { .. } => "mincut",
            Command::Code { .. } => "code",
            Command::Verify { .. } => "verify",
            Command::Erasure { .. } => "erasure",
            Command::Delay { .. } => "delay",
            Command::Fixtures { .. } => "fixtures",
        }
    }
}
