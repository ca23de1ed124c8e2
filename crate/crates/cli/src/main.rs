use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polycontain_cli::{
    cmd_certify, cmd_check, cmd_reproduce, cmd_scale, cmd_verify, CliError, Method, Outcome, RunConfig, Table,
};

/// Decide containment of an H-polytope P in a V-polytope Q.
///
/// Exit codes: 0 contained, 1 not contained, 2 undecided, 3 input error,
/// 4 guard refusal, 5 geometric precondition, 6 certificate error,
/// 7 solver failure.
#[derive(Parser)]
#[command(name = "polycontain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Pair {
    /// H-polytope JSON file
    #[arg(long)]
    p: PathBuf,
    /// V-polytope JSON file
    #[arg(long)]
    q: PathBuf,
    /// Run the exact oracle even above the 10^6 vertex-pair budget
    #[arg(long)]
    force_oracle: bool,
    /// Also write the JSON result to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Pair {
    fn config(self) -> RunConfig {
        RunConfig { force_oracle: self.force_oracle, output: self.out, ..RunConfig::new(self.p, self.q) }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide P ⊆ Q and print the verdict JSON
    Check {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        /// Highest hierarchy order tried
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Seed for the witness search
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Largest r with r·P ⊆ Q certified at a fixed order (bisection)
    Scale {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
    },
    /// Write an SOS certificate (to --out, or stdout)
    Certify {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Check a certificate file against a polytope pair
    Verify {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Regenerate published numbers and compare
    Reproduce {
        #[arg(value_enum)]
        table: Table,
        /// Highest order included for table1
        #[arg(long, default_value_t = 2)]
        max_order: usize,
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
    },
}

fn print_json(outcome: &Outcome) {
    println!("{}", serde_json::to_string_pretty(&outcome.report).expect("json value"));
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Check { pair, method, order, seed } => {
            let cfg = RunConfig { method, order, seed, ..pair.config() };
            let outcome = cmd_check(&cfg)?;
            print_json(&outcome);
            Ok(outcome.exit_code)
        }
        Command::Scale { pair, order, precision } => {
            let cfg = RunConfig { order, precision, ..pair.config() };
            let outcome = cmd_scale(&cfg)?;
            print_json(&outcome);
            Ok(outcome.exit_code)
        }
        Command::Certify { pair, order } => {
            let cfg = RunConfig { order, ..pair.config() };
            let to_stdout = cfg.output.is_none();
            let (outcome, text) = cmd_certify(&cfg)?;
            if to_stdout {
                println!("{text}");
            } else {
                print_json(&outcome);
            }
            Ok(outcome.exit_code)
        }
        Command::Verify { pair, cert } => {
            let outcome = cmd_verify(&pair.config(), &cert)?;
            print_json(&outcome);
            Ok(outcome.exit_code)
        }
        Command::Reproduce { table, max_order, precision } => {
            let (outcome, text) = cmd_reproduce(table, max_order, precision)?;
            print!("{text}");
            Ok(outcome.exit_code)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
