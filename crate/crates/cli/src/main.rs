use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tsch_ls_cli::report::{render, simulate, RunOptions};
use tsch_ls_cli::scenario::load_scenario;
use tsch_ls_cli::sweep::{parse_values, sweep, SweepParam};
use tsch_ls_cli::{table1, CliError, Format};

#[derive(Parser)]
#[command(
    name = "tsch-ls",
    version,
    about = "TSCH listening suspension simulator and power model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the reference power table and check it against the embedded values.
    Table1 {
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// Simulate one scenario file.
    Run {
        scenario: PathBuf,
        /// Write a JSON-lines event trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Append the analytic prediction and relative error.
        #[arg(long)]
        compare: bool,
        /// Add the platform baseline drain to reported powers.
        #[arg(long)]
        include_baseline: bool,
        /// Override the channel seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Vary one parameter of a scenario file.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, default_value = "")]
        values: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Table1 { format } => {
            let rows = table1::compute()?;
            let out = table1::render(&rows, format);
            let bad = table1::mismatches(&rows);
            if bad.is_empty() {
                Ok(out)
            } else {
                print!("{out}");
                Err(CliError::GoldenMismatch(bad))
            }
        }
        Command::Run {
            scenario,
            trace,
            compare,
            include_baseline,
            seed,
            format,
        } => {
            let mut sc = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                sc.channel.seed = seed;
            }
            let report = match trace {
                Some(path) => {
                    let io_err = |source| CliError::Io {
                        path: path.clone(),
                        source,
                    };
                    let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
                    let report = simulate(&sc, Some(&mut out))?;
                    out.flush().map_err(io_err)?;
                    report
                }
                None => simulate(&sc, None)?,
            };
            let opts = RunOptions {
                compare,
                include_baseline,
                format,
            };
            Ok(render(&sc, &report, &opts))
        }
        Command::Sweep {
            scenario,
            param,
            values,
            seed,
            format,
        } => {
            let mut sc = load_scenario(&scenario)?;
            if let Some(seed) = seed {
                sc.channel.seed = seed;
            }
            sweep(&sc, param, &parse_values(&values)?, format)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
