use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use superball_cli::commands::{self, CmdOutput, DEFAULT_SEED, EXIT_USAGE};

/// Locally densest lattice packings of three-dimensional superballs:
/// density evaluation, packing verification, random-restart search, the
/// circulant family, and rigorous existence certificates.
#[derive(Parser)]
#[command(name = "superball", version)]
struct Cli {
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density, |det|, and neighbor count of a basis file
    Density {
        /// Basis file: JSON {"matrix":[9 floats],"p":…}, a search-result
        /// JSON array, or 9 whitespace-separated floats
        input: PathBuf,
        /// Norm exponent (overrides any p stored in the file)
        #[arg(long)]
        p: Option<f64>,
        /// Verification tolerance
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Finite packing verification of a basis file
    Verify {
        input: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Random-restart Newton search for locally densest lattices
    Search {
        /// Neighbor case: 1, 2, or 3
        #[arg(long)]
        case: u8,
        /// Norm exponent
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 500)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Worker threads for the restarts
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Tabulate the circulant family over a p grid (CSV)
    Family {
        /// Single value or inclusive grid `start:step:end`
        #[arg(long)]
        p: String,
    },
    /// Interval existence certificates over a p range (JSONL)
    Certify {
        /// Schedule CSV with rows `p0,x0,y0,z0,eps,peps`
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Build the schedule adaptively (halving ε on failure)
        #[arg(long)]
        auto: bool,
        /// Print the classic fixed-step schedule as CSV instead of
        /// certifying (regenerates the centers)
        #[arg(long)]
        emit_classic: bool,
        /// p range as `start:step:end` (default 1:0.01:1.58)
        #[arg(long)]
        p: Option<String>,
    },
    /// Reproduce the regime density tables (CSV)
    Table {
        /// 1 = first regime (the family), 2 = second regime
        #[arg(long)]
        regime: u8,
    },
}

fn run(cli: Cli) -> anyhow::Result<CmdOutput> {
    match cli.command {
        Command::Density { input, p, tol } => commands::cmd_density(&input, p, tol),
        Command::Verify { input, p, tol } => commands::cmd_verify(&input, p, tol),
        Command::Search {
            case,
            p,
            restarts,
            seed,
            jobs,
        } => commands::cmd_search(case, p, restarts, seed, jobs),
        Command::Family { p } => commands::cmd_family(&p),
        Command::Certify {
            schedule,
            auto,
            emit_classic,
            p,
        } => {
            let range = match p {
                None => None,
                Some(spec) => {
                    let parts: Vec<&str> = spec.split(':').collect();
                    if parts.len() != 3 {
                        anyhow::bail!("--p for certify must be `start:step:end`");
                    }
                    let start: f64 = parts[0].parse()?;
                    let step: f64 = parts[1].parse()?;
                    let end: f64 = parts[2].parse()?;
                    Some((start, end, step))
                }
            };
            if emit_classic {
                let (start, end, _) = range.unwrap_or((1.0, 1.58, 0.01));
                Ok(commands::CmdOutput {
                    text: commands::emit_step_schedule(start, end)?,
                    code: 0,
                    warnings: Vec::new(),
                })
            } else {
                commands::cmd_certify(schedule.as_deref(), auto, range)
            }
        }
        Command::Table { regime } => commands::cmd_table(regime),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap's own help/version paths exit 0
            if err.use_stderr() {
                eprintln!("{err}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    let out_path = cli.out.clone();
    match run(cli) {
        Ok(output) => {
            for warning in &output.warnings {
                eprintln!("warning: {warning}");
            }
            let write_result = match &out_path {
                Some(path) => std::fs::write(path, output.text.as_bytes())
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(output.text.as_bytes())
                    .map_err(|e| format!("cannot write stdout: {e}")),
            };
            if let Err(msg) = write_result {
                eprintln!("error: {msg}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
            ExitCode::from(output.code as u8)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
