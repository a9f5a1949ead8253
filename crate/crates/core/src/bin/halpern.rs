use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use halpern_sopt::harness::{self, ExperimentConfig, TableRow};
use halpern_sopt::{Algorithm, ObjectiveKind, StepSchedule};

#[derive(Parser)]
#[command(
    name = "halpern",
    version,
    about = "Halpern-anchored stochastic optimization over fixed point sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trace.csv, summary.csv and report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a power-law step-size pair against the admissibility conditions.
    Validate {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 1.0)]
        scale_alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        scale_inner: f64,
    },
    /// Generate a random instance and write it as JSON.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        objective: ObjectiveKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the sampler x exponent-pair grid and print the result table.
    Table {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> halpern_sopt::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = harness::run_experiment(&cfg, workers)?;
            let paths = harness::emit_csv(&report, &out)?;
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Command::Validate {
            a,
            b,
            algorithm,
            scale_alpha,
            scale_inner,
        } => {
            let s = StepSchedule::new(a, b, scale_alpha, scale_inner);
            match s.validate(algorithm) {
                Ok(()) => {
                    println!("ok: (a, b) = ({a}, {b}) is admissible for the {algorithm} algorithm")
                }
                Err(violations) => {
                    println!("rejected: (a, b) = ({a}, {b}) for the {algorithm} algorithm");
                    for v in violations {
                        println!("  - {v}");
                    }
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Gen {
            seed,
            d,
            i,
            k,
            objective,
            out,
        } => {
            let p = harness::generate_problem(seed, d, i, k, objective)?;
            harness::save_problem(&p, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Table { config, workers } => {
            let cfg = ExperimentConfig::load(&config)?;
            let grid = harness::run_table_grid(&cfg, workers)?;
            let rows: Vec<TableRow<'_>> = grid
                .iter()
                .map(|(label, report)| TableRow {
                    label: label.clone(),
                    report,
                })
                .collect();
            print!("{}", harness::render_table(&rows));
        }
    }
    Ok(ExitCode::SUCCESS)
}
