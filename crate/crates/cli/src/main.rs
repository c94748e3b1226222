use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use colding_cli::config::ExperimentConfig;
use colding_cli::criteria::Status;
use colding_cli::sweep::{self, Quantity};
use colding_cli::Report;

const EXIT_CRITERION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "colding", version, about = "N-space monotonic volume and W-entropy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the (N, lambda) grid and write the CSV and summary.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the acceptance criteria; exit 0 iff all applicable ones pass.
    Verify {
        config: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a single quantity over the grid.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        quantity: Quantity,
        /// Directory for sweep_<quantity>.csv; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("config error in {}:\n{e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn report(cfg: &ExperimentConfig) -> Result<Report, ExitCode> {
    colding_cli::run(cfg).map_err(|e| {
        eprintln!("config error:\n{e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn write(report: &Report, dir: &Path) -> Result<(), ExitCode> {
    match report.write(dir) {
        Ok((csv, summary)) => {
            println!("wrote {} and {}", csv.display(), summary.display());
            Ok(())
        }
        Err(e) => {
            eprintln!("cannot write report to {}: {e}", dir.display());
            Err(ExitCode::FAILURE)
        }
    }
}

fn print_failed_cells(report: &Report) {
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "cell N={} lambda={} failed: {}",
            row.big_n,
            row.lambda,
            row.error.as_deref().unwrap_or_default()
        );
    }
}

fn execute(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let report = report(&cfg)?;
            write(&report, &out)?;
            print_failed_cells(&report);
            Ok(if report.failed_cells() > 0 {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Verify { config, out } => {
            let cfg = load(&config)?;
            let report = report(&cfg)?;
            if let Some(dir) = out {
                write(&report, &dir)?;
            }
            print_failed_cells(&report);
            for v in &report.criteria {
                println!("{}", v.line());
            }
            let failed: Vec<u8> = report
                .criteria
                .iter()
                .filter(|v| v.status == Status::Fail)
                .map(|v| v.id)
                .collect();
            if failed.is_empty() {
                println!("all applicable criteria passed");
                return Ok(ExitCode::SUCCESS);
            }
            println!("failed criteria: {failed:?}");
            let numerical = report.criteria.iter().any(|v| v.numerical_error);
            Ok(ExitCode::from(if numerical { EXIT_NUMERICAL } else { EXIT_CRITERION }))
        }
        Command::Sweep {
            config,
            quantity,
            out,
        } => {
            let cfg = load(&config)?;
            let (flow, sol) = cfg.build().map_err(|e| {
                eprintln!("config error:\n{e}");
                ExitCode::from(EXIT_CONFIG)
            })?;
            let cells = sweep::sweep(quantity, &cfg, &flow, &sol);
            let result = match out {
                Some(dir) => std::fs::create_dir_all(&dir)
                    .map_err(csv::Error::from)
                    .and_then(|_| {
                        let path = dir.join(format!("sweep_{}.csv", quantity.name()));
                        let file = std::fs::File::create(&path)?;
                        sweep::write_csv(quantity, &cells, std::io::BufWriter::new(file))?;
                        println!("wrote {}", path.display());
                        Ok(())
                    }),
                None => sweep::write_csv(quantity, &cells, std::io::stdout().lock()),
            };
            if let Err(e) = result {
                eprintln!("cannot write sweep: {e}");
                return Err(ExitCode::FAILURE);
            }
            Ok(if cells.iter().any(|c| c.2.is_err()) {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("cannot configure {k} threads: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    execute(cli).unwrap_or_else(|code| code)
}
