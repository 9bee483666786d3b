use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magdip::{exit, load_scenario, oracle_check, run_scenario, RunOptions};

/// Field-induced magnetic dipole-dipole coupling between two multi-level dipoles.
#[derive(Parser)]
#[command(name = "magdip", version)]
struct Cli {
    /// Report all quantities in natural units (mu0 = hbar = c = 1).
    #[arg(long, global = true)]
    dimensionless: bool,

    /// Worker threads for sweep points.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario and write CSV, matrix and manifest files.
    Run {
        scenario: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Parse and validate a scenario without computing anything.
    Validate { scenario: PathBuf },
    /// Compare closed forms with their quadrature oracles and print a table.
    OracleCheck { scenario: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { dimensionless: cli.dimensionless, threads: cli.threads.map(usize::from) };
    let code = match &cli.command {
        Command::Validate { scenario } => match load_scenario(scenario) {
            Ok(s) => {
                let sweep = s.sweep.as_ref().map_or("none".to_string(), |sw| format!("{} x {}", sw.axis.name(), sw.points));
                let outputs: Vec<&str> = s.outputs.iter().map(|o| o.name()).collect();
                println!(
                    "{}: ok ({}x{} levels, sweep {}, outputs {})",
                    scenario.display(),
                    s.dipole1.spec.dim(),
                    s.dipole2.spec.dim(),
                    sweep,
                    outputs.join(",")
                );
                exit::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit::VALIDATION
            }
        },
        Command::Run { scenario, out } => match load_scenario(scenario).map_err(Into::into).and_then(|s| run_scenario(&s, out, &opts)) {
            Ok(summary) => {
                println!("{} points, {} files written to {}", summary.points, summary.files.len() + 1, out.display());
                if summary.flagged_oracle_rows > 0 {
                    eprintln!("warning: {} oracle rows flagged (see oracle_status columns)", summary.flagged_oracle_rows);
                }
                if let Some(slope) = summary.dicke_slope {
                    println!("dicke slope {slope:.4}");
                }
                exit::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::OracleCheck { scenario } => match load_scenario(scenario).map_err(Into::into).and_then(|s| oracle_check(&s, &opts)) {
            Ok(report) => {
                print!("{}", report.render());
                report.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
