use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gdm_obstacle_cli::commands::{cmd_converge, cmd_diagnose, cmd_oracle, cmd_run, load_config, CliError, Overrides};

#[derive(Parser)]
#[command(name = "gdm-obstacle", version, about = "Coupled obstacle / reaction-diffusion solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once and write snapshots, residual log and energy report.
    Run(Common),
    /// Self-convergence study over refinement levels.
    Converge(Common),
    /// Coercivity, consistency, limit-conformity and energy diagnostics per level.
    Diagnose(Common),
    /// Compare PSOR with active-set enumeration on one implicit step.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    /// INI configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides [output] dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of refinement levels (overrides [mesh] levels).
    #[arg(long, value_name = "K")]
    levels: Option<usize>,
    /// Seed for randomised validation (overrides [run] seed).
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::Run(c) => ("run", c),
        Command::Converge(c) => ("converge", c),
        Command::Diagnose(c) => ("diagnose", c),
        Command::Oracle(c) => ("oracle", c),
    };
    let overrides = Overrides { out: common.out.clone(), levels: common.levels, seed: common.seed };
    let cfg = load_config(&common.config, &overrides)?;
    match name {
        "run" => {
            let s = cmd_run(&cfg)?;
            println!(
                "run: {} steps, {} snapshots, max sign residual {:e}, max complementarity residual {:e}",
                s.steps, s.snapshots, s.max_residual_sign, s.max_residual_complementarity
            );
        }
        "converge" => {
            let s = cmd_converge(&cfg)?;
            for r in &s.rows[..s.rows.len() - 1] {
                let e = r.errors.as_array();
                println!("level {} (n = {}): errors {:.3e} {:.3e} {:.3e} {:.3e}", r.level, r.n, e[0], e[1], e[2], e[3]);
            }
            for c in &s.checks {
                println!("{}: {} ({:.3e} vs {:.3e})", c.name, c.status(), c.measured, c.threshold);
            }
        }
        "diagnose" => {
            let s = cmd_diagnose(&cfg)?;
            for c in &s.checks {
                println!("{}: {} ({:.3e} vs {:.3e})", c.name, c.status(), c.measured, c.threshold);
            }
        }
        _ => {
            let r = cmd_oracle(&cfg)?;
            println!("oracle: PSOR discrepancy {:e}, stepper discrepancy {:e}", r.discrepancy, r.stepper_discrepancy);
        }
    }
    println!("output written to {}", cfg.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
