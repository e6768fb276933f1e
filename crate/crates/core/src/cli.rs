//! Command-line front end: `synth`, `run`, `sweep` and `report`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::engine::{run_scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::population::{build_population, load_county_table, read_snapshot, write_snapshot, SynthesisParams};
use crate::report::{self, SummaryRow, AGGREGATE_FILE, SUMMARY_FILE};
use crate::scenario::load_scenario;

#[derive(Debug, Parser)]
#[command(name = "episim", version, about = "Seeded individual-based SIR simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a synthetic population from a county table.
    Synth {
        county_table: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        scale: f64,
        #[arg(long, default_value_t = 2020)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run one scenario against a population snapshot.
    Run {
        snapshot: PathBuf,
        scenario: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a scenario for consecutive seeds starting at the scenario seed.
    Sweep {
        snapshot: PathBuf,
        scenario: PathBuf,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the merged summary of finished runs.
    Report {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

/// Runs the CLI and returns the process exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth { county_table, scale, seed, out } => {
            let profiles = load_county_table(&county_table)?;
            let params = SynthesisParams { scale, seed, ..SynthesisParams::default() };
            let pop = build_population(&profiles, &params)?;
            write_snapshot(&pop, &out)?;
            println!(
                "{} people, {} households, {} sites -> {}",
                pop.len(),
                pop.households.len(),
                pop.sites.len(),
                out.display()
            );
            Ok(())
        }
        Command::Run { snapshot, scenario, out } => {
            let cfg = load_scenario(&scenario)?;
            let pop = read_snapshot(&snapshot)?;
            let result = run_scenario(&pop, &cfg)?;
            report::write_run(&result, &out)?;
            print!("{}", report::format_table(&[SummaryRow::from_result(&result)]));
            Ok(())
        }
        Command::Sweep { snapshot, scenario, seeds, out } => {
            let cfg = load_scenario(&scenario)?;
            let pop = read_snapshot(&snapshot)?;
            let rows = sweep(&pop, &cfg, seeds, &out)?;
            report::write_summary(&rows, out.join(SUMMARY_FILE))?;
            report::write_aggregate(&rows, out.join(AGGREGATE_FILE))?;
            print!("{}", report::format_table(&rows));
            Ok(())
        }
        Command::Report { dirs } => {
            let mut rows = Vec::new();
            for dir in &dirs {
                rows.extend(report::read_summary(dir.join(SUMMARY_FILE))?);
            }
            print!("{}", report::format_table(&rows));
            Ok(())
        }
    }
}

fn sweep(
    pop: &crate::population::Population,
    cfg: &ScenarioConfig,
    seeds: u64,
    out: &Path,
) -> Result<Vec<SummaryRow>> {
    if seeds == 0 {
        return Err(Error::invalid("seeds", "must be at least 1"));
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    (cfg.seed..cfg.seed + seeds)
        .into_par_iter()
        .map(|seed| {
            let cfg = ScenarioConfig { seed, ..cfg.clone() };
            let result = run_scenario(pop, &cfg)?;
            report::write_run(&result, out.join(format!("seed-{seed}")))?;
            Ok(SummaryRow::from_result(&result))
        })
        .collect()
}
