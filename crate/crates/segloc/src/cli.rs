//! The `segloc` command line: simulate, localize, baseline, bench.
//!
//! Exit codes: 0 on success, 1 on runtime failure (bad file contents,
//! estimator errors), 2 on usage errors (unknown flags or subcommands).
//!
//! `localize` is deliberately blind: it loads the scenario's footprints
//! only (heights are discarded unread) and strips every ground-truth LOS
//! label before the search sees the measurements.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::baselines::{wcl, WclConfig};
use crate::bench::{run_bench, write_records, Method, PlanFile, ResultFile};
use crate::error::Result;
use crate::localizer::{localize_with_tensor, GridSpec};
use crate::propagation::{
    generate_measurements, read_measurements, write_measurements, ScenarioFile,
};
use crate::segreg::sv_candidate_grid;

#[derive(Parser)]
#[command(
    name = "segloc",
    about = "RSS source localization over 2D building maps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize RSS measurements for a scenario (heights required).
    Simulate {
        /// Scenario JSON path.
        #[arg(long)]
        scenario: PathBuf,
        /// Number of measurements.
        #[arg(long)]
        count: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output measurement CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the source position from blind measurements.
    Localize {
        /// Scenario JSON path; only footprints are used.
        #[arg(long)]
        scenario: PathBuf,
        /// Measurement CSV path; LOS labels are ignored.
        #[arg(long)]
        measurements: PathBuf,
        /// Coarse candidate grid spacing in meters.
        #[arg(long, default_value_t = 5.0)]
        grid_spacing: f64,
        /// Optional fine grid spacing for a second pass around the winner.
        #[arg(long)]
        refine: Option<f64>,
        /// Number of candidate critical angles spanning [0, 90] degrees.
        #[arg(long, default_value_t = 31)]
        nb: usize,
        /// Write the full per-candidate residual tensor as JSON.
        #[arg(long)]
        dump_tensor: Option<PathBuf>,
        /// Output result JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Weighted-centroid baseline estimates.
    Baseline {
        /// Which baseline to run.
        #[arg(long, value_enum)]
        method: BaselineMethod,
        /// Measurement CSV path.
        #[arg(long)]
        measurements: PathBuf,
        /// Output result JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo sweep from a plan file; per-trial records go to CSV.
    Bench {
        /// Plan JSON path.
        #[arg(long)]
        plan: PathBuf,
        /// Output record CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaselineMethod {
    /// Linear-power weighted centroid.
    Wcl,
    /// Compressed weights (exponent 0.6).
    WclMod,
    /// Plain weights over ground-truth LOS rows only.
    WclGenius,
}

impl BaselineMethod {
    fn config(self) -> WclConfig {
        match self {
            BaselineMethod::Wcl => WclConfig::plain(),
            BaselineMethod::WclMod => WclConfig::modified(),
            BaselineMethod::WclGenius => WclConfig::genius(),
        }
    }

    fn method(self) -> Method {
        match self {
            BaselineMethod::Wcl => Method::Wcl,
            BaselineMethod::WclMod => Method::WclMod,
            BaselineMethod::WclGenius => Method::WclGenius,
        }
    }
}

/// Parses `argv` and runs the requested subcommand, returning the process
/// exit code instead of exiting (keeps the CLI testable in-process).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            scenario,
            count,
            seed,
            out,
        } => {
            let scenario = ScenarioFile::read(scenario)?.to_scenario()?;
            let set = generate_measurements(&scenario, count, seed);
            write_measurements(out, &set)
        }
        Command::Localize {
            scenario,
            measurements,
            grid_spacing,
            refine,
            nb,
            dump_tensor,
            out,
        } => {
            let map = ScenarioFile::read(scenario)?.to_footprint_map()?;
            let mut set = read_measurements(measurements)?;
            for m in &mut set {
                m.truth_los = None; // the estimator never sees ground truth
            }
            let grid = GridSpec::new(
                grid_spacing,
                map.half_side(),
                sv_candidate_grid(nb.max(1)),
                refine,
            )?;
            let (result, tensor) =
                localize_with_tensor(&map, &set, &grid, dump_tensor.is_some())?;
            if result.underdetermined {
                eprintln!(
                    "warning: only {} measurements; the fit is underdetermined",
                    set.len()
                );
            }
            if let (Some(path), Some(tensor)) = (dump_tensor, tensor) {
                let file = std::fs::File::create(path)?;
                serde_json::to_writer(std::io::BufWriter::new(file), &tensor)?;
            }
            ResultFile::from_localization(&result).write(out)
        }
        Command::Baseline {
            method,
            measurements,
            out,
        } => {
            let set = read_measurements(measurements)?;
            let estimate = wcl(&set, &method.config())?;
            ResultFile::from_estimate(method.method(), estimate).write(out)
        }
        Command::Bench { plan, out } => {
            let plan = PlanFile::read(plan)?.to_plan()?;
            let outcome = run_bench(&plan)?;
            if !outcome.failures.is_empty() {
                eprintln!(
                    "warning: {} trial(s) failed and were excluded from aggregates",
                    outcome.failures.len()
                );
            }
            write_records(out, &outcome.records)?;
            println!("method,sweep_value,trials,rmse_m");
            for row in &outcome.aggregates {
                println!(
                    "{},{},{},{}",
                    row.method, row.sweep_value, row.trials, row.rmse_m
                );
            }
            Ok(())
        }
    }
}
