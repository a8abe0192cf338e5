//! Monte-Carlo benchmark harness: sweeps one scenario knob, races the
//! estimators on shared measurement sets, and reports per-trial errors plus
//! per-(method, value) RMSE aggregates as plot-ready CSV.
//!
//! Trial `t` always uses seed `base_seed + t` regardless of the sweep
//! value, so curves across the sweep share their random draws (and, for a
//! measurement-count sweep, each larger set literally extends the smaller
//! one). That makes trends visible with far fewer trials than independent
//! sampling would need.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::baselines::{wcl, WclConfig};
use crate::error::{Error, Result};
use crate::localizer::{localize, GridSpec, LocalizationResult};
use crate::propagation::{generate_measurements, Scenario};

/// Estimators the harness can race. The declaration order is the canonical
/// report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "segreg")]
    Segreg,
    #[serde(rename = "wcl")]
    Wcl,
    #[serde(rename = "wcl-mod", alias = "wcl_mod")]
    WclMod,
    #[serde(rename = "wcl-genius", alias = "wcl_genius")]
    WclGenius,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Segreg,
        Method::Wcl,
        Method::WclMod,
        Method::WclGenius,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Segreg => "segreg",
            Method::Wcl => "wcl",
            Method::WclMod => "wcl-mod",
            Method::WclGenius => "wcl-genius",
        }
    }

    /// Accepts both the hyphenated file spelling and the underscore form.
    pub fn parse(name: &str) -> Option<Method> {
        match name {
            "segreg" => Some(Method::Segreg),
            "wcl" => Some(Method::Wcl),
            "wcl-mod" | "wcl_mod" => Some(Method::WclMod),
            "wcl-genius" | "wcl_genius" => Some(Method::WclGenius),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which scenario knob the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Measurements per trial; values must be positive integers.
    MeasurementCount,
    /// LOS shadowing deviation in dB.
    SigmaLos,
    /// NLOS shadowing deviation in dB.
    SigmaNlos,
}

/// A fully resolved benchmark: scenario, sweep, methods, and search grid.
#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub scenario: Scenario,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    /// Seeds per sweep point.
    pub trials: usize,
    pub base_seed: u64,
    /// Measurements per trial when the sweep varies something else.
    pub measurement_count: usize,
    pub methods: Vec<Method>,
    pub grid: GridSpec,
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidPlan { reason });
        if self.trials == 0 {
            return fail("trials must be >= 1".into());
        }
        if self.values.is_empty() {
            return fail("sweep value list is empty".into());
        }
        if self.methods.is_empty() {
            return fail("method list is empty".into());
        }
        if self.measurement_count == 0 {
            return fail("measurement count must be >= 1".into());
        }
        for &v in &self.values {
            if !v.is_finite() {
                return fail(format!("sweep value {v} is not finite"));
            }
            match self.sweep {
                SweepVariable::MeasurementCount => {
                    if v.fract() != 0.0 || v < 1.0 {
                        return fail(format!(
                            "measurement-count sweep values must be positive integers, got {v}"
                        ));
                    }
                }
                SweepVariable::SigmaLos | SweepVariable::SigmaNlos => {
                    if v < 0.0 {
                        return fail(format!("sigma sweep values must be >= 0, got {v}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The scenario and measurement count one sweep value induces.
    fn resolve(&self, value: f64) -> Result<(Scenario, usize)> {
        let truth = self.scenario.truth();
        match self.sweep {
            SweepVariable::MeasurementCount => Ok((self.scenario.clone(), value as usize)),
            SweepVariable::SigmaLos => {
                let truth = truth.with_sigmas(value, truth.sigma_nlos())?;
                Ok((self.scenario.with_truth(truth), self.measurement_count))
            }
            SweepVariable::SigmaNlos => {
                let truth = truth.with_sigmas(truth.sigma_los(), value)?;
                Ok((self.scenario.with_truth(truth), self.measurement_count))
            }
        }
    }
}

/// One trial of one method: the horizontal error and how long it took.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub sweep_value: f64,
    pub trial_seed: u64,
    pub rmse_m: f64,
    pub runtime_ms: f64,
}

/// RMSE over the successful trials of one (method, sweep value) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub method: Method,
    pub sweep_value: f64,
    pub trials: usize,
    pub rmse_m: f64,
}

/// A trial a method could not complete (excluded from its aggregate).
#[derive(Debug, Clone)]
pub struct FailedTrial {
    pub method: Method,
    pub sweep_value: f64,
    pub trial_seed: u64,
    pub message: String,
}

/// Everything a benchmark run produced.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    /// Per-trial records, ordered by (method, sweep value, seed).
    pub records: Vec<BenchRecord>,
    /// Per-cell RMSE over successful trials, same ordering.
    pub aggregates: Vec<AggregateRow>,
    pub failures: Vec<FailedTrial>,
}

fn run_method(
    method: Method,
    map: &crate::geometry::FootprintMap,
    measurements: &[crate::propagation::Measurement],
    grid: &GridSpec,
) -> Result<Point3<f64>> {
    match method {
        Method::Segreg => localize(map, measurements, grid).map(|r| r.s_hat),
        Method::Wcl => wcl(measurements, &WclConfig::plain()),
        Method::WclMod => wcl(measurements, &WclConfig::modified()),
        Method::WclGenius => wcl(measurements, &WclConfig::genius()),
    }
}

/// Runs the full sweep. Deterministic given the plan, except for the
/// wall-clock `runtime_ms` column.
pub fn run_bench(plan: &BenchPlan) -> Result<BenchOutcome> {
    plan.validate()?;
    let map = plan.scenario.map().footprint_map();
    let source = plan.scenario.source();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for &value in &plan.values {
        let (scenario, count) = plan.resolve(value)?;
        for trial in 0..plan.trials {
            let trial_seed = plan.base_seed + trial as u64;
            let measurements = generate_measurements(&scenario, count, trial_seed);
            for &method in &plan.methods {
                let start = Instant::now();
                match run_method(method, &map, &measurements, &plan.grid) {
                    Ok(estimate) => {
                        let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
                        let rmse_m =
                            (estimate.x - source.x).hypot(estimate.y - source.y);
                        records.push(BenchRecord {
                            method,
                            sweep_value: value,
                            trial_seed,
                            rmse_m,
                            runtime_ms,
                        });
                    }
                    Err(err) => failures.push(FailedTrial {
                        method,
                        sweep_value: value,
                        trial_seed,
                        message: err.to_string(),
                    }),
                }
            }
        }
    }
    let key = |m: Method, v: f64, s: u64| (m, v, s);
    records.sort_by(|a, b| {
        let (am, av, asd) = key(a.method, a.sweep_value, a.trial_seed);
        let (bm, bv, bsd) = key(b.method, b.sweep_value, b.trial_seed);
        am.cmp(&bm).then(av.total_cmp(&bv)).then(asd.cmp(&bsd))
    });
    failures.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.sweep_value.total_cmp(&b.sweep_value))
            .then(a.trial_seed.cmp(&b.trial_seed))
    });
    let aggregates = aggregate_from_records(&records);
    Ok(BenchOutcome {
        records,
        aggregates,
        failures,
    })
}

/// Reduces per-trial records to per-(method, value) RMSE:
/// `sqrt(mean of squared horizontal errors)`. Works on freshly produced
/// records and on records read back from CSV alike.
pub fn aggregate_from_records(records: &[BenchRecord]) -> Vec<AggregateRow> {
    let mut cells: Vec<(Method, f64, usize, f64)> = Vec::new();
    for r in records {
        match cells
            .iter_mut()
            .find(|(m, v, _, _)| *m == r.method && v.to_bits() == r.sweep_value.to_bits())
        {
            Some((_, _, n, sum_sq)) => {
                *n += 1;
                *sum_sq += r.rmse_m * r.rmse_m;
            }
            None => cells.push((r.method, r.sweep_value, 1, r.rmse_m * r.rmse_m)),
        }
    }
    let mut rows: Vec<AggregateRow> = cells
        .into_iter()
        .map(|(method, sweep_value, trials, sum_sq)| AggregateRow {
            method,
            sweep_value,
            trials,
            rmse_m: (sum_sq / trials as f64).sqrt(),
        })
        .collect();
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.sweep_value.total_cmp(&b.sweep_value))
    });
    rows
}

pub const BENCH_CSV_HEADER: [&str; 5] =
    ["method", "sweep_value", "trial_seed", "rmse_m", "runtime_ms"];

/// Writes per-trial records as CSV. Floats are written shortest
/// round-trip, so write-then-read is the identity.
pub fn write_records<P: AsRef<Path>>(path: P, records: &[BenchRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", BENCH_CSV_HEADER.join(","))?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.method, r.sweep_value, r.trial_seed, r.rmse_m, r.runtime_ms
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a record CSV written by [`write_records`]. Malformed rows report
/// their 1-based line number.
pub fn read_records<P: AsRef<Path>>(path: P) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    {
        let headers = reader.headers()?;
        if headers.iter().ne(BENCH_CSV_HEADER) {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header '{}', got '{}'",
                    BENCH_CSV_HEADER.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
    }
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 5 fields, got {}", record.len()),
            });
        }
        let method = Method::parse(&record[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown method '{}'", &record[0]),
        })?;
        let number = |idx: usize, name: &str| -> Result<f64> {
            let raw = &record[idx];
            let value: f64 = raw.parse().map_err(|_| Error::Parse {
                line,
                message: format!("field '{name}': invalid number '{raw}'"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("field '{name}': non-finite value '{raw}'"),
                });
            }
            Ok(value)
        };
        let trial_seed: u64 = record[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("field 'trial_seed': invalid integer '{}'", &record[2]),
        })?;
        records.push(BenchRecord {
            method,
            sweep_value: number(1, "sweep_value")?,
            trial_seed,
            rmse_m: number(3, "rmse_m")?,
            runtime_ms: number(4, "runtime_ms")?,
        });
    }
    Ok(records)
}

/// On-disk form of a single localization or baseline result.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ResultFile {
    pub method: String,
    pub s_hat: [f64; 3],
    /// Present for the grid search only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<LocalizationDetails>,
}

/// Grid-search diagnostics attached to a [`ResultFile`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LocalizationDetails {
    /// Winning per-sector critical angles, radians.
    pub sv_hats_rad: Vec<f64>,
    /// Refit coefficients `[a0, b0, c0, a1, b1, c1]`.
    pub phi_hat: [f64; 6],
    pub total_residual: f64,
    pub per_sector_residuals: Vec<f64>,
    pub candidate_count: usize,
    pub excluded_count: usize,
    pub underdetermined: bool,
}

impl ResultFile {
    pub fn from_localization(result: &LocalizationResult) -> Self {
        Self {
            method: Method::Segreg.name().to_string(),
            s_hat: [result.s_hat.x, result.s_hat.y, result.s_hat.z],
            details: Some(LocalizationDetails {
                sv_hats_rad: result.sv_hats.iter().map(|a| a.radians()).collect(),
                phi_hat: result.phi_hat.as_array(),
                total_residual: result.total_residual,
                per_sector_residuals: result.per_sector_residuals.clone(),
                candidate_count: result.candidate_count,
                excluded_count: result.excluded_count,
                underdetermined: result.underdetermined,
            }),
        }
    }

    pub fn from_estimate(method: Method, estimate: Point3<f64>) -> Self {
        Self {
            method: method.name().to_string(),
            s_hat: [estimate.x, estimate.y, estimate.z],
            details: None,
        }
    }

    pub fn read<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn write<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.flush()?;
        Ok(())
    }
}

/// On-disk form of a [`BenchPlan`]. Optional knobs fall back to the
/// defaults the headline experiment uses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub scenario: crate::propagation::ScenarioFile,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_measurement_count")]
    pub measurement_count: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_grid_spacing")]
    pub grid_spacing: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_spacing: Option<f64>,
    #[serde(default = "default_sv_candidate_count")]
    pub sv_candidate_count: usize,
}

fn default_trials() -> usize {
    50
}

fn default_measurement_count() -> usize {
    200
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_grid_spacing() -> f64 {
    5.0
}

fn default_sv_candidate_count() -> usize {
    31
}

impl PlanFile {
    pub fn to_plan(&self) -> Result<BenchPlan> {
        let scenario = self.scenario.to_scenario()?;
        let grid = GridSpec::new(
            self.grid_spacing,
            scenario.map().half_side(),
            crate::segreg::sv_candidate_grid(self.sv_candidate_count.max(1)),
            self.refine_spacing,
        )?;
        let plan = BenchPlan {
            scenario,
            sweep: self.sweep,
            values: self.values.clone(),
            trials: self.trials,
            base_seed: self.base_seed,
            measurement_count: self.measurement_count,
            methods: self.methods.clone(),
            grid,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn read<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    pub fn write<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut out, self)?;
        out.flush()?;
        Ok(())
    }
}
