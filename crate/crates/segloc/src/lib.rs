//! RSS source localization over 2D building maps.
//!
//! `segloc` synthesizes received-signal-strength measurements from aerial
//! receivers over a map of convex building footprints (with exact
//! line-of-sight ground truth), then localizes a non-cooperative ground
//! source by segmented regression: every candidate grid point is scored by
//! how well a piecewise LOS/NLOS path-loss model can explain the
//! measurements, with the LOS/NLOS split itself optimized per azimuthal
//! sector through a critical-elevation-angle scan. Weighted-centroid
//! baselines and a Monte-Carlo benchmark harness round out the toolkit.
//!
//! ## Start with the examples
//!
//! ```text
//! examples/
//! ├── synthesize.rs      # build a scenario, simulate measurements, save CSV
//! ├── line_of_sight.rs   # occlusion geometry: clipping, shadows, labels
//! ├── sectorize.rs       # azimuthal sectors around a presumed source
//! ├── sector_fit.rs      # one sector's critical-angle scan, step by step
//! ├── localize.rs        # the full grid search on a noisy scenario
//! ├── baselines.rs       # weighted centroids vs the grid search
//! └── bench_sweep.rs     # a small Monte-Carlo RMSE sweep, CSV output
//! ```
//!
//! ```bash
//! cargo run --release --example synthesize
//! cargo run --release --example line_of_sight
//! cargo run --release --example sectorize
//! cargo run --release --example sector_fit
//! cargo run --release --example localize
//! cargo run --release --example baselines
//! cargo run --release --example bench_sweep
//! ```
//!
//! The same capabilities ship as a thin binary (`segloc simulate`,
//! `segloc localize`, `segloc baseline`, `segloc bench`) operating on JSON
//! scenarios, CSV measurement sets, and JSON results; see [`cli`].
//!
//! ## The model in one paragraph
//!
//! A ground source at `s` transmits with power `P`; a receiver at height
//! `h` measures RSS (dB) following a two-branch log-distance law: the
//! intercept, the 3D-distance slope, and a horizontal-distance term from
//! the aerial antenna pattern differ between LOS and NLOS, plus Gaussian
//! shadowing per branch. Whether a receiver is LOS is decided by clipping
//! the source-receiver segment against building footprints and comparing
//! heights at the crossing. The estimator inverts exactly that process
//! blind: no labels, no heights, only footprints, positions, and RSS.

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod localizer;
pub mod propagation;
pub mod segreg;

pub use error::{Error, Result};

pub use geometry::{
    azimuth, classify_los, sectorize, Building, ConvexPolygon, EnvironmentMap2D,
    FootprintMap, Sectorization,
};

pub use propagation::{
    demo_map, generate_measurements, log_distances, model_rss, read_measurements,
    truth_params, write_measurements, Measurement, MeasurementSet, PropagationParams,
    PropagationTruth, Scenario, ScenarioFile,
};

pub use segreg::{
    best_support_vector, build_design, elevation_angle, indicator, sector_residual,
    solve_ls, sv_candidate_grid, DesignRow, SectorDesign, SectorFit, SupportVectorAngle,
};

pub use localizer::{
    evaluate_candidate, localize, localize_with_tensor, refit_global, CandidateTensor,
    ErrorTensor, GridSpec, LocalizationResult,
};

pub use baselines::{wcl, WclConfig};

pub use bench::{
    aggregate_from_records, read_records, run_bench, write_records, AggregateRow,
    BenchOutcome, BenchPlan, BenchRecord, FailedTrial, Method, PlanFile, ResultFile,
    SweepVariable,
};

/// Re-exported point types used throughout the public API.
pub use nalgebra::{Point2, Point3};
