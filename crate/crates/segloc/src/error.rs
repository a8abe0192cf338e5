//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the library.
///
/// Geometry construction, scenario validation, file I/O, and the estimators
/// all share this enum so callers can bubble failures with `?` end to end.
#[derive(Debug, Error)]
pub enum Error {
    /// Footprint input whose convex hull has fewer than 3 vertices.
    #[error("footprint is degenerate: convex hull has {got} vertices, need at least 3")]
    DegenerateFootprint { got: usize },

    /// Building height must be strictly positive.
    #[error("building height must be > 0, got {got}")]
    NonPositiveHeight { got: f64 },

    /// A footprint vertex lies outside the map bounds.
    #[error("building {index} extends outside the map bounds")]
    FootprintOutOfBounds { index: usize },

    /// Two footprints have overlapping interiors.
    #[error("buildings {first} and {second} have overlapping footprints")]
    OverlappingFootprints { first: usize, second: usize },

    /// Map side length must be strictly positive.
    #[error("map side length must be > 0, got {got}")]
    NonPositiveSide { got: f64 },

    /// Line-of-sight query with coincident endpoints.
    #[error("line-of-sight segment is degenerate: source and receiver coincide")]
    DegenerateSegment,

    /// Sectorization anchored strictly inside a building footprint.
    #[error("anchor lies strictly inside building {index}")]
    AnchorInsideFootprint { index: usize },

    /// Scenario source must sit on the ground plane.
    #[error("source height must be 0, got {got}")]
    SourceNotGround { got: f64 },

    /// Aerial measurement height must be strictly positive.
    #[error("aerial height must be > 0, got {got}")]
    NonPositiveAerialHeight { got: f64 },

    /// Shadowing standard deviations must be non-negative and finite.
    #[error("{name} must be finite and >= 0, got {got}")]
    InvalidSigma { name: &'static str, got: f64 },

    /// A numeric field that must be finite was not.
    #[error("{name} must be finite, got {got}")]
    NonFinite { name: &'static str, got: f64 },

    /// A scenario file omitted a building height that the simulator needs.
    #[error("building {index} has no height; heights are required to simulate")]
    MissingHeight { index: usize },

    /// Support-vector angle outside [0, pi/2].
    #[error("support-vector angle must lie in [0, pi/2], got {got}")]
    AngleOutOfRange { got: f64 },

    /// Grid specification that cannot produce candidates.
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    /// Localization found no admissible grid candidate.
    #[error("no admissible grid candidate (all excluded or grid empty)")]
    NoAdmissibleCandidates,

    /// Refit called with one angle per sector of a different sectorization.
    #[error("expected {expected} per-sector angles, got {got}")]
    SectorCountMismatch { expected: usize, got: usize },

    /// Weighted-centroid call with nothing to average.
    #[error("no qualifying measurements for the weighted centroid")]
    NoQualifyingMeasurements,

    /// Genius-aided baseline requires ground-truth LOS labels.
    #[error("measurement {index} has no LOS label; the genius-aided baseline needs ground truth")]
    MissingLosLabel { index: usize },

    /// Benchmark plan that cannot run.
    #[error("invalid benchmark plan: {reason}")]
    InvalidPlan { reason: String },

    /// Malformed row in a measurement CSV file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Shorthand used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
