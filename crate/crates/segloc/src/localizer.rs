//! Residual-minimizing grid search for the source location.
//!
//! Every admissible grid point is treated as a presumed source: the horizon
//! around it is sectorized, each sector picks its best critical angle from a
//! shared candidate list, and the per-sector minima sum to that point's
//! error. The point with the smallest error wins (ties go to the smaller
//! `(x, y)`), optionally sharpened by a second pass on a finer grid around
//! the winner, and a final least-squares refit shares one coefficient vector
//! across all measurements.

use nalgebra::{Point2, Point3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sectorize, FootprintMap};
use crate::propagation::{Measurement, PropagationParams};
use crate::segreg::{indicator, BlockLs, SectorSamples, SupportVectorAngle};

/// Fewer measurements than this cannot over-determine the six coefficients;
/// results are flagged as degenerate.
const MIN_DETERMINED: usize = 7;

/// Search-space description: a square grid of presumed sources plus the
/// shared candidate angles, with an optional refinement pass.
#[derive(Debug, Clone)]
pub struct GridSpec {
    spacing: f64,
    half_extent: f64,
    sv_candidates: Vec<SupportVectorAngle>,
    refine_spacing: Option<f64>,
}

impl GridSpec {
    pub fn new(
        spacing: f64,
        half_extent: f64,
        sv_candidates: Vec<SupportVectorAngle>,
        refine_spacing: Option<f64>,
    ) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid {
                reason: format!("spacing must be > 0, got {spacing}"),
            });
        }
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::InvalidGrid {
                reason: format!("half extent must be > 0, got {half_extent}"),
            });
        }
        if sv_candidates.is_empty() {
            return Err(Error::InvalidGrid {
                reason: "candidate angle list is empty".into(),
            });
        }
        if let Some(fine) = refine_spacing {
            if !(fine > 0.0 && fine < spacing) {
                return Err(Error::InvalidGrid {
                    reason: format!("refine spacing must lie in (0, {spacing}), got {fine}"),
                });
            }
        }
        Ok(Self {
            spacing,
            half_extent,
            sv_candidates,
            refine_spacing,
        })
    }

    /// Grid covering `map`'s full area.
    pub fn for_map(
        map: &FootprintMap,
        spacing: f64,
        sv_candidates: Vec<SupportVectorAngle>,
        refine_spacing: Option<f64>,
    ) -> Result<Self> {
        Self::new(spacing, map.half_side(), sv_candidates, refine_spacing)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn sv_candidates(&self) -> &[SupportVectorAngle] {
        &self.sv_candidates
    }

    pub fn refine_spacing(&self) -> Option<f64> {
        self.refine_spacing
    }
}

/// Everything the search decided, plus diagnostics.
#[derive(Debug, Clone)]
pub struct LocalizationResult {
    /// Estimated source, on the ground plane.
    pub s_hat: Point3<f64>,
    /// Winning critical angle per sector of the sectorization at `s_hat`.
    pub sv_hats: Vec<SupportVectorAngle>,
    /// Globally refit coefficients (one vector shared by all sectors).
    pub phi_hat: PropagationParams,
    /// Sum over sectors of the per-sector minimal residuals at `s_hat`.
    pub total_residual: f64,
    pub per_sector_residuals: Vec<f64>,
    /// Admissible candidates evaluated (coarse plus refinement).
    pub candidate_count: usize,
    /// Grid points skipped because they fall inside a footprint.
    pub excluded_count: usize,
    /// True when the measurement set is too small to over-determine the
    /// model; the reported residual is then trivially (near) zero.
    pub underdetermined: bool,
}

/// Retained per-candidate residuals for diagnostics (`--dump-tensor`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorTensor {
    /// The shared candidate angles, radians.
    pub sv_candidates: Vec<f64>,
    /// One entry per admissible evaluated candidate, in evaluation order
    /// (coarse grid first, then any refinement pass).
    pub entries: Vec<CandidateTensor>,
}

/// Residuals of one candidate source: `residuals[sector][angle index]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateTensor {
    pub candidate: [f64; 2],
    pub boundaries: Vec<f64>,
    pub residuals: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
struct CandidateEval {
    angles: Vec<SupportVectorAngle>,
    per_sector: Vec<f64>,
    total: f64,
    boundaries: Vec<f64>,
    matrix: Option<Vec<Vec<f64>>>,
}

/// Scores one presumed source; `None` when it sits inside a footprint.
fn evaluate_at(
    map: &FootprintMap,
    measurements: &[Measurement],
    positions: &[Point3<f64>],
    candidate: Point2<f64>,
    sv_candidates: &[SupportVectorAngle],
    want_matrix: bool,
) -> Option<CandidateEval> {
    let anchor = Point3::new(candidate.x, candidate.y, 0.0);
    let sectorization = sectorize(map, anchor, positions).ok()?;
    let mut eval = CandidateEval {
        angles: Vec::with_capacity(sectorization.sector_count()),
        per_sector: Vec::with_capacity(sectorization.sector_count()),
        total: 0.0,
        boundaries: sectorization.boundaries().to_vec(),
        matrix: want_matrix.then(Vec::new),
    };
    for indices in sectorization.assignments() {
        let samples = SectorSamples::gather(
            indices.iter().map(|&m| (positions[m], measurements[m].rss_db)),
            anchor,
        );
        let mut row = eval.matrix.as_mut().map(|_| Vec::with_capacity(sv_candidates.len()));
        let (best, residual) = samples.scan(sv_candidates, row.as_mut());
        if let (Some(matrix), Some(row)) = (eval.matrix.as_mut(), row) {
            matrix.push(row);
        }
        eval.angles.push(sv_candidates[best]);
        eval.per_sector.push(residual);
        eval.total += residual;
    }
    Some(eval)
}

/// Sectorizes at `s`, picks each sector's best angle from `sv_candidates`,
/// and returns the angles with the summed per-sector minimal residuals.
pub fn evaluate_candidate(
    map: &FootprintMap,
    measurements: &[Measurement],
    s: Point3<f64>,
    sv_candidates: &[SupportVectorAngle],
) -> Result<(Vec<SupportVectorAngle>, f64)> {
    let positions: Vec<Point3<f64>> = measurements.iter().map(|m| m.position).collect();
    match evaluate_at(
        map,
        measurements,
        &positions,
        Point2::new(s.x, s.y),
        sv_candidates,
        false,
    ) {
        Some(eval) => Ok((eval.angles, eval.total)),
        None => {
            let index = map
                .footprint_containing(Point2::new(s.x, s.y))
                .unwrap_or(0);
            Err(Error::AnchorInsideFootprint { index })
        }
    }
}

/// Ascending axis coordinates `-half, -half + step, ...` not exceeding
/// `half` (with a hair of slack so an exact endpoint survives rounding).
fn axis_coords(half: f64, step: f64) -> Vec<f64> {
    let count = ((2.0 * half) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| -half + i as f64 * step).collect()
}

/// Lexicographically ordered (x-major) grid candidates.
fn grid_candidates(xs: &[f64], ys: &[f64]) -> Vec<Point2<f64>> {
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| Point2::new(x, y)))
        .collect()
}

struct Pass {
    winner: Option<(usize, f64)>,
    evals: Vec<Option<CandidateEval>>,
    admissible: usize,
}

/// Evaluates `candidates` in parallel; the reported winner is the first
/// strict minimum in candidate order, so the outcome is independent of how
/// the work was split across threads.
fn run_pass(
    map: &FootprintMap,
    measurements: &[Measurement],
    positions: &[Point3<f64>],
    candidates: &[Point2<f64>],
    sv_candidates: &[SupportVectorAngle],
    want_matrix: bool,
) -> Pass {
    let evals: Vec<Option<CandidateEval>> = candidates
        .par_iter()
        .map(|&c| evaluate_at(map, measurements, positions, c, sv_candidates, want_matrix))
        .collect();
    let mut winner: Option<(usize, f64)> = None;
    let mut admissible = 0;
    for (i, eval) in evals.iter().enumerate() {
        if let Some(eval) = eval {
            admissible += 1;
            if winner.map_or(true, |(_, best)| eval.total < best) {
                winner = Some((i, eval.total));
            }
        }
    }
    Pass {
        winner,
        evals,
        admissible,
    }
}

/// Full search: coarse grid, optional refinement, global refit.
pub fn localize(
    map: &FootprintMap,
    measurements: &[Measurement],
    grid: &GridSpec,
) -> Result<LocalizationResult> {
    localize_with_tensor(map, measurements, grid, false).map(|(result, _)| result)
}

/// [`localize`], optionally retaining every evaluated candidate's residuals.
pub fn localize_with_tensor(
    map: &FootprintMap,
    measurements: &[Measurement],
    grid: &GridSpec,
    dump_tensor: bool,
) -> Result<(LocalizationResult, Option<ErrorTensor>)> {
    let positions: Vec<Point3<f64>> = measurements.iter().map(|m| m.position).collect();
    let axis = axis_coords(grid.half_extent, grid.spacing);
    let coarse = grid_candidates(&axis, &axis);
    let mut pass = run_pass(
        map,
        measurements,
        &positions,
        &coarse,
        &grid.sv_candidates,
        dump_tensor,
    );
    let mut tensor_entries: Vec<CandidateTensor> = Vec::new();
    if dump_tensor {
        collect_tensor(&mut tensor_entries, &coarse, &pass.evals);
    }
    let (best_index, _) = pass.winner.ok_or(Error::NoAdmissibleCandidates)?;
    let mut candidate_count = pass.admissible;
    let mut excluded_count = coarse.len() - pass.admissible;
    let mut s2 = coarse[best_index];
    let mut winning = pass.evals[best_index]
        .take()
        .expect("winner index points at an admissible evaluation");

    if let Some(fine) = grid.refine_spacing {
        // A fine grid within one coarse cell of the winner, clipped to the
        // search square. It contains the winner itself, so refinement can
        // only improve (or keep) the residual.
        let steps = (grid.spacing / fine + 1e-9).floor() as i64;
        let offsets: Vec<f64> = (-steps..=steps).map(|i| i as f64 * fine).collect();
        let clip = |center: f64| -> Vec<f64> {
            offsets
                .iter()
                .map(|o| center + o)
                .filter(|v| v.abs() <= grid.half_extent + 1e-9)
                .collect()
        };
        let fine_candidates = grid_candidates(&clip(s2.x), &clip(s2.y));
        let mut fine_pass = run_pass(
            map,
            measurements,
            &positions,
            &fine_candidates,
            &grid.sv_candidates,
            dump_tensor,
        );
        if dump_tensor {
            collect_tensor(&mut tensor_entries, &fine_candidates, &fine_pass.evals);
        }
        candidate_count += fine_pass.admissible;
        excluded_count += fine_candidates.len() - fine_pass.admissible;
        if let Some((fine_index, _)) = fine_pass.winner {
            s2 = fine_candidates[fine_index];
            winning = fine_pass.evals[fine_index]
                .take()
                .expect("winner index points at an admissible evaluation");
        }
    }

    let s_hat = Point3::new(s2.x, s2.y, 0.0);
    let phi_hat = refit_global(map, measurements, s_hat, &winning.angles)?;
    let result = LocalizationResult {
        s_hat,
        sv_hats: winning.angles,
        phi_hat,
        total_residual: winning.total,
        per_sector_residuals: winning.per_sector,
        candidate_count,
        excluded_count,
        underdetermined: measurements.len() < MIN_DETERMINED,
    };
    let tensor = dump_tensor.then(|| ErrorTensor {
        sv_candidates: grid.sv_candidates.iter().map(|a| a.radians()).collect(),
        entries: tensor_entries,
    });
    Ok((result, tensor))
}

fn collect_tensor(
    entries: &mut Vec<CandidateTensor>,
    candidates: &[Point2<f64>],
    evals: &[Option<CandidateEval>],
) {
    for (c, eval) in candidates.iter().zip(evals) {
        if let Some(eval) = eval {
            entries.push(CandidateTensor {
                candidate: [c.x, c.y],
                boundaries: eval.boundaries.clone(),
                residuals: eval.matrix.clone().expect("tensor pass stores residual rows"),
            });
        }
    }
}

/// One shared coefficient vector refit over all measurements, labeled by the
/// winning per-sector angles at `s_hat`.
///
/// LOS-labeled rows touch only the LOS coefficient triple and NLOS rows only
/// the NLOS triple, so the global minimum-norm least squares again splits
/// into two exact blocks.
pub fn refit_global(
    map: &FootprintMap,
    measurements: &[Measurement],
    s_hat: Point3<f64>,
    sv_hats: &[SupportVectorAngle],
) -> Result<PropagationParams> {
    let positions: Vec<Point3<f64>> = measurements.iter().map(|m| m.position).collect();
    let sectorization = sectorize(map, s_hat, &positions)?;
    if sectorization.sector_count() != sv_hats.len() {
        return Err(Error::SectorCountMismatch {
            expected: sectorization.sector_count(),
            got: sv_hats.len(),
        });
    }
    let mut labels = vec![false; measurements.len()];
    for (sector, indices) in sectorization.assignments().iter().enumerate() {
        for &m in indices {
            labels[m] = indicator(positions[m], s_hat, sv_hats[sector]);
        }
    }
    let mut los = BlockLs::new();
    let mut nlos = BlockLs::new();
    for (m, measurement) in measurements.iter().enumerate() {
        let (log_d3, log_d2) = crate::propagation::log_distances(s_hat, measurement.position);
        let block = if labels[m] { &mut los } else { &mut nlos };
        block.push([1.0, log_d3, log_d2], measurement.rss_db);
    }
    let (phi0, _) = los.solve();
    let (phi1, _) = nlos.solve();
    Ok(PropagationParams::from_triples(phi0, phi1))
}
