//! Segmented least squares with a per-sector LOS/NLOS split.
//!
//! Within one sector, a single critical elevation angle `alpha` separates
//! line-of-sight from shadowed receivers: everything seen at or above
//! `alpha` from the presumed source is labeled LOS. A labeling turns each
//! measurement into one row of a 6-column design (3 active columns per row,
//! LOS block or NLOS block), and the best coefficients are the minimum-norm
//! least-squares solution. Scanning `alpha` over a candidate grid and
//! keeping the smallest residual recovers the separating angle without ever
//! observing true labels.

use nalgebra::{DMatrix, DVector, Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{log_distances, Measurement, PropagationParams};

/// Singular values below this fraction of the largest are treated as zero
/// when solving a (possibly rank-deficient) block; well inside the noise
/// floor of f64 arithmetic on these well-scaled designs, far above it for
/// genuinely dependent columns.
pub const LS_RANK_CUTOFF: f64 = 1e-12;

/// Critical elevation angle in radians, in `[0, pi/2]`.
///
/// Angle 0 labels every receiver above the source plane LOS; `pi/2` labels
/// everything except a receiver at exact zenith NLOS. The two extremes serve
/// as all-LOS / all-NLOS sentinels in candidate grids.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportVectorAngle(f64);

impl SupportVectorAngle {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && (0.0..=std::f64::consts::FRAC_PI_2).contains(&alpha)) {
            return Err(Error::AngleOutOfRange { got: alpha });
        }
        Ok(Self(alpha))
    }

    pub fn radians(&self) -> f64 {
        self.0
    }

    pub fn degrees(&self) -> f64 {
        self.0.to_degrees()
    }
}

/// Evenly spaced angle candidates covering `[0, pi/2]` endpoint-inclusive.
///
/// `n = 31` gives the stock 3-degree grid. `n = 1` degenerates to the single
/// angle 0.
pub fn sv_candidate_grid(n: usize) -> Vec<SupportVectorAngle> {
    assert!(n >= 1, "candidate grid needs at least one angle");
    if n == 1 {
        return vec![SupportVectorAngle(0.0)];
    }
    (0..n)
        .map(|i| {
            // i/(n-1) hits 0 and 1 exactly, keeping the endpoints exact.
            SupportVectorAngle(std::f64::consts::FRAC_PI_2 * (i as f64 / (n - 1) as f64))
        })
        .collect()
}

/// Elevation of `receiver` as seen from `source`: `atan2(dz, d2)`.
pub fn elevation_angle(source: Point3<f64>, receiver: Point3<f64>) -> f64 {
    let d2 = (receiver.x - source.x).hypot(receiver.y - source.y);
    (receiver.z - source.z).atan2(d2)
}

/// LOS indicator: true iff the receiver's elevation from the source reaches
/// the critical angle (the boundary itself counts as LOS).
pub fn indicator(receiver: Point3<f64>, source: Point3<f64>, sv: SupportVectorAngle) -> bool {
    elevation_angle(source, receiver) >= sv.0
}

/// One design row: the LOS flag plus the two log-distances. The numeric row
/// is `[u, u*log_d3, u*log_d2, v, v*log_d3, v*log_d2]` with `v = 1 - u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignRow {
    pub u_los: bool,
    pub log_d3: f64,
    pub log_d2: f64,
}

impl DesignRow {
    /// The row against coefficients `[a0, b0, c0, a1, b1, c1]`.
    pub fn to_array(&self) -> [f64; 6] {
        if self.u_los {
            [1.0, self.log_d3, self.log_d2, 0.0, 0.0, 0.0]
        } else {
            [0.0, 0.0, 0.0, 1.0, self.log_d3, self.log_d2]
        }
    }
}

/// Masked design of one sector under one labeling, plus its RSS vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorDesign {
    rows: Vec<DesignRow>,
    rss: Vec<f64>,
}

impl SectorDesign {
    pub fn rows(&self) -> &[DesignRow] {
        &self.rows
    }

    pub fn rss(&self) -> &[f64] {
        &self.rss
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Materializes the full `n x 6` matrix (tests and diagnostics; the
    /// solver itself works row-wise).
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), 6, |i, j| self.rows[i].to_array()[j])
    }

    pub fn rhs(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.rss)
    }
}

/// Builds the design for `sector` (measurements in input order) labeled by
/// the critical angle `sv`.
pub fn build_design(
    sector: &[Measurement],
    source: Point3<f64>,
    sv: SupportVectorAngle,
) -> SectorDesign {
    let mut rows = Vec::with_capacity(sector.len());
    let mut rss = Vec::with_capacity(sector.len());
    for m in sector {
        let (log_d3, log_d2) = log_distances(source, m.position);
        rows.push(DesignRow {
            u_los: indicator(m.position, source, sv),
            log_d3,
            log_d2,
        });
        rss.push(m.rss_db);
    }
    SectorDesign { rows, rss }
}

/// Coefficients and residual of one solved sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorFit {
    pub phi: PropagationParams,
    pub residual_sq: f64,
    pub n_los: usize,
    pub n_nlos: usize,
}

/// Streaming least squares for one 3-column block.
///
/// Rows arrive one at a time and are rotated into an upper-triangular R via
/// Givens rotations (a thin QR without storing Q); the rotated-away part of
/// the RSS accumulates the residual. Solving then needs only a 3x3 SVD,
/// whose cutoff keeps rank-deficient blocks (too few rows, constant
/// distances) on their minimum-norm solution. Orthogonal transforms all the
/// way down: the normal matrix is never formed.
#[derive(Debug, Clone)]
pub(crate) struct BlockLs {
    r: [[f64; 3]; 3], // upper triangular
    z: [f64; 3],
    rho_sq: f64,
    n: usize,
}

impl BlockLs {
    pub(crate) fn new() -> Self {
        Self {
            r: [[0.0; 3]; 3],
            z: [0.0; 3],
            rho_sq: 0.0,
            n: 0,
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, row: [f64; 3], y: f64) {
        let mut a = row;
        let mut y = y;
        for k in 0..3 {
            let ak = a[k];
            if ak == 0.0 {
                continue;
            }
            let rkk = self.r[k][k];
            let h = (rkk * rkk + ak * ak).sqrt();
            let c = rkk / h;
            let s = ak / h;
            self.r[k][k] = h;
            for j in (k + 1)..3 {
                let rkj = self.r[k][j];
                let aj = a[j];
                self.r[k][j] = c * rkj + s * aj;
                a[j] = c * aj - s * rkj;
            }
            let zk = self.z[k];
            self.z[k] = c * zk + s * y;
            y = c * y - s * zk;
        }
        self.rho_sq += y * y;
        self.n += 1;
    }

    pub(crate) fn rows(&self) -> usize {
        self.n
    }

    /// Minimum-norm solution of the accumulated block and the attained
    /// sum of squared residuals. An empty block yields exact zeros.
    pub(crate) fn solve(&self) -> ([f64; 3], f64) {
        if self.n == 0 {
            return ([0.0; 3], 0.0);
        }
        let r = Matrix3::new(
            self.r[0][0],
            self.r[0][1],
            self.r[0][2],
            0.0,
            self.r[1][1],
            self.r[1][2],
            0.0,
            0.0,
            self.r[2][2],
        );
        let z = Vector3::new(self.z[0], self.z[1], self.z[2]);
        let svd = r.svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return ([0.0; 3], self.rho_sq + z.norm_squared());
        }
        let x = svd
            .solve(&z, LS_RANK_CUTOFF * smax)
            .expect("SVD was computed with both factors");
        let extra = (z - r * x).norm_squared();
        ([x[0], x[1], x[2]], self.rho_sq + extra)
    }
}

/// Minimum-norm least squares for a masked sector design.
///
/// Rows with `u_los = 1` touch only the first three coefficients and the
/// rest only the last three, so the 6-column problem splits exactly into two
/// independent 3-column blocks; solving them separately is algebraically
/// identical to solving the joint system (and makes the inactive block's
/// coefficients exactly zero, the minimum-norm completion).
pub fn solve_ls(design: &SectorDesign) -> SectorFit {
    let mut los = BlockLs::new();
    let mut nlos = BlockLs::new();
    for (row, &y) in design.rows.iter().zip(&design.rss) {
        let block = if row.u_los { &mut los } else { &mut nlos };
        block.push([1.0, row.log_d3, row.log_d2], y);
    }
    combine(&los, &nlos)
}

fn combine(los: &BlockLs, nlos: &BlockLs) -> SectorFit {
    let (phi0, r0) = los.solve();
    let (phi1, r1) = nlos.solve();
    SectorFit {
        phi: PropagationParams::from_triples(phi0, phi1),
        residual_sq: r0 + r1,
        n_los: los.rows(),
        n_nlos: nlos.rows(),
    }
}

/// Residual of one sector under one candidate angle; empty sectors cost 0
/// so they drop out of sums over sectors.
pub fn sector_residual(sector: &[Measurement], source: Point3<f64>, sv: SupportVectorAngle) -> f64 {
    if sector.is_empty() {
        return 0.0;
    }
    solve_ls(&build_design(sector, source, sv)).residual_sq
}

/// Per-sector sample cache: geometry and RSS extracted once so that a scan
/// over many candidate angles only re-labels and re-solves.
#[derive(Debug, Clone)]
pub(crate) struct SectorSamples {
    elevation: Vec<f64>,
    log_d3: Vec<f64>,
    log_d2: Vec<f64>,
    rss: Vec<f64>,
}

impl SectorSamples {
    pub(crate) fn gather(
        measurements: impl Iterator<Item = (Point3<f64>, f64)>,
        source: Point3<f64>,
    ) -> Self {
        let mut s = Self {
            elevation: Vec::new(),
            log_d3: Vec::new(),
            log_d2: Vec::new(),
            rss: Vec::new(),
        };
        for (position, rss) in measurements {
            let (log_d3, log_d2) = log_distances(source, position);
            s.elevation.push(elevation_angle(source, position));
            s.log_d3.push(log_d3);
            s.log_d2.push(log_d2);
            s.rss.push(rss);
        }
        s
    }

    pub(crate) fn len(&self) -> usize {
        self.rss.len()
    }

    /// Solves the block split induced by `alpha`, identical bit-for-bit to
    /// `solve_ls(&build_design(..))` on the same measurements in the same
    /// order.
    pub(crate) fn solve_for(&self, alpha: f64) -> SectorFit {
        let mut los = BlockLs::new();
        let mut nlos = BlockLs::new();
        for i in 0..self.len() {
            let block = if self.elevation[i] >= alpha {
                &mut los
            } else {
                &mut nlos
            };
            block.push([1.0, self.log_d3[i], self.log_d2[i]], self.rss[i]);
        }
        combine(&los, &nlos)
    }

    /// Scans candidate angles and returns `(best index, best residual)`,
    /// optionally recording every candidate's residual into `per_alpha`.
    ///
    /// The labeling is monotone in `alpha`, so two candidates putting the
    /// same number of samples above the bar induce the same labels; their
    /// solves are shared. Ties go to the smallest angle.
    pub(crate) fn scan(
        &self,
        candidates: &[SupportVectorAngle],
        mut per_alpha: Option<&mut Vec<f64>>,
    ) -> (usize, f64) {
        assert!(!candidates.is_empty(), "candidate angle list must be nonempty");
        let mut solved: Vec<(usize, f64)> = Vec::with_capacity(candidates.len());
        let mut best: Option<(usize, f64)> = None;
        for (i, sv) in candidates.iter().enumerate() {
            let count = self.elevation.iter().filter(|&&e| e >= sv.0).count();
            let residual = match solved.iter().find(|(c, _)| *c == count) {
                Some(&(_, r)) => r,
                None => {
                    let r = if self.len() == 0 {
                        0.0
                    } else {
                        self.solve_for(sv.0).residual_sq
                    };
                    solved.push((count, r));
                    r
                }
            };
            if let Some(list) = per_alpha.as_deref_mut() {
                list.push(residual);
            }
            let take = match best {
                None => true,
                Some((bi, br)) => {
                    residual < br || (residual == br && sv.0 < candidates[bi].0)
                }
            };
            if take {
                best = Some((i, residual));
            }
        }
        best.expect("nonempty candidate list always yields a best")
    }
}

/// Scans `candidates` for the angle minimizing the sector residual; ties
/// break toward the smallest angle.
pub fn best_support_vector(
    sector: &[Measurement],
    source: Point3<f64>,
    candidates: &[SupportVectorAngle],
) -> (SupportVectorAngle, f64) {
    let samples = SectorSamples::gather(sector.iter().map(|m| (m.position, m.rss_db)), source);
    let (index, residual) = samples.scan(candidates, None);
    (candidates[index], residual)
}
