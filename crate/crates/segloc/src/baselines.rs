//! Weighted-centroid baselines the grid search is judged against.
//!
//! All three variants are the same estimator with different knobs: convert
//! each RSS to linear power, raise it to a weight exponent, and average the
//! receiver ground positions under those weights. The "genius-aided"
//! variant additionally keeps only measurements whose ground-truth label is
//! LOS, information a real deployment never has; it exists purely as an
//! optimistic reference point.

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::propagation::Measurement;

/// Knobs of the weighted-centroid family.
#[derive(Debug, Clone, Copy)]
pub struct WclConfig {
    weight_exponent: f64,
    los_only: bool,
}

impl WclConfig {
    /// Plain centroid: weights are the linear received powers.
    pub fn plain() -> Self {
        Self {
            weight_exponent: 1.0,
            los_only: false,
        }
    }

    /// Compressed weights flatten the profile so distant receivers still
    /// pull; the usual tweak when the plain centroid collapses onto the
    /// loudest few receivers.
    pub fn modified() -> Self {
        Self {
            weight_exponent: 0.6,
            los_only: false,
        }
    }

    /// Plain weights over the LOS-labeled subset only (requires ground
    /// truth; an upper reference, not a deployable method).
    pub fn genius() -> Self {
        Self {
            weight_exponent: 1.0,
            los_only: true,
        }
    }

    pub fn new(weight_exponent: f64, los_only: bool) -> Result<Self> {
        if !(weight_exponent.is_finite() && weight_exponent > 0.0) {
            return Err(Error::NonFinite {
                name: "weight_exponent",
                got: weight_exponent,
            });
        }
        Ok(Self {
            weight_exponent,
            los_only,
        })
    }

    pub fn weight_exponent(&self) -> f64 {
        self.weight_exponent
    }

    pub fn los_only(&self) -> bool {
        self.los_only
    }
}

/// Weighted centroid of the receiver ground positions.
///
/// Weights are `(10^(rss/10))^p`, i.e. linear power raised to the
/// configured exponent. The estimate lives on the ground plane.
pub fn wcl(measurements: &[Measurement], config: &WclConfig) -> Result<Point3<f64>> {
    let mut sum_w = 0.0;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    for (index, m) in measurements.iter().enumerate() {
        if config.los_only {
            match m.truth_los {
                Some(true) => {}
                Some(false) => continue,
                None => return Err(Error::MissingLosLabel { index }),
            }
        }
        let linear = 10f64.powf(m.rss_db / 10.0);
        let weight = linear.powf(config.weight_exponent);
        sum_w += weight;
        sum_x += weight * m.position.x;
        sum_y += weight * m.position.y;
    }
    if sum_w > 0.0 {
        Ok(Point3::new(sum_x / sum_w, sum_y / sum_w, 0.0))
    } else {
        Err(Error::NoQualifyingMeasurements)
    }
}
