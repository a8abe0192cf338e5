//! Radio-map model, ground-truth channel, and seeded measurement synthesis.
//!
//! Received power in dB follows a piecewise log-distance law: one coefficient
//! triple for line-of-sight receivers and another for shadowed ones,
//!
//! ```text
//! rss = a_k + b_k * log10(d3) + c_k * log10(d2),    k = 0 (LOS) or 1 (NLOS),
//! ```
//!
//! where `d3` is the 3D source-receiver distance and `d2` its horizontal
//! projection. The `c_k log10(d2)` term is the log-scale image of a
//! `sin^q(theta)` antenna gain (`sin(theta) = d2/d3`), so a physical channel
//! with transmit power `P`, path-loss exponent `eta_k`, and that gain has
//! `a_k = 10 log10 P`, `b_k = -10 eta_k - 10 q`, `c_k = 10 q`.

use nalgebra::{Point2, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{classify_los, Building, EnvironmentMap2D, FootprintMap};

/// Horizontal distances shorter than this are clamped before taking logs;
/// the antenna-gain term otherwise diverges directly above the source.
pub const MIN_HORIZONTAL_DISTANCE: f64 = 1e-3;

/// Ground-truth channel parameters used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationTruth {
    power_db: f64,
    eta_los: f64,
    eta_nlos: f64,
    sigma_los: f64,
    sigma_nlos: f64,
    antenna_exponent: f64,
}

impl PropagationTruth {
    /// Exponent `q` of the `sin^q(theta)` aerial antenna gain.
    pub const DEFAULT_ANTENNA_EXPONENT: f64 = 5.0;

    pub fn new(
        power_db: f64,
        eta_los: f64,
        eta_nlos: f64,
        sigma_los: f64,
        sigma_nlos: f64,
        antenna_exponent: f64,
    ) -> Result<Self> {
        for (name, got) in [
            ("power_db", power_db),
            ("eta_los", eta_los),
            ("eta_nlos", eta_nlos),
            ("antenna_exponent", antenna_exponent),
        ] {
            if !got.is_finite() {
                return Err(Error::NonFinite { name, got });
            }
        }
        for (name, got) in [("sigma_los", sigma_los), ("sigma_nlos", sigma_nlos)] {
            if !(got.is_finite() && got >= 0.0) {
                return Err(Error::InvalidSigma { name, got });
            }
        }
        Ok(Self {
            power_db,
            eta_los,
            eta_nlos,
            sigma_los,
            sigma_nlos,
            antenna_exponent,
        })
    }

    pub fn power_db(&self) -> f64 {
        self.power_db
    }

    pub fn eta_los(&self) -> f64 {
        self.eta_los
    }

    pub fn eta_nlos(&self) -> f64 {
        self.eta_nlos
    }

    pub fn sigma_los(&self) -> f64 {
        self.sigma_los
    }

    pub fn sigma_nlos(&self) -> f64 {
        self.sigma_nlos
    }

    pub fn antenna_exponent(&self) -> f64 {
        self.antenna_exponent
    }

    /// Copy with different shadowing deviations (handy for noise sweeps).
    pub fn with_sigmas(&self, sigma_los: f64, sigma_nlos: f64) -> Result<Self> {
        Self::new(
            self.power_db,
            self.eta_los,
            self.eta_nlos,
            sigma_los,
            sigma_nlos,
            self.antenna_exponent,
        )
    }
}

/// The six regression coefficients `[a0, b0, c0, a1, b1, c1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationParams {
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
}

impl PropagationParams {
    pub fn new(a0: f64, b0: f64, c0: f64, a1: f64, b1: f64, c1: f64) -> Self {
        Self { a0, b0, c0, a1, b1, c1 }
    }

    pub fn zeros() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// `[a, b, c]` of the LOS branch.
    pub fn los_triple(&self) -> [f64; 3] {
        [self.a0, self.b0, self.c0]
    }

    /// `[a, b, c]` of the NLOS branch.
    pub fn nlos_triple(&self) -> [f64; 3] {
        [self.a1, self.b1, self.c1]
    }

    pub fn from_triples(los: [f64; 3], nlos: [f64; 3]) -> Self {
        Self::new(los[0], los[1], los[2], nlos[0], nlos[1], nlos[2])
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a0, self.b0, self.c0, self.a1, self.b1, self.c1]
    }
}

/// One RSS observation: where it was taken, what was heard, and (simulator
/// only) whether the path was actually line-of-sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub position: Point3<f64>,
    pub rss_db: f64,
    pub truth_los: Option<bool>,
}

/// A batch of measurements; indices into this vector are the measurement
/// identifiers used by sector assignments.
pub type MeasurementSet = Vec<Measurement>;

/// Complete world description for the simulator.
#[derive(Debug, Clone)]
pub struct Scenario {
    map: EnvironmentMap2D,
    source: Point3<f64>,
    aerial_height: f64,
    truth: PropagationTruth,
}

impl Scenario {
    pub fn new(
        map: EnvironmentMap2D,
        source: Point3<f64>,
        aerial_height: f64,
        truth: PropagationTruth,
    ) -> Result<Self> {
        if source.z != 0.0 {
            return Err(Error::SourceNotGround { got: source.z });
        }
        if !(aerial_height > 0.0 && aerial_height.is_finite()) {
            return Err(Error::NonPositiveAerialHeight { got: aerial_height });
        }
        Ok(Self {
            map,
            source,
            aerial_height,
            truth,
        })
    }

    /// The stock demo world used by the examples and integration tests:
    /// a 200 m square, three convex buildings around the origin, source at
    /// the center, receivers flying at 20 m, 1 W transmitter, `eta` = 2 / 7,
    /// `sigma` = 1 / 5 dB, `q` = 5.
    pub fn demo() -> Self {
        Self::demo_custom(50.0, 1.0, 5.0)
    }

    /// Demo world with chosen building height and shadowing deviations.
    pub fn demo_custom(building_height: f64, sigma_los: f64, sigma_nlos: f64) -> Self {
        let map = demo_map(building_height);
        let truth = PropagationTruth::new(
            0.0, // 1 W
            2.0,
            7.0,
            sigma_los,
            sigma_nlos,
            PropagationTruth::DEFAULT_ANTENNA_EXPONENT,
        )
        .expect("demo truth parameters are valid");
        Self::new(map, Point3::new(0.0, 0.0, 0.0), 20.0, truth)
            .expect("demo scenario parameters are valid")
    }

    pub fn map(&self) -> &EnvironmentMap2D {
        &self.map
    }

    pub fn source(&self) -> Point3<f64> {
        self.source
    }

    pub fn aerial_height(&self) -> f64 {
        self.aerial_height
    }

    pub fn truth(&self) -> &PropagationTruth {
        &self.truth
    }

    pub fn with_truth(&self, truth: PropagationTruth) -> Self {
        Self {
            truth,
            ..self.clone()
        }
    }
}

/// The three-building demo map shared by examples and tests.
pub fn demo_map(building_height: f64) -> EnvironmentMap2D {
    let building = |vs: &[(f64, f64)]| {
        let pts: Vec<Point2<f64>> = vs.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        Building::new(&pts, building_height).expect("demo footprint is valid")
    };
    EnvironmentMap2D::new(
        vec![
            building(&[(10.0, 40.0), (40.0, 20.0), (30.0, 70.0), (60.0, 30.0)]),
            building(&[(80.0, -40.0), (20.0, -80.0), (60.0, -100.0), (100.0, -100.0)]),
            building(&[(-50.0, 20.0), (-50.0, -20.0), (-70.0, 10.0), (-70.0, -10.0)]),
        ],
        200.0,
    )
    .expect("demo map is valid")
}

/// Base-10 logs of the 3D and (clamped) horizontal source-receiver
/// distances; the shared geometry kernel of the model and every regression
/// design row.
pub fn log_distances(source: Point3<f64>, receiver: Point3<f64>) -> (f64, f64) {
    let dx = receiver.x - source.x;
    let dy = receiver.y - source.y;
    let dz = receiver.z - source.z;
    let d2 = dx.hypot(dy);
    let d3 = (d2 * d2 + dz * dz).sqrt();
    (d3.log10(), d2.max(MIN_HORIZONTAL_DISTANCE).log10())
}

/// Noiseless model RSS in dB for one receiver under branch `los`.
pub fn model_rss(
    params: &PropagationParams,
    source: Point3<f64>,
    receiver: Point3<f64>,
    los: bool,
) -> f64 {
    let (log_d3, log_d2) = log_distances(source, receiver);
    let [a, b, c] = if los {
        params.los_triple()
    } else {
        params.nlos_triple()
    };
    a + b * log_d3 + c * log_d2
}

/// The regression coefficients a physical channel actually induces.
pub fn truth_params(truth: &PropagationTruth) -> PropagationParams {
    let q = truth.antenna_exponent;
    PropagationParams::new(
        truth.power_db,
        -10.0 * truth.eta_los - 10.0 * q,
        10.0 * q,
        truth.power_db,
        -10.0 * truth.eta_nlos - 10.0 * q,
        10.0 * q,
    )
}

/// Synthesizes `count` measurements at uniformly random horizontal positions
/// (aerial height fixed), each labeled by the true occlusion geometry and
/// perturbed by branch-matched Gaussian shadowing.
///
/// Every measurement draws from its own RNG stream keyed by `(seed, index)`,
/// so the output is a pure function of `(scenario, count, seed)` no matter
/// how or in what order the indices are evaluated, and measurement `m` is
/// identical across runs with different `count >= m`.
pub fn generate_measurements(scenario: &Scenario, count: usize, seed: u64) -> MeasurementSet {
    let params = truth_params(&scenario.truth);
    let half = scenario.map.half_side();
    (0..count)
        .map(|m| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(m as u64);
            let x = rng.gen_range(-half..=half);
            let y = rng.gen_range(-half..=half);
            let shade: f64 = rng.sample(StandardNormal);
            let position = Point3::new(x, y, scenario.aerial_height);
            let los = classify_los(&scenario.map, scenario.source, position)
                .expect("aerial receivers sit strictly above the ground source");
            let sigma = if los {
                scenario.truth.sigma_los
            } else {
                scenario.truth.sigma_nlos
            };
            Measurement {
                position,
                rss_db: model_rss(&params, scenario.source, position, los) + sigma * shade,
                truth_los: Some(los),
            }
        })
        .collect()
}

const CSV_HEADER: [&str; 5] = ["x", "y", "z", "rss_db", "los"];

/// Writes a measurement set as CSV (`x,y,z,rss_db,los`; `los` is `1`, `0`,
/// or `NA` when ground truth is withheld). Floats are written shortest
/// round-trip, so write-then-read is the identity.
pub fn write_measurements<P: AsRef<Path>>(path: P, set: &[Measurement]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for m in set {
        let los = match m.truth_los {
            Some(true) => "1",
            Some(false) => "0",
            None => "NA",
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            m.position.x, m.position.y, m.position.z, m.rss_db, los
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a measurement CSV written by [`write_measurements`] (or anything
/// matching its header). Malformed rows report their 1-based line number.
pub fn read_measurements<P: AsRef<Path>>(path: P) -> Result<MeasurementSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    {
        let headers = reader.headers()?;
        if headers.iter().ne(CSV_HEADER) {
            return Err(Error::Parse {
                line: 1,
                message: format!(
                    "expected header '{}', got '{}'",
                    CSV_HEADER.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
    }
    let mut set = MeasurementSet::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 5 fields, got {}", record.len()),
            });
        }
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
        let truth_los = match &record[4] {
            "1" => Some(true),
            "0" => Some(false),
            "NA" => None,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("field 'los': expected 1, 0, or NA, got '{other}'"),
                })
            }
        };
        set.push(Measurement {
            position: Point3::new(number(0, "x")?, number(1, "y")?, number(2, "z")?),
            rss_db: number(3, "rss_db")?,
            truth_los,
        });
    }
    Ok(set)
}

/// On-disk form of a scenario. `height` may be omitted per building: maps
/// loaded that way can still be localized against (footprints suffice) but
/// cannot be simulated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(rename = "L")]
    pub l: f64,
    pub buildings: Vec<BuildingFile>,
    pub source: [f64; 3],
    pub h: f64,
    pub power_db: f64,
    pub eta_los: f64,
    pub eta_nlos: f64,
    pub sigma_los: f64,
    pub sigma_nlos: f64,
    #[serde(default = "default_antenna_exponent")]
    pub antenna_exponent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildingFile {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
}

fn default_antenna_exponent() -> f64 {
    PropagationTruth::DEFAULT_ANTENNA_EXPONENT
}

impl ScenarioFile {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        Self {
            l: scenario.map.side(),
            buildings: scenario
                .map
                .buildings()
                .iter()
                .map(|b| BuildingFile {
                    vertices: b.footprint().vertices().iter().map(|v| [v.x, v.y]).collect(),
                    height: Some(b.height()),
                })
                .collect(),
            source: [scenario.source.x, scenario.source.y, scenario.source.z],
            h: scenario.aerial_height,
            power_db: scenario.truth.power_db,
            eta_los: scenario.truth.eta_los,
            eta_nlos: scenario.truth.eta_nlos,
            sigma_los: scenario.truth.sigma_los,
            sigma_nlos: scenario.truth.sigma_nlos,
            antenna_exponent: scenario.truth.antenna_exponent,
        }
    }

    /// Full simulator scenario; requires every building to carry a height.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let mut buildings = Vec::with_capacity(self.buildings.len());
        for (index, b) in self.buildings.iter().enumerate() {
            let height = b.height.ok_or(Error::MissingHeight { index })?;
            let pts: Vec<Point2<f64>> = b.vertices.iter().map(|v| Point2::new(v[0], v[1])).collect();
            buildings.push(Building::new(&pts, height)?);
        }
        let map = EnvironmentMap2D::new(buildings, self.l)?;
        let truth = PropagationTruth::new(
            self.power_db,
            self.eta_los,
            self.eta_nlos,
            self.sigma_los,
            self.sigma_nlos,
            self.antenna_exponent,
        )?;
        Scenario::new(
            map,
            Point3::new(self.source[0], self.source[1], self.source[2]),
            self.h,
            truth,

        )
    }

    /// The heightless map view; all a localizer may take from this file.
    pub fn to_footprint_map(&self) -> Result<FootprintMap> {
        let mut footprints = Vec::with_capacity(self.buildings.len());
        for b in &self.buildings {
            let pts: Vec<Point2<f64>> = b.vertices.iter().map(|v| Point2::new(v[0], v[1])).collect();
            footprints.push(crate::geometry::ConvexPolygon::hull_of(&pts)?);
        }
        Ok(FootprintMap::new(footprints, self.l))
    }

    pub fn read<P: AsRef<Path>>(path: P) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(
            std::fs::File::open(path)?,
        ))?)
    }

    pub fn write<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }
}
