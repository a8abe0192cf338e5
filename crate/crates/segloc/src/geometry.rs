//! Building maps, the 3D line-of-sight oracle, and azimuthal sectorization.
//!
//! The world is a square of side `L` centered on the origin, populated with
//! convex prisms (a 2D footprint extruded to a height). Receivers see the
//! source when the straight segment between them clears every prism; the
//! sectorizer slices the horizon around a presumed source so that each slice
//! contains at most one cluster of buildings.

use nalgebra::{Point2, Point3, Vector2};

use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Convex polygon stored as its hull vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2<f64>>,
}

impl ConvexPolygon {
    /// Builds the convex hull of `points` (collinear and duplicate points are
    /// dropped). Fails if the hull degenerates below a triangle.
    pub fn hull_of(points: &[Point2<f64>]) -> Result<Self> {
        let mut pts: Vec<Point2<f64>> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::DegenerateFootprint { got: pts.len() });
        }

        // Andrew's monotone chain; `cross <= 0` pops collinear points so the
        // stored hull is strictly convex. The upper chain must not pop into
        // the finished lower chain, hence the moving floor.
        let mut hull: Vec<Point2<f64>> = Vec::with_capacity(2 * pts.len());
        let mut floor = 2;
        for (i, &p) in pts.iter().chain(pts.iter().rev().skip(1)).enumerate() {
            if i == pts.len() {
                floor = hull.len() + 1;
            }
            while hull.len() >= floor && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop(); // the chain closes back on pts[0]

        if hull.len() < 3 {
            return Err(Error::DegenerateFootprint { got: hull.len() });
        }
        Ok(Self { vertices: hull })
    }

    /// Hull vertices in counter-clockwise order.
    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    /// True when `p` lies strictly inside the polygon (boundary excluded).
    pub fn contains_strict(&self, p: Point2<f64>) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) > 0.0)
    }

    /// Clips the parametric segment `a + t (b - a)`, `t in [0, 1]`, against
    /// the polygon and returns the parameter interval spent inside it.
    ///
    /// Returns `None` when the segment misses the polygon or merely grazes
    /// its boundary (an empty-interior crossing). Cyrus-Beck clipping: each
    /// edge's outward half-plane either rejects the segment outright or
    /// tightens one end of the interval.
    pub fn clip_segment(&self, a: Point2<f64>, b: Point2<f64>) -> Option<(f64, f64)> {
        let d = b - a;
        let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
        let n = self.vertices.len();
        for i in 0..n {
            let v = self.vertices[i];
            let e = self.vertices[(i + 1) % n] - v;
            let normal = Vector2::new(e.y, -e.x); // outward for a CCW hull
            let denom = normal.dot(&d);
            let num = normal.dot(&(a - v));
            if denom == 0.0 {
                // Parallel to the edge: on or outside its line means the
                // segment never enters this half-plane's interior.
                if num >= 0.0 {
                    return None;
                }
            } else {
                let t = -num / denom;
                if denom > 0.0 {
                    t1 = t1.min(t); // heading out of the half-plane
                } else {
                    t0 = t0.max(t); // heading into it
                }
            }
        }
        (t0 < t1).then_some((t0, t1))
    }

    /// The azimuth arc the polygon subtends as seen from `anchor`.
    ///
    /// Vertex azimuths leave exactly one angular gap wider than the rest
    /// (a convex shape viewed from outside spans less than a half-turn);
    /// the subtended arc is the complement of that largest gap.
    fn subtended_arc(&self, anchor: Point2<f64>) -> Arc {
        let mut az: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| planar_azimuth(v.x - anchor.x, v.y - anchor.y))
            .collect();
        az.sort_by(f64::total_cmp);

        let mut widest = f64::NEG_INFINITY;
        let mut start = 0.0;
        for i in 0..az.len() {
            let gap_from = az[i];
            let gap_to = az[(i + 1) % az.len()];
            let gap = (gap_to - gap_from).rem_euclid(TAU);
            let gap = if az.len() == 1 { TAU } else { gap };
            if gap > widest {
                widest = gap;
                start = gap_to;
            }
        }
        Arc {
            start,
            width: TAU - widest,
        }
    }

    fn bounding_box(&self) -> (Point2<f64>, Point2<f64>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }
}

fn cross(o: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn planar_azimuth(dx: f64, dy: f64) -> f64 {
    if dx == 0.0 && dy == 0.0 {
        return 0.0;
    }
    dy.atan2(dx).rem_euclid(TAU)
}

/// Circular arc `[start, start + width)` on the horizon, angles in radians.
#[derive(Debug, Clone, Copy)]
struct Arc {
    start: f64,
    width: f64,
}

impl Arc {
    fn contains(&self, angle: f64) -> bool {
        (angle - self.start).rem_euclid(TAU) <= self.width
    }

    /// Smallest arc covering both, assuming they overlap or touch.
    fn union(&self, other: &Arc) -> Arc {
        let (outer, inner) = if self.contains(other.start) {
            (self, other)
        } else {
            (other, self)
        };
        let offset = (inner.start - outer.start).rem_euclid(TAU);
        let width = outer.width.max(offset + inner.width).min(TAU);
        Arc {
            start: outer.start,
            width,
        }
    }

    fn overlaps(&self, other: &Arc) -> bool {
        self.contains(other.start) || other.contains(self.start)
    }
}

/// A building: convex footprint extruded from the ground to `height`.
#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    footprint: ConvexPolygon,
    height: f64,
}

impl Building {
    /// Normalizes `vertices` to a convex hull and validates the height.
    pub fn new(vertices: &[Point2<f64>], height: f64) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::NonPositiveHeight { got: height });
        }
        Ok(Self {
            footprint: ConvexPolygon::hull_of(vertices)?,
            height,
        })
    }

    pub fn footprint(&self) -> &ConvexPolygon {
        &self.footprint
    }

    pub fn height(&self) -> f64 {
        self.height
    }
}

/// Validated world map: buildings inside a centered `L x L` square with
/// pairwise disjoint footprint interiors.
#[derive(Debug, Clone)]
pub struct EnvironmentMap2D {
    buildings: Vec<Building>,
    side: f64,
}

impl EnvironmentMap2D {
    pub fn new(buildings: Vec<Building>, side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::NonPositiveSide { got: side });
        }
        let half = side / 2.0;
        for (i, b) in buildings.iter().enumerate() {
            let inside = b
                .footprint
                .vertices()
                .iter()
                .all(|v| v.x.abs() <= half && v.y.abs() <= half);
            if !inside {
                return Err(Error::FootprintOutOfBounds { index: i });
            }
        }
        for i in 0..buildings.len() {
            for j in (i + 1)..buildings.len() {
                if interiors_overlap(&buildings[i].footprint, &buildings[j].footprint) {
                    return Err(Error::OverlappingFootprints { first: i, second: j });
                }
            }
        }
        Ok(Self { buildings, side })
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    /// Side length `L` of the square area.
    pub fn side(&self) -> f64 {
        self.side
    }

    /// Half the side length; the area spans `[-half, half]` on each axis.
    pub fn half_side(&self) -> f64 {
        self.side / 2.0
    }

    /// The heightless view of this map handed to the localizer, which must
    /// work without knowing how tall anything is.
    pub fn footprint_map(&self) -> FootprintMap {
        FootprintMap {
            footprints: self.buildings.iter().map(|b| b.footprint.clone()).collect(),
            side: self.side,
        }
    }
}

/// Footprints without heights: all the localizer is allowed to see.
///
/// Unlike [`EnvironmentMap2D`] this view is not validated for overlap, so it
/// also serves odd inputs (duplicate footprints, unknown provenance) without
/// complaint.
#[derive(Debug, Clone)]
pub struct FootprintMap {
    footprints: Vec<ConvexPolygon>,
    side: f64,
}

impl FootprintMap {
    pub fn new(footprints: Vec<ConvexPolygon>, side: f64) -> Self {
        Self { footprints, side }
    }

    pub fn footprints(&self) -> &[ConvexPolygon] {
        &self.footprints
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn half_side(&self) -> f64 {
        self.side / 2.0
    }

    /// Index of the footprint strictly containing `p`, if any.
    pub fn footprint_containing(&self, p: Point2<f64>) -> Option<usize> {
        self.footprints.iter().position(|f| f.contains_strict(p))
    }
}

/// Strict interior intersection test for two convex polygons via the
/// separating axis theorem; touching boundaries do not count as overlap.
fn interiors_overlap(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    // Cheap reject first.
    let (alo, ahi) = a.bounding_box();
    let (blo, bhi) = b.bounding_box();
    if ahi.x <= blo.x || bhi.x <= alo.x || ahi.y <= blo.y || bhi.y <= alo.y {
        return false;
    }
    let axes = |poly: &ConvexPolygon| {
        let vs = poly.vertices().to_vec();
        (0..vs.len()).map(move |i| {
            let e = vs[(i + 1) % vs.len()] - vs[i];
            Vector2::new(e.y, -e.x)
        })
    };
    for axis in axes(a).chain(axes(b)) {
        let project = |poly: &ConvexPolygon| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for v in poly.vertices() {
                let p = axis.dot(&v.coords);
                lo = lo.min(p);
                hi = hi.max(p);
            }
            (lo, hi)
        };
        let (alo, ahi) = project(a);
        let (blo, bhi) = project(b);
        if ahi <= blo || bhi <= alo {
            return false;
        }
    }
    true
}

/// True when the 3D segment from `source` to `receiver` clears every
/// building; false when it passes through some prism's interior.
///
/// Per building, the segment's 2D projection is clipped against the
/// footprint; the crossing blocks the path iff the segment's height dips
/// strictly below the roof somewhere on the clipped interval. Height is
/// linear in the parameter, so only the lower endpoint of the interval
/// needs checking.
pub fn classify_los(
    map: &EnvironmentMap2D,
    source: Point3<f64>,
    receiver: Point3<f64>,
) -> Result<bool> {
    if source == receiver {
        return Err(Error::DegenerateSegment);
    }
    let a = Point2::new(source.x, source.y);
    let b = Point2::new(receiver.x, receiver.y);
    for building in &map.buildings {
        if let Some((t0, t1)) = building.footprint.clip_segment(a, b) {
            let z = |t: f64| source.z + t * (receiver.z - source.z);
            if z(t0).min(z(t1)) < building.height {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Planar polar angle of `target - anchor` in `[0, 2*pi)`, heights ignored.
///
/// A target directly above or below the anchor has no defined azimuth; it is
/// assigned angle 0 so that every point lands in exactly one sector.
pub fn azimuth(anchor: Point3<f64>, target: Point3<f64>) -> f64 {
    planar_azimuth(target.x - anchor.x, target.y - anchor.y)
}

/// Azimuthal partition of the horizon around a presumed source.
#[derive(Debug, Clone)]
pub struct Sectorization {
    anchor: Point3<f64>,
    boundaries: Vec<f64>,
    assignments: Vec<Vec<usize>>,
}

impl Sectorization {
    pub fn anchor(&self) -> Point3<f64> {
        self.anchor
    }

    /// Sorted sector boundary angles in `[0, 2*pi)`; sector `j` spans from
    /// `boundaries[j]` counter-clockwise to the next boundary (wrapping).
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Measurement indices per sector; every input index appears in exactly
    /// one list.
    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    pub fn sector_count(&self) -> usize {
        self.boundaries.len()
    }

    /// Sector index owning the azimuth `angle` (radians, any real value).
    pub fn sector_of(&self, angle: f64) -> usize {
        let a = angle.rem_euclid(TAU);
        if a < self.boundaries[0] {
            self.boundaries.len() - 1 // wraps through zero
        } else {
            self.boundaries.partition_point(|&b| b <= a) - 1
        }
    }
}

/// Partitions the horizon around `anchor` so that each sector contains at
/// most one merged cluster of buildings, then buckets `positions` by their
/// azimuth from the anchor.
///
/// Each building subtends an azimuth arc; overlapping arcs merge; sector
/// boundaries sit at the edges of the merged arcs, so every cluster gets a
/// sector of its own and every gap between clusters gets an obstacle-free
/// sector of its own. A single elevation threshold can then describe each
/// sector: "blocked beyond the cluster" in arc sectors, "clear everywhere"
/// in gap sectors. With no buildings (or when the merged arcs swallow the
/// whole horizon) the result is a single all-round sector with its boundary
/// at angle 0.
pub fn sectorize(
    map: &FootprintMap,
    anchor: Point3<f64>,
    positions: &[Point3<f64>],
) -> Result<Sectorization> {
    let anchor2 = Point2::new(anchor.x, anchor.y);
    if let Some(index) = map.footprint_containing(anchor2) {
        return Err(Error::AnchorInsideFootprint { index });
    }

    let mut arcs: Vec<Arc> = map
        .footprints
        .iter()
        .map(|f| f.subtended_arc(anchor2))
        .collect();

    // Merge to a fixpoint; merging two arcs can make the result overlap an
    // arc it previously cleared.
    loop {
        let mut merged = None;
        'search: for i in 0..arcs.len() {
            for j in (i + 1)..arcs.len() {
                if arcs[i].overlaps(&arcs[j]) {
                    merged = Some((i, j));
                    break 'search;
                }
            }
        }
        match merged {
            Some((i, j)) => {
                let u = arcs[i].union(&arcs[j]);
                arcs[i] = u;
                arcs.swap_remove(j);
            }
            None => break,
        }
    }

    let mut boundaries: Vec<f64> = if arcs.is_empty() || arcs.iter().any(|a| a.width >= TAU) {
        vec![0.0]
    } else {
        arcs.iter()
            .flat_map(|a| [a.start.rem_euclid(TAU), (a.start + a.width).rem_euclid(TAU)])
            .collect()
    };
    boundaries.sort_by(f64::total_cmp);
    boundaries.dedup(); // arcs that exactly abut would otherwise leave a zero-width sector

    let mut sectorization = Sectorization {
        anchor,
        boundaries,
        assignments: Vec::new(),
    };
    let mut assignments = vec![Vec::new(); sectorization.boundaries.len()];
    for (m, p) in positions.iter().enumerate() {
        assignments[sectorization.sector_of(azimuth(anchor, *p))].push(m);
    }
    sectorization.assignments = assignments;
    Ok(sectorization)
}
