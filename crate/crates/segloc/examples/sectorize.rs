//! Azimuthal sectorization: carve the horizon around a presumed source so
//! each sector contains at most one building cluster. One critical angle
//! per sector is all the segmented regression then needs.

use segloc::{generate_measurements, sectorize, Point3, Scenario};

fn main() -> segloc::Result<()> {
    let scenario = Scenario::demo();
    let map = scenario.map().footprint_map();
    let measurements = generate_measurements(&scenario, 40, 7);
    let positions: Vec<Point3<f64>> = measurements.iter().map(|m| m.position).collect();

    for anchor in [Point3::new(0.0, 0.0, 0.0), Point3::new(-20.0, -40.0, 0.0)] {
        let s = sectorize(&map, anchor, &positions)?;
        println!(
            "anchor ({:.0}, {:.0}): {} sectors",
            anchor.x,
            anchor.y,
            s.sector_count()
        );
        let b = s.boundaries();
        for j in 0..s.sector_count() {
            let from = b[j].to_degrees();
            let to = b[(j + 1) % b.len()].to_degrees();
            println!(
                "  sector {j}: [{:>6.1} deg, {:>6.1} deg), {} measurements",
                from,
                to,
                s.assignments()[j].len()
            );
        }
        let total: usize = s.assignments().iter().map(Vec::len).sum();
        assert_eq!(total, positions.len()); // a partition, nothing dropped
        println!();
    }

    // Anchors inside a footprint are not valid presumed sources.
    let inside = sectorize(&map, Point3::new(30.0, 40.0, 0.0), &positions);
    println!("anchor (30, 40) inside a building -> {:?}", inside.err());
    Ok(())
}
