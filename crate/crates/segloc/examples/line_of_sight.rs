//! Occlusion geometry: which aerial receivers can see a ground source?
//!
//! Classifies a dense receiver grid against the demo map and renders the
//! shadows as ASCII. A receiver is NLOS when the straight segment from the
//! source passes through any building below its roof height.

use segloc::{classify_los, demo_map, Point2, Point3};

fn main() -> segloc::Result<()> {
    let map = demo_map(50.0);
    let source = Point3::new(0.0, 0.0, 0.0);
    let receiver_height = 20.0;

    // A few hand-picked queries first.
    let queries = [
        ("overhead", Point3::new(0.0, 0.0, 120.0)),
        ("behind the north-east building", Point3::new(35.0, 35.0, 20.0)),
        ("in front of it", Point3::new(15.0, 15.0, 20.0)),
        ("far west, behind the small block", Point3::new(-90.0, 0.0, 20.0)),
    ];
    for (label, receiver) in queries {
        let los = classify_los(&map, source, receiver)?;
        println!(
            "{:>32} ({:>6.1},{:>6.1},{:>5.1}) -> {}",
            label,
            receiver.x,
            receiver.y,
            receiver.z,
            if los { "LOS" } else { "NLOS" }
        );
    }

    // Shadow map at receiver height: '#' footprint, 'x' NLOS, '.' LOS.
    let cells = 40usize;
    let step = map.side() / cells as f64;
    println!();
    println!(
        "shadows at z = {} m from a source at the center ({} m cells):",
        receiver_height, step
    );
    for row in 0..cells {
        let y = map.half_side() - (row as f64 + 0.5) * step;
        let mut line = String::with_capacity(cells);
        for col in 0..cells {
            let x = -map.half_side() + (col as f64 + 0.5) * step;
            let inside = map
                .buildings()
                .iter()
                .any(|b| b.footprint().contains_strict(Point2::new(x, y)));
            let c = if inside {
                '#'
            } else if classify_los(&map, source, Point3::new(x, y, receiver_height))? {
                '.'
            } else {
                'x'
            };
            line.push(c);
        }
        println!("  {line}");
    }
    Ok(())
}
