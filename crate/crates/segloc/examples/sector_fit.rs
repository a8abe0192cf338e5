//! One sector's segmented fit, step by step: scan candidate critical
//! angles, watch the residual collapse where the LOS/NLOS split matches the
//! geometry, and read the recovered path-loss coefficients off the winner.

use segloc::{
    best_support_vector, build_design, classify_los, model_rss, sector_residual, solve_ls,
    sv_candidate_grid, truth_params, Building, EnvironmentMap2D, Measurement, Point2, Point3,
    PropagationTruth,
};

fn main() -> segloc::Result<()> {
    // A single tall slab east of the source. Receivers behind it are NLOS
    // at shallow elevations; receivers elsewhere are LOS at steep ones.
    let building = Building::new(
        &[
            Point2::new(50.0, -10.0),
            Point2::new(70.0, -10.0),
            Point2::new(70.0, 10.0),
            Point2::new(50.0, 10.0),
        ],
        1000.0,
    )?;
    let map = EnvironmentMap2D::new(vec![building], 200.0)?;
    let truth = PropagationTruth::new(0.0, 2.0, 7.0, 0.0, 0.0, 5.0)?;
    let params = truth_params(&truth);
    let source = Point3::new(0.0, 0.0, 0.0);

    let placements: &[(f64, f64)] = &[
        (0.0, 30.0),
        (45.0, 22.0),
        (90.0, 18.0),
        (135.0, 26.0),
        (180.0, 20.0),
        (225.0, 28.0),
        (270.0, 24.0),
        (315.0, 33.0),
        (-8.0, 90.0),
        (-5.0, 100.0),
        (0.0, 110.0),
        (3.0, 120.0),
        (6.0, 130.0),
        (8.0, 105.0),
    ];
    let mut sector = Vec::new();
    for &(az_deg, d2) in placements {
        let az = az_deg.to_radians();
        let position = Point3::new(d2 * az.cos(), d2 * az.sin(), 50.0);
        let los = classify_los(&map, source, position)?;
        sector.push(Measurement {
            position,
            rss_db: model_rss(&params, source, position, los),
            truth_los: Some(los),
        });
    }
    let nlos = sector.iter().filter(|m| m.truth_los == Some(false)).count();
    println!(
        "{} receivers in the sector, {} of them NLOS (noise-free RSS)",
        sector.len(),
        nlos
    );

    println!();
    println!("candidate angle vs residual:");
    let candidates = sv_candidate_grid(31);
    for sv in candidates.iter().step_by(2) {
        let residual = sector_residual(&sector, source, *sv);
        let bar = "#".repeat((residual.sqrt() as usize).min(60));
        println!("  {:>4.0} deg  {:>12.4e}  {}", sv.degrees(), residual, bar);
    }

    let (best, residual) = best_support_vector(&sector, source, &candidates);
    println!();
    println!(
        "best candidate: {:.0} deg (residual {residual:.3e})",
        best.degrees()
    );

    let fit = solve_ls(&build_design(&sector, source, best));
    println!("recovered coefficients (LOS a, b, c | NLOS a, b, c):");
    let phi = fit.phi.as_array();
    println!(
        "  fit:   {:>7.3} {:>9.3} {:>7.3} | {:>7.3} {:>9.3} {:>7.3}",
        phi[0], phi[1], phi[2], phi[3], phi[4], phi[5]
    );
    let t = params.as_array();
    println!(
        "  truth: {:>7.3} {:>9.3} {:>7.3} | {:>7.3} {:>9.3} {:>7.3}",
        t[0], t[1], t[2], t[3], t[4], t[5]
    );
    println!(
        "  split: {} LOS rows, {} NLOS rows",
        fit.n_los, fit.n_nlos
    );
    Ok(())
}
