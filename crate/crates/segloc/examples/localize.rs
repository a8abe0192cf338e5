//! The full blind grid search on a noisy scenario: coarse 5 m sweep, 1 m
//! refinement around the winner, and a global coefficient refit. The
//! estimator sees footprints, positions, and RSS; never heights or labels.

use std::time::Instant;

use segloc::{generate_measurements, localize, GridSpec, Scenario, sv_candidate_grid};

fn main() -> segloc::Result<()> {
    let scenario = Scenario::demo();
    let mut measurements = generate_measurements(&scenario, 200, 42);
    for m in &mut measurements {
        m.truth_los = None; // withhold ground truth, as in deployment
    }
    let map = scenario.map().footprint_map(); // heights gone too

    let grid = GridSpec::for_map(&map, 5.0, sv_candidate_grid(31), Some(1.0))?;
    let start = Instant::now();
    let result = localize(&map, &measurements, &grid)?;
    let elapsed = start.elapsed();

    let truth = scenario.source();
    let error = (result.s_hat.x - truth.x).hypot(result.s_hat.y - truth.y);
    println!(
        "truth    ({:>7.2}, {:>7.2})",
        truth.x, truth.y
    );
    println!(
        "estimate ({:>7.2}, {:>7.2})   error {:.2} m   in {:.2?}",
        result.s_hat.x, result.s_hat.y, error, elapsed
    );
    println!(
        "candidates evaluated: {} ({} grid points excluded inside footprints)",
        result.candidate_count, result.excluded_count
    );
    println!("total residual: {:.1} dB^2", result.total_residual);
    for (j, (sv, r)) in result
        .sv_hats
        .iter()
        .zip(&result.per_sector_residuals)
        .enumerate()
    {
        println!(
            "  sector {j}: critical angle {:>4.1} deg, residual {:>8.1}",
            sv.degrees(),
            r
        );
    }
    let phi = result.phi_hat.as_array();
    println!(
        "refit coefficients: LOS ({:.1}, {:.1}, {:.1})  NLOS ({:.1}, {:.1}, {:.1})",
        phi[0], phi[1], phi[2], phi[3], phi[4], phi[5]
    );
    Ok(())
}
