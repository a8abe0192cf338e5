//! Weighted centroids vs the grid search on one measurement set.
//!
//! The genius-aided centroid gets the ground-truth LOS labels (a reference
//! a real system cannot match); everything else runs blind.

use segloc::{
    generate_measurements, localize, sv_candidate_grid, wcl, GridSpec, Scenario, WclConfig,
};

fn main() -> segloc::Result<()> {
    let scenario = Scenario::demo();
    let measurements = generate_measurements(&scenario, 200, 42);
    let truth = scenario.source();
    let error = |x: f64, y: f64| (x - truth.x).hypot(y - truth.y);

    println!("method       estimate              error");
    for (name, config) in [
        ("wcl", WclConfig::plain()),
        ("wcl-mod", WclConfig::modified()),
        ("wcl-genius", WclConfig::genius()),
    ] {
        let est = wcl(&measurements, &config)?;
        println!(
            "{:<12} ({:>7.2}, {:>7.2})   {:>6.2} m",
            name,
            est.x,
            est.y,
            error(est.x, est.y)
        );
    }

    let map = scenario.map().footprint_map();
    let grid = GridSpec::for_map(&map, 5.0, sv_candidate_grid(31), Some(1.0))?;
    let blind: Vec<_> = measurements
        .iter()
        .map(|m| segloc::Measurement {
            truth_los: None,
            ..*m
        })
        .collect();
    let result = localize(&map, &blind, &grid)?;
    println!(
        "{:<12} ({:>7.2}, {:>7.2})   {:>6.2} m",
        "segreg",
        result.s_hat.x,
        result.s_hat.y,
        error(result.s_hat.x, result.s_hat.y)
    );
    Ok(())
}
