//! Build a scenario, synthesize labeled measurements, and save both to disk
//! in the formats the `segloc` binary consumes.

use segloc::{generate_measurements, write_measurements, Scenario, ScenarioFile};

fn main() -> segloc::Result<()> {
    let scenario = Scenario::demo();
    let out_dir = std::env::temp_dir().join("segloc-demo");
    std::fs::create_dir_all(&out_dir)?;

    let scenario_path = out_dir.join("scenario.json");
    ScenarioFile::from_scenario(&scenario).write(&scenario_path)?;

    let measurements = generate_measurements(&scenario, 200, 42);
    let csv_path = out_dir.join("measurements.csv");
    write_measurements(&csv_path, &measurements)?;

    let los = measurements
        .iter()
        .filter(|m| m.truth_los == Some(true))
        .count();
    println!("scenario: {}", scenario_path.display());
    println!(
        "  {} x {} m map, {} buildings, source at ({}, {}), receivers at {} m",
        scenario.map().side(),
        scenario.map().side(),
        scenario.map().buildings().len(),
        scenario.source().x,
        scenario.source().y,
        scenario.aerial_height(),
    );
    println!("measurements: {}", csv_path.display());
    println!(
        "  {} rows, {} LOS / {} NLOS",
        measurements.len(),
        los,
        measurements.len() - los
    );
    println!("first rows:");
    println!("  x,y,z,rss_db,los");
    for m in measurements.iter().take(5) {
        println!(
            "  {:.2},{:.2},{:.2},{:.2},{}",
            m.position.x,
            m.position.y,
            m.position.z,
            m.rss_db,
            match m.truth_los {
                Some(true) => "1",
                Some(false) => "0",
                None => "NA",
            }
        );
    }
    println!();
    println!("replay the same set via the CLI:");
    println!(
        "  segloc simulate --scenario {} --count 200 --seed 42 --out {}",
        scenario_path.display(),
        csv_path.display()
    );
    Ok(())
}
