//! A small Monte-Carlo RMSE sweep over the measurement count, all four
//! estimators on shared random draws, written as plot-ready CSV.
//!
//! This is a desk-scale version of the full benchmark; raise `trials` and
//! the value list (or use `segloc bench --plan ...`) for smoother curves.

use segloc::{
    run_bench, sv_candidate_grid, write_records, BenchPlan, GridSpec, Method, Scenario,
    SweepVariable,
};

fn main() -> segloc::Result<()> {
    let scenario = Scenario::demo();
    let grid = GridSpec::new(5.0, 100.0, sv_candidate_grid(31), Some(1.0))?;
    let plan = BenchPlan {
        scenario,
        sweep: SweepVariable::MeasurementCount,
        values: vec![100.0, 150.0, 200.0],
        trials: 5,
        base_seed: 1,
        measurement_count: 200,
        methods: Method::ALL.to_vec(),
        grid,
    };

    let outcome = run_bench(&plan)?;
    if !outcome.failures.is_empty() {
        eprintln!("{} trials failed", outcome.failures.len());
    }

    println!("RMSE (m) over {} seeds:", plan.trials);
    print!("{:<12}", "method");
    for v in &plan.values {
        print!("  M={:<6}", v);
    }
    println!();
    for method in &plan.methods {
        print!("{:<12}", method.name());
        for value in &plan.values {
            let cell = outcome
                .aggregates
                .iter()
                .find(|a| a.method == *method && a.sweep_value == *value);
            match cell {
                Some(a) => print!("  {:<8.2}", a.rmse_m),
                None => print!("  {:<8}", "-"),
            }
        }
        println!();
    }

    let path = std::env::temp_dir().join("segloc-demo").join("sweep.csv");
    std::fs::create_dir_all(path.parent().unwrap())?;
    write_records(&path, &outcome.records)?;
    println!();
    println!(
        "{} per-trial records -> {}",
        outcome.records.len(),
        path.display()
    );
    Ok(())
}
