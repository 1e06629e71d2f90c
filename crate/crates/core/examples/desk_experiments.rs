//! The three constellation experiments at desk scale, written as CSV.
//!
//! cargo run --release --example desk_experiments -- [out_dir]

use std::path::PathBuf;

use wsmax::experiments::{
    emit_report, run_experiment_a, run_experiment_b, run_experiment_c, OutputFormat,
    ScenarioConfig,
};

fn main() -> wsmax::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "desk_out".into());
    let runs = [
        ("a", run_experiment_a(&ScenarioConfig::desk_a())?),
        ("b", run_experiment_b(&ScenarioConfig::desk_b())?),
        ("c", run_experiment_c(&ScenarioConfig::desk_c())?),
    ];
    for (name, report) in runs {
        let dir = out.join(name);
        emit_report(&report, &dir, OutputFormat::Csv)?;
        println!("experiment {name} -> {}", dir.display());
        for row in report.summary() {
            println!(
                "  {:<12} r={:<3} B_or_A={:<5} objective {:>12.3} cost {:>7.3} wall {:>8.2} ms",
                row.algorithm, row.r, row.b_or_a, row.mean_objective, row.mean_cost, row.mean_wall_ms
            );
        }
    }
    Ok(())
}
