//! A Walker-Delta constellation over an equal-angle Earth grid: footprint
//! sizes, per-satellite visibility and the area covered by a selection.
//!
//! cargo run --example walker_coverage

use wsmax::objectives::WeightedCoverage;
use wsmax::orbitsim::{
    build_grid, build_walker_delta, covered_cells, footprint_half_angle, visibility,
    WalkerDeltaConfig,
};
use wsmax::SetFunction;

fn main() -> wsmax::Result<()> {
    let config = WalkerDeltaConfig::new(60.0, 24, 6, 1).with_altitude(2000.0);
    let eph = build_walker_delta(&config)?;
    let grid = build_grid(5.0)?;
    println!(
        "{} satellites, period {:.1} min, {} grid cells",
        eph.len(),
        eph.period() / 60.0,
        grid.len()
    );
    for deg in [30.0f64, 60.0] {
        let half = deg.to_radians();
        let ground = footprint_half_angle(eph.semi_major_axis, half).to_degrees();
        println!("cone half-angle {deg} deg -> footprint radius {ground:.2} deg of arc");
    }

    let half = 30f64.to_radians();
    let t = 600.0;
    let seen = visibility(&eph.positions_ecef(t), &grid.centroids(), half);
    let coverage = WeightedCoverage::from_footprints(grid.areas(), seen)?;
    let all: Vec<usize> = (0..eph.len()).collect();
    let every_other: Vec<usize> = (0..eph.len()).step_by(2).collect();
    let full = coverage.evaluate(&all);
    println!("whole constellation covers {:.3e} km^2 ({:.1}%)", full, 100.0 * full / grid.total_area());
    println!(
        "every other satellite covers {:.3e} km^2, {} cells",
        coverage.evaluate(&every_other),
        covered_cells(&eph, &grid, &every_other, t, half).len()
    );
    Ok(())
}
