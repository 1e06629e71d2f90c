//! Performance-constrained selection: reach a coverage threshold at minimum
//! cost with DRG, compare against the deterministic cover and the exact
//! minimum, and evaluate the cost guarantee.
//!
//! cargo run --example min_cost_cover

use wsmax::algorithms::{
    brute_force_min_cost, cover_constants, drg, greedy_cover, drg_bound, DrgBoundInputs,
    DrgConfig,
};
use wsmax::objectives::WeightedCoverage;
use wsmax::{CostModel, RngStream, SetFunction};

fn main() -> wsmax::Result<()> {
    let mut rng = RngStream::new(7);
    let n = 12;
    let f = WeightedCoverage::random(n, 8, 0.35, &mut rng)?;
    let costs = CostModel::uniform(n, 1.0, 2.0, &mut rng)?;
    let full = f.evaluate(&(0..n).collect::<Vec<_>>());

    for fraction in [0.5, 0.8, 1.0] {
        let threshold = fraction * full;
        let cfg = DrgConfig::new(threshold, 0.1, 3);
        let exact = brute_force_min_cost(&f, &costs, threshold, cfg.tolerance())?;
        let greedy = greedy_cover(&f, &costs, threshold, cfg.tolerance())?;
        let random = drg(&f, &costs, &cfg)?;
        println!(
            "A = {fraction:.1} f(N): exact {:.3}, greedy {:.3}, DRG {:.3} (r = {}, {} calls)",
            exact.cost,
            greedy.cost,
            random.cost,
            cfg.resolved_sample_size(&f)?,
            random.oracle_calls
        );

        let (max_singleton, min_gain) = cover_constants(&f, &greedy)?;
        let inputs = DrgBoundInputs {
            mu: 1.0,
            wsc: 1.0,
            delta: 1.0,
            iterations: greedy.len(),
            max_singleton,
            min_gain,
            optimal_cost: exact.cost,
            squared_cost: costs.squared_total(&exact.set)?,
        };
        match drg_bound(&inputs) {
            Ok(factor) => println!("    greedy cost ratio {:.3} <= guarantee {factor:.3}", greedy.cost / exact.cost),
            Err(e) => println!("    guarantee undefined here: {e}"),
        }
    }
    Ok(())
}
