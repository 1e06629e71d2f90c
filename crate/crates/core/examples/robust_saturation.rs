//! Max-min selection over several objectives: SSA against Random-WSSA with
//! a few sample sizes, checked against exhaustive search.
//!
//! cargo run --example robust_saturation

use wsmax::algorithms::{
    brute_force_max_min, random_wssa, saturation_constants, ssa, wssa_alpha, DrgBoundInputs,
    WssaConfig,
};
use wsmax::objectives::{Normalized, WeightedCoverage};
use wsmax::{CostModel, RngStream};

fn main() -> wsmax::Result<()> {
    let mut rng = RngStream::new(99);
    let n = 12;
    let tasks = (0..3)
        .map(|_| WeightedCoverage::random(n, 6, 0.3, &mut rng).and_then(Normalized::new))
        .collect::<wsmax::Result<Vec<_>>>()?;
    let costs = CostModel::uniform(n, 1.0, 2.0, &mut rng)?;
    let budget = 4.0;

    let exact = brute_force_max_min(&tasks, &costs, budget)?;
    println!("exhaustive   min value {:.4} {:?}", exact.value, exact.set);

    let full = ssa(&tasks, &costs, budget, 1.0)?;
    println!(
        "ssa          min value {:.4} level [{:.4}, {:.4}] cost {:.3} after {} probes",
        full.min_objective, full.k_achieved, full.k_upper, full.cost, full.outer_iterations
    );
    for r in [3, 6, n] {
        let out = random_wssa(&tasks, &costs, &WssaConfig::new(budget, 1.0, 0.1, 5).with_sample_size(r))?;
        println!(
            "wssa r={r:<3}   min value {:.4} {:?} cost {:.3}, {} calls",
            out.min_objective, out.selected, out.cost, out.oracle_calls
        );
    }

    let (big, small) = saturation_constants(&tasks)?;
    let alpha = wssa_alpha(
        &DrgBoundInputs {
            mu: 1.0,
            wsc: 1.0,
            delta: 0.01,
            iterations: full.max_inner_iterations,
            max_singleton: big,
            min_gain: small,
            optimal_cost: budget,
            squared_cost: budget * budget,
        },
        full.outer_iterations,
    )?;
    println!("relaxation alpha {:.3}, holding with probability {:.3}", alpha.alpha, alpha.success_probability);
    Ok(())
}
