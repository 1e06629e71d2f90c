//! Exact weak-submodularity constants of small oracles: modular functions
//! sit at 1, coverage at most 1, supermodular ones above 1.
//!
//! cargo run --example weak_submodularity

use wsmax::algorithms::estimate_wsc;
use wsmax::objectives::{average, truncate, Modular, SquaredModular, WeightedCoverage};
use wsmax::RngStream;

fn main() -> wsmax::Result<()> {
    let mut rng = RngStream::new(5);
    let modular = Modular::new(vec![1.0, 2.0, 0.5, 3.0, 1.5])?;
    let squared = SquaredModular::new(vec![1.0, 2.0, 0.5, 3.0, 1.5])?;
    let cover = WeightedCoverage::random(7, 5, 0.4, &mut rng)?;
    let other = WeightedCoverage::random(7, 5, 0.4, &mut rng)?;

    println!("modular          {:.4}", estimate_wsc(&modular)?.value);
    let sq = estimate_wsc(&squared)?;
    println!("squared modular  {:.4} attained at {:?}", sq.value, sq.maximizer);
    println!("coverage         {:.4}", estimate_wsc(&cover)?.value);
    println!("truncated at 2   {:.4}", estimate_wsc(&truncate(&cover, 2.0)?)?.value);
    let mean = average(vec![truncate(&cover, 2.0)?, truncate(&other, 2.0)?], None)?;
    println!("average of two   {:.4}", estimate_wsc(&mean)?.value);
    Ok(())
}
