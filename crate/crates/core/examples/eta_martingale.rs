//! Realized quality ratios of MRG against a shadow full greedy pass, and
//! whether their increments show a drift.
//!
//! cargo run --example eta_martingale

use wsmax::algorithms::{eta_diagnostic, EtaSummary, MrgConfig};
use wsmax::objectives::WeightedCoverage;
use wsmax::{CostModel, RngStream, SetFunction};

fn report(name: &str, f: &dyn SetFunction, costs: &CostModel, budget: f64, r: usize) -> wsmax::Result<()> {
    let runs = (0..500)
        .map(|seed| eta_diagnostic(f, costs, &MrgConfig::new(budget, 0.1, seed).with_sample_size(r)))
        .collect::<wsmax::Result<Vec<_>>>()?;
    let s = EtaSummary::from_runs(&runs);
    println!(
        "{name}: {} etas in [{:.3}, {:.3}], mean {:.4}, mu estimate {:.4}",
        s.samples, s.min, s.max, s.mean, s.mu_estimate()
    );
    println!(
        "    increments: mean {:+.4}, standard error {:.4}, within 3 SE: {}",
        s.increment_mean,
        s.increment_std_error,
        s.drift_within(3.0)
    );
    Ok(())
}

fn main() -> wsmax::Result<()> {
    let toy = WeightedCoverage::new(vec![1.0; 3], vec![vec![0, 1], vec![2], vec![0, 1, 2]])?;
    report("toy, r = 2", &toy, &CostModel::new(vec![1.0, 1.0, 2.0])?, 2.0, 2)?;

    let mut rng = RngStream::new(11);
    let f = WeightedCoverage::random(12, 10, 0.3, &mut rng)?;
    let costs = CostModel::uniform(12, 1.0, 2.0, &mut rng)?;
    report("random 12-element coverage, r = 3", &f, &costs, 6.0, 3)
}
