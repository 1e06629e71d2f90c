//! Performance-constrained selection: reach `f(S) >= A` at low cost.

use super::{best_ratio, check_sizes, resolve_sample_size, Sampler};
use crate::error::{Error, Result};
use crate::ground::{
    sample_size, CostModel, CountingOracle, Element, IterationRecord, RngStream, SelectionTrace,
    SetFunction,
};

/// Parameters of a Dual Randomized Greedy run.
#[derive(Debug, Clone, PartialEq)]
pub struct DrgConfig {
    pub threshold: f64,
    pub epsilon: f64,
    pub sample_size: Option<usize>,
    pub seed: u64,
    /// Accept `f(S) >= A - tolerance`; defaults to `1e-9 * max(1, A)`.
    pub tolerance: Option<f64>,
}

impl DrgConfig {
    pub fn new(threshold: f64, epsilon: f64, seed: u64) -> Self {
        Self {
            threshold,
            epsilon,
            sample_size: None,
            seed,
            tolerance: None,
        }
    }

    pub fn with_sample_size(mut self, r: usize) -> Self {
        self.sample_size = Some(r);
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or_else(|| 1e-9 * self.threshold.max(1.0))
    }

    /// Without a fixed `r`, `U` is the smallest number of elements whose
    /// largest singleton values add up to the threshold, a lower bound on the
    /// size of any feasible set when the objective is submodular. Costs `n`
    /// singleton evaluations.
    pub fn resolved_sample_size<F: SetFunction + ?Sized>(&self, oracle: &F) -> Result<usize> {
        let n = oracle.ground_size();
        if let Some(r) = resolve_sample_size(n, self.sample_size)? {
            return Ok(r);
        }
        let empty = oracle.evaluate(&[]);
        let mut singles: Vec<f64> = (0..n).map(|j| oracle.evaluate(&[j]) - empty).collect();
        singles.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        let mut u = n;
        for (i, v) in singles.iter().enumerate() {
            acc += v;
            if acc >= self.threshold - self.tolerance() {
                u = i + 1;
                break;
            }
        }
        sample_size(n, u, self.epsilon)
    }

    fn validate(&self) -> Result<()> {
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(Error::param("A", format!("threshold {} must be finite and >= 0", self.threshold)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("{} is outside (0, 1)", self.epsilon)));
        }
        if !(self.tolerance() >= 0.0) {
            return Err(Error::param("tolerance", "must be nonnegative"));
        }
        Ok(())
    }
}

/// The shared loop of DRG and the deterministic greedy cover.
///
/// Elements are added until `f(S) >= threshold - tolerance`; zero-gain
/// picks are still added. Exhausting the pool first is an error.
pub(super) fn cover_loop<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    threshold: f64,
    tolerance: f64,
    mut sampler: Sampler<'_>,
) -> Result<SelectionTrace> {
    let n = check_sizes(oracle, costs)?;
    let counted = CountingOracle::new(oracle);
    let mut selected: Vec<Element> = Vec::new();
    let mut value = counted.evaluate(&selected);
    let mut spent = 0.0;
    let mut remaining: Vec<Element> = (0..n).collect();
    let mut iterations = Vec::new();

    while value < threshold - tolerance {
        if remaining.is_empty() {
            return Err(Error::InfeasibleThreshold {
                threshold,
                reached: value,
            });
        }
        let sampled = sampler.draw(&remaining)?;
        let best = best_ratio(&counted, costs, &mut selected, value, &sampled);
        selected.push(best.element);
        spent += costs.cost(best.element);
        value = best.value;
        remaining.retain(|&j| j != best.element);
        iterations.push(IterationRecord {
            sampled,
            chosen: best.element,
            marginal_gain: best.gain,
            gain_cost_ratio: best.ratio,
            accepted: true,
            running_cost: spent,
        });
    }

    Ok(SelectionTrace {
        selected,
        value,
        cost: spent,
        iterations,
        rng_seed: sampler.seed(),
        oracle_calls: counted.calls(),
        ..SelectionTrace::default()
    })
}

/// Dual Randomized Greedy.
pub fn drg<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    config: &DrgConfig,
) -> Result<SelectionTrace> {
    config.validate()?;
    check_sizes(oracle, costs)?;
    let counted = CountingOracle::new(oracle);
    let r = config.resolved_sample_size(&counted)?;
    let setup_calls = counted.calls();
    let mut rng = RngStream::new(config.seed);
    let sampler = Sampler::Random { rng: &mut rng, r };
    let mut trace = cover_loop(oracle, costs, config.threshold, config.tolerance(), sampler)?;
    trace.oracle_calls += setup_calls;
    Ok(trace)
}

/// Deterministic greedy cover: DRG with the whole pool examined every pass.
pub fn greedy_cover<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    threshold: f64,
    tolerance: f64,
) -> Result<SelectionTrace> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::param("A", format!("threshold {threshold} must be finite and >= 0")));
    }
    cover_loop(oracle, costs, threshold, tolerance, Sampler::Full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{brute_force_min_cost, cover_constants};
    use crate::objectives::WeightedCoverage;

    fn toy() -> (WeightedCoverage, CostModel) {
        (
            WeightedCoverage::new(vec![1.0; 3], vec![vec![0, 1], vec![2], vec![0, 1, 2]]).unwrap(),
            CostModel::new(vec![1.0, 1.0, 2.0]).unwrap(),
        )
    }

    #[test]
    fn zero_threshold_is_met_by_empty_set() {
        let (f, c) = toy();
        let t = drg(&f, &c, &DrgConfig::new(0.0, 0.1, 3)).unwrap();
        assert!(t.selected.is_empty());
        assert_eq!(t.cost, 0.0);
    }

    #[test]
    fn full_threshold_within_wolsey_factor() {
        let (f, c) = toy();
        let cfg = DrgConfig::new(3.0, 0.1, 3).with_sample_size(3);
        let t = drg(&f, &c, &cfg).unwrap();
        assert!(t.value >= 3.0 - cfg.tolerance());
        let opt = brute_force_min_cost(&f, &c, 3.0, 1e-12).unwrap();
        assert_eq!(opt.cost, 2.0);
        let (big_m, small_m) = cover_constants(&f, &t).unwrap();
        assert!(t.cost <= (1.0 + (big_m / small_m).ln()) * opt.cost + 1e-12);
    }

    #[test]
    fn unreachable_threshold_errors() {
        let (f, c) = toy();
        let err = drg(&f, &c, &DrgConfig::new(4.0, 0.1, 3)).unwrap_err();
        assert!(matches!(err, Error::InfeasibleThreshold { reached, .. } if reached == 3.0));
    }

    #[test]
    fn drg_meets_threshold_on_random_instances() {
        let mut rng = RngStream::new(13);
        for seed in 0..60 {
            let f = WeightedCoverage::random(14, 10, 0.25, &mut rng).unwrap();
            let c = CostModel::uniform(14, 1.0, 2.0, &mut rng).unwrap();
            let all: Vec<_> = (0..14).collect();
            let a = 0.8 * f.evaluate(&all);
            let cfg = DrgConfig::new(a, 0.2, seed).with_sample_size(4);
            let t = drg(&f, &c, &cfg).unwrap();
            assert!(f.evaluate(&t.selected) >= a - cfg.tolerance());
            assert!((c.total_cost(&t.selected).unwrap() - t.cost).abs() < 1e-12);
        }
    }

    #[test]
    fn full_sample_drg_equals_greedy_cover() {
        let mut rng = RngStream::new(17);
        for seed in 0..20 {
            let f = WeightedCoverage::random(9, 6, 0.3, &mut rng).unwrap();
            let c = CostModel::uniform(9, 1.0, 2.0, &mut rng).unwrap();
            let a = 0.9 * f.evaluate(&(0..9).collect::<Vec<_>>());
            let cfg = DrgConfig::new(a, 0.2, seed).with_sample_size(9);
            let x = drg(&f, &c, &cfg).unwrap();
            let y = greedy_cover(&f, &c, a, cfg.tolerance()).unwrap();
            assert_eq!(x.selected, y.selected);
        }
    }

    #[test]
    fn default_sample_size_is_within_bounds() {
        let (f, _) = toy();
        let cfg = DrgConfig::new(3.0, 0.5, 1);
        let r = cfg.resolved_sample_size(&f).unwrap();
        assert!((1..=3).contains(&r));
    }
}
