//! Budget-constrained selection: modified greedy, MRG and the Top-K baseline.

use super::{best_ratio, check_sizes, resolve_sample_size, Sampler};
use crate::error::{Error, Result};
use crate::ground::{
    gain_cost_ratio, sample_size, CostModel, CountingOracle, Element, IterationRecord, RngStream,
    SelectionTrace, SetFunction,
};

/// Parameters of a Modified Randomized Greedy run.
#[derive(Debug, Clone, PartialEq)]
pub struct MrgConfig {
    pub budget: f64,
    pub epsilon: f64,
    /// Fixed per-pass sample size; otherwise `ceil((n/U) ln(1/ε))`.
    pub sample_size: Option<usize>,
    pub seed: u64,
}

impl MrgConfig {
    pub fn new(budget: f64, epsilon: f64, seed: u64) -> Self {
        Self {
            budget,
            epsilon,
            sample_size: None,
            seed,
        }
    }

    pub fn with_sample_size(mut self, r: usize) -> Self {
        self.sample_size = Some(r);
        self
    }

    /// The per-pass sample size this configuration uses on `costs`.
    pub fn resolved_sample_size(&self, costs: &CostModel) -> Result<usize> {
        let n = costs.len();
        match resolve_sample_size(n, self.sample_size)? {
            Some(r) => Ok(r),
            None => sample_size(n, costs.sample_bound(self.budget), self.epsilon),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(Error::param("B", format!("budget {} must be finite and >= 0", self.budget)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("{} is outside (0, 1)", self.epsilon)));
        }
        Ok(())
    }
}

pub(super) struct BudgetedRun {
    pub trace: SelectionTrace,
    /// `η` for every accepted pass, when shadowing was requested.
    pub etas: Vec<f64>,
}

/// The shared loop of modified greedy and MRG.
///
/// Every pass removes the examined element from the candidate pool whether
/// or not it was added. The loop stops early once nothing left in the pool
/// fits the residual budget, which cannot change the selection.
pub(super) fn budgeted_greedy<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    budget: f64,
    mut sampler: Sampler<'_>,
    shadow: bool,
) -> Result<BudgetedRun> {
    let n = check_sizes(oracle, costs)?;
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::param("B", format!("budget {budget} must be finite and >= 0")));
    }
    let counted = CountingOracle::new(oracle);
    let rng_seed = sampler.seed();

    let mut selected: Vec<Element> = Vec::new();
    let mut spent = 0.0;
    let mut value = counted.evaluate(&selected);
    let mut remaining: Vec<Element> = (0..n).collect();
    let mut iterations = Vec::new();
    let mut etas = Vec::new();
    let mut shadow_calls = 0usize;

    while !remaining.is_empty() {
        let slack = budget - spent;
        if remaining.iter().all(|&j| costs.cost(j) > slack) {
            break;
        }
        let sampled = sampler.draw(&remaining)?;
        let best = best_ratio(&counted, costs, &mut selected, value, &sampled);
        let accepted = spent + costs.cost(best.element) <= budget;
        if shadow && accepted {
            let before = counted.calls();
            let full = best_ratio(&counted, costs, &mut selected, value, &remaining);
            shadow_calls += counted.calls() - before;
            etas.push(eta(best.ratio, full.ratio));
        }
        if accepted {
            selected.push(best.element);
            spent += costs.cost(best.element);
            value = best.value;
        }
        remaining.retain(|&j| j != best.element);
        iterations.push(IterationRecord {
            sampled,
            chosen: best.element,
            marginal_gain: best.gain,
            gain_cost_ratio: best.ratio,
            accepted,
            running_cost: spent,
        });
    }

    // Fall back to the best feasible singleton when it beats the greedy set.
    let mut best_single: Option<(Element, f64)> = None;
    for j in (0..n).filter(|&j| costs.cost(j) <= budget) {
        let v = counted.evaluate(&[j]);
        if best_single.is_none_or(|(_, bv)| v > bv) {
            best_single = Some((j, v));
        }
    }
    let mut trace = SelectionTrace {
        rng_seed,
        ..SelectionTrace::default()
    };
    match best_single {
        None => {
            trace.no_feasible_singleton = true;
            trace.value = value;
        }
        Some((j, v)) if v > value => {
            trace.selected = vec![j];
            trace.value = v;
            trace.cost = costs.cost(j);
            trace.used_singleton_fallback = true;
        }
        Some(_) => {
            trace.selected = selected;
            trace.value = value;
            trace.cost = spent;
        }
    }
    trace.iterations = iterations;
    trace.oracle_calls = counted.calls() - shadow_calls;
    Ok(BudgetedRun { trace, etas })
}

/// Ratio of the sampled pick to the full-pool pick; `0/0` counts as a
/// perfect match.
fn eta(sampled_ratio: f64, full_ratio: f64) -> f64 {
    if full_ratio <= 0.0 {
        return 1.0;
    }
    if full_ratio.is_infinite() {
        return if sampled_ratio.is_infinite() { 1.0 } else { 0.0 };
    }
    (sampled_ratio / full_ratio).clamp(0.0, 1.0)
}

/// Modified greedy: highest gain-to-cost ratio over all remaining elements,
/// added while the budget allows, then compared with the best feasible
/// singleton.
pub fn modified_greedy<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    budget: f64,
) -> Result<SelectionTrace> {
    Ok(budgeted_greedy(oracle, costs, budget, Sampler::Full, false)?.trace)
}

/// Modified Randomized Greedy: each pass examines a uniform sample of the
/// remaining pool instead of the whole pool.
pub fn mrg<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    config: &MrgConfig,
) -> Result<SelectionTrace> {
    config.validate()?;
    check_sizes(oracle, costs)?;
    let r = config.resolved_sample_size(costs)?;
    let mut rng = RngStream::new(config.seed);
    let sampler = Sampler::Random { rng: &mut rng, r };
    Ok(budgeted_greedy(oracle, costs, config.budget, sampler, false)?.trace)
}

pub(super) fn mrg_with_shadow<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    config: &MrgConfig,
) -> Result<BudgetedRun> {
    config.validate()?;
    check_sizes(oracle, costs)?;
    let r = config.resolved_sample_size(costs)?;
    let mut rng = RngStream::new(config.seed);
    let sampler = Sampler::Random { rng: &mut rng, r };
    budgeted_greedy(oracle, costs, config.budget, sampler, true)
}

/// Rank every element by its singleton gain-to-cost ratio and add them in
/// that order while the budget allows.
pub fn top_k_baseline<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    budget: f64,
) -> Result<SelectionTrace> {
    let n = check_sizes(oracle, costs)?;
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::param("B", format!("budget {budget} must be finite and >= 0")));
    }
    let counted = CountingOracle::new(oracle);
    let empty = counted.evaluate(&[]);
    let mut ranked: Vec<(Element, f64, f64)> = (0..n)
        .map(|j| {
            let gain = counted.evaluate(&[j]) - empty;
            (j, gain, gain_cost_ratio(gain, costs.cost(j)))
        })
        .collect();
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));

    let mut trace = SelectionTrace::default();
    let mut spent = 0.0;
    for (j, gain, ratio) in ranked {
        let accepted = spent + costs.cost(j) <= budget;
        if accepted {
            trace.selected.push(j);
            spent += costs.cost(j);
        }
        trace.iterations.push(IterationRecord {
            sampled: vec![j],
            chosen: j,
            marginal_gain: gain,
            gain_cost_ratio: ratio,
            accepted,
            running_cost: spent,
        });
    }
    trace.value = if trace.selected.is_empty() {
        empty
    } else {
        counted.evaluate(&trace.selected)
    };
    trace.cost = spent;
    trace.oracle_calls = counted.calls();
    Ok(trace)
}
