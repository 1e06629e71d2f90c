//! Worst-case robust selection by bisection on a saturation level `k`.
//!
//! For a candidate level `k`, the mean of the objectives truncated at `k`
//! reaches `k` exactly when every objective reaches `k`. A greedy cover of
//! that mean either fits the relaxed budget `αB` (so `k` is achievable) or
//! not, and the interval `[k_m, k_M]` is halved until it is narrower than
//! `1/n`.

use super::dual::cover_loop;
use super::{check_sizes, resolve_sample_size, Sampler};
use crate::error::{Error, Result};
use crate::ground::{sample_size, CostModel, Element, RngStream, SetFunction};
use crate::objectives::{average, truncate};

/// Parameters of a Random-WSSA run.
#[derive(Debug, Clone, PartialEq)]
pub struct WssaConfig {
    pub budget: f64,
    /// Budget relaxation `α >= 1`.
    pub alpha: f64,
    pub epsilon: f64,
    pub sample_size: Option<usize>,
    pub seed: u64,
    pub max_outer_iterations: usize,
    /// Per-objective slack on `f^i(S) >= k`; defaults to `1e-9 * max(1, k_M)`.
    pub tolerance: Option<f64>,
    /// Bisection stops once `k_M - k_m` drops below this; defaults to `1/n`
    /// for `n` objectives.
    pub floor: Option<f64>,
}

impl WssaConfig {
    pub fn new(budget: f64, alpha: f64, epsilon: f64, seed: u64) -> Self {
        Self {
            budget,
            alpha,
            epsilon,
            sample_size: None,
            seed,
            max_outer_iterations: 200,
            tolerance: None,
            floor: None,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = Some(floor);
        self
    }

    pub fn with_sample_size(mut self, r: usize) -> Self {
        self.sample_size = Some(r);
        self
    }

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
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha", format!("{} must be >= 1", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("{} is outside (0, 1)", self.epsilon)));
        }
        if let Some(f) = self.floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::param("floor", format!("{f} must be positive")));
            }
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::param("max_outer_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// One probe of the bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct BisectionStep {
    pub level: f64,
    /// Cost of the inner cover; `None` when the inner cover failed outright.
    pub cover_cost: Option<f64>,
    pub accepted: bool,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WssaOutcome {
    /// Sorted selection.
    pub selected: Vec<Element>,
    /// `k_m` at termination; 0 when no level was found feasible.
    pub k_achieved: f64,
    /// `k_M` at termination.
    pub k_upper: f64,
    /// Number of inner covers run (`P`).
    pub outer_iterations: usize,
    pub cost: f64,
    /// `min_i f^i(S)` of the returned selection.
    pub min_objective: f64,
    pub objective_values: Vec<f64>,
    pub steps: Vec<BisectionStep>,
    pub oracle_calls: usize,
    /// Longest inner cover (`L`).
    pub max_inner_iterations: usize,
    /// Interval width below which the bisection stopped.
    pub floor: f64,
    pub rng_seed: Option<u64>,
    pub tolerance: f64,
}

impl WssaOutcome {
    pub fn interval_width(&self) -> f64 {
        self.k_upper - self.k_achieved
    }
}

fn saturate<F: SetFunction>(
    oracles: &[F],
    costs: &CostModel,
    config: &WssaConfig,
    mut sampler: Sampler<'_>,
) -> Result<WssaOutcome> {
    let WssaConfig { budget, alpha, tolerance, max_outer_iterations, .. } = *config;
    if oracles.is_empty() {
        return Err(Error::param("oracles", "at least one objective is required"));
    }
    let n_ground = check_sizes(&oracles[0], costs)?;
    for f in oracles {
        check_sizes(f, costs)?;
    }
    let n = oracles.len() as f64;
    let all: Vec<Element> = (0..n_ground).collect();
    let full_values: Vec<f64> = oracles.iter().map(|f| f.evaluate(&all)).collect();
    let mut oracle_calls = oracles.len();

    let mut k_low = 0.0;
    let mut k_high = full_values.iter().copied().fold(f64::INFINITY, f64::min);
    let tolerance = tolerance.unwrap_or(1e-9 * k_high.max(1.0));
    let cap = alpha * budget;
    let mut best: Vec<Element> = Vec::new();
    let mut steps = Vec::new();
    let mut max_inner = 0;

    let floor = config.floor.unwrap_or(1.0 / n);
    while k_high - k_low >= floor && steps.len() < max_outer_iterations {
        let level = 0.5 * (k_low + k_high);
        let truncated = oracles
            .iter()
            .map(|f| truncate(f, level))
            .collect::<Result<Vec<_>>>()?;
        let mean = average(truncated, None)?;
        let sampler_ref = match &mut sampler {
            Sampler::Full => Sampler::Full,
            Sampler::Random { rng, r } => Sampler::Random { rng, r: *r },
        };
        // The mean reaches `level - τ/n` only if every objective reaches `level - τ`.
        match cover_loop(&mean, costs, level, tolerance / n, sampler_ref) {
            Ok(trace) => {
                oracle_calls += trace.oracle_calls * oracles.len();
                max_inner = max_inner.max(trace.iterations.len());
                let accepted = trace.cost <= cap;
                steps.push(BisectionStep {
                    level,
                    cover_cost: Some(trace.cost),
                    accepted,
                    inner_iterations: trace.iterations.len(),
                });
                if accepted {
                    k_low = level;
                    best = trace.selected;
                } else {
                    k_high = level;
                }
            }
            Err(Error::InfeasibleThreshold { .. }) => {
                // Cannot happen for level <= min_i f^i(N) beyond rounding.
                debug_assert!(false, "saturation level {level} unreachable");
                steps.push(BisectionStep {
                    level,
                    cover_cost: None,
                    accepted: false,
                    inner_iterations: n_ground,
                });
                k_high = level;
            }
            Err(e) => return Err(e),
        }
    }

    best.sort_unstable();
    let objective_values: Vec<f64> = oracles.iter().map(|f| f.evaluate(&best)).collect();
    oracle_calls += oracles.len();
    let min_objective = objective_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WssaOutcome {
        cost: costs.total_cost(&best)?,
        selected: best,
        k_achieved: k_low,
        k_upper: k_high,
        outer_iterations: steps.len(),
        min_objective,
        objective_values,
        steps,
        oracle_calls,
        max_inner_iterations: max_inner,
        floor,
        rng_seed: sampler.seed(),
        tolerance,
    })
}

/// Randomized Weak Submodular Saturation: bisection with a DRG inner cover.
pub fn random_wssa<F: SetFunction>(
    oracles: &[F],
    costs: &CostModel,
    config: &WssaConfig,
) -> Result<WssaOutcome> {
    config.validate()?;
    let r = config.resolved_sample_size(costs)?;
    let mut rng = RngStream::new(config.seed);
    saturate(oracles, costs, config, Sampler::Random { rng: &mut rng, r })
}

/// Submodular saturation with a deterministic full greedy cover. With unit
/// costs and `budget = K` this is the cardinality-constrained original.
pub fn ssa<F: SetFunction>(
    oracles: &[F],
    costs: &CostModel,
    budget: f64,
    alpha: f64,
) -> Result<WssaOutcome> {
    ssa_with(oracles, costs, &WssaConfig::new(budget, alpha, 0.5, 0))
}

/// [`ssa`] under a full config; the sample size and seed are ignored.
pub fn ssa_with<F: SetFunction>(
    oracles: &[F],
    costs: &CostModel,
    config: &WssaConfig,
) -> Result<WssaOutcome> {
    config.validate()?;
    saturate(oracles, costs, config, Sampler::Full)
}
