//! High-probability approximation bounds for MRG, DRG and Random-WSSA.
//!
//! Evaluators return the raw formula value; a nonpositive MRG bound means
//! no guarantee at that confidence.

use crate::error::{Error, Result};
use crate::ground::{Element, SelectionTrace, SetFunction};

/// Inputs of the MRG lower bound on `f(S_mrg) / f(S*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrgBoundInputs {
    /// Lower bound on the expected `η`.
    pub mu: f64,
    /// Weak-submodularity constant `w_f >= 1`.
    pub wsc: f64,
    /// Confidence parameter in `(0, 1]`; `1` removes the concentration penalty.
    pub delta: f64,
    /// Smallest `U` with the `U` cheapest costs summing to `B`.
    pub sample_bound: usize,
    pub max_cost: f64,
    pub budget: f64,
}

fn check_common(mu: f64, wsc: f64, delta: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::param("mu", format!("{mu} is outside (0, 1]")));
    }
    if !(wsc >= 1.0 && wsc.is_finite()) {
        return Err(Error::param("w_f", format!("{wsc} must be finite and >= 1")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", format!("{delta} is outside (0, 1]")));
    }
    Ok(())
}

/// `(1 − exp[−(μ − (c_max/B)·√((U/2)·ln(1/δ))) / w_f]) / (2 w_f²)`.
pub fn mrg_bound(inputs: &MrgBoundInputs) -> Result<f64> {
    let MrgBoundInputs {
        mu,
        wsc,
        delta,
        sample_bound,
        max_cost,
        budget,
    } = *inputs;
    if !(budget > 0.0) {
        return Err(Error::param("B", format!("budget {budget} must be positive")));
    }
    check_common(mu, wsc, delta)?;
    if !(max_cost >= 0.0) {
        return Err(Error::param("c_max", "must be nonnegative"));
    }
    let penalty = (max_cost / budget) * (0.5 * sample_bound as f64 * -delta.ln()).sqrt();
    Ok((1.0 - (-(mu - penalty) / wsc).exp()) / (2.0 * wsc * wsc))
}

/// The confidence `δ = exp(−(2/U)(μB/c_max)²)` at which the MRG bound is 0.
pub fn mrg_critical_delta(inputs: &MrgBoundInputs) -> f64 {
    let x = inputs.mu * inputs.budget / inputs.max_cost;
    (-(2.0 / inputs.sample_bound as f64) * x * x).exp()
}

/// Inputs of the DRG upper bound on `c(S_drg) / c(S*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrgBoundInputs {
    pub mu: f64,
    pub wsc: f64,
    pub delta: f64,
    /// Iterations `L` taken by the cover.
    pub iterations: usize,
    /// `M`, the largest singleton value.
    pub max_singleton: f64,
    /// `m`, the smallest relevant marginal gain.
    pub min_gain: f64,
    /// A lower bound on the optimal cost `c(S*)`.
    pub optimal_cost: f64,
    /// `c²(S) = Σ_{j∈S} c_j²` of the returned selection.
    pub squared_cost: f64,
}

/// `(w_f/μ)[1 + (L−1) ln w_f + ln(M/m)] + √(½ ln(1/δ) c²(S)) / (μ c(S*))`.
pub fn drg_bound(inputs: &DrgBoundInputs) -> Result<f64> {
    let DrgBoundInputs {
        mu,
        wsc,
        delta,
        iterations,
        max_singleton,
        min_gain,
        optimal_cost,
        squared_cost,
    } = *inputs;
    if !(min_gain > 0.0) {
        return Err(Error::UndefinedBound("m = 0"));
    }
    if !(max_singleton >= min_gain) {
        return Err(Error::param("M", format!("M = {max_singleton} is below m = {min_gain}")));
    }
    if !(optimal_cost > 0.0) {
        return Err(Error::param("c(S*)", "optimal cost lower bound must be positive"));
    }
    check_common(mu, wsc, delta)?;
    let l = iterations.max(1) as f64;
    let head = (wsc / mu) * (1.0 + (l - 1.0) * wsc.ln() + (max_singleton / min_gain).ln());
    let tail = (0.5 * -delta.ln() * squared_cost).sqrt() / (mu * optimal_cost);
    Ok(head + tail)
}

/// Budget relaxation and success probability of Random-WSSA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBound {
    pub alpha: f64,
    /// `(1 − δ)^P`.
    pub success_probability: f64,
}

/// `α` from the DRG bound evaluated with the WSC of the truncated mean,
/// together with the probability that all `P` inner covers succeed.
pub fn wssa_alpha(inputs: &DrgBoundInputs, outer_iterations: usize) -> Result<AlphaBound> {
    let alpha = drg_bound(inputs)?;
    Ok(AlphaBound {
        alpha,
        success_probability: (1.0 - inputs.delta).powi(outer_iterations as i32),
    })
}

/// `(M, m)` of the saturation guarantee: `M = max_{i,j} f^i({j})` and
/// `m = min_{i,j} f^i_j(N \ {j})`.
pub fn saturation_constants<F: SetFunction>(oracles: &[F]) -> Result<(f64, f64)> {
    if oracles.is_empty() {
        return Err(Error::param("oracles", "at least one objective is required"));
    }
    let n = oracles[0].ground_size();
    let all: Vec<Element> = (0..n).collect();
    let mut big = f64::NEG_INFINITY;
    let mut small = f64::INFINITY;
    for f in oracles {
        let full = f.evaluate(&all);
        for j in 0..n {
            big = big.max(f.evaluate(&[j]));
            let without: Vec<Element> = all.iter().copied().filter(|&x| x != j).collect();
            small = small.min(full - f.evaluate(&without));
        }
    }
    Ok((big, small))
}

/// `(M, m)` of the greedy cover guarantee for a finished cover trace:
/// `M = max_j f({j})` and `m = min_{j ∉ S^(L−1)} f_j(S^(L−1))`, where
/// `S^(L−1)` is the selection before the final addition.
pub fn cover_constants<F: SetFunction + ?Sized>(
    oracle: &F,
    trace: &SelectionTrace,
) -> Result<(f64, f64)> {
    let n = oracle.ground_size();
    let empty = oracle.evaluate(&[]);
    let big = (0..n)
        .map(|j| oracle.evaluate(&[j]) - empty)
        .fold(f64::NEG_INFINITY, f64::max);
    let Some((_, before)) = trace.selected.split_last() else {
        return Err(Error::UndefinedBound("empty cover has no final iteration"));
    };
    let mut base = before.to_vec();
    let base_value = oracle.evaluate(&base);
    let mut small = f64::INFINITY;
    for j in (0..n).filter(|j| !before.contains(j)) {
        base.push(j);
        small = small.min(oracle.evaluate(&base) - base_value);
        base.pop();
    }
    Ok((big, small))
}
