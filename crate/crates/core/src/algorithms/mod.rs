//! Selection algorithms, exhaustive reference solvers and bound evaluators.
//!
//! Every greedy routine breaks ties towards the lowest element index, so
//! runs with the full candidate set are deterministic and the randomized
//! variants with `r = |N|` reproduce their deterministic counterparts.

mod bounds;
mod diagnostics;
mod dual;
mod exhaustive;
mod greedy;
mod saturation;

pub use bounds::{
    cover_constants, saturation_constants, mrg_bound, mrg_critical_delta, drg_bound,
    wssa_alpha, AlphaBound, DrgBoundInputs, MrgBoundInputs,
};
pub use diagnostics::{eta_diagnostic, EtaRun, EtaSummary};
pub use dual::{drg, greedy_cover, DrgConfig};
pub use exhaustive::{
    brute_force_budget_opt, brute_force_max_min, brute_force_min_cost, estimate_wsc,
    ExhaustiveResult, WscEstimate, MAX_ENUMERATION, MAX_WSC_ENUMERATION,
};
pub use greedy::{modified_greedy, mrg, top_k_baseline, MrgConfig};
pub use saturation::{random_wssa, ssa, ssa_with, BisectionStep, WssaConfig, WssaOutcome};

use crate::error::{Error, Result};
use crate::ground::{gain_cost_ratio, CostModel, Element, RngStream, SetFunction};

/// The best candidate of one pass.
#[derive(Debug, Clone, Copy)]
struct Best {
    element: Element,
    value: f64,
    gain: f64,
    ratio: f64,
}

/// Highest gain-to-cost ratio among `candidates`; ties go to the lowest index.
fn best_ratio<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    base: &mut Vec<Element>,
    base_value: f64,
    candidates: &[Element],
) -> Best {
    let mut best: Option<Best> = None;
    for &j in candidates {
        base.push(j);
        let value = oracle.evaluate(base);
        base.pop();
        let gain = value - base_value;
        let ratio = gain_cost_ratio(gain, costs.cost(j));
        let better = match best {
            None => true,
            Some(b) => ratio > b.ratio || (ratio == b.ratio && j < b.element),
        };
        if better {
            best = Some(Best {
                element: j,
                value,
                gain,
                ratio,
            });
        }
    }
    best.expect("candidate set is nonempty")
}

/// Draws the candidate set of one pass: either everything (deterministic
/// greedy) or a uniform sample of size `min(r, |X|)`.
enum Sampler<'a> {
    Full,
    Random { rng: &'a mut RngStream, r: usize },
}

impl Sampler<'_> {
    fn draw(&mut self, remaining: &[Element]) -> Result<Vec<Element>> {
        match self {
            Sampler::Full => Ok(remaining.to_vec()),
            Sampler::Random { rng, r } => rng.sample_without_replacement(remaining, *r),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Sampler::Full => None,
            Sampler::Random { rng, .. } => Some(rng.seed()),
        }
    }
}

fn check_sizes<F: SetFunction + ?Sized>(oracle: &F, costs: &CostModel) -> Result<usize> {
    let n = oracle.ground_size();
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    if costs.len() != n {
        return Err(Error::param(
            "costs",
            format!("{} costs for a ground set of {n}", costs.len()),
        ));
    }
    Ok(n)
}

fn resolve_sample_size(n: usize, fixed: Option<usize>) -> Result<Option<usize>> {
    match fixed {
        Some(r) if r == 0 || r > n => Err(Error::param(
            "r",
            format!("sample size {r} is outside [1, {n}]"),
        )),
        other => Ok(other),
    }
}
