//! Exhaustive reference solvers for small ground sets.

use super::check_sizes;
use crate::error::{Error, Result};
use crate::ground::{CostModel, Element, SetFunction};

pub const MAX_ENUMERATION: usize = 22;
pub const MAX_WSC_ENUMERATION: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub set: Vec<Element>,
    pub value: f64,
    pub cost: f64,
}

fn members(mask: u32) -> Vec<Element> {
    (0..32).filter(|j| mask >> j & 1 == 1).collect()
}

fn mask_cost(costs: &CostModel, mask: u32) -> f64 {
    members(mask).into_iter().map(|j| costs.cost(j)).sum()
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::GroundSetTooLarge { size: n, limit });
    }
    Ok(())
}

/// `max f(S)` subject to `c(S) <= budget`. Ties prefer the cheaper set,
/// then the lower mask.
pub fn brute_force_budget_opt<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    budget: f64,
) -> Result<ExhaustiveResult> {
    let n = check_sizes(oracle, costs)?;
    guard(n, MAX_ENUMERATION)?;
    let mut best = ExhaustiveResult {
        set: Vec::new(),
        value: oracle.evaluate(&[]),
        cost: 0.0,
    };
    for mask in 1u32..(1u32 << n) {
        let cost = mask_cost(costs, mask);
        if cost > budget {
            continue;
        }
        let set = members(mask);
        let value = oracle.evaluate(&set);
        if value > best.value || (value == best.value && cost < best.cost) {
            best = ExhaustiveResult { set, value, cost };
        }
    }
    Ok(best)
}

/// `min c(S)` subject to `f(S) >= threshold - tolerance`.
pub fn brute_force_min_cost<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    threshold: f64,
    tolerance: f64,
) -> Result<ExhaustiveResult> {
    let n = check_sizes(oracle, costs)?;
    guard(n, MAX_ENUMERATION)?;
    let mut best: Option<ExhaustiveResult> = None;
    let mut reached = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << n) {
        let cost = mask_cost(costs, mask);
        if best.as_ref().is_some_and(|b| cost >= b.cost) {
            continue;
        }
        let set = members(mask);
        let value = oracle.evaluate(&set);
        reached = reached.max(value);
        if value >= threshold - tolerance {
            best = Some(ExhaustiveResult { set, value, cost });
        }
    }
    best.ok_or(Error::InfeasibleThreshold { threshold, reached })
}

/// `max min_i f^i(S)` subject to `c(S) <= budget`.
pub fn brute_force_max_min<F: SetFunction>(
    oracles: &[F],
    costs: &CostModel,
    budget: f64,
) -> Result<ExhaustiveResult> {
    if oracles.is_empty() {
        return Err(Error::param("oracles", "at least one objective is required"));
    }
    let n = check_sizes(&oracles[0], costs)?;
    guard(n, MAX_ENUMERATION)?;
    let worst = |set: &[Element]| {
        oracles
            .iter()
            .map(|f| f.evaluate(set))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = ExhaustiveResult {
        set: Vec::new(),
        value: worst(&[]),
        cost: 0.0,
    };
    for mask in 1u32..(1u32 << n) {
        let cost = mask_cost(costs, mask);
        if cost > budget {
            continue;
        }
        let set = members(mask);
        let value = worst(&set);
        if value > best.value {
            best = ExhaustiveResult { set, value, cost };
        }
    }
    Ok(best)
}

/// Exact weak-submodularity constant of a small oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct WscEstimate {
    /// `+∞` when some positive gain follows a zero gain.
    pub value: f64,
    /// `(S, T, j)` attaining the maximum, if any ratio was positive.
    pub maximizer: Option<(Vec<Element>, Vec<Element>, Element)>,
}

impl WscEstimate {
    pub fn is_unbounded(&self) -> bool {
        self.value.is_infinite()
    }
}

/// `max f_j(T) / f_j(S)` over `S ⊆ T ⊂ N`, `j ∉ T`, with `0/0 = 0` and
/// `x/0 = ∞`. Gains within `1e-12 · max(1, max|f|)` of zero count as zero.
pub fn estimate_wsc<F: SetFunction + ?Sized>(oracle: &F) -> Result<WscEstimate> {
    let n = oracle.ground_size();
    if n == 0 {
        return Err(Error::EmptyGroundSet);
    }
    guard(n, MAX_WSC_ENUMERATION)?;
    let full = 1u32 << n;
    let table: Vec<f64> = (0..full).map(|m| oracle.evaluate(&members(m))).collect();
    let scale = table.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let zero = 1e-12 * scale;

    let mut best = 0.0f64;
    let mut arg: Option<(u32, u32, usize)> = None;
    for t in 0..full {
        if t == full - 1 {
            continue;
        }
        for j in (0..n).filter(|j| t >> j & 1 == 0) {
            let bit = 1u32 << j;
            let gain_t = table[(t | bit) as usize] - table[t as usize];
            // Walk every submask S of T, T itself included.
            let mut s = t;
            loop {
                let gain_s = table[(s | bit) as usize] - table[s as usize];
                let ratio = if gain_s.abs() <= zero {
                    if gain_t.abs() <= zero {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    gain_t / gain_s
                };
                if ratio > best {
                    best = ratio;
                    arg = Some((s, t, j));
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
    }
    Ok(WscEstimate {
        value: best,
        maximizer: arg.map(|(s, t, j)| (members(s), members(t), j)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::RngStream;
    use crate::objectives::{truncate, Modular, SquaredModular, WeightedCoverage};

    fn toy() -> (WeightedCoverage, CostModel) {
        (
            WeightedCoverage::new(vec![1.0; 3], vec![vec![0, 1], vec![2], vec![0, 1, 2]]).unwrap(),
            CostModel::new(vec![1.0, 1.0, 2.0]).unwrap(),
        )
    }

    #[test]
    fn budget_opt_examples() {
        let (f, c) = toy();
        assert_eq!(brute_force_budget_opt(&f, &c, 2.0).unwrap().value, 3.0);
        let zero = brute_force_budget_opt(&f, &c, 0.0).unwrap();
        assert!(zero.set.is_empty());
        assert_eq!(zero.value, 0.0);
        // Unit costs, B = k: sum of the k largest weights.
        let m = Modular::new(vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        let u = CostModel::unit(4).unwrap();
        assert_eq!(brute_force_budget_opt(&m, &u, 2.0).unwrap().value, 7.0);
    }

    #[test]
    fn min_cost_examples() {
        let (f, c) = toy();
        let r = brute_force_min_cost(&f, &c, 0.0, 0.0).unwrap();
        assert!(r.set.is_empty());
        assert_eq!(r.cost, 0.0);
        let r = brute_force_min_cost(&f, &c, 3.0, 0.0).unwrap();
        assert_eq!(r.cost, 2.0);
        // Only e3 is cheap: it alone should be returned.
        let pricey = CostModel::new(vec![50.0, 50.0, 1.0]).unwrap();
        let r = brute_force_min_cost(&f, &pricey, 3.0, 0.0).unwrap();
        assert_eq!(r.set, vec![2]);
        assert!(matches!(
            brute_force_min_cost(&f, &c, 4.0, 0.0),
            Err(Error::InfeasibleThreshold { .. })
        ));
    }

    #[test]
    fn enumeration_guard() {
        let m = Modular::new(vec![1.0; 23]).unwrap();
        let u = CostModel::unit(23).unwrap();
        assert!(matches!(
            brute_force_budget_opt(&m, &u, 1.0),
            Err(Error::GroundSetTooLarge { .. })
        ));
        let m = Modular::new(vec![1.0; 13]).unwrap();
        assert!(estimate_wsc(&m).is_err());
    }

    #[test]
    fn wsc_of_modular_is_one() {
        let m = Modular::new(vec![0.3, 1.7, 2.2, 0.9, 1.1]).unwrap();
        let w = estimate_wsc(&m).unwrap();
        assert!((w.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wsc_of_coverage_at_most_one() {
        let mut rng = RngStream::new(2);
        for _ in 0..10 {
            let f = WeightedCoverage::random(7, 6, 0.4, &mut rng).unwrap();
            assert!(estimate_wsc(&f).unwrap().value <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn wsc_of_squared_sum_matches_enumeration() {
        // f = (Σ w)^2: f_j(S) = w_j (2 W(S) + w_j). The maximum ratio pairs
        // S = ∅ with T = N \ {j}: (2 W(N \ j) + w_j) / w_j.
        let w = [1.0, 2.0, 0.5, 1.5];
        let f = SquaredModular::new(w.to_vec()).unwrap();
        let total: f64 = w.iter().sum();
        let oracle = w
            .iter()
            .map(|wj| (2.0 * (total - wj) + wj) / wj)
            .fold(0.0, f64::max);
        let got = estimate_wsc(&f).unwrap();
        assert!((got.value - oracle).abs() < 1e-12);
        assert!(got.value > 1.0);
        assert_eq!(got.maximizer.unwrap().0, Vec::<usize>::new());
    }

    #[test]
    fn wsc_zero_over_zero_is_zero() {
        let m = Modular::new(vec![1.0, 2.0, 3.0]).unwrap();
        let t = truncate(&m, 0.0).unwrap();
        assert_eq!(estimate_wsc(&t).unwrap().value, 0.0);
    }

    #[test]
    fn wsc_flags_unbounded() {
        // Complementary pair: nothing alone, everything together.
        struct And;
        impl SetFunction for And {
            fn ground_size(&self) -> usize {
                2
            }
            fn evaluate(&self, s: &[Element]) -> f64 {
                if s.len() == 2 { 1.0 } else { 0.0 }
            }
        }
        assert!(estimate_wsc(&And).unwrap().is_unbounded());
    }

    #[test]
    fn max_min_examples() {
        let a = Modular::new(vec![3.0, 0.0, 1.0]).unwrap();
        let b = Modular::new(vec![0.0, 3.0, 1.0]).unwrap();
        let u = CostModel::unit(3).unwrap();
        assert_eq!(brute_force_max_min(&[&a, &b], &u, 1.0).unwrap().value, 1.0);
        assert_eq!(brute_force_max_min(&[&a, &b], &u, 2.0).unwrap().value, 3.0);
    }
}
