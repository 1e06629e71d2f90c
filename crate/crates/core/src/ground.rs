//! Ground sets, additive costs, the set-function oracle contract and the
//! seeded sampling stream shared by every algorithm.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Dense element index into a ground set.
pub type Element = usize;

/// A finite ground set `{0, .., size - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    size: usize,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyGroundSet);
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> {
        0..self.size
    }

    pub fn check(&self, element: Element) -> Result<()> {
        if element >= self.size {
            return Err(Error::ElementOutOfRange {
                element,
                size: self.size,
            });
        }
        Ok(())
    }
}

/// Additive, nonnegative per-element selection costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    costs: Vec<f64>,
}

impl CostModel {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        if let Some((element, &value)) = costs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || **c < 0.0)
        {
            return Err(Error::InvalidCost { element, value });
        }
        Ok(Self { costs })
    }

    /// Unit costs, under which `c(S) = |S|`.
    pub fn unit(size: usize) -> Result<Self> {
        Self::new(vec![1.0; size])
    }

    /// Costs drawn independently and uniformly from `[low, high]`.
    pub fn uniform(size: usize, low: f64, high: f64, rng: &mut RngStream) -> Result<Self> {
        if !(low >= 0.0 && high >= low) {
            return Err(Error::param("cost range", format!("[{low}, {high}]")));
        }
        Self::new((0..size).map(|_| rng.uniform(low, high)).collect())
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn ground(&self) -> GroundSet {
        GroundSet { size: self.len() }
    }

    pub fn cost(&self, element: Element) -> f64 {
        self.costs[element]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// `c(S)`, the sum of member costs.
    pub fn total_cost(&self, subset: &[Element]) -> Result<f64> {
        let ground = self.ground();
        let mut total = 0.0;
        for &j in subset {
            ground.check(j)?;
            total += self.costs[j];
        }
        Ok(total)
    }

    /// `c²(S) = Σ c_j²`.
    pub fn squared_total(&self, subset: &[Element]) -> Result<f64> {
        let ground = self.ground();
        let mut total = 0.0;
        for &j in subset {
            ground.check(j)?;
            total += self.costs[j] * self.costs[j];
        }
        Ok(total)
    }

    /// The costs sorted nondecreasingly, duplicates retained.
    pub fn sorted(&self) -> Vec<f64> {
        let mut sorted = self.costs.clone();
        sorted.sort_by(f64::total_cmp);
        sorted
    }

    pub fn max_cost(&self) -> f64 {
        self.costs.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_cost(&self) -> f64 {
        self.costs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest `U` such that the `U` cheapest costs sum to at least `budget`,
    /// clamped to `|N|` when the whole ground set costs less than the budget.
    pub fn sample_bound(&self, budget: f64) -> usize {
        let mut prefix = 0.0;
        for (i, c) in self.sorted().into_iter().enumerate() {
            prefix += c;
            if prefix >= budget {
                return i + 1;
            }
        }
        self.len()
    }

    /// Multiply every cost by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::param("factor", format!("{factor} is not a positive scale")));
        }
        Self::new(self.costs.iter().map(|c| c * factor).collect())
    }
}

/// Per-iteration sample size `ceil((n / U) ln(1/ε))`, clamped to `[1, n]`.
pub fn sample_size(n_ground: usize, sample_bound: usize, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", format!("{epsilon} is outside (0, 1)")));
    }
    if sample_bound == 0 || sample_bound > n_ground {
        return Err(Error::param(
            "U",
            format!("{sample_bound} is outside [1, {n_ground}]"),
        ));
    }
    let raw = (n_ground as f64 / sample_bound as f64) * (1.0 / epsilon).ln();
    // Guard against ceil(1.0000000000000002) == 2 from rounding in the log.
    let r = (raw - 1e-12).ceil();
    Ok((r.max(1.0) as usize).min(n_ground))
}

/// A normalized, monotone nondecreasing set function over `{0, .., n - 1}`.
///
/// Implementations must be pure: the same subset always evaluates to the
/// same value. Subsets are passed as slices of distinct elements in any order.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn evaluate(&self, subset: &[Element]) -> f64;

    /// Declared submodularity (WSC ≤ 1), when known.
    fn is_submodular(&self) -> bool {
        false
    }

    /// A known upper bound on the weak-submodularity constant.
    fn wsc_upper_bound(&self) -> Option<f64> {
        None
    }
}

impl<F: SetFunction + ?Sized> SetFunction for &F {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        (**self).evaluate(subset)
    }
    fn is_submodular(&self) -> bool {
        (**self).is_submodular()
    }
    fn wsc_upper_bound(&self) -> Option<f64> {
        (**self).wsc_upper_bound()
    }
}

impl<F: SetFunction + ?Sized> SetFunction for Box<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        (**self).evaluate(subset)
    }
    fn is_submodular(&self) -> bool {
        (**self).is_submodular()
    }
    fn wsc_upper_bound(&self) -> Option<f64> {
        (**self).wsc_upper_bound()
    }
}

impl<F: SetFunction + ?Sized> SetFunction for std::sync::Arc<F> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        (**self).evaluate(subset)
    }
    fn is_submodular(&self) -> bool {
        (**self).is_submodular()
    }
    fn wsc_upper_bound(&self) -> Option<f64> {
        (**self).wsc_upper_bound()
    }
}

/// `f(S ∪ {j}) - f(S)`.
pub fn marginal_gain<F: SetFunction + ?Sized>(
    oracle: &F,
    subset: &[Element],
    element: Element,
) -> Result<f64> {
    let ground = GroundSet::new(oracle.ground_size())?;
    ground.check(element)?;
    if subset.contains(&element) {
        return Err(Error::ElementAlreadySelected(element));
    }
    let mut extended = Vec::with_capacity(subset.len() + 1);
    extended.extend_from_slice(subset);
    extended.push(element);
    Ok(oracle.evaluate(&extended) - oracle.evaluate(subset))
}

/// Gain-to-cost ratio with zero-cost elements ranked first when they help.
pub(crate) fn gain_cost_ratio(gain: f64, cost: f64) -> f64 {
    if cost > 0.0 {
        gain / cost
    } else if gain > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Wraps an oracle and counts `evaluate` calls.
pub struct CountingOracle<F> {
    inner: F,
    calls: AtomicUsize,
}

impl<F: SetFunction> CountingOracle<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> F {
        self.inner
    }
}

impl<F: SetFunction> SetFunction for CountingOracle<F> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(subset)
    }
    fn is_submodular(&self) -> bool {
        self.inner.is_submodular()
    }
    fn wsc_upper_bound(&self) -> Option<f64> {
        self.inner.wsc_upper_bound()
    }
}

/// A replayable pseudo-random stream. One stream per algorithm run.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream keyed by `label`; the parent stream is untouched.
    pub fn derive(&self, label: &str) -> RngStream {
        RngStream::new(derive_seed(self.seed, label))
    }

    /// An independent stream keyed by `label` and an integer index.
    pub fn derive_indexed(&self, label: &str, index: u64) -> RngStream {
        RngStream::new(splitmix64(derive_seed(self.seed, label) ^ splitmix64(index)))
    }

    /// `min(r, |candidates|)` distinct candidates, uniformly without replacement.
    pub fn sample_without_replacement(
        &mut self,
        candidates: &[Element],
        r: usize,
    ) -> Result<Vec<Element>> {
        if candidates.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        if r == 0 {
            return Err(Error::param("r", "sample size must be at least 1"));
        }
        let amount = r.min(candidates.len());
        if amount == candidates.len() {
            return Ok(candidates.to_vec());
        }
        Ok(index::sample(&mut self.rng, candidates.len(), amount)
            .into_iter()
            .map(|i| candidates[i])
            .collect())
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        if high <= low {
            return low;
        }
        self.rng.random_range(low..=high)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then mixed with the parent seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(splitmix64(seed) ^ h)
}

/// One pass of a sampling greedy loop.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub sampled: Vec<Element>,
    pub chosen: Element,
    pub marginal_gain: f64,
    pub gain_cost_ratio: f64,
    /// Whether the chosen element was added to the selection.
    pub accepted: bool,
    /// Selection cost after this pass.
    pub running_cost: f64,
}

/// The observable outcome of one algorithm run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionTrace {
    /// Selected elements in insertion order.
    pub selected: Vec<Element>,
    pub value: f64,
    pub cost: f64,
    pub iterations: Vec<IterationRecord>,
    /// `None` for deterministic algorithms.
    pub rng_seed: Option<u64>,
    pub oracle_calls: usize,
    /// The best feasible singleton beat the greedy set.
    pub used_singleton_fallback: bool,
    /// No single element fits the budget; the selection is empty.
    pub no_feasible_singleton: bool,
}

impl SelectionTrace {
    /// The selection as a sorted set.
    pub fn selected_set(&self) -> Vec<Element> {
        let mut s = self.selected.clone();
        s.sort_unstable();
        s
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Modular(Vec<f64>);
    impl SetFunction for Modular {
        fn ground_size(&self) -> usize {
            self.0.len()
        }
        fn evaluate(&self, s: &[Element]) -> f64 {
            s.iter().map(|&j| self.0[j]).sum()
        }
    }

    #[test]
    fn total_cost_examples() {
        let costs = CostModel::new(vec![1.5, 9.0, 2.5]).unwrap();
        assert_eq!(costs.total_cost(&[]).unwrap(), 0.0);
        assert_eq!(costs.total_cost(&[0, 2]).unwrap(), 4.0);
        let unit = CostModel::unit(7).unwrap();
        assert_eq!(unit.total_cost(&(0..7).collect::<Vec<_>>()).unwrap(), 7.0);
        assert!(matches!(
            costs.total_cost(&[3]),
            Err(Error::ElementOutOfRange { element: 3, size: 3 })
        ));
    }

    #[test]
    fn rejects_negative_costs() {
        assert!(matches!(
            CostModel::new(vec![1.0, -0.5]),
            Err(Error::InvalidCost { element: 1, .. })
        ));
        assert!(GroundSet::new(0).is_err());
    }

    #[test]
    fn marginal_gain_examples() {
        let f = Modular(vec![1.0, 3.0, 2.0]);
        assert_eq!(marginal_gain(&f, &[0, 2], 1).unwrap(), 3.0);
        assert_eq!(marginal_gain(&f, &[], 1).unwrap(), 3.0);
        assert!(matches!(
            marginal_gain(&f, &[1], 1),
            Err(Error::ElementAlreadySelected(1))
        ));
    }

    #[test]
    fn sample_bound_examples() {
        assert_eq!(CostModel::new(vec![3.0, 1.0, 2.0]).unwrap().sample_bound(4.0), 3);
        assert_eq!(CostModel::unit(10).unwrap().sample_bound(2.0), 2);
        assert_eq!(CostModel::new(vec![2.0, 5.0]).unwrap().sample_bound(2.0), 1);
        // Budget beyond the total cost clamps to |N|.
        assert_eq!(CostModel::new(vec![2.0, 5.0]).unwrap().sample_bound(100.0), 2);
    }

    #[test]
    fn sorted_costs_keep_duplicates() {
        let costs = CostModel::new(vec![2.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(costs.sorted(), vec![1.0, 1.0, 2.0, 2.0]);
        assert_eq!(costs.sample_bound(4.0), 3);
    }

    #[test]
    fn sample_size_examples() {
        // 2.4 * ln(100) = 11.05 -> 12
        assert_eq!(sample_size(240, 100, 0.01).unwrap(), 12);
        assert_eq!(sample_size(240, 240, (-1.0f64).exp()).unwrap(), 1);
        // 10 * ln(100) = 46.05 -> 47, clamped to 10
        assert_eq!(sample_size(10, 1, 0.01).unwrap(), 10);
        assert!(sample_size(10, 1, 1.0).is_err());
        assert!(sample_size(10, 1, 0.0).is_err());
    }

    #[test]
    fn sampling_examples() {
        let mut rng = RngStream::new(3);
        assert_eq!(rng.sample_without_replacement(&[4], 5).unwrap(), vec![4]);
        let all: Vec<_> = (0..10).collect();
        let mut s = rng.sample_without_replacement(&all, 10).unwrap();
        s.sort_unstable();
        assert_eq!(s, all);
        let a = RngStream::new(42).sample_without_replacement(&all, 3).unwrap();
        let b = RngStream::new(42).sample_without_replacement(&all, 3).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            rng.sample_without_replacement(&[], 2),
            Err(Error::EmptyCandidates)
        ));
    }

    #[test]
    fn sampling_is_roughly_uniform() {
        let all: Vec<_> = (0..5).collect();
        let mut rng = RngStream::new(11);
        let mut hits = [0usize; 5];
        for _ in 0..20_000 {
            for j in rng.sample_without_replacement(&all, 2).unwrap() {
                hits[j] += 1;
            }
        }
        // Each element is included with probability 2/5.
        for h in hits {
            let p = h as f64 / 20_000.0;
            assert!((p - 0.4).abs() < 0.02, "inclusion frequency {p}");
        }
    }

    #[test]
    fn derived_streams_differ() {
        let root = RngStream::new(9);
        let mut a = root.derive("points");
        let mut b = root.derive("costs");
        assert_ne!(a.next_u64(), b.next_u64());
        assert_eq!(root.derive("points").next_u64(), RngStream::new(9).derive("points").next_u64());
    }

    #[test]
    fn counting_oracle_counts() {
        let f = CountingOracle::new(Modular(vec![1.0, 2.0]));
        f.evaluate(&[0]);
        marginal_gain(&f, &[0], 1).unwrap();
        assert_eq!(f.calls(), 3);
    }

    proptest! {
        #[test]
        fn total_cost_is_additive(costs in prop::collection::vec(0.0f64..10.0, 1..12), mask in any::<u32>()) {
            let model = CostModel::new(costs.clone()).unwrap();
            let (s, t): (Vec<_>, Vec<_>) = (0..costs.len()).partition(|j| mask >> j & 1 == 1);
            let union: Vec<_> = (0..costs.len()).collect();
            let lhs = model.total_cost(&union).unwrap();
            let rhs = model.total_cost(&s).unwrap() + model.total_cost(&t).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn sample_bound_monotone_and_order_invariant(
            costs in prop::collection::vec(0.1f64..5.0, 1..12),
            b1 in 0.01f64..30.0,
            b2 in 0.01f64..30.0,
        ) {
            let model = CostModel::new(costs.clone()).unwrap();
            let mut reversed = costs.clone();
            reversed.reverse();
            let rev = CostModel::new(reversed).unwrap();
            let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
            prop_assert!(model.sample_bound(lo) <= model.sample_bound(hi));
            prop_assert_eq!(model.sample_bound(b1), rev.sample_bound(b1));
            let u = model.sample_bound(b1);
            prop_assert!(u >= 1 && u <= costs.len());
        }

        #[test]
        fn sample_output_is_distinct_subset(n in 1usize..30, r in 1usize..40, seed in any::<u64>()) {
            let candidates: Vec<_> = (0..n).map(|j| j * 3).collect();
            let mut rng = RngStream::new(seed);
            let mut s = rng.sample_without_replacement(&candidates, r).unwrap();
            prop_assert_eq!(s.len(), r.min(n));
            s.sort_unstable();
            s.dedup();
            prop_assert_eq!(s.len(), r.min(n));
            prop_assert!(s.iter().all(|x| candidates.contains(x)));
        }
    }
}
