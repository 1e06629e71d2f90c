//! Concrete oracles and the combinators that preserve (weak) submodularity.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::ground::{Element, RngStream, SetFunction};

/// `f(S) = Σ_{j∈S} w_j`.
#[derive(Debug, Clone)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::param("weights", "modular weights must be nonnegative"));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        subset.iter().map(|&j| self.weights[j]).sum()
    }
    fn is_submodular(&self) -> bool {
        true
    }
    fn wsc_upper_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `f(S) = (Σ_{j∈S} w_j)²`: monotone, normalized, supermodular-type growth.
#[derive(Debug, Clone)]
pub struct SquaredModular {
    weights: Vec<f64>,
}

impl SquaredModular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::param("weights", "weights must be positive"));
        }
        Ok(Self { weights })
    }
}

impl SetFunction for SquaredModular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        let s: f64 = subset.iter().map(|&j| self.weights[j]).sum();
        s * s
    }
}

/// Weighted coverage: `f(S)` is the total weight of the items covered by `S`.
#[derive(Debug, Clone)]
pub struct WeightedCoverage {
    item_weights: Vec<f64>,
    covers: Vec<Vec<usize>>,
}

impl WeightedCoverage {
    pub fn new(item_weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Result<Self> {
        if covers.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        if item_weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::param("item_weights", "item weights must be nonnegative"));
        }
        let items = item_weights.len();
        for cover in &covers {
            if let Some(&bad) = cover.iter().find(|&&i| i >= items) {
                return Err(Error::param(
                    "covers",
                    format!("item {bad} out of range for a universe of {items}"),
                ));
            }
        }
        Ok(Self {
            item_weights,
            covers,
        })
    }

    /// Grid coverage: items are cells weighted by area, covers are the cells
    /// inside each satellite's footprint.
    pub fn from_footprints(cell_areas: Vec<f64>, footprints: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(cell_areas, footprints)
    }

    /// A random instance in which every element owns one private item, so no
    /// element is ever fully redundant, plus `shared_items` items each covered
    /// by every element independently with probability `density`.
    pub fn random(
        n_elements: usize,
        shared_items: usize,
        density: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let mut weights = Vec::with_capacity(n_elements + shared_items);
        let mut covers = vec![Vec::new(); n_elements];
        for (j, cover) in covers.iter_mut().enumerate() {
            weights.push(rng.uniform(0.1, 0.5));
            cover.push(j);
        }
        for item in 0..shared_items {
            weights.push(rng.uniform(0.5, 2.0));
            for cover in covers.iter_mut() {
                if rng.uniform(0.0, 1.0) < density {
                    cover.push(n_elements + item);
                }
            }
        }
        Self::new(weights, covers)
    }

    pub fn universe_size(&self) -> usize {
        self.item_weights.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.item_weights.iter().sum()
    }

    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }

    /// The covered items of `subset`, sorted.
    pub fn covered_items(&self, subset: &[Element]) -> Vec<usize> {
        let mut mark = vec![false; self.item_weights.len()];
        for &j in subset {
            for &i in &self.covers[j] {
                mark[i] = true;
            }
        }
        mark.iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }
}

impl SetFunction for WeightedCoverage {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        let mut mark = vec![false; self.item_weights.len()];
        for &j in subset {
            for &i in &self.covers[j] {
                mark[i] = true;
            }
        }
        // Summed in item order so equal covered sets give bit-equal values.
        mark.iter()
            .zip(&self.item_weights)
            .filter(|(m, _)| **m)
            .map(|(_, w)| w)
            .sum()
    }
    fn is_submodular(&self) -> bool {
        true
    }
    fn wsc_upper_bound(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Area of the union of covered grid cells.
pub fn coverage_objective_value(
    cell_areas: &[f64],
    visible_cells_per_satellite: &[Vec<usize>],
    selection: &[Element],
) -> f64 {
    let mut mark = vec![false; cell_areas.len()];
    for &s in selection {
        for &c in &visible_cells_per_satellite[s] {
            mark[c] = true;
        }
    }
    mark.iter()
        .zip(cell_areas)
        .filter(|(m, _)| **m)
        .map(|(_, a)| a)
        .sum()
}

/// `f_(k)(S) = min(f(S), k)`.
#[derive(Debug, Clone)]
pub struct Truncated<F> {
    inner: F,
    level: f64,
}

pub fn truncate<F: SetFunction>(inner: F, level: f64) -> Result<Truncated<F>> {
    if !(level >= 0.0) {
        return Err(Error::param("k", format!("truncation level {level} is negative")));
    }
    Ok(Truncated { inner, level })
}

impl<F> Truncated<F> {
    pub fn level(&self) -> f64 {
        self.level
    }
}

impl<F: SetFunction> SetFunction for Truncated<F> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        self.inner.evaluate(subset).min(self.level)
    }
    fn is_submodular(&self) -> bool {
        self.inner.is_submodular()
    }
}

/// Nonnegative weighted sum `Σ_i w_i f^i(S)`.
#[derive(Debug, Clone)]
pub struct Averaged<F> {
    inners: Vec<F>,
    weights: Vec<f64>,
}

/// Weighted sum of oracles; `weights = None` means the plain mean.
pub fn average<F: SetFunction>(inners: Vec<F>, weights: Option<Vec<f64>>) -> Result<Averaged<F>> {
    if inners.is_empty() {
        return Err(Error::param("oracles", "at least one oracle is required"));
    }
    let n = inners[0].ground_size();
    if inners.iter().any(|f| f.ground_size() != n) {
        return Err(Error::param("oracles", "ground sets differ"));
    }
    let weights = match weights {
        Some(w) => {
            if w.len() != inners.len() {
                return Err(Error::param("weights", "one weight per oracle is required"));
            }
            if w.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::param("weights", "weights must be nonnegative"));
            }
            w
        }
        None => vec![1.0 / inners.len() as f64; inners.len()],
    };
    Ok(Averaged { inners, weights })
}

impl<F> Averaged<F> {
    pub fn inners(&self) -> &[F] {
        &self.inners
    }
}

impl<F: SetFunction> SetFunction for Averaged<F> {
    fn ground_size(&self) -> usize {
        self.inners[0].ground_size()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        self.inners
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| w * f.evaluate(subset))
            .sum()
    }
    fn is_submodular(&self) -> bool {
        self.inners.iter().all(|f| f.is_submodular())
    }
}

/// `f(S) / f(N)`, so that the full ground set scores exactly 1.
#[derive(Debug, Clone)]
pub struct Normalized<F> {
    inner: F,
    divisor: f64,
}

impl<F: SetFunction> Normalized<F> {
    pub fn new(inner: F) -> Result<Self> {
        let all: Vec<Element> = (0..inner.ground_size()).collect();
        let divisor = inner.evaluate(&all);
        if !(divisor > 0.0 && divisor.is_finite()) {
            return Err(Error::param(
                "divisor",
                format!("f(N) = {divisor}; cannot normalise a function with no attainable utility"),
            ));
        }
        Ok(Self { inner, divisor })
    }

    pub fn divisor(&self) -> f64 {
        self.divisor
    }
}

impl<F: SetFunction> SetFunction for Normalized<F> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        (self.inner.evaluate(subset) / self.divisor).clamp(0.0, 1.0)
    }
    fn is_submodular(&self) -> bool {
        self.inner.is_submodular()
    }
}

/// Predicted (prior) covariances of every point, frozen for one time step.
#[derive(Debug, Clone)]
pub struct MseSnapshot {
    pub priors: Vec<Matrix3<f64>>,
}

/// Total trace reduction obtained by fusing identity observations of the
/// selected satellites into frozen Gaussian priors.
///
/// A point seen by `m` selected satellites gets posterior information
/// `P⁻¹ + m Σ_ν⁻¹`.
#[derive(Debug, Clone)]
pub struct MseReduction {
    prior_traces: Vec<f64>,
    prior_information: Vec<Matrix3<f64>>,
    noise_information: Matrix3<f64>,
    /// Points visible to each satellite.
    visibility: Vec<Vec<usize>>,
}

impl MseReduction {
    pub fn new(
        snapshot: &MseSnapshot,
        visibility: Vec<Vec<usize>>,
        measurement_noise: Matrix3<f64>,
    ) -> Result<Self> {
        if visibility.is_empty() {
            return Err(Error::EmptyGroundSet);
        }
        let points = snapshot.priors.len();
        for seen in &visibility {
            if let Some(&bad) = seen.iter().find(|&&p| p >= points) {
                return Err(Error::param(
                    "visibility",
                    format!("point {bad} out of range for {points} points"),
                ));
            }
        }
        let prior_information = snapshot
            .priors
            .iter()
            .map(|p| spd_inverse(p).ok_or(Error::NotPositiveDefinite("prior covariance")))
            .collect::<Result<Vec<_>>>()?;
        let noise_information = spd_inverse(&measurement_noise)
            .ok_or(Error::NotPositiveDefinite("measurement noise"))?;
        Ok(Self {
            prior_traces: snapshot.priors.iter().map(|p| p.trace()).collect(),
            prior_information,
            noise_information,
            visibility,
        })
    }

    pub fn points(&self) -> usize {
        self.prior_traces.len()
    }

    /// Number of selected observers of every point.
    pub fn observer_counts(&self, subset: &[Element]) -> Vec<usize> {
        let mut counts = vec![0usize; self.points()];
        for &s in subset {
            for &p in &self.visibility[s] {
                counts[p] += 1;
            }
        }
        counts
    }

    /// Posterior covariance of `point` after `observers` identity measurements.
    pub fn posterior(&self, point: usize, observers: usize) -> Matrix3<f64> {
        let info = self.prior_information[point] + self.noise_information * observers as f64;
        spd_inverse(&info).expect("information stays positive definite")
    }
}

impl SetFunction for MseReduction {
    fn ground_size(&self) -> usize {
        self.visibility.len()
    }
    fn evaluate(&self, subset: &[Element]) -> f64 {
        self.observer_counts(subset)
            .into_iter()
            .enumerate()
            .filter(|(_, m)| *m > 0)
            .map(|(p, m)| self.prior_traces[p] - self.posterior(p, m).trace())
            .sum()
    }
}

/// Trace reduction of `selection` on `snapshot`; see [`MseReduction`].
pub fn mse_reduction_value(
    snapshot: &MseSnapshot,
    visibility: &[Vec<usize>],
    measurement_noise: Matrix3<f64>,
    selection: &[Element],
) -> Result<f64> {
    let oracle = MseReduction::new(snapshot, visibility.to_vec(), measurement_noise)?;
    Ok(oracle.evaluate(selection))
}

pub(crate) fn spd_inverse(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    let inv = sym.cholesky()?.inverse();
    Some((inv + inv.transpose()) * 0.5)
}
