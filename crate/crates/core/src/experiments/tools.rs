//! Small-instance diagnostics: exact WSC estimation, bound evaluation and
//! the η martingale check.

use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    brute_force_min_cost, cover_constants, eta_diagnostic, estimate_wsc, greedy_cover,
    mrg_bound, mrg_critical_delta, drg_bound, wssa_alpha, DrgBoundInputs, EtaRun,
    EtaSummary, MrgBoundInputs, MrgConfig, MAX_ENUMERATION,
};
use crate::error::{Error, Result};
use crate::ground::{CostModel, Element, RngStream, SetFunction};
use crate::objectives::{MseReduction, MseSnapshot, SquaredModular, WeightedCoverage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    /// Random weighted coverage; submodular.
    Coverage,
    /// `(Σ w)²`; supermodular, WSC above 1.
    Squared,
    /// Trace reduction of random Gaussian priors under random visibility.
    Mse,
}

/// A seeded random instance with costs uniform in `[cost_low, cost_high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceConfig {
    pub kind: InstanceKind,
    pub elements: usize,
    /// Shared coverage items, or points for `mse`.
    pub items: usize,
    pub density: f64,
    pub cost_low: f64,
    pub cost_high: f64,
    /// Instances drawn by `wsc-estimate`.
    pub count: usize,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        Self {
            kind: InstanceKind::Coverage,
            elements: 8,
            items: 6,
            density: 0.3,
            cost_low: 1.0,
            cost_high: 2.0,
            count: 20,
        }
    }
}

impl InstanceConfig {
    pub fn build(&self, seed: u64) -> Result<(Box<dyn SetFunction>, CostModel)> {
        if self.elements == 0 {
            return Err(Error::EmptyGroundSet);
        }
        let root = RngStream::new(seed);
        let costs = CostModel::uniform(self.elements, self.cost_low, self.cost_high, &mut root.derive("costs"))?;
        let mut rng = root.derive("objective");
        let oracle: Box<dyn SetFunction> = match self.kind {
            InstanceKind::Coverage => Box::new(WeightedCoverage::random(self.elements, self.items, self.density, &mut rng)?),
            InstanceKind::Squared => Box::new(SquaredModular::new(
                (0..self.elements).map(|_| rng.uniform(0.5, 2.0)).collect(),
            )?),
            InstanceKind::Mse => {
                let points = self.items.max(1);
                let priors = (0..points)
                    .map(|_| {
                        let a = Matrix3::from_fn(|_, _| rng.uniform(-1.0, 1.0));
                        a * a.transpose() + Matrix3::identity() * rng.uniform(0.5, 3.0)
                    })
                    .collect();
                let visibility = (0..self.elements)
                    .map(|_| (0..points).filter(|_| rng.uniform(0.0, 1.0) < self.density).collect())
                    .collect();
                Box::new(MseReduction::new(&MseSnapshot { priors }, visibility, Matrix3::identity() * 2.0)?)
            }
        };
        Ok((oracle, costs))
    }
}

/// Bound parameters. Anything left unset is measured on the instance:
/// `wsc` by enumeration, `mu` from the η diagnostic, `U` and `c_max` from
/// the costs, and the cover quantities from a greedy cover of `f(N)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub mu: Option<f64>,
    pub wsc: Option<f64>,
    pub deltas: Vec<f64>,
    pub budget: Option<f64>,
    pub sample_bound: Option<usize>,
    pub max_cost: Option<f64>,
    pub iterations: Option<usize>,
    pub max_singleton: Option<f64>,
    pub min_gain: Option<f64>,
    pub optimal_cost: Option<f64>,
    pub squared_cost: Option<f64>,
    pub outer_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaConfig {
    pub runs: usize,
    pub budget: f64,
    pub epsilon: f64,
    pub sample_size: Option<usize>,
}

impl Default for EtaConfig {
    fn default() -> Self {
        Self {
            runs: 500,
            budget: 4.0,
            epsilon: 0.1,
            sample_size: Some(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub instance: InstanceConfig,
    pub bounds: BoundsConfig,
    pub eta: EtaConfig,
}

impl ToolConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WscRow {
    pub instance: usize,
    pub seed: u64,
    pub kind: InstanceKind,
    pub elements: usize,
    pub wsc: f64,
}

/// Exact WSC of `count` instances with seeds `seed, seed + 1, …`.
pub fn run_wsc_estimate(config: &ToolConfig, seed: u64) -> Result<Vec<WscRow>> {
    (0..config.instance.count)
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            let (f, _) = config.instance.build(s)?;
            Ok(WscRow {
                instance: i,
                seed: s,
                kind: config.instance.kind,
                elements: config.instance.elements,
                wsc: estimate_wsc(&f)?.value,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaRow {
    pub run: usize,
    pub iteration: usize,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSummaryRow {
    pub runs: usize,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std_error: f64,
    pub increment_mean: f64,
    pub increment_std_error: f64,
    pub mu_estimate: f64,
}

fn eta_runs(config: &ToolConfig, seed: u64) -> Result<Vec<EtaRun>> {
    let (f, costs) = config.instance.build(seed)?;
    let root = RngStream::new(seed).derive("eta");
    (0..config.eta.runs)
        .map(|i| {
            let mut cfg = MrgConfig::new(config.eta.budget, config.eta.epsilon, root.derive_indexed("run", i as u64).seed());
            cfg.sample_size = config.eta.sample_size;
            eta_diagnostic(&f, &costs, &cfg)
        })
        .collect()
}

/// η realizations of `runs` MRG runs on the instance of `seed`.
pub fn run_eta_diag(config: &ToolConfig, seed: u64) -> Result<(Vec<EtaRow>, EtaSummaryRow)> {
    let runs = eta_runs(config, seed)?;
    let rows = runs
        .iter()
        .enumerate()
        .flat_map(|(run, r)| {
            r.etas
                .iter()
                .enumerate()
                .map(move |(iteration, &eta)| EtaRow { run, iteration, eta })
        })
        .collect();
    let s = EtaSummary::from_runs(&runs);
    let summary = EtaSummaryRow {
        runs: s.runs,
        samples: s.samples,
        min: s.min,
        max: s.max,
        mean: s.mean,
        std_error: s.std_error,
        increment_mean: s.increment_mean,
        increment_std_error: s.increment_std_error,
        mu_estimate: s.mu_estimate(),
    };
    Ok((rows, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub delta: f64,
    pub mu: f64,
    pub wsc: f64,
    pub mrg_bound: f64,
    pub mrg_critical_delta: f64,
    pub drg_bound: f64,
    pub wssa_alpha: f64,
    pub wssa_probability: f64,
}

/// Evaluate the MRG, DRG and Random-WSSA bounds for every `δ`.
pub fn run_bound_eval(config: &ToolConfig, seed: u64) -> Result<Vec<BoundRow>> {
    let b = &config.bounds;
    let (f, costs) = config.instance.build(seed)?;
    let wsc = match b.wsc {
        Some(w) => w,
        None => estimate_wsc(&f)?.value.max(1.0),
    };
    let mu = match b.mu {
        Some(m) => m,
        None => EtaSummary::from_runs(&eta_runs(config, seed)?).mu_estimate(),
    };
    let budget = b.budget.unwrap_or(config.eta.budget);
    let all: Vec<Element> = (0..costs.len()).collect();
    let full = f.evaluate(&all);
    let cover = greedy_cover(&f, &costs, full, 1e-9 * full.max(1.0))?;
    let (big_m, small_m) = match (b.max_singleton, b.min_gain) {
        (Some(x), Some(y)) => (x, y),
        _ => cover_constants(&f, &cover)?,
    };
    let optimal_cost = match b.optimal_cost {
        Some(c) => c,
        None if costs.len() <= MAX_ENUMERATION => brute_force_min_cost(&f, &costs, full, 1e-9 * full.max(1.0))?.cost,
        None => costs.min_cost(),
    };
    let deltas = if b.deltas.is_empty() {
        vec![1.0, 0.5, 0.1, 0.01]
    } else {
        b.deltas.clone()
    };
    deltas
        .into_iter()
        .map(|delta| {
            let mrg_in = MrgBoundInputs {
                mu,
                wsc,
                delta,
                sample_bound: b.sample_bound.unwrap_or_else(|| costs.sample_bound(budget)),
                max_cost: b.max_cost.unwrap_or_else(|| costs.max_cost()),
                budget,
            };
            let drg_in = DrgBoundInputs {
                mu,
                wsc,
                delta,
                iterations: b.iterations.unwrap_or(cover.iterations.len()),
                max_singleton: big_m,
                min_gain: small_m,
                optimal_cost,
                squared_cost: match b.squared_cost {
                    Some(c) => c,
                    None => costs.squared_total(&cover.selected)?,
                },
            };
            let nan_if_undefined = |r: Result<f64>| match r {
                Ok(v) => Ok(v),
                Err(Error::UndefinedBound(_)) => Ok(f64::NAN),
                Err(e) => Err(e),
            };
            let t4 = match wssa_alpha(&drg_in, b.outer_iterations) {
                Ok(a) => (a.alpha, a.success_probability),
                Err(Error::UndefinedBound(_)) => (f64::NAN, (1.0 - delta).powi(b.outer_iterations as i32)),
                Err(e) => return Err(e),
            };
            Ok(BoundRow {
                delta,
                mu,
                wsc,
                mrg_bound: mrg_bound(&mrg_in)?,
                mrg_critical_delta: mrg_critical_delta(&mrg_in),
                drg_bound: nan_if_undefined(drg_bound(&drg_in))?,
                wssa_alpha: t4.0,
                wssa_probability: t4.1,
            })
        })
        .collect()
}

/// Header-first CSV of serializable rows.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wsc_rows_by_kind() {
        let mut c = ToolConfig::default();
        c.instance.count = 3;
        c.instance.elements = 6;
        assert!(run_wsc_estimate(&c, 1).unwrap().iter().all(|r| r.wsc <= 1.0 + 1e-12));
        c.instance.kind = InstanceKind::Squared;
        assert!(run_wsc_estimate(&c, 1).unwrap().iter().all(|r| r.wsc > 1.0));
        c.instance.kind = InstanceKind::Mse;
        assert!(run_wsc_estimate(&c, 1).unwrap().iter().all(|r| r.wsc.is_finite() || r.wsc.is_infinite()));
    }

    #[test]
    fn eta_and_bounds() {
        let mut c = ToolConfig::default();
        c.eta.runs = 20;
        let (rows, summary) = run_eta_diag(&c, 2).unwrap();
        assert_eq!(summary.samples, rows.len());
        assert!(rows.iter().all(|r| r.eta > 0.0 && r.eta <= 1.0));
        c.bounds.mu = Some(1.0);
        c.bounds.wsc = Some(1.0);
        c.bounds.deltas = vec![1.0];
        let b = run_bound_eval(&c, 2).unwrap();
        assert!((b[0].mrg_bound - 0.5 * (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn tool_config_parses() {
        let c = ToolConfig::from_toml_str("[instance]\nkind = \"squared\"\nelements = 5\n[eta]\nruns = 3\n").unwrap();
        assert_eq!(c.instance.kind, InstanceKind::Squared);
        assert_eq!(c.eta.runs, 3);
        assert!(ToolConfig::from_toml_str("[instance]\nkind = \"bogus\"").is_err());
    }
}
