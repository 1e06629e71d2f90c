//! Realizations of `η`, the ratio between the gain-to-cost ratio MRG picks
//! from its sample and the best ratio in the whole remaining pool.

use super::greedy::{mrg_with_shadow, MrgConfig};
use crate::error::Result;
use crate::ground::{CostModel, SelectionTrace, SetFunction};

/// One MRG run with a shadow full-pool argmax at every accepted pass.
#[derive(Debug, Clone)]
pub struct EtaRun {
    pub etas: Vec<f64>,
    /// The MRG trace; identical to a plain `mrg` run with the same config.
    pub trace: SelectionTrace,
}

impl EtaRun {
    pub fn increments(&self) -> Vec<f64> {
        self.etas.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn eta_diagnostic<F: SetFunction + ?Sized>(
    oracle: &F,
    costs: &CostModel,
    config: &MrgConfig,
) -> Result<EtaRun> {
    let run = mrg_with_shadow(oracle, costs, config)?;
    Ok(EtaRun {
        etas: run.etas,
        trace: run.trace,
    })
}

/// Pooled statistics over many runs.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaSummary {
    pub runs: usize,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std_error: f64,
    pub increments: usize,
    pub increment_mean: f64,
    pub increment_std_error: f64,
}

impl EtaSummary {
    pub fn from_runs(runs: &[EtaRun]) -> Self {
        let etas: Vec<f64> = runs.iter().flat_map(|r| r.etas.iter().copied()).collect();
        let incs: Vec<f64> = runs.iter().flat_map(|r| r.increments()).collect();
        let (mean, std_error) = mean_and_se(&etas);
        let (increment_mean, increment_std_error) = mean_and_se(&incs);
        Self {
            runs: runs.len(),
            samples: etas.len(),
            min: etas.iter().copied().fold(f64::INFINITY, f64::min),
            max: etas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            std_error,
            increments: incs.len(),
            increment_mean,
            increment_std_error,
        }
    }

    /// Conservative `μ` estimate: mean minus one standard error.
    pub fn mu_estimate(&self) -> f64 {
        (self.mean - self.std_error).clamp(0.0, 1.0)
    }

    /// `|mean increment| <= k` standard errors.
    pub fn drift_within(&self, k: f64) -> bool {
        self.increment_mean.abs() <= k * self.increment_std_error
    }
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::mrg;
    use crate::ground::RngStream;
    use crate::objectives::{Modular, WeightedCoverage};

    #[test]
    fn full_sample_gives_unit_eta() {
        let mut rng = RngStream::new(1);
        let f = WeightedCoverage::random(10, 8, 0.3, &mut rng).unwrap();
        let c = CostModel::uniform(10, 1.0, 2.0, &mut rng).unwrap();
        let run = eta_diagnostic(&f, &c, &MrgConfig::new(5.0, 0.1, 3).with_sample_size(10)).unwrap();
        assert!(!run.etas.is_empty());
        assert!(run.etas.iter().all(|&e| e == 1.0));
    }

    #[test]
    fn modular_etas_in_unit_interval() {
        let f = Modular::new(vec![1.0, 4.0, 2.0, 3.0, 0.5, 2.5]).unwrap();
        let c = CostModel::unit(6).unwrap();
        for seed in 0..30 {
            let run = eta_diagnostic(&f, &c, &MrgConfig::new(3.0, 0.1, seed).with_sample_size(2)).unwrap();
            assert!(run.etas.iter().all(|&e| e > 0.0 && e <= 1.0));
        }
    }

    #[test]
    fn shadow_does_not_perturb_selection() {
        let mut rng = RngStream::new(6);
        let f = WeightedCoverage::random(12, 8, 0.3, &mut rng).unwrap();
        let c = CostModel::uniform(12, 1.0, 2.0, &mut rng).unwrap();
        for seed in 0..10 {
            let cfg = MrgConfig::new(4.0, 0.1, seed).with_sample_size(3);
            let a = eta_diagnostic(&f, &c, &cfg).unwrap();
            let b = mrg(&f, &c, &cfg).unwrap();
            assert_eq!(a.trace, b);
        }
    }

    #[test]
    fn summary_statistics() {
        let runs = vec![
            EtaRun { etas: vec![1.0, 0.5], trace: SelectionTrace::default() },
            EtaRun { etas: vec![0.5, 1.0], trace: SelectionTrace::default() },
        ];
        let s = EtaSummary::from_runs(&runs);
        assert_eq!(s.samples, 4);
        assert_eq!(s.mean, 0.75);
        assert_eq!(s.increment_mean, 0.0);
        assert!(s.drift_within(3.0));
        assert!(s.mu_estimate() < 0.75);
    }
}
