//! TOML scenario configuration. Every key has a default, so a config file
//! only needs the keys it changes.

use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::dynest::{LorenzParams, UnscentedParams};
use crate::error::{Error, Result};
use crate::orbitsim::WalkerDeltaConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub inclination_deg: f64,
    pub satellites: usize,
    pub planes: usize,
    pub phasing: usize,
    pub altitude_km: f64,
    pub epoch_s: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self {
            inclination_deg: 60.0,
            satellites: 240,
            planes: 12,
            phasing: 1,
            altitude_km: 2000.0,
            epoch_s: 0.0,
        }
    }
}

impl ConstellationConfig {
    pub fn walker(&self) -> WalkerDeltaConfig {
        WalkerDeltaConfig {
            epoch_s: self.epoch_s,
            ..WalkerDeltaConfig::new(self.inclination_deg, self.satellites, self.planes, self.phasing)
                .with_altitude(self.altitude_km)
        }
    }
}

/// Points of interest. Without a fixed `seed` they are redrawn for every
/// replicate seed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointsConfig {
    pub count: usize,
    pub seed: Option<u64>,
}

/// Per-satellite costs drawn uniformly from `[low, high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub low: f64,
    pub high: f64,
    pub seed: Option<u64>,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            low: 1.0,
            high: 2.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LorenzConfig {
    pub kappa: f64,
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    /// Diagonal of `Σ_ω`.
    pub process_noise: f64,
    /// Diagonal of `Σ_ν`.
    pub measurement_noise: f64,
    /// Integration substeps per simulation step.
    pub substeps: usize,
}

impl Default for LorenzConfig {
    fn default() -> Self {
        let p = LorenzParams::default();
        Self {
            kappa: p.kappa,
            sigma: p.sigma,
            rho: p.rho,
            beta: p.beta,
            process_noise: 0.1,
            measurement_noise: 2.0,
            substeps: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UkfConfig {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    /// Initial covariance `c · I`.
    pub initial_covariance: f64,
    /// Standard deviation of the initial mean error.
    pub initial_spread: f64,
}

impl Default for UkfConfig {
    fn default() -> Self {
        let u = UnscentedParams::default();
        Self {
            alpha: u.alpha,
            beta: u.beta,
            kappa: u.kappa,
            initial_covariance: 5.0,
            initial_spread: 1.0,
        }
    }
}

impl UkfConfig {
    pub fn unscented(&self) -> UnscentedParams {
        UnscentedParams {
            alpha: self.alpha,
            beta: self.beta,
            kappa: self.kappa,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// `mrg`, `drg` or `random-wssa`.
    pub name: String,
    /// `B` for MRG and Random-WSSA.
    pub budgets: Vec<f64>,
    /// Coverage fractions `F`; DRG uses `A = F · f(N)` at each step.
    pub fractions: Vec<f64>,
    pub alpha: f64,
    pub epsilon: f64,
    /// Per-pass sample sizes; empty means the `ceil((n/U) ln(1/ε))` rule.
    pub sample_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Entire-set and Top-K rows for MRG, SSA rows for Random-WSSA.
    pub baselines: bool,
    pub sensing_tasks: usize,
    pub points_per_task: usize,
    /// Random-WSSA and SSA stop bisecting below this width; unset means `1/n`.
    pub bisection_floor: Option<f64>,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            name: "mrg".into(),
            budgets: vec![25.0, 50.0, 75.0, 100.0],
            fractions: vec![0.5, 0.7, 0.9],
            alpha: 1.0,
            epsilon: 0.1,
            sample_sizes: vec![60, 120, 180, 240],
            seeds: vec![1, 2, 3, 4, 5],
            baselines: true,
            sensing_tasks: 5,
            points_per_task: 5,
            bisection_floor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub constellation: ConstellationConfig,
    /// Cone half-angle. 30° gives the narrower full-apex reading of a
    /// π/3 cone.
    pub fov_half_angle_deg: f64,
    pub grid_resolution_deg: f64,
    pub points: PointsConfig,
    pub costs: CostConfig,
    pub lorenz: LorenzConfig,
    pub ukf: UkfConfig,
    pub step_seconds: f64,
    pub horizon: usize,
    /// Log wall-clock times; when off, `wall_ms` is written as 0 so reruns
    /// are byte-identical.
    pub timing: bool,
    pub algorithm: AlgorithmConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::experiment_a()
    }
}

impl ScenarioConfig {
    /// 60°:240/12/1, 25 points, 100 steps, B ∈ {25, 50, 75, 100}.
    pub fn experiment_a() -> Self {
        Self {
            constellation: ConstellationConfig::default(),
            fov_half_angle_deg: 60.0,
            grid_resolution_deg: 2.0,
            points: PointsConfig {
                count: 25,
                seed: None,
            },
            costs: CostConfig::default(),
            lorenz: LorenzConfig::default(),
            ukf: UkfConfig::default(),
            step_seconds: 60.0,
            horizon: 100,
            timing: true,
            algorithm: AlgorithmConfig::default(),
        }
    }

    /// 75°:240/12/1 coverage with F ∈ {0.5, 0.7, 0.9}.
    pub fn experiment_b() -> Self {
        let mut c = Self::experiment_a();
        c.constellation.inclination_deg = 75.0;
        c.points.count = 0;
        c.algorithm.name = "drg".into();
        c.algorithm.budgets = Vec::new();
        c
    }

    /// Five sensing tasks of five points plus one coverage task, 50 steps.
    pub fn experiment_c() -> Self {
        let mut c = Self::experiment_a();
        c.horizon = 50;
        c.points.count = 0;
        c.algorithm.name = "random-wssa".into();
        c.algorithm.budgets = vec![10.0, 15.0, 20.0];
        c.algorithm.sample_sizes = vec![15, 30, 45, 240];
        c.algorithm.fractions = Vec::new();
        c
    }

    fn desk(mut self) -> Self {
        self.constellation.satellites = 24;
        self.constellation.planes = 6;
        self.constellation.phasing = 1;
        self.horizon = 25;
        self.algorithm.seeds = vec![1, 2, 3, 4, 5];
        self.algorithm.sample_sizes = vec![6, 12, 24];
        self
    }

    /// 24 satellites, 5 points, 25 steps, B ∈ {3, 6}.
    pub fn desk_a() -> Self {
        let mut c = Self::experiment_a().desk();
        c.points.count = 5;
        c.algorithm.budgets = vec![3.0, 6.0];
        c
    }

    /// 24 satellites, 10° grid, F ∈ {0.5, 0.9}.
    pub fn desk_b() -> Self {
        let mut c = Self::experiment_b().desk();
        c.grid_resolution_deg = 10.0;
        c.algorithm.fractions = vec![0.5, 0.9];
        c
    }

    /// 24 satellites, two sensing tasks and one coverage task, 15 steps, B = 4.
    pub fn desk_c() -> Self {
        let mut c = Self::experiment_c().desk();
        c.horizon = 15;
        c.grid_resolution_deg = 10.0;
        c.algorithm.sensing_tasks = 2;
        c.algorithm.budgets = vec![4.0];
        c.algorithm.sample_sizes = vec![6, 24];
        c.algorithm.bisection_floor = Some(0.01);
        c
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn lorenz_params(&self) -> LorenzParams {
        LorenzParams {
            kappa: self.lorenz.kappa,
            sigma: self.lorenz.sigma,
            rho: self.lorenz.rho,
            beta: self.lorenz.beta,
            process_noise: Matrix3::identity() * self.lorenz.process_noise,
            dt: self.step_seconds / self.lorenz.substeps.max(1) as f64,
        }
    }

    pub fn measurement_noise(&self) -> Matrix3<f64> {
        Matrix3::identity() * self.lorenz.measurement_noise
    }

    pub fn half_angle(&self) -> f64 {
        self.fov_half_angle_deg.to_radians()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.constellation.walker().validate()?;
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if !(self.step_seconds > 0.0) {
            return bad("step_seconds must be positive".into());
        }
        if !(self.fov_half_angle_deg > 0.0 && self.fov_half_angle_deg < 90.0) {
            return bad("fov_half_angle_deg must lie in (0, 90)".into());
        }
        if self.lorenz.substeps == 0 {
            return bad("lorenz.substeps must be at least 1".into());
        }
        if !(self.lorenz.process_noise >= 0.0 && self.lorenz.measurement_noise > 0.0) {
            return bad("noise levels must be nonnegative (process) and positive (measurement)".into());
        }
        if !(self.ukf.initial_covariance > 0.0 && self.ukf.initial_spread >= 0.0) {
            return bad("ukf.initial_covariance must be positive".into());
        }
        if !(self.costs.low >= 0.0 && self.costs.high >= self.costs.low) {
            return bad("costs need 0 <= low <= high".into());
        }
        let a = &self.algorithm;
        if a.seeds.is_empty() {
            return bad("algorithm.seeds must not be empty".into());
        }
        if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
            return bad("algorithm.epsilon must lie in (0, 1)".into());
        }
        if a.bisection_floor.is_some_and(|f| !(f > 0.0 && f.is_finite())) {
            return bad("algorithm.bisection_floor must be positive".into());
        }
        if a.alpha < 1.0 {
            return bad("algorithm.alpha must be at least 1".into());
        }
        if a.budgets.iter().any(|b| !(*b >= 0.0)) {
            return bad("budgets must be nonnegative".into());
        }
        if a.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad("fractions must lie in [0, 1]".into());
        }
        if a.sample_sizes.contains(&0) {
            return bad("sample sizes must be at least 1".into());
        }
        Ok(())
    }

    pub(super) fn expect_algorithm(&self, name: &str) -> Result<()> {
        if self.algorithm.name != name {
            return Err(Error::Config(format!(
                "this experiment runs `{name}`, but the config names `{}`",
                self.algorithm.name
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = ScenarioConfig::desk_b();
        let back = ScenarioConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);
        let partial = ScenarioConfig::from_toml_str("horizon = 3\n[algorithm]\nbudgets = [2.0]\n").unwrap();
        assert_eq!(partial.horizon, 3);
        assert_eq!(partial.algorithm.budgets, vec![2.0]);
        assert_eq!(partial.constellation.satellites, 240);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig::from_toml_str("horizon = 0").is_err());
        assert!(ScenarioConfig::from_toml_str("unknown = 1").is_err());
        assert!(ScenarioConfig::from_toml_str("[constellation]\nplanes = 7").is_err());
        assert!(ScenarioConfig::from_toml_str("[algorithm]\nseeds = []").is_err());
    }

    #[test]
    fn substep_length() {
        let c = ScenarioConfig::experiment_a();
        assert_eq!(c.lorenz_params().dt, 1.0);
    }

    fn shipped(name: &str) -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
    }

    #[test]
    fn shipped_scenarios_match_presets() {
        for (file, preset) in [
            ("desk_a.toml", ScenarioConfig::desk_a()),
            ("desk_b.toml", ScenarioConfig::desk_b()),
            ("desk_c.toml", ScenarioConfig::desk_c()),
            ("experiment_a.toml", ScenarioConfig::experiment_a()),
            ("experiment_b.toml", ScenarioConfig::experiment_b()),
            ("experiment_c.toml", ScenarioConfig::experiment_c()),
        ] {
            assert_eq!(ScenarioConfig::load(shipped(file)).unwrap(), preset, "{file}");
        }
    }

    #[test]
    fn shipped_tool_config_loads() {
        let c = crate::experiments::ToolConfig::load(shipped("tools.toml")).unwrap();
        assert_eq!(c.eta.runs, 500);
        assert_eq!(c.bounds.deltas.len(), 4);
    }
}
