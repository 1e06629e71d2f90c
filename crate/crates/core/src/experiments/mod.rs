//! The three constellation experiments, their configuration and reports.
//!
//! Every replicate seed fixes a scenario through named streams (`costs`,
//! `points`, `truth`, `init`, `measure`), so all selectors of a seed see the
//! same satellites, points, truth and measurement noise. Algorithm streams
//! are keyed by cell and step.

mod config;
mod report;
mod tools;

pub use config::{
    AlgorithmConfig, ConstellationConfig, CostConfig, LorenzConfig, PointsConfig, ScenarioConfig,
    UkfConfig,
};
pub use report::{
    emit_report, plot_data, read_runs_csv, read_summary_csv, summarize, Constraint, Experiment,
    OutputFormat, RunReport, RunRow, SaturationRow, SummaryRow, TrajectoryRow, PLOT_WINDOW,
    RUNS_HEADER, SUMMARY_HEADER,
};
pub use tools::{
    run_bound_eval, run_eta_diag, run_wsc_estimate, write_csv, BoundRow, BoundsConfig, EtaConfig,
    EtaRow, EtaSummaryRow, InstanceConfig, InstanceKind, ToolConfig, WscRow,
};

use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::algorithms::{drg, mrg, random_wssa, ssa_with, top_k_baseline, DrgConfig, MrgConfig, WssaConfig};
use crate::dynest::{step_truth, ukf_update, Climatology, LorenzState, UkfBelief};
use crate::error::{Error, Result};
use crate::ground::{CostModel, Element, RngStream, SetFunction};
use crate::objectives::{MseReduction, MseSnapshot, Normalized, WeightedCoverage};
use crate::orbitsim::{build_grid, build_walker_delta, sample_surface_points, visibility};

/// Satellite positions (ECEF) at steps `1..=horizon`.
fn satellite_tracks(config: &ScenarioConfig) -> Result<Vec<Vec<Vector3<f64>>>> {
    let ephemeris = build_walker_delta(&config.constellation.walker())?;
    Ok((1..=config.horizon)
        .map(|s| ephemeris.positions_ecef(config.constellation.epoch_s + s as f64 * config.step_seconds))
        .collect())
}

fn scenario_costs(config: &ScenarioConfig, seed: u64) -> Result<CostModel> {
    let root = RngStream::new(config.costs.seed.unwrap_or(seed));
    CostModel::uniform(
        config.constellation.satellites,
        config.costs.low,
        config.costs.high,
        &mut root.derive("costs"),
    )
}

/// Per-step coverage oracles over the grid, shared by every seed.
fn coverage_oracles(config: &ScenarioConfig, tracks: &[Vec<Vector3<f64>>]) -> Result<Vec<WeightedCoverage>> {
    let grid = build_grid(config.grid_resolution_deg)?;
    let areas = grid.areas();
    let centroids = grid.centroids();
    tracks
        .iter()
        .map(|sats| {
            WeightedCoverage::from_footprints(areas.clone(), visibility(sats, &centroids, config.half_angle()))
        })
        .collect()
}

/// Points of interest with their truth trajectories and initial beliefs.
struct SensingTask {
    index: usize,
    /// `truth[s][p]` for `s` in `0..=horizon`.
    truth: Vec<Vec<LorenzState>>,
    initial: Vec<UkfBelief>,
    /// `visibility[s - 1][n]`: points seen by satellite `n` at step `s`.
    visibility: Vec<Vec<Vec<usize>>>,
    climatology: Climatology,
}

impl SensingTask {
    fn build(
        config: &ScenarioConfig,
        seed: u64,
        index: usize,
        count: usize,
        tracks: &[Vec<Vector3<f64>>],
        climatology: Climatology,
    ) -> Result<Self> {
        let root = RngStream::new(seed);
        let point_root = RngStream::new(config.points.seed.unwrap_or(seed));
        let points = sample_surface_points(count, &mut point_root.derive_indexed("points", index as u64));
        let params = config.lorenz_params();
        let mut truth = Vec::with_capacity(config.horizon + 1);
        let mut streams: Vec<RngStream> = (0..count)
            .map(|p| root.derive_indexed("truth", index as u64).derive_indexed("point", p as u64))
            .collect();
        truth.push(
            streams
                .iter_mut()
                .map(|rng| Vector3::new(rng.uniform(-15.0, 15.0), rng.uniform(-20.0, 20.0), rng.uniform(10.0, 40.0)))
                .collect::<Vec<_>>(),
        );
        for s in 1..=config.horizon {
            let next = truth[s - 1]
                .iter()
                .zip(streams.iter_mut())
                .map(|(x, rng)| step_truth(x, &params, config.step_seconds, rng))
                .collect::<Result<Vec<_>>>()?;
            truth.push(next);
        }
        let cov = Matrix3::identity() * config.ukf.initial_covariance;
        let initial = truth[0]
            .iter()
            .enumerate()
            .map(|(p, x)| {
                let mut rng = root.derive_indexed("init", index as u64).derive_indexed("point", p as u64);
                let offset = Vector3::new(rng.standard_normal(), rng.standard_normal(), rng.standard_normal());
                UkfBelief::new(x + config.ukf.initial_spread * offset, cov)
                    .map(|b| b.with_unscented(config.ukf.unscented()))
            })
            .collect::<Result<Vec<_>>>()?;
        let visibility = tracks
            .iter()
            .map(|sats| visibility(sats, &points, config.half_angle()))
            .collect();
        Ok(Self {
            index,
            truth,
            initial,
            visibility,
            climatology,
        })
    }

    fn points(&self) -> usize {
        self.initial.len()
    }

    fn oracle(&self, step: usize, predicted: &[UkfBelief], noise: Matrix3<f64>) -> Result<MseReduction> {
        let snapshot = MseSnapshot {
            priors: predicted.iter().map(|b| b.covariance).collect(),
        };
        MseReduction::new(&snapshot, self.visibility[step - 1].clone(), noise)
    }

    /// Fuse the selected satellites' measurements of every visible point.
    fn assimilate(
        &self,
        config: &ScenarioConfig,
        seed: u64,
        step: usize,
        predicted: &[UkfBelief],
        selection: &[Element],
    ) -> Result<Vec<UkfBelief>> {
        let noise = config.measurement_noise();
        let factor = noise.cholesky().ok_or(Error::NotPositiveDefinite("measurement noise"))?.l();
        let root = RngStream::new(seed).derive_indexed("measure", self.index as u64);
        let mut sorted = selection.to_vec();
        sorted.sort_unstable();
        let mut measurements: Vec<Vec<Vector3<f64>>> = vec![Vec::new(); self.points()];
        for &n in &sorted {
            let seen = &self.visibility[step - 1][n];
            if seen.is_empty() {
                continue;
            }
            // All points get a draw so the noise does not depend on visibility.
            let mut rng = root.derive_indexed("step", step as u64).derive_indexed("sat", n as u64);
            let draws: Vec<Vector3<f64>> = (0..self.points())
                .map(|_| factor * Vector3::new(rng.standard_normal(), rng.standard_normal(), rng.standard_normal()))
                .collect();
            for &p in seen {
                measurements[p].push(self.truth[step][p] + draws[p]);
            }
        }
        predicted
            .iter()
            .zip(&measurements)
            .map(|(b, z)| ukf_update(b, z, &noise))
            .collect()
    }

    fn trajectory(&self, step: usize, beliefs: &[UkfBelief], key: &RowKey) -> Vec<TrajectoryRow> {
        beliefs
            .iter()
            .enumerate()
            .map(|(p, b)| {
                let x = self.truth[step][p];
                TrajectoryRow {
                    step,
                    algorithm: key.algorithm.clone(),
                    r: key.r,
                    b_or_a: key.b_or_a,
                    seed: key.seed,
                    task: self.index,
                    point: p,
                    truth_x: x.x,
                    truth_y: x.y,
                    truth_z: x.z,
                    mean_x: b.mean.x,
                    mean_y: b.mean.y,
                    mean_z: b.mean.z,
                    covariance_trace: b.covariance.trace(),
                    squared_error: (b.mean - x).norm_squared(),
                }
            })
            .collect()
    }
}

fn predict_all(config: &ScenarioConfig, task: &SensingTask, beliefs: &[UkfBelief]) -> Result<Vec<UkfBelief>> {
    let params = config.lorenz_params();
    beliefs
        .iter()
        .map(|b| task.climatology.forecast(b, &params, config.step_seconds))
        .collect()
}

const CLIMATOLOGY_SAMPLES: usize = 100_000;

fn climatology(config: &ScenarioConfig) -> Result<Climatology> {
    Climatology::estimate(&config.lorenz_params().noiseless(), CLIMATOLOGY_SAMPLES)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Selector {
    EntireSet,
    TopK,
    Mrg(Option<usize>),
    Drg(Option<usize>),
    Wssa(Option<usize>),
    Ssa,
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    selector: Selector,
    /// `B` or `F`.
    parameter: f64,
}

impl Cell {
    fn label(&self) -> &'static str {
        match self.selector {
            Selector::EntireSet => "entire-set",
            Selector::TopK => "top-k",
            Selector::Mrg(_) => "mrg",
            Selector::Drg(_) => "drg",
            Selector::Wssa(_) => "random-wssa",
            Selector::Ssa => "ssa",
        }
    }

    /// Seed of the algorithm stream for one step.
    fn algorithm_seed(&self, seed: u64, step: usize) -> u64 {
        let r = match self.selector {
            Selector::Mrg(r) | Selector::Drg(r) | Selector::Wssa(r) => r.map_or(-1, |r| r as i64),
            _ => -1,
        };
        RngStream::new(seed)
            .derive(&format!("algorithm/{}/{}/{}", self.label(), r, self.parameter))
            .derive_indexed("step", step as u64)
            .seed()
    }
}

struct RowKey {
    algorithm: String,
    r: usize,
    b_or_a: f64,
    seed: u64,
}

fn sample_sizes(config: &ScenarioConfig) -> Vec<Option<usize>> {
    if config.algorithm.sample_sizes.is_empty() {
        vec![None]
    } else {
        config.algorithm.sample_sizes.iter().map(|&r| Some(r)).collect()
    }
}

fn timer(config: &ScenarioConfig) -> impl FnOnce() -> f64 {
    let start = config.timing.then(Instant::now);
    move || start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3)
}

/// Collect per-`(seed, cell)` outputs in seed-then-cell order.
fn gather<T: Send>(
    seeds: &[u64],
    cells: &[Cell],
    run: impl Fn(u64, &Cell) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let jobs: Vec<(u64, &Cell)> = seeds
        .iter()
        .flat_map(|&s| cells.iter().map(move |c| (s, c)))
        .collect();
    jobs.par_iter().map(|(s, c)| run(*s, c)).collect()
}

/// Budgeted MSE reduction with MRG, plus entire-set and Top-K baselines.
///
/// At each step the satellites move, the truth advances, every point's
/// belief is predicted, the selector picks satellites on the frozen
/// predicted covariances, and the selected observations update the
/// beliefs. `objective` is the total posterior covariance trace.
pub fn run_experiment_a(config: &ScenarioConfig) -> Result<RunReport> {
    config.validate()?;
    config.expect_algorithm("mrg")?;
    if config.points.count == 0 {
        return Err(Error::Config("experiment A needs points.count >= 1".into()));
    }
    let a = &config.algorithm;
    let mut cells = Vec::new();
    if a.baselines {
        cells.push(Cell { selector: Selector::EntireSet, parameter: f64::INFINITY });
    }
    for &b in &a.budgets {
        if a.baselines {
            cells.push(Cell { selector: Selector::TopK, parameter: b });
        }
        for r in sample_sizes(config) {
            cells.push(Cell { selector: Selector::Mrg(r), parameter: b });
        }
    }
    let tracks = satellite_tracks(config)?;
    let clim = climatology(config)?;
    let seeds = &a.seeds;
    let scenarios = seeds
        .par_iter()
        .map(|&seed| {
            Ok((
                scenario_costs(config, seed)?,
                SensingTask::build(config, seed, 0, config.points.count, &tracks, clim)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let outputs = gather(seeds, &cells, |seed, cell| {
        let idx = seeds.iter().position(|&s| s == seed).expect("seed is listed");
        let (costs, task) = &scenarios[idx];
        sensing_cell(config, seed, cell, costs, task)
    })?;

    let mut report = RunReport::new(Experiment::A);
    for (seed, (costs, _)) in seeds.iter().zip(&scenarios) {
        report.costs.insert(*seed, costs.costs().to_vec());
    }
    for (rows, traj) in outputs {
        report.rows.extend(rows);
        report.trajectories.extend(traj);
    }
    Ok(report)
}

fn sensing_cell(
    config: &ScenarioConfig,
    seed: u64,
    cell: &Cell,
    costs: &CostModel,
    task: &SensingTask,
) -> Result<(Vec<RunRow>, Vec<TrajectoryRow>)> {
    let n = costs.len();
    let noise = config.measurement_noise();
    let mut beliefs = task.initial.clone();
    let mut rows = Vec::with_capacity(config.horizon);
    let mut traj = Vec::new();
    for step in 1..=config.horizon {
        let predicted = predict_all(config, task, &beliefs)?;
        let oracle = task.oracle(step, &predicted, noise)?;
        let elapsed = timer(config);
        let (selection, calls, r, constraint) = match cell.selector {
            Selector::EntireSet => ((0..n).collect::<Vec<_>>(), 0, n, Constraint::None),
            Selector::TopK => {
                let t = top_k_baseline(&oracle, costs, cell.parameter)?;
                (t.selected, t.oracle_calls, n, Constraint::Budget(cell.parameter))
            }
            Selector::Mrg(r) => {
                let mut cfg = MrgConfig::new(cell.parameter, config.algorithm.epsilon, cell.algorithm_seed(seed, step));
                cfg.sample_size = r;
                let resolved = cfg.resolved_sample_size(costs)?;
                let t = mrg(&oracle, costs, &cfg)?;
                (t.selected, t.oracle_calls, resolved, Constraint::Budget(cell.parameter))
            }
            _ => unreachable!("sensing cells use budgeted selectors"),
        };
        let wall_ms = elapsed();
        beliefs = task.assimilate(config, seed, step, &predicted, &selection)?;
        let key = RowKey { algorithm: cell.label().into(), r, b_or_a: cell.parameter, seed };
        rows.push(RunRow {
            step,
            algorithm: key.algorithm.clone(),
            r,
            b_or_a: cell.parameter,
            objective: beliefs.iter().map(|b| b.covariance.trace()).sum(),
            cost: costs.total_cost(&selection)?,
            size: selection.len(),
            oracle_calls: calls,
            wall_ms,
            seed,
            selection,
            constraint,
        });
        traj.extend(task.trajectory(step, &beliefs, &key));
    }
    Ok((rows, traj))
}

/// Minimum-cost coverage with DRG: at each step `A = F · f(N)` on the grid.
/// `objective` is the covered area (km²) and `B_or_A` holds `F`.
pub fn run_experiment_b(config: &ScenarioConfig) -> Result<RunReport> {
    config.validate()?;
    config.expect_algorithm("drg")?;
    let a = &config.algorithm;
    if a.fractions.is_empty() {
        return Err(Error::Config("experiment B needs at least one fraction".into()));
    }
    let cells: Vec<Cell> = a
        .fractions
        .iter()
        .flat_map(|&f| sample_sizes(config).into_iter().map(move |r| Cell { selector: Selector::Drg(r), parameter: f }))
        .collect();
    let tracks = satellite_tracks(config)?;
    let oracles = coverage_oracles(config, &tracks)?;
    let all: Vec<Element> = (0..config.constellation.satellites).collect();
    let full: Vec<f64> = oracles.iter().map(|f| f.evaluate(&all)).collect();
    let costs = a
        .seeds
        .iter()
        .map(|&s| scenario_costs(config, s))
        .collect::<Result<Vec<_>>>()?;

    let outputs = gather(&a.seeds, &cells, |seed, cell| {
        let idx = a.seeds.iter().position(|&s| s == seed).expect("seed is listed");
        let costs = &costs[idx];
        let Selector::Drg(r) = cell.selector else { unreachable!() };
        (1..=config.horizon)
            .map(|step| {
                let oracle = &oracles[step - 1];
                let threshold = cell.parameter * full[step - 1];
                let mut cfg = DrgConfig::new(threshold, a.epsilon, cell.algorithm_seed(seed, step));
                cfg.sample_size = r;
                let elapsed = timer(config);
                let resolved = cfg.resolved_sample_size(oracle)?;
                let t = drg(oracle, costs, &cfg)?;
                let wall_ms = elapsed();
                Ok(RunRow {
                    step,
                    algorithm: cell.label().into(),
                    r: resolved,
                    b_or_a: cell.parameter,
                    objective: oracle.evaluate(&t.selected),
                    cost: costs.total_cost(&t.selected)?,
                    size: t.selected.len(),
                    oracle_calls: t.oracle_calls,
                    wall_ms,
                    seed,
                    selection: t.selected,
                    constraint: Constraint::Threshold { required: threshold, tolerance: cfg.tolerance() },
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut report = RunReport::new(Experiment::B);
    for (seed, c) in a.seeds.iter().zip(&costs) {
        report.costs.insert(*seed, c.costs().to_vec());
    }
    report.rows = outputs.into_iter().flatten().collect();
    Ok(report)
}

/// Robust selection over `sensing_tasks` MSE tasks plus one coverage task,
/// each normalized by its value on the whole constellation at that step.
/// Tasks with `f(N) = 0` at a step are left out of that step's problem.
/// `objective` is the worst normalized task value of the selection.
pub fn run_experiment_c(config: &ScenarioConfig) -> Result<RunReport> {
    config.validate()?;
    config.expect_algorithm("random-wssa")?;
    let a = &config.algorithm;
    if a.budgets.is_empty() {
        return Err(Error::Config("experiment C needs at least one budget".into()));
    }
    if a.points_per_task == 0 {
        return Err(Error::Config("experiment C needs points_per_task >= 1".into()));
    }
    let mut cells = Vec::new();
    for &b in &a.budgets {
        for r in sample_sizes(config) {
            cells.push(Cell { selector: Selector::Wssa(r), parameter: b });
        }
        if a.baselines {
            cells.push(Cell { selector: Selector::Ssa, parameter: b });
        }
    }
    let tracks = satellite_tracks(config)?;
    let clim = climatology(config)?;
    let coverage = coverage_oracles(config, &tracks)?;
    let scenarios = a
        .seeds
        .par_iter()
        .map(|&seed| {
            let tasks = (0..a.sensing_tasks)
                .map(|i| SensingTask::build(config, seed, i, a.points_per_task, &tracks, clim))
                .collect::<Result<Vec<_>>>()?;
            Ok((scenario_costs(config, seed)?, tasks))
        })
        .collect::<Result<Vec<_>>>()?;

    let outputs = gather(&a.seeds, &cells, |seed, cell| {
        let idx = a.seeds.iter().position(|&s| s == seed).expect("seed is listed");
        let (costs, tasks) = &scenarios[idx];
        robust_cell(config, seed, cell, costs, tasks, &coverage)
    })?;

    let mut report = RunReport::new(Experiment::C);
    for (seed, (costs, _)) in a.seeds.iter().zip(&scenarios) {
        report.costs.insert(*seed, costs.costs().to_vec());
    }
    for (rows, sat, traj) in outputs {
        report.rows.extend(rows);
        report.saturation.extend(sat);
        report.trajectories.extend(traj);
    }
    Ok(report)
}

type RobustOutput = (Vec<RunRow>, Vec<SaturationRow>, Vec<TrajectoryRow>);

fn robust_cell(
    config: &ScenarioConfig,
    seed: u64,
    cell: &Cell,
    costs: &CostModel,
    tasks: &[SensingTask],
    coverage: &[WeightedCoverage],
) -> Result<RobustOutput> {
    let a = &config.algorithm;
    let n = costs.len();
    let all: Vec<Element> = (0..n).collect();
    let noise = config.measurement_noise();
    let mut beliefs: Vec<Vec<UkfBelief>> = tasks.iter().map(|t| t.initial.clone()).collect();
    let mut out: RobustOutput = (Vec::new(), Vec::new(), Vec::new());
    for step in 1..=config.horizon {
        let predicted = tasks
            .iter()
            .zip(&beliefs)
            .map(|(t, b)| predict_all(config, t, b))
            .collect::<Result<Vec<_>>>()?;
        let sensing = tasks
            .iter()
            .zip(&predicted)
            .map(|(t, p)| t.oracle(step, p, noise))
            .collect::<Result<Vec<_>>>()?;
        let mut raw: Vec<Box<dyn SetFunction + '_>> =
            sensing.iter().map(|o| Box::new(o) as Box<dyn SetFunction>).collect();
        raw.push(Box::new(&coverage[step - 1]));
        let normalized: Vec<Normalized<Box<dyn SetFunction + '_>>> = raw
            .into_iter()
            .filter(|f| f.evaluate(&all) > 0.0)
            .map(Normalized::new)
            .collect::<Result<Vec<_>>>()?;

        let elapsed = timer(config);
        let (r, outcome) = match (cell.selector, normalized.is_empty()) {
            (_, true) => (n, None),
            (Selector::Wssa(r), false) => {
                let mut cfg = WssaConfig::new(cell.parameter, a.alpha, a.epsilon, cell.algorithm_seed(seed, step));
                cfg.sample_size = r;
                cfg.floor = a.bisection_floor;
                let resolved = cfg.resolved_sample_size(costs)?;
                (resolved, Some(random_wssa(&normalized, costs, &cfg)?))
            }
            (Selector::Ssa, false) => {
                let mut cfg = WssaConfig::new(cell.parameter, a.alpha, a.epsilon, 0);
                cfg.floor = a.bisection_floor;
                (n, Some(ssa_with(&normalized, costs, &cfg)?))
            }
            _ => unreachable!("robust cells use saturation selectors"),
        };
        let wall_ms = elapsed();
        let selection = outcome.as_ref().map_or_else(Vec::new, |o| o.selected.clone());
        let worst = normalized
            .iter()
            .map(|f| f.evaluate(&selection))
            .fold(f64::INFINITY, f64::min);
        let worst = if worst.is_finite() { worst } else { 0.0 };

        for (i, task) in tasks.iter().enumerate() {
            beliefs[i] = task.assimilate(config, seed, step, &predicted[i], &selection)?;
        }
        let key = RowKey { algorithm: cell.label().into(), r, b_or_a: cell.parameter, seed };
        out.0.push(RunRow {
            step,
            algorithm: key.algorithm.clone(),
            r,
            b_or_a: cell.parameter,
            objective: worst,
            cost: costs.total_cost(&selection)?,
            size: selection.len(),
            oracle_calls: outcome.as_ref().map_or(0, |o| o.oracle_calls),
            wall_ms,
            seed,
            selection,
            constraint: Constraint::Budget(a.alpha * cell.parameter),
        });
        out.1.push(SaturationRow {
            step,
            algorithm: key.algorithm.clone(),
            r,
            b_or_a: cell.parameter,
            seed,
            active_tasks: normalized.len(),
            k_achieved: outcome.as_ref().map_or(0.0, |o| o.k_achieved),
            k_upper: outcome.as_ref().map_or(0.0, |o| o.k_upper),
            floor: outcome.as_ref().map_or(0.0, |o| o.floor),
            outer_iterations: outcome.as_ref().map_or(0, |o| o.outer_iterations),
            max_inner_iterations: outcome.as_ref().map_or(0, |o| o.max_inner_iterations),
            min_objective: outcome.as_ref().map_or(worst, |o| o.min_objective),
        });
        for (task, b) in tasks.iter().zip(&beliefs) {
            out.2.extend(task.trajectory(step, b, &key));
        }
    }
    Ok(out)
}
