//! Run reports and their CSV form.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::Element;

pub const RUNS_HEADER: &str = "step,algorithm,r,B_or_A,objective,cost,size,oracle_calls,wall_ms,seed";
pub const SUMMARY_HEADER: &str = "algorithm,r,B_or_A,mean_objective,mean_cost,mean_wall_ms";

/// Window of the moving average applied to the robust experiment's plot data.
pub const PLOT_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    /// Budgeted MSE reduction with MRG.
    A,
    /// Minimum-cost coverage with DRG.
    B,
    /// Robust multi-task selection with Random-WSSA.
    C,
}

impl Experiment {
    fn tag(self) -> &'static str {
        match self {
            Experiment::A => "a",
            Experiment::B => "b",
            Experiment::C => "c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Constraint {
    #[default]
    None,
    Budget(f64),
    Threshold { required: f64, tolerance: f64 },
}

/// One selection at one step of one `(seed, cell)` run.
///
/// `B_or_A` holds the cell's constraint parameter: `B` for budgeted runs,
/// the fraction `F` for coverage runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub step: usize,
    pub algorithm: String,
    pub r: usize,
    #[serde(rename = "B_or_A")]
    pub b_or_a: f64,
    pub objective: f64,
    pub cost: f64,
    pub size: usize,
    pub oracle_calls: usize,
    pub wall_ms: f64,
    pub seed: u64,
    #[serde(skip)]
    pub selection: Vec<Element>,
    #[serde(skip)]
    pub constraint: Constraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub r: usize,
    #[serde(rename = "B_or_A")]
    pub b_or_a: f64,
    pub mean_objective: f64,
    pub mean_cost: f64,
    pub mean_wall_ms: f64,
}

/// Per-point estimator state after the update of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub algorithm: String,
    pub r: usize,
    #[serde(rename = "B_or_A")]
    pub b_or_a: f64,
    pub seed: u64,
    pub task: usize,
    pub point: usize,
    pub truth_x: f64,
    pub truth_y: f64,
    pub truth_z: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_z: f64,
    pub covariance_trace: f64,
    pub squared_error: f64,
}

/// Bisection outcome of one Random-WSSA or SSA call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationRow {
    pub step: usize,
    pub algorithm: String,
    pub r: usize,
    #[serde(rename = "B_or_A")]
    pub b_or_a: f64,
    pub seed: u64,
    pub active_tasks: usize,
    pub k_achieved: f64,
    pub k_upper: f64,
    pub floor: f64,
    pub outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub min_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: Experiment,
    pub rows: Vec<RunRow>,
    /// Satellite costs of every replicate seed, for re-verification.
    pub costs: BTreeMap<u64, Vec<f64>>,
    pub trajectories: Vec<TrajectoryRow>,
    pub saturation: Vec<SaturationRow>,
}

impl RunReport {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            rows: Vec::new(),
            costs: BTreeMap::new(),
            trajectories: Vec::new(),
            saturation: Vec::new(),
        }
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        summarize(&self.rows)
    }

    /// Rows of one cell, in step-then-seed order of insertion.
    pub fn cell<'a>(&'a self, algorithm: &'a str, r: usize, b_or_a: f64) -> impl Iterator<Item = &'a RunRow> + 'a {
        self.rows
            .iter()
            .filter(move |x| x.algorithm == algorithm && x.r == r && x.b_or_a == b_or_a)
    }

    /// Recompute every row's cost and size from its raw selection and check
    /// its constraint.
    pub fn verify(&self) -> Result<()> {
        for row in &self.rows {
            let fail = |what: String| {
                Err(Error::ConstraintViolated(format!(
                    "{} r={} B_or_A={} seed={} step={}: {what}",
                    row.algorithm, row.r, row.b_or_a, row.seed, row.step
                )))
            };
            let costs = self
                .costs
                .get(&row.seed)
                .ok_or_else(|| Error::ConstraintViolated(format!("no costs for seed {}", row.seed)))?;
            if row.selection.iter().any(|&j| j >= costs.len()) {
                return fail("selection refers to an unknown satellite".into());
            }
            let cost: f64 = row.selection.iter().map(|&j| costs[j]).sum();
            if (cost - row.cost).abs() > 1e-9 * cost.max(1.0) {
                return fail(format!("logged cost {} but selection costs {cost}", row.cost));
            }
            if row.size != row.selection.len() {
                return fail(format!("logged size {} but selection has {}", row.size, row.selection.len()));
            }
            match row.constraint {
                Constraint::None => {}
                Constraint::Budget(b) => {
                    if cost > b + 1e-9 * b.max(1.0) {
                        return fail(format!("cost {cost} exceeds budget {b}"));
                    }
                }
                Constraint::Threshold { required, tolerance } => {
                    if row.objective < required - tolerance {
                        return fail(format!("value {} below threshold {required}", row.objective));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Means per `(algorithm, r, B_or_A)` cell, in order of first appearance.
type CellKey = (String, usize, u64);

pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut acc: BTreeMap<CellKey, (f64, f64, f64, usize)> = BTreeMap::new();
    for row in rows {
        let key = (row.algorithm.clone(), row.r, row.b_or_a.to_bits());
        let e = acc.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0.0, 0.0, 0.0, 0)
        });
        e.0 += row.objective;
        e.1 += row.cost;
        e.2 += row.wall_ms;
        e.3 += 1;
    }
    order
        .into_iter()
        .map(|key| {
            let (o, c, w, n) = acc[&key];
            let n = n as f64;
            SummaryRow {
                algorithm: key.0,
                r: key.1,
                b_or_a: f64::from_bits(key.2),
                mean_objective: o / n,
                mean_cost: c / n,
                mean_wall_ms: w / n,
            }
        })
        .collect()
}

fn series_name(row: &RunRow) -> String {
    format!("{} r={} B_or_A={}", row.algorithm, row.r, row.b_or_a)
}

/// Long-form `step,series,value` rows: the per-step mean over seeds of the
/// figure's metric (objective, or cost for coverage runs), smoothed with a
/// trailing moving average for the robust experiment.
pub fn plot_data(report: &RunReport) -> Vec<(usize, String, f64)> {
    let mut order: Vec<String> = Vec::new();
    let mut per: BTreeMap<String, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for row in &report.rows {
        let name = series_name(row);
        if !per.contains_key(&name) {
            order.push(name.clone());
        }
        let metric = match report.experiment {
            Experiment::B => row.cost,
            _ => row.objective,
        };
        let e = per.entry(name).or_default().entry(row.step).or_insert((0.0, 0));
        e.0 += metric;
        e.1 += 1;
    }
    let window = match report.experiment {
        Experiment::C => PLOT_WINDOW,
        _ => 1,
    };
    let mut out = Vec::new();
    for name in order {
        let steps: Vec<(usize, f64)> = per[&name].iter().map(|(s, (v, n))| (*s, v / *n as f64)).collect();
        for (i, (step, _)) in steps.iter().enumerate() {
            let lo = (i + 1).saturating_sub(window);
            let slice = &steps[lo..=i];
            let mean = slice.iter().map(|(_, v)| v).sum::<f64>() / slice.len() as f64;
            out.push((*step, name.clone(), mean));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn header_of(line: &str) -> Vec<&str> {
    line.split(',').collect()
}

const TRAJECTORY_HEADER: &str = "step,algorithm,r,B_or_A,seed,task,point,truth_x,truth_y,truth_z,mean_x,mean_y,mean_z,covariance_trace,squared_error";
const SATURATION_HEADER: &str = "step,algorithm,r,B_or_A,seed,active_tasks,k_achieved,k_upper,floor,outer_iterations,max_inner_iterations,min_objective";

/// Verify the report and write `runs.csv`, `summary.csv` and
/// `plot_<experiment>.csv` into `dir`, plus `trajectories.csv` and
/// `saturation.csv` when present. Returns the written paths.
pub fn emit_report(report: &RunReport, dir: impl AsRef<Path>, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let OutputFormat::Csv = format;
    report.verify()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let runs = dir.join("runs.csv");
    write_rows(&runs, &header_of(RUNS_HEADER), &report.rows)?;
    written.push(runs);

    let summary = dir.join("summary.csv");
    write_rows(&summary, &header_of(SUMMARY_HEADER), &report.summary())?;
    written.push(summary);

    let plot = dir.join(format!("plot_{}.csv", report.experiment.tag()));
    write_rows(&plot, &["step", "series", "value"], &plot_data(report))?;
    written.push(plot);

    if !report.trajectories.is_empty() {
        let path = dir.join("trajectories.csv");
        write_rows(&path, &header_of(TRAJECTORY_HEADER), &report.trajectories)?;
        written.push(path);
    }
    if !report.saturation.is_empty() {
        let path = dir.join("saturation.csv");
        write_rows(&path, &header_of(SATURATION_HEADER), &report.saturation)?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_runs_csv(path: impl AsRef<Path>) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<RunRow>, _>>()?;
    Ok(rows)
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<SummaryRow>, _>>()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(step: usize, alg: &str, objective: f64, cost: f64, selection: Vec<usize>) -> RunRow {
        RunRow {
            step,
            algorithm: alg.into(),
            r: 2,
            b_or_a: 3.0,
            objective,
            cost,
            size: selection.len(),
            oracle_calls: 4,
            wall_ms: 0.0,
            seed: 7,
            selection,
            constraint: Constraint::Budget(3.0),
        }
    }

    fn report(rows: Vec<RunRow>) -> RunReport {
        let mut r = RunReport::new(Experiment::A);
        r.costs.insert(7, vec![1.0, 1.5, 2.0]);
        r.rows = rows;
        r
    }

    #[test]
    fn empty_report_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&report(vec![]), dir.path(), OutputFormat::Csv).unwrap();
        assert_eq!(fs::read_to_string(&files[0]).unwrap(), format!("{RUNS_HEADER}\n"));
        assert_eq!(fs::read_to_string(&files[1]).unwrap(), format!("{SUMMARY_HEADER}\n"));
    }

    #[test]
    fn round_trip_and_summary_recheck() {
        let rows = vec![
            row(1, "mrg", 0.1, 2.5, vec![0, 1]),
            row(2, "mrg", 0.3, 1.0, vec![0]),
            row(1, "top-k", 0.7, 3.0, vec![2, 0]),
        ];
        let rep = report(rows.clone());
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&rep, dir.path(), OutputFormat::Csv).unwrap();
        let back = read_runs_csv(&files[0]).unwrap();
        let strip = |r: &RunRow| RunRow { selection: vec![], constraint: Constraint::None, ..r.clone() };
        assert_eq!(back, rows.iter().map(strip).collect::<Vec<_>>());
        let summary = read_summary_csv(&files[1]).unwrap();
        assert_eq!(summary.len(), 2);
        assert!((summary[0].mean_objective - 0.2).abs() < 1e-12);
        assert!((summary[0].mean_cost - 1.75).abs() < 1e-12);
        assert_eq!(summary[1].algorithm, "top-k");
    }

    #[test]
    fn verification_catches_violations() {
        assert!(report(vec![row(1, "mrg", 0.0, 4.5, vec![1, 2, 0])]).verify().is_err());
        assert!(report(vec![row(1, "mrg", 0.0, 9.0, vec![0])]).verify().is_err());
        let mut r = row(1, "drg", 5.0, 1.0, vec![0]);
        r.constraint = Constraint::Threshold { required: 6.0, tolerance: 0.5 };
        assert!(report(vec![r.clone()]).verify().is_err());
        r.constraint = Constraint::Threshold { required: 5.2, tolerance: 0.5 };
        assert!(report(vec![r]).verify().is_ok());
    }

    #[test]
    fn moving_average_only_for_robust_runs() {
        let rows: Vec<RunRow> = (1..=12).map(|s| row(s, "wssa", s as f64, 1.0, vec![0])).collect();
        let mut rep = report(rows);
        let raw = plot_data(&rep);
        assert_eq!(raw[11].2, 12.0);
        rep.experiment = Experiment::C;
        let smooth = plot_data(&rep);
        assert_eq!(smooth[0].2, 1.0);
        assert!((smooth[11].2 - 7.5).abs() < 1e-12);
        // Raw rows are untouched.
        assert_eq!(rep.rows[11].objective, 12.0);
    }
}
