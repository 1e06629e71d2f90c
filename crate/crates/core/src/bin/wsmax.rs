use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wsmax::experiments::{
    emit_report, run_bound_eval, run_eta_diag, run_experiment_a, run_experiment_b,
    run_experiment_c, run_wsc_estimate, write_csv, OutputFormat, RunReport, ScenarioConfig,
    ToolConfig,
};

#[derive(Parser)]
#[command(name = "wsmax", version, about = "Randomized greedy selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct Common {
    /// TOML config; full-scale preset when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the config's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Budgeted atmospheric sensing with MRG.
    RunA(Common),
    /// Minimum-cost ground coverage with DRG.
    RunB(Common),
    /// Robust multi-task selection with Random-WSSA.
    RunC(Common),
    /// Exact weak-submodularity constants of small random instances.
    WscEstimate(Common),
    /// Approximation bounds, measured on a small instance where unset.
    BoundEval(Common),
    /// η realizations of repeated MRG runs.
    EtaDiag(Common),
}

fn scenario(common: &Common, preset: fn() -> ScenarioConfig) -> wsmax::Result<ScenarioConfig> {
    let mut config = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => preset(),
    };
    if let Some(seed) = common.seed {
        config.algorithm.seeds = vec![seed];
    }
    Ok(config)
}

fn tools(common: &Common) -> wsmax::Result<ToolConfig> {
    match &common.config {
        Some(path) => ToolConfig::load(path),
        None => Ok(ToolConfig::default()),
    }
}

fn emit(report: &RunReport, common: &Common) -> wsmax::Result<()> {
    let Format::Csv = common.format;
    for path in emit_report(report, &common.out, OutputFormat::Csv)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn written(dir: &Path, name: &str) -> wsmax::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    println!("{}", path.display());
    Ok(path)
}

fn run(cli: Cli) -> wsmax::Result<()> {
    match cli.command {
        Command::RunA(c) => emit(&run_experiment_a(&scenario(&c, ScenarioConfig::experiment_a)?)?, &c),
        Command::RunB(c) => emit(&run_experiment_b(&scenario(&c, ScenarioConfig::experiment_b)?)?, &c),
        Command::RunC(c) => emit(&run_experiment_c(&scenario(&c, ScenarioConfig::experiment_c)?)?, &c),
        Command::WscEstimate(c) => {
            let rows = run_wsc_estimate(&tools(&c)?, c.seed.unwrap_or(1))?;
            write_csv(written(&c.out, "wsc.csv")?, &rows)
        }
        Command::BoundEval(c) => {
            let rows = run_bound_eval(&tools(&c)?, c.seed.unwrap_or(1))?;
            write_csv(written(&c.out, "bounds.csv")?, &rows)
        }
        Command::EtaDiag(c) => {
            let (rows, summary) = run_eta_diag(&tools(&c)?, c.seed.unwrap_or(1))?;
            write_csv(written(&c.out, "etas.csv")?, &rows)?;
            write_csv(written(&c.out, "eta_summary.csv")?, &[summary])
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
