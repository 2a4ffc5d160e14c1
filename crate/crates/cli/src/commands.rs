//! Subcommand bodies. Each returns the text to print and the files it wrote.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use trustvote_core::ldp::{self, McSettings};
use trustvote_core::sim::{run_experiment_with, ScenarioConfig};
use trustvote_core::trust::{ic_check, ScoreForm};
use trustvote_core::Execution;

use crate::error::{CliError, CliResult};
use crate::export::{write_csv, write_simulation, RunManifest};

/// What a command produced.
#[derive(Debug, Default)]
pub struct Report {
    pub text: String,
    pub files: Vec<PathBuf>,
    /// The command ran but the property it checks did not hold.
    pub failed_check: bool,
}

/// Runs a scenario and writes `rewards.csv`, `elections.csv`, `trust.csv` and `manifest.json`.
pub fn simulate(config: &ScenarioConfig, out_dir: &Path, execution: Execution) -> CliResult<Report> {
    let mut manifest = RunManifest::begin("simulate", Some(config.seed), serde_json::to_value(config)?);
    let result = run_experiment_with(config, execution).map_err(CliError::run)?;
    manifest.warnings = result.warnings.clone();
    let mut files = write_simulation(&result, out_dir)?;
    files.push(manifest.finish(out_dir, &files)?);
    let elected: u32 = result.election_counts.iter().sum();
    let text = format!(
        "{} rounds, {} seats filled, {} blocks missed, total reward {}\n",
        result.rounds.len(),
        elected,
        result.failure_counts.iter().sum::<u32>(),
        result.final_rewards().iter().sum::<f64>()
    );
    Ok(Report {
        text,
        files,
        failed_check: false,
    })
}

fn csv_text<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn ldp_rate(b: f64, lambda: f64, big_lambda: f64) -> CliResult<Report> {
    let rate = ldp::rate_function(b, lambda, big_lambda).map_err(CliError::input)?;
    let t = ldp::rate_minimizer(b, lambda, big_lambda).map_err(CliError::input)?;
    // the infimum over t >= 2 differs from the closed form when the minimizer falls below 2
    let short = ldp::short_horizon_regime(b, lambda, big_lambda).map_err(CliError::input)?;
    let text = csv_text(
        &["b", "lambda", "Lambda", "rate", "minimizer_t", "short_horizon"],
        [(b, lambda, big_lambda, rate, t, short)],
    )?;
    Ok(Report {
        text,
        ..Report::default()
    })
}

pub fn ldp_valve(epsilon: f64, lambda: f64, big_lambda: f64) -> CliResult<Report> {
    let v = ldp::effective_valve(epsilon, lambda, big_lambda).map_err(CliError::input)?;
    let text = csv_text(
        &["epsilon", "lambda", "Lambda", "valve"],
        [(epsilon, lambda, big_lambda, v)],
    )?;
    Ok(Report {
        text,
        ..Report::default()
    })
}

pub fn ldp_merit(epsilon: f64, big_lambda: f64, valve: f64) -> CliResult<Report> {
    let v = ldp::effective_merit(epsilon, big_lambda, valve).map_err(CliError::input)?;
    let text = csv_text(&["epsilon", "Lambda", "L", "merit"], [(epsilon, big_lambda, valve, v)])?;
    Ok(Report {
        text,
        ..Report::default()
    })
}

const MC_HEADER: [&str; 9] = [
    "lambda",
    "Lambda",
    "L",
    "horizon",
    "replicas",
    "seed",
    "hits",
    "probability",
    "stderr",
];

pub fn ldp_mc(
    lambda: f64,
    big_lambda: f64,
    level: f64,
    settings: &McSettings,
    out_dir: Option<&Path>,
) -> CliResult<Report> {
    let est = ldp::mc_failure_rate(lambda, big_lambda, level, settings).map_err(CliError::run)?;
    let row = (
        lambda,
        big_lambda,
        level,
        est.horizon,
        est.replicas,
        settings.seed,
        est.hits,
        est.probability,
        est.stderr,
    );
    let mut report = Report {
        text: csv_text(&MC_HEADER, [row])?,
        ..Report::default()
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        report.files.push(write_csv(dir, "mc.csv", &MC_HEADER, [row])?);
    }
    Ok(report)
}

pub fn ldp_decay(
    lambda: f64,
    big_lambda: f64,
    b: f64,
    l_values: &[f64],
    settings: &McSettings,
    out_dir: Option<&Path>,
) -> CliResult<Report> {
    let fit = ldp::verify_decay(lambda, big_lambda, b, l_values, settings).map_err(CliError::run)?;
    let header = ["l", "L", "hits", "probability", "stderr"];
    let rows: Vec<_> = fit
        .points
        .iter()
        .map(|(l, e)| (*l, l * b, e.hits, e.probability, e.stderr))
        .collect();
    let mut text = csv_text(&header, rows.iter().copied())?;
    writeln!(
        text,
        "slope {:.6} vs -I(b) {:.6}, relative error {:.4}",
        fit.slope,
        -fit.rate,
        fit.relative_error()
    )
    .expect("writing to a String cannot fail");
    let mut report = Report {
        text,
        ..Report::default()
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        report.files.push(write_csv(dir, "decay.csv", &header, rows)?);
    }
    Ok(report)
}

/// Coarsest report grid the incentive check accepts.
pub const MAX_IC_GRID: f64 = 0.01;

/// Sweeps truthful beliefs over the 0.1 lattice of `(0,1)^2` and reports how far
/// the expected-score maximizer strays from the truth.
pub fn ic_sweep(alpha: f64, form: ScoreForm, grid: f64) -> CliResult<Report> {
    if !(grid > 0.0 && grid <= MAX_IC_GRID) {
        return Err(CliError::Usage(format!(
            "grid {grid} is too coarse: it must lie in (0, {MAX_IC_GRID}]"
        )));
    }
    let lattice: Vec<f64> = (1..10).map(|m| f64::from(m) / 10.0).collect();
    let mut worst: f64 = 0.0;
    let mut worst_at = (0.0, 0.0);
    for &p1 in &lattice {
        for &p2 in &lattice {
            let arg = ic_check(p1, p2, alpha, form, grid).map_err(CliError::input)?;
            let d = arg.deviation(p1, p2);
            if d > worst {
                worst = d;
                worst_at = (p1, p2);
            }
        }
    }
    // allow for the lattice points themselves not sitting exactly on the report grid
    let pass = worst <= grid + 1e-9;
    let text = format!(
        "form {form:?}, alpha {alpha}, grid {grid}: max deviation {worst:.6} at p1={}, p2={} -> {}\n",
        worst_at.0,
        worst_at.1,
        if pass { "ok" } else { "FAILED" }
    );
    Ok(Report {
        text,
        files: Vec::new(),
        failed_check: !pass,
    })
}
