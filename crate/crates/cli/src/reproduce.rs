//! Data behind the analysis figures and the ranking tables.
//!
//! | target | file(s) | columns |
//! |--------|---------|---------|
//! | fig2   | fig2.csv | b, lambda_minus_Lambda, rate (Lambda = 1) |
//! | fig3   | fig3.csv | epsilon, lambda_minus_Lambda, valve (Lambda = 1) |
//! | fig4   | fig4.csv | epsilon, L, merit (Lambda = 0.5) |
//! | fig5   | fig5.csv | availability_fn, stake, cumulative_reward at the last round |
//! | fig7   | fig7.csv | round, stake, cumulative_reward |
//! | fig8   | fig8.csv, fig8_summary.csv | round, availability_fn, cumulative_reward; agreement summary |
//! | table1 | table1.csv | rank, capability, without_trust, with_trust (K = 5) |
//! | table2 | table2.csv | same layout with K = 21 |
//!
//! Reward series follow voter 0 of the scenario, whose stake is swept where a
//! stake column is present. Candidate labels in the tables start at 1.

use std::path::{Path, PathBuf};

use trustvote_core::ldp;
use trustvote_core::selection::AvailabilityFn;
use trustvote_core::sim::{
    compare_availability, probe_stake_sweep, run_seeds, InsensitivityThresholds, ScenarioConfig,
};
use trustvote_core::Execution;

use crate::config::builtin;
use crate::error::{CliError, CliResult};
use crate::export::write_csv;

pub const TARGETS: [&str; 8] = ["fig2", "fig3", "fig4", "fig5", "fig7", "fig8", "table1", "table2"];

/// Voter whose rewards the figures follow.
pub const PROBE: usize = 0;
pub const PROBE_STAKES: [u32; 4] = [1, 2, 3, 4];

pub struct Options {
    pub out_dir: PathBuf,
    /// Replaces the built-in scenario's seed.
    pub seed: Option<u64>,
    /// Replaces the built-in scenario entirely.
    pub config: Option<ScenarioConfig>,
    pub execution: Execution,
}

impl Options {
    fn scenario(&self, name: &str) -> CliResult<ScenarioConfig> {
        let mut c = match &self.config {
            Some(c) => c.clone(),
            None => builtin(name)?,
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        Ok(c)
    }
}

pub fn reproduce(target: &str, opts: &Options) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(&opts.out_dir)?;
    let dir = opts.out_dir.as_path();
    match target {
        "fig2" => fig2(dir).map(|p| vec![p]),
        "fig3" => fig3(dir).map(|p| vec![p]),
        "fig4" => fig4(dir).map(|p| vec![p]),
        "fig5" => fig5(dir, opts).map(|p| vec![p]),
        "fig7" => fig7(dir, opts).map(|p| vec![p]),
        "fig8" => fig8(dir, opts),
        "table1" => table(dir, opts, "table1").map(|p| vec![p]),
        "table2" => table(dir, opts, "table2").map(|p| vec![p]),
        other => Err(CliError::Usage(format!(
            "unknown target {other:?}; valid targets: {}",
            TARGETS.join(", ")
        ))),
    }
}

fn steps(start: f64, step: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |x| start + step * x as f64)
}

fn fig2(dir: &Path) -> CliResult<PathBuf> {
    let mut rows = Vec::new();
    for b in steps(0.0, 0.5, 21) {
        for gap in steps(0.1, 0.1, 30) {
            let rate = ldp::rate_function(b, 1.0 + gap, 1.0).map_err(CliError::run)?;
            rows.push((b, gap, rate));
        }
    }
    write_csv(dir, "fig2.csv", &["b", "lambda_minus_Lambda", "rate"], rows)
}

fn fig3(dir: &Path) -> CliResult<PathBuf> {
    let mut rows = Vec::new();
    for epsilon in steps(0.05, 0.05, 20) {
        for gap in [0.5, 1.0, 2.0, 4.0] {
            let v = ldp::effective_valve(epsilon.min(1.0), 1.0 + gap, 1.0).map_err(CliError::run)?;
            rows.push((epsilon, gap, v));
        }
    }
    write_csv(dir, "fig3.csv", &["epsilon", "lambda_minus_Lambda", "valve"], rows)
}

fn fig4(dir: &Path) -> CliResult<PathBuf> {
    let mut rows = Vec::new();
    for epsilon in steps(0.05, 0.05, 20) {
        for valve in steps(1.0, 1.0, 20) {
            let v = ldp::effective_merit(epsilon.min(1.0), 0.5, valve).map_err(CliError::run)?;
            rows.push((epsilon, valve, v));
        }
    }
    write_csv(dir, "fig4.csv", &["epsilon", "L", "merit"], rows)
}

fn fig5(dir: &Path, opts: &Options) -> CliResult<PathBuf> {
    let base = opts.scenario("rewards")?;
    let mut rows = Vec::new();
    for f in AvailabilityFn::ALL {
        let mut c = base.clone();
        c.availability_fn = f;
        let runs = probe_stake_sweep(&c, PROBE, &PROBE_STAKES, opts.execution).map_err(CliError::run)?;
        for (run, s) in runs.iter().zip(PROBE_STAKES) {
            rows.push((f.name(), s, run.final_rewards()[PROBE]));
        }
    }
    write_csv(
        dir,
        "fig5.csv",
        &["availability_fn", "stake", "cumulative_reward"],
        rows,
    )
}

fn fig7(dir: &Path, opts: &Options) -> CliResult<PathBuf> {
    let base = opts.scenario("rewards")?;
    let runs = probe_stake_sweep(&base, PROBE, &PROBE_STAKES, opts.execution).map_err(CliError::run)?;
    let mut rows = Vec::new();
    for r in 0..base.rounds {
        for (run, s) in runs.iter().zip(PROBE_STAKES) {
            rows.push((r + 1, s, run.cumulative_rewards[r][PROBE]));
        }
    }
    write_csv(dir, "fig7.csv", &["round", "stake", "cumulative_reward"], rows)
}

fn fig8(dir: &Path, opts: &Options) -> CliResult<Vec<PathBuf>> {
    let base = opts.scenario("availability")?;
    let thresholds = InsensitivityThresholds::default();
    let (cmp, runs) = compare_availability(&base, thresholds, opts.execution).map_err(CliError::run)?;
    let mut rows = Vec::new();
    for r in 0..base.rounds {
        for run in &runs {
            rows.push((
                r + 1,
                run.config.availability_fn.name(),
                run.cumulative_rewards[r][PROBE],
            ));
        }
    }
    let series = write_csv(
        dir,
        "fig8.csv",
        &["round", "availability_fn", "cumulative_reward"],
        rows,
    )?;
    let summary = write_csv(
        dir,
        "fig8_summary.csv",
        &[
            "round_agreement",
            "max_reward_gap",
            "min_round_agreement",
            "max_reward_gap_allowed",
            "passes",
        ],
        [(
            cmp.round_agreement,
            cmp.max_reward_gap,
            thresholds.min_round_agreement,
            thresholds.max_reward_gap,
            cmp.passes(),
        )],
    )?;
    Ok(vec![series, summary])
}

fn table(dir: &Path, opts: &Options, name: &str) -> CliResult<PathBuf> {
    let with_trust = opts.scenario(name)?;
    let without_trust = ScenarioConfig {
        trust_enabled: false,
        ..with_trust.clone()
    };
    let seed = [with_trust.seed];
    let on = run_seeds(&with_trust, &seed, opts.execution).map_err(CliError::run)?;
    let off = run_seeds(&without_trust, &seed, opts.execution).map_err(CliError::run)?;
    let (on, off) = (&on[0].ranking, &off[0].ranking);
    let rows = (0..on.capability.len()).map(|r| (r + 1, on.capability[r] + 1, off.elected[r] + 1, on.elected[r] + 1));
    write_csv(
        dir,
        &format!("{name}.csv"),
        &["rank", "capability", "without_trust", "with_trust"],
        rows,
    )
}
