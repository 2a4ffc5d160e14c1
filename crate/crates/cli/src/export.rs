//! CSV and manifest writers.
//!
//! Every CSV has a header row, UTF-8 text and LF line endings. Floats use the
//! shortest representation that round-trips, so equal results give equal bytes.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use trustvote_core::sim::ExperimentResult;

use crate::error::CliResult;

pub fn csv_writer(path: &Path) -> CliResult<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

/// Writes `header` and `rows` to `dir/name` and returns the path.
pub fn write_csv<R: Serialize>(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let mut w = csv_writer(&path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path)
}

fn flag(b: bool) -> u8 {
    u8::from(b)
}

/// `rewards.csv`: round, voter, stake, cumulative_reward.
pub fn write_rewards(result: &ExperimentResult, dir: &Path) -> CliResult<PathBuf> {
    let stakes = result.population.stakes();
    let rows = result.cumulative_rewards.iter().enumerate().flat_map(|(r, totals)| {
        let stakes = &stakes;
        totals.iter().enumerate().map(move |(i, &t)| (r + 1, i, stakes[i], t))
    });
    write_csv(
        dir,
        "rewards.csv",
        &["round", "voter", "stake", "cumulative_reward"],
        rows,
    )
}

/// `elections.csv`: round, candidate, score, elected, unavailable.
pub fn write_elections(result: &ExperimentResult, dir: &Path) -> CliResult<PathBuf> {
    let rows = result.rounds.iter().flat_map(|o| {
        o.scores.iter().enumerate().map(move |(j, &s)| {
            (
                o.round,
                j,
                s,
                flag(o.elected.contains(&j)),
                flag(o.unavailable.contains(&j)),
            )
        })
    });
    write_csv(
        dir,
        "elections.csv",
        &["round", "candidate", "score", "elected", "unavailable"],
        rows,
    )
}

/// `trust.csv`: round, voter, candidate, t. With trust disabled every `t` is 1.
pub fn write_trust(result: &ExperimentResult, dir: &Path) -> CliResult<PathBuf> {
    let (n, m) = (result.config.num_voters, result.config.num_candidates);
    let rows = result.rounds.iter().flat_map(move |o| {
        (0..n).flat_map(move |i| {
            (0..m).map(move |j| {
                let t = o.trust.as_ref().map_or(1.0, |t| *t.get(i, j));
                (o.round, i, j, t)
            })
        })
    });
    write_csv(dir, "trust.csv", &["round", "voter", "candidate", "t"], rows)
}

/// Writes the three simulation tables.
pub fn write_simulation(result: &ExperimentResult, dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    Ok(vec![
        write_rewards(result, dir)?,
        write_elections(result, dir)?,
        write_trust(result, dir)?,
    ])
}

/// Record of one invocation, written as `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// Enough to rerun the command; `simulate --config manifest.json` reads it back.
    pub config: serde_json::Value,
    pub started_at: String,
    pub finished_at: String,
    /// Output file names relative to the manifest's directory.
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn begin(command: &str, seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: "trustvote".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            started_at: timestamp(),
            finished_at: String::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Stamps the end time, lists `outputs` and writes `dir/manifest.json`.
    pub fn finish(mut self, dir: &Path, outputs: &[PathBuf]) -> CliResult<PathBuf> {
        self.finished_at = timestamp();
        self.outputs = outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
            })
            .collect();
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use trustvote_core::sim::{run_experiment, ScenarioConfig};

    fn tiny() -> ExperimentResult {
        let mut c = ScenarioConfig::new(3, 2, 2, 4);
        c.num_candidates = 4;
        run_experiment(&c).unwrap()
    }

    #[test]
    fn tables_have_expected_shape() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_simulation(&tiny(), dir.path()).unwrap();
        let lines = |p: &PathBuf| std::fs::read_to_string(p).unwrap().lines().count();
        assert_eq!(lines(&paths[0]), 1 + 2 * 3);
        assert_eq!(lines(&paths[1]), 1 + 2 * 4);
        assert_eq!(lines(&paths[2]), 1 + 2 * 3 * 4);
        let text = std::fs::read_to_string(&paths[1]).unwrap();
        assert!(text.starts_with("round,candidate,score,elected,unavailable\n"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_simulation(&tiny(), dir.path()).unwrap();
        let m = RunManifest::begin("simulate", Some(4), serde_json::json!({}));
        let path = m.finish(dir.path(), &paths).unwrap();
        let back: RunManifest = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(back.outputs, vec!["rewards.csv", "elections.csv", "trust.csv"]);
        assert!(!back.finished_at.is_empty());
    }
}
