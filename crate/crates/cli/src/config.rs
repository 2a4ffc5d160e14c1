//! Loading scenario configs from JSON files, manifests and the built-in scenarios.

use std::path::Path;

use serde_json::Value;
use trustvote_core::sim::ScenarioConfig;

use crate::error::{CliError, CliResult};

/// Built-in scenarios shipped with the tool, by name.
pub const SCENARIOS: [(&str, &str); 5] = [
    ("minimal", include_str!("../scenarios/minimal.json")),
    ("rewards", include_str!("../scenarios/rewards.json")),
    ("availability", include_str!("../scenarios/availability.json")),
    ("table1", include_str!("../scenarios/table1.json")),
    ("table2", include_str!("../scenarios/table2.json")),
];

pub fn builtin(name: &str) -> CliResult<ScenarioConfig> {
    let text = SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| CliError::Usage(format!("no built-in scenario named {name:?}")))?;
    parse_config(text, name)
}

/// Parses a config document. A run manifest is accepted too, in which case
/// its config snapshot is used.
pub fn parse_config(text: &str, origin: &str) -> CliResult<ScenarioConfig> {
    let config = match serde_json::from_str::<ScenarioConfig>(text) {
        Ok(config) => config,
        Err(e) => match manifest_config(text) {
            Some(inner) => serde_json::from_value(inner)
                .map_err(|e| CliError::Usage(format!("{origin}: invalid config in manifest: {e}")))?,
            None => return Err(diagnose(origin, &e)),
        },
    };
    config
        .validate()
        .map_err(|e| CliError::Usage(format!("{origin}: {e}")))?;
    Ok(config)
}

pub fn load_config(path: &Path) -> CliResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

fn manifest_config(text: &str) -> Option<Value> {
    let v: Value = serde_json::from_str(text).ok()?;
    v.get("tool")?;
    v.get("config").cloned()
}

fn diagnose(origin: &str, e: &serde_json::Error) -> CliError {
    CliError::Usage(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
}
