//! Parameter sweeps: one run per value of a dotted config path.

use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Parses a comma-separated value list; each item is read as JSON when it
/// parses (numbers, booleans, objects) and as a string otherwise.
pub fn parse_values(list: &str) -> Result<Vec<Value>, CliError> {
    let values: Vec<Value> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string())))
        .collect();
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    Ok(values)
}

/// Replaces the value at `path` (e.g. `train.learning_rate`) in a config
/// whose defaults have been filled in, so every existing field is reachable.
pub fn with_param(base: &ExperimentConfig, path: &str, value: &Value) -> Result<ExperimentConfig, CliError> {
    let mut doc = serde_json::to_value(base).map_err(|e| CliError::Config(e.to_string()))?;
    let mut slot = &mut doc;
    for key in path.split('.') {
        slot = slot
            .as_object_mut()
            .and_then(|o| o.get_mut(key))
            .ok_or_else(|| CliError::Config(format!("unknown sweep parameter '{path}'")))?;
    }
    *slot = value.clone();
    let cfg: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Config(format!("sweep value {value} for '{path}': {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Short directory-safe label for a sweep value.
pub fn value_label(value: &Value) -> String {
    let raw = match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    raw.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}
