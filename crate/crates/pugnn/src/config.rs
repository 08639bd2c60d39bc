//! Run configuration: one JSON document, optionally adjusted by dotted-path
//! overrides such as `loss.alpha=0`.

use std::path::Path;

use pugnn_core::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Builtin dataset name or a manifest path.
    pub dataset: String,
    pub label_ratio: f64,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: "cora".into(),
            label_ratio: 0.01,
            train: TrainConfig::default(),
        }
    }
}

fn bad(msg: impl std::fmt::Display) -> Error {
    Error::Config(msg.to_string())
}

fn check_known(given: &Value, full: &Value, prefix: &str) -> Result<()> {
    if let (Value::Object(g), Value::Object(f)) = (given, full) {
        for (k, v) in g {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            let known = f.get(k).ok_or_else(|| bad(format!("unknown key {path}")))?;
            check_known(v, known, &path)?;
        }
    }
    Ok(())
}

/// Applies `key.path=value`; the value is read as JSON and falls back to a
/// plain string. Only keys that already exist can be set.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| bad(format!("override {assignment:?} is not key=value")))?;
    let mut node = doc;
    for seg in key.split('.') {
        node = node
            .as_object_mut()
            .and_then(|m| m.get_mut(seg))
            .ok_or_else(|| bad(format!("override names unknown key {key}")))?;
    }
    *node = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok(())
}

impl RunConfig {
    /// Builds a config from a JSON value: unknown keys are rejected, missing
    /// keys take defaults, then overrides apply in order.
    pub fn from_value(given: Value, overrides: &[String]) -> Result<Self> {
        if !given.is_object() {
            return Err(bad("config must be a JSON object"));
        }
        let cfg: RunConfig = serde_json::from_value(given.clone()).map_err(bad)?;
        let mut full = serde_json::to_value(&cfg).map_err(bad)?;
        check_known(&given, &full, "")?;
        for o in overrides {
            apply_override(&mut full, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(full).map_err(bad)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let given = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| bad(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        Self::from_value(given, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.label_ratio > 0.0 && self.label_ratio <= 1.0) {
            return Err(bad("label_ratio must lie in (0, 1]"));
        }
        self.train.validate()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
