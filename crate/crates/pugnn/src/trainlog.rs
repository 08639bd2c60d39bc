//! Per-epoch training log as JSON lines.
//!
//! Lines carry no timestamps, so identical runs write identical bytes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use pugnn_core::EpochRecord;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub epoch: usize,
    pub total: f64,
    pub parts: BTreeMap<String, f64>,
    pub grad_norm: f64,
    pub skipped_negatives: usize,
}

impl From<&EpochRecord> for LogLine {
    fn from(r: &EpochRecord) -> Self {
        Self {
            epoch: r.epoch,
            total: r.total,
            parts: r.parts.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            grad_norm: r.grad_norm,
            skipped_negatives: r.skipped_negatives,
        }
    }
}

pub fn encode(log: &[EpochRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in log {
        serde_json::to_writer(&mut out, &LogLine::from(r)).expect("log line serializes");
        out.push(b'\n');
    }
    out
}

pub fn write(path: &Path, log: &[EpochRecord]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(log)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<Vec<LogLine>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Data(format!("{}: {e}", path.display()))))
        .collect()
}
