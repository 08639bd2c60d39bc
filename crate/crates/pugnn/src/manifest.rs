//! Dataset manifests: where the files are, which classes are positive, how
//! the train split is drawn.

use std::path::{Path, PathBuf};

use pugnn_core::dataset::{binarize_labels, make_pu_split, make_train_split, normalize_features};
use pugnn_core::{BinaryMapping, PUDataset};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_content_cites, load_jsonl, LoadReport, RawDataset};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    ContentCites { content: String, cites: String },
    Jsonl { path: String },
}

/// Counts the loaded data is checked against; a mismatch is a warning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub nodes: usize,
    pub positive: usize,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub source: Source,
    /// Class names mapped to the positive label.
    pub positive_classes: Vec<String>,
    #[serde(default = "yes")]
    pub normalize_features: bool,
    /// Size of the training split; a tenth of the nodes when absent.
    #[serde(default)]
    pub train_count: Option<usize>,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default)]
    pub expected: Option<Expected>,
}

const BUILTIN: &[(&str, &[&str], usize, usize, usize)] = &[
    ("cora", &["Neural_Networks", "Probabilistic_Methods"], 271, 2708, 1244),
    ("citeseer", &["DB", "IR"], 333, 3327, 1369),
    ("pubmed", &["3"], 1971, 19717, 7875),
    ("dblp", &["1"], 1772, 17716, 7920),
];

impl DatasetManifest {
    pub fn builtin_names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|b| b.0)
    }

    /// Shipped manifest for a citation dataset stored as
    /// `<name>.content` / `<name>.cites` in the data directory.
    pub fn builtin(name: &str) -> Option<Self> {
        let &(name, positive, train, nodes, pos) = BUILTIN.iter().find(|b| b.0 == name)?;
        Some(Self {
            name: name.to_string(),
            source: Source::ContentCites {
                content: format!("{name}.content"),
                cites: format!("{name}.cites"),
            },
            positive_classes: positive.iter().map(|s| s.to_string()).collect(),
            normalize_features: true,
            train_count: Some(train),
            split_seed: 0,
            expected: Some(Expected { nodes, positive: pos }),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// A builtin name, or a path to a manifest file. Relative data paths
    /// resolve against the data directory for builtins and against the
    /// manifest's own directory otherwise.
    pub fn resolve(spec: &str, data_dir: &Path) -> Result<(Self, PathBuf)> {
        if let Some(m) = Self::builtin(spec) {
            return Ok((m, data_dir.to_path_buf()));
        }
        let path = Path::new(spec);
        if path.extension().is_some_and(|e| e == "json") {
            let m = Self::from_file(path)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            return Ok((m, base));
        }
        let names: Vec<_> = Self::builtin_names().collect();
        Err(Error::Config(format!(
            "unknown dataset {spec:?}: expected one of {names:?} or a manifest .json path"
        )))
    }

    pub fn load(&self, base: &Path) -> Result<LoadedDataset> {
        let (raw, report) = match &self.source {
            Source::ContentCites { content, cites } => load_content_cites(&base.join(content), &base.join(cites))?,
            Source::Jsonl { path } => load_jsonl(&base.join(path))?,
        };
        LoadedDataset::new(self, raw, report)
    }
}

const SPLIT_SALT: u64 = 0x7261_696e_5f73_706c;

/// A dataset with binary labels and its fixed train split, ready to be
/// masked at any label ratio.
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub name: String,
    pub raw: RawDataset,
    pub labels: Vec<bool>,
    pub train_mask: Vec<bool>,
    pub report: LoadReport,
    pub warnings: Vec<String>,
}

impl LoadedDataset {
    pub fn new(manifest: &DatasetManifest, mut raw: RawDataset, report: LoadReport) -> Result<Self> {
        let mut positive = Vec::new();
        for c in &manifest.positive_classes {
            let idx = raw
                .class_index(c)
                .ok_or_else(|| Error::Data(format!("positive class {c:?} does not occur in {}", manifest.name)))?;
            positive.push(idx);
        }
        let mapping = BinaryMapping::new(positive, raw.class_names.len() as u32)?;
        let labels = binarize_labels(&raw.labels, &mapping)?;
        if manifest.normalize_features {
            normalize_features(&mut raw.features)?;
        }
        let n = raw.num_nodes();
        let train_count = manifest.train_count.unwrap_or((n as f64 / 10.0).round() as usize);
        if train_count == 0 || train_count > n {
            return Err(Error::Config(format!("train_count {train_count} out of range for {n} nodes")));
        }
        let train_mask = make_train_split(n, train_count, manifest.split_seed ^ SPLIT_SALT);

        let mut warnings = Vec::new();
        let n_pos = labels.iter().filter(|&&l| l).count();
        if let Some(e) = &manifest.expected {
            if e.nodes != n {
                warnings.push(format!("{}: {n} nodes, expected {}", manifest.name, e.nodes));
            }
            if e.positive != n_pos {
                warnings.push(format!("{}: {n_pos} positives, expected {}", manifest.name, e.positive));
            }
        }
        if report.unknown_ids > 0 {
            warnings.push(format!(
                "{}: skipped {} edge rows with unknown ids",
                manifest.name, report.unknown_ids
            ));
        }
        Ok(Self {
            name: manifest.name.clone(),
            raw,
            labels,
            train_mask,
            report,
            warnings,
        })
    }

    pub fn num_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Draws the labeled positives for `(ratio, seed)` and partitions at
    /// `delta`.
    pub fn pu_dataset(&self, label_ratio: f64, seed: u64, delta: u32) -> Result<PUDataset> {
        let labeled = make_pu_split(&self.labels, &self.train_mask, label_ratio, seed)?;
        Ok(PUDataset::new(
            self.raw.graph.clone(),
            self.raw.features.clone(),
            self.labels.clone(),
            self.train_mask.clone(),
            labeled,
            delta,
        )?)
    }
}
