//! Experiment grids: the main comparison, the ablation, and the prior and
//! threshold sweeps.
//!
//! A grid is a list of independent [`Cell`]s. Cells run on a worker pool of
//! `jobs` threads; results come back in cell order whatever the pool size,
//! and each run is deterministic on its own, so outputs do not depend on
//! `jobs` apart from wall times.

use std::path::Path;
use std::time::Instant;

use pugnn_core::metrics::{macro_f1, mean_std};
use pugnn_core::train::train;
use pugnn_core::{F1Scores, LossKind, TrainConfig};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifest::LoadedDataset;
use crate::published;

pub const MAIN_RATIOS: [f64; 4] = [0.001, 0.002, 0.005, 0.01];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Naive,
    Nnpu,
    Distpu,
    Pugnn,
    /// Regularizer on top of the naive loss.
    StructRegOnly,
    /// Distance-aware loss without the regularizer.
    PuLossOnly,
}

impl Method {
    pub const MAIN: [Method; 4] = [Method::Naive, Method::Nnpu, Method::Distpu, Method::Pugnn];
    pub const ABLATION: [Method; 4] = [Method::Naive, Method::Pugnn, Method::StructRegOnly, Method::PuLossOnly];

    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Nnpu => "nnpu",
            Method::Distpu => "distpu",
            Method::Pugnn => "pugnn",
            Method::StructRegOnly => "struct_reg_only",
            Method::PuLossOnly => "pu_loss_only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Method::Naive,
            Method::Nnpu,
            Method::Distpu,
            Method::Pugnn,
            Method::StructRegOnly,
            Method::PuLossOnly,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }

    /// The base config with this method's loss kind and regularizer weight.
    /// Baselines run without the regularizer.
    pub fn configure(self, base: &TrainConfig) -> TrainConfig {
        let mut cfg = base.clone();
        let (kind, keep_alpha) = match self {
            Method::Naive => (LossKind::Naive, false),
            Method::Nnpu => (LossKind::Nnpu, false),
            Method::Distpu => (LossKind::Distpu, false),
            Method::Pugnn => (LossKind::DistanceAware, true),
            Method::StructRegOnly => (LossKind::Naive, true),
            Method::PuLossOnly => (LossKind::DistanceAware, false),
        };
        cfg.loss.kind = kind;
        if !keep_alpha {
            cfg.loss.alpha = 0.0;
        }
        cfg
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub dataset: String,
    /// Method name, with the swept setting appended for sensitivity cells.
    pub method: String,
    pub ratio: f64,
    pub seed: u64,
    pub config: TrainConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    #[serde(flatten)]
    pub cell: Cell,
    pub scores: Option<F1Scores>,
    pub wall_time: f64,
    pub error: Option<String>,
}

pub fn run_cell(data: &LoadedDataset, cell: &Cell) -> ExperimentResult {
    let start = Instant::now();
    let outcome = (|| -> Result<F1Scores> {
        let ds = data.pu_dataset(cell.ratio, cell.seed, cell.config.loss.delta)?;
        let out = train(&ds, &cell.config)?;
        Ok(macro_f1(&out.y_hat, &ds.true_label, &ds.test_mask)?)
    })();
    let wall_time = start.elapsed().as_secs_f64();
    match outcome {
        Ok(s) => {
            log::info!(
                "{} {} ratio={} seed={}: {:.2} ({wall_time:.1}s)",
                cell.dataset,
                cell.method,
                cell.ratio,
                cell.seed,
                s.macro_f1
            );
            ExperimentResult {
                cell: cell.clone(),
                scores: Some(s),
                wall_time,
                error: None,
            }
        }
        Err(e) => {
            log::warn!("{} {} ratio={} seed={} failed: {e}", cell.dataset, cell.method, cell.ratio, cell.seed);
            ExperimentResult {
                cell: cell.clone(),
                scores: None,
                wall_time,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Runs every cell; a failing cell is recorded and the rest continue.
pub fn run_cells(datasets: &[LoadedDataset], cells: &[Cell], jobs: usize) -> Result<Vec<ExperimentResult>> {
    use rayon::prelude::*;
    for c in cells {
        if !datasets.iter().any(|d| d.name == c.dataset) {
            return Err(Error::Config(format!("cell names unloaded dataset {}", c.dataset)));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_cell(datasets.iter().find(|d| d.name == c.dataset).unwrap(), c))
            .collect()
    }))
}

fn cells_for(
    dataset: &str,
    ratios: &[f64],
    seeds: &[u64],
    variants: &[(String, TrainConfig)],
) -> Vec<Cell> {
    let mut out = Vec::new();
    for (method, config) in variants {
        for &ratio in ratios {
            for &seed in seeds {
                let mut config = config.clone();
                config.seed = seed;
                out.push(Cell {
                    dataset: dataset.to_string(),
                    method: method.clone(),
                    ratio,
                    seed,
                    config,
                });
            }
        }
    }
    out
}

pub fn grid_cells(dataset: &str, methods: &[Method], ratios: &[f64], seeds: &[u64], base: &TrainConfig) -> Vec<Cell> {
    let variants: Vec<_> = methods.iter().map(|m| (m.name().to_string(), m.configure(base))).collect();
    cells_for(dataset, ratios, seeds, &variants)
}

/// Near/far prior pairs on a 0.1 grid with the near prior strictly larger.
pub fn prior_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for h in 5..=9 {
        for b in 1..=4 {
            if h > b {
                out.push((h as f64 / 10.0, b as f64 / 10.0));
            }
        }
    }
    out
}

pub const DELTAS: [u32; 5] = [1, 2, 3, 4, 5];

pub fn prior_cells(dataset: &str, ratio: f64, seeds: &[u64], base: &TrainConfig) -> Vec<Cell> {
    let variants: Vec<_> = prior_grid()
        .into_iter()
        .map(|(h, b)| {
            let mut cfg = Method::Pugnn.configure(base);
            cfg.loss.pi_hat = h;
            cfg.loss.pi_breve = b;
            (format!("pugnn[pi_hat={h},pi_breve={b}]"), cfg)
        })
        .collect();
    cells_for(dataset, &[ratio], seeds, &variants)
}

pub fn delta_cells(dataset: &str, ratio: f64, seeds: &[u64], base: &TrainConfig) -> Vec<Cell> {
    let variants: Vec<_> = DELTAS
        .iter()
        .map(|&d| {
            let mut cfg = Method::Pugnn.configure(base);
            cfg.loss.delta = d;
            (format!("pugnn[delta={d}]"), cfg)
        })
        .collect();
    cells_for(dataset, &[ratio], seeds, &variants)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub dataset: String,
    pub method: String,
    pub ratio: f64,
    pub n: usize,
    pub failures: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub external: bool,
}

/// Mean and sample std of macro F1 per (dataset, method, ratio), in order of
/// first appearance.
pub fn aggregate(results: &[ExperimentResult]) -> Vec<Aggregate> {
    let mut groups: Vec<(String, String, f64, Vec<f64>, usize)> = Vec::new();
    for r in results {
        let key = (&r.cell.dataset, &r.cell.method, r.cell.ratio);
        let idx = match groups.iter().position(|g| (&g.0, &g.1, g.2) == key) {
            Some(i) => i,
            None => {
                groups.push((key.0.clone(), key.1.clone(), key.2, Vec::new(), 0));
                groups.len() - 1
            }
        };
        match &r.scores {
            Some(s) => groups[idx].3.push(s.macro_f1),
            None => groups[idx].4 += 1,
        }
    }
    groups
        .into_iter()
        .map(|(dataset, method, ratio, values, failures)| {
            let (mean, std) = if values.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&values);
                (Some(m), Some(s))
            };
            Aggregate {
                dataset,
                method,
                ratio,
                n: values.len(),
                failures,
                mean,
                std,
                external: false,
            }
        })
        .collect()
}

/// Appends the published LSDAN and GRAB cells for the given datasets and
/// ratios.
pub fn with_published(mut rows: Vec<Aggregate>, datasets: &[&str], ratios: &[f64]) -> Vec<Aggregate> {
    for d in datasets {
        for method in ["lsdan", "grab"] {
            for &ratio in ratios {
                if let Some((mean, std)) = published::lookup(d, method, ratio) {
                    rows.push(Aggregate {
                        dataset: d.to_string(),
                        method: method.to_string(),
                        ratio,
                        n: 5,
                        failures: 0,
                        mean: Some(mean),
                        std: Some(std),
                        external: true,
                    });
                }
            }
        }
    }
    rows
}

pub fn find<'a>(rows: &'a [Aggregate], dataset: &str, method: &str, ratio: f64) -> Option<&'a Aggregate> {
    rows.iter().find(|a| a.dataset == dataset && a.method == method && a.ratio == ratio)
}

pub fn write_results_csv(path: &Path, results: &[ExperimentResult]) -> Result<()> {
    let data_err = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(data_err)?;
    w.write_record(["dataset", "method", "ratio", "seed", "macro_f1", "f1_pos", "f1_neg", "wall_time"])
        .map_err(data_err)?;
    for r in results {
        let f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            r.cell.dataset.clone(),
            r.cell.method.clone(),
            r.cell.ratio.to_string(),
            r.cell.seed.to_string(),
            f(r.scores.map(|s| s.macro_f1)),
            f(r.scores.map(|s| s.f1_pos)),
            f(r.scores.map(|s| s.f1_neg)),
            format!("{:.3}", r.wall_time),
        ])
        .map_err(data_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct TableCell {
    ratio: f64,
    mean: Option<f64>,
    std: Option<f64>,
    n: usize,
    failures: usize,
}

#[derive(Serialize)]
struct TableRow {
    dataset: String,
    method: String,
    external: bool,
    cells: Vec<TableCell>,
}

/// Aggregates as a table: one row per (dataset, method), one cell per ratio.
pub fn aggregate_json(sweep: &str, rows: &[Aggregate]) -> serde_json::Value {
    let mut table: Vec<TableRow> = Vec::new();
    for a in rows {
        let cell = TableCell {
            ratio: a.ratio,
            mean: a.mean,
            std: a.std,
            n: a.n,
            failures: a.failures,
        };
        match table.iter_mut().find(|r| r.dataset == a.dataset && r.method == a.method) {
            Some(r) => r.cells.push(cell),
            None => table.push(TableRow {
                dataset: a.dataset.clone(),
                method: a.method.clone(),
                external: a.external,
                cells: vec![cell],
            }),
        }
    }
    serde_json::json!({ "sweep": sweep, "metric": "macro_f1", "rows": table })
}

pub fn write_aggregate_json(path: &Path, sweep: &str, rows: &[Aggregate]) -> Result<()> {
    let text = serde_json::to_string_pretty(&aggregate_json(sweep, rows)).expect("aggregate serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
