//! Published LSDAN and GRAB numbers, shipped as a static file and reported
//! alongside computed rows with an `external` flag.

use serde::Deserialize;

const TABLE: &str = include_str!("../data/published_table2.json");

#[derive(Clone, Debug, Deserialize)]
pub struct PublishedRow {
    pub dataset: String,
    pub method: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct PublishedTable {
    pub source: String,
    pub external: bool,
    pub ratios: Vec<f64>,
    pub rows: Vec<PublishedRow>,
}

pub fn table() -> PublishedTable {
    serde_json::from_str(TABLE).expect("shipped table parses")
}

/// Published (mean, std) for a cell, if the table has it.
pub fn lookup(dataset: &str, method: &str, ratio: f64) -> Option<(f64, f64)> {
    let t = table();
    let col = t.ratios.iter().position(|&r| r == ratio)?;
    t.rows
        .iter()
        .find(|r| r.dataset == dataset && r.method == method)
        .map(|r| (r.mean[col], r.std[col]))
}
