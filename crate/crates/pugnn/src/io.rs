//! Readers and writers for the `.content`/`.cites` citation format and the
//! JSON-lines node format.
//!
//! Both produce a [`RawDataset`]: nodes in file order, the symmetrized graph,
//! row-aligned features and class labels as indices into the sorted list of
//! class names seen in the file.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use pugnn_core::{DenseMatrix, Graph};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    pub ids: Vec<String>,
    pub graph: Graph,
    pub features: DenseMatrix,
    /// Sorted, so class indices do not depend on row order.
    pub class_names: Vec<String>,
    pub labels: Vec<u32>,
}

impl RawDataset {
    pub fn num_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn class_index(&self, name: &str) -> Option<u32> {
        self.class_names.binary_search_by(|c| c.as_str().cmp(name)).ok().map(|i| i as u32)
    }

    pub fn class_counts(&self) -> Vec<(String, usize)> {
        let mut counts = vec![0usize; self.class_names.len()];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        self.class_names.iter().cloned().zip(counts).collect()
    }
}

/// What the loader dropped on the way in.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    /// Edge rows naming an id absent from the node list.
    pub unknown_ids: usize,
    pub self_loops: usize,
    /// Edge rows that repeat an edge, in either direction.
    pub duplicate_edges: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn at(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}:{line}: {msg}", path.display()))
}

fn class_table(names: &[String]) -> (Vec<String>, Vec<u32>) {
    let classes: Vec<String> = names.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let labels = names
        .iter()
        .map(|n| classes.binary_search(n).unwrap() as u32)
        .collect();
    (classes, labels)
}

fn build_graph(n: usize, edges: &[(usize, usize)], report: &mut LoadReport) -> Result<Graph> {
    let graph = Graph::from_edges(n, edges)?;
    report.self_loops = edges.iter().filter(|(u, v)| u == v).count();
    report.duplicate_edges = edges.len() - report.self_loops - graph.num_edges();
    Ok(graph)
}

/// Reads the whitespace-separated citation format.
///
/// Content rows are `id feature... class`; cites rows are `id id`. Edge rows
/// naming unknown ids are skipped and counted.
pub fn load_content_cites(content: &Path, cites: &Path) -> Result<(RawDataset, LoadReport)> {
    let mut ids = Vec::new();
    let mut index = HashMap::new();
    let mut values = Vec::new();
    let mut names = Vec::new();
    let mut dim = None;
    for (i, line) in open(content)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(content, e))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() < 3 {
            return Err(at(content, i + 1, "expected an id, at least one feature and a class"));
        }
        let row = &tokens[1..tokens.len() - 1];
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(at(content, i + 1, format!("{} features, earlier rows have {d}", row.len())))
            }
            _ => {}
        }
        for t in row {
            let x: f64 = t.parse().map_err(|_| at(content, i + 1, format!("bad feature value {t:?}")))?;
            values.push(x);
        }
        let id = tokens[0].to_string();
        if index.insert(id.clone(), ids.len()).is_some() {
            return Err(at(content, i + 1, format!("duplicate node id {id}")));
        }
        ids.push(id);
        names.push(tokens[tokens.len() - 1].to_string());
    }
    if ids.is_empty() {
        return Err(Error::Data(format!("{}: no nodes", content.display())));
    }

    let mut report = LoadReport::default();
    let mut edges = Vec::new();
    for (i, line) in open(cites)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(cites, e))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => continue,
            [a, b] => match (index.get(*a), index.get(*b)) {
                (Some(&u), Some(&v)) => edges.push((u, v)),
                _ => report.unknown_ids += 1,
            },
            _ => return Err(at(cites, i + 1, "expected two node ids")),
        }
    }

    let n = ids.len();
    let graph = build_graph(n, &edges, &mut report)?;
    let features = DenseMatrix::from_vec(n, dim.unwrap(), values)?;
    let (class_names, labels) = class_table(&names);
    Ok((
        RawDataset {
            ids,
            graph,
            features,
            class_names,
            labels,
        },
        report,
    ))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonNode {
    id: String,
    features: Vec<f64>,
    label: String,
    neighbors: Vec<String>,
}

/// Reads one `{"id", "features", "label", "neighbors"}` object per line.
pub fn load_jsonl(path: &Path) -> Result<(RawDataset, LoadReport)> {
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let node: JsonNode = serde_json::from_str(&line).map_err(|e| at(path, i + 1, e))?;
        if index.insert(node.id.clone(), nodes.len()).is_some() {
            return Err(at(path, i + 1, format!("duplicate node id {}", node.id)));
        }
        nodes.push((i + 1, node));
    }
    if nodes.is_empty() {
        return Err(Error::Data(format!("{}: no nodes", path.display())));
    }
    let dim = nodes[0].1.features.len();
    let mut values = Vec::with_capacity(nodes.len() * dim);
    let mut edges = Vec::new();
    for (u, (line, node)) in nodes.iter().enumerate() {
        if node.features.len() != dim {
            return Err(at(path, *line, format!("{} features, the first node has {dim}", node.features.len())));
        }
        values.extend_from_slice(&node.features);
        for nb in &node.neighbors {
            let &v = index
                .get(nb)
                .ok_or_else(|| at(path, *line, format!("node {} lists unknown neighbor {nb}", node.id)))?;
            edges.push((u, v));
        }
    }
    let n = nodes.len();
    let mut report = LoadReport::default();
    let graph = build_graph(n, &edges, &mut report)?;
    // every edge is normally listed from both ends
    report.duplicate_edges = report.duplicate_edges.saturating_sub(graph.num_edges());
    let names: Vec<String> = nodes.iter().map(|(_, n)| n.label.clone()).collect();
    let (class_names, labels) = class_table(&names);
    Ok((
        RawDataset {
            ids: nodes.into_iter().map(|(_, n)| n.id).collect(),
            graph,
            features: DenseMatrix::from_vec(n, dim, values)?,
            class_names,
            labels,
        },
        report,
    ))
}

/// Writes the JSON-lines format, listing each edge from both ends.
pub fn write_jsonl(path: &Path, data: &RawDataset) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in 0..data.num_nodes() {
        let node = JsonNode {
            id: data.ids[v].clone(),
            features: data.features.row(v).to_vec(),
            label: data.class_names[data.labels[v] as usize].clone(),
            neighbors: data.graph.neighbors(v).iter().map(|&u| data.ids[u].clone()).collect(),
        };
        serde_json::to_writer(&mut w, &node).map_err(|e| Error::Data(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
