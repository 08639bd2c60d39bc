//! In-memory PU datasets: binary label mapping, train/test and PU masks,
//! feature normalization.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::graph::{partition_unlabeled, DistancePartition, Graph, NodeId, NormalizedAdjacency};
use crate::tensor::DenseMatrix;

/// Which original classes count as positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMapping {
    positive_classes: BTreeSet<u32>,
    source_class_count: u32,
}

impl BinaryMapping {
    pub fn new(positive_classes: impl IntoIterator<Item = u32>, source_class_count: u32) -> Result<Self> {
        let positive_classes: BTreeSet<u32> = positive_classes.into_iter().collect();
        if positive_classes.is_empty() {
            return Err(invalid("positive class set is empty"));
        }
        if let Some(&c) = positive_classes.iter().find(|&&c| c >= source_class_count) {
            return Err(invalid(format!(
                "positive class {c} is not among the {source_class_count} source classes"
            )));
        }
        if positive_classes.len() as u32 == source_class_count {
            return Err(invalid("positive classes must be a strict subset of all classes"));
        }
        Ok(Self {
            positive_classes,
            source_class_count,
        })
    }

    pub fn positive_classes(&self) -> impl Iterator<Item = u32> + '_ {
        self.positive_classes.iter().copied()
    }

    pub fn source_class_count(&self) -> u32 {
        self.source_class_count
    }

    pub fn is_positive(&self, class: u32) -> bool {
        self.positive_classes.contains(&class)
    }
}

pub fn binarize_labels(labels: &[u32], mapping: &BinaryMapping) -> Result<Vec<bool>> {
    labels
        .iter()
        .enumerate()
        .map(|(v, &c)| {
            if c >= mapping.source_class_count {
                Err(invalid(format!("node {v} has unseen class id {c}")))
            } else {
                Ok(mapping.is_positive(c))
            }
        })
        .collect()
}

/// Selects `min(train_count, n)` training nodes uniformly at random.
pub fn make_train_split(num_nodes: usize, train_count: usize, seed: u64) -> Vec<bool> {
    let mut mask = vec![false; num_nodes];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<NodeId> = (0..num_nodes).collect();
    for v in partial_shuffle(&mut nodes, train_count, &mut rng) {
        mask[*v] = true;
    }
    mask
}

/// Number of labeled positives for a label ratio: `max(1, round(ratio · n))`
/// where `n` is the total node count.
pub fn labeled_count(label_ratio: f64, num_nodes: usize) -> usize {
    let raw = libm::round(label_ratio * num_nodes as f64) as usize;
    raw.max(1)
}

/// Draws the labeled-positive mask among positive training nodes.
///
/// The count comes from [`labeled_count`] and is capped at the number of
/// positive training nodes.
pub fn make_pu_split(labels: &[bool], train_mask: &[bool], label_ratio: f64, seed: u64) -> Result<Vec<bool>> {
    if labels.len() != train_mask.len() {
        return Err(invalid("label and train mask lengths differ"));
    }
    if !(label_ratio > 0.0 && label_ratio <= 1.0) {
        return Err(invalid("label ratio must lie in (0, 1]"));
    }
    let mut candidates: Vec<NodeId> = (0..labels.len()).filter(|&v| labels[v] && train_mask[v]).collect();
    if candidates.is_empty() {
        return Err(invalid("no positive nodes in the training set"));
    }
    let count = labeled_count(label_ratio, labels.len()).min(candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = vec![false; labels.len()];
    for &v in partial_shuffle(&mut candidates, count, &mut rng).iter() {
        mask[v] = true;
    }
    Ok(mask)
}

/// Moves a uniform random `k`-subset to the front (partial Fisher-Yates).
fn partial_shuffle<'a, T>(items: &'a mut [T], k: usize, rng: &mut ChaCha8Rng) -> &'a [T] {
    let k = k.min(items.len());
    for i in 0..k {
        let j = rng.random_range(i..items.len());
        items.swap(i, j);
    }
    &items[..k]
}

/// Scales each row to unit L1 norm; all-zero rows stay zero.
pub fn normalize_features(features: &mut DenseMatrix) -> Result<()> {
    if !features.is_finite() {
        return Err(invalid("features contain NaN or infinite values"));
    }
    for i in 0..features.rows() {
        let row = features.row_mut(i);
        let norm: f64 = row.iter().map(|x| x.abs()).sum();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    Ok(())
}

/// A transductive PU node-classification problem.
#[derive(Clone, Debug)]
pub struct PUDataset {
    pub graph: Graph,
    pub adjacency: NormalizedAdjacency,
    pub features: DenseMatrix,
    pub true_label: Vec<bool>,
    pub labeled_mask: Vec<bool>,
    pub train_mask: Vec<bool>,
    pub test_mask: Vec<bool>,
    pub partition: DistancePartition,
}

impl PUDataset {
    /// Builds the dataset; the test mask is the complement of `train_mask`.
    pub fn new(
        graph: Graph,
        features: DenseMatrix,
        true_label: Vec<bool>,
        train_mask: Vec<bool>,
        labeled_mask: Vec<bool>,
        delta: u32,
    ) -> Result<Self> {
        let n = graph.num_nodes();
        if features.rows() != n || true_label.len() != n || train_mask.len() != n || labeled_mask.len() != n {
            return Err(Error::Shape {
                op: "PUDataset::new",
                expected: (n, features.cols()),
                found: features.shape(),
            });
        }
        for v in 0..n {
            if labeled_mask[v] && !(train_mask[v] && true_label[v]) {
                return Err(invalid(format!("labeled node {v} must be a positive training node")));
            }
        }
        let labeled: Vec<NodeId> = (0..n).filter(|&v| labeled_mask[v]).collect();
        let partition = partition_unlabeled(&graph, &labeled, delta)?;
        let test_mask = train_mask.iter().map(|&t| !t).collect();
        let adjacency = NormalizedAdjacency::new(&graph);
        Ok(Self {
            graph,
            adjacency,
            features,
            true_label,
            labeled_mask,
            train_mask,
            test_mask,
            partition,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Same data with the unlabeled nodes re-split at a new threshold.
    pub fn with_delta(&self, delta: u32) -> Result<Self> {
        let mut out = self.clone();
        out.partition = partition_unlabeled(&self.graph, &self.partition.labeled, delta)?;
        Ok(out)
    }

    /// Same graph and features with a different labeled set.
    pub fn with_labeled(&self, labeled_mask: Vec<bool>) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            self.features.clone(),
            self.true_label.clone(),
            self.train_mask.clone(),
            labeled_mask,
            self.partition.delta,
        )
    }

    /// Fraction of positive nodes in the ground truth.
    pub fn positive_fraction(&self) -> f64 {
        self.true_label.iter().filter(|&&l| l).count() as f64 / self.num_nodes() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_validation() {
        assert!(BinaryMapping::new([], 3).is_err());
        assert!(BinaryMapping::new([0, 1, 2], 3).is_err());
        assert!(BinaryMapping::new([5], 3).is_err());
        assert!(BinaryMapping::new([1], 3).is_ok());
    }

    #[test]
    fn binarize_subset() {
        let m = BinaryMapping::new([0, 1, 2], 4).unwrap();
        assert_eq!(binarize_labels(&[0, 2, 1, 1], &m).unwrap(), vec![true; 4]);
        assert_eq!(binarize_labels(&[3, 0], &m).unwrap(), vec![false, true]);
        assert!(binarize_labels(&[4], &m).is_err());
    }

    #[test]
    fn labeled_counts_use_total_nodes() {
        assert_eq!(labeled_count(0.001, 2708), 3);
        assert_eq!(labeled_count(0.01, 2708), 27);
        assert_eq!(labeled_count(0.0001, 100), 1);
    }

    #[test]
    fn pu_split_is_seeded_and_sized() {
        let n = 500;
        let labels: Vec<bool> = (0..n).map(|v| v % 3 == 0).collect();
        let train = make_train_split(n, 200, 1);
        assert_eq!(train.iter().filter(|&&t| t).count(), 200);
        let a = make_pu_split(&labels, &train, 0.02, 7).unwrap();
        assert_eq!(a, make_pu_split(&labels, &train, 0.02, 7).unwrap());
        let b = make_pu_split(&labels, &train, 0.02, 8).unwrap();
        assert_ne!(a, b);
        for m in [&a, &b] {
            assert_eq!(m.iter().filter(|&&x| x).count(), 10);
            assert!((0..n).all(|v| !m[v] || (labels[v] && train[v])));
        }
    }

    #[test]
    fn pu_split_caps_and_errors() {
        let labels = [true, false, true, false];
        let train = [true, true, false, false];
        let m = make_pu_split(&labels, &train, 1.0, 0).unwrap();
        assert_eq!(m, vec![true, false, false, false]);
        assert!(make_pu_split(&labels, &[false, true, false, true], 0.5, 0).is_err());
        assert!(make_pu_split(&labels, &train, 0.0, 0).is_err());
    }

    #[test]
    fn feature_normalization() {
        let mut x = DenseMatrix::from_rows(&[vec![2.0, 2.0, 0.0, 0.0], vec![0.0; 4], vec![1.0; 4]]).unwrap();
        normalize_features(&mut x).unwrap();
        assert_eq!(x.row(0), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(x.row(1), &[0.0; 4]);
        assert_eq!(x.row(2), &[0.25; 4]);
        let mut bad = DenseMatrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(normalize_features(&mut bad).is_err());
    }

    #[test]
    fn dataset_invariants() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let x = DenseMatrix::zeros(4, 2);
        let labels = vec![true, true, false, false];
        let train = vec![true, false, true, false];
        let d = PUDataset::new(g.clone(), x.clone(), labels.clone(), train.clone(), vec![true, false, false, false], 1)
            .unwrap();
        assert_eq!(d.test_mask, vec![false, true, false, true]);
        assert_eq!(d.partition.near, vec![1]);
        assert_eq!(d.partition.far, vec![2, 3]);
        assert_eq!(d.with_delta(3).unwrap().partition.far, Vec::<usize>::new());
        // a labeled node that is negative violates the invariant
        assert!(PUDataset::new(g, x, labels, train, vec![false, false, true, false], 1).is_err());
    }
}
