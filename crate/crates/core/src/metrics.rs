use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

/// Score threshold for a positive prediction.
pub const THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct F1Scores {
    /// Percentages in [0, 100].
    pub macro_f1: f64,
    pub f1_pos: f64,
    pub f1_neg: f64,
    pub confusion: ConfusionCounts,
}

pub fn confusion(y_hat: &[f64], truth: &[bool], mask: &[bool]) -> Result<ConfusionCounts> {
    if y_hat.len() != truth.len() || truth.len() != mask.len() {
        return Err(invalid("score, label and mask lengths differ"));
    }
    let mut c = ConfusionCounts::default();
    for ((&y, &t), _) in y_hat.iter().zip(truth).zip(mask).filter(|(_, &m)| m) {
        match (y >= THRESHOLD, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// F1 of one class from its true positives, false positives and false
/// negatives, with `0/0 := 0`.
fn class_f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

pub fn f1_from_confusion(c: ConfusionCounts) -> F1Scores {
    let f1_pos = 100.0 * class_f1(c.tp, c.fp, c.fn_);
    let f1_neg = 100.0 * class_f1(c.tn, c.fn_, c.fp);
    F1Scores {
        macro_f1: (f1_pos + f1_neg) / 2.0,
        f1_pos,
        f1_neg,
        confusion: c,
    }
}

/// Macro F1 over the masked nodes at threshold 0.5.
pub fn macro_f1(y_hat: &[f64], truth: &[bool], mask: &[bool]) -> Result<F1Scores> {
    let c = confusion(y_hat, truth, mask)?;
    if c.total() == 0 {
        return Err(invalid("evaluation mask is empty"));
    }
    Ok(f1_from_confusion(c))
}

/// Mean and sample (n - 1) standard deviation; the deviation of a single
/// value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, math::sqrt(ss / (n - 1.0)))
}

pub fn scores_to_predictions(y_hat: &[f64]) -> Vec<bool> {
    y_hat.iter().map(|&y| y >= THRESHOLD).collect()
}
