use serde::{Deserialize, Serialize};

use super::LinearModel;
use crate::graph::{FeatureMatrix, Labels, Provenance};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    /// Test nodes whose true label is this class.
    pub support: usize,
    pub predicted: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub ratio: f64,
    pub seed: Option<u64>,
    /// Fraction of test nodes classified correctly.
    pub accuracy: f64,
    /// Unweighted mean F1 over classes that occur in the labels or the
    /// predictions.
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    pub test_size: usize,
    pub dataset_hash: Option<String>,
    pub provenance: Option<Provenance>,
    pub condense_seconds: f64,
    pub train_seconds: f64,
}

/// Accuracy, macro-F1 and per-class precision/recall from paired labels.
pub fn classification_metrics(
    truth: &[u32],
    predicted: &[u32],
    num_classes: usize,
) -> (f64, f64, Vec<ClassMetrics>) {
    assert_eq!(truth.len(), predicted.len());
    let mut tp = vec![0usize; num_classes];
    let mut support = vec![0usize; num_classes];
    let mut pred = vec![0usize; num_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        support[t as usize] += 1;
        pred[p as usize] += 1;
        if t == p {
            tp[t as usize] += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let per_class: Vec<ClassMetrics> = (0..num_classes)
        .map(|c| {
            let precision = ratio(tp[c], pred[c]);
            let recall = ratio(tp[c], support[c]);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class: c,
                support: support[c],
                predicted: pred[c],
                precision,
                recall,
                f1,
            }
        })
        .collect();
    let accuracy = ratio(tp.iter().sum(), truth.len());
    let active: Vec<f64> = per_class
        .iter()
        .filter(|m| m.support > 0 || m.predicted > 0)
        .map(|m| m.f1)
        .collect();
    let macro_f1 = if active.is_empty() {
        0.0
    } else {
        active.iter().sum::<f64>() / active.len() as f64
    };
    (accuracy, macro_f1, per_class)
}

/// Score `m` on the listed test nodes. Run metadata (method, ratio, seed,
/// timings) is left for the caller to fill.
pub fn evaluate_model(
    m: &LinearModel,
    h: &FeatureMatrix,
    labels: &Labels,
    test_nodes: &[u32],
) -> Result<EvalReport> {
    if test_nodes.is_empty() {
        return Err(Error::Eval("empty test set".into()));
    }
    if h.cols() != m.dim {
        return Err(Error::Eval(format!(
            "model expects {} features, test matrix has {}",
            m.dim,
            h.cols()
        )));
    }
    let mut truth = Vec::with_capacity(test_nodes.len());
    let mut predicted = Vec::with_capacity(test_nodes.len());
    for &v in test_nodes {
        let t = labels
            .class(v)
            .ok_or_else(|| Error::Eval(format!("test node {v} has no label")))?;
        truth.push(t);
        predicted.push(m.predict(h.row(v as usize)));
    }
    let (accuracy, macro_f1, per_class) =
        classification_metrics(&truth, &predicted, labels.num_classes);
    Ok(EvalReport {
        method: String::new(),
        ratio: 1.0,
        seed: None,
        accuracy,
        macro_f1,
        per_class,
        test_size: test_nodes.len(),
        dataset_hash: None,
        provenance: None,
        condense_seconds: 0.0,
        train_seconds: 0.0,
    })
}
