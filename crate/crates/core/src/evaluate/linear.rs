//! Multinomial logistic regression trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::graph::{FeatureMatrix, Labels};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub lr: f64,
    /// Weight decay on the weight matrix; the bias is not regularized.
    pub l2: f64,
    pub iters: usize,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            lr: 0.5,
            l2: 1e-4,
            iters: 300,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainedOn {
    pub dataset_hash: String,
    pub feature_recipe: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub dim: usize,
    pub num_classes: usize,
    /// `dim x num_classes`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub trained_on: TrainedOn,
    pub final_loss: f64,
    /// Step size after any halvings.
    pub final_lr: f64,
    /// Classes with no training node; they can still be predicted through
    /// the shared softmax but carry no signal of their own.
    pub missing_classes: Vec<usize>,
}

fn softmax_in_place(z: &mut [f64]) -> f64 {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0f64;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
    max + sum.ln()
}

fn logits(weights: &[f64], bias: &[f64], x: &[f64], out: &mut [f64]) {
    let k = bias.len();
    out.copy_from_slice(bias);
    for (d, &xd) in x.iter().enumerate() {
        if xd == 0.0 {
            continue;
        }
        let w = &weights[d * k..(d + 1) * k];
        for (o, &wk) in out.iter_mut().zip(w) {
            *o += xd * wk;
        }
    }
}

fn argmax(p: &[f64]) -> u32 {
    let mut best = 0;
    for (c, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = c;
        }
    }
    best as u32
}

impl LinearModel {
    pub fn probabilities(&self, x: &[f32]) -> Vec<f64> {
        let x: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let mut z = vec![0f64; self.num_classes];
        logits(&self.weights, &self.bias, &x, &mut z);
        softmax_in_place(&mut z);
        z
    }

    /// Most probable class; ties go to the smaller class id.
    pub fn predict(&self, x: &[f32]) -> u32 {
        argmax(&self.probabilities(x))
    }
}

/// Mean cross-entropy plus `l2 / 2 * ||W||^2` over a fixed training set.
///
/// Parameters are laid out as the `dim x K` weight matrix (row-major)
/// followed by the `K` biases.
#[derive(Clone, Debug)]
pub struct Objective {
    x: Vec<f64>,
    y: Vec<u32>,
    dim: usize,
    num_classes: usize,
    l2: f64,
}

impl Objective {
    pub fn new(h: &FeatureMatrix, labels: &Labels, nodes: &[u32], l2: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Eval("no training nodes".into()));
        }
        let mut x = Vec::with_capacity(nodes.len() * h.cols());
        let mut y = Vec::with_capacity(nodes.len());
        for &v in nodes {
            let c = labels
                .class(v)
                .ok_or_else(|| Error::Eval(format!("training node {v} has no label")))?;
            y.push(c);
            x.extend(h.row(v as usize).iter().map(|&f| f as f64));
        }
        Ok(Self {
            x,
            y,
            dim: h.cols(),
            num_classes: labels.num_classes,
            l2,
        })
    }

    /// Build directly from dense rows and labels.
    pub fn from_dense(x: Vec<f64>, y: Vec<u32>, dim: usize, num_classes: usize, l2: f64) -> Self {
        assert_eq!(x.len(), y.len() * dim);
        Self {
            x,
            y,
            dim,
            num_classes,
            l2,
        }
    }

    pub fn num_params(&self) -> usize {
        (self.dim + 1) * self.num_classes
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        self.evaluate(params, None)
    }

    pub fn loss_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0f64; self.num_params()];
        let loss = self.evaluate(params, Some(&mut grad));
        (loss, grad)
    }

    fn evaluate(&self, params: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let (k, dim) = (self.num_classes, self.dim);
        let (w, b) = params.split_at(dim * k);
        let n = self.y.len() as f64;
        let mut z = vec![0f64; k];
        let mut loss = 0f64;
        for (i, &yi) in self.y.iter().enumerate() {
            let x = &self.x[i * dim..(i + 1) * dim];
            logits(w, b, x, &mut z);
            let lse = {
                let zy = z[yi as usize];
                softmax_in_place(&mut z) - zy
            };
            loss += lse;
            if let Some(g) = grad.as_deref_mut() {
                z[yi as usize] -= 1.0;
                let (gw, gb) = g.split_at_mut(dim * k);
                for (d, &xd) in x.iter().enumerate() {
                    if xd == 0.0 {
                        continue;
                    }
                    for (gwk, &r) in gw[d * k..(d + 1) * k].iter_mut().zip(&z) {
                        *gwk += xd * r;
                    }
                }
                for (gbk, &r) in gb.iter_mut().zip(&z) {
                    *gbk += r;
                }
            }
        }
        loss /= n;
        let sq: f64 = w.iter().map(|v| v * v).sum();
        loss += 0.5 * self.l2 * sq;
        if let Some(g) = grad {
            let (gw, gb) = g.split_at_mut(dim * k);
            for (gwk, &wk) in gw.iter_mut().zip(w) {
                *gwk = *gwk / n + self.l2 * wk;
            }
            for gbk in gb.iter_mut() {
                *gbk /= n;
            }
        }
        loss
    }
}

const MAX_HALVINGS: usize = 60;

/// Gradient descent from zero parameters. A step that would raise the loss
/// is rejected and retried with half the step size, so the loss sequence
/// never increases.
pub fn train_linear(
    h: &FeatureMatrix,
    labels: &Labels,
    train_nodes: &[u32],
    hp: &TrainParams,
) -> Result<LinearModel> {
    let objective = Objective::new(h, labels, train_nodes, hp.l2)?;
    let mut present = vec![false; labels.num_classes];
    for &v in train_nodes {
        if let Some(c) = labels.class(v) {
            present[c as usize] = true;
        }
    }
    let missing_classes: Vec<usize> = (0..present.len()).filter(|&c| !present[c]).collect();
    if !missing_classes.is_empty() {
        log::warn!("classes {missing_classes:?} have no training nodes");
    }

    let (params, loss, lr) = descend(&objective, hp)?;
    let (dim, k) = (h.cols(), labels.num_classes);
    Ok(LinearModel {
        dim,
        num_classes: k,
        weights: params[..dim * k].to_vec(),
        bias: params[dim * k..].to_vec(),
        trained_on: TrainedOn::default(),
        final_loss: loss,
        final_lr: lr,
        missing_classes,
    })
}

/// Returns the final parameters, loss and step size.
pub fn descend(objective: &Objective, hp: &TrainParams) -> Result<(Vec<f64>, f64, f64)> {
    let mut params = vec![0f64; objective.num_params()];
    let (mut loss, mut grad) = objective.loss_and_gradient(&params);
    if !loss.is_finite() {
        return Err(Error::Diverged {
            iteration: 0,
            lr: hp.lr,
        });
    }
    let mut lr = hp.lr;
    let mut candidate = vec![0f64; params.len()];
    'outer: for iteration in 0..hp.iters {
        for _ in 0..MAX_HALVINGS {
            for ((c, p), g) in candidate.iter_mut().zip(&params).zip(&grad) {
                *c = p - lr * g;
            }
            let (next_loss, next_grad) = objective.loss_and_gradient(&candidate);
            if next_loss <= loss {
                std::mem::swap(&mut params, &mut candidate);
                loss = next_loss;
                grad = next_grad;
                continue 'outer;
            }
            lr *= 0.5;
        }
        // no step size lowers the loss any further
        if !loss.is_finite() {
            return Err(Error::Diverged { iteration, lr });
        }
        break;
    }
    Ok((params, loss, lr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Split;

    fn labels(y: &[u32], k: usize) -> Labels {
        Labels {
            num_classes: k,
            class_of: y.iter().map(|&c| Some(c)).collect(),
            split_of: vec![Some(Split::Train); y.len()],
        }
    }

    #[test]
    fn zero_params_give_uniform_loss() {
        let obj = Objective::from_dense(vec![1.0, 2.0, 3.0], vec![0, 1, 2], 1, 3, 0.0);
        let p = vec![0.0; obj.num_params()];
        assert!((obj.loss(&p) - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn heavy_regularization_predicts_majority() {
        let h = FeatureMatrix::from_rows(&[[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.8, 0.3], [0.1, 0.9]]);
        let l = labels(&[0, 0, 1, 0, 1], 2);
        let hp = TrainParams {
            l2: 1e6,
            ..Default::default()
        };
        let m = train_linear(&h, &l, &[0, 1, 2, 3, 4], &hp).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-3), "{:?}", m.weights);
        for v in 0..5 {
            assert_eq!(m.predict(h.row(v)), 0);
        }
    }

    #[test]
    fn strong_regularization_bias_tracks_prior_odds() {
        let h = FeatureMatrix::from_rows(&[[1.0, 0.0], [0.9, 0.1], [0.0, 1.0], [0.8, 0.3], [0.1, 0.9]]);
        let l = labels(&[0, 0, 1, 0, 1], 2);
        let hp = TrainParams {
            l2: 100.0,
            iters: 5000,
            ..Default::default()
        };
        let m = train_linear(&h, &l, &[0, 1, 2, 3, 4], &hp).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-2), "{:?}", m.weights);
        let odds = m.bias[0] - m.bias[1];
        assert!((odds - (3f64 / 2.0).ln()).abs() < 5e-2, "{odds}");
    }

    #[test]
    fn missing_class_is_flagged() {
        let h = FeatureMatrix::from_rows(&[[1.0], [2.0]]);
        let l = labels(&[0, 0], 3);
        let m = train_linear(&h, &l, &[0, 1], &TrainParams::default()).unwrap();
        assert_eq!(m.missing_classes, vec![1, 2]);
    }

    #[test]
    fn unlabeled_training_node_rejected() {
        let h = FeatureMatrix::from_rows(&[[1.0], [2.0]]);
        let mut l = labels(&[0, 1], 2);
        l.class_of[1] = None;
        assert!(train_linear(&h, &l, &[0, 1], &TrainParams::default()).is_err());
        assert!(train_linear(&h, &l, &[], &TrainParams::default()).is_err());
    }

    #[test]
    fn huge_features_report_divergence() {
        let h = FeatureMatrix::from_rows(&[[f32::MAX], [-f32::MAX]]);
        let l = labels(&[0, 1], 2);
        let hp = TrainParams {
            lr: 1e300,
            l2: 0.0,
            iters: 5,
        };
        // first step overflows; halving recovers a finite, non-increasing path
        let m = train_linear(&h, &l, &[0, 1], &hp).unwrap();
        assert!(m.final_loss.is_finite());
        assert!(m.final_lr < hp.lr);
    }
}
