//! Per-class node selectors. Each class is handled independently; ties are
//! always broken by the smaller original node id, so every selector is
//! deterministic and insensitive to storage order.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BudgetPlan, PrototypeSet};
use crate::graph::{FeatureMatrix, Labels};
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassSelection {
    pub class: usize,
    /// Original node ids in the order they were selected.
    pub selected: Vec<u32>,
    /// Sum of the selected features, accumulated in selection order.
    pub running_sum: Option<Vec<f64>>,
    /// Distance from the class prototype to the mean of the selection.
    pub mean_distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionState {
    pub classes: Vec<ClassSelection>,
}

impl SelectionState {
    pub fn total(&self) -> usize {
        self.classes.iter().map(|c| c.selected.len()).sum()
    }

    /// All selected ids, ascending.
    pub fn selected_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .classes
            .iter()
            .flat_map(|c| c.selected.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Fill running sums and mean distances for selectors that do not track
    /// them.
    pub fn with_distances(mut self, h: &FeatureMatrix, protos: &PrototypeSet) -> Self {
        for cs in &mut self.classes {
            if cs.running_sum.is_some() {
                continue;
            }
            let mut sum = vec![0f64; h.cols()];
            for &v in &cs.selected {
                add_row(&mut sum, h.row(v as usize));
            }
            cs.mean_distance = mean_distance(&protos.means[cs.class], &sum, cs.selected.len());
            cs.running_sum = Some(sum);
        }
        self
    }
}

fn add_row(sum: &mut [f64], row: &[f32]) {
    for (s, &x) in sum.iter_mut().zip(row) {
        *s += x as f64;
    }
}

fn mean_distance(mu: &[f64], sum: &[f64], count: usize) -> Option<f64> {
    (count > 0).then(|| {
        let n = count as f64;
        mu.iter()
            .zip(sum)
            .map(|(m, s)| {
                let d = m - s / n;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Candidate features widened to f64, row-major.
struct Candidates {
    ids: Vec<u32>,
    feats: Vec<f64>,
    dim: usize,
}

impl Candidates {
    fn new(h: &FeatureMatrix, ids: Vec<u32>) -> Self {
        let dim = h.cols();
        let mut feats = Vec::with_capacity(ids.len() * dim);
        for &v in &ids {
            feats.extend(h.row(v as usize).iter().map(|&x| x as f64));
        }
        Self { ids, feats, dim }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.feats[i * self.dim..(i + 1) * self.dim]
    }
}

fn per_class<F>(labels: &Labels, plan: &BudgetPlan, f: F) -> SelectionState
where
    F: Fn(usize, Vec<u32>, usize) -> ClassSelection + Send + Sync,
{
    let members = labels.members(plan.pool);
    let classes = par::map_indices(members.len(), |c| f(c, members[c].clone(), plan.budgets[c]));
    SelectionState { classes }
}

/// Greedy herding: starting from an empty set, repeatedly add the candidate
/// that brings the mean of the selection closest to the class prototype.
///
/// With running sum `s` of the `t` nodes chosen so far, candidate `x`
/// scores `|| mu - (s + x) / (t + 1) ||^2`; each step costs one pass over
/// the remaining candidates.
pub fn herd_select(
    h: &FeatureMatrix,
    labels: &Labels,
    protos: &PrototypeSet,
    plan: &BudgetPlan,
) -> SelectionState {
    per_class(labels, plan, |class, ids, budget| {
        let mu = &protos.means[class];
        let cands = Candidates::new(h, ids);
        let mut remaining: Vec<usize> = (0..cands.ids.len()).collect();
        let mut sum = vec![0f64; cands.dim];
        let mut selected = Vec::with_capacity(budget);
        for t in 0..budget.min(remaining.len()) {
            let count = (t + 1) as f64;
            let pos = par::argmin_by(&remaining, |&i| {
                let x = cands.row(i);
                let mut d2 = 0f64;
                for k in 0..cands.dim {
                    let d = mu[k] - (sum[k] + x[k]) / count;
                    d2 += d * d;
                }
                (d2, cands.ids[i])
            })
            .expect("budget never exceeds candidates");
            let i = remaining.swap_remove(pos);
            for (s, &x) in sum.iter_mut().zip(cands.row(i)) {
                *s += x;
            }
            selected.push(cands.ids[i]);
        }
        ClassSelection {
            class,
            mean_distance: mean_distance(mu, &sum, selected.len()),
            running_sum: Some(sum),
            selected,
        }
    })
}

/// Uniform sample without replacement per class. Each class draws from its
/// own stream derived from `seed`, so results do not depend on scheduling.
pub fn random_select(labels: &Labels, plan: &BudgetPlan, seed: u64) -> SelectionState {
    per_class(labels, plan, |class, ids, budget| {
        let stream = seed ^ (class as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        let budget = budget.min(ids.len());
        let selected = sample(&mut rng, ids.len(), budget)
            .into_iter()
            .map(|i| ids[i])
            .collect();
        ClassSelection {
            class,
            selected,
            running_sum: None,
            mean_distance: None,
        }
    })
}

/// Greedy farthest-point traversal per class, seeded with the candidate
/// nearest the prototype.
pub fn kcenter_select(
    h: &FeatureMatrix,
    labels: &Labels,
    protos: &PrototypeSet,
    plan: &BudgetPlan,
) -> SelectionState {
    per_class(labels, plan, |class, ids, budget| {
        let mu = &protos.means[class];
        let cands = Candidates::new(h, ids);
        let mut remaining: Vec<usize> = (0..cands.ids.len()).collect();
        let mut nearest = vec![f64::INFINITY; cands.ids.len()];
        let mut selected = Vec::with_capacity(budget);
        for t in 0..budget.min(remaining.len()) {
            let pos = if t == 0 {
                par::argmin_by(&remaining, |&i| (sq_dist(cands.row(i), mu), cands.ids[i]))
            } else {
                par::argmin_by(&remaining, |&i| (-nearest[i], cands.ids[i]))
            }
            .expect("budget never exceeds candidates");
            let chosen = remaining.swap_remove(pos);
            selected.push(cands.ids[chosen]);
            let c = cands.row(chosen);
            for &i in &remaining {
                let d = sq_dist(cands.row(i), c);
                if d < nearest[i] {
                    nearest[i] = d;
                }
            }
        }
        ClassSelection {
            class,
            selected,
            running_sum: None,
            mean_distance: None,
        }
    })
}

/// The `b_c` candidates closest to the prototype, nearest first.
pub fn topk_prototype_select(
    h: &FeatureMatrix,
    labels: &Labels,
    protos: &PrototypeSet,
    plan: &BudgetPlan,
) -> SelectionState {
    per_class(labels, plan, |class, ids, budget| {
        let mu = &protos.means[class];
        let cands = Candidates::new(h, ids);
        let mut scored: Vec<(f64, u32)> = (0..cands.ids.len())
            .map(|i| (sq_dist(cands.row(i), mu), cands.ids[i]))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ClassSelection {
            class,
            selected: scored.into_iter().take(budget).map(|(_, v)| v).collect(),
            running_sum: None,
            mean_distance: None,
        }
    })
}
