//! Linear proxy evaluation of condensed graphs.
//!
//! A condensed graph is judged by training a multinomial logistic regression
//! on its propagated target features and testing on the propagated features
//! of the original graph's test split.

mod compare;
mod linear;
mod metrics;

pub use compare::{
    compare_runs, mean_std, read_results_csv, results_csv, ComparisonTable, ResultRow, SummaryRow,
};
pub use linear::{descend, train_linear, LinearModel, Objective, TrainParams, TrainedOn};
pub use metrics::{classification_metrics, evaluate_model, ClassMetrics, EvalReport};

use std::time::Instant;

use crate::graph::{FeatureMatrix, HeteroGraph, Labels, Split};
use crate::propagation::{FeatureRecipe, PropagationCache};
use crate::{Error, Result};

/// Full-graph test features computed once and reused across runs.
#[derive(Clone, Debug)]
pub struct ProxyEvaluator {
    recipe: FeatureRecipe,
    hp: TrainParams,
    features: FeatureMatrix,
    labels: Labels,
    test_nodes: Vec<u32>,
    dataset_hash: String,
}

impl ProxyEvaluator {
    pub fn new(full: &HeteroGraph, recipe: FeatureRecipe, hp: TrainParams) -> Result<Self> {
        let features = recipe.build(full, &PropagationCache::new())?;
        let test_nodes = full.labels.split_nodes(Split::Test);
        if test_nodes.is_empty() {
            return Err(Error::Eval("the dataset has no labeled test nodes".into()));
        }
        Ok(Self {
            recipe,
            hp,
            features,
            labels: full.labels.clone(),
            test_nodes,
            dataset_hash: full.fingerprint(),
        })
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn dataset_hash(&self) -> &str {
        &self.dataset_hash
    }

    /// Train on the full graph's training split.
    pub fn eval_full(&self) -> Result<EvalReport> {
        let train = self.labels.split_nodes(Split::Train);
        let mut r = self.fit(&self.features, &self.labels, &train)?;
        r.method = "full".into();
        Ok(r)
    }

    /// Train on every labeled target node of a condensed graph, with
    /// features recomputed on that graph.
    pub fn eval_condensed(&self, condensed: &HeteroGraph) -> Result<EvalReport> {
        let h = self.recipe.build(condensed, &PropagationCache::new())?;
        if h.cols() != self.features.cols() {
            return Err(Error::Eval(format!(
                "condensed training features have {} columns but full-graph test features have {}; \
                 both sides must come from the same feature recipe over graphs with the same schema",
                h.cols(),
                self.features.cols()
            )));
        }
        if condensed.labels.num_classes != self.labels.num_classes {
            return Err(Error::Eval(format!(
                "condensed graph has {} classes, full graph {}",
                condensed.labels.num_classes, self.labels.num_classes
            )));
        }
        let train: Vec<u32> = (0..condensed.labels.len() as u32)
            .filter(|&v| condensed.labels.class(v).is_some())
            .collect();
        self.fit(&h, &condensed.labels, &train)
    }

    fn fit(&self, h: &FeatureMatrix, labels: &Labels, train: &[u32]) -> Result<EvalReport> {
        let start = Instant::now();
        let mut model = train_linear(h, labels, train, &self.hp)?;
        let train_seconds = start.elapsed().as_secs_f64();
        model.trained_on = TrainedOn {
            dataset_hash: self.dataset_hash.clone(),
            feature_recipe: self.recipe.to_string(),
        };
        let mut r = evaluate_model(&model, &self.features, &self.labels, &self.test_nodes)?;
        r.dataset_hash = Some(self.dataset_hash.clone());
        r.train_seconds = train_seconds;
        Ok(r)
    }
}
