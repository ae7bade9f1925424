//! Class prototypes, budgets, node selection and the end-to-end
//! condensation pipeline.

mod budget;
mod config;
mod prototypes;
mod select;

pub use budget::{allocate_budgets, allocate_class_budgets, apportion, BudgetPlan};
pub use config::{CondensationConfig, ConfigFile, Method};
pub use prototypes::{class_prototypes, PrototypeSet};
pub use select::{
    herd_select, kcenter_select, random_select, topk_prototype_select, ClassSelection,
    SelectionState,
};

use crate::graph::{
    induced_subgraph, ClassProvenance, FeatureMatrix, HeteroGraph, IdMap, Pool, Provenance,
};
use crate::propagation::PropagationCache;
use crate::{Result, TOOL_VERSION};

#[derive(Clone, Debug)]
pub struct CondensedResult {
    pub graph: HeteroGraph,
    pub id_map: IdMap,
    /// Selected target ids in the original graph, ascending.
    pub selected: Vec<u32>,
    pub selection: SelectionState,
    pub plan: BudgetPlan,
    pub provenance: Provenance,
}

/// Run `cfg.method` over features that are already built.
pub fn select(
    h: &FeatureMatrix,
    g: &HeteroGraph,
    cfg: &CondensationConfig,
) -> Result<(SelectionState, BudgetPlan, PrototypeSet)> {
    let protos = class_prototypes(h, &g.labels, Pool::Labeled)?;
    let plan = match &cfg.class_ratios {
        Some(ratios) => allocate_class_budgets(&g.labels, ratios, cfg.pool)?,
        None => allocate_budgets(&g.labels, cfg.ratio, cfg.pool)?,
    };
    let state = match cfg.method {
        Method::Herding => herd_select(h, &g.labels, &protos, &plan),
        Method::Random => {
            // validated: random always carries a seed
            random_select(&g.labels, &plan, cfg.seed.unwrap_or_default())
        }
        Method::KCenter => kcenter_select(h, &g.labels, &protos, &plan),
        Method::TopkPrototype => topk_prototype_select(h, &g.labels, &protos, &plan),
    }
    .with_distances(h, &protos);
    Ok((state, plan, protos))
}

/// Propagate, select and extract the condensed graph.
pub fn condense(g: &HeteroGraph, cfg: &CondensationConfig) -> Result<CondensedResult> {
    condense_with_cache(g, cfg, &PropagationCache::new())
}

pub fn condense_with_cache(
    g: &HeteroGraph,
    cfg: &CondensationConfig,
    cache: &PropagationCache,
) -> Result<CondensedResult> {
    cfg.validate()?;
    let h = cfg.recipe().build(g, cache)?;
    let (selection, plan, _) = select(&h, g, cfg)?;
    let selected = selection.selected_ids();
    let (graph, id_map) = induced_subgraph(g, &selected, cfg.neighbor_policy)?;

    let mut notes = vec![format!(
        "condensed graph keeps non-target nodes by neighbor policy `{}`",
        cfg.neighbor_policy
    )];
    if cfg.method == Method::KCenter {
        notes.push("k-center traversal runs per class, seeded at the node nearest the class mean".into());
    }
    let provenance = Provenance {
        method: cfg.method.to_string(),
        ratio: cfg.ratio,
        seed: cfg.seed,
        metapaths: cfg.metapaths.clone(),
        fusion: cfg.fusion.to_string(),
        use_raw_features: cfg.use_raw_features,
        pool: cfg.pool,
        neighbor_policy: cfg.neighbor_policy.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        source_fingerprint: g.fingerprint(),
        class_ratios: cfg.class_ratios.clone(),
        classes: selection
            .classes
            .iter()
            .map(|c| ClassProvenance {
                class: c.class,
                pool_size: plan.pool_sizes[c.class],
                budget: plan.budgets[c.class],
                mean_distance: c.mean_distance,
            })
            .collect(),
        notes,
    };
    Ok(CondensedResult {
        graph,
        id_map,
        selected,
        selection,
        plan,
        provenance,
    })
}
