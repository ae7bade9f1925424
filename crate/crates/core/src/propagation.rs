//! Metapath feature propagation.
//!
//! For a metapath `c c1 ... cl` the propagated features are
//! `Â(c,c1) Â(c1,c2) ... Â(cl-1,cl) X(cl)`, where each `Â` is the
//! row-normalized relation matrix. Products are evaluated right to left as
//! sparse-times-dense steps, so every intermediate has the shape of a
//! feature matrix and no sparse-sparse product is ever formed.
//!
//! Features are stored in f32; every row is accumulated in f64 in ascending
//! column order and rounded once, which makes results independent of the
//! number of worker threads.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeTypeId, FeatureMatrix, HeteroGraph, NodeTypeId, SparseAdjacency};
use crate::{par, Error, Result};

/// Sparse matrix whose non-empty rows each sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency(SparseAdjacency);

impl NormalizedAdjacency {
    pub fn as_sparse(&self) -> &SparseAdjacency {
        &self.0
    }

    /// `self * x`, accumulated in f64 and rounded to f32 per entry.
    pub fn apply(&self, x: &FeatureMatrix) -> FeatureMatrix {
        let a = &self.0;
        assert_eq!(a.cols(), x.rows(), "chain shape mismatch");
        let dim = x.cols();
        let mut out = vec![0f32; a.rows() * dim];
        par::fill_rows(&mut out, dim, |i, row| {
            let (cols, vals) = a.row(i);
            if cols.is_empty() {
                return;
            }
            let mut acc = vec![0f64; dim];
            for (&j, &w) in cols.iter().zip(vals) {
                for (s, &v) in acc.iter_mut().zip(x.row(j as usize)) {
                    *s += w * v as f64;
                }
            }
            for (o, s) in row.iter_mut().zip(acc) {
                *o = s as f32;
            }
        });
        FeatureMatrix::new(a.rows(), dim, out)
    }

    /// `self * x` for a dense row-major f64 matrix with `dim` columns,
    /// without intermediate rounding.
    pub fn apply_f64(&self, x: &[f64], dim: usize) -> Vec<f64> {
        let a = &self.0;
        assert_eq!(a.cols() * dim, x.len(), "chain shape mismatch");
        let mut out = vec![0f64; a.rows() * dim];
        par::fill_rows(&mut out, dim, |i, row| {
            let (cols, vals) = a.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                let xj = &x[j as usize * dim..(j as usize + 1) * dim];
                for (s, &v) in row.iter_mut().zip(xj) {
                    *s += w * v;
                }
            }
        });
        out
    }
}

/// Divide every entry by its row sum. Empty rows stay empty; the sparsity
/// pattern is unchanged. Weights must be finite and positive.
pub fn row_normalize(a: &SparseAdjacency) -> Result<NormalizedAdjacency> {
    let mut values = Vec::with_capacity(a.nnz());
    for r in 0..a.rows() {
        let (cols, vals) = a.row(r);
        let mut sum = 0f64;
        for (&c, &v) in cols.iter().zip(vals) {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::BadAdjacencyValue {
                    row: r,
                    col: c as usize,
                    value: v,
                });
            }
            sum += v;
        }
        values.extend(vals.iter().map(|&v| v / sum));
    }
    Ok(NormalizedAdjacency(SparseAdjacency::from_raw_parts(
        a.rows(),
        a.cols(),
        a.offsets().to_vec(),
        a.indices().to_vec(),
        values,
    )))
}

/// A sequence of node types starting at the target type, with the relation
/// realizing each hop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metapath {
    spec: String,
    types: Vec<NodeTypeId>,
    edges: Vec<EdgeTypeId>,
}

impl fmt::Display for Metapath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

impl Metapath {
    /// Parse `paper-author-paper`, naming a relation explicitly where
    /// several connect the same pair of types: `paper>writes<author-paper`.
    pub fn parse(g: &HeteroGraph, spec: &str) -> Result<Self> {
        let fail = |msg: String| Error::Metapath {
            path: spec.to_string(),
            msg,
        };
        let mut names = Vec::new();
        let mut relations: Vec<Option<&str>> = Vec::new();
        let mut rest = spec.trim();
        loop {
            let end = rest.find(['-', '>']).unwrap_or(rest.len());
            names.push(&rest[..end]);
            rest = &rest[end..];
            if rest.is_empty() {
                break;
            }
            if let Some(after) = rest.strip_prefix('-') {
                relations.push(None);
                rest = after;
            } else {
                let after = &rest[1..];
                let close = after
                    .find('<')
                    .ok_or_else(|| fail("`>` without matching `<`".into()))?;
                relations.push(Some(&after[..close]));
                rest = &after[close + 1..];
            }
        }
        let mut types = Vec::with_capacity(names.len());
        for name in &names {
            let id = g
                .node_type_id(name)
                .ok_or_else(|| fail(format!("unknown node type `{name}`")))?;
            types.push(id);
        }
        let mut edges = Vec::with_capacity(relations.len());
        for (hop, rel) in relations.iter().enumerate() {
            let (a, b) = (types[hop], types[hop + 1]);
            let id = match rel {
                Some(rel) => {
                    let id = g
                        .edge_type_id(rel)
                        .ok_or_else(|| fail(format!("unknown edge type `{rel}`")))?;
                    let e = g.edge_type(id);
                    if e.src != a || e.dst != b {
                        return Err(fail(format!(
                            "edge type `{rel}` does not connect `{}` to `{}`",
                            names[hop],
                            names[hop + 1]
                        )));
                    }
                    id
                }
                None => resolve_hop(g, a, b).map_err(fail)?,
            };
            edges.push(id);
        }
        Self::from_parts(g, spec.trim().to_string(), types, edges)
    }

    /// Compile a type sequence, requiring a unique relation per hop.
    pub fn compile(g: &HeteroGraph, types: &[NodeTypeId]) -> Result<Self> {
        let spec = types
            .iter()
            .map(|&t| g.node_type(t).name.as_str())
            .collect::<Vec<_>>()
            .join("-");
        let mut edges = Vec::new();
        for w in types.windows(2) {
            edges.push(resolve_hop(g, w[0], w[1]).map_err(|msg| Error::Metapath {
                path: spec.clone(),
                msg,
            })?);
        }
        Self::from_parts(g, spec, types.to_vec(), edges)
    }

    fn from_parts(
        g: &HeteroGraph,
        spec: String,
        types: Vec<NodeTypeId>,
        edges: Vec<EdgeTypeId>,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Metapath {
                path: spec,
                msg: "a metapath needs at least one hop".into(),
            });
        }
        if types[0] != g.target {
            return Err(Error::Metapath {
                path: spec,
                msg: format!("must start at the target type `{}`", g.node_type(g.target).name),
            });
        }
        Ok(Self { spec, types, edges })
    }

    pub fn types(&self) -> &[NodeTypeId] {
        &self.types
    }

    pub fn edges(&self) -> &[EdgeTypeId] {
        &self.edges
    }

    pub fn terminal(&self) -> NodeTypeId {
        *self.types.last().unwrap()
    }
}

fn resolve_hop(g: &HeteroGraph, a: NodeTypeId, b: NodeTypeId) -> Result<EdgeTypeId, String> {
    let found: Vec<_> = g
        .edge_types
        .iter()
        .enumerate()
        .filter(|(_, e)| e.src == a && e.dst == b)
        .map(|(i, _)| EdgeTypeId(i as u32))
        .collect();
    let (na, nb) = (&g.node_type(a).name, &g.node_type(b).name);
    match found.as_slice() {
        [one] => Ok(*one),
        [] => Err(format!("no edge type from `{na}` to `{nb}`")),
        many => {
            let names: Vec<&str> = many
                .iter()
                .map(|e| g.edge_types[e.0 as usize].name.as_str())
                .collect();
            Err(format!(
                "several edge types connect `{na}` to `{nb}` ({}); name one with `{na}>REL<{nb}`",
                names.join(", ")
            ))
        }
    }
}

/// Propagated intermediates of one graph, keyed by the exact relation
/// sequence that produced them, counted from the terminal end of the chain
/// (a chain `[e1, e2, e3]` stores `[e3]`, `[e2, e3]` and `[e1, e2, e3]`).
/// Metapaths sharing a tail reuse its product.
///
/// A cache must only be used with the graph it was filled from.
#[derive(Debug, Default)]
pub struct PropagationCache {
    products: RwLock<HashMap<Vec<EdgeTypeId>, Arc<FeatureMatrix>>>,
    normalized: RwLock<HashMap<EdgeTypeId, Arc<NormalizedAdjacency>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl PropagationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.products.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &[EdgeTypeId]) -> Option<Arc<FeatureMatrix>> {
        self.products.read().unwrap().get(key).cloned()
    }

    fn insert(&self, key: Vec<EdgeTypeId>, value: Arc<FeatureMatrix>) {
        self.products.write().unwrap().insert(key, value);
    }

    fn normalized(&self, g: &HeteroGraph, e: EdgeTypeId) -> Result<Arc<NormalizedAdjacency>> {
        if let Some(a) = self.normalized.read().unwrap().get(&e) {
            return Ok(a.clone());
        }
        let a = Arc::new(row_normalize(g.adjacency(e))?);
        self.normalized.write().unwrap().insert(e, a.clone());
        Ok(a)
    }
}

/// Features of the metapath's start type aggregated along the path.
pub fn propagate_metapath(
    g: &HeteroGraph,
    path: &Metapath,
    cache: &PropagationCache,
) -> Result<Arc<FeatureMatrix>> {
    let edges = path.edges();
    // longest cached tail
    let mut start = edges.len();
    let mut current = None;
    for k in 0..edges.len() {
        if let Some(hit) = cache.get(&edges[k..]) {
            cache.hits.fetch_add(1, Ordering::Relaxed);
            start = k;
            current = Some(hit);
            break;
        }
    }
    let mut current = match current {
        Some(x) => x,
        None => {
            let terminal = path.terminal();
            let x = g
                .features(terminal)
                .ok_or_else(|| Error::MissingFeatures(g.node_type(terminal).name.clone()))?;
            Arc::new(x.clone())
        }
    };
    for k in (0..start).rev() {
        cache.misses.fetch_add(1, Ordering::Relaxed);
        let a = cache.normalized(g, edges[k])?;
        current = Arc::new(a.apply(&current));
        cache.insert(edges[k..].to_vec(), current.clone());
    }
    Ok(current)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fusion {
    /// Side-by-side columns, in metapath order.
    #[default]
    Concat,
    /// Elementwise average; every path must yield the same width.
    Mean,
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fusion::Concat => "concat",
            Fusion::Mean => "mean",
        })
    }
}

impl FromStr for Fusion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "concat" => Ok(Fusion::Concat),
            "mean" => Ok(Fusion::Mean),
            other => Err(format!("unknown fusion `{other}` (expected concat or mean)")),
        }
    }
}

pub fn propagate_and_fuse(
    g: &HeteroGraph,
    paths: &[Metapath],
    fusion: Fusion,
    cache: &PropagationCache,
) -> Result<FeatureMatrix> {
    if paths.is_empty() {
        return Err(Error::Fusion("no metapaths given".into()));
    }
    let parts = paths
        .iter()
        .map(|p| propagate_metapath(g, p, cache))
        .collect::<Result<Vec<_>>>()?;
    if parts.len() == 1 {
        return Ok((*parts[0]).clone());
    }
    let rows = parts[0].rows();
    match fusion {
        Fusion::Concat => {
            let dim: usize = parts.iter().map(|p| p.cols()).sum();
            let mut data = Vec::with_capacity(rows * dim);
            for i in 0..rows {
                for p in &parts {
                    data.extend_from_slice(p.row(i));
                }
            }
            Ok(FeatureMatrix::new(rows, dim, data))
        }
        Fusion::Mean => {
            let dim = parts[0].cols();
            if let Some((p, x)) = paths.iter().zip(&parts).find(|(_, x)| x.cols() != dim) {
                return Err(Error::Fusion(format!(
                    "mean fusion needs equal widths: `{}` has {dim} columns, `{p}` has {}",
                    paths[0],
                    x.cols()
                )));
            }
            let n = parts.len() as f64;
            let mut data = vec![0f32; rows * dim];
            par::fill_rows(&mut data, dim, |i, row| {
                for (k, out) in row.iter_mut().enumerate() {
                    let s: f64 = parts.iter().map(|p| p.row(i)[k] as f64).sum();
                    *out = (s / n) as f32;
                }
            });
            Ok(FeatureMatrix::new(rows, dim, data))
        }
    }
}

/// How target-node features are derived for condensation and evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecipe {
    pub metapaths: Vec<String>,
    pub fusion: Fusion,
    /// Skip propagation and use the target type's own features.
    pub raw: bool,
}

impl FeatureRecipe {
    /// Propagated features over `metapaths`, or raw features if there are none.
    pub fn propagated(metapaths: Vec<String>, fusion: Fusion) -> Self {
        let raw = metapaths.is_empty();
        Self {
            metapaths,
            fusion,
            raw,
        }
    }

    pub fn build(&self, g: &HeteroGraph, cache: &PropagationCache) -> Result<FeatureMatrix> {
        if self.raw {
            return g
                .target_features()
                .cloned()
                .ok_or_else(|| Error::MissingFeatures(g.node_type(g.target).name.clone()));
        }
        let paths = self
            .metapaths
            .iter()
            .map(|s| Metapath::parse(g, s))
            .collect::<Result<Vec<_>>>()?;
        propagate_and_fuse(g, &paths, self.fusion, cache)
    }
}

impl fmt::Display for FeatureRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.raw {
            f.write_str("raw")
        } else {
            write!(f, "{}:{}", self.fusion, self.metapaths.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_ones_become_quarters() {
        let (a, _) = SparseAdjacency::from_edges(2, 5, &[(0, 0), (0, 1), (0, 3), (0, 4)]);
        let n = row_normalize(&a).unwrap();
        assert_eq!(n.as_sparse().values(), &[0.25; 4]);
        assert_eq!(n.as_sparse().row(1).0.len(), 0);
    }

    #[test]
    fn weights_are_proportional() {
        let a = SparseAdjacency::from_triplets(1, 2, vec![(0, 0, 1.0), (0, 1, 3.0)]).0;
        let n = row_normalize(&a).unwrap();
        assert_eq!(n.as_sparse().values(), &[0.25, 0.75]);
    }

    #[test]
    fn non_finite_or_negative_weights_rejected() {
        for bad in [f64::NAN, f64::INFINITY, -1.0, 0.0] {
            let a = SparseAdjacency::from_raw_parts(1, 1, vec![0, 1], vec![0], vec![bad]);
            assert!(matches!(
                row_normalize(&a),
                Err(Error::BadAdjacencyValue { row: 0, col: 0, .. })
            ));
        }
    }

    #[test]
    fn fusion_and_recipe_strings() {
        assert_eq!("mean".parse::<Fusion>().unwrap(), Fusion::Mean);
        assert!("sum".parse::<Fusion>().is_err());
        let r = FeatureRecipe {
            metapaths: vec!["p-a-p".into(), "p-s-p".into()],
            fusion: Fusion::Concat,
            raw: false,
        };
        assert_eq!(r.to_string(), "concat:p-a-p,p-s-p");
    }
}
