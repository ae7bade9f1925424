//! Typed heterogeneous graph model, dataset I/O, validation and subgraph
//! extraction.

mod features;
mod io;
mod labels;
mod sparse;
mod subgraph;
mod validate;

pub use features::FeatureMatrix;
pub use io::{
    encode_features, load_dataset, load_dataset_with_report, read_manifest, save_dataset,
    ClassProvenance, EdgeTypeEntry, Manifest, NodeTypeEntry, Provenance, MANIFEST_FILE,
};
pub use labels::{Labels, Pool, Split};
pub use sparse::SparseAdjacency;
pub use subgraph::{induced_subgraph, IdMap, NeighborPolicy};
pub use validate::{validate, Finding, FindingKind, Severity, ValidationReport};

use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeTypeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeTypeId(pub u32);

impl NodeTypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeTypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeType {
    pub name: String,
    pub count: usize,
}

/// A directed relation between two node types. Logically undirected
/// relations are declared twice, once per direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeType {
    pub name: String,
    pub src: NodeTypeId,
    pub dst: NodeTypeId,
}

/// Heterogeneous graph with labels on a single target node type.
///
/// Graphs are treated as immutable once built; all pipeline stages take
/// `&HeteroGraph` and may share it across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct HeteroGraph {
    pub node_types: Vec<NodeType>,
    pub edge_types: Vec<EdgeType>,
    /// One matrix per edge type, `count(src) x count(dst)`.
    pub adjacency: Vec<SparseAdjacency>,
    /// One optional matrix per node type.
    pub features: Vec<Option<FeatureMatrix>>,
    pub labels: Labels,
    pub target: NodeTypeId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub node_types: usize,
    pub edges: usize,
    pub edge_types: usize,
    pub target: String,
    pub classes: usize,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10}  {:>10}  {:>10}  {:>10}  {:<10}  {:>8}",
            "#nodes", "#ntypes", "#edges", "#etypes", "target", "#classes"
        )?;
        write!(
            f,
            "{:>10}  {:>10}  {:>10}  {:>10}  {:<10}  {:>8}",
            self.nodes, self.node_types, self.edges, self.edge_types, self.target, self.classes
        )
    }
}

impl HeteroGraph {
    pub fn node_type_id(&self, name: &str) -> Option<NodeTypeId> {
        self.node_types
            .iter()
            .position(|t| t.name == name)
            .map(|i| NodeTypeId(i as u32))
    }

    pub fn edge_type_id(&self, name: &str) -> Option<EdgeTypeId> {
        self.edge_types
            .iter()
            .position(|t| t.name == name)
            .map(|i| EdgeTypeId(i as u32))
    }

    pub fn node_type(&self, id: NodeTypeId) -> &NodeType {
        &self.node_types[id.index()]
    }

    pub fn edge_type(&self, id: EdgeTypeId) -> &EdgeType {
        &self.edge_types[id.index()]
    }

    pub fn adjacency(&self, id: EdgeTypeId) -> &SparseAdjacency {
        &self.adjacency[id.index()]
    }

    pub fn features(&self, id: NodeTypeId) -> Option<&FeatureMatrix> {
        self.features.get(id.index()).and_then(Option::as_ref)
    }

    pub fn target_count(&self) -> usize {
        self.node_types[self.target.index()].count
    }

    pub fn target_features(&self) -> Option<&FeatureMatrix> {
        self.features(self.target)
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            nodes: self.node_types.iter().map(|t| t.count).sum(),
            node_types: self.node_types.len(),
            edges: self.adjacency.iter().map(SparseAdjacency::nnz).sum(),
            edge_types: self.edge_types.len(),
            target: self
                .node_types
                .get(self.target.index())
                .map(|t| t.name.clone())
                .unwrap_or_default(),
            classes: self.labels.num_classes,
        }
    }

    /// SHA-256 over the canonical encoding of every part of the graph, the
    /// same bytes [`save_dataset`] writes. Used to tie reports and
    /// condensed outputs to the dataset they came from.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.node_types {
            hasher.update(format!("node\t{}\t{}\n", t.name, t.count));
        }
        for (e, adj) in self.edge_types.iter().zip(&self.adjacency) {
            hasher.update(format!("edge\t{}\t{}\t{}\n", e.name, e.src.0, e.dst.0));
            hasher.update(Sha256::digest(io::encode_edges(adj)));
        }
        for fm in &self.features {
            match fm {
                Some(fm) => hasher.update(Sha256::digest(encode_features(fm))),
                None => hasher.update(b"nofeatures\n"),
            }
        }
        hasher.update(format!(
            "target\t{}\tclasses\t{}\n",
            self.target.0, self.labels.num_classes
        ));
        hasher.update(Sha256::digest(io::encode_labels(&self.labels)));
        hasher.update(Sha256::digest(io::encode_splits(&self.labels)));
        hex::encode(hasher.finalize())
    }
}
