#![allow(dead_code)]

use hgc_core::graph::{
    EdgeType, FeatureMatrix, HeteroGraph, Labels, NodeType, NodeTypeId, SparseAdjacency, Split,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Rel<'a> {
    pub name: &'a str,
    pub src: u32,
    pub dst: u32,
    pub edges: Vec<(u32, u32)>,
}

pub fn rel<'a>(name: &'a str, src: u32, dst: u32, edges: &[(u32, u32)]) -> Rel<'a> {
    Rel {
        name,
        src,
        dst,
        edges: edges.to_vec(),
    }
}

/// Build a graph from type counts, optional features and relations. Type 0
/// is the target.
pub fn build(types: Vec<(&str, usize, Option<FeatureMatrix>)>, rels: Vec<Rel>, labels: Labels) -> HeteroGraph {
    let counts: Vec<usize> = types.iter().map(|t| t.1).collect();
    HeteroGraph {
        node_types: types
            .iter()
            .map(|(n, c, _)| NodeType {
                name: n.to_string(),
                count: *c,
            })
            .collect(),
        edge_types: rels
            .iter()
            .map(|r| EdgeType {
                name: r.name.into(),
                src: NodeTypeId(r.src),
                dst: NodeTypeId(r.dst),
            })
            .collect(),
        adjacency: rels
            .iter()
            .map(|r| SparseAdjacency::from_edges(counts[r.src as usize], counts[r.dst as usize], &r.edges).0)
            .collect(),
        features: types.into_iter().map(|t| t.2).collect(),
        labels,
        target: NodeTypeId(0),
    }
}

pub fn all_train(classes: &[u32], k: usize) -> Labels {
    Labels {
        num_classes: k,
        class_of: classes.iter().map(|&c| Some(c)).collect(),
        split_of: vec![Some(Split::Train); classes.len()],
    }
}

pub fn random_features(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> FeatureMatrix {
    FeatureMatrix::new(rows, cols, (0..rows * cols).map(|_| rng.random::<f32>()).collect())
}

fn random_edges(rng: &mut ChaCha8Rng, rows: usize, cols: usize, p: f64) -> Vec<(u32, u32)> {
    let mut e = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if rng.random::<f64>() < p {
                e.push((r as u32, c as u32));
            }
        }
    }
    e
}

/// Three node types `a` (target), `b`, `c` with relations a-b, b-a, b-c,
/// c-b and a self relation `cites` on a. Features lie in [0, 1).
pub fn random_graph(seed: u64, max_nodes: usize) -> HeteroGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: Vec<usize> = (0..3).map(|_| rng.random_range(1..=max_nodes)).collect();
    let p = rng.random_range(0.02..0.3);
    let dims: Vec<usize> = (0..3).map(|_| rng.random_range(1..=5)).collect();
    let ab = random_edges(&mut rng, n[0], n[1], p);
    let bc = random_edges(&mut rng, n[1], n[2], p);
    let aa = random_edges(&mut rng, n[0], n[0], p);
    let flip = |e: &[(u32, u32)]| e.iter().map(|&(a, b)| (b, a)).collect::<Vec<_>>();
    let k = 3;
    let class_of = (0..n[0])
        .map(|_| (rng.random::<f64>() < 0.8).then(|| rng.random_range(0..k as u32)))
        .collect::<Vec<_>>();
    let split_of = class_of
        .iter()
        .map(|c| {
            c.map(|_| match rng.random_range(0..3) {
                0 => Split::Train,
                1 => Split::Val,
                _ => Split::Test,
            })
        })
        .collect();
    let feats: Vec<FeatureMatrix> = (0..3).map(|t| random_features(&mut rng, n[t], dims[t])).collect();
    let mut feats = feats.into_iter();
    build(
        vec![
            ("a", n[0], feats.next()),
            ("b", n[1], feats.next()),
            ("c", n[2], feats.next()),
        ],
        vec![
            rel("a-b", 0, 1, &ab),
            rel("b-a", 1, 0, &flip(&ab)),
            rel("b-c", 1, 2, &bc),
            rel("c-b", 2, 1, &flip(&bc)),
            rel("cites", 0, 0, &aa),
        ],
        Labels {
            num_classes: k,
            class_of,
            split_of,
        },
    )
}

/// Dense row-major copy of a sparse matrix with rows scaled to sum to one.
pub fn dense_normalized(a: &SparseAdjacency) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0f64; a.cols()]; a.rows()];
    for (r, c, v) in a.iter() {
        d[r][c as usize] += v;
    }
    for row in &mut d {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            for x in row.iter_mut() {
                *x /= s;
            }
        }
    }
    d
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn to_rows(fm: &FeatureMatrix) -> Vec<Vec<f64>> {
    (0..fm.rows()).map(|i| fm.row_f64(i)).collect()
}
