//! Seeded synthetic heterogeneous graphs with a paper / author / subject
//! schema, used for benchmarks, tests and demos.
//!
//! Papers carry class labels. Each paper links to a few authors and one
//! subject, mostly of its own class, and author and subject features
//! cluster by class, so aggregating over a paper's neighbors separates the
//! classes. Two kinds of difficulty are built in:
//!
//! * each class splits into communities of unequal size whose author
//!   features sit at different offsets from the class centre, so the class
//!   mean falls between communities and a model trained on one community
//!   misplaces the others;
//! * a fraction of "crossover" papers are written by authors of another
//!   class, which puts their aggregated features inside a foreign cluster.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::{
    EdgeType, FeatureMatrix, HeteroGraph, Labels, NodeType, NodeTypeId,
    SparseAdjacency, Split,
};

/// Metapaths that aggregate author and subject features onto papers.
pub const METAPATHS: [&str; 2] = ["paper-author", "paper-subject"];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub papers: usize,
    pub authors: usize,
    pub subjects: usize,
    /// Relative class frequencies; the length sets the number of classes.
    pub class_weights: Vec<f64>,
    pub authors_per_paper: usize,
    pub paper_dim: usize,
    pub author_dim: usize,
    pub subject_dim: usize,
    /// Distance of each class mean from the origin.
    pub separation: f64,
    /// Isotropic noise standard deviation.
    pub noise: f64,
    /// Paper feature noise; raw paper features are weaker than aggregated ones.
    pub paper_noise: f64,
    /// Relative community sizes within each class.
    pub community_weights: Vec<f64>,
    /// Distance of each community centre from its class mean.
    pub community_spread: f64,
    /// Probability that a paper's authors all belong to another class.
    pub crossover: f64,
    /// Probability that a paper's subject matches its class.
    pub subject_affinity: f64,
    pub train_frac: f64,
    pub val_frac: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Three-class bibliographic graph with `papers` target nodes.
    pub fn acm_like(papers: usize, seed: u64) -> Self {
        Self {
            papers,
            authors: (papers / 2).max(3),
            subjects: 30,
            class_weights: vec![0.4, 0.35, 0.25],
            authors_per_paper: 3,
            paper_dim: 16,
            author_dim: 16,
            subject_dim: 8,
            separation: 1.0,
            noise: 0.3,
            paper_noise: 1.0,
            community_weights: vec![0.65, 0.35],
            community_spread: 1.5,
            crossover: 0.25,
            subject_affinity: 0.7,
            train_frac: 0.24,
            val_frac: 0.06,
            seed,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.class_weights.len()
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Class mean `separation * e_c`, wrapping if there are more classes than
/// dimensions.
fn class_mean(c: usize, dim: usize, separation: f64) -> Vec<f64> {
    let mut m = vec![0.0; dim];
    if dim > 0 {
        m[c % dim] = separation;
    }
    m
}

/// One row per entry of `centre_of`, each drawn around its centre.
fn sample_features(
    rng: &mut ChaCha8Rng,
    centres: &[Vec<f64>],
    centre_of: &[usize],
    dim: usize,
    noise: f64,
) -> FeatureMatrix {
    let mut data = Vec::with_capacity(centre_of.len() * dim);
    for &c in centre_of {
        data.extend(centres[c].iter().map(|&m| (m + noise * normal(rng)) as f32));
    }
    FeatureMatrix::new(centre_of.len(), dim, data)
}

/// Communities of class `c` sit on both sides of a class-private axis, so a
/// model that has seen only one of them learns the wrong sign for that axis.
fn community_centre(c: usize, j: usize, k: usize, m: usize, dim: usize, spec: &SyntheticSpec) -> Vec<f64> {
    let mut x = class_mean(c, dim, spec.separation);
    if dim > 0 {
        let axis = (k + c * m.div_ceil(2) + j / 2) % dim;
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        x[axis] += sign * spec.community_spread;
    }
    x
}

fn draw_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (c, &w) in weights.iter().enumerate() {
        if u < w {
            return c;
        }
        u -= w;
    }
    weights.len() - 1
}

pub fn generate(spec: &SyntheticSpec) -> HeteroGraph {
    let k = spec.num_classes();
    assert!(k >= 1 && spec.authors >= k && spec.subjects >= k);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let m = spec.community_weights.len().max(1);
    let paper_class: Vec<usize> = (0..spec.papers)
        .map(|_| draw_weighted(&mut rng, &spec.class_weights))
        .collect();
    let author_class: Vec<usize> = (0..spec.authors).map(|a| a % k).collect();
    let author_group: Vec<usize> = author_class
        .iter()
        .map(|&c| c * m + draw_weighted(&mut rng, &spec.community_weights))
        .collect();
    let subject_class: Vec<usize> = (0..spec.subjects).map(|s| s % k).collect();
    let mut authors_of = vec![Vec::new(); k * m];
    for (a, &grp) in author_group.iter().enumerate() {
        authors_of[grp].push(a as u32);
    }
    let subjects_of: Vec<Vec<u32>> = (0..k)
        .map(|c| (c..spec.subjects).step_by(k).map(|s| s as u32).collect())
        .collect();

    let mut writes = Vec::new();
    let mut about = Vec::new();
    let mut paper_group = Vec::with_capacity(spec.papers);
    for (p, &c) in paper_class.iter().enumerate() {
        let community = draw_weighted(&mut rng, &spec.community_weights);
        paper_group.push(c * m + community);
        let mut author_class = c;
        if k > 1 && rng.random::<f64>() < spec.crossover {
            author_class = (c + 1 + rng.random_range(0..k - 1)) % k;
        }
        let mut pool = &authors_of[author_class * m + community];
        if pool.is_empty() {
            pool = authors_of[author_class * m..(author_class + 1) * m]
                .iter()
                .find(|p| !p.is_empty())
                .expect("every class has authors");
        }
        for &a in pool.choose_multiple(&mut rng, spec.authors_per_paper) {
            writes.push((p as u32, a));
        }
        let s = if rng.random::<f64>() < spec.subject_affinity {
            *subjects_of[c].choose(&mut rng).unwrap()
        } else {
            rng.random_range(0..spec.subjects) as u32
        };
        about.push((p as u32, s));
    }

    let community_centres = |dim| -> Vec<Vec<f64>> {
        (0..k * m).map(|grp| community_centre(grp / m, grp % m, k, m, dim, spec)).collect()
    };
    let paper_centres = community_centres(spec.paper_dim);
    let author_centres = community_centres(spec.author_dim);
    let means = |dim| -> Vec<Vec<f64>> { (0..k).map(|c| class_mean(c, dim, spec.separation)).collect() };
    let paper_x = sample_features(&mut rng, &paper_centres, &paper_group, spec.paper_dim, spec.paper_noise);
    let author_x = sample_features(&mut rng, &author_centres, &author_group, spec.author_dim, spec.noise);
    let subject_x = sample_features(&mut rng, &means(spec.subject_dim), &subject_class, spec.subject_dim, spec.noise);

    let mut order: Vec<usize> = (0..spec.papers).collect();
    order.shuffle(&mut rng);
    let n_train = (spec.train_frac * spec.papers as f64).round() as usize;
    let n_val = (spec.val_frac * spec.papers as f64).round() as usize;
    let mut split_of = vec![None; spec.papers];
    for (rank, &p) in order.iter().enumerate() {
        split_of[p] = Some(if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        });
    }

    let (paper, author, subject) = (NodeTypeId(0), NodeTypeId(1), NodeTypeId(2));
    let flip = |e: &[(u32, u32)]| e.iter().map(|&(a, b)| (b, a)).collect::<Vec<_>>();
    let adjacency = vec![
        SparseAdjacency::from_edges(spec.papers, spec.authors, &writes).0,
        SparseAdjacency::from_edges(spec.authors, spec.papers, &flip(&writes)).0,
        SparseAdjacency::from_edges(spec.papers, spec.subjects, &about).0,
        SparseAdjacency::from_edges(spec.subjects, spec.papers, &flip(&about)).0,
    ];
    let edge = |name: &str, src, dst| EdgeType {
        name: name.into(),
        src,
        dst,
    };
    HeteroGraph {
        node_types: vec![
            NodeType {
                name: "paper".into(),
                count: spec.papers,
            },
            NodeType {
                name: "author".into(),
                count: spec.authors,
            },
            NodeType {
                name: "subject".into(),
                count: spec.subjects,
            },
        ],
        edge_types: vec![
            edge("paper-author", paper, author),
            edge("author-paper", author, paper),
            edge("paper-subject", paper, subject),
            edge("subject-paper", subject, paper),
        ],
        adjacency,
        features: vec![Some(paper_x), Some(author_x), Some(subject_x)],
        labels: Labels {
            num_classes: k,
            class_of: paper_class.iter().map(|&c| Some(c as u32)).collect(),
            split_of,
        },
        target: paper,
    }
}

/// Node and edge counts of the DBLP benchmark: authors, papers, terms and
/// venues, with author-paper, paper-term and paper-venue relations in both
/// directions. Authors are the target type with four classes.
pub const DBLP_NODES: [(&str, usize); 4] = [
    ("author", 4057),
    ("paper", 14328),
    ("term", 7723),
    ("venue", 20),
];
pub const DBLP_RELATIONS: [(&str, usize, usize, usize); 3] =
    [("author-paper", 0, 1, 19645), ("paper-term", 1, 2, 85810), ("paper-venue", 1, 3, 14328)];

/// A graph with the DBLP schema and exact counts but synthetic content.
///
/// Edge `i` of a relation joins `i mod |src|` to `i mod |dst|` after a seeded
/// relabeling of both sides; the node counts are coprime, so no pair repeats.
pub fn dblp_layout(feature_dim: usize, seed: u64) -> HeteroGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Vec<u32>> = DBLP_NODES
        .iter()
        .map(|&(_, n)| {
            let mut p: Vec<u32> = (0..n as u32).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let mut edge_types = Vec::new();
    let mut adjacency = Vec::new();
    for &(name, src, dst, count) in &DBLP_RELATIONS {
        let (ns, nd) = (DBLP_NODES[src].1, DBLP_NODES[dst].1);
        let pairs: Vec<(u32, u32)> = (0..count)
            .map(|i| (perms[src][i % ns], perms[dst][i % nd]))
            .collect();
        let rev: Vec<(u32, u32)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
        let (s_name, d_name) = name.split_once('-').unwrap();
        edge_types.push(EdgeType {
            name: name.into(),
            src: NodeTypeId(src as u32),
            dst: NodeTypeId(dst as u32),
        });
        adjacency.push(SparseAdjacency::from_edges(ns, nd, &pairs).0);
        edge_types.push(EdgeType {
            name: format!("{d_name}-{s_name}"),
            src: NodeTypeId(dst as u32),
            dst: NodeTypeId(src as u32),
        });
        adjacency.push(SparseAdjacency::from_edges(nd, ns, &rev).0);
    }

    let authors = DBLP_NODES[0].1;
    let classes = 4;
    let class_of: Vec<usize> = (0..authors).map(|_| rng.random_range(0..classes)).collect();
    let centres: Vec<Vec<f64>> = (0..classes).map(|c| class_mean(c, feature_dim, 1.0)).collect();
    let x = sample_features(&mut rng, &centres, &class_of, feature_dim, 0.5);
    let split_of = (0..authors)
        .map(|_| {
            let u = rng.random::<f64>();
            Some(if u < 0.24 {
                Split::Train
            } else if u < 0.3 {
                Split::Val
            } else {
                Split::Test
            })
        })
        .collect();
    let mut features = vec![None; DBLP_NODES.len()];
    features[0] = Some(x);
    HeteroGraph {
        node_types: DBLP_NODES
            .iter()
            .map(|&(name, count)| NodeType {
                name: name.into(),
                count,
            })
            .collect(),
        edge_types,
        adjacency,
        features,
        labels: Labels {
            num_classes: classes,
            class_of: class_of.iter().map(|&c| Some(c as u32)).collect(),
            split_of,
        },
        target: NodeTypeId(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::validate;

    #[test]
    fn generated_graph_is_valid_and_seeded() {
        let spec = SyntheticSpec::acm_like(300, 7);
        let g = generate(&spec);
        assert!(validate(&g).is_valid());
        assert_eq!(g.target_count(), 300);
        assert_eq!(g.adjacency[0].nnz(), 300 * spec.authors_per_paper);
        assert_eq!(g, generate(&spec));
        assert_ne!(g, generate(&SyntheticSpec::acm_like(300, 8)));
    }

    #[test]
    fn dblp_layout_counts() {
        let g = dblp_layout(4, 0);
        assert!(validate(&g).is_valid());
        let s = g.stats();
        assert_eq!((s.nodes, s.node_types, s.edges, s.edge_types), (26_128, 4, 239_566, 6));
        assert_eq!((s.target.as_str(), s.classes), ("author", 4));
    }
}
