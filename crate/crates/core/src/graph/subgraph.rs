use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::{HeteroGraph, NodeType, NodeTypeId, SparseAdjacency};
use crate::{Error, Result};

/// Which non-target nodes accompany the selected targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NeighborPolicy {
    /// Every non-target node adjacent to a selected target, in either
    /// direction, under any edge type.
    #[default]
    OneHop,
    /// Breadth-first expansion through non-target nodes for `hops` steps.
    /// `cap` bounds how many nodes of each non-target type are admitted;
    /// within a step, lower ids are admitted first.
    KHop { hops: usize, cap: Option<usize> },
}

impl NeighborPolicy {
    fn hops(self) -> usize {
        match self {
            NeighborPolicy::OneHop => 1,
            NeighborPolicy::KHop { hops, .. } => hops,
        }
    }

    fn cap(self) -> Option<usize> {
        match self {
            NeighborPolicy::OneHop => None,
            NeighborPolicy::KHop { cap, .. } => cap,
        }
    }
}

impl fmt::Display for NeighborPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeighborPolicy::OneHop => f.write_str("1hop"),
            NeighborPolicy::KHop { hops, cap: None } => write!(f, "khop:{hops}"),
            NeighborPolicy::KHop {
                hops,
                cap: Some(cap),
            } => write!(f, "khop:{hops}:{cap}"),
        }
    }
}

impl FromStr for NeighborPolicy {
    type Err = String;

    /// `1hop`, `khop:K` or `khop:K:CAP`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "1hop" {
            return Ok(NeighborPolicy::OneHop);
        }
        let bad = || format!("bad neighbor policy `{s}` (expected 1hop, khop:K or khop:K:CAP)");
        let rest = s.strip_prefix("khop:").ok_or_else(bad)?;
        let mut parts = rest.split(':');
        let hops = parts.next().and_then(|h| h.parse().ok()).ok_or_else(bad)?;
        let cap = match parts.next() {
            Some(c) => Some(c.parse().map_err(|_| bad())?),
            None => None,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(NeighborPolicy::KHop { hops, cap })
    }
}

/// Per node type, the original id of each new local id. Lists are strictly
/// increasing, so new ids preserve the original relative order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdMap {
    pub per_type: Vec<Vec<u32>>,
}

impl IdMap {
    pub fn original(&self, ty: NodeTypeId, new_id: u32) -> u32 {
        self.per_type[ty.index()][new_id as usize]
    }

    pub fn new_id(&self, ty: NodeTypeId, original: u32) -> Option<u32> {
        self.per_type[ty.index()]
            .binary_search(&original)
            .ok()
            .map(|i| i as u32)
    }
}

/// Subgraph on the selected target nodes plus the non-target nodes admitted
/// by `policy`, keeping every edge whose endpoints both survive.
///
/// Unselected target nodes are never admitted, whatever the policy.
pub fn induced_subgraph(
    g: &HeteroGraph,
    selected: &[u32],
    policy: NeighborPolicy,
) -> Result<(HeteroGraph, IdMap)> {
    if selected.is_empty() {
        return Err(Error::Selection("empty selection".into()));
    }
    let target = g.target.index();
    let n_target = g.node_types[target].count;
    let mut keep: Vec<Vec<bool>> = g.node_types.iter().map(|t| vec![false; t.count]).collect();
    for &v in selected {
        if v as usize >= n_target {
            return Err(Error::Selection(format!(
                "node {v} out of range ({n_target} target nodes)"
            )));
        }
        if std::mem::replace(&mut keep[target][v as usize], true) {
            return Err(Error::Selection(format!("node {v} selected twice")));
        }
    }

    let reversed: Vec<SparseAdjacency> = g.adjacency.iter().map(SparseAdjacency::transpose).collect();
    let mut admitted = vec![0usize; g.node_types.len()];
    let mut frontier: Vec<Vec<u32>> = vec![Vec::new(); g.node_types.len()];
    frontier[target] = {
        let mut s = selected.to_vec();
        s.sort_unstable();
        s
    };
    for _ in 0..policy.hops() {
        let mut found: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); g.node_types.len()];
        for (e, (fwd, rev)) in g.edge_types.iter().zip(g.adjacency.iter().zip(&reversed)) {
            for (from, to, adj) in [(e.src, e.dst, fwd), (e.dst, e.src, rev)] {
                if to.index() == target {
                    continue;
                }
                for &u in &frontier[from.index()] {
                    for &v in adj.row(u as usize).0 {
                        if !keep[to.index()][v as usize] {
                            found[to.index()].insert(v);
                        }
                    }
                }
            }
        }
        let mut next = vec![Vec::new(); g.node_types.len()];
        for (t, ids) in found.into_iter().enumerate() {
            let room = policy.cap().map_or(usize::MAX, |c| c.saturating_sub(admitted[t]));
            for v in ids.into_iter().take(room) {
                keep[t][v as usize] = true;
                next[t].push(v);
            }
            admitted[t] += next[t].len();
        }
        if next.iter().all(Vec::is_empty) {
            break;
        }
        frontier = next;
    }

    let per_type: Vec<Vec<u32>> = keep
        .iter()
        .map(|k| {
            k.iter()
                .enumerate()
                .filter(|(_, &x)| x)
                .map(|(i, _)| i as u32)
                .collect()
        })
        .collect();
    let new_of: Vec<Vec<Option<u32>>> = keep
        .iter()
        .zip(&per_type)
        .map(|(k, ids)| {
            let mut m = vec![None; k.len()];
            for (new, &old) in ids.iter().enumerate() {
                m[old as usize] = Some(new as u32);
            }
            m
        })
        .collect();

    let adjacency = g
        .edge_types
        .iter()
        .zip(&g.adjacency)
        .map(|(e, adj)| {
            let (s, d) = (e.src.index(), e.dst.index());
            let mut triplets = Vec::new();
            for (new_r, &old_r) in per_type[s].iter().enumerate() {
                let (cols, vals) = adj.row(old_r as usize);
                for (&c, &v) in cols.iter().zip(vals) {
                    if let Some(new_c) = new_of[d][c as usize] {
                        triplets.push((new_r as u32, new_c, v));
                    }
                }
            }
            SparseAdjacency::from_triplets(per_type[s].len(), per_type[d].len(), triplets).0
        })
        .collect();

    let sub = HeteroGraph {
        node_types: g
            .node_types
            .iter()
            .zip(&per_type)
            .map(|(t, ids)| NodeType {
                name: t.name.clone(),
                count: ids.len(),
            })
            .collect(),
        edge_types: g.edge_types.clone(),
        adjacency,
        features: g
            .features
            .iter()
            .zip(&per_type)
            .map(|(fm, ids)| fm.as_ref().map(|fm| fm.select_rows(ids)))
            .collect(),
        labels: g.labels.select(&per_type[target]),
        target: g.target,
    };
    Ok((sub, IdMap { per_type }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_strings_round_trip() {
        for p in [
            NeighborPolicy::OneHop,
            NeighborPolicy::KHop { hops: 2, cap: None },
            NeighborPolicy::KHop {
                hops: 3,
                cap: Some(50),
            },
        ] {
            assert_eq!(p.to_string().parse::<NeighborPolicy>().unwrap(), p);
        }
        assert!("2hop".parse::<NeighborPolicy>().is_err());
        assert!("khop:x".parse::<NeighborPolicy>().is_err());
    }
}
