use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// Which labeled target nodes a per-class operation ranges over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pool {
    /// Labeled nodes in the training split.
    #[default]
    Train,
    /// Every labeled node regardless of split.
    Labeled,
}

impl Pool {
    pub fn contains(self, labels: &Labels, node: usize) -> bool {
        labels.class_of[node].is_some()
            && match self {
                Pool::Train => labels.split_of[node] == Some(Split::Train),
                Pool::Labeled => true,
            }
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pool::Train => "train",
            Pool::Labeled => "labeled",
        })
    }
}

impl FromStr for Pool {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Pool::Train),
            "labeled" => Ok(Pool::Labeled),
            other => Err(format!("unknown pool `{other}` (expected train or labeled)")),
        }
    }
}

/// Class labels and split assignment for the target node type.
///
/// A node carries at most one split, so the train/val/test masks are
/// disjoint by construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    pub num_classes: usize,
    pub class_of: Vec<Option<u32>>,
    pub split_of: Vec<Option<Split>>,
}

impl Labels {
    pub fn unlabeled(num_nodes: usize, num_classes: usize) -> Self {
        Self {
            num_classes,
            class_of: vec![None; num_nodes],
            split_of: vec![None; num_nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.class_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_of.is_empty()
    }

    pub fn labeled_count(&self) -> usize {
        self.class_of.iter().filter(|c| c.is_some()).count()
    }

    /// Per-class node ids within `pool`, each list ascending.
    pub fn members(&self, pool: Pool) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (v, c) in self.class_of.iter().enumerate() {
            if let Some(c) = c {
                if pool.contains(self, v) {
                    out[*c as usize].push(v as u32);
                }
            }
        }
        out
    }

    /// Ascending ids of labeled nodes in `split`.
    pub fn split_nodes(&self, split: Split) -> Vec<u32> {
        (0..self.len())
            .filter(|&v| self.split_of[v] == Some(split) && self.class_of[v].is_some())
            .map(|v| v as u32)
            .collect()
    }

    pub fn class(&self, node: u32) -> Option<u32> {
        self.class_of[node as usize]
    }

    /// Restrict to the listed nodes; entry `i` of the result describes
    /// `nodes[i]`.
    pub fn select(&self, nodes: &[u32]) -> Labels {
        Labels {
            num_classes: self.num_classes,
            class_of: nodes.iter().map(|&v| self.class_of[v as usize]).collect(),
            split_of: nodes.iter().map(|&v| self.split_of[v as usize]).collect(),
        }
    }
}
