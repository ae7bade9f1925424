use crate::graph::{FeatureMatrix, Labels, Pool};
use crate::{Error, Result};

/// One mean vector per class, in f64.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeSet {
    pub means: Vec<Vec<f64>>,
    /// Number of nodes averaged into each mean.
    pub support: Vec<usize>,
}

impl PrototypeSet {
    pub fn num_classes(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }
}

/// Exact per-class means of `h` over the pooled members of each class,
/// summed in ascending node order.
pub fn class_prototypes(h: &FeatureMatrix, labels: &Labels, pool: Pool) -> Result<PrototypeSet> {
    let members = labels.members(pool);
    let mut means = Vec::with_capacity(members.len());
    let mut support = Vec::with_capacity(members.len());
    for (class, nodes) in members.iter().enumerate() {
        if nodes.is_empty() {
            return Err(Error::EmptyClass {
                class,
                pool: pool.to_string(),
            });
        }
        let mut sum = vec![0f64; h.cols()];
        for &v in nodes {
            for (s, &x) in sum.iter_mut().zip(h.row(v as usize)) {
                *s += x as f64;
            }
        }
        let n = nodes.len() as f64;
        means.push(sum.into_iter().map(|s| s / n).collect());
        support.push(nodes.len());
    }
    Ok(PrototypeSet { means, support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Split;

    fn labels(classes: &[Option<u32>], k: usize) -> Labels {
        Labels {
            num_classes: k,
            class_of: classes.to_vec(),
            split_of: vec![Some(Split::Train); classes.len()],
        }
    }

    #[test]
    fn singleton_class_mean_is_the_node() {
        let h = FeatureMatrix::from_rows(&[[3.0, -1.0]]);
        let p = class_prototypes(&h, &labels(&[Some(0)], 1), Pool::Labeled).unwrap();
        assert_eq!(p.means, vec![vec![3.0, -1.0]]);
        assert_eq!(p.support, vec![1]);
    }

    #[test]
    fn three_point_mean() {
        let h = FeatureMatrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
        let p = class_prototypes(&h, &labels(&[Some(0); 3], 1), Pool::Labeled).unwrap();
        // oracle: (0+2+0)/3, (0+0+2)/3
        assert_eq!(p.means[0], vec![2.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn constant_features_give_equal_prototypes() {
        let h = FeatureMatrix::from_rows(&[[0.5, 7.0]; 4]);
        let l = labels(&[Some(0), Some(1), Some(1), Some(0)], 2);
        let p = class_prototypes(&h, &l, Pool::Labeled).unwrap();
        assert_eq!(p.means, vec![vec![0.5, 7.0], vec![0.5, 7.0]]);
    }

    #[test]
    fn empty_class_is_named() {
        let h = FeatureMatrix::from_rows(&[[1.0], [2.0]]);
        let l = labels(&[Some(0), None], 3);
        match class_prototypes(&h, &l, Pool::Labeled) {
            Err(Error::EmptyClass { class: 1, .. }) => {}
            other => panic!("expected EmptyClass for class 1, got {other:?}"),
        }
    }

    #[test]
    fn support_sums_to_labeled_count() {
        let h = FeatureMatrix::from_rows(&[[1.0], [2.0], [3.0], [4.0], [5.0]]);
        let l = labels(&[Some(0), Some(1), None, Some(1), Some(0)], 2);
        let p = class_prototypes(&h, &l, Pool::Labeled).unwrap();
        assert_eq!(p.support.iter().sum::<usize>(), l.labeled_count());
    }
}
