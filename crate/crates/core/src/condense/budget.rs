use crate::graph::{Labels, Pool};
use crate::{Error, Result};

/// Per-class selection counts.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetPlan {
    pub ratio: f64,
    pub pool: Pool,
    /// Pooled nodes per class.
    pub pool_sizes: Vec<usize>,
    pub budgets: Vec<usize>,
}

impl BudgetPlan {
    pub fn total(&self) -> usize {
        self.budgets.iter().sum()
    }
}

/// Split `round(ratio * N)` over classes in proportion to `sizes`
/// (largest remainder, ties to the lower class id), then lift every
/// non-empty class to at least one node, taking the surplus back from the
/// largest budgets.
///
/// The total is `max(#non-empty classes, round(ratio * N))` and no class
/// receives more than its size.
pub fn apportion(sizes: &[usize], ratio: f64) -> Result<Vec<usize>> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Budget(format!("ratio {ratio} outside (0, 1]")));
    }
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return Err(Error::Budget("empty pool".into()));
    }
    let total = ((ratio * n as f64).round() as usize).min(n);

    let (n128, t128) = (n as u128, total as u128);
    let mut budgets: Vec<usize> = sizes
        .iter()
        .map(|&s| (t128 * s as u128 / n128) as usize)
        .collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // remainder numerators, all over the common denominator n
    order.sort_by_key(|&c| (std::cmp::Reverse(t128 * sizes[c] as u128 % n128), c));
    let short = total - budgets.iter().sum::<usize>();
    for &c in order.iter().take(short) {
        budgets[c] += 1;
    }

    for (b, &s) in budgets.iter_mut().zip(sizes) {
        if s > 0 && *b == 0 {
            *b = 1;
        }
    }
    let nonempty = sizes.iter().filter(|&&s| s > 0).count();
    let mut surplus = budgets.iter().sum::<usize>() - total.max(nonempty);
    while surplus > 0 {
        let (c, _) = budgets
            .iter()
            .enumerate()
            .filter(|(_, &b)| b > 1)
            .max_by_key(|&(c, &b)| (b, std::cmp::Reverse(c)))
            .expect("surplus only arises when some class holds more than one");
        budgets[c] -= 1;
        surplus -= 1;
    }
    Ok(budgets)
}

/// Budgets for a single global ratio over the pooled labeled nodes.
pub fn allocate_budgets(labels: &Labels, ratio: f64, pool: Pool) -> Result<BudgetPlan> {
    let pool_sizes: Vec<usize> = labels.members(pool).iter().map(Vec::len).collect();
    let budgets = apportion(&pool_sizes, ratio)?;
    Ok(BudgetPlan {
        ratio,
        pool,
        pool_sizes,
        budgets,
    })
}

/// Budgets from one ratio per class: `round(r_c * n_c)`, clamped to
/// `[1, n_c]` for non-empty classes.
pub fn allocate_class_budgets(labels: &Labels, ratios: &[f64], pool: Pool) -> Result<BudgetPlan> {
    let pool_sizes: Vec<usize> = labels.members(pool).iter().map(Vec::len).collect();
    if ratios.len() != pool_sizes.len() {
        return Err(Error::Budget(format!(
            "{} class ratios for {} classes",
            ratios.len(),
            pool_sizes.len()
        )));
    }
    if let Some(r) = ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::Budget(format!("class ratio {r} outside (0, 1]")));
    }
    let n: usize = pool_sizes.iter().sum();
    if n == 0 {
        return Err(Error::Budget("empty pool".into()));
    }
    let budgets: Vec<usize> = pool_sizes
        .iter()
        .zip(ratios)
        .map(|(&s, &r)| if s == 0 { 0 } else { ((r * s as f64).round() as usize).clamp(1, s) })
        .collect();
    Ok(BudgetPlan {
        ratio: budgets.iter().sum::<usize>() as f64 / n as f64,
        pool,
        pool_sizes,
        budgets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_ratio_takes_everything() {
        assert_eq!(apportion(&[7, 3, 1], 1.0).unwrap(), vec![7, 3, 1]);
    }

    #[test]
    fn exact_proportions() {
        assert_eq!(apportion(&[600, 300, 100], 0.1).unwrap(), vec![60, 30, 10]);
    }

    #[test]
    fn minority_floor_takes_from_the_largest() {
        // quotas 11.964, 0.024, 0.012 -> (12, 0, 0) -> floors (12, 1, 1) -> (10, 1, 1)
        assert_eq!(apportion(&[997, 2, 1], 0.012).unwrap(), vec![10, 1, 1]);
    }

    #[test]
    fn total_is_at_least_class_count() {
        assert_eq!(apportion(&[10, 10, 10, 10], 0.01).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn empty_classes_get_nothing() {
        assert_eq!(apportion(&[50, 0, 50], 0.1).unwrap(), vec![5, 0, 5]);
    }

    #[test]
    fn bad_ratio_or_pool() {
        assert!(apportion(&[5], 0.0).is_err());
        assert!(apportion(&[5], 1.5).is_err());
        assert!(apportion(&[5], f64::NAN).is_err());
        assert!(apportion(&[0, 0], 0.5).is_err());
    }

    #[test]
    fn class_ratios_clamp() {
        let labels = Labels {
            num_classes: 2,
            class_of: (0..12).map(|v| Some(u32::from(v >= 10))).collect(),
            split_of: vec![Some(crate::graph::Split::Train); 12],
        };
        let plan = allocate_class_budgets(&labels, &[0.5, 0.01], Pool::Train).unwrap();
        assert_eq!(plan.budgets, vec![5, 1]);
        assert!(allocate_class_budgets(&labels, &[0.5], Pool::Train).is_err());
    }
}
