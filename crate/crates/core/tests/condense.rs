mod common;

use std::collections::{BTreeSet, HashMap};

use common::{all_train, build, random_features, random_graph, rel};
use hgc_core::condense::{
    allocate_budgets, apportion, class_prototypes, condense, herd_select, kcenter_select,
    random_select, topk_prototype_select, BudgetPlan, CondensationConfig, Method, PrototypeSet,
};
use hgc_core::graph::{FeatureMatrix, Labels, Pool, Split};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(h: &FeatureMatrix, labels: &Labels, ratio: f64) -> (PrototypeSet, BudgetPlan) {
    (
        class_prototypes(h, labels, Pool::Labeled).unwrap(),
        allocate_budgets(labels, ratio, Pool::Train).unwrap(),
    )
}

fn one_class_plan(n: usize, b: usize) -> BudgetPlan {
    BudgetPlan {
        ratio: b as f64 / n as f64,
        pool: Pool::Train,
        pool_sizes: vec![n],
        budgets: vec![b],
    }
}

fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: u32) -> Labels {
    let mut classes: Vec<u32> = (0..n as u32).map(|v| v % k).collect();
    classes.shuffle(rng);
    all_train(&classes, k as usize)
}

#[test]
fn prototype_examples() {
    let h = FeatureMatrix::from_rows(&[[1.0f32, -2.0], [0.0, 0.0], [5.0, 0.0], [2.0, 0.0], [0.0, 2.0]]);
    let labels = all_train(&[0, 1, 0, 1, 1], 2);
    let p = class_prototypes(&h, &labels, Pool::Labeled).unwrap();
    assert_eq!(p.means[0], vec![3.0, -1.0]);
    assert!((p.means[1][0] - 2.0 / 3.0).abs() < 1e-12 && (p.means[1][1] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(p.support, vec![2, 3]);

    let flat = FeatureMatrix::from_rows(&[[0.3f32, 7.1]; 9]);
    let p = class_prototypes(&flat, &all_train(&[0; 9], 1), Pool::Labeled).unwrap();
    assert_eq!(p.means[0], vec![0.3f32 as f64, 7.1f32 as f64]);
}

#[test]
fn prototypes_ignore_unlabeled_nodes_and_reject_empty_classes() {
    let h = FeatureMatrix::from_rows(&[[1.0f32], [100.0], [3.0]]);
    let mut labels = all_train(&[0, 0, 0], 2);
    labels.class_of[1] = None;
    assert!(class_prototypes(&h, &labels, Pool::Labeled).is_err());
    labels.class_of[2] = Some(1);
    let p = class_prototypes(&h, &labels, Pool::Labeled).unwrap();
    assert_eq!(p.means, vec![vec![1.0], vec![3.0]]);
}

#[test]
fn budget_examples() {
    assert_eq!(apportion(&[400, 350, 250], 0.012).unwrap(), vec![5, 4, 3]);
    assert_eq!(apportion(&[288, 252, 180], 0.012).unwrap(), vec![4, 3, 2]);
    assert_eq!(apportion(&[288, 252, 180], 0.048).unwrap(), vec![14, 12, 9]);
    assert_eq!(apportion(&[3, 3, 3], 0.5).unwrap().iter().sum::<usize>(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]
    #[test]
    fn budgets_are_conserved(
        sizes in proptest::collection::vec(0usize..400, 1..8),
        ratio in prop_oneof![
            Just(0.012), Just(0.024), Just(0.048), Just(0.096), Just(1.0),
            0.0001f64..=1.0,
        ],
    ) {
        let n: usize = sizes.iter().sum();
        prop_assume!(n > 0);
        let b = apportion(&sizes, ratio).unwrap();
        let nonempty = sizes.iter().filter(|&&s| s > 0).count();
        let total = ((ratio * n as f64).round() as usize).min(n);
        prop_assert_eq!(b.iter().sum::<usize>(), total.max(nonempty));
        for (&bc, &s) in b.iter().zip(&sizes) {
            prop_assert!(bc <= s);
            prop_assert_eq!(bc == 0, s == 0);
        }
    }
}

#[test]
fn herding_hand_example() {
    // mean 4: first the point nearest 4 (x = 2), then 10 since (2 + 10) / 2 = 6
    // beats (2 + 0) / 2 = 1, then 0 which closes the gap exactly
    let h = FeatureMatrix::from_rows(&[[0.0f32], [2.0], [10.0]]);
    let labels = all_train(&[0, 0, 0], 1);
    let protos = class_prototypes(&h, &labels, Pool::Labeled).unwrap();
    let s = herd_select(&h, &labels, &protos, &one_class_plan(3, 3));
    assert_eq!(s.classes[0].selected, vec![1, 2, 0]);
    assert_eq!(s.classes[0].mean_distance, Some(0.0));
    let s = herd_select(&h, &labels, &protos, &one_class_plan(3, 2));
    assert_eq!(s.classes[0].selected, vec![1, 2]);
}

/// Recompute every greedy step from scratch.
#[allow(clippy::needless_range_loop)]
fn herd_oracle(h: &FeatureMatrix, members: &[u32], mu: &[f64], budget: usize) -> Vec<u32> {
    let mut chosen: Vec<u32> = Vec::new();
    for t in 0..budget {
        let mut best: Option<(f64, u32)> = None;
        for &v in members.iter().filter(|v| !chosen.contains(v)) {
            let mut d2 = 0.0;
            for k in 0..h.cols() {
                let mut s = 0f64;
                for &u in &chosen {
                    s += h.row(u as usize)[k] as f64;
                }
                let d = mu[k] - (s + h.row(v as usize)[k] as f64) / (t + 1) as f64;
                d2 += d * d;
            }
            if best.is_none_or(|b| (d2, v) < b) {
                best = Some((d2, v));
            }
        }
        chosen.push(best.unwrap().1);
    }
    chosen
}

#[test]
fn herding_matches_brute_force() {
    for seed in 0..150u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..4);
        let n = rng.random_range(2 * k as usize..40);
        let dim = rng.random_range(1..6);
        let h = random_features(&mut rng, n, dim);
        let labels = random_labels(&mut rng, n, k);
        let ratio = rng.random_range(0.05..=1.0);
        let (protos, plan) = setup(&h, &labels, ratio);
        let s = herd_select(&h, &labels, &protos, &plan);
        let members = labels.members(Pool::Train);
        for cs in &s.classes {
            let want = herd_oracle(&h, &members[cs.class], &protos.means[cs.class], plan.budgets[cs.class]);
            assert_eq!(cs.selected, want, "seed {seed} class {}", cs.class);
        }
    }
}

#[test]
fn exhausting_a_class_recovers_its_mean() {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..60);
        let h = random_features(&mut rng, n, 7);
        let labels = random_labels(&mut rng, n, 3);
        let (protos, plan) = setup(&h, &labels, 1.0);
        let s = herd_select(&h, &labels, &protos, &plan);
        for cs in &s.classes {
            assert!(cs.mean_distance.unwrap() <= 1e-9);
        }
    }
}

#[test]
fn first_pick_is_nearest_to_the_mean() {
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_features(&mut rng, 30, 4);
        let labels = random_labels(&mut rng, 30, 2);
        let (protos, plan) = setup(&h, &labels, 0.3);
        let herd = herd_select(&h, &labels, &protos, &plan);
        let top = topk_prototype_select(&h, &labels, &protos, &plan);
        let kc = kcenter_select(&h, &labels, &protos, &plan);
        for c in 0..2 {
            assert_eq!(herd.classes[c].selected[0], top.classes[c].selected[0]);
            assert_eq!(kc.classes[c].selected[0], top.classes[c].selected[0]);
        }
    }
}

#[test]
fn herding_follows_node_relabeling() {
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 40;
        let h = random_features(&mut rng, n, 5);
        let labels = random_labels(&mut rng, n, 3);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        // node v moves to perm[v]
        let mut rows = vec![0f32; n * 5];
        let mut classes = vec![None; n];
        for v in 0..n {
            rows[perm[v] * 5..perm[v] * 5 + 5].copy_from_slice(h.row(v));
            classes[perm[v]] = labels.class_of[v];
        }
        let h2 = FeatureMatrix::new(n, 5, rows);
        let labels2 = Labels {
            num_classes: 3,
            class_of: classes,
            split_of: vec![Some(Split::Train); n],
        };
        let (p1, b1) = setup(&h, &labels, 0.4);
        let (p2, b2) = setup(&h2, &labels2, 0.4);
        let a = herd_select(&h, &labels, &p1, &b1);
        let b = herd_select(&h2, &labels2, &p2, &b2);
        for c in 0..3 {
            let mapped: Vec<u32> = a.classes[c].selected.iter().map(|&v| perm[v as usize] as u32).collect();
            assert_eq!(mapped, b.classes[c].selected, "seed {seed}");
        }
    }
}

#[test]
fn herding_is_translation_equivariant() {
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_features(&mut rng, 35, 3);
        let labels = random_labels(&mut rng, 35, 2);
        let shifted = FeatureMatrix::new(35, 3, h.data().iter().map(|&x| x + 3.0).collect());
        let (p1, b1) = setup(&h, &labels, 0.5);
        let (p2, b2) = setup(&shifted, &labels, 0.5);
        assert_eq!(
            herd_select(&h, &labels, &p1, &b1).selected_ids(),
            herd_select(&shifted, &labels, &p2, &b2).selected_ids(),
            "seed {seed}"
        );
    }
}

#[test]
fn running_sum_matches_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = random_features(&mut rng, 50, 6);
    let labels = random_labels(&mut rng, 50, 3);
    let (protos, plan) = setup(&h, &labels, 0.3);
    for sel in [
        herd_select(&h, &labels, &protos, &plan),
        kcenter_select(&h, &labels, &protos, &plan).with_distances(&h, &protos),
    ] {
        for cs in &sel.classes {
            let mut sum = vec![0f64; 6];
            for &v in &cs.selected {
                for (s, &x) in sum.iter_mut().zip(h.row(v as usize)) {
                    *s += x as f64;
                }
            }
            assert_eq!(cs.running_sum.as_ref().unwrap(), &sum);
            let n = cs.selected.len() as f64;
            let d: f64 = protos.means[cs.class]
                .iter()
                .zip(&sum)
                .map(|(m, s)| (m - s / n).powi(2))
                .sum::<f64>()
                .sqrt();
            assert_eq!(cs.mean_distance, Some(d));
        }
    }
}

#[test]
fn random_full_class_and_determinism() {
    let labels = all_train(&[0, 1, 0, 1, 0, 0], 2);
    let plan = allocate_budgets(&labels, 1.0, Pool::Train).unwrap();
    let s = random_select(&labels, &plan, 9);
    assert_eq!(s.selected_ids(), (0..6).collect::<Vec<u32>>());

    let plan = allocate_budgets(&labels, 0.5, Pool::Train).unwrap();
    assert_eq!(random_select(&labels, &plan, 3), random_select(&labels, &plan, 3));
    let distinct: BTreeSet<Vec<u32>> = (0..50).map(|s| random_select(&labels, &plan, s).selected_ids()).collect();
    assert!(distinct.len() > 1);
}

#[test]
fn random_pairs_are_uniform() {
    let labels = all_train(&[0; 5], 1);
    let plan = one_class_plan(5, 2);
    let reps = 10_000u64;
    let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
    for seed in 0..reps {
        let ids = random_select(&labels, &plan, seed).selected_ids();
        *counts.entry((ids[0], ids[1])).or_default() += 1;
    }
    assert_eq!(counts.len(), 10);
    let p = 0.1;
    let mean = reps as f64 * p;
    let sigma = (reps as f64 * p * (1.0 - p)).sqrt();
    for (pair, &c) in &counts {
        assert!((c as f64 - mean).abs() <= 3.0 * sigma, "{pair:?}: {c}");
    }
}

#[test]
fn kcenter_collinear_example() {
    // mean 11/3: start at 1, then the farthest point 10, then 0
    let h = FeatureMatrix::from_rows(&[[0.0f32], [1.0], [10.0]]);
    let labels = all_train(&[0, 0, 0], 1);
    let protos = class_prototypes(&h, &labels, Pool::Labeled).unwrap();
    let s = kcenter_select(&h, &labels, &protos, &one_class_plan(3, 3));
    assert_eq!(s.classes[0].selected, vec![1, 2, 0]);
    let s = kcenter_select(&h, &labels, &protos, &one_class_plan(3, 1));
    assert_eq!(s.classes[0].selected, vec![1]);
}

fn kcenter_oracle(h: &FeatureMatrix, members: &[u32], mu: &[f64], budget: usize) -> Vec<u32> {
    let d2 = |a: &[f32], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(&x, &y)| (x as f64 - y).powi(2)).sum()
    };
    let row64 = |v: u32| -> Vec<f64> { h.row(v as usize).iter().map(|&x| x as f64).collect() };
    let mut chosen = vec![*members
        .iter()
        .min_by(|&&a, &&b| d2(h.row(a as usize), mu).total_cmp(&d2(h.row(b as usize), mu)).then(a.cmp(&b)))
        .unwrap()];
    while chosen.len() < budget {
        let far = |v: u32| {
            chosen
                .iter()
                .map(|&c| d2(h.row(v as usize), &row64(c)))
                .fold(f64::INFINITY, f64::min)
        };
        let next = *members
            .iter()
            .filter(|v| !chosen.contains(v))
            .max_by(|&&a, &&b| far(a).total_cmp(&far(b)).then(b.cmp(&a)))
            .unwrap();
        chosen.push(next);
    }
    chosen
}

#[test]
fn kcenter_matches_brute_force() {
    for seed in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_features(&mut rng, 20, 3);
        let labels = random_labels(&mut rng, 20, 2);
        let (protos, plan) = setup(&h, &labels, 0.5);
        let s = kcenter_select(&h, &labels, &protos, &plan);
        let members = labels.members(Pool::Train);
        for cs in &s.classes {
            let want = kcenter_oracle(&h, &members[cs.class], &protos.means[cs.class], plan.budgets[cs.class]);
            assert_eq!(cs.selected, want, "seed {seed}");
        }
    }
}

#[test]
fn topk_examples() {
    // mean 2: distances 4, 1, 1, 4 and the tie goes to the smaller id
    let h = FeatureMatrix::from_rows(&[[0.0f32], [1.0], [3.0], [4.0]]);
    let labels = all_train(&[0; 4], 1);
    let protos = class_prototypes(&h, &labels, Pool::Labeled).unwrap();
    let top = |b| topk_prototype_select(&h, &labels, &protos, &one_class_plan(4, b)).classes[0].selected.clone();
    assert_eq!(top(1), vec![1]);
    assert_eq!(top(2), vec![1, 2]);
    assert_eq!(top(3), vec![1, 2, 0]);
}

fn seeded(method: Method, ratio: f64, metapaths: &[&str]) -> CondensationConfig {
    let mut cfg = CondensationConfig::new(method, ratio, metapaths.iter().map(|s| s.to_string()).collect());
    cfg.seed = Some(7);
    cfg
}

#[test]
fn full_ratio_keeps_the_whole_pool() {
    let g = random_graph(11, 60);
    let pool: Vec<u32> = {
        let mut v: Vec<u32> = g.labels.members(Pool::Train).concat();
        v.sort_unstable();
        v
    };
    for method in Method::ALL {
        let r = condense(&g, &seeded(method, 1.0, &["a-b"])).unwrap();
        assert_eq!(r.selected, pool, "{method}");
    }
}

#[test]
fn every_method_spends_exactly_its_budget() {
    for seed in 0..10u64 {
        let g = random_graph(seed, 120);
        let members = g.labels.members(Pool::Train);
        for method in Method::ALL {
            let r = condense(&g, &seeded(method, 0.2, &["a-b", "a-b-c"])).unwrap();
            assert_eq!(r.selected.len(), r.plan.total());
            assert_eq!(r.graph.node_types[0].count, r.plan.total());
            for cs in &r.selection.classes {
                assert_eq!(cs.selected.len(), r.plan.budgets[cs.class]);
                let uniq: BTreeSet<u32> = cs.selected.iter().copied().collect();
                assert_eq!(uniq.len(), cs.selected.len());
                assert!(cs.selected.iter().all(|v| members[cs.class].contains(v)));
            }
            let p = &r.provenance;
            assert_eq!(p.classes.iter().map(|c| c.budget).sum::<usize>(), r.plan.total());
        }
    }
}

#[test]
fn raw_and_propagated_agree_when_propagation_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 30;
    let h = random_features(&mut rng, n, 4);
    let loops: Vec<(u32, u32)> = (0..n as u32).map(|v| (v, v)).collect();
    let labels = random_labels(&mut rng, n, 3);
    let g = build(vec![("t", n, Some(h))], vec![rel("self", 0, 0, &loops)], labels);
    for method in [Method::Herding, Method::KCenter, Method::TopkPrototype] {
        let prop = condense(&g, &seeded(method, 0.3, &["t-t"])).unwrap();
        let mut raw_cfg = seeded(method, 0.3, &["t-t"]);
        raw_cfg.use_raw_features = true;
        let raw = condense(&g, &raw_cfg).unwrap();
        assert_eq!(prop.selection, raw.selection, "{method}");
    }
}

#[test]
fn small_ratio_count_arithmetic() {
    // 3000 papers with 24% training: 720 pooled; 1.2% of that is 9 (4 + 3 + 2)
    let g = hgc_core::synthetic::generate(&hgc_core::synthetic::SyntheticSpec::acm_like(3000, 0));
    let sizes: Vec<usize> = g.labels.members(Pool::Train).iter().map(Vec::len).collect();
    assert_eq!(sizes.iter().sum::<usize>(), 720);
    let r = condense(&g, &seeded(Method::Herding, 0.012, &["paper-author", "paper-subject"])).unwrap();
    assert_eq!(r.selected.len(), 9);
    assert_eq!(r.plan.budgets, apportion(&sizes, 0.012).unwrap());
}

#[test]
fn three_point_class_tie_goes_to_the_lower_id() {
    // mean (2/3, 2/3): (0,0) is nearest; then (2,0) and (0,2) give mirror
    // image means (1,0) and (0,1) at the same distance
    let h = FeatureMatrix::from_rows(&[[0.0f32, 0.0], [2.0, 0.0], [0.0, 2.0]]);
    let labels = all_train(&[0, 0, 0], 1);
    let protos = class_prototypes(&h, &labels, Pool::Labeled).unwrap();
    let plan = one_class_plan(3, 2);
    let herd = herd_select(&h, &labels, &protos, &plan);
    assert_eq!(herd.classes[0].selected, vec![0, 1]);
    let d = herd.classes[0].mean_distance.unwrap();
    assert!((d - 5f64.sqrt() / 3.0).abs() < 1e-12);
    assert_eq!(topk_prototype_select(&h, &labels, &protos, &plan).classes[0].selected, vec![0, 1]);
    let all = topk_prototype_select(&h, &labels, &protos, &one_class_plan(3, 3));
    assert_eq!(all.classes[0].selected, vec![0, 1, 2]);
}
