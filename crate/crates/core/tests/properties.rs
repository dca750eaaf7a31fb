mod common;

use std::collections::HashSet;

use inttsp::backend::lp::{read_lp, write_lp};
use inttsp::backend::ReferenceBackend;
use inttsp::clustering::{build_cluster_tree, cluster, cut_tree_at, restricted_cluster};
use inttsp::engine::{run, Variant, VariantConfig};
use inttsp::heuristics::{improve, nearest_neighbor, or_opt, two_opt, Tour};
use inttsp::instances::{edge_endpoints, edge_idx, gen_random_euclidean, Instance, Source};
use inttsp::model::{build_base_model, canonical_key, Sec, SecForm, SecOrigin, SecStatus};
use inttsp::subtours::{extract_subtours, IntegerSolution, SecPool};
use proptest::prelude::*;

fn instance(n: usize, seed: u64) -> Instance {
    gen_random_euclidean(n, seed).unwrap()
}

/// A random 2-factor: a shuffled vertex order cut into cycles of size >= 3.
fn two_factor(n: usize, order: &[usize], cuts: &[usize]) -> IntegerSolution {
    let mut chosen = Vec::new();
    let mut start = 0;
    let mut bounds: Vec<usize> = cuts.iter().copied().filter(|&c| c >= 3 && c <= n - 3).collect();
    bounds.sort_unstable();
    bounds.dedup();
    let mut pieces = Vec::new();
    for b in bounds {
        if b - start >= 3 && n - b >= 3 {
            pieces.push((start, b));
            start = b;
        }
    }
    pieces.push((start, n));
    for (a, b) in pieces {
        let cyc = &order[a..b];
        for i in 0..cyc.len() {
            let (u, v) = (cyc[i], cyc[(i + 1) % cyc.len()]);
            chosen.push(edge_idx(u.min(v), u.max(v)));
        }
    }
    IntegerSolution::new(chosen)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extracted_cycles_partition_vertices(
        order in Just((0..12usize).collect::<Vec<_>>()).prop_shuffle(),
        cuts in prop::collection::vec(0usize..12, 0..4),
    ) {
        let sol = two_factor(12, &order, &cuts);
        let cycles = extract_subtours(&sol, 12).unwrap();
        let mut seen = [false; 12];
        let mut total = 0;
        for c in &cycles {
            prop_assert!(c.len() >= 3);
            for &v in &c.vertices {
                prop_assert!(!seen[v]);
                seen[v] = true;
            }
            total += c.len();
        }
        prop_assert_eq!(total, 12);
    }

    #[test]
    fn pool_keeps_one_entry_per_key(
        subsets in prop::collection::vec(prop::collection::btree_set(0usize..9, 3..=8), 1..40),
    ) {
        let mut pool = SecPool::new(9);
        let mut keys = HashSet::new();
        for s in subsets {
            let subset: Vec<usize> = s.into_iter().collect();
            let sec = Sec::new(subset.clone(), 9, SecStatus::Active, SecOrigin::Iteration(1)).unwrap();
            let fresh = keys.insert(canonical_key(&subset, 9));
            prop_assert_eq!(pool.insert(sec), fresh);
        }
        prop_assert_eq!(pool.len(), keys.len());
        let distinct: HashSet<_> = pool.iter().map(|s| s.key().clone()).collect();
        prop_assert_eq!(distinct.len(), pool.len());
    }

    #[test]
    fn clusters_are_components_of_admitted_edges(n in 3usize..40, seed in 0u64..500, c_frac in 0.0f64..1.0) {
        let inst = instance(n, seed);
        let c = 1 + ((n - 1) as f64 * c_frac) as usize;
        for clustering in [cluster(&inst, c).unwrap(), restricted_cluster(&inst, c).unwrap()] {
            let edges: Vec<(usize, usize)> = clustering.admitted.iter().map(|&e| edge_endpoints(e)).collect();
            prop_assert_eq!(&clustering.partition, &common::components(n, &edges));
            prop_assert_eq!(clustering.c_actual, clustering.partition.len());
        }
        prop_assert_eq!(cluster(&inst, c).unwrap().c_actual, c);
    }

    #[test]
    fn finer_clusterings_refine_coarser(n in 4usize..30, seed in 0u64..500) {
        let inst = instance(n, seed);
        for c in 2..=n {
            let fine = cluster(&inst, c).unwrap();
            let coarse = cluster(&inst, c - 1).unwrap();
            for part in &fine.partition {
                prop_assert!(coarse.partition.iter().any(|p| part.iter().all(|v| p.contains(v))));
            }
        }
    }

    #[test]
    fn tree_cut_partitions_vertices(n in 3usize..40, seed in 0u64..500, u in 3usize..45) {
        let inst = instance(n, seed);
        let tree = build_cluster_tree(&inst);
        prop_assert_eq!(tree.nodes.len(), 2 * n - 1);
        for node in &tree.nodes {
            if let Some((a, b)) = node.children {
                let mut joined = tree.nodes[a].cluster.clone();
                joined.extend(&tree.nodes[b].cluster);
                joined.sort_unstable();
                prop_assert_eq!(&joined, &node.cluster);
            }
        }
        let tops = cut_tree_at(&tree, u).unwrap();
        let mut seen = vec![0; n];
        for &t in &tops {
            prop_assert!(tree.nodes[t].cluster.len() <= u || tree.nodes[t].children.is_none());
            for &v in &tree.nodes[t].cluster {
                seen[v] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
    }

    #[test]
    fn lp_text_round_trips(n in 3usize..12, seed in 0u64..200, secs in prop::collection::vec(prop::collection::btree_set(0usize..12, 3..=10), 0..6)) {
        let inst = instance(n, seed);
        let mut model = build_base_model(&inst);
        for (i, s) in secs.into_iter().enumerate() {
            let subset: Vec<usize> = s.into_iter().filter(|&v| v < n).collect();
            if subset.len() >= 3 && subset.len() < n {
                let form = [SecForm::Packing, SecForm::Cut, SecForm::Hybrid][i % 3];
                model.add_sec(&subset, form).unwrap();
            }
        }
        prop_assert_eq!(read_lp(&write_lp(&model)).unwrap(), model);
    }

    #[test]
    fn local_search_never_lengthens(n in 3usize..40, seed in 0u64..500, start_frac in 0.0f64..1.0) {
        let inst = instance(n, seed);
        let start = ((n as f64 * start_frac) as usize).min(n - 1);
        let nn = nearest_neighbor(&inst, start).unwrap();
        for t in [two_opt(&inst, &nn), or_opt(&inst, &nn), improve(&inst, &nn)] {
            prop_assert!(t.length <= nn.length);
            prop_assert_eq!(&Tour::new(&inst, t.order.clone()).unwrap(), &t);
        }
    }
}

#[test]
fn local_search_close_to_optimum() {
    for seed in 0..100u64 {
        let n = 5 + (seed % 6) as usize;
        let inst = instance(n, 700 + seed);
        let t = improve(&inst, &nearest_neighbor(&inst, 0).unwrap());
        let opt = common::brute_force_tour(&inst);
        assert!(
            t.length as f64 <= 1.15 * opt as f64,
            "{}: {} vs {opt}",
            inst.name(),
            t.length
        );
    }
}

#[test]
fn iterations_bounded_by_distinct_secs() {
    let backend = ReferenceBackend::new();
    for seed in 0..40u64 {
        let inst = instance(10, 900 + seed);
        let opt = common::brute_force_tour(&inst);
        for v in ["basic", "rc3n", "hcd:4"] {
            let mut cfg = VariantConfig::new(v.parse::<Variant>().unwrap());
            cfg.harvest_incumbents = seed % 2 == 0;
            let r = run(&inst, &backend, &cfg).unwrap();
            assert!(r.iterations <= r.pool.total + 1);
            assert!(r
                .per_iteration
                .windows(2)
                .all(|w| w[0].objective <= w[1].objective));
            assert_eq!(r.objective, Some(opt));
        }
    }
}

#[test]
fn warm_start_does_not_change_result() {
    let backend = ReferenceBackend::new();
    for seed in 0..30u64 {
        let inst = instance(10, 1200 + seed);
        let cold = run(&inst, &backend, &VariantConfig::default()).unwrap();
        let warm = run(
            &inst,
            &backend,
            &VariantConfig {
                warm_start: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cold.objective, warm.objective);
    }
}

#[test]
fn hierarchical_variants_match_brute_force() {
    let backend = ReferenceBackend::new();
    for seed in 0..20u64 {
        let inst = instance(10, 1500 + seed);
        let opt = common::brute_force_tour(&inst);
        for u in [3, 5, 7] {
            for v in [Variant::Hc(Some(u)), Variant::Hcd(Some(u))] {
                let r = run(&inst, &backend, &VariantConfig::new(v)).unwrap();
                assert_eq!(r.objective, Some(opt), "{} {v}", inst.name());
            }
        }
    }
}

#[test]
fn explicit_instances_solve_too() {
    let weights = vec![3, 9, 4, 8, 2, 7, 5, 6, 1, 9];
    let inst = Instance::from_weights("explicit5", Source::Explicit, 5, weights, None).unwrap();
    let r = run(
        &inst,
        &ReferenceBackend::new(),
        &VariantConfig::new(Variant::Hcd(None)),
    )
    .unwrap();
    assert_eq!(r.objective, Some(common::brute_force_tour(&inst)));
}
