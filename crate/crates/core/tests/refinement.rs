mod common;

use std::collections::HashMap;

use proptest::prelude::*;
use speqwl::refine::{
    initial_coloring, initial_coloring_dense, refine_step_delta_k_lwl, refine_step_k_wl, refine_step_ks_lwl,
    refine_step_ks_lwl_plus, run_directed, DirectedLabeledGraph,
};
use speqwl::{
    apply_permutation, build_tuple_graph, cfi_pair, cycle, disjoint_union, distinguish, distinguish_on_union,
    run_to_stable, Algorithm, DenseTupleSpace, Iterations, KWlMode, LabeledGraph, RefinementConfig,
};

/// One `(k,s)`-LWL+ round written directly from the definitions over the
/// brute-force tuple list: each local neighbor `x` of `v` at position `j`
/// contributes `(C(x), #{ y = φ_j(v, w) in V^k_s : C(y) = C(x) })`.
fn reference_plus_round(g: &LabeledGraph, k: usize, s: usize) -> (Vec<u32>, Vec<u32>) {
    let tuples = common::brute_ks_tuples(g, k, s);
    let index: HashMap<Vec<usize>, usize> = tuples.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut types = HashMap::new();
    let initial: Vec<u32> = tuples
        .iter()
        .map(|t| {
            let next = types.len() as u32;
            *types.entry(common::brute_atomic_key(g, t)).or_insert(next)
        })
        .collect();
    let replace = |t: &Vec<usize>, j: usize, w: usize| {
        let mut u = t.clone();
        u[j] = w;
        index.get(&u).copied()
    };
    let mut signatures = HashMap::new();
    let refined = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut sig = vec![vec![initial[i] as usize]];
            for j in 0..k {
                let mut entries: Vec<usize> = Vec::new();
                for &w in g.neighbors(t[j]) {
                    if let Some(x) = replace(t, j, w as usize) {
                        let count = (0..g.node_count())
                            .filter_map(|w2| replace(t, j, w2))
                            .filter(|&y| initial[y] == initial[x])
                            .count();
                        entries.push(initial[x] as usize * 1_000_000 + count);
                    }
                }
                entries.sort_unstable();
                sig.push(entries);
            }
            let next = signatures.len() as u32;
            *signatures.entry(sig).or_insert(next)
        })
        .collect();
    (initial, refined)
}

#[test]
fn plus_round_matches_reference_on_mutag_graph_0() {
    let mutag = common::mutag();
    let g = &mutag.graphs[0];
    let tg = build_tuple_graph(g, 2, 1).unwrap();
    let (reference_initial, reference) = reference_plus_round(g, 2, 1);
    let c0 = initial_coloring(&tg);
    let c1 = refine_step_ks_lwl_plus(&tg, &c0);
    assert!(common::same_partition(&c0.colors, &reference_initial));
    assert!(common::same_partition(&c1.colors, &reference));
}

#[test]
fn plus_round_matches_reference_on_random_graphs() {
    let mut rng = common::rng(21);
    for _ in 0..40 {
        let n = rand::Rng::gen_range(&mut rng, 2..=7);
        let g = common::random_graph(&mut rng, n, 0.4, 2);
        for (k, s) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let tg = build_tuple_graph(&g, k, s).unwrap();
            let c1 = refine_step_ks_lwl_plus(&tg, &initial_coloring(&tg));
            assert!(common::same_partition(&c1.colors, &reference_plus_round(&g, k, s).1));
        }
    }
}

#[test]
fn plus_with_unit_counts_equals_plain() {
    // distinct node labels make every replacement class a singleton
    let g = LabeledGraph::with_labels(vec![0, 1, 2, 3, 4], [(0, 1, 0), (1, 2, 0), (2, 3, 0), (1, 4, 0)]).unwrap();
    let tg = build_tuple_graph(&g, 1, 1).unwrap();
    let c0 = initial_coloring(&tg);
    assert!(common::same_partition(
        &refine_step_ks_lwl_plus(&tg, &c0).colors,
        &refine_step_ks_lwl(&tg, &c0).colors
    ));
}

#[test]
fn dense_plus_equals_sparse_plus_when_s_is_k() {
    let mut rng = common::rng(5);
    for _ in 0..30 {
        let n = rand::Rng::gen_range(&mut rng, 1..=6);
        let g = common::random_graph(&mut rng, n, 0.4, 2);
        let mut sparse = RefinementConfig::new(Algorithm::KsLwlPlus, 2, 2).with_iterations(Iterations::Fixed(3));
        sparse.plus_counts_last_iteration_only = false;
        let dense = RefinementConfig {
            algorithm: Algorithm::DeltaKLwlPlus,
            ..sparse.clone()
        };
        let a = run_to_stable(&g, &sparse).unwrap();
        let b = run_to_stable(&g, &dense).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(common::same_partition(&x.colors, &y.colors));
        }
    }
}

#[test]
fn one_wl_matches_one_one_lwl_on_labeled_graphs() {
    let mut rng = common::rng(8);
    for _ in 0..50 {
        let n = rand::Rng::gen_range(&mut rng, 1..=9);
        let g = common::random_graph(&mut rng, n, 0.3, 3);
        let a = run_to_stable(&g, &RefinementConfig::ks_lwl(1, 1).until_stable()).unwrap();
        let b = run_to_stable(&g, &RefinementConfig::new(Algorithm::OneWl, 1, 1).until_stable()).unwrap();
        assert_eq!(a.len(), b.len());
        assert!(a
            .iter()
            .zip(&b)
            .all(|(x, y)| common::same_partition(&x.colors, &y.colors)));
    }
}

#[test]
fn dense_delta_step_matches_materialized_step() {
    let g = cycle(6).unwrap();
    let tg = build_tuple_graph(&g, 2, 2).unwrap();
    let space = DenseTupleSpace::new(&g, 2).unwrap();
    let a = refine_step_ks_lwl(&tg, &initial_coloring(&tg));
    let b = refine_step_delta_k_lwl(&space, &initial_coloring_dense(&space));
    assert!(common::same_partition(&a.colors, &b.colors));
}

#[test]
fn cfi_pair_k2_local_vs_global() {
    let (g, h) = cfi_pair(2).unwrap();
    let delta = RefinementConfig::new(Algorithm::DeltaKLwl, 2, 2).until_stable();
    assert!(distinguish(&g, &h, &delta).unwrap().distinguished);
    assert!(distinguish_on_union(&g, &h, &delta).unwrap().distinguished);
    let wl = RefinementConfig::new(Algorithm::KWlOblivious, 2, 2).until_stable();
    assert!(!distinguish(&g, &h, &wl).unwrap().distinguished);
}

#[test]
fn folklore_sees_distances_that_oblivious_2wl_misses() {
    let c8 = cycle(8).unwrap();
    let two_c4 = disjoint_union(&cycle(4).unwrap(), &cycle(4).unwrap());
    let fwl = RefinementConfig::new(Algorithm::KWlFolklore, 2, 2).until_stable();
    let wl = RefinementConfig::new(Algorithm::KWlOblivious, 2, 2).until_stable();
    assert!(distinguish(&c8, &two_c4, &fwl).unwrap().distinguished);
    assert!(!distinguish(&c8, &two_c4, &wl).unwrap().distinguished);
    assert!(!distinguish(&c8, &c8, &fwl).unwrap().distinguished);
}

#[test]
fn k_wl_class_sizes_are_permutation_invariant() {
    let mut rng = common::rng(13);
    let g = common::random_graph(&mut rng, 7, 0.4, 1);
    let perm = common::random_permutation(&mut rng, 7);
    let h = apply_permutation(&g, &perm).unwrap();
    for mode in [KWlMode::Oblivious, KWlMode::Folklore] {
        let sizes = |x: &LabeledGraph| {
            let space = DenseTupleSpace::new(x, 2).unwrap();
            let c = refine_step_k_wl(&space, &initial_coloring_dense(&space), mode);
            let mut s: Vec<u64> = c.histogram().into_iter().map(|e| e.1).collect();
            s.sort_unstable();
            s
        };
        assert_eq!(sizes(&g), sizes(&h));
    }
}

#[test]
fn edge_labeled_refinement_on_c8_tuple_graph() {
    let c8 = cycle(8).unwrap();
    let tg = build_tuple_graph(&c8, 2, 1).unwrap();
    let history = run_directed(&DirectedLabeledGraph::from_tuple_graph(&tg), Iterations::UntilStable);
    assert!(history.len() - 1 <= 2);
}

#[test]
fn history_length_follows_iteration_count() {
    let g = &common::mutag().graphs[0];
    let config = RefinementConfig::new(Algorithm::DeltaKLwl, 2, 2).with_iterations(Iterations::Fixed(5));
    assert_eq!(run_to_stable(g, &config).unwrap().len(), 6);
}

#[test]
fn runs_are_deterministic() {
    let g = &common::mutag().graphs[3];
    for algorithm in speqwl::Algorithm::ALL {
        let config = RefinementConfig::new(algorithm, 2, 1).with_iterations(Iterations::Fixed(3));
        assert_eq!(run_to_stable(g, &config).unwrap(), run_to_stable(g, &config).unwrap());
    }
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = LabeledGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        (
            proptest::collection::vec(0u32..2, n),
            proptest::collection::vec(any::<bool>(), pairs.len()),
        )
            .prop_map(move |(labels, keep)| {
                let edges = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(&(u, v), _)| (u, v, 0));
                LabeledGraph::with_labels(labels, edges).unwrap()
            })
    })
}

fn configs() -> Vec<RefinementConfig> {
    let mut out = Vec::new();
    for algorithm in Algorithm::ALL {
        let (k, s) = match algorithm {
            Algorithm::OneWl | Algorithm::EdgeLabeledOneWl => (1, 1),
            Algorithm::KsLwl | Algorithm::KsLwlPlus => (3, 2),
            _ => (2, 2),
        };
        out.push(RefinementConfig::new(algorithm, k, s).until_stable());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn isomorphic_copies_are_never_distinguished(g in arb_graph(7), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let perm = common::random_permutation(&mut rng, g.node_count());
        let h = apply_permutation(&g, &perm).unwrap();
        for config in configs() {
            prop_assert!(!distinguish(&g, &h, &config).unwrap().distinguished, "{}", config.label());
        }
    }

    #[test]
    fn every_round_refines_the_previous(g in arb_graph(7)) {
        for mut config in configs() {
            config.plus_counts_last_iteration_only = false;
            let history = run_to_stable(&g, &config).unwrap();
            for w in history.windows(2) {
                prop_assert!(w[1].refines(&w[0]), "{}", config.label());
            }
        }
    }

    #[test]
    fn paired_and_union_routes_agree(g in arb_graph(6), h in arb_graph(6)) {
        for config in [
            RefinementConfig::ks_lwl(2, 1),
            RefinementConfig::ks_lwl(2, 2),
            RefinementConfig::ks_lwl(3, 1),
            RefinementConfig::new(Algorithm::DeltaKLwl, 2, 2),
            RefinementConfig::new(Algorithm::OneWl, 1, 1),
        ] {
            let config = config.until_stable();
            prop_assert_eq!(
                distinguish(&g, &h, &config).unwrap().round,
                distinguish_on_union(&g, &h, &config).unwrap().round
            );
        }
    }
}
