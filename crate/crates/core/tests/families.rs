mod common;

use speqwl::families::{cfi_layout, find_colored_distance_clique, find_distance_two_clique};
use speqwl::refine::{initial_coloring, refine_step_ks_lwl};
use speqwl::{
    ab_pair, build_tuple_graph, cfi_pair, cycle, cycle_pair, disjoint_union, padded_colored_pair, trees_isomorphic,
    unroll, LabeledGraph,
};

fn is_connected(g: &LabeledGraph) -> bool {
    speqwl::connected_components(g).count <= 1
}

#[test]
fn small_pairs_are_not_isomorphic() {
    let (g, h) = cycle_pair(2).unwrap();
    assert!(!common::brute_isomorphic(&g, &h));
    let (a, b) = ab_pair(2).unwrap();
    assert!(!common::brute_isomorphic(&a, &b));
    assert!(common::brute_isomorphic(&a, &a));
}

#[test]
fn pair_shapes() {
    assert!(cycle_pair(1).is_err());
    for k in 2..=5 {
        let (g, h) = cycle_pair(k).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2 * (k + 2), 2 * (k + 2)));
        assert_eq!((h.node_count(), h.edge_count()), (2 * (k + 2), 2 * (k + 2)));
        assert!(is_connected(&g) && !is_connected(&h));
        let (a, b) = ab_pair(k).unwrap();
        assert_eq!((a.node_count(), a.edge_count()), (2 * (k + 2), 2 * (k + 2) + 1));
        assert_eq!(a.degree_sequence(), b.degree_sequence());
        assert!(is_connected(&a) && is_connected(&b));
    }
    let (a, _) = ab_pair(4).unwrap();
    assert_eq!((a.node_count(), a.edge_count()), (12, 13));
}

#[test]
fn cfi_pairs_have_matching_invariants() {
    for k in 2..=3 {
        let (g, h) = cfi_pair(k).unwrap();
        let layout = cfi_layout(k, false).unwrap();
        assert_eq!(g.node_count(), layout.node_count());
        assert_eq!(g.node_count(), h.node_count());
        assert_eq!(g.edge_count(), h.edge_count());
        assert_eq!(g.degree_sequence(), h.degree_sequence());
        assert_eq!(g.label_multiset(), h.label_multiset());
        // K_{k+1}: each vertex cloud holds the even subsets of k incident edges
        assert!(layout.vertex_clouds.iter().all(|c| c.len() == 1 << (k - 1)));
        assert_eq!(layout.edge_clouds.len(), k * (k + 1) / 2);
    }
    // refinement is sound, so a separating run proves non-isomorphism
    let (g, h) = cfi_pair(2).unwrap();
    let delta = speqwl::RefinementConfig::new(speqwl::Algorithm::DeltaKLwl, 2, 2).until_stable();
    assert!(speqwl::distinguish(&g, &h, &delta).unwrap().distinguished);
}

#[test]
fn cfi_clique_witness_separates_the_pair() {
    for k in 2..=3 {
        let (g, h) = cfi_pair(k).unwrap();
        assert!(find_distance_two_clique(&g, &cfi_layout(k, false).unwrap(), k + 1).is_some());
        assert!(find_distance_two_clique(&h, &cfi_layout(k, true).unwrap(), k + 1).is_none());
    }
}

#[test]
fn padded_pair_shapes_and_witness() {
    let k = 2;
    let delta = 7;
    let (x, y) = padded_colored_pair(k, delta).unwrap();
    let (g, _) = cfi_pair(k).unwrap();
    assert_eq!(x.node_count(), g.node_count() + g.edge_count() * (delta - 1));
    assert_eq!(x.node_count(), y.node_count());
    assert_eq!(x.edge_count(), y.edge_count());
    assert_eq!(x.label_multiset(), y.label_multiset());
    assert!(find_colored_distance_clique(&x, &cfi_layout(k, false).unwrap(), k + 1).is_some());
    assert!(find_colored_distance_clique(&y, &cfi_layout(k, true).unwrap(), k + 1).is_none());
    assert!(padded_colored_pair(2, 6).is_err());
}

#[test]
fn c5_unrolling_matches_brute_force_levels() {
    let g = cycle(5).unwrap();
    let (tuples, digraph) = common::brute_tuple_digraph(&g, 2, 1);
    let tg = build_tuple_graph(&g, 2, 1).unwrap();
    assert_eq!(tg.len(), tuples.len());
    for root in 0..tg.len() {
        let tree = unroll(&tg, root, 3).unwrap();
        let brute_root = tuples.iter().position(|t| *t == tg.tuple(root).0).unwrap();
        let mut level = vec![brute_root];
        let mut expected = vec![1];
        for _ in 0..3 {
            level = level
                .iter()
                .flat_map(|&t| digraph.out_arcs(t).iter().map(|a| a.0 as usize))
                .collect();
            expected.push(level.len());
        }
        assert_eq!(tree.level_sizes(), expected);
    }
}

#[test]
fn unrolling_isomorphism_agrees_with_refinement() {
    let g = disjoint_union(
        &cycle(5).unwrap(),
        &LabeledGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap(),
    );
    let tg = build_tuple_graph(&g, 2, 1).unwrap();
    let mut c = initial_coloring(&tg);
    for depth in 0..=3 {
        let trees: Vec<_> = (0..tg.len()).map(|i| unroll(&tg, i, depth).unwrap()).collect();
        for i in 0..tg.len() {
            for j in 0..tg.len() {
                assert_eq!(
                    trees_isomorphic(&trees[i], &trees[j], true).unwrap(),
                    c.colors[i] == c.colors[j],
                    "depth {depth}: {i} vs {j}"
                );
            }
        }
        c = refine_step_ks_lwl(&tg, &c);
    }
}
