use std::collections::BTreeSet;

use kgspec::pagerank::compute_pagerank;
use kgspec::rng::stream;
use kgspec::specificity::{rank_by_specificity, EstimatorParams};
use kgspec::walks::{corpus_stats, extract_corpus, extract_walks, prune_check, Bias, Pruning, Walk, WalkStrategy};
use kgspec::{Graph, GraphBuilder, TermId};
use proptest::prelude::*;

fn types(g: &Graph, v: TermId) -> BTreeSet<TermId> {
    g.types_of(v).collect()
}

/// Pruning predicates restated from their definitions.
fn oracle(g: &Graph, nodes: &[TermId], scheme: Pruning) -> bool {
    let d = nodes.len() - 1;
    let root = nodes[0];
    let root_revisited = nodes[1..].contains(&root);
    match scheme {
        Pruning::None => true,
        Pruning::Nrse => !root_revisited,
        Pruning::Ue => nodes.iter().collect::<BTreeSet<_>>().len() == nodes.len(),
        Pruning::Nrst => {
            let rt = types(g, root);
            !root_revisited && (1..d).all(|k| types(g, nodes[k]).is_disjoint(&rt))
        }
        Pruning::Uet => {
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    if !types(g, nodes[i]).is_disjoint(&types(g, nodes[j])) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

fn arb_graph() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
    prop::collection::vec((0u8..10, 0u8..4, 0u8..10), 10..60)
}

/// Predicate 3 is a type edge to one of three classes.
fn build(edges: &[(u8, u8, u8)]) -> Graph {
    let mut b = GraphBuilder::new();
    for i in 0..10 {
        b.add_type(&format!("n{i}"), if i % 2 == 0 { "T" } else { "U" });
    }
    for &(s, p, o) in edges {
        if p == 3 {
            b.add_type(&format!("n{s}"), &format!("C{}", o % 3));
        } else {
            b.add_iris(&format!("n{s}"), &format!("p{p}"), &format!("n{o}"));
        }
    }
    b.build()
}

fn roots(g: &Graph) -> Vec<TermId> {
    (0..10).filter_map(|i| g.lookup(&format!("n{i}"))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pruning_matches_oracle(edges in arb_graph(), depth in 1usize..4, seed in 0u64..500) {
        let g = build(&edges);
        let s = WalkStrategy::new(Bias::Uniform, depth, 40);
        let corpus = extract_corpus(&g, &roots(&g), &s, seed).unwrap();
        for w in &corpus.walks {
            let nodes: Vec<TermId> = w.nodes().collect();
            for scheme in Pruning::ALL {
                prop_assert_eq!(prune_check(w, scheme, &g), oracle(&g, &nodes, scheme), "{:?} {:?}", scheme, nodes);
            }
            let ok = |p| prune_check(w, p, &g);
            if ok(Pruning::Ue) { prop_assert!(ok(Pruning::Nrse)); }
            if ok(Pruning::Nrst) { prop_assert!(ok(Pruning::Nrse)); }
            if ok(Pruning::Uet) && !types(&g, w.root()).is_empty() { prop_assert!(ok(Pruning::Nrst)); }
        }
    }

    #[test]
    fn every_walk_replays(edges in arb_graph(), depth in 1usize..4, seed in 0u64..500, bias_ix in 0usize..3, prune_ix in 0usize..5) {
        let g = build(&edges);
        let scores = compute_pagerank(&g, 0.85, 1e-10, 100).unwrap().scores;
        let bias = [Bias::Uniform, Bias::Frequency, Bias::PageRank][bias_ix];
        let s = WalkStrategy::new(bias, depth, 25).with_pruning(Pruning::ALL[prune_ix]).with_pagerank(&scores);
        let entities = roots(&g);
        let corpus = extract_corpus(&g, &entities, &s, seed).unwrap();
        for w in &corpus.walks {
            prop_assert!(w.is_valid_in(&g));
            prop_assert!(w.depth() >= 1 && w.depth() <= depth);
            prop_assert!(prune_check(w, Pruning::ALL[prune_ix], &g));
        }
        prop_assert_eq!(corpus.entities.len(), entities.len());
        for st in &corpus.entities {
            prop_assert!(st.distinct <= st.walks && st.walks <= st.attempts && st.attempts == 25);
        }
        let again = extract_corpus(&g, &entities, &s, seed).unwrap();
        prop_assert_eq!(&corpus.walks, &again.walks);
    }

    #[test]
    fn specificity_walks_follow_templates(edges in arb_graph(), depth in 1usize..3, seed in 0u64..500) {
        let g = build(&edges);
        let t = g.lookup("T").unwrap();
        let params = EstimatorParams { seed_set_size: 5, n_walks: 50, max_depth: depth, threshold: 0.2, seed, ..Default::default() };
        let table = rank_by_specificity(&g, t, &params).unwrap();
        let allowed: BTreeSet<Vec<TermId>> = table
            .above_threshold(depth)
            .map(|e| e.relationship.predicates().to_vec())
            .collect();
        let s = WalkStrategy::new(Bias::Specificity, depth, 30).with_table(&table);
        let corpus = extract_corpus(&g, &g.entities_of_type(t), &s, seed).unwrap();
        for w in &corpus.walks {
            prop_assert!(w.is_valid_in(&g));
            prop_assert!(allowed.contains(&w.predicates().collect::<Vec<_>>()));
        }
        if allowed.is_empty() {
            prop_assert!(corpus.walks.is_empty());
        }
    }
}

#[test]
fn star_coverage() {
    let mut b = GraphBuilder::new();
    for i in 0..10 {
        b.add_iris("hub", "p", &format!("leaf{i}"));
    }
    let g = b.build();
    let hub = g.lookup("hub").unwrap();
    let s = WalkStrategy::new(Bias::Uniform, 1, 500);
    // P(fewer than 9 leaves in 500 draws) is below 1e-20
    for seed in 0..200 {
        let c = extract_walks(&g, hub, &s, &mut stream(seed, 0)).unwrap();
        assert!(corpus_stats(&c).distinct >= 9);
        assert_eq!(c.len(), 500);
    }
}

#[test]
fn stats_count_repeats() {
    let mut b = GraphBuilder::new();
    b.add_iris("a", "p", "b").add_iris("b", "q", "c");
    let g = b.build();
    let a = g.lookup("a").unwrap();
    let c = extract_walks(&g, a, &WalkStrategy::new(Bias::Uniform, 2, 7), &mut stream(0, 0)).unwrap();
    let st = corpus_stats(&c);
    assert_eq!((st.walks, st.distinct, st.attempts), (7, 1, 7));
    assert_eq!(st.mean_depth, 2.0);
    let expected = Walk { tokens: ["a", "p", "b", "q", "c"].iter().map(|x| g.lookup(x).unwrap()).collect() };
    assert!(c.walks.iter().all(|w| *w == expected));
}

#[test]
fn uet_depth3_on_same_type_clique_is_empty() {
    let mut b = GraphBuilder::new();
    for i in 0..6 {
        b.add_type(&format!("n{i}"), "Thing");
        for j in 0..6 {
            if i != j {
                b.add_iris(&format!("n{i}"), "link", &format!("n{j}"));
            }
        }
    }
    b.add_type("Thing", "Class").add_type("Class", "Class");
    let g = b.build();
    let t = g.lookup("Thing").unwrap();
    let s = WalkStrategy::new(Bias::Uniform, 3, 100).with_pruning(Pruning::Uet);
    let corpus = extract_corpus(&g, &g.entities_of_type(t), &s, 1).unwrap();
    assert!(corpus.is_empty());
    assert_eq!(corpus_stats(&corpus).attempts, 600);
}
