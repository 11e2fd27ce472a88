use std::collections::{BTreeMap, BTreeSet, HashMap};

use kgspec::graph::RDF_TYPE;
use kgspec::rng::stream;
use kgspec::specificity::{
    estimate_specificity, exact_specificity, node_to_node_specificity, path_frequencies, rank_by_specificity,
    write_table_tsv, EdgePolicy, EstimateOptions, EstimatorParams, Method, Relationship, SelectOptions,
};
use kgspec::{Graph, GraphBuilder, TermId};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn rel(g: &Graph, preds: &[&str]) -> Relationship {
    Relationship::new(preds.iter().map(|p| g.lookup(p).unwrap()).collect())
}

#[test]
fn node_to_node_matches_matrix_power() {
    for seed in 0..5u64 {
        let mut rng = stream(seed, 77);
        let n = 50;
        let mut b = GraphBuilder::new();
        // edges only from lower to higher index
        for i in 0..n {
            for j in i + 1..n {
                for p in 0..2 {
                    if rng.gen_bool(0.08) {
                        b.add_iris(&format!("n{i}"), &format!("p{p}"), &format!("n{j}"));
                    }
                }
            }
        }
        for i in 0..n {
            b.add_iris(&format!("n{i}"), "self", &format!("n{i}"));
        }
        let g = b.build();
        let ids: Vec<TermId> = (0..n).map(|i| g.lookup(&format!("n{i}")).unwrap()).collect();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for t in g.triples() {
            let (Some(s), Some(o)) = (ids.iter().position(|&x| x == t.subject), ids.iter().position(|&x| x == t.object))
            else {
                continue;
            };
            a[(s, o)] += 1.0;
        }
        for d in 1..=4 {
            let mut m = a.clone();
            for _ in 1..d {
                m = &m * &a;
            }
            for _ in 0..30 {
                let (n1, n2) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let col: f64 = m.column(n1).sum();
                let expect = if col == 0.0 { 0.0 } else { m[(n2, n1)] / col };
                let got = node_to_node_specificity(&g, ids[n1], ids[n2], d, EdgePolicy::default()).unwrap();
                assert!((got - expect).abs() < 1e-12, "d={d} {n2}->{n1}: {got} vs {expect}");
            }
        }
    }
}

/// Exhaustive enumeration, written independently of the library.
fn brute_force_specificity(g: &Graph, preds: &[TermId], t: TermId) -> f64 {
    let seeds: BTreeSet<TermId> = g.triples().filter(|x| Some(x.predicate) == g.type_predicate() && x.object == t).map(|x| x.subject).collect();
    let mut reached = BTreeSet::new();
    fn forward(g: &Graph, v: TermId, preds: &[TermId], out: &mut BTreeSet<TermId>) {
        match preds.split_first() {
            None => {
                out.insert(v);
            }
            Some((&p, rest)) => {
                for x in g.triples().filter(|x| x.subject == v && x.predicate == p) {
                    forward(g, x.object, rest, out);
                }
            }
        }
    }
    for &s in &seeds {
        forward(g, s, preds, &mut reached);
    }
    if reached.is_empty() {
        return 0.0;
    }
    // every length-d backward path, recorded by its start node
    fn backward(g: &Graph, v: TermId, d: usize, starts: &mut Vec<TermId>) {
        if d == 0 {
            starts.push(v);
            return;
        }
        for x in g.triples().filter(|x| x.object == v) {
            backward(g, x.subject, d - 1, starts);
        }
    }
    let mut sum = 0.0;
    for &k in &reached {
        let mut starts = Vec::new();
        backward(g, k, preds.len(), &mut starts);
        let from_s = starts.iter().filter(|s| seeds.contains(s)).count();
        sum += from_s as f64 / starts.len() as f64;
    }
    sum / reached.len() as f64
}

/// About 200 nodes: films with specific directors, a shared hub of
/// categories, and untyped noise pointing into both.
fn planted_hub_graph(seed: u64) -> Graph {
    let mut rng = stream(seed, 5);
    let mut b = GraphBuilder::new();
    for f in 0..40 {
        let film = format!("film{f}");
        b.add_type(&film, "Film");
        b.add_iris(&film, "director", &format!("dir{}", f / 2));
        b.add_iris(&film, "subject", &format!("cat{}", rng.gen_range(0..8)));
        b.add_iris(&film, "subject", &format!("cat{}", rng.gen_range(0..8)));
    }
    for d in 0..20 {
        b.add_iris(&format!("dir{d}"), "knownFor", &format!("style{d}"));
        b.add_iris(&format!("dir{d}"), "birthPlace", &format!("city{}", d % 4));
        b.add_type(&format!("dir{d}"), "Person");
    }
    for c in 0..8 {
        b.add_iris(&format!("cat{c}"), "broader", &format!("top{}", c % 2));
    }
    for x in 0..100 {
        let thing = format!("thing{x}");
        b.add_iris(&thing, "subject", &format!("cat{}", rng.gen_range(0..8)));
        if x % 10 == 0 {
            b.add_iris(&thing, "knownFor", &format!("style{}", rng.gen_range(0..20)));
        }
        b.add_iris(&thing, "birthPlace", &format!("city{}", rng.gen_range(0..4)));
    }
    b.build()
}

#[test]
fn exact_matches_brute_force_on_planted_graph() {
    for seed in 0..3 {
        let g = planted_hub_graph(seed);
        assert!(g.num_resources() >= 180, "{}", g.num_resources());
        let t = g.lookup("Film").unwrap();
        for preds in [
            &["director"][..],
            &["subject"],
            &["director", "knownFor"],
            &["director", "birthPlace"],
            &["subject", "broader"],
            &["director", RDF_TYPE],
        ] {
            let r = rel(&g, preds);
            let got = exact_specificity(&g, &r, t, EdgePolicy::default()).unwrap();
            let expect = brute_force_specificity(&g, r.predicates(), t);
            assert!((got.score - expect).abs() < 1e-12, "{preds:?}: {} vs {expect}", got.score);
        }
    }
}

fn arb_typed_graph() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
    // predicate 3 encodes rdf:type to one of two classes
    prop::collection::vec((0u8..14, 0u8..4, 0u8..14), 5..50)
}

fn build_typed(edges: &[(u8, u8, u8)]) -> Graph {
    let mut b = GraphBuilder::new();
    b.add_type("n0", "T");
    for &(s, p, o) in edges {
        if p == 3 {
            b.add_type(&format!("n{s}"), if o % 2 == 0 { "T" } else { "U" });
        } else {
            b.add_iris(&format!("n{s}"), &format!("p{p}"), &format!("n{o}"));
        }
    }
    b.build()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_equals_brute_force(edges in arb_typed_graph(), path in prop::collection::vec(0u8..3, 1..4)) {
        let g = build_typed(&edges);
        let t = g.lookup("T").unwrap();
        let preds: Vec<TermId> = path.iter().filter_map(|p| g.lookup(&format!("p{p}"))).collect();
        prop_assume!(preds.len() == path.len());
        let r = Relationship::new(preds);
        let got = exact_specificity(&g, &r, t, EdgePolicy::default()).unwrap();
        let expect = brute_force_specificity(&g, r.predicates(), t);
        prop_assert!((got.score - expect).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&got.score));
    }

    #[test]
    fn table_invariants(edges in arb_typed_graph(), seed in 0u64..1000, exact in any::<bool>()) {
        let g = build_typed(&edges);
        let t = g.lookup("T").unwrap();
        let params = EstimatorParams {
            seed_set_size: 5,
            n_walks: 40,
            candidates_per_depth: 2,
            max_depth: 3,
            threshold: 0.3,
            seed,
            method: if exact { Method::Eq2 } else { Method::Alg2 },
            ..Default::default()
        };
        let table = rank_by_specificity(&g, t, &params).unwrap();
        for (i, entries) in table.depths.iter().enumerate() {
            let d = i + 1;
            prop_assert!(entries.len() <= 2 * d);
            for e in entries {
                prop_assert_eq!(e.relationship.depth(), d);
                prop_assert!((0.0..=1.0).contains(&e.score));
                prop_assert!(Some(e.relationship.predicates()[0]) != g.type_predicate());
                if !exact {
                    prop_assert_eq!(e.support, 40);
                }
                if d > 1 {
                    let prefix = &e.relationship.predicates()[..d - 1];
                    let parent = table.depths[i - 1].iter().find(|p| p.relationship.predicates() == prefix);
                    prop_assert!(parent.is_some_and(|p| p.score >= 0.3));
                }
            }
            for w in entries.windows(2) {
                prop_assert!(
                    w[0].score > w[1].score
                        || (w[0].score == w[1].score && w[0].relationship.predicates() < w[1].relationship.predicates())
                );
            }
        }
        let again = rank_by_specificity(&g, t, &params).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_table_tsv(&g, &table, &mut a).unwrap();
        write_table_tsv(&g, &again, &mut b).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn frequency_selection_matches_full_scan() {
    let mut b = GraphBuilder::new();
    for s in 0..10 {
        let seed = format!("s{s}");
        b.add_type(&seed, "T");
        for p in 0..40 {
            // predicate p has 1 + (p * 7) % 40 edges per seed; all distinct counts
            for k in 0..1 + (p * 7) % 40 {
                b.add_iris(&seed, &format!("p{p}"), &format!("o{p}_{k}"));
            }
        }
    }
    let g = b.build();
    let t = g.lookup("T").unwrap();
    let seeds = g.entities_of_type(t);

    let mut oracle: HashMap<TermId, u64> = HashMap::new();
    for x in g.triples() {
        if seeds.contains(&x.subject) && Some(x.predicate) != g.type_predicate() {
            *oracle.entry(x.predicate).or_default() += 1;
        }
    }
    let mut expected: Vec<(TermId, u64)> = oracle.into_iter().collect();
    expected.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    expected.truncate(25);

    let got = path_frequencies(&g, &seeds, 1, None, 0.5, SelectOptions::default(), &mut stream(0, 0)).unwrap();
    let got: Vec<(TermId, u64)> = got.into_iter().take(25).map(|(r, f)| (r.predicates()[0], f)).collect();
    assert_eq!(got, expected);
}

/// Depth-1 graph where every reachable node has the same ratio, so the
/// estimator's expectation equals the exact score.
fn homogeneous_graph() -> Graph {
    let mut b = GraphBuilder::new();
    for s in 0..20 {
        b.add_type(&format!("s{s}"), "T");
        b.add_iris(&format!("s{s}"), "p", &format!("x{}", s / 2));
        b.add_iris(&format!("s{s}"), "q", &format!("y{}", s / 4));
    }
    for u in 0..10 {
        b.add_iris(&format!("u{u}"), "r", &format!("x{u}"));
    }
    for u in 0..15 {
        b.add_iris(&format!("w{u}"), "r", &format!("y{}", u / 3));
    }
    b.build()
}

#[test]
fn estimator_error_shrinks_with_n() {
    let g = homogeneous_graph();
    let t = g.lookup("T").unwrap();
    let seeds = g.entities_of_type(t);
    let cands = vec![rel(&g, &["p"]), rel(&g, &["q"])];
    let exact: Vec<f64> = cands.iter().map(|r| exact_specificity(&g, r, t, EdgePolicy::default()).unwrap().score).collect();
    assert!((exact[0] - 2.0 / 3.0).abs() < 1e-12 && (exact[1] - 4.0 / 7.0).abs() < 1e-12);

    let mut mae = BTreeMap::new();
    for n in [100, 500, 2000, 5000] {
        let mut err = 0.0;
        for seed in 0..50 {
            let est = estimate_specificity(&g, &cands, &seeds, t, 1, n, EstimateOptions::default(), &mut stream(seed, 9)).unwrap();
            for (e, x) in est.iter().zip(&exact) {
                assert_eq!(e.support, n as u64);
                err += (e.score - x).abs();
            }
        }
        mae.insert(n, err / 100.0);
    }
    let v: Vec<f64> = mae.values().copied().collect();
    assert!(v.windows(2).all(|w| w[1] <= w[0]), "{mae:?}");
}

#[test]
fn specific_chain_outranks_hub_chain() {
    let g = planted_hub_graph(1);
    let t = g.lookup("Film").unwrap();
    for method in [Method::Eq2, Method::Alg2] {
        let params = EstimatorParams { threshold: 0.0, method, n_walks: 2000, seed: 4, ..Default::default() };
        let table = rank_by_specificity(&g, t, &params).unwrap();
        for (d, specific, hub) in [(1, vec!["director"], vec!["subject"]), (2, vec!["director", "knownFor"], vec!["subject", "broader"])] {
            let score = |preds: &[&str]| {
                let r = rel(&g, preds);
                table.depth(d).iter().find(|e| e.relationship == r).map(|e| e.score).unwrap()
            };
            assert!(score(&specific) > score(&hub), "{method:?} depth {d}");
        }
    }
}
