use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use kgspec::graph::{
    parse_ntriples, read_snapshot, write_ntriples, write_snapshot, ParseMode, ParseOptions, RDF_TYPE,
};
use kgspec::rng::stream;
use kgspec::{Graph, GraphBuilder};
use proptest::prelude::*;

fn parse(text: &str) -> (Graph, kgspec::graph::ParseReport) {
    parse_ntriples(text.as_bytes(), &ParseOptions::default()).unwrap()
}

#[test]
fn missing_dot_line_is_skipped() {
    let text = "<http://x/a> <http://x/p> <http://x/b> .\n\
                <http://x/b> <http://x/p> <http://x/c> .\n\
                <http://x/c> <http://x/p> <http://x/d>\n\
                <http://x/d> <http://x/q> \"lit\" .\n\
                <http://x/a> <http://x/q> \"1989\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n";
    let (g, report) = parse(text);
    assert_eq!(g.num_triples(), 4);
    assert_eq!(report.skipped, 1);
    assert_eq!(report.errors[0].line, 3);

    let strict = ParseOptions { mode: ParseMode::Strict, ..Default::default() };
    let err = parse_ntriples(text.as_bytes(), &strict).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn duplicate_lines_collapse() {
    let line = "<http://x/v> <http://x/p> <http://x/o> .\n";
    let (g, report) = parse(&line.repeat(3));
    let v = g.lookup("http://x/v").unwrap();
    assert_eq!(g.out_neighbors(v).unwrap().len(), 1);
    assert_eq!(report.duplicates, 2);
}

#[test]
fn hub_in_degree() {
    let mut b = GraphBuilder::new();
    for i in 0..17 {
        b.add_iris(&format!("leaf{i}"), "p", "hub");
    }
    let g = b.build();
    let hub = g.lookup("hub").unwrap();
    assert_eq!(g.in_neighbors(hub).unwrap().len(), 17);
    assert_eq!(g.out_neighbors(hub).unwrap().len(), 0);
}

#[test]
fn gzip_input_matches_plain() {
    let text = "<http://x/a> <http://x/p> <http://x/b> .\n<http://x/b> <http://x/q> \"z\"@en .\n";
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("g.nt");
    let gz = dir.path().join("g.nt.gz");
    std::fs::write(&plain, text).unwrap();
    let mut enc = flate2::write::GzEncoder::new(std::fs::File::create(&gz).unwrap(), flate2::Compression::default());
    enc.write_all(text.as_bytes()).unwrap();
    enc.finish().unwrap();
    let opts = ParseOptions::default();
    let (a, _) = kgspec::graph::load_ntriples(&plain, &opts).unwrap();
    let (b, _) = kgspec::graph::load_ntriples(&gz, &opts).unwrap();
    assert_eq!(a.checksum(), b.checksum());
}

/// Wilson-Hilferty upper quantile of chi-square.
fn chi2_upper(df: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

#[test]
fn sampling_is_uniform_chi_square() {
    let mut b = GraphBuilder::new();
    for i in 0..10_000 {
        b.add_type(&format!("film{i}"), "Film");
    }
    let g = b.build();
    let t = g.lookup("Film").unwrap();
    let mut counts: HashMap<kgspec::TermId, u64> = HashMap::new();
    let reps = 1000;
    for r in 0..reps {
        let s = g.sample_entities(t, 300, &mut stream(11, r)).unwrap();
        let distinct: BTreeSet<_> = s.entities.iter().collect();
        assert_eq!(distinct.len(), 300);
        for e in s.entities {
            *counts.entry(e).or_default() += 1;
        }
    }
    let expected = reps as f64 * 300.0 / 10_000.0;
    let stat: f64 = (0..10_000)
        .map(|i| {
            let id = g.lookup(&format!("film{i}")).unwrap();
            let o = *counts.get(&id).unwrap_or(&0) as f64;
            (o - expected).powi(2) / expected
        })
        .sum();
    // z for alpha = 0.01
    let crit = chi2_upper(9_999.0, 2.326_348);
    assert!(stat < crit, "chi-square {stat:.1} >= {crit:.1}");
}

#[test]
fn sampling_is_deterministic() {
    let mut b = GraphBuilder::new();
    for i in 0..50 {
        b.add_type(&format!("e{i}"), "T");
    }
    let g = b.build();
    let t = g.lookup("T").unwrap();
    let a = g.sample_entities(t, 10, &mut stream(3, 0)).unwrap();
    let c = g.sample_entities(t, 10, &mut stream(3, 0)).unwrap();
    assert_eq!(a, c);
    let all = g.sample_entities(t, 80, &mut stream(3, 0)).unwrap();
    assert_eq!(all.entities.len(), 50);
    assert_eq!(all.shortfall, 30);
}

#[derive(Clone, Debug)]
enum Obj {
    Node(u8),
    Lit(u8),
    Type(u8),
}

fn arb_triples() -> impl Strategy<Value = Vec<(u8, u8, Obj)>> {
    let obj = prop_oneof![
        4 => (0u8..12).prop_map(Obj::Node),
        1 => (0u8..4).prop_map(Obj::Lit),
        1 => (0u8..3).prop_map(Obj::Type),
    ];
    prop::collection::vec((0u8..12, 0u8..4, obj), 0..60)
}

fn to_ntriples(triples: &[(u8, u8, Obj)]) -> String {
    let mut s = String::new();
    for (sub, p, o) in triples {
        let (pred, obj) = match o {
            Obj::Node(n) => (format!("<http://x/p{p}>"), format!("<http://x/n{n}>")),
            Obj::Lit(l) => (format!("<http://x/p{p}>"), format!("\"v {l}\"@en")),
            Obj::Type(t) => (format!("<{RDF_TYPE}>"), format!("<http://x/T{t}>")),
        };
        s.push_str(&format!("<http://x/n{sub}> {pred} {obj} .\n"));
    }
    s
}

proptest! {
    #[test]
    fn adjacency_round_trip(triples in arb_triples()) {
        let (g, _) = parse(&to_ntriples(&triples));
        let set: BTreeSet<_> = g.triples().collect();
        prop_assert_eq!(set.len(), g.num_triples());
        let mut out_sum = 0;
        let mut in_sum = 0;
        for v in g.nodes() {
            let out = g.out_neighbors(v).unwrap();
            if g.is_literal(v) {
                prop_assert!(out.is_empty());
            }
            out_sum += out.len();
            in_sum += g.in_neighbors(v).unwrap().len();
            for e in out {
                prop_assert!(g.in_neighbors(e.node).unwrap().iter().any(|r| r.node == v && r.predicate == e.predicate));
            }
        }
        prop_assert_eq!(out_sum, g.num_triples());
        prop_assert_eq!(in_sum, g.num_triples());
        for t in &set {
            prop_assert!(g.out_neighbors(t.subject).unwrap().iter().any(|e| e.node == t.object && e.predicate == t.predicate));
        }
    }

    #[test]
    fn type_index_matches_scan(triples in arb_triples()) {
        let (g, _) = parse(&to_ntriples(&triples));
        let Some(tp) = g.type_predicate() else { return Ok(()); };
        let mut scan: HashMap<_, BTreeSet<_>> = HashMap::new();
        for t in g.triples().filter(|t| t.predicate == tp) {
            scan.entry(t.object).or_default().insert(t.subject);
        }
        for (ty, members) in &scan {
            let indexed: BTreeSet<_> = g.entities_of_type(*ty).into_iter().collect();
            prop_assert_eq!(&indexed, members);
        }
        let types: BTreeSet<_> = g.types().into_iter().collect();
        prop_assert_eq!(types, scan.keys().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn serialize_parse_fixed_point(triples in arb_triples()) {
        let (g, _) = parse(&to_ntriples(&triples));
        let mut buf = Vec::new();
        write_ntriples(&g, &mut buf).unwrap();
        let (h, report) = parse_ntriples(buf.as_slice(), &ParseOptions::default()).unwrap();
        prop_assert_eq!(report.skipped, 0);
        let mut again = Vec::new();
        write_ntriples(&h, &mut again).unwrap();
        prop_assert_eq!(&buf, &again);
        prop_assert_eq!(g.checksum(), h.checksum());

        let mut snap = Vec::new();
        write_snapshot(&g, &mut snap).unwrap();
        let s = read_snapshot(snap.as_slice()).unwrap();
        prop_assert_eq!(s.checksum(), g.checksum());
        prop_assert_eq!(s.num_triples(), g.num_triples());
    }
}
