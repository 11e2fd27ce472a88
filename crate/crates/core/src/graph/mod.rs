//! Immutable, integer-indexed RDF multigraph.
//!
//! Terms are interned into dense [`TermId`]s. At build time ids are
//! renumbered so that they follow the byte order of the term strings; two
//! graphs holding the same triple set therefore have identical ids, identical
//! adjacency arrays and identical checksums, independent of input order.
//!
//! Forward and reverse adjacency are stored as CSR arrays whose per-node
//! slices are sorted by `(predicate, node)`. Edges with a given predicate form
//! a contiguous run, which the walk code uses for template-constrained steps,
//! and the type index is just the `rdf:type` run of a class node's reverse
//! adjacency.

mod ntriples;
mod snapshot;
mod tsv;

use std::collections::HashMap;
use std::fmt;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub use ntriples::{
    escape_literal_value, load_ntriples, parse_ntriples, parse_ntriples_line, write_ntriples,
    LineError, ParseMode, ParseOptions, ParseReport, RawTerm,
};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
pub use tsv::{parse_tsv_edges, write_tsv_edges};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermId(pub u32);

impl TermId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermKind {
    Iri,
    Blank,
    Literal,
}

impl TermKind {
    fn code(self) -> u8 {
        match self {
            TermKind::Iri => 0,
            TermKind::Blank => 1,
            TermKind::Literal => 2,
        }
    }

    fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TermKind::Iri),
            1 => Some(TermKind::Blank),
            2 => Some(TermKind::Literal),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: TermId,
    pub predicate: TermId,
    pub object: TermId,
}

/// One adjacency entry: the edge label and the node at the other end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub predicate: TermId,
    pub node: TermId,
}

#[derive(Clone, Debug)]
pub struct Graph {
    terms: Vec<Box<str>>,
    kinds: Vec<TermKind>,
    out_offsets: Vec<usize>,
    out_edges: Vec<Edge>,
    in_offsets: Vec<usize>,
    in_edges: Vec<Edge>,
    type_iri: String,
    type_predicate: Option<TermId>,
    predicate_counts: HashMap<TermId, u64>,
}

/// Result of [`Graph::sample_entities`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntitySample {
    pub entities: Vec<TermId>,
    pub requested: usize,
    pub shortfall: usize,
}

impl Graph {
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn num_triples(&self) -> usize {
        self.out_edges.len()
    }

    pub fn type_iri(&self) -> &str {
        &self.type_iri
    }

    /// The interned `rdf:type` predicate, if any triple uses it.
    pub fn type_predicate(&self) -> Option<TermId> {
        self.type_predicate
    }

    pub fn contains(&self, id: TermId) -> bool {
        id.index() < self.terms.len()
    }

    fn check(&self, id: TermId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownTerm(id.0))
        }
    }

    /// Raw interned string: bare IRI, `_:label`, or the literal's N-Triples
    /// lexical form including quotes and any datatype or language tag.
    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id.index()]
    }

    pub fn kind(&self, id: TermId) -> TermKind {
        self.kinds[id.index()]
    }

    pub fn is_literal(&self, id: TermId) -> bool {
        self.kinds[id.index()] == TermKind::Literal
    }

    pub fn lookup(&self, term: &str) -> Option<TermId> {
        self.terms
            .binary_search_by(|t| t.as_ref().cmp(term))
            .ok()
            .map(|i| TermId(i as u32))
    }

    pub fn require(&self, term: &str) -> Result<TermId> {
        self.lookup(term).ok_or_else(|| Error::UnknownIri(term.to_string()))
    }

    /// Term as it appears in N-Triples syntax.
    pub fn render_ntriples(&self, id: TermId) -> String {
        match self.kind(id) {
            TermKind::Iri => format!("<{}>", self.term(id)),
            TermKind::Blank | TermKind::Literal => self.term(id).to_string(),
        }
    }

    /// Whitespace-free token used in walk corpora. IRIs and blank nodes are
    /// emitted verbatim; spaces inside literals become the `\u0020` escape so
    /// the token stays a valid N-Triples literal.
    pub fn render_token(&self, id: TermId) -> String {
        match self.kind(id) {
            TermKind::Literal => {
                let raw = self.term(id);
                let mut out = String::with_capacity(raw.len());
                for c in raw.chars() {
                    match c {
                        ' ' => out.push_str("\\u0020"),
                        '\t' => out.push_str("\\t"),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        c => out.push(c),
                    }
                }
                out
            }
            _ => self.term(id).to_string(),
        }
    }

    /// Inverse of [`Graph::render_token`].
    pub fn lookup_token(&self, token: &str) -> Option<TermId> {
        let direct = self.lookup(token).filter(|&id| self.render_token(id) == token);
        if direct.is_some() || !token.contains('\\') {
            return direct;
        }
        let raw = token
            .replace("\\u0020", " ")
            .replace("\\t", "\t")
            .replace("\\n", "\n")
            .replace("\\r", "\r");
        self.lookup(&raw).filter(|&id| self.render_token(id) == token)
    }

    #[inline]
    pub(crate) fn out_slice(&self, v: TermId) -> &[Edge] {
        let i = v.index();
        &self.out_edges[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    #[inline]
    pub(crate) fn in_slice(&self, v: TermId) -> &[Edge] {
        let i = v.index();
        &self.in_edges[self.in_offsets[i]..self.in_offsets[i + 1]]
    }

    pub fn out_neighbors(&self, v: TermId) -> Result<&[Edge]> {
        self.check(v)?;
        Ok(self.out_slice(v))
    }

    pub fn in_neighbors(&self, v: TermId) -> Result<&[Edge]> {
        self.check(v)?;
        Ok(self.in_slice(v))
    }

    pub fn out_degree(&self, v: TermId) -> usize {
        self.out_slice(v).len()
    }

    pub fn in_degree(&self, v: TermId) -> usize {
        self.in_slice(v).len()
    }

    /// Outgoing edges of `v` labelled `p`.
    #[inline]
    pub fn out_with(&self, v: TermId, p: TermId) -> &[Edge] {
        predicate_run(self.out_slice(v), p)
    }

    /// Incoming edges of `v` labelled `p`.
    #[inline]
    pub fn in_with(&self, v: TermId, p: TermId) -> &[Edge] {
        predicate_run(self.in_slice(v), p)
    }

    /// Direct `rdf:type` assertions of `v`, sorted.
    pub fn types_of(&self, v: TermId) -> impl Iterator<Item = TermId> + '_ {
        let run = match self.type_predicate {
            Some(tp) if self.contains(v) => self.out_with(v, tp),
            _ => &[],
        };
        run.iter().map(|e| e.node)
    }

    pub fn has_type(&self, v: TermId, t: TermId) -> bool {
        match self.type_predicate {
            Some(tp) => self
                .out_with(v, tp)
                .binary_search_by(|e| e.node.cmp(&t))
                .is_ok(),
            None => false,
        }
    }

    /// Entities with a direct `<s, rdf:type, t>` assertion, sorted by id.
    /// Unknown or uninstantiated types yield an empty list.
    pub fn entities_of_type(&self, t: TermId) -> Vec<TermId> {
        match self.type_predicate {
            Some(tp) if self.contains(t) => self.in_with(t, tp).iter().map(|e| e.node).collect(),
            _ => Vec::new(),
        }
    }

    pub fn type_count(&self, t: TermId) -> usize {
        match self.type_predicate {
            Some(tp) if self.contains(t) => self.in_with(t, tp).len(),
            _ => 0,
        }
    }

    /// Classes that have at least one instance.
    pub fn types(&self) -> Vec<TermId> {
        let Some(tp) = self.type_predicate else {
            return Vec::new();
        };
        (0..self.terms.len() as u32)
            .map(TermId)
            .filter(|&t| !self.in_with(t, tp).is_empty())
            .collect()
    }

    /// Samples `n` distinct instances of `t` uniformly without replacement.
    /// When fewer than `n` exist, every instance is returned and the
    /// shortfall is reported.
    pub fn sample_entities(&self, t: TermId, n: usize, rng: &mut Rng) -> Result<EntitySample> {
        if n == 0 {
            return Err(Error::InvalidParam("sample size must be at least 1".into()));
        }
        let pool = self.entities_of_type(t);
        if pool.is_empty() {
            let name = if self.contains(t) { self.term(t).to_string() } else { t.to_string() };
            return Err(Error::EmptyType(name));
        }
        if pool.len() <= n {
            if pool.len() < n {
                log::warn!(
                    "type {} has {} instances, {} requested",
                    self.term(t),
                    pool.len(),
                    n
                );
            }
            return Ok(EntitySample {
                shortfall: n - pool.len(),
                entities: pool,
                requested: n,
            });
        }
        let entities = index::sample(rng, pool.len(), n)
            .into_iter()
            .map(|i| pool[i])
            .collect();
        Ok(EntitySample { entities, requested: n, shortfall: 0 })
    }

    /// Number of triples per predicate.
    pub fn predicate_frequency(&self, p: TermId) -> u64 {
        self.predicate_counts.get(&p).copied().unwrap_or(0)
    }

    pub fn predicates(&self) -> Vec<TermId> {
        let mut ps: Vec<TermId> = self.predicate_counts.keys().copied().collect();
        ps.sort_unstable();
        ps
    }

    /// Terms that occur in subject or object position.
    pub fn nodes(&self) -> impl Iterator<Item = TermId> + '_ {
        (0..self.terms.len() as u32)
            .map(TermId)
            .filter(|&v| self.out_degree(v) > 0 || self.in_degree(v) > 0)
    }

    /// All triples in `(subject, predicate, object)` id order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        (0..self.terms.len() as u32).flat_map(move |s| {
            self.out_slice(TermId(s)).iter().map(move |e| Triple {
                subject: TermId(s),
                predicate: e.predicate,
                object: e.node,
            })
        })
    }

    pub fn contains_triple(&self, s: TermId, p: TermId, o: TermId) -> bool {
        self.contains(s)
            && self
                .out_with(s, p)
                .binary_search_by(|e| e.node.cmp(&o))
                .is_ok()
    }

    /// SHA-256 over the canonical triple listing. Independent of input order
    /// and of how the graph was loaded.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for t in self.triples() {
            for id in [t.subject, t.predicate, t.object] {
                h.update([self.kind(id).code()]);
                h.update(self.term(id).as_bytes());
                h.update([0u8]);
            }
            h.update(b"\n");
        }
        let digest = h.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Number of distinct entities, i.e. non-literal nodes.
    pub fn num_resources(&self) -> usize {
        self.nodes().filter(|&v| !self.is_literal(v)).count()
    }
}

fn predicate_run(edges: &[Edge], p: TermId) -> &[Edge] {
    let lo = edges.partition_point(|e| e.predicate < p);
    let hi = lo + edges[lo..].partition_point(|e| e.predicate == p);
    &edges[lo..hi]
}

/// Single-writer construction of a [`Graph`].
#[derive(Debug)]
pub struct GraphBuilder {
    ids: HashMap<Box<str>, u32>,
    terms: Vec<Box<str>>,
    kinds: Vec<TermKind>,
    triples: Vec<[u32; 3]>,
    type_iri: String,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::with_type_predicate(RDF_TYPE)
    }

    pub fn with_type_predicate(type_iri: &str) -> Self {
        GraphBuilder {
            ids: HashMap::new(),
            terms: Vec::new(),
            kinds: Vec::new(),
            triples: Vec::new(),
            type_iri: type_iri.to_string(),
        }
    }

    fn intern(&mut self, term: &str, kind: TermKind) -> u32 {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = self.terms.len() as u32;
        let boxed: Box<str> = term.into();
        self.ids.insert(boxed.clone(), id);
        self.terms.push(boxed);
        self.kinds.push(kind);
        id
    }

    /// Adds a triple from raw terms. Literal subjects and non-IRI
    /// predicates are rejected.
    pub fn add(&mut self, s: RawTerm<'_>, p: RawTerm<'_>, o: RawTerm<'_>) -> Result<()> {
        if matches!(s, RawTerm::Literal(_)) {
            return Err(Error::InvalidTriple(format!("literal in subject position: {s}")));
        }
        if !matches!(p, RawTerm::Iri(_)) {
            return Err(Error::InvalidTriple(format!("predicate must be an IRI: {p}")));
        }
        let s = self.intern(s.text(), s.kind());
        let p = self.intern(p.text(), p.kind());
        let o = self.intern(o.text(), o.kind());
        self.triples.push([s, p, o]);
        Ok(())
    }

    /// Convenience for IRI-only triples.
    pub fn add_iris(&mut self, s: &str, p: &str, o: &str) -> &mut Self {
        self.add(RawTerm::Iri(s), RawTerm::Iri(p), RawTerm::Iri(o))
            .expect("IRI triple is always valid");
        self
    }

    pub fn add_type(&mut self, s: &str, t: &str) -> &mut Self {
        let tp = self.type_iri.clone();
        self.add_iris(s, &tp, t)
    }

    pub fn pending_triples(&self) -> usize {
        self.triples.len()
    }

    pub fn build(self) -> Graph {
        build_graph(self.terms, self.kinds, self.triples, self.type_iri).0
    }

    /// Builds and returns the number of duplicate triples that collapsed.
    pub fn build_counting_duplicates(self) -> (Graph, usize) {
        build_graph(self.terms, self.kinds, self.triples, self.type_iri)
    }
}

fn build_graph(
    terms: Vec<Box<str>>,
    kinds: Vec<TermKind>,
    mut triples: Vec<[u32; 3]>,
    type_iri: String,
) -> (Graph, usize) {
    // Canonical ids: rank of each term in byte order.
    let mut order: Vec<u32> = (0..terms.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| terms[a as usize].cmp(&terms[b as usize]));
    let mut remap = vec![0u32; terms.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old as usize] = new as u32;
    }
    let mut terms_sorted: Vec<Option<Box<str>>> = terms.into_iter().map(Some).collect();
    let new_terms: Vec<Box<str>> = order
        .iter()
        .map(|&old| terms_sorted[old as usize].take().expect("each term moved once"))
        .collect();
    let new_kinds: Vec<TermKind> = order.iter().map(|&old| kinds[old as usize]).collect();

    for t in triples.iter_mut() {
        for x in t.iter_mut() {
            *x = remap[*x as usize];
        }
    }
    let before = triples.len();
    triples.sort_unstable();
    triples.dedup();
    let duplicates = before - triples.len();

    let n = new_terms.len();
    let (out_offsets, out_edges) = csr(n, triples.iter().map(|&[s, p, o]| (s, p, o)));
    drop(triples);
    let graph = assemble(new_terms, new_kinds, out_offsets, out_edges, type_iri);
    (graph, duplicates)
}

/// Completes a graph from canonical terms and forward CSR arrays.
pub(crate) fn assemble(
    terms: Vec<Box<str>>,
    kinds: Vec<TermKind>,
    out_offsets: Vec<usize>,
    out_edges: Vec<Edge>,
    type_iri: String,
) -> Graph {
    let n = terms.len();
    let mut reversed: Vec<[u32; 3]> = Vec::with_capacity(out_edges.len());
    for s in 0..n {
        for e in &out_edges[out_offsets[s]..out_offsets[s + 1]] {
            reversed.push([e.node.0, e.predicate.0, s as u32]);
        }
    }
    reversed.sort_unstable();
    let (in_offsets, in_edges) = csr(n, reversed.iter().map(|&[o, p, s]| (o, p, s)));

    let mut predicate_counts: HashMap<TermId, u64> = HashMap::new();
    for e in &out_edges {
        *predicate_counts.entry(e.predicate).or_default() += 1;
    }

    let type_predicate = terms
        .binary_search_by(|t| t.as_ref().cmp(type_iri.as_str()))
        .ok()
        .map(|i| TermId(i as u32))
        .filter(|tp| predicate_counts.contains_key(tp));

    Graph {
        terms,
        kinds,
        out_offsets,
        out_edges,
        in_offsets,
        in_edges,
        type_iri,
        type_predicate,
        predicate_counts,
    }
}

/// Builds CSR arrays from `(source, label, target)` rows sorted by source.
fn csr(n: usize, rows: impl Iterator<Item = (u32, u32, u32)>) -> (Vec<usize>, Vec<Edge>) {
    let mut offsets = vec![0usize; n + 1];
    let mut edges = Vec::new();
    for (src, p, dst) in rows {
        offsets[src as usize + 1] += 1;
        edges.push(Edge { predicate: TermId(p), node: TermId(dst) });
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn small() -> Graph {
        let mut b = GraphBuilder::new();
        b.add_iris("v", "p", "a")
            .add_iris("v", "q", "b")
            .add_iris("v", "p", "a")
            .add_iris("c", "p", "a");
        b.add(RawTerm::Iri("v"), RawTerm::Iri("year"), RawTerm::Literal("\"1989\""))
            .unwrap();
        b.add_type("v", "T1").add_type("v", "T2").add_type("c", "T1");
        b.build()
    }

    #[test]
    fn duplicate_triples_collapse() {
        let g = small();
        let v = g.lookup("v").unwrap();
        let p = g.lookup("p").unwrap();
        assert_eq!(g.out_with(v, p).len(), 1);
        assert_eq!(g.num_triples(), 7);
    }

    #[test]
    fn out_and_in_neighbors() {
        let g = small();
        let v = g.lookup("v").unwrap();
        let a = g.lookup("a").unwrap();
        let b = g.lookup("b").unwrap();
        let got: Vec<(&str, &str)> = g
            .out_neighbors(v)
            .unwrap()
            .iter()
            .filter(|e| !g.is_literal(e.node) && g.term(e.predicate) != RDF_TYPE)
            .map(|e| (g.term(e.predicate), g.term(e.node)))
            .collect();
        assert_eq!(got, vec![("p", "a"), ("q", "b")]);
        assert_eq!(g.in_neighbors(a).unwrap().len(), 2);
        assert_eq!(g.in_neighbors(b).unwrap().len(), 1);
        assert_eq!(g.in_neighbors(v).unwrap().len(), 0);
    }

    #[test]
    fn literal_has_no_out_edges() {
        let g = small();
        let lit = g.lookup("\"1989\"").unwrap();
        assert!(g.is_literal(lit));
        assert!(g.out_neighbors(lit).unwrap().is_empty());
    }

    #[test]
    fn unknown_id_is_distinct_from_empty() {
        let g = small();
        assert!(matches!(g.out_neighbors(TermId(10_000)), Err(Error::UnknownTerm(10_000))));
        assert!(matches!(g.in_neighbors(TermId(10_000)), Err(Error::UnknownTerm(_))));
    }

    #[test]
    fn literal_subject_rejected() {
        let mut b = GraphBuilder::new();
        let err = b.add(RawTerm::Literal("\"x\""), RawTerm::Iri("p"), RawTerm::Iri("o"));
        assert!(err.is_err());
        let err = b.add(RawTerm::Iri("s"), RawTerm::Blank("_:p"), RawTerm::Iri("o"));
        assert!(err.is_err());
    }

    #[test]
    fn type_index() {
        let g = small();
        let t1 = g.lookup("T1").unwrap();
        let t2 = g.lookup("T2").unwrap();
        let v = g.lookup("v").unwrap();
        assert_eq!(g.entities_of_type(t1).len(), 2);
        assert_eq!(g.entities_of_type(t2), vec![v]);
        assert!(g.entities_of_type(g.lookup("a").unwrap()).is_empty());
        assert!(g.entities_of_type(TermId(9999)).is_empty());
        assert_eq!(g.types_of(v).collect::<Vec<_>>(), vec![t1, t2]);
        assert!(g.has_type(v, t2));
    }

    #[test]
    fn ids_are_canonical() {
        let mut b1 = GraphBuilder::new();
        b1.add_iris("x", "p", "y").add_iris("a", "q", "b");
        let mut b2 = GraphBuilder::new();
        b2.add_iris("a", "q", "b").add_iris("x", "p", "y");
        let (g1, g2) = (b1.build(), b2.build());
        assert_eq!(g1.lookup("x"), g2.lookup("x"));
        assert_eq!(g1.checksum(), g2.checksum());
    }

    #[test]
    fn sampling() {
        let g = small();
        let t1 = g.lookup("T1").unwrap();
        let s = g.sample_entities(t1, 2, &mut rng_from_seed(1)).unwrap();
        assert_eq!(s.entities.len(), 2);
        let s = g.sample_entities(t1, 5, &mut rng_from_seed(1)).unwrap();
        assert_eq!(s.shortfall, 3);
        let a = g.lookup("a").unwrap();
        assert!(matches!(g.sample_entities(a, 1, &mut rng_from_seed(1)), Err(Error::EmptyType(_))));
        assert!(g.sample_entities(t1, 0, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn custom_type_predicate() {
        let mut b = GraphBuilder::with_type_predicate("isa");
        b.add_iris("x", "isa", "C").add_iris("x", RDF_TYPE, "D");
        let g = b.build();
        let c = g.lookup("C").unwrap();
        let d = g.lookup("D").unwrap();
        assert_eq!(g.entities_of_type(c).len(), 1);
        assert!(g.entities_of_type(d).is_empty());
    }
}
