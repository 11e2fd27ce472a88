//! Seeded synthetic knowledge graphs with known answers.
//!
//! - [`chain`]: `f -p-> x -q-> y`, the smallest graph with a depth-2 template.
//! - [`planted_specificity`]: hubs shared by two entity types next to
//!   type-specific relations. Every node reachable through a template has
//!   the same incoming composition, and all in-neighbors of a node share one
//!   in-degree, so the walk estimator and the exact path-count form agree up
//!   to sampling noise.
//! - [`table1`]: a director chain that is specific to films and a hub chain
//!   through categories that is far more frequent.
//! - [`franchise`]: films grouped into franchises through series, character
//!   and director links, mixed with distractor films and books.
//! - [`dense_same_type`]: a complete digraph over nodes of a single type.

use std::collections::{BTreeMap, BTreeSet};

use kgspec::eval::GroundTruth;
use kgspec::graph::{escape_literal_value, RawTerm};
use kgspec::rng::{key_of_str, stream, Rng};
use kgspec::{Graph, GraphBuilder};
use rand::seq::SliceRandom;
use rand::Rng as _;

pub const NS: &str = "http://synth.example/";

pub fn class(name: &str) -> String {
    format!("{NS}class/{name}")
}

pub fn prop(name: &str) -> String {
    format!("{NS}prop/{name}")
}

pub fn node(role: &str, i: usize) -> String {
    format!("{NS}{role}/{i}")
}

pub struct Synth {
    pub graph: Graph,
    pub type_iri: String,
    pub truth: Option<GroundTruth>,
}

struct Kg {
    b: GraphBuilder,
    rng: Rng,
}

impl Kg {
    fn new(seed: u64, name: &str) -> Self {
        Kg { b: GraphBuilder::new(), rng: stream(seed, key_of_str(name)) }
    }

    fn entities(&mut self, role: &str, n: usize, class_name: &str) -> Vec<String> {
        let c = class(class_name);
        (0..n)
            .map(|i| {
                let iri = node(role, i);
                self.b.add_type(&iri, &c);
                iri
            })
            .collect()
    }

    fn edge(&mut self, s: &str, p: &str, o: &str) {
        self.b.add_iris(s, &prop(p), o);
    }

    fn literal(&mut self, s: &str, p: &str, lexical: &str) {
        let p = prop(p);
        self.b
            .add(RawTerm::Iri(s), RawTerm::Iri(&p), RawTerm::Literal(lexical))
            .expect("well-formed synthetic literal");
    }

    /// `per_source` edges from every source, spread so that every target
    /// receives the same number.
    fn regular(&mut self, sources: &[String], p: &str, targets: &[String], per_source: usize) {
        assert!(per_source <= targets.len());
        assert_eq!((sources.len() * per_source) % targets.len(), 0, "{p}: uneven fan-in");
        let mut src: Vec<&String> = sources.iter().collect();
        let mut tgt: Vec<&String> = targets.iter().collect();
        src.shuffle(&mut self.rng);
        tgt.shuffle(&mut self.rng);
        for (i, s) in src.iter().enumerate() {
            for r in 0..per_source {
                let t = tgt[(i * per_source + r) % tgt.len()];
                let (s, t) = (s.to_string(), t.to_string());
                self.edge(&s, p, &t);
            }
        }
    }

    fn pick<'a>(&mut self, pool: &'a [String]) -> &'a str {
        &pool[self.rng.gen_range(0..pool.len())]
    }

    fn pick_distinct<'a>(&mut self, pool: &'a [String], k: usize) -> Vec<&'a str> {
        pool.choose_multiple(&mut self.rng, k).map(String::as_str).collect()
    }
}

/// `f -p-> x -q-> y` with `f` typed `T`.
pub fn chain() -> Synth {
    let mut b = GraphBuilder::new();
    let (f, x, y) = (node("f", 0), node("x", 0), node("y", 0));
    b.add_iris(&f, &prop("p"), &x).add_iris(&x, &prop("q"), &y).add_type(&f, &class("T"));
    Synth { graph: b.build(), type_iri: class("T"), truth: None }
}

/// About `350 * scale + 40` nodes; the target type is `Film`. Hub fan-in
/// ratios vary with `seed`.
pub fn planted_specificity(scale: usize, seed: u64) -> Synth {
    assert!(scale >= 1);
    let s = scale;
    let mut kg = Kg::new(seed, "planted-specificity");
    let films = kg.entities("film", 60 * s, "Film");
    let books = kg.entities("book", 40 * s, "Book");
    let directors = kg.entities("director", 60 * s, "Person");
    let writers = kg.entities("writer", 40 * s, "Person");
    let studios = kg.entities("studio", 6 * s, "Company");
    let publishers = kg.entities("publisher", 4 * s, "Company");
    let categories = kg.entities("category", 20 * s, "Category");
    let supercats = kg.entities("supercategory", 2 * s, "Category");
    let countries = kg.entities("country", 5 * s, "Country");
    let cities = kg.entities("city", 10 * s, "City");
    let genres = kg.entities("genre", 10, "Genre");
    let years: Vec<String> = (0..20).map(|i| format!("\"{}\"^^<http://www.w3.org/2001/XMLSchema#gYear>", 1980 + i)).collect();

    let film_subjects = kg.rng.gen_range(1..=3);
    let book_subjects = kg.rng.gen_range(1..=3);

    kg.regular(&studios, "produced", &films, 10);
    kg.regular(&publishers, "published", &books, 10);
    kg.regular(&films, "director", &directors, 1);
    kg.regular(&books, "author", &writers, 1);
    kg.regular(&films, "subject", &categories, film_subjects);
    kg.regular(&books, "subject", &categories, book_subjects);
    kg.regular(&categories, "broader", &supercats, 1);
    kg.regular(&films, "country", &countries, 1);
    kg.regular(&books, "country", &countries, 1);
    kg.regular(&directors, "birthPlace", &cities, 1);
    kg.regular(&writers, "birthPlace", &cities, 1);
    kg.regular(&films, "genre", &genres, 1);
    kg.regular(&books, "genre", &genres, 1);

    let year_of = |kg: &mut Kg, items: &[String]| {
        let mut order: Vec<&String> = items.iter().collect();
        order.shuffle(&mut kg.rng);
        for (i, it) in order.into_iter().enumerate() {
            kg.literal(it, "year", &years[i % years.len()]);
        }
    };
    year_of(&mut kg, &films);
    year_of(&mut kg, &books);

    for (i, f) in films.iter().enumerate() {
        kg.literal(f, "title", &format!("{}@en", escape_literal_value(&format!("Film {i}"))));
    }

    // tag_i pools: every film contributes 6 per pool node, a subset of
    // books contributes i + 1.
    for i in 0..4 {
        let pool = kg.entities(&format!("tag{i}"), 10 * s, "Tag");
        kg.regular(&films, &format!("tag{i}"), &pool, 1);
        let tagged: Vec<String> = books[..10 * s * (i + 1)].to_vec();
        kg.regular(&tagged, &format!("tag{i}"), &pool, 1);
    }

    Synth { graph: kg.b.build(), type_iri: class("Film"), truth: None }
}

/// Films, their directors and three depth-2 relations out of the director:
/// `knownFor` reaches styles only directors of films have, `subject` reaches
/// categories shared with many other people, `birthPlace` reaches a few
/// cities. The `subject` chain has 60 times the paths of `knownFor`.
pub fn table1() -> Synth {
    let mut kg = Kg::new(0, "table1");
    let films = kg.entities("film", 40, "Film");
    let directors = kg.entities("director", 10, "Person");
    let styles = kg.entities("style", 5, "Style");
    let people = kg.entities("person", 300, "Person");
    let books = kg.entities("book", 300, "Book");
    let categories = kg.entities("category", 30, "Category");
    let cities = kg.entities("city", 5, "City");

    for (i, f) in films.iter().enumerate() {
        kg.edge(f, "director", &directors[i % directors.len()]);
    }
    for (i, d) in directors.iter().enumerate() {
        if i < styles.len() {
            kg.edge(d, "knownFor", &styles[i]);
        }
        for c in &categories {
            kg.edge(d, "subject", c);
        }
        kg.edge(d, "birthPlace", &cities[i % cities.len()]);
    }
    for (i, p) in people.iter().enumerate() {
        kg.edge(&books[i], "author", p);
        for j in 0..10 {
            kg.edge(p, "subject", &categories[(i * 7 + j * 3) % categories.len()]);
        }
        kg.edge(p, "birthPlace", &cities[i % cities.len()]);
    }
    Synth { graph: kg.b.build(), type_iri: class("Film"), truth: None }
}

#[derive(Clone, Copy, Debug)]
pub struct FranchiseParams {
    pub franchises: usize,
    pub films_per: usize,
    pub distractor_films: usize,
    pub books: usize,
    pub seed: u64,
}

impl Default for FranchiseParams {
    fn default() -> Self {
        FranchiseParams { franchises: 5, films_per: 4, distractor_films: 30, books: 120, seed: 0 }
    }
}

/// Franchise films share a series, a director and characters; every film
/// and book also draws subjects, a country, a genre and a year from shared
/// pools. The ground truth maps each franchise film to the other films of
/// its franchise.
pub fn franchise(p: FranchiseParams) -> Synth {
    let mut kg = Kg::new(p.seed, "franchise");
    let n_films = p.franchises * p.films_per;
    let films = kg.entities("film", n_films + p.distractor_films, "Film");
    let books = kg.entities("book", p.books, "Book");
    let categories = kg.entities("category", 10, "Category");
    let countries = kg.entities("country", 3, "Country");
    let genres = kg.entities("genre", 5, "Genre");
    let cities = kg.entities("city", 6, "City");
    let writers = kg.entities("writer", p.books.div_ceil(3).max(1), "Person");
    let years: Vec<String> = (0..10).map(|i| format!("\"{}\"^^<http://www.w3.org/2001/XMLSchema#gYear>", 2000 + i)).collect();

    let mut truth = BTreeMap::new();
    let mut persons: Vec<String> = Vec::new();
    for f in 0..p.franchises {
        let members = &films[f * p.films_per..(f + 1) * p.films_per];
        let series = node("series", f);
        kg.b.add_type(&series, &class("Series"));
        let creator = node("creator", f);
        let director = node("director", f);
        kg.edge(&series, "createdBy", &creator);
        persons.push(creator);
        persons.push(director.clone());
        let chars: Vec<String> = (0..3).map(|c| node("character", f * 3 + c)).collect();
        for (c, ch) in chars.iter().enumerate() {
            kg.b.add_type(ch, &class("Character"));
            let actor = node("actor", f * 3 + c);
            kg.edge(ch, "portrayedBy", &actor);
            persons.push(actor);
        }
        for (j, film) in members.iter().enumerate() {
            kg.edge(film, "partOfSeries", &series);
            kg.edge(film, "director", &director);
            kg.edge(film, "character", &chars[j % 3]);
            kg.edge(film, "character", &chars[(j + 1) % 3]);
            let others: BTreeSet<String> = members.iter().filter(|m| *m != film).cloned().collect();
            truth.insert(film.clone(), others);
        }
    }
    for (i, film) in films[n_films..].iter().enumerate() {
        let director = node("director", p.franchises + i / 2);
        kg.edge(film, "director", &director);
        if i % 2 == 0 {
            persons.push(director);
        }
        if i % 3 == 0 {
            let series = node("series", p.franchises + i);
            kg.b.add_type(&series, &class("Series"));
            kg.edge(film, "partOfSeries", &series);
        }
    }
    for (i, book) in books.iter().enumerate() {
        kg.edge(book, "author", &writers[i / 3]);
    }
    persons.extend(writers.iter().cloned());
    for person in &persons {
        kg.b.add_type(person, &class("Person"));
        let city = kg.pick(&cities).to_string();
        kg.edge(person, "birthPlace", &city);
    }
    for item in films.iter().chain(&books) {
        for c in kg.pick_distinct(&categories, 2).into_iter().map(str::to_string).collect::<Vec<_>>() {
            kg.edge(item, "subject", &c);
        }
        let country = kg.pick(&countries).to_string();
        kg.edge(item, "country", &country);
        let genre = kg.pick(&genres).to_string();
        kg.edge(item, "genre", &genre);
        let year = kg.pick(&years).to_string();
        kg.literal(item, "year", &year);
    }
    Synth { graph: kg.b.build(), type_iri: class("Film"), truth: Some(GroundTruth(truth)) }
}

/// Complete digraph over `n` nodes that all share one type.
pub fn dense_same_type(n: usize) -> Synth {
    let mut kg = Kg::new(0, "dense");
    let nodes = kg.entities("thing", n, "Thing");
    for a in &nodes {
        for b in &nodes {
            if a != b {
                kg.edge(a, "link", b);
            }
        }
    }
    // typed class nodes keep rdf:type hops from ending a walk early
    kg.b.add_type(&class("Thing"), &class("Class"));
    kg.b.add_type(&class("Class"), &class("Class"));
    Synth { graph: kg.b.build(), type_iri: class("Thing"), truth: None }
}
