//! TSV edge lists: `subject<TAB>predicate<TAB>object<TAB>is_literal`.
//!
//! Subjects starting with `_:` are blank nodes. A literal object that is not
//! already in quoted N-Triples form is quoted and escaped on read. A first
//! row whose last column is not a boolean is treated as a header.

use std::io::{BufRead, Write};

use super::{escape_literal_value, Graph, GraphBuilder, RawTerm, TermKind};
use crate::error::{Error, Result};

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "true" | "TRUE" | "True" => Some(true),
        "0" | "false" | "FALSE" | "False" => Some(false),
        _ => None,
    }
}

fn resource(s: &str) -> RawTerm<'_> {
    if s.starts_with("_:") {
        RawTerm::Blank(s)
    } else {
        RawTerm::Iri(s)
    }
}

pub fn parse_tsv_edges<R: BufRead>(reader: R, type_iri: &str) -> Result<Graph> {
    let mut b = GraphBuilder::with_type_predicate(type_iri);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i as u64 + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::Parse { line: line_no, message: "expected 4 tab-separated columns".into() });
        }
        let Some(is_lit) = parse_bool(cols[3]) else {
            if line_no == 1 {
                continue;
            }
            return Err(Error::Parse { line: line_no, message: format!("bad is_literal value {:?}", cols[3]) });
        };
        let quoted;
        let object = if is_lit {
            if cols[2].starts_with('"') {
                RawTerm::Literal(cols[2])
            } else {
                quoted = escape_literal_value(cols[2]);
                RawTerm::Literal(&quoted)
            }
        } else {
            resource(cols[2])
        };
        b.add(resource(cols[0]), RawTerm::Iri(cols[1]), object)
            .map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
    }
    Ok(b.build())
}

pub fn write_tsv_edges<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "subject\tpredicate\tobject\tis_literal")?;
    for t in g.triples() {
        let lit = g.kind(t.object) == TermKind::Literal;
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            g.term(t.subject),
            g.term(t.predicate),
            g.term(t.object),
            u8::from(lit)
        )?;
    }
    out.flush()?;
    Ok(())
}
