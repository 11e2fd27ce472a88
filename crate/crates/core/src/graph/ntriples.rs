//! Line-oriented N-Triples reader and writer.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphBuilder, TermKind, RDF_TYPE};
use crate::error::{Error, Result};

/// A term as written in the source, before interning.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RawTerm<'a> {
    /// IRI without angle brackets.
    Iri(&'a str),
    /// Blank node including the `_:` prefix.
    Blank(&'a str),
    /// Full lexical form: quoted value plus optional `@lang` or `^^<dt>`.
    Literal(&'a str),
}

impl<'a> RawTerm<'a> {
    pub fn text(&self) -> &'a str {
        match *self {
            RawTerm::Iri(s) | RawTerm::Blank(s) | RawTerm::Literal(s) => s,
        }
    }

    pub fn kind(&self) -> TermKind {
        match self {
            RawTerm::Iri(_) => TermKind::Iri,
            RawTerm::Blank(_) => TermKind::Blank,
            RawTerm::Literal(_) => TermKind::Literal,
        }
    }
}

impl fmt::Display for RawTerm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawTerm::Iri(s) => write!(f, "<{s}>"),
            RawTerm::Blank(s) | RawTerm::Literal(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Malformed lines are recorded and skipped.
    #[default]
    Lenient,
    /// The first malformed line aborts the parse.
    Strict,
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub mode: ParseMode,
    pub type_iri: String,
    /// Cap on the number of line errors kept in the report; all are counted.
    pub max_recorded_errors: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            mode: ParseMode::Lenient,
            type_iri: RDF_TYPE.to_string(),
            max_recorded_errors: 100,
        }
    }
}

impl ParseOptions {
    pub fn strict() -> Self {
        ParseOptions { mode: ParseMode::Strict, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub lines: u64,
    /// Well-formed triple lines, before deduplication.
    pub parsed: u64,
    pub duplicates: u64,
    pub skipped: u64,
    pub errors: Vec<LineError>,
}

/// Parses one line. Returns `Ok(None)` for blank and comment lines.
pub fn parse_ntriples_line(line: &str) -> std::result::Result<Option<[RawTerm<'_>; 3]>, String> {
    let mut cur = Cursor { s: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => RawTerm::Iri(cur.iri()?),
        Some('_') => RawTerm::Blank(cur.blank()?),
        _ => return Err(format!("bad subject at column {}", cur.pos + 1)),
    };
    cur.require_ws()?;
    let predicate = match cur.peek() {
        Some('<') => RawTerm::Iri(cur.iri()?),
        _ => return Err(format!("predicate must be an IRI at column {}", cur.pos + 1)),
    };
    cur.require_ws()?;
    let object = match cur.peek() {
        Some('<') => RawTerm::Iri(cur.iri()?),
        Some('_') => RawTerm::Blank(cur.blank()?),
        Some('"') => RawTerm::Literal(cur.literal()?),
        _ => return Err(format!("bad object at column {}", cur.pos + 1)),
    };
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err("missing terminating '.'".into());
    }
    cur.bump();
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err(format!("trailing content at column {}", cur.pos + 1));
    }
    Ok(Some([subject, predicate, object]))
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.s[self.pos..].chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.pos += c.len_utf8();
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            self.bump();
        }
    }

    fn require_ws(&mut self) -> std::result::Result<(), String> {
        let start = self.pos;
        self.skip_ws();
        if self.pos == start {
            Err(format!("expected whitespace at column {}", self.pos + 1))
        } else {
            Ok(())
        }
    }

    fn iri(&mut self) -> std::result::Result<&'a str, String> {
        self.bump(); // '<'
        let start = self.pos;
        loop {
            match self.peek() {
                Some('>') => {
                    let iri = &self.s[start..self.pos];
                    self.bump();
                    if iri.is_empty() {
                        return Err("empty IRI".into());
                    }
                    return Ok(iri);
                }
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(format!("invalid character {c:?} in IRI"));
                }
                Some(_) => self.bump(),
                None => return Err("unterminated IRI".into()),
            }
        }
    }

    fn blank(&mut self) -> std::result::Result<&'a str, String> {
        let start = self.pos;
        if !self.s[self.pos..].starts_with("_:") {
            return Err("expected blank node".into());
        }
        self.pos += 2;
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':') {
                self.bump();
            } else {
                break;
            }
        }
        // A trailing '.' belongs to the statement terminator.
        while self.s[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        if self.pos - start <= 2 {
            return Err("empty blank node label".into());
        }
        Ok(&self.s[start..self.pos])
    }

    fn literal(&mut self) -> std::result::Result<&'a str, String> {
        let start = self.pos;
        self.bump(); // opening quote
        loop {
            match self.peek() {
                Some('\\') => {
                    self.bump();
                    match self.peek() {
                        Some('t' | 'b' | 'n' | 'r' | 'f' | '"' | '\'' | '\\') => self.bump(),
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err("invalid escape in literal".into()),
                    }
                }
                Some('"') => {
                    self.bump();
                    break;
                }
                Some('\n' | '\r') | None => return Err("unterminated literal".into()),
                Some(_) => self.bump(),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let tag_start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        self.bump();
                    } else {
                        break;
                    }
                }
                if self.pos == tag_start {
                    return Err("empty language tag".into());
                }
            }
            Some('^') => {
                if !self.s[self.pos..].starts_with("^^<") {
                    return Err("malformed datatype".into());
                }
                self.pos += 2;
                self.iri()?;
            }
            _ => {}
        }
        Ok(&self.s[start..self.pos])
    }

    fn hex_escape(&mut self, digits: usize) -> std::result::Result<(), String> {
        self.bump(); // 'u' or 'U'
        for _ in 0..digits {
            match self.peek() {
                Some(c) if c.is_ascii_hexdigit() => self.bump(),
                _ => return Err("invalid unicode escape".into()),
            }
        }
        Ok(())
    }
}

/// Parses an N-Triples stream into a graph. Duplicate triples collapse.
pub fn parse_ntriples<R: BufRead>(mut reader: R, opts: &ParseOptions) -> Result<(Graph, ParseReport)> {
    let mut builder = GraphBuilder::with_type_predicate(&opts.type_iri);
    let mut report = ParseReport::default();
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        report.lines += 1;
        let line_no = report.lines;
        let outcome = match std::str::from_utf8(&buf) {
            Ok(line) => parse_ntriples_line(line).and_then(|parsed| match parsed {
                Some([s, p, o]) => builder.add(s, p, o).map(|_| true).map_err(|e| e.to_string()),
                None => Ok(false),
            }),
            Err(_) => Err("invalid UTF-8".to_string()),
        };
        match outcome {
            Ok(true) => report.parsed += 1,
            Ok(false) => {}
            Err(message) => {
                if opts.mode == ParseMode::Strict {
                    return Err(Error::Parse { line: line_no, message });
                }
                report.skipped += 1;
                if report.errors.len() < opts.max_recorded_errors {
                    report.errors.push(LineError { line: line_no, message });
                }
            }
        }
    }
    let (graph, dups) = builder.build_counting_duplicates();
    report.duplicates = dups as u64;
    if report.skipped > 0 {
        log::warn!("skipped {} malformed line(s)", report.skipped);
    }
    Ok((graph, report))
}

/// Opens a file, transparently decompressing `.gz`.
pub(crate) fn open_maybe_gz(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let gz = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    let inner: Box<dyn Read> = if gz { Box::new(MultiGzDecoder::new(file)) } else { Box::new(file) };
    Ok(Box::new(BufReader::with_capacity(1 << 20, inner)))
}

pub fn load_ntriples(path: &Path, opts: &ParseOptions) -> Result<(Graph, ParseReport)> {
    parse_ntriples(open_maybe_gz(path)?, opts)
}

/// Writes every triple, one per line, in canonical id order.
pub fn write_ntriples<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    for t in g.triples() {
        writeln!(
            out,
            "{} {} {} .",
            g.render_ntriples(t.subject),
            g.render_ntriples(t.predicate),
            g.render_ntriples(t.object)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Quotes and escapes a plain string as an N-Triples literal.
pub fn escape_literal_value(value: &str) -> String {
    let mut out = String::with_capacity(value.len() + 2);
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
