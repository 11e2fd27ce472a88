//! Binary graph snapshot.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "KGSPSNAP"
//! version      u32      currently 1
//! type_iri     u32 length + UTF-8 bytes
//! n_terms      u64
//! terms        n_terms × (kind u8, length u32, UTF-8 bytes), in id order
//! n_triples    u64
//! out_offsets  (n_terms + 1) × u64
//! out_edges    n_triples × (predicate u32, object u32)
//! checksum     64 ASCII hex bytes, the graph checksum
//! ```
//!
//! Reverse adjacency and the type index are rebuilt on load.

use std::io::{Read, Write};

use super::{assemble, Edge, Graph, TermId, TermKind};
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"KGSPSNAP";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    write_bytes(&mut out, g.type_iri.as_bytes())?;
    out.write_all(&(g.terms.len() as u64).to_le_bytes())?;
    for (term, kind) in g.terms.iter().zip(&g.kinds) {
        out.write_all(&[kind.code()])?;
        write_bytes(&mut out, term.as_bytes())?;
    }
    out.write_all(&(g.out_edges.len() as u64).to_le_bytes())?;
    for &off in &g.out_offsets {
        out.write_all(&(off as u64).to_le_bytes())?;
    }
    for e in &g.out_edges {
        out.write_all(&e.predicate.0.to_le_bytes())?;
        out.write_all(&e.node.0.to_le_bytes())?;
    }
    out.write_all(g.checksum().as_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<Graph> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let type_iri = read_string(&mut input)?;
    let n_terms = read_u64(&mut input)? as usize;
    let mut terms: Vec<Box<str>> = Vec::with_capacity(n_terms.min(1 << 24));
    let mut kinds = Vec::with_capacity(n_terms.min(1 << 24));
    for _ in 0..n_terms {
        let mut code = [0u8; 1];
        input.read_exact(&mut code)?;
        let kind = TermKind::from_code(code[0])
            .ok_or_else(|| Error::Snapshot(format!("bad term kind {}", code[0])))?;
        let term = read_string(&mut input)?;
        if terms.last().is_some_and(|prev| prev.as_ref() >= term.as_str()) {
            return Err(Error::Snapshot("term table not in canonical order".into()));
        }
        terms.push(term.into_boxed_str());
        kinds.push(kind);
    }
    let n_triples = read_u64(&mut input)? as usize;
    let mut out_offsets = Vec::with_capacity(n_terms + 1);
    for _ in 0..=n_terms {
        out_offsets.push(read_u64(&mut input)? as usize);
    }
    if out_offsets.first() != Some(&0)
        || out_offsets.last() != Some(&n_triples)
        || out_offsets.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::Snapshot("inconsistent offsets".into()));
    }
    let mut out_edges = Vec::with_capacity(n_triples.min(1 << 26));
    for _ in 0..n_triples {
        let p = read_u32(&mut input)?;
        let o = read_u32(&mut input)?;
        if p as usize >= n_terms || o as usize >= n_terms {
            return Err(Error::Snapshot("edge refers to unknown term".into()));
        }
        out_edges.push(Edge { predicate: TermId(p), node: TermId(o) });
    }
    let mut stored = [0u8; 64];
    input.read_exact(&mut stored)?;
    let g = assemble(terms, kinds, out_offsets, out_edges, type_iri);
    if g.checksum().as_bytes() != stored {
        return Err(Error::Snapshot("checksum mismatch".into()));
    }
    Ok(g)
}

fn write_bytes<W: Write>(out: &mut W, bytes: &[u8]) -> Result<()> {
    out.write_all(&(bytes.len() as u32).to_le_bytes())?;
    out.write_all(bytes)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_string<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::Snapshot("invalid UTF-8 in term table".into()))
}
