use std::io::{BufRead, Write};

use super::{EmbeddingModel, TrainConfig, Vocabulary};
use crate::error::{Error, Result};

/// Reads a corpus file: one sentence per line, tokens separated by single
/// spaces, `#` lines skipped.
pub fn read_sentences<R: BufRead>(reader: R) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.starts_with('#') {
            continue;
        }
        let tokens: Vec<String> = line.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect();
        if !tokens.is_empty() {
            out.push(tokens);
        }
    }
    Ok(out)
}

/// word2vec text format: `|V| dim`, then one `token v1 … vdim` line per
/// input vector. Values are written in shortest round-trip form.
pub fn write_word2vec<W: Write>(model: &EmbeddingModel, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", model.len(), model.dim)?;
    let mut line = String::new();
    for i in 0..model.len() {
        line.clear();
        line.push_str(model.vocab.token(i));
        for x in model.row(i) {
            line.push(' ');
            line.push_str(&x.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads input vectors back. Output vectors are not part of the format;
/// the returned model has none. Counts are unknown, so the vocabulary keeps
/// the file order with count 1 for every token.
pub fn read_word2vec<R: BufRead>(reader: R) -> Result<EmbeddingModel> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Model("empty model file".into()))??;
    let mut it = header.split_whitespace().map(str::parse::<usize>);
    let (n, dim) = match (it.next(), it.next(), it.next()) {
        (Some(Ok(n)), Some(Ok(d)), None) if d > 0 => (n, d),
        _ => return Err(Error::Model(format!("bad header {header:?}"))),
    };
    let mut tokens = Vec::with_capacity(n);
    let mut input = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |m: String| Error::Parse { line: i as u64 + 2, message: m };
        let mut parts = line.trim_end().split(' ');
        let token = parts.next().unwrap_or_default().to_string();
        let before = input.len();
        for p in parts {
            let x: f64 = p.parse().map_err(|_| bad(format!("bad value {p:?}")))?;
            if !x.is_finite() {
                return Err(bad("non-finite value".into()));
            }
            input.push(x);
        }
        if input.len() - before != dim {
            return Err(bad(format!("expected {dim} values, found {}", input.len() - before)));
        }
        tokens.push(token);
    }
    if tokens.len() != n {
        return Err(Error::Model(format!("header says {n} vectors, found {}", tokens.len())));
    }
    let mut vocab = Vocabulary::from_counts(std::iter::empty(), 1);
    vocab.set_ordered(tokens)?;
    Ok(EmbeddingModel {
        vocab,
        dim,
        input,
        output: Vec::new(),
        config: TrainConfig { dim, ..Default::default() },
    })
}
