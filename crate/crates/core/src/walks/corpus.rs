use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::Walk;
use crate::error::{Error, Result};
use crate::graph::{Graph, TermId};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityStats {
    pub entity: TermId,
    pub depth: usize,
    pub attempts: usize,
    pub walks: usize,
    pub distinct: usize,
    pub dead_ends: usize,
    pub pruned: usize,
    pub millis: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WalkCorpus {
    pub walks: Vec<Walk>,
    pub entities: Vec<EntityStats>,
}

impl WalkCorpus {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    pub fn append(&mut self, mut other: WalkCorpus) {
        self.walks.append(&mut other.walks);
        self.entities.append(&mut other.entities);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub walks: usize,
    pub distinct: usize,
    pub attempts: usize,
    pub mean_depth: f64,
    pub millis: f64,
}

pub(crate) fn count_distinct(walks: &[Walk]) -> usize {
    walks.iter().map(|w| w.tokens.as_slice()).collect::<HashSet<_>>().len()
}

pub fn corpus_stats(corpus: &WalkCorpus) -> CorpusStats {
    if corpus.walks.is_empty() && corpus.entities.is_empty() {
        return CorpusStats::default();
    }
    let walks = corpus.walks.len();
    let mean_depth = if walks == 0 {
        0.0
    } else {
        corpus.walks.iter().map(Walk::depth).sum::<usize>() as f64 / walks as f64
    };
    CorpusStats {
        walks,
        distinct: count_distinct(&corpus.walks),
        attempts: corpus.entities.iter().map(|e| e.attempts).sum(),
        mean_depth,
        millis: corpus.entities.iter().map(|e| e.millis).sum(),
    }
}

/// One walk per line, tokens space-separated, after a single `#` header line.
pub fn write_corpus<W: Write>(g: &Graph, walks: &[Walk], header: &str, mut out: W) -> Result<()> {
    writeln!(out, "# {}", header.replace('\n', " "))?;
    let mut line = String::new();
    for w in walks {
        line.clear();
        for (i, &t) in w.tokens.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&g.render_token(t));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a corpus file back into walks over `g`.
pub fn read_corpus<R: BufRead>(g: &Graph, reader: R) -> Result<Vec<Walk>> {
    let mut walks = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let tokens = line
            .split(' ')
            .map(|tok| {
                g.lookup_token(tok).ok_or_else(|| Error::Parse {
                    line: i as u64 + 1,
                    message: format!("token {tok:?} not in graph"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        walks.push(Walk { tokens });
    }
    Ok(walks)
}

pub fn write_stats_csv<W: Write>(g: &Graph, stats: &[EntityStats], mut out: W) -> Result<()> {
    writeln!(out, "entity,depth,attempts,walks,distinct,millis")?;
    for s in stats {
        let name = g.term(s.entity);
        let name = if name.contains([',', '"']) {
            format!("\"{}\"", name.replace('"', "\"\""))
        } else {
            name.to_string()
        };
        writeln!(out, "{},{},{},{},{},{:.3}", name, s.depth, s.attempts, s.walks, s.distinct, s.millis)?;
    }
    out.flush()?;
    Ok(())
}
