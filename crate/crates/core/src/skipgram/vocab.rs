use std::collections::HashMap;

/// Retained tokens indexed by descending count, ties lexicographic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    pub min_count: u64,
}

impl Vocabulary {
    /// Builds from explicit `(token, count)` pairs, dropping counts below
    /// `min_count`.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>, min_count: u64) -> Self {
        let mut kept: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c >= min_count.max(1)).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (tokens, counts): (Vec<String>, Vec<u64>) = kept.into_iter().unzip();
        let mut v = Vocabulary { tokens, counts, index: HashMap::new(), min_count };
        v.reindex();
        v
    }

    /// Replaces the contents with `tokens` in the given order, count 1 each.
    pub(crate) fn set_ordered(&mut self, tokens: Vec<String>) -> crate::error::Result<()> {
        self.counts = vec![1; tokens.len()];
        self.tokens = tokens;
        self.reindex();
        if self.index.len() != self.tokens.len() {
            return Err(crate::error::Error::Model("duplicate token in model".into()));
        }
        Ok(())
    }

    pub(crate) fn reindex(&mut self) {
        self.index = self.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).map(|&i| i as usize)
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Maps a sentence to indices, dropping out-of-vocabulary tokens.
    pub fn encode<S: AsRef<str>>(&self, sentence: &[S]) -> Vec<u32> {
        sentence.iter().filter_map(|t| self.index.get(t.as_ref()).copied()).collect()
    }
}

/// Counts every token of every sentence and keeps those with at least
/// `min_count` occurrences.
pub fn build_vocab<S: AsRef<str>>(sentences: &[Vec<S>], min_count: u64) -> Vocabulary {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for t in s {
            *counts.entry(t.as_ref()).or_default() += 1;
        }
    }
    Vocabulary::from_counts(counts.into_iter().map(|(t, c)| (t.to_string(), c)), min_count)
}
