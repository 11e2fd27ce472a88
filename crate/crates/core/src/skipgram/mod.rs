//! Skip-gram with negative sampling over walk corpora.
//!
//! The center token's input vector `v_c` is trained against the output
//! vectors `u` of its context and of sampled negatives. All arithmetic is
//! `f64`; the sigmoid input is clamped to `[-SIGMOID_CLAMP, SIGMOID_CLAMP]`.

mod io;
mod vocab;

use std::sync::atomic::{AtomicU64, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{key_of_str, stream, Rng};

pub use io::{read_sentences, read_word2vec, write_word2vec};
pub use vocab::{build_vocab, Vocabulary};

pub const SIGMOID_CLAMP: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: u64,
    pub unigram_power: f64,
    /// Frequent-token subsampling threshold; 0 disables it.
    pub subsample: f64,
    pub seed: u64,
    /// 1 trains deterministically; more shards the corpus over threads with
    /// unsynchronized updates.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 500,
            window: 10,
            negatives: 25,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            unigram_power: 0.75,
            subsample: 0.0,
            seed: 0,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negatives == 0 {
            return Err(Error::InvalidParam("dim, window and negatives must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParam(format!("learning rate {}", self.learning_rate)));
        }
        if self.subsample < 0.0 || !self.unigram_power.is_finite() {
            return Err(Error::InvalidParam("subsample must be ≥ 0 and unigram power finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    pub dim: usize,
    /// Row-major `|V| × dim`.
    pub input: Vec<f64>,
    /// Row-major `|V| × dim`; empty for models read from word2vec text.
    pub output: Vec<f64>,
    pub config: TrainConfig,
}

impl EmbeddingModel {
    /// Input vectors uniform in `[-0.5/dim, 0.5/dim]`, output vectors zero.
    pub fn initialize(vocab: Vocabulary, config: &TrainConfig) -> Self {
        let dim = config.dim;
        let n = vocab.len() * dim;
        let mut rng = stream(config.seed, key_of_str("init"));
        let half = 0.5 / dim as f64;
        let input = (0..n).map(|_| rng.gen_range(-half..=half)).collect();
        EmbeddingModel { vocab, dim, input, output: vec![0.0; n], config: config.clone() }
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_row(&self, i: usize) -> &[f64] {
        &self.output[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vocab.index_of(token).map(|i| self.row(i))
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP)).exp())
}

fn log_sigmoid(x: f64) -> f64 {
    sigmoid(x).ln()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// All `(center, context)` pairs with `0 < |i - j| ≤ window`.
pub fn context_pairs<T: Copy>(tokens: &[T], window: usize) -> Vec<(T, T)> {
    let mut out = Vec::new();
    for i in 0..tokens.len() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(tokens.len().saturating_sub(1));
        for j in lo..=hi {
            if j != i {
                out.push((tokens[i], tokens[j]));
            }
        }
    }
    out
}

/// `log σ(u_ctx·v_c) + Σ log σ(−u_neg·v_c)`.
pub fn sgns_objective(model: &EmbeddingModel, center: usize, context: usize, negatives: &[usize]) -> f64 {
    let v = model.row(center);
    log_sigmoid(dot(model.output_row(context), v))
        + negatives.iter().map(|&n| log_sigmoid(-dot(model.output_row(n), v))).sum::<f64>()
}

/// Per-target coefficients `lr·(label − σ(u·v))` from pre-step values, and
/// the objective at those values.
fn coefficients(targets: impl Iterator<Item = (f64, f64)>, lr: f64, out: &mut Vec<f64>) -> f64 {
    out.clear();
    let mut objective = 0.0;
    for (label, score) in targets {
        let s = sigmoid(score);
        objective += if label > 0.0 { s.ln() } else { (1.0 - s).ln() };
        out.push(lr * (label - s));
    }
    objective
}

/// One ascent step on the objective of a single pair. Every partial
/// derivative is taken at the pre-step parameters, so the applied change
/// equals `lr` times the analytic gradient even when a row repeats among the
/// targets. Returns the objective before the step.
pub fn sgns_step(model: &mut EmbeddingModel, center: usize, context: usize, negatives: &[usize], lr: f64) -> f64 {
    let dim = model.dim;
    let mut grad_v = vec![0.0; dim];
    let mut coef = Vec::with_capacity(negatives.len() + 1);
    step_in_place(&mut model.input, &mut model.output, dim, center, context, negatives, lr, &mut grad_v, &mut coef)
}

#[allow(clippy::too_many_arguments)]
fn step_in_place(
    input: &mut [f64],
    output: &mut [f64],
    dim: usize,
    center: usize,
    context: usize,
    negatives: &[usize],
    lr: f64,
    grad_v: &mut [f64],
    coef: &mut Vec<f64>,
) -> f64 {
    let v = &mut input[center * dim..(center + 1) * dim];
    let targets = || std::iter::once((1.0, context)).chain(negatives.iter().map(|&n| (0.0, n)));
    let objective = coefficients(
        targets().map(|(l, t)| (l, dot(&output[t * dim..(t + 1) * dim], v))),
        lr,
        coef,
    );
    grad_v.iter_mut().for_each(|g| *g = 0.0);
    for ((_, t), &c) in targets().zip(coef.iter()) {
        let u = &output[t * dim..(t + 1) * dim];
        for (g, x) in grad_v.iter_mut().zip(u) {
            *g += c * x;
        }
    }
    for ((_, t), &c) in targets().zip(coef.iter()) {
        let u = &mut output[t * dim..(t + 1) * dim];
        for (x, y) in u.iter_mut().zip(v.iter()) {
            *x += c * y;
        }
    }
    for (x, g) in v.iter_mut().zip(grad_v.iter()) {
        *x += g;
    }
    objective
}

/// Draws negatives with probability ∝ count^power.
#[derive(Clone, Debug)]
pub struct NegativeTable {
    dist: WeightedIndex<f64>,
    probs: Vec<f64>,
}

impl NegativeTable {
    pub fn new(counts: &[u64], power: f64) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        let total: f64 = weights.iter().sum();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidParam(format!("negative table: {e}")))?;
        Ok(NegativeTable { dist, probs: weights.iter().map(|w| w / total).collect() })
    }

    pub fn sample(&self, rng: &mut Rng) -> usize {
        self.dist.sample(rng)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean negative objective over the pairs of each epoch, measured
    /// before each step.
    pub epoch_loss: Vec<f64>,
    pub pairs: Vec<u64>,
}

/// Trains on tokenized sentences.
pub fn train<S: AsRef<str> + Sync>(sentences: &[Vec<S>], config: &TrainConfig) -> Result<(EmbeddingModel, TrainReport)> {
    config.validate()?;
    let vocab = build_vocab(sentences, config.min_count);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let encoded: Vec<Vec<u32>> = sentences.iter().map(|s| vocab.encode(s)).collect();
    let table = NegativeTable::new(vocab.counts(), config.unigram_power)?;
    let mut model = EmbeddingModel::initialize(vocab, config);
    let report = if config.workers <= 1 {
        train_serial(&mut model, &encoded, &table, config)
    } else {
        train_parallel(&mut model, &encoded, &table, config)
    };
    Ok((model, report))
}

struct Schedule {
    lr0: f64,
    total: f64,
}

impl Schedule {
    fn new(config: &TrainConfig, sentences: &[Vec<u32>]) -> Self {
        let tokens: usize = sentences.iter().map(Vec::len).sum();
        Schedule { lr0: config.learning_rate, total: (tokens * config.epochs).max(1) as f64 }
    }

    /// Linear decay to 1e-4 of the initial rate.
    fn at(&self, processed: usize) -> f64 {
        self.lr0 * (1.0 - processed as f64 / self.total).max(1e-4)
    }
}

/// Sentence visiting order for one epoch. Walk corpora come grouped by
/// entity; visiting them in file order lets a high learning rate chase
/// local context.
fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, key_of_str(&format!("order-{epoch}"))));
    order
}

fn keep_probabilities(vocab: &Vocabulary, sample: f64) -> Option<Vec<f64>> {
    (sample > 0.0).then(|| {
        let threshold = sample * vocab.total() as f64;
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let c = c as f64;
                ((c / threshold).sqrt() + 1.0) * threshold / c
            })
            .collect()
    })
}

fn subsampled(sentence: &[u32], keep: Option<&[f64]>, rng: &mut Rng, buf: &mut Vec<u32>) {
    buf.clear();
    match keep {
        None => buf.extend_from_slice(sentence),
        Some(p) => buf.extend(sentence.iter().copied().filter(|&t| rng.gen::<f64>() < p[t as usize])),
    }
}

fn draw_negatives(table: &NegativeTable, context: u32, k: usize, rng: &mut Rng, out: &mut Vec<usize>) {
    out.clear();
    for _ in 0..k {
        let n = table.sample(rng);
        if n != context as usize {
            out.push(n);
        }
    }
}

fn train_serial(model: &mut EmbeddingModel, sentences: &[Vec<u32>], table: &NegativeTable, config: &TrainConfig) -> TrainReport {
    let schedule = Schedule::new(config, sentences);
    let keep = keep_probabilities(&model.vocab, config.subsample);
    let dim = model.dim;
    let mut report = TrainReport::default();
    let mut processed = 0usize;
    let (mut grad_v, mut coef, mut negs, mut buf) = (vec![0.0; dim], Vec::new(), Vec::new(), Vec::new());
    for epoch in 0..config.epochs {
        let mut rng = stream(config.seed, key_of_str(&format!("epoch-{epoch}")));
        let (mut loss, mut pairs) = (0.0, 0u64);
        for si in epoch_order(sentences.len(), config.seed, epoch) {
            let s = &sentences[si];
            subsampled(s, keep.as_deref(), &mut rng, &mut buf);
            for i in 0..buf.len() {
                let lr = schedule.at(processed + i);
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(buf.len() - 1);
                for j in (lo..=hi).filter(|&j| j != i) {
                    draw_negatives(table, buf[j], config.negatives, &mut rng, &mut negs);
                    loss -= step_in_place(
                        &mut model.input,
                        &mut model.output,
                        dim,
                        buf[i] as usize,
                        buf[j] as usize,
                        &negs,
                        lr,
                        &mut grad_v,
                        &mut coef,
                    );
                    pairs += 1;
                }
            }
            processed += s.len();
        }
        finish_epoch(&mut report, epoch, loss, pairs);
    }
    report
}

fn finish_epoch(report: &mut TrainReport, epoch: usize, loss: f64, pairs: u64) {
    let mean = if pairs == 0 { 0.0 } else { loss / pairs as f64 };
    log::info!("epoch {}: loss {:.6} over {} pairs", epoch + 1, mean, pairs);
    report.epoch_loss.push(mean);
    report.pairs.push(pairs);
}

/// Shared parameter matrix with relaxed per-element loads and stores.
struct SharedRows {
    data: Vec<AtomicU64>,
    dim: usize,
}

impl SharedRows {
    fn new(values: &[f64], dim: usize) -> Self {
        SharedRows { data: values.iter().map(|x| AtomicU64::new(x.to_bits())).collect(), dim }
    }

    fn load(&self, row: usize, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.data[row * self.dim..(row + 1) * self.dim]) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn add(&self, row: usize, coef: f64, x: &[f64]) {
        for (a, &v) in self.data[row * self.dim..(row + 1) * self.dim].iter().zip(x) {
            let cur = f64::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + coef * v).to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f64> {
        self.data.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }
}

fn train_parallel(model: &mut EmbeddingModel, sentences: &[Vec<u32>], table: &NegativeTable, config: &TrainConfig) -> TrainReport {
    let dim = model.dim;
    let input = SharedRows::new(&model.input, dim);
    let output = SharedRows::new(&model.output, dim);
    let schedule = Schedule::new(config, sentences);
    let keep = keep_probabilities(&model.vocab, config.subsample);
    let workers = config.workers;
    let shard_len = sentences.len().div_ceil(workers).max(1);
    let epoch_tokens: usize = sentences.iter().map(Vec::len).sum();
    let mut report = TrainReport::default();

    for epoch in 0..config.epochs {
        let order = epoch_order(sentences.len(), config.seed, epoch);
        let results: Vec<(f64, u64)> = order
            .par_chunks(shard_len)
            .enumerate()
            .map(|(w, shard)| {
                let mut rng = stream(config.seed, key_of_str(&format!("epoch-{epoch}-worker-{w}")));
                let mut v = vec![0.0; dim];
                let mut grad_v = vec![0.0; dim];
                let mut us: Vec<Vec<f64>> = Vec::new();
                let (mut coef, mut negs, mut buf) = (Vec::new(), Vec::new(), Vec::new());
                let (mut loss, mut pairs) = (0.0, 0u64);
                // each shard advances the schedule as if the others keep pace
                let mut processed = epoch * epoch_tokens;
                for &si in shard {
                    let s = &sentences[si];
                    subsampled(s, keep.as_deref(), &mut rng, &mut buf);
                    for i in 0..buf.len() {
                        let lr = schedule.at(processed + i * workers);
                        let lo = i.saturating_sub(config.window);
                        let hi = (i + config.window).min(buf.len() - 1);
                        for j in (lo..=hi).filter(|&j| j != i) {
                            draw_negatives(table, buf[j], config.negatives, &mut rng, &mut negs);
                            let targets: Vec<(f64, usize)> = std::iter::once((1.0, buf[j] as usize))
                                .chain(negs.iter().map(|&n| (0.0, n)))
                                .collect();
                            let c = buf[i] as usize;
                            input.load(c, &mut v);
                            us.resize_with(targets.len(), || vec![0.0; dim]);
                            for (u, &(_, t)) in us.iter_mut().zip(&targets) {
                                output.load(t, u);
                            }
                            loss -= coefficients(
                                targets.iter().zip(&us).map(|(&(l, _), u)| (l, dot(u, &v))),
                                lr,
                                &mut coef,
                            );
                            grad_v.iter_mut().for_each(|g| *g = 0.0);
                            for (u, &k) in us.iter().zip(&coef) {
                                for (g, x) in grad_v.iter_mut().zip(u) {
                                    *g += k * x;
                                }
                            }
                            for (&(_, t), &k) in targets.iter().zip(&coef) {
                                output.add(t, k, &v);
                            }
                            input.add(c, 1.0, &grad_v);
                            pairs += 1;
                        }
                    }
                    processed += s.len() * workers;
                }
                (loss, pairs)
            })
            .collect();
        let loss = results.iter().map(|r| r.0).sum();
        let pairs = results.iter().map(|r| r.1).sum();
        finish_epoch(&mut report, epoch, loss, pairs);
    }
    model.input = input.into_vec();
    model.output = output.into_vec();
    report
}
