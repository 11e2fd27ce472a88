use std::collections::HashMap;

use kgspec::eval::cosine;
use kgspec::rng::stream;
use kgspec::skipgram::{
    build_vocab, context_pairs, read_word2vec, sgns_objective, sgns_step, sigmoid, train, write_word2vec,
    EmbeddingModel, NegativeTable, TrainConfig,
};
use proptest::prelude::*;
use rand::Rng;

fn random_model(n: usize, dim: usize, seed: u64) -> EmbeddingModel {
    let tokens: Vec<Vec<String>> = vec![(0..n).map(|i| format!("t{i}")).collect()];
    let vocab = build_vocab(&tokens, 1);
    let cfg = TrainConfig { dim, seed, ..Default::default() };
    let mut m = EmbeddingModel::initialize(vocab, &cfg);
    let mut rng = stream(seed, 1);
    for x in m.input.iter_mut().chain(m.output.iter_mut()) {
        *x = rng.gen_range(-0.5..0.5);
    }
    m
}

/// Change produced by one step with learning rate 1.
fn step_delta(m: &EmbeddingModel, c: usize, ctx: usize, negs: &[usize]) -> Vec<f64> {
    let mut after = m.clone();
    sgns_step(&mut after, c, ctx, negs, 1.0);
    after.input.iter().chain(&after.output).zip(m.input.iter().chain(&m.output)).map(|(a, b)| a - b).collect()
}

fn param(w: &mut EmbeddingModel, i: usize) -> &mut f64 {
    let n_in = w.input.len();
    if i < n_in { &mut w.input[i] } else { &mut w.output[i - n_in] }
}

/// Central differences of `f` over every parameter.
fn numeric_gradient(m: &EmbeddingModel, f: impl Fn(&EmbeddingModel) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut work = m.clone();
    (0..m.input.len() + m.output.len())
        .map(|i| {
            let orig = *param(&mut work, i);
            *param(&mut work, i) = orig + h;
            let plus = f(&work);
            *param(&mut work, i) = orig - h;
            let minus = f(&work);
            *param(&mut work, i) = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 { diff } else { diff / scale }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gradient_matches_finite_difference(seed in 0u64..10_000, c in 0usize..6, ctx in 0usize..6, negs in prop::collection::vec(0usize..6, 0..4)) {
        let m = random_model(6, 8, seed);
        // positive term alone
        let pos = step_delta(&m, c, ctx, &[]);
        let pos_fd = numeric_gradient(&m, |w| sgns_objective(w, c, ctx, &[]));
        prop_assert!(rel_error(&pos, &pos_fd) < 1e-4);
        // negative terms alone, by difference
        if !negs.is_empty() {
            let all = step_delta(&m, c, ctx, &negs);
            let neg: Vec<f64> = all.iter().zip(&pos).map(|(a, p)| a - p).collect();
            let neg_fd = numeric_gradient(&m, |w| sgns_objective(w, c, ctx, &negs) - sgns_objective(w, c, ctx, &[]));
            prop_assert!(rel_error(&neg, &neg_fd) < 1e-4);
        }
    }

    #[test]
    fn training_stays_finite(lines in prop::collection::vec(prop::collection::vec(0u8..12, 1..12), 1..30), seed in 0u64..100, lr in 0.001f64..1.0) {
        let sentences: Vec<Vec<String>> = lines.iter().map(|l| l.iter().map(|t| format!("w{t}")).collect()).collect();
        let cfg = TrainConfig { dim: 6, window: 3, negatives: 4, epochs: 3, learning_rate: lr, seed, ..Default::default() };
        let (model, report) = train(&sentences, &cfg).unwrap();
        prop_assert!(model.is_finite());
        prop_assert!(report.epoch_loss.iter().all(|l| l.is_finite()));
    }
}

#[test]
fn positive_updates_raise_score() {
    let mut m = random_model(3, 8, 4);
    let mut last = sigmoid(m.output_row(1).iter().zip(m.row(0)).map(|(a, b)| a * b).sum());
    for _ in 0..100 {
        sgns_step(&mut m, 0, 1, &[], 0.01);
        let s = sigmoid(m.output_row(1).iter().zip(m.row(0)).map(|(a, b)| a * b).sum());
        assert!(s > last);
        last = s;
    }
}

#[test]
fn window_covers_short_walk() {
    let pairs = context_pairs(&["a", "b", "c", "d"], 10);
    assert_eq!(pairs.len(), 12);
    let unique: std::collections::BTreeSet<_> = pairs.iter().collect();
    assert_eq!(unique.len(), 12);
    assert!(pairs.iter().all(|(x, y)| x != y));
}

#[test]
fn vocabulary_matches_recount() {
    let mut rng = stream(8, 0);
    let lines: Vec<Vec<String>> = (0..10_000)
        .map(|_| (0..rng.gen_range(1..8)).map(|_| format!("tok{}", rng.gen_range(0..300))).collect())
        .collect();
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for l in &lines {
        for t in l {
            *counts.entry(t).or_default() += 1;
        }
    }
    let vocab = build_vocab(&lines, 1);
    assert_eq!(vocab.len(), counts.len());
    for (t, c) in &counts {
        assert_eq!(vocab.count(vocab.index_of(t).unwrap()), *c);
    }
    for i in 1..vocab.len() {
        let (a, b) = ((vocab.count(i - 1), vocab.token(i - 1)), (vocab.count(i), vocab.token(i)));
        assert!(a.0 > b.0 || (a.0 == b.0 && a.1 < b.1));
    }
    let pruned = build_vocab(&lines, 40);
    assert_eq!(pruned.len(), counts.values().filter(|&&c| c >= 40).count());
}

#[test]
fn negative_table_matches_unigram_power() {
    let counts: Vec<u64> = (1..=100).map(|i| (i * i) as u64 % 97 + 1).collect();
    let table = NegativeTable::new(&counts, 0.75).unwrap();
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let z: f64 = weights.iter().sum();
    let mut hits = vec![0u64; 100];
    let mut rng = stream(2, 0);
    let draws = 1_000_000;
    for _ in 0..draws {
        hits[table.sample(&mut rng)] += 1;
    }
    let tv: f64 = hits.iter().zip(&weights).map(|(&h, w)| (h as f64 / draws as f64 - w / z).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.01, "total variation {tv}");
}

/// Sentences drawn inside one of two disjoint token groups.
fn two_cliques(seed: u64) -> Vec<Vec<String>> {
    let mut rng = stream(seed, 3);
    (0..400)
        .map(|i| {
            let group = if i % 2 == 0 { "a" } else { "b" };
            (0..8).map(|_| format!("{group}{}", rng.gen_range(0..6))).collect()
        })
        .collect()
}

#[test]
fn cliques_separate_and_loss_falls() {
    let cfg = TrainConfig { dim: 16, window: 3, negatives: 5, epochs: 5, learning_rate: 0.05, seed: 1, ..Default::default() };
    let (model, report) = train(&two_cliques(0), &cfg).unwrap();
    assert!(report.epoch_loss[4] < report.epoch_loss[0], "{:?}", report.epoch_loss);
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for g1 in ["a", "b"] {
        for i in 0..6 {
            for g2 in ["a", "b"] {
                for j in 0..6 {
                    if g1 == g2 && i == j {
                        continue;
                    }
                    let c = cosine(model.vector(&format!("{g1}{i}")).unwrap(), model.vector(&format!("{g2}{j}")).unwrap());
                    if g1 == g2 { intra.push(c) } else { inter.push(c) }
                }
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&intra) > mean(&inter), "{} vs {}", mean(&intra), mean(&inter));
}

#[test]
fn single_worker_is_bit_identical_and_round_trips() {
    let cfg = TrainConfig { dim: 12, window: 4, negatives: 3, epochs: 2, seed: 9, workers: 1, ..Default::default() };
    let (a, _) = train(&two_cliques(1), &cfg).unwrap();
    let (b, _) = train(&two_cliques(1), &cfg).unwrap();
    assert!(a.input.iter().zip(&b.input).all(|(x, y)| x.to_bits() == y.to_bits()));
    let mut buf = Vec::new();
    write_word2vec(&a, &mut buf).unwrap();
    let back = read_word2vec(buf.as_slice()).unwrap();
    assert_eq!(back.vocab.tokens(), a.vocab.tokens());
    assert!(back.input.iter().zip(&a.input).all(|(x, y)| x.to_bits() == y.to_bits()));

    let other = TrainConfig { seed: 10, ..cfg };
    let (c, _) = train(&two_cliques(1), &other).unwrap();
    assert_ne!(a.input, c.input);
}
