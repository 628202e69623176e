//! Interpolated Kneser-Ney against an independent string-keyed oracle.

use std::collections::{HashMap, HashSet};

use fakescope::model::{
    read_model, train_ngram, write_model, DetectionModel, NGramModel, ScoringMode, Sequence,
    TrainConfig, BOS, EOS, UNK,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Textbook interpolated KN, recomputed from the raw sentences.
struct Oracle {
    order: usize,
    d: f64,
    vocab_size: usize,
    counts: HashMap<Vec<String>, u64>,
}

impl Oracle {
    fn new(sentences: &[Vec<&str>], order: usize, d: f64, min_count: u64) -> Self {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for w in sentences.iter().flatten() {
            *freq.entry(w).or_default() += 1;
        }
        let kept: HashSet<&str> = freq
            .iter()
            .filter(|(_, &c)| c >= min_count)
            .map(|(w, _)| *w)
            .collect();
        let mut counts = HashMap::new();
        for s in sentences.iter().filter(|s| !s.is_empty()) {
            let mut padded = vec![BOS.to_string()];
            padded.extend(s.iter().map(|w| {
                if kept.contains(w) {
                    w.to_string()
                } else {
                    UNK.to_string()
                }
            }));
            padded.push(EOS.to_string());
            for end in 1..padded.len() {
                for len in 1..=order.min(end + 1) {
                    *counts.entry(padded[end + 1 - len..=end].to_vec()).or_default() += 1;
                }
            }
        }
        Self {
            order,
            d,
            vocab_size: kept.len() + 3,
            counts,
        }
    }

    fn c_kn(&self, gram: &[String]) -> f64 {
        if gram.len() == self.order || gram[0] == BOS {
            return self.counts.get(gram).copied().unwrap_or(0) as f64;
        }
        self.counts
            .keys()
            .filter(|k| k.len() == gram.len() + 1 && k[1..] == *gram)
            .count() as f64
    }

    fn prob(&self, history: &[String], w: &str) -> f64 {
        if history.is_empty() {
            return self.level(&[], w, 1.0 / self.vocab_size as f64);
        }
        let lower = self.prob(&history[1..], w);
        self.level(history, w, lower)
    }

    fn level(&self, h: &[String], w: &str, lower: f64) -> f64 {
        let successors: Vec<&Vec<String>> = self
            .counts
            .keys()
            .filter(|k| k.len() == h.len() + 1 && k[..h.len()] == *h)
            .collect();
        let adjusted: Vec<f64> = successors.iter().map(|g| self.c_kn(g)).collect();
        let total: f64 = adjusted.iter().sum();
        if total == 0.0 {
            return lower;
        }
        let types = adjusted.iter().filter(|&&a| a > 0.0).count() as f64;
        let mut gram = h.to_vec();
        gram.push(w.to_string());
        (self.c_kn(&gram) - self.d).max(0.0) / total + self.d * types / total * lower
    }
}

const TINY: &[&str] = &[
    "the cat sat on the mat",
    "the dog sat on the log",
    "a cat saw the dog",
    "the cat ran",
    "on the mat the dog sat",
];

fn tiny() -> Vec<Vec<&'static str>> {
    TINY.iter().map(|s| s.split(' ').collect()).collect()
}

fn train(sentences: &[Vec<&str>], order: usize, d: f64, min_count: u64) -> NGramModel {
    train_ngram(
        sentences,
        TrainConfig {
            order,
            discount: d,
            min_count,
            case_folded: true,
        },
    )
    .unwrap()
}

/// Every context of length < order over the vocabulary, plus unseen ones.
fn check_against_oracle(sentences: &[Vec<&str>], order: usize, d: f64, min_count: u64) {
    let model = train(sentences, order, d, min_count);
    let oracle = Oracle::new(sentences, order, d, min_count);
    let vocab = model.vocab();
    assert_eq!(vocab.len(), oracle.vocab_size);
    let tokens: Vec<String> = vocab.tokens().to_vec();

    let mut histories: Vec<Vec<String>> = vec![vec![BOS.to_string()]];
    for a in &tokens {
        histories.push(vec![a.clone()]);
        if order >= 3 {
            for b in tokens.iter().take(6) {
                histories.push(vec![a.clone(), b.clone()]);
            }
        }
    }
    histories.extend(oracle.counts.keys().filter(|k| k.len() < order).cloned());

    for h in histories {
        let ids: Vec<u32> = h.iter().map(|t| vocab.id(t).unwrap()).collect();
        // Short contexts are sentence-initial unless they already say so.
        let mut effective = h.clone();
        if effective.len() < order - 1 && effective.first().map(String::as_str) != Some(BOS) {
            effective.insert(0, BOS.to_string());
        }
        let h = &effective[effective.len().saturating_sub(order - 1)..];
        let dist = model.next_distribution(&ids).unwrap();
        let total: f64 = dist.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-6, "context {h:?} sums to {total}");
        for (id, w) in tokens.iter().enumerate() {
            let expected = oracle.prob(h, w);
            let got = dist.prob(id as u32);
            assert!(
                (got - expected).abs() < 1e-9,
                "p({w} | {h:?}) = {got}, oracle {expected}"
            );
        }
    }
}

#[test]
fn trigram_matches_oracle() {
    check_against_oracle(&tiny(), 3, 0.75, 1);
}

#[test]
fn bigram_and_fourgram_match_oracle() {
    check_against_oracle(&tiny(), 2, 0.5, 1);
    check_against_oracle(&tiny(), 4, 0.3, 1);
}

#[test]
fn unk_mapping_matches_oracle() {
    check_against_oracle(&tiny(), 3, 0.75, 2);
}

#[test]
fn hand_computed_bigram() {
    // Sentences "a b" and "a", D = 0.5, |V| = 5 (<unk>, <s>, </s>, a, b).
    // Unigram continuation counts: a 1, b 1, </s> 2 (total 4, 3 types), so
    // p(a) = 0.5/4 + 0.5*3/4*1/5 = 0.2 and p(</s>) = 1.5/4 + 0.075 = 0.45.
    // After "a": b and </s> once each: p(b|a) = 0.5/2 + 0.5*0.2 = 0.35.
    // After <s>: raw count 2 for a: p(a|<s>) = 1.5/2 + 0.25*0.2 = 0.8.
    let sentences = vec![vec!["a", "b"], vec!["a"]];
    let model = train(&sentences, 2, 0.5, 1);
    let v = model.vocab();
    let (a, b, eos) = (v.id("a").unwrap(), v.id("b").unwrap(), v.eos_id());
    let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
    assert!(close(model.prob(&[a], b).unwrap(), 0.35));
    assert!(close(model.prob(&[a], eos).unwrap(), 0.475));
    assert!(close(model.prob(&[a], a).unwrap(), 0.1));
    assert!(close(model.prob(&[], a).unwrap(), 0.8));
    // "b" is only ever followed by </s>: p(a|b) = 0.5*1/1 * 0.2.
    assert!(close(model.prob(&[b], a).unwrap(), 0.1));
}

#[test]
fn markov_property_and_empty_context() {
    let model = train(&tiny(), 3, 0.75, 1);
    let v = model.vocab();
    let id = |w| v.id(w).unwrap();
    let a = model.next_distribution(&[id("dog"), id("the"), id("cat")]).unwrap();
    let b = model.next_distribution(&[id("a"), id("the"), id("cat")]).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        model.next_distribution(&[]).unwrap(),
        model.next_distribution(&[v.bos_id()]).unwrap()
    );
}

#[test]
fn serialization_round_trip_preserves_predictions() {
    let model = train(&tiny(), 3, 0.75, 1);
    let mut buf = Vec::new();
    write_model(&model, &mut buf).unwrap();
    let back = read_model(buf.as_slice()).unwrap();
    let v = model.vocab();
    let ctx = [v.id("the").unwrap()];
    assert_eq!(
        model.next_distribution(&ctx).unwrap(),
        back.next_distribution(&ctx).unwrap()
    );
}

#[test]
fn masked_mode_matches_bayes_rule() {
    let model = train(&tiny(), 2, 0.75, 1);
    let v = model.vocab();
    let words: Vec<String> = ["the", "cat", "sat"].iter().map(|s| s.to_string()).collect();
    let ids: Vec<u32> = words.iter().map(|w| v.id(w).unwrap()).collect();
    let seq = Sequence {
        ids: &ids,
        texts: &words,
    };
    let masked = model
        .predict(seq, 1, ScoringMode::Masked { window: 5 })
        .unwrap();
    // p(x | the, _, sat) is proportional to p(x | the) p(sat | x) for a bigram.
    let mut weights: Vec<f64> = (0..v.len() as u32)
        .map(|x| model.prob(&[ids[0]], x).unwrap() * model.prob(&[x], ids[2]).unwrap())
        .collect();
    let z: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= z);
    for (x, w) in weights.iter().enumerate() {
        assert!((masked.prob(x as u32) - w).abs() < 1e-12);
    }
}

fn random_corpus(seed: u64, n: usize) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = ["x", "y", "z", "w", "v", "u"];
    (0..n)
        .map(|_| {
            let len = rng.random_range(1..8);
            (0..len)
                .map(|_| words[rng.random_range(0..words.len())].to_string())
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_context_normalizes(seed in 0u64..10_000, order in 1usize..5, d in 0.05f64..0.95) {
        let corpus = random_corpus(seed, 12);
        let model = train_ngram(&corpus, TrainConfig { order, discount: d, min_count: 1, case_folded: true }).unwrap();
        let size = model.vocab().len() as u32;
        for a in 0..size {
            for b in 0..size {
                let dist = model.next_distribution(&[a, b]).unwrap();
                let total: f64 = dist.probs().iter().sum();
                prop_assert!((total - 1.0).abs() < 1e-6);
                prop_assert!(dist.probs().iter().all(|&p| p > 0.0));
            }
        }
    }
}
