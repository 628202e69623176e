use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::{
    DetectionModel, Distribution, ModelInfo, ModelKind, ScoringMode, Sequence, TokenId, Vocabulary,
};

/// Raw n-gram counts: context (length < order) to successor counts.
pub type CountTable = BTreeMap<Vec<TokenId>, BTreeMap<TokenId, u64>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub order: usize,
    pub discount: f64,
    pub min_count: u64,
    pub case_folded: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            order: 3,
            discount: 0.75,
            min_count: 2,
            case_folded: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::param("order must be at least 1"));
        }
        validate_discount(self.discount)?;
        if self.min_count == 0 {
            return Err(Error::param("min_count must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn validate_discount(d: f64) -> Result<()> {
    if d > 0.0 && d < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("discount must lie in (0, 1), got {d}")))
    }
}

/// Adjusted-count statistics for one context.
#[derive(Debug, Clone)]
struct ContextStats {
    total: f64,
    types: f64,
    /// (successor, adjusted count), sorted by id.
    successors: Vec<(TokenId, f64)>,
}

impl ContextStats {
    fn adjusted(&self, w: TokenId) -> f64 {
        self.successors
            .binary_search_by_key(&w, |&(id, _)| id)
            .map(|i| self.successors[i].1)
            .unwrap_or(0.0)
    }
}

/// Interpolated Kneser-Ney language model with a single absolute discount.
///
/// Highest-order n-grams and n-grams that begin with `<s>` use raw counts;
/// all other lower-order n-grams use continuation counts (the number of
/// distinct left extensions). The unigram level interpolates with the uniform
/// distribution over the vocabulary, so every id has non-zero probability.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    discount: f64,
    case_folded: bool,
    vocab: Vocabulary,
    counts: CountTable,
    levels: Vec<HashMap<Vec<TokenId>, ContextStats>>,
}

/// Trains a model on pre-tokenized sequences. Each sequence is wrapped in
/// `<s>` and `</s>`; tokens seen fewer than `min_count` times become `<unk>`.
pub fn train_ngram<S: AsRef<str>>(corpus: &[Vec<S>], config: TrainConfig) -> Result<NGramModel> {
    config.validate()?;
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::EmptyCorpus);
    }

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for token in corpus.iter().flatten() {
        *freq.entry(token.as_ref()).or_default() += 1;
    }
    let mut kept: Vec<(&str, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= config.min_count)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let vocab = Vocabulary::with_reserved(kept.into_iter().map(|(t, _)| t))?;

    let mut counts = CountTable::new();
    let mut ids = Vec::new();
    for sentence in corpus.iter().filter(|s| !s.is_empty()) {
        ids.clear();
        ids.push(vocab.bos_id());
        ids.extend(sentence.iter().map(|t| vocab.id_or_unk(t.as_ref())));
        ids.push(vocab.eos_id());
        for j in 1..ids.len() {
            for k in 1..=config.order.min(j + 1) {
                let context = ids[j + 1 - k..j].to_vec();
                *counts.entry(context).or_default().entry(ids[j]).or_default() += 1;
            }
        }
    }

    NGramModel::from_counts(config.order, config.discount, config.case_folded, vocab, counts)
}

impl NGramModel {
    /// Rebuilds a model from raw counts, validating every record.
    pub fn from_counts(
        order: usize,
        discount: f64,
        case_folded: bool,
        vocab: Vocabulary,
        counts: CountTable,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("order must be at least 1"));
        }
        validate_discount(discount)?;
        for (context, successors) in &counts {
            if context.len() >= order {
                return Err(Error::param(format!(
                    "context of length {} exceeds order {order}",
                    context.len()
                )));
            }
            for &id in context.iter().chain(successors.keys()) {
                vocab.check(id)?;
            }
            if successors.values().any(|&c| c == 0) {
                return Err(Error::param("zero count record"));
            }
        }

        // Distinct left extensions of each n-gram shorter than `order`.
        let mut left_extensions: HashMap<Vec<TokenId>, u64> = HashMap::new();
        for (context, successors) in counts.iter().filter(|(c, _)| !c.is_empty()) {
            for &w in successors.keys() {
                let mut suffix = context[1..].to_vec();
                suffix.push(w);
                *left_extensions.entry(suffix).or_default() += 1;
            }
        }

        let bos = vocab.bos_id();
        let mut levels: Vec<HashMap<Vec<TokenId>, ContextStats>> = vec![HashMap::new(); order];
        let mut ngram = Vec::with_capacity(order);
        for (context, successors) in &counts {
            let raw = context.len() + 1 == order || context.first() == Some(&bos);
            let mut stats = ContextStats {
                total: 0.0,
                types: 0.0,
                successors: Vec::with_capacity(successors.len()),
            };
            for (&w, &c) in successors {
                let adjusted = if raw {
                    c
                } else {
                    ngram.clear();
                    ngram.extend_from_slice(context);
                    ngram.push(w);
                    left_extensions.get(ngram.as_slice()).copied().unwrap_or(0)
                };
                if adjusted > 0 {
                    stats.total += adjusted as f64;
                    stats.types += 1.0;
                    stats.successors.push((w, adjusted as f64));
                }
            }
            if stats.total > 0.0 {
                levels[context.len()].insert(context.clone(), stats);
            }
        }

        Ok(Self {
            order,
            discount,
            case_folded,
            vocab,
            counts,
            levels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn case_folded(&self) -> bool {
        self.case_folded
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn counts(&self) -> &CountTable {
        &self.counts
    }

    /// The last `order - 1` tokens of `<s> context`, or of `context` when it
    /// already starts with `<s>`.
    fn history(&self, context: &[TokenId]) -> Vec<TokenId> {
        let keep = self.order - 1;
        if context.len() >= keep {
            return context[context.len() - keep..].to_vec();
        }
        let mut h = Vec::with_capacity(context.len() + 1);
        if context.first() != Some(&self.vocab.bos_id()) {
            h.push(self.vocab.bos_id());
        }
        h.extend_from_slice(context);
        let start = h.len().saturating_sub(keep);
        h.split_off(start)
    }

    fn check_ids(&self, ids: &[TokenId]) -> Result<()> {
        ids.iter().try_for_each(|&id| self.vocab.check(id))
    }

    /// Causal next-token distribution. Only the last `order - 1` tokens of
    /// the context matter; an empty context conditions on `<s>`.
    pub fn next_distribution(&self, context: &[TokenId]) -> Result<Distribution> {
        self.check_ids(context)?;
        Ok(self.distribution_for_history(&self.history(context)))
    }

    fn distribution_for_history(&self, history: &[TokenId]) -> Distribution {
        let size = self.vocab.len();
        let mut probs = vec![1.0 / size as f64; size];
        for k in 1..=self.order {
            if k - 1 > history.len() {
                break;
            }
            let h = &history[history.len() - (k - 1)..];
            let Some(stats) = self.levels[k - 1].get(h) else {
                continue;
            };
            let gamma = self.discount * stats.types / stats.total;
            probs.iter_mut().for_each(|p| *p *= gamma);
            for &(w, a) in &stats.successors {
                probs[w as usize] += (a - self.discount).max(0.0) / stats.total;
            }
        }
        Distribution::from_normalized(probs)
    }

    /// Smoothed probability of `w` after `context`.
    pub fn prob(&self, context: &[TokenId], w: TokenId) -> Result<f64> {
        self.check_ids(context)?;
        self.vocab.check(w)?;
        Ok(self.prob_for_history(&self.history(context), w))
    }

    fn prob_for_history(&self, history: &[TokenId], w: TokenId) -> f64 {
        let mut p = 1.0 / self.vocab.len() as f64;
        for k in 1..=self.order {
            if k - 1 > history.len() {
                break;
            }
            let h = &history[history.len() - (k - 1)..];
            if let Some(stats) = self.levels[k - 1].get(h) {
                let gamma = self.discount * stats.types / stats.total;
                p = gamma * p + (stats.adjusted(w) - self.discount).max(0.0) / stats.total;
            }
        }
        p
    }

    /// Distribution of a masked position given its neighbours, obtained from
    /// the n-gram joint: p(w | left) times the probability of each following
    /// token whose history contains `w`. `left_at_start` prepends `<s>`.
    pub fn masked_distribution(
        &self,
        left: &[TokenId],
        right: &[TokenId],
        left_at_start: bool,
    ) -> Result<Distribution> {
        self.check_ids(left)?;
        self.check_ids(right)?;
        let mut full_left = Vec::with_capacity(left.len() + 1);
        if left_at_start {
            full_left.push(self.vocab.bos_id());
        }
        full_left.extend_from_slice(left);
        let keep = self.order - 1;
        let left_hist = &full_left[full_left.len().saturating_sub(keep)..];
        let base = self.distribution_for_history(left_hist);
        let follow = right.len().min(keep);
        if follow == 0 {
            return Ok(base);
        }

        let mut buffer: Vec<TokenId> = Vec::with_capacity(left_hist.len() + 1 + follow);
        let mut weights = base.probs().to_vec();
        for (w, weight) in weights.iter_mut().enumerate() {
            buffer.clear();
            buffer.extend_from_slice(left_hist);
            buffer.push(w as TokenId);
            for &next in &right[..follow] {
                let h = &buffer[buffer.len().saturating_sub(keep)..];
                *weight *= self.prob_for_history(h, next);
                buffer.push(next);
            }
        }
        Distribution::from_weights(weights)
    }
}

impl DetectionModel for NGramModel {
    fn info(&self) -> ModelInfo {
        ModelInfo {
            name: format!("ngram-{}", self.order),
            kind: ModelKind::Builtin,
            causal: true,
            masked: true,
            vocab_size: self.vocab.len(),
            case_folded: self.case_folded,
        }
    }

    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn predict(&self, seq: Sequence<'_>, target: usize, mode: ScoringMode) -> Result<Distribution> {
        mode.validate()?;
        if target > seq.ids.len() {
            return Err(Error::param(format!(
                "target {target} beyond sequence of length {}",
                seq.ids.len()
            )));
        }
        match mode {
            ScoringMode::Causal => self.next_distribution(&seq.ids[..target]),
            ScoringMode::Masked { window } => {
                let start = target.saturating_sub(window);
                let end = seq.ids.len().min(target + 1 + window);
                let right = if target < seq.ids.len() {
                    &seq.ids[target + 1..end]
                } else {
                    &[]
                };
                self.masked_distribution(&seq.ids[start..target], right, start == 0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> NGramModel {
        let corpus: Vec<Vec<&str>> = vec![
            "the cat sat .".split(' ').collect(),
            "the cat ran .".split(' ').collect(),
        ];
        train_ngram(
            &corpus,
            TrainConfig {
                order: 2,
                min_count: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn parameter_errors() {
        let corpus = vec![vec!["a"]];
        for discount in [0.0, 1.0, -0.5, 1.5] {
            let cfg = TrainConfig {
                discount,
                ..TrainConfig::default()
            };
            assert!(matches!(train_ngram(&corpus, cfg), Err(Error::Parameter(_))));
        }
        let empty: Vec<Vec<&str>> = vec![];
        assert!(matches!(
            train_ngram(&empty, TrainConfig::default()),
            Err(Error::EmptyCorpus)
        ));
        let blank: Vec<Vec<&str>> = vec![vec![]];
        assert!(matches!(
            train_ngram(&blank, TrainConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn out_of_range_context_is_rejected() {
        let m = tiny();
        let err = m.next_distribution(&[99]).unwrap_err();
        assert!(err.to_string().contains("token id out of range"));
    }

    #[test]
    fn empty_context_means_bos() {
        let m = tiny();
        let bos = m.vocab().bos_id();
        assert_eq!(
            m.next_distribution(&[]).unwrap(),
            m.next_distribution(&[bos]).unwrap()
        );
        let sum: f64 = m.next_distribution(&[]).unwrap().probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_count_collapses_to_unk() {
        let corpus: Vec<Vec<&str>> = vec!["a b c".split(' ').collect(); 3];
        let m = train_ngram(
            &corpus,
            TrainConfig {
                order: 2,
                min_count: 1000,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(m.vocab().len(), 3);
        let d = m.next_distribution(&[m.vocab().unk_id()]).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(d.probs().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn masked_distribution_normalizes_and_uses_right_context() {
        let m = tiny();
        let v = m.vocab();
        let ids = |s: &str| s.split(' ').map(|t| v.id(t).unwrap()).collect::<Vec<_>>();
        let doc = ids("the cat sat .");
        let texts: Vec<String> = vec![];
        let seq = Sequence { ids: &doc, texts: &texts };
        let d = m.predict(seq, 1, ScoringMode::Masked { window: 30 }).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // "cat" is the only word seen between "the" and "sat".
        let top = d.top_k(1)[0].0;
        assert_eq!(v.token(top), Some("cat"));
    }
}
