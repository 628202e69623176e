use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotation::{bucket_of, BucketScheme};
use crate::error::{Error, Result};
use crate::scoring::ScoredDocument;

/// Named feature values for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub schema: Vec<String>,
    pub values: Vec<f64>,
}

/// Mean per-token probability.
pub fn features_avg_prob(scored: &ScoredDocument) -> FeatureVector {
    let n = scored.len().max(1) as f64;
    FeatureVector {
        schema: vec!["avg_prob".into()],
        values: vec![scored.scores.iter().map(|s| s.prob).sum::<f64>() / n],
    }
}

/// Mean per-token log-probability. Zero probabilities (possible only with
/// external adapters) are floored at `f64::MIN_POSITIVE`.
pub fn features_avg_logprob(scored: &ScoredDocument) -> FeatureVector {
    let n = scored.len().max(1) as f64;
    let total: f64 = scored
        .scores
        .iter()
        .map(|s| s.prob.max(f64::MIN_POSITIVE).ln())
        .sum();
    FeatureVector {
        schema: vec!["avg_logprob".into()],
        values: vec![total / n],
    }
}

/// Fraction of tokens falling in each rank bucket.
pub fn features_topk_buckets(scored: &ScoredDocument, scheme: &BucketScheme) -> FeatureVector {
    let mut counts = vec![0.0; scheme.bucket_count()];
    for s in &scored.scores {
        counts[bucket_of(s.rank.max(1), scheme).expect("rank >= 1")] += 1.0;
    }
    let n = scored.len().max(1) as f64;
    FeatureVector {
        schema: bucket_feature_names(scheme),
        values: counts.into_iter().map(|c| c / n).collect(),
    }
}

pub fn bucket_feature_names(scheme: &BucketScheme) -> Vec<String> {
    let t = scheme.thresholds();
    (0..scheme.bucket_count())
        .map(|i| match i {
            0 => format!("rank<={}", t[0]),
            i if i == t.len() => format!("rank>{}", t[i - 1]),
            i => format!("rank{}..{}", t[i - 1] + 1, t[i]),
        })
        .collect()
}

/// Bag-of-words vocabulary fixed on a set of training documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowVocabulary {
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    /// Ids of the documents the vocabulary was built from.
    pub fitted_on: Vec<String>,
}

impl BowVocabulary {
    pub fn new(words: impl IntoIterator<Item = String>) -> Result<Self> {
        let words: Vec<String> = words
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if words.is_empty() {
            return Err(Error::param("bag-of-words vocabulary is empty"));
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Self {
            words,
            index,
            fitted_on: Vec::new(),
        })
    }

    /// Every token type appearing in `docs`, which are `(id, document)` pairs.
    pub fn fit<'a>(docs: impl IntoIterator<Item = (&'a str, &'a ScoredDocument)>) -> Result<Self> {
        let mut words = BTreeSet::new();
        let mut ids = Vec::new();
        for (id, doc) in docs {
            ids.push(id.to_string());
            words.extend(doc.tokens.iter().map(|t| t.text.clone()));
        }
        let mut vocab = Self::new(words)?;
        vocab.fitted_on = ids;
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }
}

/// Length-normalized token counts; tokens outside the vocabulary are ignored.
pub fn features_bow<S: AsRef<str>>(tokens: &[S], vocab: &BowVocabulary) -> FeatureVector {
    let mut values = vec![0.0; vocab.len()];
    for t in tokens {
        if let Some(&i) = vocab.index.get(t.as_ref()) {
            values[i] += 1.0;
        }
    }
    let n = tokens.len().max(1) as f64;
    values.iter_mut().for_each(|v| *v /= n);
    FeatureVector {
        schema: vocab.words.iter().map(|w| format!("bow:{w}")).collect(),
        values,
    }
}
