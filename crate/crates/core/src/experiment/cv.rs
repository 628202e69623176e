use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotation::BucketScheme;
use crate::classifier::{
    auc, features_avg_logprob, features_avg_prob, features_bow, features_topk_buckets,
    train_logreg, BowVocabulary, FeatureVector, Label, LabeledDocument, LogRegConfig,
    TrainedClassifier,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    Bow,
    AvgProb,
    AvgLogprob,
    TopkBuckets,
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Bow => "bow",
            FeatureSet::AvgProb => "avg-prob",
            FeatureSet::AvgLogprob => "avg-logprob",
            FeatureSet::TopkBuckets => "topk-buckets",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub scheme: BucketScheme,
    pub logreg: LogRegConfig,
    /// Minimum number of training documents a word must appear in to enter
    /// the bag-of-words vocabulary.
    pub bow_min_df: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            scheme: BucketScheme::default(),
            logreg: LogRegConfig::default(),
            bow_min_df: 1,
        }
    }
}

/// One held-out (real source, fake source) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub real_source: String,
    pub fake_source: String,
    /// Indices into the document slice, ordered by document id.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub real_source: String,
    pub fake_source: String,
    pub auc: f64,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bow_vocab_size: Option<usize>,
}

/// Leave-one-source-pair-out plan: every combination of one real and one
/// fake source is held out while the classifier trains on all other
/// sources. Folds come out in sorted source order.
pub fn fold_plan(docs: &[LabeledDocument]) -> Result<Vec<Fold>> {
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.sort_by(|&a, &b| docs[a].id.cmp(&docs[b].id));

    let sources = |label| -> BTreeSet<&str> {
        docs.iter()
            .filter(|d| d.label == label)
            .map(|d| d.source.as_str())
            .collect()
    };
    let (real, fake) = (sources(Label::Real), sources(Label::Fake));
    if real.len() < 2 || fake.len() < 2 {
        return Err(Error::Corpus(format!(
            "source-level cross-validation needs at least 2 real and 2 fake sources, got {} and {}",
            real.len(),
            fake.len()
        )));
    }
    for source in real.iter().chain(&fake) {
        let n = docs.iter().filter(|d| d.source == *source).count();
        if n < 2 {
            return Err(Error::Corpus(format!(
                "source {source:?} has {n} document(s); at least 2 are required"
            )));
        }
    }

    let mut folds = Vec::with_capacity(real.len() * fake.len());
    for r in &real {
        for f in &fake {
            let (test, train) = order
                .iter()
                .partition(|&&i| docs[i].source == *r || docs[i].source == *f);
            folds.push(Fold {
                real_source: r.to_string(),
                fake_source: f.to_string(),
                train,
                test,
            });
        }
    }
    Ok(folds)
}

pub fn featurize(
    set: FeatureSet,
    doc: &LabeledDocument,
    scheme: &BucketScheme,
    bow: Option<&BowVocabulary>,
) -> Result<FeatureVector> {
    Ok(match set {
        FeatureSet::Bow => {
            let vocab = bow.ok_or_else(|| Error::param("bag-of-words features need a vocabulary"))?;
            let words: Vec<&str> = doc.scored.tokens.iter().map(|t| t.text.as_str()).collect();
            features_bow(&words, vocab)
        }
        FeatureSet::AvgProb => features_avg_prob(&doc.scored),
        FeatureSet::AvgLogprob => features_avg_logprob(&doc.scored),
        FeatureSet::TopkBuckets => features_topk_buckets(&doc.scored, scheme),
    })
}

/// Words occurring in at least `min_df` of the given documents.
pub fn fit_bow(docs: &[LabeledDocument], indices: &[usize], min_df: usize) -> Result<BowVocabulary> {
    let mut df = std::collections::BTreeMap::<&str, usize>::new();
    for &i in indices {
        let unique: BTreeSet<&str> = docs[i].scored.tokens.iter().map(|t| t.text.as_str()).collect();
        for w in unique {
            *df.entry(w).or_default() += 1;
        }
    }
    let mut vocab = BowVocabulary::new(
        df.into_iter()
            .filter(|&(_, n)| n >= min_df.max(1))
            .map(|(w, _)| w.to_string()),
    )?;
    vocab.fitted_on = indices.iter().map(|&i| docs[i].id.clone()).collect();
    Ok(vocab)
}

/// Trains on the given documents; the bag-of-words vocabulary (if any) is
/// fit on those same documents only.
pub fn train_on(
    docs: &[LabeledDocument],
    indices: &[usize],
    set: FeatureSet,
    config: &CvConfig,
) -> Result<(TrainedClassifier, Option<BowVocabulary>)> {
    let bow = match set {
        FeatureSet::Bow => Some(fit_bow(docs, indices, config.bow_min_df)?),
        _ => None,
    };
    let examples = indices
        .iter()
        .map(|&i| Ok((featurize(set, &docs[i], &config.scheme, bow.as_ref())?, docs[i].label)))
        .collect::<Result<Vec<_>>>()?;
    Ok((train_logreg(&examples, config.logreg)?, bow))
}

fn run_fold(docs: &[LabeledDocument], fold: &Fold, set: FeatureSet, config: &CvConfig) -> Result<FoldResult> {
    let (clf, bow) = train_on(docs, &fold.train, set, config)?;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for &i in &fold.test {
        let p = clf.predict_proba(&featurize(set, &docs[i], &config.scheme, bow.as_ref())?);
        match docs[i].label {
            Label::Fake => pos.push(p),
            Label::Real => neg.push(p),
        }
    }
    Ok(FoldResult {
        real_source: fold.real_source.clone(),
        fake_source: fold.fake_source.clone(),
        auc: auc(&pos, &neg)?,
        n_train: fold.train.len(),
        n_test: fold.test.len(),
        bow_vocab_size: bow.map(|b| b.len()),
    })
}

/// Held-out AUC per fold (fake is the positive class), in fold order.
pub fn cross_validate(docs: &[LabeledDocument], set: FeatureSet, config: &CvConfig) -> Result<Vec<FoldResult>> {
    let folds = fold_plan(docs)?;
    folds
        .par_iter()
        .map(|fold| run_fold(docs, fold, set, config))
        .collect()
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
