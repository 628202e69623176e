//! Document-level discriminators: features, logistic regression, AUC.

mod auc;
mod features;
mod logreg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use auc::auc;
pub use features::{
    bucket_feature_names, features_avg_logprob, features_avg_prob, features_bow,
    features_topk_buckets, BowVocabulary, FeatureVector,
};
pub use logreg::{
    logistic_objective, odds_ratios, train_logreg, Design, LogRegConfig, TrainedClassifier,
};

use crate::error::Error;
use crate::scoring::ScoredDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Real => "real",
            Label::Fake => "fake",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "real" => Ok(Label::Real),
            "fake" => Ok(Label::Fake),
            other => Err(Error::param(format!(
                "label must be \"real\" or \"fake\", got {other:?}"
            ))),
        }
    }
}

/// A scored document with its ground truth and corpus of origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub id: String,
    pub source: String,
    pub label: Label,
    pub scored: ScoredDocument,
}
