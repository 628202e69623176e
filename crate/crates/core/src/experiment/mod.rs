//! Corpora, synthetic fake sources, and the source-level detection
//! experiment.

mod corpus;
mod cv;
mod generate;
mod report;

pub use corpus::{load_corpus, Corpus, CorpusFormat, Document};
pub use cv::{
    cross_validate, featurize, fit_bow, fold_plan, mean_std, train_on, CvConfig, FeatureSet,
    Fold, FoldResult,
};
pub use generate::{build_fake_sources, default_fake_configs, source_name, DEFAULT_DOC_LEN};
pub use report::{
    run_table1, run_table1_scored, score_corpus, ExperimentConfig, ExperimentReport, FeatureRow,
    OddsRatio, SourceSummary, DEFAULT_TAIL_THRESHOLD,
};
