use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{Label, LabeledDocument};
use crate::error::Result;
use crate::experiment::cv::{cross_validate, mean_std, train_on, CvConfig, FeatureSet, FoldResult};
use crate::experiment::Corpus;
use crate::model::{DetectionModel, ScoringMode};
use crate::scoring::score_document;
use crate::stats::{rank_distribution, tail_ratio, RankDistribution, TailRatio};

pub const DEFAULT_TAIL_THRESHOLD: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: ScoringMode,
    pub cv: CvConfig,
    pub tail_threshold: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: ScoringMode::Causal,
            cv: CvConfig::default(),
            tail_threshold: DEFAULT_TAIL_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub feature: FeatureSet,
    pub mean_auc: f64,
    /// Population standard deviation of the per-fold AUCs.
    pub std_auc: f64,
    pub folds: Vec<FoldResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddsRatio {
    pub feature: String,
    /// Odds multiplier toward "fake" per unit increase of the feature.
    pub toward_fake: f64,
    /// Same effect expressed toward "real" (the reciprocal).
    pub toward_real: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    pub source: String,
    pub label: Label,
    pub n_documents: usize,
    pub n_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub model: String,
    pub mode: ScoringMode,
    pub sources: Vec<SourceSummary>,
    pub provenance: Vec<String>,
    pub rows: Vec<FeatureRow>,
    pub supplementary: Vec<FeatureRow>,
    /// From a bucket-fraction classifier fit on every document.
    pub odds_ratios: Vec<OddsRatio>,
    pub rank_distributions: Vec<RankDistribution>,
    pub tail_ratio: TailRatio,
}

impl ExperimentReport {
    pub fn row(&self, set: FeatureSet) -> Option<&FeatureRow> {
        self.rows.iter().chain(&self.supplementary).find(|r| r.feature == set)
    }

    /// Plain-text rendering of the main results.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {} ({})", self.model, self.mode.name());
        let _ = writeln!(out, "\n{:<16} {:>8} {:>8} {:>6}", "features", "AUC", "std", "folds");
        for (i, row) in self.rows.iter().chain(&self.supplementary).enumerate() {
            if i == self.rows.len() {
                let _ = writeln!(out, "-- supplementary");
            }
            let _ = writeln!(
                out,
                "{:<16} {:>8.4} {:>8.4} {:>6}",
                row.feature.name(),
                row.mean_auc,
                row.std_auc,
                row.folds.len()
            );
        }
        let _ = writeln!(out, "\nodds ratios (bucket features, per unit fraction)");
        let _ = writeln!(out, "{:<16} {:>12} {:>12}", "bucket", "toward fake", "toward real");
        for o in &self.odds_ratios {
            let _ = writeln!(out, "{:<16} {:>12.4e} {:>12.4e}", o.feature, o.toward_fake, o.toward_real);
        }
        let _ = writeln!(out, "\nrank-bucket fractions per source");
        for r in &self.rank_distributions {
            let cells: Vec<String> = r.bucket_fractions.iter().map(|f| format!("{f:.4}")).collect();
            let _ = writeln!(out, "{:<16} {}  (n={})", r.source, cells.join(" "), r.n_tokens);
        }
        let t = &self.tail_ratio;
        let _ = writeln!(
            out,
            "\ntail (rank > {}): real {:.4}, fake {:.4}, ratio {:.3}",
            t.threshold, t.real_fraction, t.fake_fraction, t.ratio
        );
        if let Some(w) = &t.warning {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

/// Scores every document in parallel; output order follows the corpus.
pub fn score_corpus(
    corpus: &Corpus,
    model: &dyn DetectionModel,
    mode: ScoringMode,
) -> Result<Vec<LabeledDocument>> {
    corpus
        .documents
        .par_iter()
        .map(|d| {
            Ok(LabeledDocument {
                id: d.id.clone(),
                source: d.source.clone(),
                label: d.label,
                scored: score_document(model, &d.text, mode)?,
            })
        })
        .collect()
}

fn feature_row(docs: &[LabeledDocument], set: FeatureSet, cv: &CvConfig) -> Result<FeatureRow> {
    let folds = cross_validate(docs, set, cv)?;
    let aucs: Vec<f64> = folds.iter().map(|f| f.auc).collect();
    let (mean_auc, std_auc) = mean_std(&aucs);
    Ok(FeatureRow {
        feature: set,
        mean_auc,
        std_auc,
        folds,
    })
}

/// Full detection experiment over already scored documents.
pub fn run_table1_scored(
    docs: &[LabeledDocument],
    config: &ExperimentConfig,
    model_name: &str,
    provenance: Vec<String>,
) -> Result<ExperimentReport> {
    let rows = [FeatureSet::Bow, FeatureSet::AvgProb, FeatureSet::TopkBuckets]
        .into_iter()
        .map(|set| feature_row(docs, set, &config.cv))
        .collect::<Result<Vec<_>>>()?;
    let supplementary = vec![feature_row(docs, FeatureSet::AvgLogprob, &config.cv)?];

    let mut all: Vec<usize> = (0..docs.len()).collect();
    all.sort_by(|&a, &b| docs[a].id.cmp(&docs[b].id));
    let (bucket_clf, _) = train_on(docs, &all, FeatureSet::TopkBuckets, &config.cv)?;
    let odds_ratios = bucket_clf
        .odds_ratios()
        .into_iter()
        .map(|(feature, or)| OddsRatio {
            feature,
            toward_fake: or,
            toward_real: 1.0 / or,
        })
        .collect();

    let mut by_source: BTreeMap<(Label, &str), Vec<&LabeledDocument>> = BTreeMap::new();
    for d in docs {
        by_source.entry((d.label, d.source.as_str())).or_default().push(d);
    }
    let mut sources = Vec::new();
    let mut rank_distributions = Vec::new();
    for ((label, source), group) in &by_source {
        let dist = rank_distribution(source, group.iter().map(|d| &d.scored), &config.cv.scheme)?;
        sources.push(SourceSummary {
            source: source.to_string(),
            label: *label,
            n_documents: group.len(),
            n_tokens: dist.n_tokens,
        });
        rank_distributions.push(dist);
    }
    let pool = |label| docs.iter().filter(move |d| d.label == label).map(|d| &d.scored);
    let tail_ratio = tail_ratio(pool(Label::Real), pool(Label::Fake), config.tail_threshold)?;

    Ok(ExperimentReport {
        model: model_name.to_string(),
        mode: config.mode,
        sources,
        provenance,
        rows,
        supplementary,
        odds_ratios,
        rank_distributions,
        tail_ratio,
    })
}

/// Scores `corpus` with `model`, then runs [`run_table1_scored`].
pub fn run_table1(
    corpus: &Corpus,
    model: &dyn DetectionModel,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    config.mode.validate()?;
    let docs = score_corpus(corpus, model, config.mode)?;
    run_table1_scored(&docs, config, &model.info().name, corpus.provenance.clone())
}
