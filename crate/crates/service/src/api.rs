//! Request and response bodies shared by the HTTP service and `score --json`.

use fakescope::annotation::{annotate, BucketScheme, HistogramSet};
use fakescope::model::{DetectionModel, ModelInfo, ScoringMode};
use fakescope::scoring::score_document;
use fakescope::tokenize::Token;
use serde::{Deserialize, Serialize};

/// Bumped whenever [`AnalyzeResponse`] changes shape.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_MAX_TEXT_BYTES: usize = 50_000;

/// Either `"causal"`, `"masked"` (default window), or the tagged form
/// `{"kind": "masked", "window": 12}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeSpec {
    Name(String),
    Full(ScoringMode),
}

impl Default for ModeSpec {
    fn default() -> Self {
        ModeSpec::Full(ScoringMode::Causal)
    }
}

impl ModeSpec {
    pub fn resolve(&self) -> fakescope::Result<ScoringMode> {
        let mode = match self {
            ModeSpec::Name(n) if n == "causal" => ScoringMode::Causal,
            ModeSpec::Name(n) if n == "masked" => ScoringMode::Masked {
                window: fakescope::model::DEFAULT_WINDOW,
            },
            ModeSpec::Name(other) => {
                return Err(fakescope::Error::Parameter(format!(
                    "mode must be \"causal\" or \"masked\", got {other:?}"
                )))
            }
            ModeSpec::Full(m) => *m,
        };
        mode.validate()?;
        Ok(mode)
    }
}

/// Custom thresholds; colors default to the standard palette.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub thresholds: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<Vec<String>>,
}

impl SchemeSpec {
    pub fn resolve(&self) -> fakescope::Result<BucketScheme> {
        match &self.colors {
            Some(colors) => BucketScheme::with_colors(self.thresholds.clone(), colors.clone()),
            None => BucketScheme::new(self.thresholds.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeRequest {
    pub text: String,
    pub model: String,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeOut {
    pub thresholds: Vec<usize>,
    pub colors: Vec<String>,
}

/// Token-aligned analysis: every per-token array has one entry per token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeResponse {
    pub schema_version: u32,
    pub model: ModelInfo,
    pub mode: ScoringMode,
    pub scheme: SchemeOut,
    pub tokens: Vec<Token>,
    pub prob: Vec<f64>,
    pub rank: Vec<usize>,
    pub frac_prob: Vec<f64>,
    pub entropy: Vec<f64>,
    pub bucket: Vec<usize>,
    pub top5: Vec<Vec<(String, f64)>>,
    pub oov: Vec<bool>,
    pub histograms: HistogramSet,
}

impl AnalyzeResponse {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// The single code path behind both the CLI and the HTTP endpoint.
pub fn analyze(
    model: &dyn DetectionModel,
    text: &str,
    mode: ScoringMode,
    scheme: &BucketScheme,
) -> fakescope::Result<AnalyzeResponse> {
    let info = model.info();
    let doc = annotate(score_document(model, text, mode)?, scheme);
    let scores = &doc.scored.scores;
    Ok(AnalyzeResponse {
        schema_version: SCHEMA_VERSION,
        model: info,
        mode,
        scheme: SchemeOut {
            thresholds: scheme.thresholds().to_vec(),
            colors: scheme.colors().to_vec(),
        },
        prob: scores.iter().map(|s| s.prob).collect(),
        rank: scores.iter().map(|s| s.rank).collect(),
        frac_prob: scores.iter().map(|s| s.frac_prob).collect(),
        entropy: scores.iter().map(|s| s.entropy).collect(),
        top5: scores.iter().map(|s| s.top5.clone()).collect(),
        oov: scores.iter().map(|s| s.oov).collect(),
        bucket: doc.buckets,
        histograms: doc.histograms,
        tokens: doc.scored.tokens,
    })
}
