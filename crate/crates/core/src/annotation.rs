//! Top-k bucket overlay, the three summary histograms, and tooltips.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoredDocument;

pub const FRACP_BINS: usize = 10;
pub const ENTROPY_BINS: usize = 20;

const PALETTE: [&str; 3] = ["green", "yellow", "red"];
const TAIL_COLOR: &str = "purple";

/// Rank thresholds (inclusive upper bounds) and one color per bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketScheme {
    thresholds: Vec<usize>,
    colors: Vec<String>,
}

impl Default for BucketScheme {
    fn default() -> Self {
        Self::new(vec![10, 100, 1000]).expect("default thresholds are valid")
    }
}

impl BucketScheme {
    /// Thresholds with the default palette: green, yellow, red for the first
    /// buckets and purple for the tail.
    pub fn new(thresholds: Vec<usize>) -> Result<Self> {
        let colors = (0..thresholds.len())
            .map(|i| PALETTE.get(i).map_or_else(|| format!("level-{i}"), |c| c.to_string()))
            .chain(std::iter::once(TAIL_COLOR.to_string()))
            .collect();
        Self::with_colors(thresholds, colors)
    }

    pub fn with_colors(thresholds: Vec<usize>, colors: Vec<String>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::param("bucket scheme needs at least one threshold"));
        }
        if thresholds[0] == 0 || thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(format!(
                "thresholds must be positive and strictly ascending, got {thresholds:?}"
            )));
        }
        if colors.len() != thresholds.len() + 1 {
            return Err(Error::param(format!(
                "{} thresholds need {} colors, got {}",
                thresholds.len(),
                thresholds.len() + 1,
                colors.len()
            )));
        }
        Ok(Self { thresholds, colors })
    }

    pub fn thresholds(&self) -> &[usize] {
        &self.thresholds
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn bucket_count(&self) -> usize {
        self.colors.len()
    }
}

/// Smallest bucket whose threshold is at least `rank`; the tail bucket
/// otherwise.
pub fn bucket_of(rank: usize, scheme: &BucketScheme) -> Result<usize> {
    if rank < 1 {
        return Err(Error::param("rank must be at least 1"));
    }
    Ok(scheme.thresholds.partition_point(|&t| t < rank))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSet {
    pub bucket_counts: Vec<usize>,
    /// Ten equal bins on [0, 1]; the last bin is closed.
    pub fracp_hist: Vec<usize>,
    /// Twenty equal bins on [0, ln |V|].
    pub entropy_hist: Vec<usize>,
    pub entropy_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub scored: ScoredDocument,
    pub scheme: BucketScheme,
    pub buckets: Vec<usize>,
    pub histograms: HistogramSet,
}

fn bin(value: f64, max: f64, bins: usize) -> usize {
    if max.is_nan() || value.is_nan() || max <= 0.0 || value <= 0.0 {
        return 0;
    }
    ((value / max * bins as f64) as usize).min(bins - 1)
}

pub fn annotate(scored: ScoredDocument, scheme: &BucketScheme) -> AnnotatedDocument {
    let entropy_max = (scored.vocab_size.max(1) as f64).ln();
    let mut histograms = HistogramSet {
        bucket_counts: vec![0; scheme.bucket_count()],
        fracp_hist: vec![0; FRACP_BINS],
        entropy_hist: vec![0; ENTROPY_BINS],
        entropy_max,
    };
    let mut buckets = Vec::with_capacity(scored.len());
    for s in &scored.scores {
        let b = bucket_of(s.rank.max(1), scheme).expect("rank clamped to >= 1");
        buckets.push(b);
        histograms.bucket_counts[b] += 1;
        histograms.fracp_hist[bin(s.frac_prob, 1.0, FRACP_BINS)] += 1;
        histograms.entropy_hist[bin(s.entropy, entropy_max, ENTROPY_BINS)] += 1;
    }
    AnnotatedDocument {
        scored,
        scheme: scheme.clone(),
        buckets,
        histograms,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextWord {
    pub text: String,
    pub rank: usize,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tooltip {
    pub index: usize,
    pub text: String,
    pub top5: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub next: Option<NextWord>,
}

/// Top-5 predictions at `index` plus the rank and probability of the token
/// that follows it, if any.
pub fn tooltip_payload(scored: &ScoredDocument, index: i64) -> Result<Tooltip> {
    let len = scored.len();
    let out_of_range = Error::IndexOutOfRange { index, len };
    let i = usize::try_from(index).map_err(|_| Error::IndexOutOfRange { index, len })?;
    if i >= len {
        return Err(out_of_range);
    }
    let next = scored.scores.get(i + 1).map(|s| NextWord {
        text: scored.tokens[i + 1].text.clone(),
        rank: s.rank,
        prob: s.prob,
    });
    Ok(Tooltip {
        index: i,
        text: scored.tokens[i].text.clone(),
        top5: scored.scores[i].top5.clone(),
        next,
    })
}
