use serde::{Deserialize, Serialize};

use crate::annotation::{bucket_of, BucketScheme};
use crate::error::{Error, Result};
use crate::scoring::ScoredDocument;

/// Pooled token-level bucket fractions for one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistribution {
    pub source: String,
    pub bucket_fractions: Vec<f64>,
    pub n_tokens: usize,
}

pub fn rank_distribution<'a>(
    source: &str,
    docs: impl IntoIterator<Item = &'a ScoredDocument>,
    scheme: &BucketScheme,
) -> Result<RankDistribution> {
    let mut counts = vec![0usize; scheme.bucket_count()];
    for doc in docs {
        for rank in doc.ranks() {
            counts[bucket_of(rank.max(1), scheme)?] += 1;
        }
    }
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::param(format!("no tokens pooled for source {source:?}")));
    }
    Ok(RankDistribution {
        source: source.to_string(),
        bucket_fractions: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        n_tokens: n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRatio {
    pub threshold: usize,
    pub real_fraction: f64,
    pub fake_fraction: f64,
    /// `real_fraction / fake_fraction`; `+inf` when the fake pool never
    /// leaves the top `threshold`.
    #[serde(with = "crate::stats::float_or_string")]
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn tail_fraction<'a>(docs: impl IntoIterator<Item = &'a ScoredDocument>, threshold: usize) -> (usize, usize) {
    let mut tail = 0;
    let mut total = 0;
    for doc in docs {
        for rank in doc.ranks() {
            total += 1;
            if rank > threshold {
                tail += 1;
            }
        }
    }
    (tail, total)
}

/// How much more often real text uses tokens ranked beyond `threshold`.
pub fn tail_ratio<'a>(
    real: impl IntoIterator<Item = &'a ScoredDocument>,
    fake: impl IntoIterator<Item = &'a ScoredDocument>,
    threshold: usize,
) -> Result<TailRatio> {
    let (real_tail, real_total) = tail_fraction(real, threshold);
    let (fake_tail, fake_total) = tail_fraction(fake, threshold);
    if real_total == 0 || fake_total == 0 {
        return Err(Error::param("tail ratio needs tokens in both pools"));
    }
    let real_fraction = real_tail as f64 / real_total as f64;
    let fake_fraction = fake_tail as f64 / fake_total as f64;
    let (ratio, warning) = if fake_tail == 0 {
        (
            f64::INFINITY,
            Some(format!("no fake token ranked beyond {threshold}; ratio is unbounded")),
        )
    } else {
        (real_fraction / fake_fraction, None)
    };
    Ok(TailRatio {
        threshold,
        real_fraction,
        fake_fraction,
        ratio,
        warning,
    })
}
