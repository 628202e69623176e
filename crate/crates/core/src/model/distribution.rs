use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::TokenId;

/// Probability vector indexed by vocabulary id.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        let mut total = 0.0;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::param(format!("invalid probability mass {w}")));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::param("distribution has zero total mass"));
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { probs: weights })
    }

    pub fn uniform(size: usize) -> Self {
        Self {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, id: TokenId) -> f64 {
        self.probs.get(id as usize).copied().unwrap_or(0.0)
    }

    /// The `k` most probable ids, ordered by probability descending and then
    /// id ascending (the same order used for ranks).
    pub fn top_k(&self, k: usize) -> Vec<(TokenId, f64)> {
        let mut best: Vec<(TokenId, f64)> = Vec::with_capacity(k + 1);
        if k == 0 {
            return best;
        }
        for (i, &p) in self.probs.iter().enumerate() {
            if best.len() == k && !outranks((i as TokenId, p), best[k - 1]) {
                continue;
            }
            let pos = best
                .iter()
                .position(|&b| outranks((i as TokenId, p), b))
                .unwrap_or(best.len());
            best.insert(pos, (i as TokenId, p));
            best.truncate(k);
        }
        best
    }
}

/// Total order used for ranking: higher probability first, ties by lower id.
pub(crate) fn outranks(a: (TokenId, f64), b: (TokenId, f64)) -> bool {
    match a.1.partial_cmp(&b.1) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Equal) => a.0 < b.0,
        _ => false,
    }
}
