//! Per-token probability, rank and entropy under a detection model.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{DetectionModel, Distribution, ScoringMode, Sequence, TokenId, Vocabulary};
use crate::tokenize::{tokenize, Token};

/// Scores of one token against the distribution predicted at its position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenScore {
    pub prob: f64,
    /// 1-based; ties broken by ascending token id.
    pub rank: usize,
    /// Natural-log entropy of the full distribution.
    pub entropy: f64,
    /// `prob` divided by the probability of the top prediction.
    pub frac_prob: f64,
    pub top5: Vec<(String, f64)>,
    /// The actual token was outside the vocabulary and scored as `<unk>`.
    #[serde(default)]
    pub oov: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub tokens: Vec<Token>,
    pub ids: Vec<TokenId>,
    pub scores: Vec<TokenScore>,
    pub model_name: String,
    pub mode: ScoringMode,
    pub vocab_size: usize,
}

impl ScoredDocument {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.scores.iter().map(|s| s.rank)
    }
}

/// Natural-log entropy; zero-probability entries contribute nothing.
pub fn entropy(dist: &Distribution) -> f64 {
    -dist
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// 1-based rank of `id` under (probability descending, id ascending).
pub fn rank_of(dist: &Distribution, id: TokenId) -> usize {
    let target = dist.prob(id);
    let ahead = dist
        .probs()
        .iter()
        .enumerate()
        .filter(|&(i, &p)| p > target || (p == target && (i as TokenId) < id))
        .count();
    ahead + 1
}

/// Computes the three tests and the top-5 list for `actual` in one pass.
pub fn score_token(dist: &Distribution, actual: TokenId, vocab: &Vocabulary) -> TokenScore {
    let probs = dist.probs();
    let prob = dist.prob(actual);
    let mut ahead = 0usize;
    let mut max = 0.0f64;
    let mut h = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        if p > prob || (p == prob && (i as TokenId) < actual) {
            ahead += 1;
        }
        if p > max {
            max = p;
        }
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    let top5 = dist
        .top_k(5)
        .into_iter()
        .map(|(id, p)| (vocab.token(id).unwrap_or_default().to_string(), p))
        .collect();
    TokenScore {
        prob,
        rank: ahead + 1,
        entropy: h,
        frac_prob: if max > 0.0 { prob / max } else { 0.0 },
        top5,
        oov: false,
    }
}

/// Tokenizes `text` with the model's case folding and scores every token.
pub fn score_document(
    model: &dyn DetectionModel,
    text: &str,
    mode: ScoringMode,
) -> Result<ScoredDocument> {
    let tokens = tokenize(text, model.info().case_folded)?;
    score_tokens(model, tokens, mode)
}

/// Scores an already tokenized document. The first token is predicted from
/// the empty (`<s>`) context.
pub fn score_tokens(
    model: &dyn DetectionModel,
    tokens: Vec<Token>,
    mode: ScoringMode,
) -> Result<ScoredDocument> {
    if tokens.is_empty() {
        return Err(crate::Error::NoTokens);
    }
    let vocab = model.vocabulary();
    let ids: Vec<TokenId> = tokens.iter().map(|t| vocab.id_or_unk(&t.text)).collect();
    let texts: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
    let seq = Sequence {
        ids: &ids,
        texts: &texts,
    };
    let mut scores = Vec::with_capacity(ids.len());
    for (i, &id) in ids.iter().enumerate() {
        let dist = model.predict(seq, i, mode)?;
        let mut score = score_token(&dist, id, vocab);
        score.oov = id == vocab.unk_id() && tokens[i].text != crate::model::UNK;
        scores.push(score);
    }
    let info = model.info();
    Ok(ScoredDocument {
        tokens,
        ids,
        scores,
        model_name: info.name,
        mode,
        vocab_size: vocab.len(),
    })
}
