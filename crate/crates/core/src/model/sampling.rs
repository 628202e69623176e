use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{DetectionModel, ScoringMode, Sequence, TokenId};

/// Head-of-distribution sampling knobs. `top_k == 0` disables truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub temperature: f64,
    pub top_k: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            top_k: 0,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperature > 0.0 && self.temperature.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "temperature must be positive, got {}",
                self.temperature
            )))
        }
    }
}

/// The distribution a sampler actually draws from: keep the `top_k` most
/// probable entries (ties by lower id), renormalize, raise to `1/temperature`,
/// renormalize again. Ids in `banned` get zero mass before truncation.
pub fn effective_distribution(
    probs: &[f64],
    config: SamplingConfig,
    banned: &[TokenId],
) -> Result<Vec<f64>> {
    config.validate()?;
    let mut weights = probs.to_vec();
    for &id in banned {
        if let Some(w) = weights.get_mut(id as usize) {
            *w = 0.0;
        }
    }

    if config.top_k > 0 && config.top_k < weights.len() {
        let mut order: Vec<TokenId> = (0..weights.len() as TokenId).collect();
        let kth = config.top_k - 1;
        order.select_nth_unstable_by(kth, |&a, &b| {
            weights[b as usize]
                .total_cmp(&weights[a as usize])
                .then(a.cmp(&b))
        });
        for &id in &order[config.top_k..] {
            weights[id as usize] = 0.0;
        }
    }
    normalize(&mut weights)?;

    if config.temperature != 1.0 {
        let max = weights.iter().cloned().fold(0.0, f64::max);
        let inv_t = 1.0 / config.temperature;
        for w in &mut weights {
            if *w > 0.0 {
                *w = ((w.ln() - max.ln()) * inv_t).exp();
            }
        }
        normalize(&mut weights)?;
    }
    Ok(weights)
}

fn normalize(weights: &mut [f64]) -> Result<()> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::param("no probability mass left to sample from"));
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(())
}

/// Draws one id from normalized weights using inverse-CDF sampling.
pub fn sample_step<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> TokenId {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i as TokenId;
        }
    }
    last as TokenId
}

/// Generates `length` tokens continuing `seed`. The reserved `<unk>`, `<s>`
/// and `</s>` ids are never emitted, so output is one open-ended word stream.
/// Deterministic for a given `rng_seed`.
pub fn sample(
    model: &dyn DetectionModel,
    seed: &[TokenId],
    length: usize,
    config: SamplingConfig,
    rng_seed: u64,
) -> Result<Vec<TokenId>> {
    config.validate()?;
    if length == 0 {
        return Err(Error::param("sample length must be at least 1"));
    }
    let vocab = model.vocabulary();
    seed.iter().try_for_each(|&id| vocab.check(id))?;
    let banned = [vocab.unk_id(), vocab.bos_id(), vocab.eos_id()];

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut ids = seed.to_vec();
    let mut texts: Vec<String> = ids
        .iter()
        .map(|&id| vocab.token(id).unwrap_or_default().to_string())
        .collect();
    for _ in 0..length {
        let seq = Sequence {
            ids: &ids,
            texts: &texts,
        };
        let dist = model.predict(seq, ids.len(), ScoringMode::Causal)?;
        let weights = effective_distribution(dist.probs(), config, &banned)?;
        let next = sample_step(&weights, &mut rng);
        ids.push(next);
        texts.push(vocab.token(next).unwrap_or_default().to_string());
    }
    Ok(ids.split_off(seed.len()))
}
