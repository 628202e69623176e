use rayon::prelude::*;

use crate::classifier::Label;
use crate::error::Result;
use crate::experiment::{Corpus, Document};
use crate::model::{sample, DetectionModel, SamplingConfig, TokenId};
use crate::tokenize::detokenize;

pub const DEFAULT_DOC_LEN: usize = 200;

/// Temperature 0.7 without truncation, and top-40 truncation at temperature 1.
pub fn default_fake_configs() -> Vec<SamplingConfig> {
    vec![
        SamplingConfig {
            temperature: 0.7,
            top_k: 0,
        },
        SamplingConfig {
            temperature: 1.0,
            top_k: 40,
        },
    ]
}

/// `gen-t0.7`, `gen-k40`, or `gen-t0.7-k40` when both knobs are set.
pub fn source_name(config: &SamplingConfig) -> String {
    match (config.temperature != 1.0, config.top_k > 0) {
        (true, true) => format!("gen-t{}-k{}", config.temperature, config.top_k),
        (false, true) => format!("gen-k{}", config.top_k),
        _ => format!("gen-t{}", config.temperature),
    }
}

/// Independent, reproducible per-document seed.
fn doc_seed(seed: u64, config: usize, doc: usize) -> u64 {
    // splitmix64 finalizer over a combined key.
    let mut z = seed
        .wrapping_add((config as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((doc as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples `n_docs` documents of `doc_len` tokens for every configuration.
/// Document `i` continues `seeds[i % seeds.len()]` (or starts fresh when no
/// seeds are given); only the continuation becomes document text.
pub fn build_fake_sources(
    model: &dyn DetectionModel,
    seeds: &[Vec<String>],
    n_docs: usize,
    doc_len: usize,
    configs: &[SamplingConfig],
    rng_seed: u64,
) -> Result<Corpus> {
    configs.iter().try_for_each(SamplingConfig::validate)?;
    let vocab = model.vocabulary();
    let seed_ids: Vec<Vec<TokenId>> = seeds
        .iter()
        .map(|s| s.iter().map(|t| vocab.id_or_unk(t)).collect())
        .collect();

    let mut documents = Vec::with_capacity(n_docs * configs.len());
    let mut provenance = Vec::new();
    for (c, config) in configs.iter().enumerate() {
        let source = source_name(config);
        provenance.push(format!(
            "{source}: temperature={} top_k={} doc_len={doc_len} seed={rng_seed}",
            config.temperature, config.top_k
        ));
        let docs: Vec<Document> = (0..n_docs)
            .into_par_iter()
            .map(|i| {
                let prompt = if seed_ids.is_empty() {
                    &[][..]
                } else {
                    &seed_ids[i % seed_ids.len()][..]
                };
                let ids = sample(model, prompt, doc_len, *config, doc_seed(rng_seed, c, i))?;
                let words: Vec<&str> = ids
                    .iter()
                    .map(|&id| vocab.token(id).unwrap_or_default())
                    .collect();
                Ok(Document {
                    id: format!("{source}-{i:03}"),
                    text: detokenize(&words),
                    label: Label::Fake,
                    source: source.clone(),
                })
            })
            .collect::<Result<_>>()?;
        documents.extend(docs);
    }
    Corpus::new(documents, provenance)
}
