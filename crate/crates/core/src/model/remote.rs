//! HTTP adapter for external detection models.
//!
//! An adapter describes itself at `GET /v1/info` and scores contexts at
//! `POST /v1/score`:
//!
//! ```text
//! request:  {"context": [token, ...], "mode": "causal" | "masked", "window": n}
//! response: {"probs": {token: prob, ...}, "top5": [[token, prob], ...]}
//! ```
//!
//! In masked mode the context holds up to `window` tokens on each side of the
//! scored position, which is replaced by [`MASK_TOKEN`].

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    DetectionModel, Distribution, ModelInfo, ModelKind, ScoringMode, Sequence, Vocabulary,
};

pub const MASK_TOKEN: &str = "<mask>";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Self-description served by an adapter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterInfo {
    #[serde(default)]
    pub name: String,
    pub vocab: Vec<String>,
    #[serde(default = "yes")]
    pub causal: bool,
    #[serde(default)]
    pub masked: bool,
    #[serde(default)]
    pub case_folded: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Serialize)]
struct ScoreRequest<'a> {
    context: &'a [String],
    mode: &'static str,
    window: usize,
}

#[derive(Debug, Deserialize)]
struct ScoreResponse {
    probs: HashMap<String, f64>,
    top5: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemotePrediction {
    pub dist: Distribution,
    pub top5: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

pub struct RemoteModel {
    name: String,
    endpoint: String,
    timeout: Duration,
    agent: ureq::Agent,
    info: AdapterInfo,
    vocab: Vocabulary,
}

impl std::fmt::Debug for RemoteModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteModel")
            .field("name", &self.name)
            .field("endpoint", &self.endpoint)
            .field("vocab_size", &self.vocab.len())
            .finish()
    }
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

fn transport_error(err: ureq::Error, timeout: Duration) -> Error {
    match err {
        ureq::Error::Timeout(_) => Error::Timeout(timeout),
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => Error::Timeout(timeout),
        ureq::Error::Json(e) => Error::Protocol(format!("malformed response: {e}")),
        other => Error::Protocol(other.to_string()),
    }
}

impl RemoteModel {
    /// Fetches `/v1/info` from `endpoint` and builds the adapter handle.
    pub fn connect(name: &str, endpoint: &str, timeout: Duration) -> Result<Self> {
        let endpoint = endpoint.trim_end_matches('/').to_string();
        let agent = agent(timeout);
        let mut response = agent
            .get(format!("{endpoint}/v1/info"))
            .call()
            .map_err(|e| transport_error(e, timeout))?;
        if !response.status().is_success() {
            return Err(Error::Protocol(format!(
                "adapter info returned HTTP {}",
                response.status()
            )));
        }
        let info: AdapterInfo = response
            .body_mut()
            .read_json()
            .map_err(|e| transport_error(e, timeout))?;
        Self::with_info(name, &endpoint, info, timeout)
    }

    /// Builds the handle from an already known description.
    pub fn with_info(name: &str, endpoint: &str, info: AdapterInfo, timeout: Duration) -> Result<Self> {
        if info.vocab.is_empty() {
            return Err(Error::VocabularyMismatch(
                "adapter declared an empty vocabulary".into(),
            ));
        }
        let vocab = Vocabulary::with_reserved(info.vocab.iter().cloned())?;
        Ok(Self {
            name: name.to_string(),
            endpoint: endpoint.trim_end_matches('/').to_string(),
            timeout,
            agent: agent(timeout),
            info,
            vocab,
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn adapter_info(&self) -> &AdapterInfo {
        &self.info
    }

    /// Queries the adapter and projects its answer onto the declared
    /// vocabulary. Responses whose mass is off by more than 1e-6 are
    /// renormalized and a warning is recorded.
    pub fn remote_distribution(
        &self,
        context: &[String],
        mode: ScoringMode,
    ) -> Result<RemotePrediction> {
        mode.validate()?;
        let window = match mode {
            ScoringMode::Causal if !self.info.causal => return Err(Error::Capability("causal")),
            ScoringMode::Masked { .. } if !self.info.masked => {
                return Err(Error::Capability("masked"))
            }
            ScoringMode::Causal => 0,
            ScoringMode::Masked { window } => window,
        };
        let request = ScoreRequest {
            context,
            mode: mode.name(),
            window,
        };
        let mut response = self
            .agent
            .post(format!("{}/v1/score", self.endpoint))
            .send_json(&request)
            .map_err(|e| transport_error(e, self.timeout))?;
        let status = response.status();
        if !status.is_success() {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            return Err(Error::Protocol(format!("adapter returned HTTP {status}: {body}")));
        }
        let parsed: ScoreResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| transport_error(e, self.timeout))?;
        self.project(parsed)
    }

    fn project(&self, response: ScoreResponse) -> Result<RemotePrediction> {
        let mut probs = vec![0.0; self.vocab.len()];
        let mut total = 0.0;
        for (token, p) in &response.probs {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::Protocol(format!("invalid probability {p} for {token:?}")));
            }
            let id = self.vocab.id(token).ok_or_else(|| {
                Error::VocabularyMismatch(format!("token {token:?} not in the declared vocabulary"))
            })?;
            probs[id as usize] = *p;
            total += p;
        }
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Protocol("response carries no probability mass".into()));
        }
        let mut warnings = Vec::new();
        if (total - 1.0).abs() > 1e-6 {
            warnings.push(format!("probabilities summed to {total}; renormalized"));
        }
        let dist = Distribution::from_weights(probs)?;
        for (token, _) in &response.top5 {
            if self.vocab.id(token).is_none() {
                return Err(Error::VocabularyMismatch(format!(
                    "top-5 token {token:?} not in the declared vocabulary"
                )));
            }
        }
        Ok(RemotePrediction {
            dist,
            top5: response.top5,
            warnings,
        })
    }
}

impl DetectionModel for RemoteModel {
    fn info(&self) -> ModelInfo {
        ModelInfo {
            name: self.name.clone(),
            kind: ModelKind::External,
            causal: self.info.causal,
            masked: self.info.masked,
            vocab_size: self.vocab.len(),
            case_folded: self.info.case_folded,
        }
    }

    fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    fn predict(&self, seq: Sequence<'_>, target: usize, mode: ScoringMode) -> Result<Distribution> {
        if target > seq.texts.len() {
            return Err(Error::param(format!(
                "target {target} beyond sequence of length {}",
                seq.texts.len()
            )));
        }
        let context: Vec<String> = match mode {
            ScoringMode::Causal => seq.texts[..target].to_vec(),
            ScoringMode::Masked { window } => {
                let start = target.saturating_sub(window);
                let end = seq.texts.len().min(target + 1 + window);
                let mut ctx = seq.texts[start..target].to_vec();
                ctx.push(MASK_TOKEN.to_string());
                if target < seq.texts.len() {
                    ctx.extend_from_slice(&seq.texts[target + 1..end]);
                }
                ctx
            }
        };
        Ok(self.remote_distribution(&context, mode)?.dist)
    }
}
