use std::collections::BTreeMap;
use std::sync::Arc;

use fakescope::model::{DetectionModel, ModelKind};
use serde::{Deserialize, Serialize};

/// Detection models by name, loaded once and shared read-only.
#[derive(Clone, Default)]
pub struct ModelRegistry {
    models: BTreeMap<String, Arc<dyn DetectionModel>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub name: String,
    pub kind: ModelKind,
    pub causal: bool,
    pub masked: bool,
    pub vocab_size: usize,
}

impl ModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the model registered under `name`.
    pub fn register(&mut self, name: impl Into<String>, model: Arc<dyn DetectionModel>) {
        self.models.insert(name.into(), model);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn DetectionModel>> {
        self.models.get(name).cloned()
    }

    pub fn names(&self) -> Vec<String> {
        self.models.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Sorted by name.
    pub fn entries(&self) -> Vec<ModelEntry> {
        self.models
            .iter()
            .map(|(name, m)| {
                let info = m.info();
                ModelEntry {
                    name: name.clone(),
                    kind: info.kind,
                    causal: info.causal,
                    masked: info.masked,
                    vocab_size: info.vocab_size,
                }
            })
            .collect()
    }
}
