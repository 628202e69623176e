use std::collections::HashMap;

use crate::error::{Error, Result};

pub type TokenId = u32;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Dense token-string to id mapping with three reserved entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    unk_id: TokenId,
    bos_id: TokenId,
    eos_id: TokenId,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered token list. The reserved tokens must
    /// be present and every entry must be unique.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as TokenId).is_some() {
                return Err(Error::VocabularyMismatch(format!("duplicate token {t:?}")));
            }
        }
        let find = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::VocabularyMismatch(format!("reserved token {s} missing")))
        };
        let (unk_id, bos_id, eos_id) = (find(UNK)?, find(BOS)?, find(EOS)?);
        Ok(Self {
            tokens,
            index,
            unk_id,
            bos_id,
            eos_id,
        })
    }

    /// Reserved tokens first (ids 0, 1, 2), then `words` in order. Words that
    /// collide with a reserved token are skipped.
    pub fn with_reserved<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens = vec![UNK.to_string(), BOS.to_string(), EOS.to_string()];
        tokens.extend(
            words
                .into_iter()
                .map(Into::into)
                .filter(|w: &String| w != UNK && w != BOS && w != EOS),
        );
        Self::new(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unk_id(&self) -> TokenId {
        self.unk_id
    }

    pub fn bos_id(&self) -> TokenId {
        self.bos_id
    }

    pub fn eos_id(&self) -> TokenId {
        self.eos_id
    }

    pub fn is_reserved(&self, id: TokenId) -> bool {
        id == self.unk_id || id == self.bos_id || id == self.eos_id
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id(token).unwrap_or(self.unk_id)
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn check(&self, id: TokenId) -> Result<()> {
        if (id as usize) < self.tokens.len() {
            Ok(())
        } else {
            Err(Error::TokenOutOfRange {
                id,
                size: self.tokens.len(),
            })
        }
    }
}
