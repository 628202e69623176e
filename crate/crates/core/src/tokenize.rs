//! Word-level tokenizer shared by training, scoring and generation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One token with its byte span in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Splits text into maximal runs of letters and digits; every other
/// non-whitespace character is a token of its own. With `case_fold` the token
/// text is lower-cased while spans still point into the original string.
pub fn tokenize(text: &str, case_fold: bool) -> Result<Vec<Token>> {
    let tokens = split(text, case_fold);
    if tokens.is_empty() {
        return Err(Error::NoTokens);
    }
    Ok(tokens)
}

/// Like [`tokenize`] but returns an empty list instead of an error.
pub fn split(text: &str, case_fold: bool) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;
    let fold = |s: &str| {
        if case_fold {
            s.to_lowercase()
        } else {
            s.to_string()
        }
    };
    for (i, c) in text.char_indices() {
        if is_word_char(c) {
            word_start.get_or_insert(i);
            continue;
        }
        if let Some(start) = word_start.take() {
            tokens.push(Token {
                text: fold(&text[start..i]),
                start,
                end: i,
            });
        }
        if !c.is_whitespace() {
            let end = i + c.len_utf8();
            tokens.push(Token {
                text: fold(&text[i..end]),
                start: i,
                end,
            });
        }
    }
    if let Some(start) = word_start {
        tokens.push(Token {
            text: fold(&text[start..]),
            start,
            end: text.len(),
        });
    }
    tokens
}

/// Token strings only, for building training corpora.
pub fn words(text: &str, case_fold: bool) -> Vec<String> {
    split(text, case_fold).into_iter().map(|t| t.text).collect()
}

/// Joins tokens into readable text that tokenizes back to the same tokens:
/// word tokens are separated by spaces, punctuation attaches to its left
/// neighbour, and opening brackets or apostrophes attach to the right.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue_next = true;
    for token in tokens {
        let token = token.as_ref();
        let is_word = token.chars().next().is_some_and(is_word_char);
        let attaches_left = !is_word && !matches!(token, "(" | "[" | "{" | "\"");
        if !glue_next && !attaches_left {
            out.push(' ');
        }
        out.push_str(token);
        glue_next = !is_word && matches!(token, "(" | "[" | "{" | "'" | "-");
    }
    out
}
