//! Line-oriented text format for n-gram models.
//!
//! ```text
//! FAKESCOPE-NGRAM v1
//! order=3
//! discount=0.75
//! casefold=true
//! vocab <size>
//! <one token per line>
//! counts <records>
//! <context ids, tab separated>\t|\t<token id>\t<count>
//! end
//! ```
//!
//! Records with an empty context start with `|`. The record count and the
//! trailing `end` line let a reader reject truncated files.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ngram::CountTable;
use crate::model::{NGramModel, TokenId, Vocabulary};

pub const FORMAT_MAGIC: &str = "FAKESCOPE-NGRAM";
pub const FORMAT_VERSION: &str = "v1";

pub fn write_model<W: Write>(model: &NGramModel, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let io = |e| Error::io("writing model", e);
    writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION}").map_err(io)?;
    writeln!(out, "order={}", model.order()).map_err(io)?;
    writeln!(out, "discount={}", model.discount()).map_err(io)?;
    writeln!(out, "casefold={}", model.case_folded()).map_err(io)?;
    writeln!(out, "vocab {}", model.vocab().len()).map_err(io)?;
    for token in model.vocab().tokens() {
        if token.is_empty() || token.contains(['\n', '\r']) {
            return Err(Error::param(format!(
                "token {token:?} cannot be stored in the line format"
            )));
        }
        writeln!(out, "{token}").map_err(io)?;
    }
    let records: usize = model.counts().values().map(|s| s.len()).sum();
    writeln!(out, "counts {records}").map_err(io)?;
    let mut line = String::new();
    for (context, successors) in model.counts() {
        for (token, count) in successors {
            line.clear();
            for id in context {
                line.push_str(&id.to_string());
                line.push('\t');
            }
            line.push_str(&format!("|\t{token}\t{count}"));
            writeln!(out, "{line}").map_err(io)?;
        }
    }
    writeln!(out, "end").map_err(io)?;
    out.flush().map_err(io)
}

pub fn save_model(model: &NGramModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    write_model(model, file)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<NGramModel> {
    let path = path.as_ref();
    let file =
        fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_model(file)
}

struct Lines<R> {
    inner: std::io::Lines<BufReader<R>>,
    number: usize,
}

impl<R: Read> Lines<R> {
    fn next_line(&mut self, what: &str) -> Result<String> {
        self.number += 1;
        match self.inner.next() {
            Some(Ok(line)) => Ok(line),
            Some(Err(e)) => Err(Error::io(format!("reading model line {}", self.number), e)),
            None => Err(self.error(format!("unexpected end of file, expected {what}"))),
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.number,
            message: message.into(),
        }
    }

    fn key_value(&mut self, key: &str) -> Result<String> {
        let line = self.next_line(key)?;
        match line.strip_prefix(key).and_then(|r| r.strip_prefix('=')) {
            Some(v) => Ok(v.to_string()),
            None => Err(self.error(format!("expected {key}=<value>, found {line:?}"))),
        }
    }

    fn section(&mut self, key: &str) -> Result<usize> {
        let line = self.next_line(key)?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| self.error(format!("expected '{key} <n>', found {line:?}")))
    }
}

pub fn read_model<R: Read>(input: R) -> Result<NGramModel> {
    let mut lines = Lines {
        inner: BufReader::new(input).lines(),
        number: 0,
    };

    let header = lines.next_line("header")?;
    let version = header
        .strip_prefix(FORMAT_MAGIC)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| {
            lines.error(format!(
                "expected header '{FORMAT_MAGIC} {FORMAT_VERSION}', found {header:?}"
            ))
        })?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            expected: FORMAT_VERSION,
            found: version.to_string(),
        });
    }

    let order: usize = {
        let v = lines.key_value("order")?;
        v.parse().map_err(|_| lines.error(format!("bad order {v:?}")))?
    };
    let discount: f64 = {
        let v = lines.key_value("discount")?;
        v.parse().map_err(|_| lines.error(format!("bad discount {v:?}")))?
    };
    let case_folded: bool = {
        let v = lines.key_value("casefold")?;
        v.parse().map_err(|_| lines.error(format!("bad casefold {v:?}")))?
    };

    let size = lines.section("vocab")?;
    let mut tokens = Vec::with_capacity(size);
    for _ in 0..size {
        tokens.push(lines.next_line("vocabulary token")?);
    }
    let vocab = Vocabulary::new(tokens).map_err(|e| lines.error(e.to_string()))?;

    let records = lines.section("counts")?;
    let mut counts = CountTable::new();
    for _ in 0..records {
        let line = lines.next_line("count record")?;
        let (context, rest) = line
            .split_once('|')
            .ok_or_else(|| lines.error("count record without '|' separator"))?;
        let parse_id = |s: &str| -> Result<TokenId> {
            s.parse()
                .map_err(|_| lines.error(format!("bad token id {s:?}")))
        };
        let context: Vec<TokenId> = context
            .split('\t')
            .filter(|s| !s.is_empty())
            .map(parse_id)
            .collect::<Result<_>>()?;
        let mut fields = rest.split('\t').filter(|s| !s.is_empty());
        let (Some(token), Some(count), None) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(lines.error("count record must end with '<token id>\\t<count>'"));
        };
        let token = parse_id(token)?;
        let count: u64 = count
            .parse()
            .map_err(|_| lines.error(format!("bad count {count:?}")))?;
        if counts
            .entry(context)
            .or_default()
            .insert(token, count)
            .is_some()
        {
            return Err(lines.error("duplicate count record"));
        }
    }
    let end = lines.next_line("end")?;
    if end != "end" {
        return Err(lines.error(format!("expected 'end', found {end:?}")));
    }

    NGramModel::from_counts(order, discount, case_folded, vocab, counts)
        .map_err(|e| lines.error(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{train_ngram, TrainConfig};

    fn tiny() -> NGramModel {
        let corpus: Vec<Vec<&str>> = vec![
            "the cat sat .".split(' ').collect(),
            "the cat ran .".split(' ').collect(),
        ];
        train_ngram(
            &corpus,
            TrainConfig {
                order: 3,
                min_count: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap()
    }

    fn bytes(model: &NGramModel) -> Vec<u8> {
        let mut buf = Vec::new();
        write_model(model, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_preserves_counts_and_distributions() {
        let m = tiny();
        let loaded = read_model(bytes(&m).as_slice()).unwrap();
        assert_eq!(loaded.counts(), m.counts());
        assert_eq!(loaded.vocab(), m.vocab());
        assert_eq!(loaded.order(), m.order());
        assert_eq!(loaded.discount(), m.discount());
        for ctx in [vec![], vec![3], vec![3, 4], vec![4, 5, 6]] {
            let a = m.next_distribution(&ctx).unwrap();
            let b = loaded.next_distribution(&ctx).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn header_layout() {
        let text = String::from_utf8(bytes(&tiny())).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "FAKESCOPE-NGRAM v1");
        assert_eq!(lines[1], "order=3");
        assert_eq!(lines[2], "discount=0.75");
        assert_eq!(lines[4], "vocab 8");
        assert_eq!(*lines.last().unwrap(), "end");
    }

    #[test]
    fn truncated_file_fails() {
        let full = bytes(&tiny());
        for cut in [10, full.len() / 2, full.len() - 5] {
            assert!(read_model(&full[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn unknown_version_is_explicit() {
        let text = String::from_utf8(bytes(&tiny()))
            .unwrap()
            .replacen("v1", "v7", 1);
        let err = read_model(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Version { .. }));
        assert!(err.to_string().contains("expected v1"));
    }

    #[test]
    fn corrupt_record_fails() {
        let text = String::from_utf8(bytes(&tiny()))
            .unwrap()
            .replacen("|\t", "|\tx", 1);
        assert!(matches!(
            read_model(text.as_bytes()),
            Err(Error::Format { .. })
        ));
        let garbage = b"not a model\n";
        let err = read_model(&garbage[..]).unwrap_err();
        assert!(err.to_string().contains("FAKESCOPE-NGRAM v1"));
    }
}
