use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::Label;
use crate::error::{Error, Result};

/// One raw labeled document; also the JSONL record layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON record per line with `id`, `text`, `label`, `source`.
    Jsonl,
    /// `<root>/<label>/<source>/*.txt`.
    Directory,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// Where the documents came from (file paths, generator settings).
    pub provenance: Vec<String>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, provenance: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if doc.source.trim().is_empty() {
                return Err(Error::Corpus(format!("document {:?} has an empty source", doc.id)));
            }
            if doc.text.trim().is_empty() {
                return Err(Error::Corpus(format!("document {:?} is empty", doc.id)));
            }
        }
        Ok(Self {
            documents,
            provenance,
        })
    }

    pub fn merge(mut self, other: Corpus) -> Result<Self> {
        self.documents.extend(other.documents);
        self.provenance.extend(other.provenance);
        Self::new(self.documents, self.provenance)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Source names per label, sorted.
    pub fn sources(&self) -> BTreeMap<Label, BTreeSet<String>> {
        let mut out: BTreeMap<Label, BTreeSet<String>> = BTreeMap::new();
        for d in &self.documents {
            out.entry(d.label).or_default().insert(d.source.clone());
        }
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n")
                .map_err(|e| Error::io("writing corpus", e))?;
        }
        Ok(())
    }
}

/// Loads a corpus, inferring the format from the path when `format` is
/// `None` (directories use the directory layout, files are JSONL).
pub fn load_corpus(path: impl AsRef<Path>, format: Option<CorpusFormat>) -> Result<Corpus> {
    let path = path.as_ref();
    let format = format.unwrap_or(if path.is_dir() {
        CorpusFormat::Directory
    } else {
        CorpusFormat::Jsonl
    });
    match format {
        CorpusFormat::Jsonl => load_jsonl(path),
        CorpusFormat::Directory => load_directory(path),
    }
}

fn load_jsonl(path: &Path) -> Result<Corpus> {
    let file =
        fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let schema_error = |message: String| Error::Schema {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let doc: Document = serde_json::from_str(&line).map_err(|e| schema_error(e.to_string()))?;
        if !seen.insert(doc.id.clone()) {
            return Err(schema_error(format!("duplicate document id {:?}", doc.id)));
        }
        if doc.source.trim().is_empty() {
            return Err(schema_error("empty \"source\"".into()));
        }
        if doc.text.trim().is_empty() {
            return Err(schema_error("empty \"text\"".into()));
        }
        documents.push(doc);
    }
    Corpus::new(documents, vec![path.display().to_string()])
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
    entries.sort();
    Ok(entries)
}

fn load_directory(root: &Path) -> Result<Corpus> {
    let mut documents = Vec::new();
    for label_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let label_name = label_dir.file_name().unwrap_or_default().to_string_lossy();
        let label: Label = label_name.parse().map_err(|_| {
            Error::Corpus(format!(
                "{}: expected a 'real' or 'fake' directory",
                label_dir.display()
            ))
        })?;
        for source_dir in sorted_entries(&label_dir)?.into_iter().filter(|p| p.is_dir()) {
            let source = source_dir
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .to_string();
            for file in sorted_entries(&source_dir)? {
                if file.extension().is_none_or(|e| e != "txt") {
                    continue;
                }
                let text = fs::read_to_string(&file)
                    .map_err(|e| Error::io(format!("reading {}", file.display()), e))?;
                let stem = file.file_stem().unwrap_or_default().to_string_lossy();
                documents.push(Document {
                    id: format!("{label}/{source}/{stem}"),
                    text,
                    label,
                    source: source.clone(),
                });
            }
        }
    }
    Corpus::new(documents, vec![root.display().to_string()])
}
