//! WordNet lexicon: WNDB loading, synset lookup and keyword search.

mod search;
mod types;
pub mod wndb;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use search::{normalize_query, query_matches_lemma, SearchResultPage, SynsetGroup, DEFAULT_SEARCH_LIMIT};
pub use types::{display_form, fold_case, LexicalType, Synset, SynsetId};
pub use wndb::{parse_data_file, parse_index_file, IndexEntry};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("missing WordNet file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {reason}")]
    MalformedLine {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("synset {0} not found")]
    NotFound(SynsetId),
    #[error("invalid synset id {0:?}, expected a type tag (n, v, a, r) and 8 digits")]
    InvalidIdFormat(String),
    #[error("search query is empty")]
    EmptyQuery,
    #[error("search limit must be at least 1")]
    InvalidLimit,
}

impl LexiconError {
    pub fn code(&self) -> &'static str {
        match self {
            LexiconError::MissingFile(_) => "missing_file",
            LexiconError::Io { .. } => "io_failure",
            LexiconError::MalformedLine { .. } => "malformed_line",
            LexiconError::NotFound(_) => "synset_not_found",
            LexiconError::InvalidIdFormat(_) => "invalid_synset_id",
            LexiconError::EmptyQuery => "empty_query",
            LexiconError::InvalidLimit => "invalid_limit",
        }
    }
}

/// Synset counts per lexical type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TypeCounts {
    pub noun: usize,
    pub verb: usize,
    pub adjective: usize,
    pub adverb: usize,
}

impl TypeCounts {
    pub fn get(&self, t: LexicalType) -> usize {
        match t {
            LexicalType::Noun => self.noun,
            LexicalType::Verb => self.verb,
            LexicalType::Adjective => self.adjective,
            LexicalType::Adverb => self.adverb,
        }
    }

    fn bump(&mut self, t: LexicalType) {
        match t {
            LexicalType::Noun => self.noun += 1,
            LexicalType::Verb => self.verb += 1,
            LexicalType::Adjective => self.adjective += 1,
            LexicalType::Adverb => self.adverb += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.noun + self.verb + self.adjective + self.adverb
    }
}

/// Problem found while cross-checking an index file against the data files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexWarning {
    Unparsable { file: String, detail: String },
    UnresolvedOffset { lemma: String, id: SynsetId },
}

#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    pub index_files_checked: Vec<String>,
    pub warnings: Vec<IndexWarning>,
}

/// Immutable WordNet dictionary with a token index over lemmas.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    synsets: BTreeMap<SynsetId, Synset>,
    lemma_index: BTreeMap<String, Vec<SynsetId>>,
    counts: TypeCounts,
}

/// Lowercased underscore-delimited tokens of a lemma.
pub fn lemma_tokens(lemma: &str) -> impl Iterator<Item = String> + '_ {
    lemma.split('_').filter(|t| !t.is_empty()).map(fold_case)
}

impl Lexicon {
    /// Builds a lexicon from parsed synsets; fails on a repeated id.
    pub fn from_synsets(synsets: impl IntoIterator<Item = Synset>) -> Result<Self, LexiconError> {
        let mut map = BTreeMap::new();
        let mut counts = TypeCounts::default();
        let mut index: BTreeMap<String, BTreeSet<SynsetId>> = BTreeMap::new();
        for synset in synsets {
            let id = synset.id();
            for lemma in synset.lemmas() {
                for token in lemma_tokens(lemma) {
                    index.entry(token).or_default().insert(id);
                }
            }
            counts.bump(id.lexical_type());
            if map.insert(id, synset).is_some() {
                return Err(LexiconError::MalformedLine {
                    file: id.lexical_type().data_file_name(),
                    line: 0,
                    reason: format!("duplicate synset offset {id}"),
                });
            }
        }
        Ok(Lexicon {
            synsets: map,
            lemma_index: index
                .into_iter()
                .map(|(token, ids)| (token, ids.into_iter().collect()))
                .collect(),
            counts,
        })
    }

    /// Loads the four `data.*` files from a WordNet `dict` directory.
    pub fn load(dict_dir: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::load_with_report(dict_dir).map(|(lexicon, _)| lexicon)
    }

    /// Like [`Lexicon::load`], additionally cross-checking any `index.*`
    /// files present. Index problems are returned as warnings.
    pub fn load_with_report(dict_dir: impl AsRef<Path>) -> Result<(Self, LoadReport), LexiconError> {
        let dir = dict_dir.as_ref();
        let mut synsets = Vec::new();
        for t in LexicalType::ALL {
            let path = dir.join(t.data_file_name());
            synsets.extend(parse_data_file(open(&path)?, t)?);
        }
        let lexicon = Self::from_synsets(synsets)?;

        let mut report = LoadReport::default();
        for t in LexicalType::ALL {
            let path = dir.join(t.index_file_name());
            if !path.is_file() {
                continue;
            }
            report.index_files_checked.push(t.index_file_name());
            let entries = match open(&path).and_then(|r| parse_index_file(r, t)) {
                Ok(entries) => entries,
                Err(err) => {
                    report.warnings.push(IndexWarning::Unparsable {
                        file: t.index_file_name(),
                        detail: err.to_string(),
                    });
                    continue;
                }
            };
            for entry in entries {
                for offset in entry.offsets {
                    // index offsets are parsed as 8 digits, always in range
                    let id = SynsetId::new(t, offset).expect("8-digit offset");
                    if !lexicon.synsets.contains_key(&id) {
                        report.warnings.push(IndexWarning::UnresolvedOffset {
                            lemma: entry.lemma.clone(),
                            id,
                        });
                    }
                }
            }
        }
        for warning in &report.warnings {
            tracing::warn!(?warning, "index cross-check");
        }
        Ok((lexicon, report))
    }

    pub fn get(&self, id: SynsetId) -> Result<&Synset, LexiconError> {
        self.synsets.get(&id).ok_or(LexiconError::NotFound(id))
    }

    /// Lookup by text id such as `n02084071`.
    pub fn get_by_text(&self, id: &str) -> Result<&Synset, LexiconError> {
        self.get(id.parse()?)
    }

    pub fn contains(&self, id: SynsetId) -> bool {
        self.synsets.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.synsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synsets.is_empty()
    }

    pub fn counts(&self) -> TypeCounts {
        self.counts
    }

    /// All synsets in id order.
    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.values()
    }

    /// The token index: lowercase lemma token to the ids carrying it.
    pub fn lemma_index(&self) -> impl Iterator<Item = (&str, &[SynsetId])> {
        self.lemma_index.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

fn open(path: &Path) -> Result<BufReader<File>, LexiconError> {
    match File::open(path) {
        Ok(file) => Ok(BufReader::new(file)),
        Err(err) if err.kind() == std::io::ErrorKind::NotFound => {
            Err(LexiconError::MissingFile(path.to_path_buf()))
        }
        Err(source) => Err(LexiconError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}
