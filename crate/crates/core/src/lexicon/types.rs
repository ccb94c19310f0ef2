use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LexiconError;

/// Part of speech of a synset. Adjective satellites are folded into
/// [`LexicalType::Adjective`].
///
/// The derived ordering (noun, verb, adjective, adverb) is the order used by
/// annotation listings; search results use [`LexicalType::SEARCH_ORDER`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LexicalType {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

impl LexicalType {
    pub const ALL: [LexicalType; 4] = [
        LexicalType::Noun,
        LexicalType::Verb,
        LexicalType::Adjective,
        LexicalType::Adverb,
    ];

    /// Group order of keyword search results.
    pub const SEARCH_ORDER: [LexicalType; 4] = [
        LexicalType::Noun,
        LexicalType::Adjective,
        LexicalType::Verb,
        LexicalType::Adverb,
    ];

    /// One-character tag used in synset ids and WNDB pos fields.
    pub fn tag(self) -> char {
        match self {
            LexicalType::Noun => 'n',
            LexicalType::Verb => 'v',
            LexicalType::Adjective => 'a',
            LexicalType::Adverb => 'r',
        }
    }

    pub fn from_tag(tag: char) -> Option<Self> {
        match tag {
            'n' => Some(LexicalType::Noun),
            'v' => Some(LexicalType::Verb),
            'a' => Some(LexicalType::Adjective),
            'r' => Some(LexicalType::Adverb),
            _ => None,
        }
    }

    /// Maps a WNDB `ss_type` code, accepting `s` (adjective satellite).
    pub fn from_ss_type(code: &str) -> Option<Self> {
        match code {
            "s" => Some(LexicalType::Adjective),
            c if c.len() == 1 => c.chars().next().and_then(Self::from_tag),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LexicalType::Noun => "noun",
            LexicalType::Verb => "verb",
            LexicalType::Adjective => "adjective",
            LexicalType::Adverb => "adverb",
        }
    }

    fn file_suffix(self) -> &'static str {
        match self {
            LexicalType::Noun => "noun",
            LexicalType::Verb => "verb",
            LexicalType::Adjective => "adj",
            LexicalType::Adverb => "adv",
        }
    }

    pub fn data_file_name(self) -> String {
        format!("data.{}", self.file_suffix())
    }

    pub fn index_file_name(self) -> String {
        format!("index.{}", self.file_suffix())
    }

    /// Rank of this type in search result ordering.
    pub(crate) fn search_rank(self) -> usize {
        match self {
            LexicalType::Noun => 0,
            LexicalType::Adjective => 1,
            LexicalType::Verb => 2,
            LexicalType::Adverb => 3,
        }
    }
}

impl fmt::Display for LexicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Identifier of a synset: lexical type plus byte offset into its data file.
///
/// The text form is the type tag followed by the zero-padded 8-digit offset,
/// e.g. `n02084071`. Ordering follows the text form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SynsetId {
    lexical_type: LexicalType,
    offset: u32,
}

pub const MAX_OFFSET: u32 = 99_999_999;

impl SynsetId {
    pub fn new(lexical_type: LexicalType, offset: u32) -> Option<Self> {
        (offset <= MAX_OFFSET).then_some(SynsetId {
            lexical_type,
            offset,
        })
    }

    pub fn lexical_type(&self) -> LexicalType {
        self.lexical_type
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }
}

impl Ord for SynsetId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lexical_type
            .tag()
            .cmp(&other.lexical_type.tag())
            .then(self.offset.cmp(&other.offset))
    }
}

impl PartialOrd for SynsetId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:08}", self.lexical_type.tag(), self.offset)
    }
}

impl FromStr for SynsetId {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || LexiconError::InvalidIdFormat(s.to_string());
        let mut chars = s.chars();
        let tag = chars.next().ok_or_else(invalid)?;
        let lexical_type = LexicalType::from_tag(tag).ok_or_else(invalid)?;
        let digits = chars.as_str();
        if digits.len() != 8 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let offset = digits.parse().map_err(|_| invalid())?;
        Ok(SynsetId {
            lexical_type,
            offset,
        })
    }
}

impl Serialize for SynsetId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SynsetId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// One WordNet concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    id: SynsetId,
    lemmas: Vec<String>,
    gloss: String,
}

impl Synset {
    /// Returns `None` when `lemmas` is empty, any lemma is empty, or the gloss is blank.
    pub fn new(id: SynsetId, lemmas: Vec<String>, gloss: impl Into<String>) -> Option<Self> {
        let gloss = gloss.into();
        if lemmas.is_empty() || lemmas.iter().any(|l| l.is_empty()) || gloss.trim().is_empty() {
            return None;
        }
        Some(Synset { id, lemmas, gloss })
    }

    pub fn id(&self) -> SynsetId {
        self.id
    }

    pub fn lexical_type(&self) -> LexicalType {
        self.id.lexical_type
    }

    /// Lemmas in their file form, multiword lemmas joined by underscores.
    pub fn lemmas(&self) -> &[String] {
        &self.lemmas
    }

    pub fn first_lemma(&self) -> &str {
        &self.lemmas[0]
    }

    pub fn display_lemmas(&self) -> impl Iterator<Item = String> + '_ {
        self.lemmas.iter().map(|l| display_form(l))
    }

    /// Display form of the first lemma; this is the synset's name in listings.
    pub fn name(&self) -> String {
        display_form(&self.lemmas[0])
    }

    pub fn gloss(&self) -> &str {
        &self.gloss
    }

    /// Key for alphabetical ordering inside a lexical-type group.
    pub(crate) fn sort_key(&self) -> (String, SynsetId) {
        (fold_case(&display_form(&self.lemmas[0])), self.id)
    }
}

impl Serialize for Synset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Synset", 6)?;
        s.serialize_field("id", &self.id)?;
        s.serialize_field("lexical_type", &self.lexical_type())?;
        s.serialize_field("name", &self.name())?;
        s.serialize_field("lemmas", &self.lemmas)?;
        s.serialize_field("words", &self.display_lemmas().collect::<Vec<_>>())?;
        s.serialize_field("gloss", &self.gloss)?;
        s.end()
    }
}

/// Lemma with underscores replaced by spaces.
pub fn display_form(lemma: &str) -> String {
    lemma.replace('_', " ")
}

/// Context-free per-character lowercasing. Unlike `str::to_lowercase` the
/// result for a string is always the concatenation of the results for its
/// characters, so prefixes stay prefixes.
pub fn fold_case(text: &str) -> String {
    text.chars().flat_map(char::to_lowercase).collect()
}
