//! Readers for the WordNet WNDB plain-text files (`data.*` and `index.*`).

use std::io::BufRead;

use super::{LexicalType, LexiconError, Synset, SynsetId};

/// Entry of an `index.*` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub lemma: String,
    pub offsets: Vec<u32>,
}

/// Syntactic markers that may trail adjective words in `data.adj`.
const ADJ_MARKERS: [&str; 3] = ["(a)", "(p)", "(ip)"];

fn is_header(line: &str) -> bool {
    line.starts_with("  ")
}

/// Iterates the non-header, non-blank lines of a WNDB file with 1-based line numbers.
fn data_lines<R: BufRead>(
    source: R,
    file: String,
) -> impl Iterator<Item = Result<(usize, String), LexiconError>> {
    source
        .split(b'\n')
        .enumerate()
        .filter_map(move |(i, bytes)| {
            let bytes = match bytes {
                Ok(bytes) => bytes,
                Err(err) => {
                    return Some(Err(LexiconError::Io {
                        path: file.clone().into(),
                        source: err,
                    }))
                }
            };
            let line = String::from_utf8_lossy(&bytes);
            let line = line.trim_end_matches(['\r', '\n']);
            if is_header(line) || line.trim().is_empty() {
                None
            } else {
                Some(Ok((i + 1, line.to_string())))
            }
        })
}

struct LineCursor<'a> {
    fields: std::str::SplitAsciiWhitespace<'a>,
    file: &'a str,
    line: usize,
}

impl<'a> LineCursor<'a> {
    fn malformed(&self, reason: impl Into<String>) -> LexiconError {
        LexiconError::MalformedLine {
            file: self.file.to_string(),
            line: self.line,
            reason: reason.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str, LexiconError> {
        self.fields
            .next()
            .ok_or_else(|| self.malformed(format!("wrong field count: missing {what}")))
    }

    fn decimal(&mut self, what: &str) -> Result<u32, LexiconError> {
        let field = self.next(what)?;
        if !field.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.malformed(format!("non-numeric {what} {field:?}")));
        }
        field
            .parse()
            .map_err(|_| self.malformed(format!("non-numeric {what} {field:?}")))
    }

    fn hex(&mut self, what: &str) -> Result<u32, LexiconError> {
        let field = self.next(what)?;
        u32::from_str_radix(field, 16)
            .map_err(|_| self.malformed(format!("non-hexadecimal {what} {field:?}")))
    }

    fn offset(&mut self) -> Result<u32, LexiconError> {
        let field = self.next("offset")?;
        if field.len() != 8 || !field.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.malformed(format!("non-numeric offset {field:?}")));
        }
        field
            .parse()
            .map_err(|_| self.malformed(format!("non-numeric offset {field:?}")))
    }

    fn skip(&mut self, count: usize, what: &str) -> Result<(), LexiconError> {
        for _ in 0..count {
            self.next(what)?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<(), LexiconError> {
        match self.fields.next() {
            None => Ok(()),
            Some(extra) => Err(self.malformed(format!("wrong field count: unexpected {extra:?}"))),
        }
    }
}

fn strip_marker(word: &str) -> &str {
    ADJ_MARKERS
        .iter()
        .find_map(|m| word.strip_suffix(m))
        .unwrap_or(word)
}

/// Parses one `data.*` line.
pub fn parse_data_line(
    line: &str,
    line_number: usize,
    lexical_type: LexicalType,
) -> Result<Synset, LexiconError> {
    let file = lexical_type.data_file_name();
    let malformed = |reason: String| LexiconError::MalformedLine {
        file: file.clone(),
        line: line_number,
        reason,
    };
    let (head, gloss) = line
        .split_once(" | ")
        .ok_or_else(|| malformed("missing gloss separator".into()))?;
    let gloss = gloss.trim();
    if gloss.is_empty() {
        return Err(malformed("empty gloss".into()));
    }

    let mut cur = LineCursor {
        fields: head.split_ascii_whitespace(),
        file: &file,
        line: line_number,
    };
    let offset = cur.offset()?;
    cur.decimal("lex_filenum")?;
    let ss_type = cur.next("ss_type")?;
    match LexicalType::from_ss_type(ss_type) {
        Some(t) if t == lexical_type => {}
        _ => {
            return Err(cur.malformed(format!(
                "synset type {ss_type:?} not allowed in {file}"
            )))
        }
    }
    let word_count = cur.hex("w_cnt")?;
    if word_count == 0 {
        return Err(cur.malformed("synset has no words"));
    }
    let mut lemmas = Vec::with_capacity(word_count as usize);
    for _ in 0..word_count {
        let word = cur.next("word")?;
        let word = if lexical_type == LexicalType::Adjective {
            strip_marker(word)
        } else {
            word
        };
        if word.is_empty() {
            return Err(cur.malformed("empty word"));
        }
        lemmas.push(word.to_string());
        cur.hex("lex_id")?;
    }
    let pointer_count = cur.decimal("p_cnt")?;
    cur.skip(pointer_count as usize * 4, "pointer")?;
    if lexical_type == LexicalType::Verb {
        let frame_count = cur.decimal("f_cnt")?;
        cur.skip(frame_count as usize * 3, "verb frame")?;
    }
    cur.finish()?;

    let id = SynsetId::new(lexical_type, offset).ok_or_else(|| malformed("offset out of range".into()))?;
    Synset::new(id, lemmas, gloss).ok_or_else(|| malformed("empty synset".into()))
}

/// Parses a whole `data.*` file. Header lines (two leading spaces) are skipped.
pub fn parse_data_file<R: BufRead>(
    source: R,
    lexical_type: LexicalType,
) -> Result<Vec<Synset>, LexiconError> {
    data_lines(source, lexical_type.data_file_name())
        .map(|item| {
            let (number, line) = item?;
            parse_data_line(&line, number, lexical_type)
        })
        .collect()
}

/// Parses one `index.*` line.
pub fn parse_index_line(
    line: &str,
    line_number: usize,
    lexical_type: LexicalType,
) -> Result<IndexEntry, LexiconError> {
    let file = lexical_type.index_file_name();
    let mut cur = LineCursor {
        fields: line.split_ascii_whitespace(),
        file: &file,
        line: line_number,
    };
    let lemma = cur.next("lemma")?.to_string();
    let pos = cur.next("pos")?;
    if LexicalType::from_ss_type(pos) != Some(lexical_type) {
        return Err(cur.malformed(format!("pos {pos:?} not allowed in {file}")));
    }
    let synset_count = cur.decimal("synset_cnt")?;
    let pointer_count = cur.decimal("p_cnt")?;
    cur.skip(pointer_count as usize, "pointer symbol")?;
    cur.decimal("sense_cnt")?;
    cur.decimal("tagsense_cnt")?;
    let mut offsets = Vec::with_capacity(synset_count as usize);
    for _ in 0..synset_count {
        let offset = match cur.fields.next() {
            Some(field) if field.len() == 8 && field.bytes().all(|b| b.is_ascii_digit()) => field
                .parse()
                .map_err(|_| cur.malformed(format!("non-numeric offset {field:?}")))?,
            Some(field) => return Err(cur.malformed(format!("non-numeric offset {field:?}"))),
            None => {
                return Err(cur.malformed(format!(
                    "synset_cnt {synset_count} but only {} offsets",
                    offsets.len()
                )))
            }
        };
        offsets.push(offset);
    }
    if let Some(extra) = cur.fields.next() {
        return Err(cur.malformed(format!(
            "synset_cnt {synset_count} disagrees with trailing field {extra:?}"
        )));
    }
    Ok(IndexEntry { lemma, offsets })
}

/// Parses a whole `index.*` file.
pub fn parse_index_file<R: BufRead>(
    source: R,
    lexical_type: LexicalType,
) -> Result<Vec<IndexEntry>, LexiconError> {
    data_lines(source, lexical_type.index_file_name())
        .map(|item| {
            let (number, line) = item?;
            parse_index_line(&line, number, lexical_type)
        })
        .collect()
}
