//! SQL, CSV and JSON export of the annotation store, plus a reader for the
//! SQL subset the exporter emits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::lexicon::{LexicalType, Lexicon, SynsetId};
use crate::store::{AnnotationStore, StoreError, Timestamp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExportError {
    #[error("annotations reference synsets missing from the lexicon: {}", join_ids(.0))]
    DanglingSynsets(Vec<SynsetId>),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl ExportError {
    pub fn code(&self) -> &'static str {
        match self {
            ExportError::DanglingSynsets(_) => "dangling_synset",
            ExportError::Store(err) => err.code(),
        }
    }
}

fn join_ids(ids: &[SynsetId]) -> String {
    ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImportError {
    #[error("line {line}: unsupported statement: {detail}")]
    UnsupportedStatement { line: usize, detail: String },
    #[error("line {line}: unterminated string literal")]
    UnterminatedString { line: usize },
    #[error("foreign key violation: {0}")]
    ForeignKeyViolation(String),
    #[error("line {line}: invalid value: {detail}")]
    InvalidValue { line: usize, detail: String },
    #[error("line {line}: duplicate key {key}")]
    DuplicateKey { line: usize, key: String },
}

impl ImportError {
    pub fn code(&self) -> &'static str {
        match self {
            ImportError::UnsupportedStatement { .. } => "unsupported_statement",
            ImportError::UnterminatedString { .. } => "unterminated_string",
            ImportError::ForeignKeyViolation(_) => "foreign_key_violation",
            ImportError::InvalidValue { .. } => "invalid_value",
            ImportError::DuplicateKey { .. } => "duplicate_key",
        }
    }
}

/// Synset columns carried by an export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynsetRow {
    pub first_lemma: String,
    pub gloss: String,
}

/// Table contents of an export: the referenced pictures and synsets and
/// the annotation rows, each kept in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoreImage {
    pub pictures: BTreeSet<String>,
    pub synsets: BTreeMap<SynsetId, SynsetRow>,
    pub annotations: BTreeMap<(String, SynsetId), Timestamp>,
}

impl StoreImage {
    /// Snapshot of the store with synset data taken from the lexicon. Fails
    /// listing every stored id the lexicon cannot resolve.
    pub fn capture(store: &AnnotationStore, lexicon: &Lexicon) -> Result<Self, ExportError> {
        let annotations = store.annotations()?;
        let mut image = StoreImage::default();
        let mut dangling = BTreeSet::new();
        for a in annotations {
            match lexicon.get(a.synset_id) {
                Ok(synset) => {
                    image.synsets.insert(
                        a.synset_id,
                        SynsetRow {
                            first_lemma: synset.first_lemma().to_string(),
                            gloss: synset.gloss().to_string(),
                        },
                    );
                }
                Err(_) => {
                    dangling.insert(a.synset_id);
                }
            }
            image.pictures.insert(a.picture_name.clone());
            image.annotations.insert((a.picture_name, a.synset_id), a.created_at);
        }
        if !dangling.is_empty() {
            return Err(ExportError::DanglingSynsets(dangling.into_iter().collect()));
        }
        Ok(image)
    }

    pub fn annotation_pairs(&self) -> BTreeSet<(String, SynsetId)> {
        self.annotations.keys().cloned().collect()
    }

    pub fn to_sql(&self) -> String {
        let mut out = String::from(SQL_PREAMBLE);
        for name in &self.pictures {
            writeln!(out, "INSERT INTO pictures (name) VALUES ({});", quote(name)).unwrap();
        }
        for (id, row) in &self.synsets {
            writeln!(
                out,
                "INSERT INTO synsets (id, lexical_type, first_lemma, gloss) VALUES ({}, {}, {}, {});",
                quote(&id.to_string()),
                quote(&id.lexical_type().tag().to_string()),
                quote(&row.first_lemma),
                quote(&row.gloss)
            )
            .unwrap();
        }
        for ((picture, id), created) in &self.annotations {
            writeln!(
                out,
                "INSERT INTO annotations (picture_name, synset_id, created_at) VALUES ({}, {}, {});",
                quote(picture),
                quote(&id.to_string()),
                quote(&created.to_string())
            )
            .unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        writer
            .write_record(CSV_HEADER)
            .expect("writing to memory");
        for ((picture, id), created) in &self.annotations {
            let row = &self.synsets[id];
            writer
                .write_record([
                    picture.as_str(),
                    &id.to_string(),
                    id.lexical_type().name(),
                    &row.first_lemma,
                    &row.gloss,
                    &created.to_string(),
                ])
                .expect("writing to memory");
        }
        String::from_utf8(writer.into_inner().expect("writing to memory")).expect("utf-8 input")
    }

    pub fn to_json(&self) -> String {
        // field order is alphabetical so keys come out sorted
        #[derive(Serialize)]
        struct JsonAnnotation<'a> {
            created_at: String,
            first_lemma: &'a str,
            gloss: &'a str,
            lexical_type: LexicalType,
            synset_id: SynsetId,
        }
        let mut by_picture: BTreeMap<&str, Vec<JsonAnnotation<'_>>> = BTreeMap::new();
        for ((picture, id), created) in &self.annotations {
            let row = &self.synsets[id];
            by_picture.entry(picture).or_default().push(JsonAnnotation {
                created_at: created.to_string(),
                first_lemma: &row.first_lemma,
                gloss: &row.gloss,
                lexical_type: id.lexical_type(),
                synset_id: *id,
            });
        }
        let mut text = serde_json::to_string_pretty(&by_picture).expect("serializable");
        text.push('\n');
        text
    }
}

pub const CSV_HEADER: [&str; 6] = [
    "picture_name",
    "synset_id",
    "lexical_type",
    "first_lemma",
    "gloss",
    "created_at",
];

// Schema text is defined once as macros so it can feed both the table
// constants and the concatenated preamble.
macro_rules! create_pictures {
    () => {
        "CREATE TABLE pictures (
    name VARCHAR(255) NOT NULL,
    PRIMARY KEY (name)
);
"
    };
}

macro_rules! create_synsets {
    () => {
        "CREATE TABLE synsets (
    id CHAR(9) NOT NULL,
    lexical_type CHAR(1) NOT NULL,
    first_lemma VARCHAR(255) NOT NULL,
    gloss VARCHAR(4000) NOT NULL,
    PRIMARY KEY (id)
);
"
    };
}

macro_rules! create_annotations {
    () => {
        "CREATE TABLE annotations (
    picture_name VARCHAR(255) NOT NULL,
    synset_id CHAR(9) NOT NULL,
    created_at VARCHAR(32) NOT NULL,
    PRIMARY KEY (picture_name, synset_id),
    FOREIGN KEY (picture_name) REFERENCES pictures (name),
    FOREIGN KEY (synset_id) REFERENCES synsets (id)
);
"
    };
}

const CREATE_PICTURES: &str = create_pictures!();
const CREATE_SYNSETS: &str = create_synsets!();
const CREATE_ANNOTATIONS: &str = create_annotations!();

const SQL_PREAMBLE: &str = concat!(
    "-- GAPED picture annotations with WordNet synsets\n",
    create_pictures!(),
    create_synsets!(),
    create_annotations!(),
);

/// SQL string literal with embedded quotes doubled.
fn quote(text: &str) -> String {
    format!("'{}'", text.replace('\'', "''"))
}

/// Renders the store as a SQL script: three `CREATE TABLE` statements, then
/// `INSERT`s for referenced pictures, synsets and the annotations.
pub fn export_sql(store: &AnnotationStore, lexicon: &Lexicon) -> Result<String, ExportError> {
    Ok(StoreImage::capture(store, lexicon)?.to_sql())
}

/// RFC 4180 CSV, one row per annotation, same order as the SQL export.
pub fn export_csv(store: &AnnotationStore, lexicon: &Lexicon) -> Result<String, ExportError> {
    Ok(StoreImage::capture(store, lexicon)?.to_csv())
}

/// JSON object mapping picture name to its annotations.
pub fn export_json(store: &AnnotationStore, lexicon: &Lexicon) -> Result<String, ExportError> {
    Ok(StoreImage::capture(store, lexicon)?.to_json())
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Str(String),
    Punct(char),
}

struct Statement {
    line: usize,
    tokens: Vec<Token>,
}

/// Splits a script into `;`-terminated statements of tokens, dropping
/// whitespace and `--` comments.
fn tokenize(script: &str) -> Result<Vec<Statement>, ImportError> {
    let mut statements = Vec::new();
    let mut tokens = Vec::new();
    let mut start_line = None;
    let mut line = 1;
    let mut chars = script.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            '-' if chars.peek() == Some(&'-') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            ';' => {
                statements.push(Statement {
                    line: start_line.take().unwrap_or(line),
                    tokens: std::mem::take(&mut tokens),
                });
            }
            '\'' => {
                let open_line = line;
                start_line.get_or_insert(line);
                let mut value = String::new();
                loop {
                    match chars.next() {
                        None => return Err(ImportError::UnterminatedString { line: open_line }),
                        Some('\'') if chars.peek() == Some(&'\'') => {
                            chars.next();
                            value.push('\'');
                        }
                        Some('\'') => break,
                        Some(c) => {
                            if c == '\n' {
                                line += 1;
                            }
                            value.push(c);
                        }
                    }
                }
                tokens.push(Token::Str(value));
            }
            '(' | ')' | ',' => {
                start_line.get_or_insert(line);
                tokens.push(Token::Punct(c));
            }
            c => {
                start_line.get_or_insert(line);
                let mut word = String::from(c);
                while let Some(&next) = chars.peek() {
                    if next.is_whitespace() || matches!(next, '(' | ')' | ',' | ';' | '\'') {
                        break;
                    }
                    word.push(next);
                    chars.next();
                }
                tokens.push(Token::Word(word.to_ascii_uppercase()));
            }
        }
    }
    if !tokens.is_empty() {
        return Err(ImportError::UnsupportedStatement {
            line: start_line.unwrap_or(line),
            detail: "statement not terminated by ';'".into(),
        });
    }
    Ok(statements)
}

fn describe(tokens: &[Token]) -> String {
    tokens
        .iter()
        .take(4)
        .map(|t| match t {
            Token::Word(w) => w.clone(),
            Token::Str(_) => "'…'".into(),
            Token::Punct(p) => p.to_string(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn schema_tokens(create: &str) -> Vec<Token> {
    let mut statements = tokenize(create).expect("static schema");
    statements.remove(0).tokens
}

const TABLES: [(&str, &str, &[&str]); 3] = [
    ("PICTURES", CREATE_PICTURES, &["NAME"]),
    (
        "SYNSETS",
        CREATE_SYNSETS,
        &["ID", "LEXICAL_TYPE", "FIRST_LEMMA", "GLOSS"],
    ),
    (
        "ANNOTATIONS",
        CREATE_ANNOTATIONS,
        &["PICTURE_NAME", "SYNSET_ID", "CREATED_AT"],
    ),
];

/// Parses an `INSERT INTO t (cols) VALUES (...)` statement into its table
/// index and string values.
fn parse_insert(statement: &Statement) -> Result<(usize, Vec<String>), ImportError> {
    let unsupported = |detail: String| ImportError::UnsupportedStatement {
        line: statement.line,
        detail,
    };
    let tokens = &statement.tokens;
    let Some(Token::Word(table)) = tokens.get(2) else {
        return Err(unsupported(describe(tokens)));
    };
    let table_index = TABLES
        .iter()
        .position(|(name, _, _)| name == table)
        .ok_or_else(|| unsupported(format!("unknown table {table}")))?;
    let columns = TABLES[table_index].2;

    let mut expected = vec![Token::Punct('(')];
    for (i, col) in columns.iter().enumerate() {
        if i > 0 {
            expected.push(Token::Punct(','));
        }
        expected.push(Token::Word(col.to_string()));
    }
    expected.push(Token::Punct(')'));
    expected.push(Token::Word("VALUES".into()));
    expected.push(Token::Punct('('));
    let rest = &tokens[3..];
    if !rest.starts_with(&expected) {
        return Err(unsupported(format!("unexpected column list for {table}")));
    }
    let mut values = Vec::new();
    let mut iter = rest[expected.len()..].iter();
    loop {
        match iter.next() {
            Some(Token::Str(v)) => values.push(v.clone()),
            _ => return Err(unsupported("values must be string literals".into())),
        }
        match iter.next() {
            Some(Token::Punct(',')) => continue,
            Some(Token::Punct(')')) => break,
            _ => return Err(unsupported("malformed value list".into())),
        }
    }
    if iter.next().is_some() || values.len() != columns.len() {
        return Err(unsupported(format!("wrong number of values for {table}")));
    }
    Ok((table_index, values))
}

/// Reads back a script produced by [`export_sql`]. Only the emitted subset
/// is accepted: the three `CREATE TABLE` statements exactly as written and
/// single-row `INSERT`s of string literals.
pub fn import_sql(script: &str) -> Result<StoreImage, ImportError> {
    let schemas: Vec<Vec<Token>> = TABLES.iter().map(|(_, sql, _)| schema_tokens(sql)).collect();
    let mut created = [false; 3];
    let mut image = StoreImage::default();
    let mut annotation_lines = Vec::new();

    for statement in tokenize(script)? {
        let line = statement.line;
        let tokens = &statement.tokens;
        let keyword = |i: usize, w: &str| matches!(tokens.get(i), Some(Token::Word(x)) if x == w);
        if keyword(0, "CREATE") && keyword(1, "TABLE") {
            let index = schemas
                .iter()
                .position(|schema| schema == tokens)
                .ok_or_else(|| ImportError::UnsupportedStatement {
                    line,
                    detail: format!("unrecognized table definition: {}", describe(tokens)),
                })?;
            if std::mem::replace(&mut created[index], true) {
                return Err(ImportError::UnsupportedStatement {
                    line,
                    detail: format!("table {} created twice", TABLES[index].0.to_lowercase()),
                });
            }
        } else if keyword(0, "INSERT") && keyword(1, "INTO") {
            let (table, values) = parse_insert(&statement)?;
            if !created[table] {
                return Err(ImportError::UnsupportedStatement {
                    line,
                    detail: format!("insert into {} before its CREATE TABLE", TABLES[table].0.to_lowercase()),
                });
            }
            let invalid = |detail: String| ImportError::InvalidValue { line, detail };
            let duplicate = |key: String| ImportError::DuplicateKey { line, key };
            let mut values = values.into_iter();
            let mut next = || values.next().expect("arity checked");
            match table {
                0 => {
                    let name = next();
                    if !image.pictures.insert(name.clone()) {
                        return Err(duplicate(name));
                    }
                }
                1 => {
                    let id_text = next();
                    let id: SynsetId = id_text.parse().map_err(|_| invalid(format!("synset id {id_text:?}")))?;
                    let type_code = next();
                    if type_code != id.lexical_type().tag().to_string() {
                        return Err(invalid(format!("lexical type {type_code:?} for {id}")));
                    }
                    let row = SynsetRow {
                        first_lemma: next(),
                        gloss: next(),
                    };
                    if image.synsets.insert(id, row).is_some() {
                        return Err(duplicate(id_text));
                    }
                }
                _ => {
                    let picture = next();
                    let id_text = next();
                    let id: SynsetId = id_text.parse().map_err(|_| invalid(format!("synset id {id_text:?}")))?;
                    let created_text = next();
                    let created_at: Timestamp = created_text
                        .parse()
                        .map_err(|_| invalid(format!("timestamp {created_text:?}")))?;
                    let key = (picture, id);
                    if image.annotations.contains_key(&key) {
                        return Err(duplicate(format!("({}, {})", key.0, key.1)));
                    }
                    annotation_lines.push((line, key.clone()));
                    image.annotations.insert(key, created_at);
                }
            }
        } else {
            return Err(ImportError::UnsupportedStatement {
                line,
                detail: describe(tokens),
            });
        }
    }

    for (line, (picture, id)) in annotation_lines {
        if !image.pictures.contains(&picture) {
            return Err(ImportError::ForeignKeyViolation(format!(
                "line {line}: annotation references picture {picture} which has no pictures row"
            )));
        }
        if !image.synsets.contains_key(&id) {
            return Err(ImportError::ForeignKeyViolation(format!(
                "line {line}: annotation references synset {id} which has no synsets row"
            )));
        }
    }
    Ok(image)
}
