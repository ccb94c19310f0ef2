//! Persistent picture/synset annotation store backed by a single SQLite file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, MutexGuard};

use chrono::{DateTime, NaiveDateTime, Utc};
use rusqlite::{params, Connection, OptionalExtension};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::catalog::Catalog;
use crate::lexicon::{LexicalType, Lexicon, Synset, SynsetId};

/// Marks a SQLite file as an annotation store ("GWAT").
const APPLICATION_ID: i32 = 0x4757_4154;

const SCHEMA: &str = "
CREATE TABLE pictures (
    name TEXT NOT NULL PRIMARY KEY
);
CREATE TABLE synsets (
    id TEXT NOT NULL PRIMARY KEY,
    lexical_type TEXT NOT NULL,
    first_lemma TEXT NOT NULL,
    gloss TEXT NOT NULL
);
CREATE TABLE annotations (
    picture_name TEXT NOT NULL REFERENCES pictures (name),
    synset_id TEXT NOT NULL REFERENCES synsets (id),
    created_at TEXT NOT NULL,
    PRIMARY KEY (picture_name, synset_id)
);
";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("store is corrupt: {0}")]
    CorruptStore(String),
    #[error("store I/O failure: {0}")]
    IoFailure(String),
    #[error("unknown picture {0}")]
    UnknownPicture(String),
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetId),
    #[error("synset {synset} is already attached to {picture}")]
    AlreadyAttached { picture: String, synset: SynsetId },
    #[error("synset {synset} is not attached to {picture}")]
    NotAttached { picture: String, synset: SynsetId },
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::CorruptStore(_) => "corrupt_store",
            StoreError::IoFailure(_) => "io_failure",
            StoreError::UnknownPicture(_) => "unknown_picture",
            StoreError::UnknownSynset(_) => "unknown_synset",
            StoreError::AlreadyAttached { .. } => "already_attached",
            StoreError::NotAttached { .. } => "not_attached",
        }
    }
}

impl From<rusqlite::Error> for StoreError {
    fn from(err: rusqlite::Error) -> Self {
        use rusqlite::ErrorCode;
        match err.sqlite_error_code() {
            Some(ErrorCode::DatabaseCorrupt | ErrorCode::NotADatabase) => {
                StoreError::CorruptStore(err.to_string())
            }
            _ => StoreError::IoFailure(err.to_string()),
        }
    }
}

/// UTC creation time with microsecond precision, rendered as
/// `YYYY-MM-DDTHH:MM:SS.ffffffZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.6fZ";

impl Timestamp {
    pub fn now() -> Self {
        let now = Utc::now();
        // drop sub-microsecond digits so the text form round-trips
        let micros = now.timestamp_micros();
        Timestamp(DateTime::from_timestamp_micros(micros).expect("current time in range"))
    }

    pub fn from_micros(micros: i64) -> Option<Self> {
        DateTime::from_timestamp_micros(micros).map(Timestamp)
    }

    pub fn as_datetime(&self) -> DateTime<Utc> {
        self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(TIMESTAMP_FORMAT))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvalidTimestamp(pub String);

impl FromStr for Timestamp {
    type Err = InvalidTimestamp;

    /// Accepts only the canonical form produced by `Display`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed = NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
            .map_err(|_| InvalidTimestamp(s.to_string()))?;
        let ts = Timestamp(parsed.and_utc());
        if ts.to_string() == s {
            Ok(ts)
        } else {
            Err(InvalidTimestamp(s.to_string()))
        }
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// One picture/synset link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Annotation {
    pub picture_name: String,
    pub synset_id: SynsetId,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListingEntry {
    pub synset: Synset,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListingGroup {
    pub lexical_type: LexicalType,
    pub entries: Vec<ListingEntry>,
}

/// Annotations of one picture grouped noun, verb, adjective, adverb.
/// Stored ids that no longer resolve in the lexicon are reported in
/// `dangling` instead of failing the listing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AnnotationListing {
    pub groups: Vec<ListingGroup>,
    pub dangling: Vec<SynsetId>,
}

impl AnnotationListing {
    pub fn synset_ids(&self) -> impl Iterator<Item = SynsetId> + '_ {
        self.groups
            .iter()
            .flat_map(|g| g.entries.iter().map(|e| e.synset.id()))
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty() && self.dangling.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StoreStats {
    pub total_annotations: usize,
    pub annotated_pictures: usize,
    pub distinct_synsets: usize,
}

/// Handle to an open store. Writes are serialized through an internal lock;
/// the handle can be shared across threads.
pub struct AnnotationStore {
    conn: Mutex<Connection>,
    path: PathBuf,
}

impl fmt::Debug for AnnotationStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnnotationStore").field("path", &self.path).finish()
    }
}

impl AnnotationStore {
    /// Opens the store at `path`, creating and initializing it if needed.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let conn = Connection::open(&path).map_err(|e| match StoreError::from(e) {
            StoreError::IoFailure(detail) => {
                StoreError::IoFailure(format!("{}: {detail}", path.display()))
            }
            other => other,
        })?;
        Self::init(conn, path)
    }

    /// A store that lives only as long as the handle.
    pub fn open_in_memory() -> Result<Self, StoreError> {
        Self::init(Connection::open_in_memory()?, PathBuf::from(":memory:"))
    }

    fn init(mut conn: Connection, path: PathBuf) -> Result<Self, StoreError> {
        conn.busy_timeout(std::time::Duration::from_secs(5))?;
        let check: String = conn
            .query_row("PRAGMA quick_check", [], |row| row.get(0))
            .map_err(|e| StoreError::CorruptStore(e.to_string()))?;
        if check != "ok" {
            return Err(StoreError::CorruptStore(check));
        }
        conn.pragma_update(None, "foreign_keys", true)?;

        let app_id: i32 = conn.query_row("PRAGMA application_id", [], |row| row.get(0))?;
        let table_count: i64 =
            conn.query_row("SELECT count(*) FROM sqlite_master", [], |row| row.get(0))?;
        if app_id == 0 && table_count == 0 {
            let tx = conn.transaction()?;
            tx.execute_batch(SCHEMA)?;
            tx.pragma_update(None, "application_id", APPLICATION_ID)?;
            tx.commit()?;
        } else if app_id != APPLICATION_ID {
            return Err(StoreError::CorruptStore(format!(
                "{} is not an annotation store",
                path.display()
            )));
        }
        for table in ["pictures", "synsets", "annotations"] {
            let present: Option<i64> = conn
                .query_row(
                    "SELECT 1 FROM sqlite_master WHERE type = 'table' AND name = ?1",
                    [table],
                    |row| row.get(0),
                )
                .optional()?;
            if present.is_none() {
                return Err(StoreError::CorruptStore(format!("table {table} missing")));
            }
        }
        Ok(AnnotationStore {
            conn: Mutex::new(conn),
            path,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn lock(&self) -> MutexGuard<'_, Connection> {
        // a panic mid-operation leaves no open transaction behind, so the
        // connection is still usable
        self.conn.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Links a synset to a picture. Both must resolve in the given catalog
    /// and lexicon.
    pub fn attach(
        &self,
        catalog: &Catalog,
        lexicon: &Lexicon,
        picture: &str,
        synset_id: SynsetId,
    ) -> Result<Annotation, StoreError> {
        if !catalog.contains(picture) {
            return Err(StoreError::UnknownPicture(picture.to_string()));
        }
        let synset = lexicon
            .get(synset_id)
            .map_err(|_| StoreError::UnknownSynset(synset_id))?;

        let mut conn = self.lock();
        let tx = conn.transaction()?;
        let id_text = synset_id.to_string();
        let exists: Option<i64> = tx
            .query_row(
                "SELECT 1 FROM annotations WHERE picture_name = ?1 AND synset_id = ?2",
                params![picture, id_text],
                |row| row.get(0),
            )
            .optional()?;
        if exists.is_some() {
            return Err(StoreError::AlreadyAttached {
                picture: picture.to_string(),
                synset: synset_id,
            });
        }
        let created_at = Timestamp::now();
        tx.execute(
            "INSERT OR IGNORE INTO pictures (name) VALUES (?1)",
            [picture],
        )?;
        tx.execute(
            "INSERT INTO synsets (id, lexical_type, first_lemma, gloss) VALUES (?1, ?2, ?3, ?4)
             ON CONFLICT (id) DO UPDATE SET lexical_type = excluded.lexical_type,
                 first_lemma = excluded.first_lemma, gloss = excluded.gloss",
            params![
                id_text,
                synset.lexical_type().tag().to_string(),
                synset.first_lemma(),
                synset.gloss()
            ],
        )?;
        tx.execute(
            "INSERT INTO annotations (picture_name, synset_id, created_at) VALUES (?1, ?2, ?3)",
            params![picture, id_text, created_at.to_string()],
        )?;
        tx.commit()?;
        Ok(Annotation {
            picture_name: picture.to_string(),
            synset_id,
            created_at,
        })
    }

    /// Permanently removes a link. Picture and synset rows left without
    /// annotations are removed with it.
    pub fn detach(&self, picture: &str, synset_id: SynsetId) -> Result<(), StoreError> {
        let mut conn = self.lock();
        let tx = conn.transaction()?;
        let id_text = synset_id.to_string();
        let removed = tx.execute(
            "DELETE FROM annotations WHERE picture_name = ?1 AND synset_id = ?2",
            params![picture, id_text],
        )?;
        if removed == 0 {
            return Err(StoreError::NotAttached {
                picture: picture.to_string(),
                synset: synset_id,
            });
        }
        tx.execute(
            "DELETE FROM pictures WHERE name = ?1
             AND NOT EXISTS (SELECT 1 FROM annotations WHERE picture_name = ?1)",
            [picture],
        )?;
        tx.execute(
            "DELETE FROM synsets WHERE id = ?1
             AND NOT EXISTS (SELECT 1 FROM annotations WHERE synset_id = ?1)",
            [&id_text],
        )?;
        tx.commit()?;
        Ok(())
    }

    fn read_annotations(
        conn: &Connection,
        picture: Option<&str>,
    ) -> Result<Vec<Annotation>, StoreError> {
        let mut stmt = conn.prepare_cached(
            "SELECT picture_name, synset_id, created_at FROM annotations
             WHERE ?1 IS NULL OR picture_name = ?1",
        )?;
        let rows = stmt.query_map([picture], |row| {
            Ok((
                row.get::<_, String>(0)?,
                row.get::<_, String>(1)?,
                row.get::<_, String>(2)?,
            ))
        })?;
        let mut annotations = Vec::new();
        for row in rows {
            let (picture_name, synset, created) = row?;
            let synset_id = synset
                .parse()
                .map_err(|_| StoreError::CorruptStore(format!("bad synset id {synset:?}")))?;
            let created_at = created
                .parse()
                .map_err(|_| StoreError::CorruptStore(format!("bad timestamp {created:?}")))?;
            annotations.push(Annotation {
                picture_name,
                synset_id,
                created_at,
            });
        }
        annotations.sort_by(|a, b| {
            (&a.picture_name, a.synset_id).cmp(&(&b.picture_name, b.synset_id))
        });
        Ok(annotations)
    }

    /// Every annotation, ordered by picture name then synset id.
    pub fn annotations(&self) -> Result<Vec<Annotation>, StoreError> {
        Self::read_annotations(&self.lock(), None)
    }

    pub fn annotations_for(&self, picture: &str) -> Result<Vec<Annotation>, StoreError> {
        Self::read_annotations(&self.lock(), Some(picture))
    }

    /// Grouped listing for one picture. Unknown pictures give an empty listing.
    pub fn list_for_picture(
        &self,
        lexicon: &Lexicon,
        picture: &str,
    ) -> Result<AnnotationListing, StoreError> {
        let annotations = self.annotations_for(picture)?;
        let mut listing = AnnotationListing::default();
        let mut resolved: Vec<ListingEntry> = Vec::with_capacity(annotations.len());
        for a in annotations {
            match lexicon.get(a.synset_id) {
                Ok(synset) => resolved.push(ListingEntry {
                    synset: synset.clone(),
                    created_at: a.created_at,
                }),
                Err(_) => listing.dangling.push(a.synset_id),
            }
        }
        resolved.sort_by_cached_key(|e| (e.synset.lexical_type(), e.synset.sort_key()));
        for entry in resolved {
            let t = entry.synset.lexical_type();
            match listing.groups.last_mut() {
                Some(group) if group.lexical_type == t => group.entries.push(entry),
                _ => listing.groups.push(ListingGroup {
                    lexical_type: t,
                    entries: vec![entry],
                }),
            }
        }
        Ok(listing)
    }

    pub fn stats(&self) -> Result<StoreStats, StoreError> {
        let conn = self.lock();
        let (total, pictures, synsets): (i64, i64, i64) = conn.query_row(
            "SELECT count(*), count(DISTINCT picture_name), count(DISTINCT synset_id) FROM annotations",
            [],
            |row| Ok((row.get(0)?, row.get(1)?, row.get(2)?)),
        )?;
        Ok(StoreStats {
            total_annotations: total as usize,
            annotated_pictures: pictures as usize,
            distinct_synsets: synsets as usize,
        })
    }

    /// Raw rows of the three tables, for integrity checks.
    pub fn table_counts(&self) -> Result<(usize, usize, usize), StoreError> {
        let conn = self.lock();
        let count = |table: &str| -> Result<usize, StoreError> {
            let n: i64 = conn.query_row(&format!("SELECT count(*) FROM {table}"), [], |r| r.get(0))?;
            Ok(n as usize)
        };
        Ok((count("pictures")?, count("synsets")?, count("annotations")?))
    }
}
