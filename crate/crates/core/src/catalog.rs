//! Alphabetically ordered registry of GAPED picture filenames.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("picture root {} does not exist", .0.display())]
    MissingRoot(PathBuf),
    #[error("failed to read {path}: {detail}")]
    Io { path: String, detail: String },
    #[error("picture {0} appears more than once")]
    DuplicateFilename(String),
    #[error("{0} does not start with a category code (A, H, N, P, Sn, Sp)")]
    UnknownCategoryPrefix(String),
    #[error("picture {0} not found")]
    NotFound(String),
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("picture {0} is no longer in the catalog")]
    StaleRef(String),
}

impl CatalogError {
    pub fn code(&self) -> &'static str {
        match self {
            CatalogError::MissingRoot(_) => "missing_root",
            CatalogError::Io { .. } => "io_failure",
            CatalogError::DuplicateFilename(_) => "duplicate_filename",
            CatalogError::UnknownCategoryPrefix(_) => "unknown_category_prefix",
            CatalogError::NotFound(_) => "picture_not_found",
            CatalogError::EmptyCatalog => "empty_catalog",
            CatalogError::StaleRef(_) => "stale_ref",
        }
    }
}

/// GAPED semantic category; the code doubles as folder name and filename prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    /// animal mistreatment
    A,
    /// human concerns
    H,
    /// neutral
    N,
    /// positive
    P,
    /// snakes
    Sn,
    /// spiders
    Sp,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::A,
        Category::H,
        Category::N,
        Category::P,
        Category::Sn,
        Category::Sp,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Category::A => "A",
            Category::H => "H",
            Category::N => "N",
            Category::P => "P",
            Category::Sn => "Sn",
            Category::Sp => "Sp",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Category::A => "animal mistreatment",
            Category::H => "human concerns",
            Category::N => "neutral",
            Category::P => "positive",
            Category::Sn => "snakes",
            Category::Sp => "spiders",
        }
    }

    /// Category from the longest matching code prefix of a filename.
    pub fn from_filename(name: &str) -> Option<Self> {
        // two-letter codes first so "Sn…" never falls through to a shorter code
        [Category::Sn, Category::Sp, Category::A, Category::H, Category::N, Category::P]
            .into_iter()
            .find(|c| name.starts_with(c.code()))
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PictureRef {
    pub filename: String,
    pub category: Category,
    pub ordinal: usize,
}

/// Immutable, byte-wise sorted set of picture filenames.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: Vec<PictureRef>,
    by_name: HashMap<String, usize>,
    // set only when built from a picture directory
    files: Option<Vec<PathBuf>>,
}

impl Catalog {
    /// Builds a catalog from filenames, sorting byte-wise and assigning ordinals.
    pub fn from_names<I, S>(names: I) -> Result<Self, CatalogError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        for name in &names {
            if Category::from_filename(name).is_none() {
                return Err(CatalogError::UnknownCategoryPrefix(name.clone()));
            }
        }
        names.sort_unstable();
        if let Some(pair) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(CatalogError::DuplicateFilename(pair[0].clone()));
        }
        let entries: Vec<PictureRef> = names
            .into_iter()
            .enumerate()
            .map(|(ordinal, filename)| PictureRef {
                category: Category::from_filename(&filename).expect("checked above"),
                filename,
                ordinal,
            })
            .collect();
        let by_name = entries
            .iter()
            .map(|e| (e.filename.clone(), e.ordinal))
            .collect();
        Ok(Catalog {
            entries,
            by_name,
            files: None,
        })
    }

    /// Reads a manifest: one filename per line, blank lines and `#` comments ignored.
    pub fn from_manifest<R: BufRead>(source: R) -> Result<Self, CatalogError> {
        let mut names = Vec::new();
        for line in source.lines() {
            let line = line.map_err(|e| CatalogError::Io {
                path: "manifest".into(),
                detail: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            names.push(line.to_string());
        }
        Self::from_names(names)
    }

    pub fn from_manifest_file(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| CatalogError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::from_manifest(std::io::BufReader::new(file))
    }

    /// Scans `<root>/{A,H,N,P,Sn,Sp}/`. Files whose name has no category
    /// prefix are skipped with a warning; the category always comes from the
    /// filename. Missing category folders count as empty.
    pub fn from_directory(root: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let root = root.as_ref();
        if !root.is_dir() {
            return Err(CatalogError::MissingRoot(root.to_path_buf()));
        }
        let io_err = |path: &Path, e: std::io::Error| CatalogError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        };
        let mut found: Vec<(String, PathBuf)> = Vec::new();
        for category in Category::ALL {
            let folder = root.join(category.code());
            if !folder.is_dir() {
                tracing::warn!(folder = %folder.display(), "category folder missing");
                continue;
            }
            for entry in std::fs::read_dir(&folder).map_err(|e| io_err(&folder, e))? {
                let entry = entry.map_err(|e| io_err(&folder, e))?;
                let path = entry.path();
                if !path.is_file() {
                    continue;
                }
                let Some(name) = entry.file_name().to_str().map(str::to_string) else {
                    tracing::warn!(file = %path.display(), "skipping non-UTF-8 filename");
                    continue;
                };
                match Category::from_filename(&name) {
                    None => {
                        tracing::warn!(file = %path.display(), "skipping file without category prefix");
                        continue;
                    }
                    Some(c) if c != category => {
                        tracing::warn!(file = %path.display(), "picture prefix disagrees with its folder");
                    }
                    Some(_) => {}
                }
                found.push((name, path));
            }
        }
        let mut catalog = Self::from_names(found.iter().map(|(n, _)| n.clone()))?;
        let mut files = vec![PathBuf::new(); found.len()];
        for (name, path) in found {
            files[catalog.by_name[&name]] = path;
        }
        catalog.files = Some(files);
        Ok(catalog)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PictureRef] {
        &self.entries
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    /// Exact, case-sensitive lookup by filename including extension.
    pub fn find(&self, name: &str) -> Result<&PictureRef, CatalogError> {
        self.by_name
            .get(name)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| CatalogError::NotFound(name.to_string()))
    }

    pub fn first(&self) -> Result<&PictureRef, CatalogError> {
        self.entries.first().ok_or(CatalogError::EmptyCatalog)
    }

    pub fn last(&self) -> Result<&PictureRef, CatalogError> {
        self.entries.last().ok_or(CatalogError::EmptyCatalog)
    }

    fn position(&self, current: &PictureRef) -> Result<usize, CatalogError> {
        self.by_name
            .get(&current.filename)
            .copied()
            .ok_or_else(|| CatalogError::StaleRef(current.filename.clone()))
    }

    /// Next picture, wrapping from the last to the first.
    pub fn next(&self, current: &PictureRef) -> Result<&PictureRef, CatalogError> {
        let i = self.position(current)?;
        Ok(&self.entries[(i + 1) % self.entries.len()])
    }

    /// Previous picture, wrapping from the first to the last.
    pub fn prev(&self, current: &PictureRef) -> Result<&PictureRef, CatalogError> {
        let i = self.position(current)?;
        let n = self.entries.len();
        Ok(&self.entries[(i + n - 1) % n])
    }

    /// Path of the picture file; `None` in manifest mode.
    pub fn image_path(&self, picture: &PictureRef) -> Option<&Path> {
        let files = self.files.as_ref()?;
        let i = *self.by_name.get(&picture.filename)?;
        Some(files[i].as_path())
    }

    pub fn has_images(&self) -> bool {
        self.files.is_some()
    }
}
