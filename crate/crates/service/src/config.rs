//! Configuration from flags, environment and an optional TOML file, in that
//! order of precedence.

use std::path::{Path, PathBuf};

use gwat_core::lexicon::DEFAULT_SEARCH_LIMIT;
use serde::Deserialize;
use thiserror::Error;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const DEFAULT_DB: &str = "gwat.db";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("no WordNet dict directory configured (--dict, GWAT_DICT or `dict` in the config file)")]
    MissingDict,
    #[error("no picture source configured: set one of --gaped or --manifest")]
    NoPictureSource,
    #[error("both a GAPED directory and a manifest are configured; set only one")]
    BothPictureSources,
    #[error("search limit must be at least 1")]
    InvalidSearchLimit,
    #[error("invalid value {value:?} for {key}")]
    InvalidValue { key: &'static str, value: String },
    #[error("cannot read config file {path}: {detail}")]
    File { path: String, detail: String },
}

/// One configuration layer. Every field is optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub dict: Option<PathBuf>,
    pub gaped: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub db: Option<PathBuf>,
    pub listen: Option<String>,
    pub search_limit: Option<usize>,
    pub ui_dir: Option<PathBuf>,
}

impl Settings {
    /// Reads `GWAT_DICT`, `GWAT_GAPED`, `GWAT_MANIFEST`, `GWAT_DB` and
    /// `GWAT_LISTEN` through `lookup`.
    pub fn from_env(lookup: impl Fn(&str) -> Option<String>) -> Self {
        let path = |key: &str| lookup(key).filter(|v| !v.is_empty()).map(PathBuf::from);
        Settings {
            dict: path("GWAT_DICT"),
            gaped: path("GWAT_GAPED"),
            manifest: path("GWAT_MANIFEST"),
            db: path("GWAT_DB"),
            listen: lookup("GWAT_LISTEN").filter(|v| !v.is_empty()),
            search_limit: None,
            ui_dir: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let file_err = |detail: String| ConfigError::File {
            path: path.display().to_string(),
            detail,
        };
        let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        toml::from_str(&text).map_err(|e| file_err(e.to_string()))
    }

    /// Merges layers, earlier ones winning. The picture source is taken as a
    /// unit from the first layer that names one, so a flag `--gaped` is not
    /// combined with a file-level `manifest`.
    pub fn layered(layers: &[Settings]) -> Settings {
        let source = layers
            .iter()
            .find(|l| l.gaped.is_some() || l.manifest.is_some());
        Settings {
            dict: layers.iter().find_map(|l| l.dict.clone()),
            gaped: source.and_then(|l| l.gaped.clone()),
            manifest: source.and_then(|l| l.manifest.clone()),
            db: layers.iter().find_map(|l| l.db.clone()),
            listen: layers.iter().find_map(|l| l.listen.clone()),
            search_limit: layers.iter().find_map(|l| l.search_limit),
            ui_dir: layers.iter().find_map(|l| l.ui_dir.clone()),
        }
    }

    pub fn dict_dir(&self) -> Result<PathBuf, ConfigError> {
        self.dict.clone().ok_or(ConfigError::MissingDict)
    }

    pub fn picture_source(&self) -> Result<PictureSource, ConfigError> {
        match (&self.gaped, &self.manifest) {
            (Some(root), None) => Ok(PictureSource::Directory(root.clone())),
            (None, Some(manifest)) => Ok(PictureSource::Manifest(manifest.clone())),
            (Some(_), Some(_)) => Err(ConfigError::BothPictureSources),
            (None, None) => Err(ConfigError::NoPictureSource),
        }
    }

    pub fn store_path(&self) -> PathBuf {
        self.db.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_DB))
    }

    pub fn service_config(&self) -> Result<ServiceConfig, ConfigError> {
        let search_limit = self.search_limit.unwrap_or(DEFAULT_SEARCH_LIMIT);
        if search_limit == 0 {
            return Err(ConfigError::InvalidSearchLimit);
        }
        let listen_address = self.listen.clone().unwrap_or_else(|| DEFAULT_LISTEN.to_string());
        if listen_address.rsplit_once(':').and_then(|(_, p)| p.parse::<u16>().ok()).is_none() {
            return Err(ConfigError::InvalidValue {
                key: "listen",
                value: listen_address,
            });
        }
        Ok(ServiceConfig {
            dict_dir: self.dict_dir()?,
            pictures: self.picture_source()?,
            store_path: self.store_path(),
            listen_address,
            search_limit,
            ui_dir: self.ui_dir.clone(),
        })
    }
}

/// Where picture names come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PictureSource {
    /// A GAPED installation with `A`, `H`, `N`, `P`, `Sn`, `Sp` folders.
    Directory(PathBuf),
    /// A list of filenames; no image bytes are served.
    Manifest(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub dict_dir: PathBuf,
    pub pictures: PictureSource,
    pub store_path: PathBuf,
    pub listen_address: String,
    pub search_limit: usize,
    pub ui_dir: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn env(pairs: &[(&str, &str)]) -> Settings {
        let map: HashMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Settings::from_env(|k| map.get(k).cloned())
    }

    #[test]
    fn flags_beat_env_beat_file() {
        let flags = Settings { dict: Some("flag-dict".into()), ..Default::default() };
        let env = env(&[("GWAT_DICT", "env-dict"), ("GWAT_DB", "env.db"), ("GWAT_LISTEN", "0.0.0.0:9000")]);
        let file: Settings = toml::from_str(
            "dict = \"file-dict\"\ndb = \"file.db\"\nmanifest = \"m.txt\"\nsearch_limit = 20\nlisten = \"127.0.0.1:1\"",
        )
        .unwrap();
        let merged = Settings::layered(&[flags, env, file]);
        let config = merged.service_config().unwrap();
        assert_eq!(config.dict_dir, PathBuf::from("flag-dict"));
        assert_eq!(config.store_path, PathBuf::from("env.db"));
        assert_eq!(config.listen_address, "0.0.0.0:9000");
        assert_eq!(config.search_limit, 20);
        assert_eq!(config.pictures, PictureSource::Manifest("m.txt".into()));
    }

    #[test]
    fn picture_source_taken_as_a_unit() {
        let flags = Settings { gaped: Some("/gaped".into()), ..Default::default() };
        let file = Settings { manifest: Some("m.txt".into()), dict: Some("d".into()), ..Default::default() };
        let merged = Settings::layered(&[flags, Settings::default(), file]);
        assert_eq!(merged.picture_source().unwrap(), PictureSource::Directory("/gaped".into()));
    }

    #[test]
    fn exactly_one_picture_source() {
        let both = Settings { gaped: Some("g".into()), manifest: Some("m".into()), dict: Some("d".into()), ..Default::default() };
        assert_eq!(both.service_config().unwrap_err(), ConfigError::BothPictureSources);
        let none = Settings { dict: Some("d".into()), ..Default::default() };
        assert_eq!(none.service_config().unwrap_err(), ConfigError::NoPictureSource);
    }

    #[test]
    fn defaults_and_validation() {
        let base = Settings { dict: Some("d".into()), manifest: Some("m".into()), ..Default::default() };
        let config = base.service_config().unwrap();
        assert_eq!(config.search_limit, 500);
        assert_eq!(config.listen_address, DEFAULT_LISTEN);
        assert_eq!(config.store_path, PathBuf::from(DEFAULT_DB));
        let zero = Settings { search_limit: Some(0), ..base.clone() };
        assert_eq!(zero.service_config().unwrap_err(), ConfigError::InvalidSearchLimit);
        let bad_listen = Settings { listen: Some("nowhere".into()), ..base.clone() };
        assert!(matches!(bad_listen.service_config().unwrap_err(), ConfigError::InvalidValue { .. }));
        let no_dict = Settings { dict: None, ..base };
        assert_eq!(no_dict.service_config().unwrap_err(), ConfigError::MissingDict);
    }

    #[test]
    fn empty_env_values_ignored() {
        assert_eq!(env(&[("GWAT_DICT", "")]), Settings::default());
    }

    #[test]
    fn config_file_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gwat.toml");
        std::fs::write(&path, "dictionary = \"x\"\n").unwrap();
        assert!(matches!(Settings::from_file(&path).unwrap_err(), ConfigError::File { .. }));
        assert!(matches!(
            Settings::from_file(&dir.path().join("missing.toml")).unwrap_err(),
            ConfigError::File { .. }
        ));
    }
}
