//! Offline search backend replaying recorded responses from disk.
//!
//! A fixture directory holds one JSON array of results per query. The file
//! name is the lowercase hex SHA-256 of the query's UTF-8 bytes plus `.json`,
//! see [`fixture_file_name`]. Queries without a file return no results.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use async_trait::async_trait;
use sha2::{Digest, Sha256};

use super::{SearchBackend, SearchError, SearchResult};

pub fn fixture_file_name(query: &str) -> String {
    format!("{}.json", hex::encode(Sha256::digest(query.as_bytes())))
}

#[derive(Debug, Clone)]
pub struct FixtureSearch {
    dir: PathBuf,
}

impl FixtureSearch {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, SearchError> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(SearchError::Fixture {
                path: dir,
                message: "not a directory".into(),
            });
        }
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, query: &str) -> PathBuf {
        self.dir.join(fixture_file_name(query))
    }

    /// Stores `results` as the recorded response for `query`.
    pub fn record(&self, query: &str, results: &[SearchResult]) -> Result<PathBuf, SearchError> {
        let path = self.path_for(query);
        let json = serde_json::to_string_pretty(results).expect("search results serialize");
        fs::write(&path, json + "\n").map_err(|e| SearchError::Fixture {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(path)
    }

    fn load(&self, query: &str) -> Result<Vec<SearchResult>, SearchError> {
        let path = self.path_for(query);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => {
                return Err(SearchError::Fixture {
                    path,
                    message: e.to_string(),
                })
            }
        };
        serde_json::from_str(&text).map_err(|e| SearchError::Fixture {
            path,
            message: e.to_string(),
        })
    }
}

#[async_trait]
impl SearchBackend for FixtureSearch {
    async fn search(&self, query: &str, top_k: usize) -> Result<Vec<SearchResult>, SearchError> {
        if query.trim().is_empty() {
            return Err(SearchError::EmptyQuery);
        }
        let mut results = self.load(query)?;
        results.truncate(top_k);
        Ok(results)
    }
}
