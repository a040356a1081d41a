//! On-disk corpus: one TOML document per site plus `index.txt` naming the
//! site files in order.

use std::fs;
use std::io;
use std::path::Path;

use super::model::{Corpus, SiteManifest};

pub const INDEX_FILE: &str = "index.txt";

#[derive(Debug, thiserror::Error)]
pub enum CorpusStoreError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("bad site file {path}: {reason}")]
    Format { path: String, reason: String },
    #[error("duplicate site id {0}")]
    DuplicateSite(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusStoreError + '_ {
    move |source| CorpusStoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<(), CorpusStoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut index = String::new();
    for site in &corpus.sites {
        let file = format!("{}.toml", site.site_id);
        let path = dir.join(&file);
        let text = toml::to_string(site).map_err(|e| CorpusStoreError::Format {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        fs::write(&path, text).map_err(io_err(&path))?;
        index.push_str(&file);
        index.push('\n');
    }
    let idx = dir.join(INDEX_FILE);
    fs::write(&idx, index).map_err(io_err(&idx))
}

pub fn load_corpus(dir: &Path) -> Result<Corpus, CorpusStoreError> {
    let idx = dir.join(INDEX_FILE);
    let index = fs::read_to_string(&idx).map_err(io_err(&idx))?;
    let mut sites: Vec<SiteManifest> = Vec::new();
    for line in index.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let path = dir.join(line);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let site: SiteManifest = toml::from_str(&text).map_err(|e| CorpusStoreError::Format {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if site.assurance_level > 3 {
            return Err(CorpusStoreError::Format {
                path: path.display().to_string(),
                reason: format!("assurance_level {} outside 0..=3", site.assurance_level),
            });
        }
        if sites.iter().any(|s| s.site_id == site.site_id) {
            return Err(CorpusStoreError::DuplicateSite(site.site_id));
        }
        sites.push(site);
    }
    Ok(Corpus::new(sites))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_corpus;

    #[test]
    fn save_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(5, 2, 4);
        save_corpus(&corpus, dir.path()).unwrap();
        assert_eq!(load_corpus(dir.path()).unwrap(), corpus);
        let index = fs::read_to_string(dir.path().join(INDEX_FILE)).unwrap();
        assert_eq!(index.lines().count(), 26);
        let first = fs::read_to_string(dir.path().join(index.lines().next().unwrap())).unwrap();
        for key in ["site_id", "category", "assurance_level", "collect_latency_ms", "[[records]]", "record_id", "disease", "description", "drugs"] {
            assert!(first.contains(key), "missing {key} in {first}");
        }
    }

    #[test]
    fn missing_index_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_corpus(dir.path()), Err(CorpusStoreError::Io { .. })));
    }
}
