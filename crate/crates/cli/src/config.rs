//! The flat `key = value` configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use medagent::bench::{BenchmarkConfig, SchedulerModeName};
use medagent::platform::{PlatformConfig, SchedulerMode};
use medagent::security::AssuranceLevel;
use medagent::topology::TopologyKind;

use crate::exit::CliError;

pub const KEYS: &[&str] = &[
    "corpus_path",
    "dictionary_path",
    "data_dir",
    "bind_address",
    "topology",
    "required_assurance",
    "session_ttl_secs",
    "c_msg",
    "c_move",
    "kappa",
    "repetitions",
    "seed",
    "secret_path",
    "scheduler",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub corpus_path: PathBuf,
    pub dictionary_path: PathBuf,
    pub data_dir: PathBuf,
    pub bind_address: String,
    pub topology: TopologyKind,
    pub required_assurance: AssuranceLevel,
    pub session_ttl: Duration,
    pub c_msg: f64,
    pub c_move: f64,
    pub kappa: f64,
    pub repetitions: usize,
    pub seed: u64,
    pub secret_path: Option<PathBuf>,
    pub scheduler: SchedulerModeName,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Relative paths are resolved against `base`, the config file's
    /// directory.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(CliError::config(format!("config line {}: unknown key `{k}`", n + 1)));
            }
            kv.insert(k.to_string(), v.trim().to_string());
        }
        let path = |key: &str| -> Result<PathBuf, CliError> {
            let v = kv.get(key).ok_or_else(|| CliError::config(format!("missing `{key}`")))?;
            let p = base.join(v);
            if p.exists() {
                Ok(p)
            } else {
                Err(CliError::config(format!("`{key}` path {} does not exist", p.display())))
            }
        };
        fn num<T: std::str::FromStr>(kv: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
            match kv.get(key) {
                Some(v) => v.parse().map_err(|_| CliError::config(format!("`{key}`: `{v}` is not a valid value"))),
                None => Ok(default),
            }
        }
        let topology = match kv.get("topology") {
            Some(t) => t.parse().map_err(CliError::config)?,
            None => TopologyKind::Static,
        };
        let level: u8 = num(&kv, "required_assurance", AssuranceLevel::default().level())?;
        let required_assurance = AssuranceLevel::new(level)
            .ok_or_else(|| CliError::config(format!("`required_assurance` must be 0..=3, got {level}")))?;
        let scheduler = match kv.get("scheduler").map(String::as_str) {
            None | Some("deterministic") => SchedulerModeName::Deterministic,
            Some("threaded") => SchedulerModeName::Threaded,
            Some(other) => return Err(CliError::config(format!("`scheduler`: unknown mode `{other}`"))),
        };
        let cfg = CliConfig {
            corpus_path: path("corpus_path")?,
            dictionary_path: path("dictionary_path")?,
            data_dir: path("data_dir")?,
            bind_address: kv.get("bind_address").cloned().unwrap_or_else(|| "127.0.0.1:7878".into()),
            topology,
            required_assurance,
            session_ttl: Duration::from_secs(num(&kv, "session_ttl_secs", 1800u64)?),
            c_msg: num(&kv, "c_msg", 0.0)?,
            c_move: num(&kv, "c_move", 0.0)?,
            kappa: num(&kv, "kappa", 0.0)?,
            repetitions: num(&kv, "repetitions", 10usize)?,
            seed: num(&kv, "seed", 42u64)?,
            secret_path: if kv.contains_key("secret_path") {
                Some(path("secret_path")?)
            } else {
                None
            },
            scheduler,
        };
        cfg.benchmark().validate().map_err(CliError::config)?;
        Ok(cfg)
    }

    pub fn benchmark(&self) -> BenchmarkConfig {
        BenchmarkConfig {
            c_msg: self.c_msg,
            c_move: self.c_move,
            kappa: self.kappa,
            repetitions: self.repetitions,
            mode: self.scheduler,
        }
    }

    pub fn platform(&self) -> PlatformConfig {
        PlatformConfig {
            mode: SchedulerMode::from(self.scheduler),
            c_msg: self.c_msg,
            c_move: self.c_move,
            kappa: self.kappa,
        }
    }

    pub fn users_file(&self) -> PathBuf {
        self.data_dir.join("users.txt")
    }

    pub fn profiles_dir(&self) -> PathBuf {
        self.data_dir.join("profiles")
    }
}

/// Renders a config with paths relative to the file's own directory.
pub fn render(entries: &[(&str, String)]) -> String {
    entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir_with_files() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        std::fs::create_dir(d.path().join("corpus")).unwrap();
        std::fs::create_dir(d.path().join("data")).unwrap();
        std::fs::write(d.path().join("dict.tsv"), "").unwrap();
        d
    }

    #[test]
    fn parses_and_defaults() {
        let d = dir_with_files();
        let c = CliConfig::parse(
            "corpus_path = corpus\ndictionary_path = dict.tsv\ndata_dir = data\ntopology = mobile\nkappa = 0.25\n",
            d.path(),
        )
        .unwrap();
        assert_eq!(c.topology, TopologyKind::Mobile);
        assert_eq!(c.kappa, 0.25);
        assert_eq!(c.required_assurance.level(), 2);
        assert_eq!(c.repetitions, 10);
        assert!(c.secret_path.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        let d = dir_with_files();
        let ok = "corpus_path = corpus\ndictionary_path = dict.tsv\ndata_dir = data\n";
        for bad in [
            "corpus_path = nowhere\ndictionary_path = dict.tsv\ndata_dir = data\n".to_string(),
            format!("{ok}topology = ring\n"),
            format!("{ok}required_assurance = 4\n"),
            format!("{ok}repetitions = 0\n"),
            format!("{ok}colour = blue\n"),
            format!("{ok}kappa = -1\n"),
        ] {
            let err = CliConfig::parse(&bad, d.path()).unwrap_err();
            assert_eq!(err.code, crate::exit::CONFIG, "{bad}");
        }
    }
}
