//! Flat `key = value` config files. Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;

use infmul::{Error, Result};

pub const KEYS: &[&str] = &[
    "K", "tol", "format", "seed", "c", "cprime", "N", "trials", "kmax", "sampler",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key = value",
                    i + 1
                )));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {k:?} (known: {})",
                    i + 1,
                    KEYS.join(", ")
                )));
            }
            values.insert(k.to_string(), v.to_string());
        }
        Ok(FileConfig { values })
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad value for {key}: {v:?}"))),
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad size {p:?} in list {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg = FileConfig::parse("# run\nK = 6\n\nN=100, 200\nformat=csv\n").unwrap();
        assert_eq!(cfg.get::<usize>("K").unwrap(), Some(6));
        assert_eq!(cfg.get_str("format"), Some("csv"));
        assert_eq!(
            parse_list(cfg.get_str("N").unwrap()).unwrap(),
            vec![100, 200]
        );
        assert!(cfg.get::<usize>("seed").unwrap().is_none());
        assert!(FileConfig::parse("bogus = 1").is_err());
        assert!(FileConfig::parse("K 6").is_err());
        assert!(FileConfig::parse("K = six")
            .unwrap()
            .get::<usize>("K")
            .is_err());
    }
}
