//! Optional `key=value` config files. Flags given on the command line win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value, got {raw:?}", lineno + 1))?;
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            if key.is_empty() {
                return Err(format!("config line {}: empty key", lineno + 1));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `flag`, else the config value for `key`, else `None`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| format!("config key {key}={v}: {e}")),
        }
    }

    pub fn resolve_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.resolve(flag, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        self.resolve(flag, key)?.ok_or_else(|| format!("missing --{key} (flag or config)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let c = Config::parse("# sweep\nmodel = free:2,1\nlambda=0.5  # inline\nn_max=300\n\n").unwrap();
        assert_eq!(c.get("model"), Some("free:2,1"));
        assert_eq!(c.resolve::<f64>(None, "lambda").unwrap(), Some(0.5));
        assert_eq!(c.resolve(Some(2.0), "lambda").unwrap(), Some(2.0));
        assert_eq!(c.resolve_or::<usize>(None, "n-max", 1).unwrap(), 300);
        assert!(c.require::<u64>(None, "seed").is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(Config::parse("model free").is_err());
        let c = Config::parse("lambda=abc").unwrap();
        assert!(c.resolve::<f64>(None, "lambda").is_err());
    }
}
