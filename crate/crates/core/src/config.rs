//! Flat `key = value` run configuration files.
//!
//! One scalar per line, `#` starts a comment, no nesting. Unknown and
//! duplicated keys are rejected so typos surface as usage errors instead of
//! silently running defaults.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Every key any subcommand understands.
pub const KNOWN_KEYS: &[&str] = &[
    "model", "a", "nbar", "drive", "kappa", "detuning", "tmax", "dt_out", "seed", "traj",
    "initial", "out", "budget", "n", "window", "nodes",
];

/// Parses config text into a key -> raw-value map.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected 'key = value'", idx + 1)));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key '{key}'", idx + 1)));
        }
        if value.is_empty() {
            return Err(Error::Config(format!("line {}: empty value for '{key}'", idx + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{key}'", idx + 1)));
        }
    }
    Ok(map)
}

/// Typed lookup helpers; parse failures carry the offending key.
pub fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    map.get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("key '{key}': '{v}' is not a number")))
        })
        .transpose()
}

pub fn get_u64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>> {
    map.get(key)
        .map(|v| {
            v.parse::<u64>()
                .map_err(|_| Error::Config(format!("key '{key}': '{v}' is not an integer")))
        })
        .transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_comments() {
        let text = "\n# run setup\n a = 1.5   # spontaneous rate\nnbar=0.25\nseed = 7\n";
        let map = parse_config(text).unwrap();
        assert_eq!(get_f64(&map, "a").unwrap(), Some(1.5));
        assert_eq!(get_f64(&map, "nbar").unwrap(), Some(0.25));
        assert_eq!(get_u64(&map, "seed").unwrap(), Some(7));
        assert_eq!(get_f64(&map, "kappa").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        assert!(parse_config("frobnicate = 3\n").is_err());
        assert!(parse_config("a = 1\na = 2\n").is_err());
        assert!(parse_config("just a line\n").is_err());
        assert!(parse_config("a =\n").is_err());
        let map = parse_config("a = abc\n").unwrap();
        assert!(get_f64(&map, "a").is_err());
    }
}
