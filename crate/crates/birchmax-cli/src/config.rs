//! Configuration resolution: CLI flag > config-file key > environment
//! (CACHE_DIR only) > built-in default. The config file is plain key=value
//! lines with '#' comments.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use birchmax::{Error, Result, TraceFamily};

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParam(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::InvalidParam(format!("config key {key} has unparsable value {raw:?}"))
            }),
        }
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// flag > file > default
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(file.get(key)?.unwrap_or(default))
}

pub fn resolve_opt<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
}

/// Cache directory is the one key with an environment fallback.
pub fn resolve_cache_dir(flag: Option<PathBuf>, file: &FileConfig) -> PathBuf {
    flag.or_else(|| file.get_raw("cache_dir").map(PathBuf::from))
        .or_else(|| std::env::var_os("CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("./cache"))
}

pub fn parse_family(s: &str) -> Result<TraceFamily> {
    match s {
        "birch" => Ok(TraceFamily::Birch),
        "kloosterman" => Ok(TraceFamily::Kloosterman),
        _ => {
            if let Some(list) = s.strip_prefix("oddpoly:") {
                let coeffs = list
                    .split(',')
                    .map(|c| {
                        c.trim().parse::<i64>().map_err(|_| {
                            Error::InvalidParam(format!("bad polynomial coefficient {c:?}"))
                        })
                    })
                    .collect::<Result<Vec<i64>>>()?;
                TraceFamily::odd_polynomial(coeffs)
            } else {
                Err(Error::InvalidParam(format!(
                    "unknown family {s:?} (expected birch, kloosterman, or oddpoly:<coeffs>)"
                )))
            }
        }
    }
}

/// "a..b" -> all primes in the half-open range [a, b).
pub fn parse_prime_range(s: &str) -> Result<Vec<u64>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::InvalidParam(format!("expected a..b, got {s:?}")))?;
    let lo: u64 = a
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad range start {a:?}")))?;
    let hi: u64 = b
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParam(format!("bad range end {b:?}")))?;
    if hi <= lo {
        return Err(Error::InvalidParam(format!("empty prime range {s:?}")));
    }
    let primes: Vec<u64> = (lo..hi).filter(|&n| birchmax::field::is_prime(n)).collect();
    if primes.is_empty() {
        return Err(Error::InvalidParam(format!("no primes in {s:?}")));
    }
    if primes.len() > 64 {
        return Err(Error::InvalidParam(format!(
            "{} primes in {s:?}; cap is 64 per run",
            primes.len()
        )));
    }
    Ok(primes)
}

/// Comma-separated u32 list ("16,64,256").
pub fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidParam(format!("bad list entry {v:?}")))
        })
        .collect()
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParam(format!("bad list entry {v:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_precedence_and_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "p = 1009  # ladder base\nseed=7\n\n# comment\n").unwrap();
        let file = FileConfig::load(&path).unwrap();
        assert_eq!(resolve(Some(17u64), &file, "p", 3).unwrap(), 17);
        assert_eq!(resolve(None::<u64>, &file, "p", 3).unwrap(), 1009);
        assert_eq!(resolve(None::<u64>, &file, "trials", 3).unwrap(), 3);
        assert_eq!(file.get::<u64>("seed").unwrap(), Some(7));
    }

    #[test]
    fn bad_value_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "p=eleven\n").unwrap();
        let file = FileConfig::load(&path).unwrap();
        assert!(file.get::<u64>("p").is_err());
    }

    #[test]
    fn family_strings() {
        assert!(matches!(parse_family("birch").unwrap(), TraceFamily::Birch));
        assert!(matches!(
            parse_family("kloosterman").unwrap(),
            TraceFamily::Kloosterman
        ));
        let f = parse_family("oddpoly:0,0,0,1,0,2").unwrap();
        assert_eq!(f.slug(), "oddpoly_0_0_0_1_0_2");
        assert!(parse_family("legendre").is_err());
        assert!(parse_family("oddpoly:0,1").is_err());
    }

    #[test]
    fn prime_ranges() {
        assert_eq!(parse_prime_range("10..20").unwrap(), vec![11, 13, 17, 19]);
        assert!(parse_prime_range("20..10").is_err());
        assert!(parse_prime_range("24..29").is_err());
        assert!(parse_prime_range("2..1000").is_err());
    }
}
