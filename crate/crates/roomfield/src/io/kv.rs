//! Line-oriented `key = value` documents: `#` starts a comment, keys are
//! case-sensitive and dotted, values carry their own micro-syntax (numbers,
//! `mag@deg` complex values, comma-separated points and lists).

use crate::error::Error;
use crate::geom::Point3;
use crate::Result;
use num_complex::Complex64;
use std::path::Path;

/// One parsed `key = value` line, with its 1-based source line number for
/// error reporting.
#[derive(Debug, Clone)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// A parsed document. Entry order and line numbers are preserved; duplicate
/// keys are rejected at parse time.
#[derive(Debug, Clone)]
pub struct KvDoc {
    path: String,
    entries: Vec<KvEntry>,
}

impl KvDoc {
    pub fn parse(path: &str, text: &str) -> Result<Self> {
        let mut entries: Vec<KvEntry> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = strip_comment(raw).trim();
            if trimmed.is_empty() {
                continue;
            }
            let (key, value) = split_kv(path, line, trimmed)?;
            if entries.iter().any(|e| e.key == key) {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.push(KvEntry { key, value, line });
        }
        Ok(KvDoc {
            path: path.to_string(),
            entries,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn entries(&self) -> &[KvEntry] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&KvEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&KvEntry> {
        self.get(key).ok_or_else(|| Error::MissingKey {
            path: self.path.clone(),
            key: key.to_string(),
        })
    }

    /// Reject any key outside the allowlist, naming the first offender and
    /// its line.
    pub fn expect_only(&self, allowed: &[&str]) -> Result<()> {
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(Error::Parse {
                    path: self.path.clone(),
                    line: e.line,
                    message: format!("unknown key `{}`", e.key),
                });
            }
        }
        Ok(())
    }

    fn err(&self, entry: &KvEntry, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: entry.line,
            message,
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let e = self.require(key)?;
        parse_f64(&e.value).map_err(|m| self.err(e, m))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let e = self.require(key)?;
        e.value
            .parse::<usize>()
            .map_err(|_| self.err(e, format!("invalid count `{}`", e.value)))
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        let e = self.require(key)?;
        e.value
            .parse::<u64>()
            .map_err(|_| self.err(e, format!("invalid integer `{}`", e.value)))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        let e = self.require(key)?;
        match e.value.as_str() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(self.err(e, format!("expected true or false, got `{other}`"))),
        }
    }

    pub fn get_string(&self, key: &str) -> Result<String> {
        Ok(self.require(key)?.value.clone())
    }

    pub fn get_complex(&self, key: &str) -> Result<Complex64> {
        let e = self.require(key)?;
        parse_complex(&e.value).map_err(|m| self.err(e, m))
    }

    pub fn get_point(&self, key: &str) -> Result<Point3> {
        let e = self.require(key)?;
        parse_point(&e.value).map_err(|m| self.err(e, m))
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let e = self.require(key)?;
        e.value
            .split(',')
            .map(|part| parse_f64(part.trim()))
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map_err(|m| self.err(e, m))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn split_kv(path: &str, line: usize, text: &str) -> Result<(String, String)> {
    let Some(eq) = text.find('=') else {
        return Err(Error::Parse {
            path: path.to_string(),
            line,
            message: format!("expected `key = value`, got `{text}`"),
        });
    };
    let key = text[..eq].trim();
    let value = text[eq + 1..].trim();
    if key.is_empty() {
        return Err(Error::Parse {
            path: path.to_string(),
            line,
            message: "empty key".to_string(),
        });
    }
    Ok((key.to_string(), value.to_string()))
}

pub(crate) fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("invalid number `{s}`"))
}

/// `magnitude@degrees`, e.g. `0.203@-13.5`.
pub(crate) fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (mag, deg) = s
        .split_once('@')
        .ok_or_else(|| format!("expected `magnitude@degrees`, got `{s}`"))?;
    let mag = parse_f64(mag)?;
    let deg = parse_f64(deg)?;
    Ok(Complex64::from_polar(mag, deg.to_radians()))
}

/// Three comma-separated decimals: `x, y, z`.
pub(crate) fn parse_point(s: &str) -> std::result::Result<Point3, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected `x, y, z`, got `{s}`"));
    }
    Ok(Point3::new(
        parse_f64(parts[0])?,
        parse_f64(parts[1])?,
        parse_f64(parts[2])?,
    ))
}

/// `mag@deg` rendering used everywhere a complex value is written out.
pub(crate) fn format_polar(mag: f64, deg: f64) -> String {
    format!("{mag}@{deg}")
}

pub(crate) fn format_point(p: Point3) -> String {
    format!("{}, {}, {}", p.x, p.y, p.z)
}
