//! Line-oriented `key: value` documents shared by the flight configuration
//! and geometry sidecar readers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits `text` into entries. Blank lines and lines starting with `#` are
/// skipped; a key may appear only once.
pub(crate) fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once(':') else {
            return Err(Error::parse(
                line,
                format!("expected `key: value`, got {trimmed:?}"),
            ));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::parse(line, "empty key"));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(Error::parse(
                line,
                format!("duplicate key \"{key}\" (first on line {})", prev.line),
            ));
        }
        entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

pub(crate) fn find<'a>(entries: &'a [Entry], key: &str) -> Option<&'a Entry> {
    entries.iter().find(|e| e.key == key)
}

pub(crate) fn require<'a>(entries: &'a [Entry], key: &str) -> Result<&'a Entry> {
    find(entries, key).ok_or_else(|| Error::MissingKey(key.to_string()))
}

impl Entry {
    pub fn number(&self) -> Result<f64> {
        let v: f64 = self.value.parse().map_err(|_| {
            Error::parse(
                self.line,
                format!("{}: malformed number {:?}", self.key, self.value),
            )
        })?;
        if !v.is_finite() {
            return Err(Error::validation(&self.key, format!("{v} is not finite")));
        }
        Ok(v)
    }

    pub fn positive_integer(&self) -> Result<u32> {
        let v: u32 = self.value.parse().map_err(|_| {
            Error::parse(
                self.line,
                format!("{}: malformed integer {:?}", self.key, self.value),
            )
        })?;
        if v == 0 {
            return Err(Error::validation(&self.key, "must be at least 1"));
        }
        Ok(v)
    }
}
