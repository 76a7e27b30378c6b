//! Flat `key = value` text files, one pair per line, `#` comments.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
    context: String,
}

impl KeyValues {
    pub fn new(context: impl Into<String>) -> Self {
        Self {
            entries: BTreeMap::new(),
            context: context.into(),
        }
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut kv = Self::new(context);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(context, i + 1, format!("expected `key = value`, got {line:?}")))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(context, i + 1, "empty key"));
            }
            if kv.entries.insert(k.to_string(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::parse(context, i + 1, format!("duplicate key {k:?}")));
            }
        }
        Ok(kv)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    /// Parsed value of `key`, or `None` when absent.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::parse(&self.context, *line, format!("bad value {v:?} for {key:?}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::parse(&self.context, 0, format!("missing key {key:?}")))
    }

    /// Comma-separated list value.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some((line, v)) = self.entries.get(key) else {
            return Ok(None);
        };
        if v.is_empty() {
            return Ok(Some(Vec::new()));
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::parse(&self.context, *line, format!("bad list item {s:?} for {key:?}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, (_, v))| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let kv = KeyValues::parse("# header\nseed = 3\nlayers = 1, 2,3\nname = cuboids # trailing\n", "t").unwrap();
        assert_eq!(kv.require::<u64>("seed").unwrap(), 3);
        assert_eq!(kv.get_list::<usize>("layers").unwrap().unwrap(), vec![1, 2, 3]);
        assert_eq!(kv.raw("name"), Some("cuboids"));
        assert_eq!(kv.get::<f64>("missing").unwrap(), None);
        let again = KeyValues::parse(&kv.to_text(), "t").unwrap();
        assert_eq!(again.raw("layers"), Some("1, 2,3"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = KeyValues::parse("a = 1\nbroken\n", "cfg").unwrap_err();
        assert!(e.to_string().contains('2'), "{e}");
        assert!(KeyValues::parse("a = 1\na = 2\n", "cfg").is_err());
        let kv = KeyValues::parse("a = x\n", "cfg").unwrap();
        assert!(kv.get::<f64>("a").is_err());
    }
}
