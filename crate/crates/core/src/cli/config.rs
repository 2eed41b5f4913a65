//! Flat `key = value` configuration text with `[section]` headers.
//!
//! Grammar, one item per line:
//!
//! ```text
//! line    := blank | comment | header | entry
//! comment := ('#' | ';') any*
//! header  := '[' name ']'
//! entry   := key ws* '=' ws* value
//! name    := [a-z0-9_-]+          key := [a-z0-9_]+
//! value   := any non-empty text without leading/trailing spaces
//! ```
//!
//! Entries before the first header belong to the top-level section, written `""`.
//! Comments are whole-line only, so `#` may appear inside values. A section or key
//! may appear only once.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Parsed configuration: section name to ordered `key → value`.
///
/// Line numbers are kept for diagnostics and ignored by equality.
#[derive(Clone, Debug, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
    lines: BTreeMap<(String, String), usize>,
    section_lines: BTreeMap<String, usize>,
}

impl PartialEq for Config {
    fn eq(&self, other: &Self) -> bool {
        self.sections == other.sections
    }
}

fn config_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Config { line, msg: msg.into() })
}

fn is_name(s: &str, allow_dash: bool) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || (allow_dash && c == '-'))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
                continue;
            }
            if let Some(rest) = t.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return config_err(line, "section header is missing the closing ']'");
                };
                let name = name.trim();
                if !is_name(name, true) {
                    return config_err(line, format!("invalid section name '{name}'"));
                }
                if cfg.section_lines.contains_key(name) {
                    return config_err(line, format!("section [{name}] appears twice"));
                }
                cfg.section_lines.insert(name.to_string(), line);
                cfg.sections.insert(name.to_string(), BTreeMap::new());
                current = name.to_string();
                continue;
            }
            let Some((k, v)) = t.split_once('=') else {
                return config_err(line, "expected 'key = value', a [section] header or a comment");
            };
            let (k, v) = (k.trim(), v.trim());
            if !is_name(k, false) {
                return config_err(line, format!("invalid key '{k}'"));
            }
            if v.is_empty() {
                return config_err(line, format!("key '{k}' has an empty value"));
            }
            let sec = cfg.sections.entry(current.clone()).or_default();
            if sec.contains_key(k) {
                return config_err(line, format!("key '{k}' appears twice in {}", display_section(&current)));
            }
            sec.insert(k.to_string(), v.to_string());
            cfg.lines.insert((current.clone(), k.to_string()), line);
        }
        Ok(cfg)
    }

    /// Canonical text: top-level entries first, then sections in name order, keys sorted.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            if !name.is_empty() {
                if !out.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{name}]");
            }
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    /// Names of all sections present, including empty ones.
    pub fn section_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.sections.keys().map(String::as_str)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(String::as_str)
    }

    /// Sets a value, creating the section if needed.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections.entry(section.to_string()).or_default().insert(key.to_string(), value.to_string());
    }

    /// Source line of an entry (0 when it was set programmatically).
    pub fn line_of(&self, section: &str, key: &str) -> usize {
        self.lines.get(&(section.to_string(), key.to_string())).copied().unwrap_or(0)
    }

    pub fn section_line(&self, section: &str) -> usize {
        self.section_lines.get(section).copied().unwrap_or(0)
    }

    /// `(section, key, value, line)` in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, &str, usize)> + '_ {
        self.sections.iter().flat_map(move |(s, m)| {
            m.iter().map(move |(k, v)| (s.as_str(), k.as_str(), v.as_str(), self.line_of(s, k)))
        })
    }
}

pub(crate) fn display_section(s: &str) -> String {
    if s.is_empty() {
        "the top level".to_string()
    } else {
        format!("[{s}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_canonical_form() {
        let text = "# demo\nexperiment = exact\n\n[graph]\nfamily=triangle\n[run]\ncheck = loop_identity\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.get("", "experiment"), Some("exact"));
        assert_eq!(c.get("graph", "family"), Some("triangle"));
        assert_eq!(c.line_of("run", "check"), 7);
        let back = Config::parse(&c.serialize()).unwrap();
        assert_eq!(c, back);
        assert_eq!(back.serialize(), c.serialize());
    }

    #[test]
    fn errors_carry_lines() {
        for (text, line) in [
            ("experiment = exact\nnot a pair\n", 2),
            ("[graph\n", 1),
            ("a = 1\na = 2\n", 2),
            ("[x]\n[x]\n", 2),
            ("\n\nKey = 1\n", 3),
            ("k =\n", 1),
        ] {
            match Config::parse(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
