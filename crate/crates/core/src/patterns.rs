//! Metadata pattern set: configurable regex-driven extraction of globally
//! patterned header fields (months, clock times, bracketed PIDs, dates) into
//! dedicated columnar streams.
//!
//! Extraction is only performed when the value re-renders byte-exactly from
//! its stored form; otherwise the pattern is skipped for that token. This
//! keeps any pattern configuration lossless by construction.

use crate::error::{Error, Result};
use serde::Deserialize;

/// How a pattern's captured value is stored and re-rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    /// Verbatim byte string.
    Text,
    /// Decimal integer, re-rendered zero-padded to `pad` digits (0 = no pad).
    Int { pad: u8 },
    /// `HH:MM:SS` clock time stored as seconds.
    ClockHms,
    /// `HH:MM:SS.mmm` clock time stored as milliseconds.
    ClockHmsMillis,
}

impl ValueKind {
    /// Render a stored value back to its original bytes. Decoding needs only
    /// the kind, not the extraction regex.
    pub fn render(&self, value: &MetaValue) -> Vec<u8> {
        match (self, value) {
            (ValueKind::Text, MetaValue::Text(bytes)) => bytes.clone(),
            (ValueKind::Int { pad }, MetaValue::Int(v)) => {
                format!("{v:0width$}", width = *pad as usize).into_bytes()
            }
            (ValueKind::ClockHms, MetaValue::Int(secs)) => {
                let (h, m, s) = (secs / 3600, (secs / 60) % 60, secs % 60);
                format!("{h:02}:{m:02}:{s:02}").into_bytes()
            }
            (ValueKind::ClockHmsMillis, MetaValue::Int(ms)) => {
                let (secs, milli) = (ms / 1000, ms % 1000);
                let (h, m, s) = (secs / 3600, (secs / 60) % 60, secs % 60);
                format!("{h:02}:{m:02}:{s:02}.{milli:03}").into_bytes()
            }
            _ => Vec::new(),
        }
    }
}

/// An extracted metadata value on its way into a columnar stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetaValue {
    Text(Vec<u8>),
    Int(i64),
}

/// One extraction rule. Patterns are applied in priority order (their index
/// in the set). If the regex has a capture group, group 1 is the span that
/// is extracted and replaced; otherwise the whole match is.
#[derive(Debug, Clone)]
pub struct MetadataPattern {
    pub tag: String,
    pub regex: regex::bytes::Regex,
    pub kind: ValueKind,
}

impl MetadataPattern {
    /// Parse a captured span into its stored form, verifying that rendering
    /// reproduces the input exactly. Returns `None` when it would not.
    pub fn parse_value(&self, bytes: &[u8]) -> Option<MetaValue> {
        match self.kind {
            ValueKind::Text => Some(MetaValue::Text(bytes.to_vec())),
            ValueKind::Int { .. } => {
                if bytes.is_empty() || bytes.len() > 18 || !bytes.iter().all(u8::is_ascii_digit) {
                    return None;
                }
                let v: i64 = std::str::from_utf8(bytes).ok()?.parse().ok()?;
                let value = MetaValue::Int(v);
                (self.render_value(&value) == bytes).then_some(value)
            }
            ValueKind::ClockHms => {
                let v = parse_clock(bytes, false)?;
                let value = MetaValue::Int(v);
                (self.render_value(&value) == bytes).then_some(value)
            }
            ValueKind::ClockHmsMillis => {
                let v = parse_clock(bytes, true)?;
                let value = MetaValue::Int(v);
                (self.render_value(&value) == bytes).then_some(value)
            }
        }
    }

    /// Render a stored value back to its original bytes.
    pub fn render_value(&self, value: &MetaValue) -> Vec<u8> {
        self.kind.render(value)
    }
}

fn parse_clock(bytes: &[u8], millis: bool) -> Option<i64> {
    let text = std::str::from_utf8(bytes).ok()?;
    let (clock, frac) = if millis {
        let (c, f) = text.split_once('.')?;
        if f.len() != 3 {
            return None;
        }
        (c, f.parse::<i64>().ok()?)
    } else {
        (text, 0)
    };
    let mut parts = clock.split(':');
    let h: i64 = parts.next()?.parse().ok()?;
    let m: i64 = parts.next()?.parse().ok()?;
    let s: i64 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || clock.len() != 8 {
        return None;
    }
    let secs = h * 3600 + m * 60 + s;
    Some(if millis { secs * 1000 + frac } else { secs })
}

/// The active, priority-ordered pattern set.
#[derive(Debug, Clone)]
pub struct PatternSet {
    patterns: Vec<MetadataPattern>,
}

impl PatternSet {
    pub fn new(patterns: Vec<MetadataPattern>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for p in &patterns {
            if !seen.insert(p.tag.clone()) {
                return Err(Error::Config(format!("duplicate pattern tag {:?}", p.tag)));
            }
        }
        if patterns.len() > u16::MAX as usize {
            return Err(Error::Config("too many patterns".into()));
        }
        Ok(Self { patterns })
    }

    pub fn empty() -> Self {
        Self {
            patterns: Vec::new(),
        }
    }

    /// Built-in defaults covering common log headers: month abbreviations,
    /// clock times with and without milliseconds, ISO dates, four-digit
    /// years and bracketed PIDs.
    pub fn default_set() -> Self {
        let defs: &[(&str, &str, ValueKind)] = &[
            (
                "X",
                r"^(?:Jan|Feb|Mar|Apr|May|Jun|Jul|Aug|Sep|Oct|Nov|Dec)$",
                ValueKind::Text,
            ),
            (
                "dtm",
                r"[0-9]{2}:[0-5][0-9]:[0-5][0-9]\.[0-9]{3}",
                ValueKind::ClockHmsMillis,
            ),
            ("dt", r"[0-9]{2}:[0-5][0-9]:[0-5][0-9]", ValueKind::ClockHms),
            ("D", r"[0-9]{4}-[0-9]{2}-[0-9]{2}", ValueKind::Text),
            ("Y", r"^((?:19|20)[0-9]{2})$", ValueKind::Int { pad: 4 }),
            ("P", r"\[([0-9]+)\]", ValueKind::Int { pad: 0 }),
        ];
        let patterns = defs
            .iter()
            .map(|(tag, re, kind)| MetadataPattern {
                tag: (*tag).to_string(),
                regex: regex::bytes::Regex::new(re).expect("built-in pattern"),
                kind: *kind,
            })
            .collect();
        Self::new(patterns).expect("built-in pattern set")
    }

    pub fn patterns(&self) -> &[MetadataPattern] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, idx: u16) -> Option<&MetadataPattern> {
        self.patterns.get(idx as usize)
    }

    pub fn tags(&self) -> Vec<String> {
        self.patterns.iter().map(|p| p.tag.clone()).collect()
    }

    pub fn kinds(&self) -> Vec<ValueKind> {
        self.patterns.iter().map(|p| p.kind).collect()
    }

    /// Load a pattern set from a TOML file. Entries are applied in file
    /// order, highest priority first:
    ///
    /// ```toml
    /// [[pattern]]
    /// tag = "dt"
    /// regex = '[0-9]{2}:[0-5][0-9]:[0-5][0-9]'
    /// kind = "clock-hms"       # text | int | clock-hms | clock-hms-millis
    /// # pad = 4                # int only: zero-pad width on re-render
    /// ```
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::IoPath {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawPatternFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("pattern file: {e}")))?;
        let mut patterns = Vec::with_capacity(raw.pattern.len());
        for entry in raw.pattern {
            let kind = match entry.kind.as_str() {
                "text" => ValueKind::Text,
                "int" => ValueKind::Int {
                    pad: entry.pad.unwrap_or(0),
                },
                "clock-hms" => ValueKind::ClockHms,
                "clock-hms-millis" => ValueKind::ClockHmsMillis,
                other => {
                    return Err(Error::Config(format!(
                        "pattern {:?}: unknown kind {other:?}",
                        entry.tag
                    )))
                }
            };
            let regex = regex::bytes::Regex::new(&entry.regex)
                .map_err(|e| Error::Config(format!("pattern {:?}: bad regex: {e}", entry.tag)))?;
            patterns.push(MetadataPattern {
                tag: entry.tag,
                regex,
                kind,
            });
        }
        Self::new(patterns)
    }
}

impl Default for PatternSet {
    fn default() -> Self {
        Self::default_set()
    }
}

#[derive(Deserialize)]
struct RawPatternFile {
    #[serde(default)]
    pattern: Vec<RawPattern>,
}

#[derive(Deserialize)]
struct RawPattern {
    tag: String,
    regex: String,
    kind: String,
    pad: Option<u8>,
}
