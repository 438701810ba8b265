//! Per-line pre-processing: tokenization, metadata extraction and numeric
//! generalization, plus the byte-exact inverse used during reconstruction.
//!
//! Lines split on ASCII space only; tabs and other whitespace stay inside
//! tokens. Inter-token gap widths are recorded per line whenever they differ
//! from the default shape (no leading/trailing spaces, single spaces between
//! tokens), so reassembly is exact for any input.

use crate::error::{Error, Result};
use crate::patterns::{MetaValue, PatternSet};
use crate::token::{Segment, Token, VarList};

/// One fully pre-processed line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessedLine {
    pub tokens: Vec<Token>,
    pub vars: VarList,
    /// Extracted metadata values in deterministic per-line order.
    pub meta: Vec<(u16, MetaValue)>,
    /// Gap widths (`tokens.len() + 1` entries) when they differ from the
    /// default shape; `None` means the default.
    pub gaps: Option<Vec<u64>>,
}

/// Split a byte buffer into lines. Returns the line slices (without their
/// `\n` terminators) and whether the final line was terminated.
pub fn split_lines(data: &[u8]) -> (Vec<&[u8]>, bool) {
    let mut lines = Vec::new();
    let mut start = 0usize;
    for (i, &b) in data.iter().enumerate() {
        if b == b'\n' {
            lines.push(&data[start..i]);
            start = i + 1;
        }
    }
    let terminated = start == data.len();
    if !terminated {
        lines.push(&data[start..]);
    }
    (lines, terminated)
}

/// Split one line into space-delimited tokens. The returned gap vector has
/// `tokens.len() + 1` entries covering leading, inter-token and trailing
/// runs of spaces.
pub fn tokenize(line: &[u8]) -> (Vec<&[u8]>, Vec<u64>) {
    let mut tokens = Vec::new();
    let mut gaps = Vec::new();
    let mut i = 0usize;
    loop {
        let gap_start = i;
        while i < line.len() && line[i] == b' ' {
            i += 1;
        }
        gaps.push((i - gap_start) as u64);
        if i == line.len() {
            break;
        }
        let tok_start = i;
        while i < line.len() && line[i] != b' ' {
            i += 1;
        }
        tokens.push(&line[tok_start..i]);
    }
    (tokens, gaps)
}

/// True when the gap vector matches the default shape for `ntokens` tokens.
pub fn is_default_gaps(gaps: &[u64], ntokens: usize) -> bool {
    debug_assert_eq!(gaps.len(), ntokens + 1);
    if gaps[0] != 0 || gaps[ntokens] != 0 {
        return false;
    }
    ntokens < 2 || gaps[1..ntokens].iter().all(|&g| g == 1)
}

/// The default gap widths for `ntokens` tokens.
pub fn default_gaps(ntokens: usize) -> Vec<u64> {
    let mut gaps = vec![1u64; ntokens + 1];
    gaps[0] = 0;
    gaps[ntokens] = 0;
    gaps
}

type ExtractedToken = (Vec<Segment>, Vec<(u16, MetaValue)>);

/// Apply the metadata patterns to one raw token. Returns the segment list
/// and the extracted values; `None` means no pattern touched the token.
fn extract_metadata(token: &[u8], patterns: &PatternSet) -> Option<ExtractedToken> {
    if patterns.is_empty() {
        return None;
    }
    let mut values = Vec::new();
    let mut segs: Vec<Segment> = vec![Segment::Lit(token.to_vec())];
    let mut touched = false;
    for (idx, pattern) in patterns.patterns().iter().enumerate() {
        let idx = idx as u16;
        let mut next: Vec<Segment> = Vec::with_capacity(segs.len());
        for seg in segs {
            let bytes = match seg {
                Segment::Meta(_) => {
                    next.push(seg);
                    continue;
                }
                Segment::Lit(bytes) => bytes,
            };
            let mut cursor = 0usize;
            for caps in pattern.regex.captures_iter(&bytes) {
                let m = caps.get(1).unwrap_or_else(|| caps.get(0).unwrap());
                let Some(value) = pattern.parse_value(m.as_bytes()) else {
                    // Would not re-render exactly; leave these bytes alone.
                    continue;
                };
                if m.start() > cursor {
                    next.push(Segment::Lit(bytes[cursor..m.start()].to_vec()));
                }
                values.push((idx, value));
                next.push(Segment::Meta(idx));
                touched = true;
                cursor = m.end();
            }
            if cursor < bytes.len() {
                next.push(Segment::Lit(bytes[cursor..].to_vec()));
            }
        }
        segs = next;
    }
    touched.then_some((segs, values))
}

fn literal_segments_have_digit(segs: &[Segment]) -> bool {
    segs.iter().any(|s| match s {
        Segment::Lit(bytes) => bytes.iter().any(u8::is_ascii_digit),
        Segment::Meta(_) => false,
    })
}

/// Pre-process one line: tokenize, extract metadata, generalize tokens that
/// contain decimal digits into wildcards.
pub fn preprocess_line(line: &[u8], patterns: &PatternSet) -> PreprocessedLine {
    let (raw_tokens, gaps) = tokenize(line);
    let mut tokens = Vec::with_capacity(raw_tokens.len());
    let mut vars = VarList::new();
    let mut meta = Vec::new();
    for raw in &raw_tokens {
        // A token fully explained by metadata patterns (no digits left in
        // its literal parts) stays structural with in-place placeholders.
        // Tokens with leftover digits are volatile: extraction is dropped
        // and the whole token generalizes to a wildcard, keeping every
        // token either structural or a single raw variable value.
        match extract_metadata(raw, patterns) {
            Some((segs, values)) if !literal_segments_have_digit(&segs) => {
                meta.extend(values);
                tokens.push(Token::Text(segs));
            }
            _ => {
                if raw.iter().any(u8::is_ascii_digit) {
                    vars.push(raw.to_vec());
                    tokens.push(Token::Wildcard);
                } else {
                    tokens.push(Token::literal(*raw));
                }
            }
        }
    }
    let gaps = if is_default_gaps(&gaps, raw_tokens.len()) {
        None
    } else {
        Some(gaps)
    };
    PreprocessedLine {
        tokens,
        vars,
        meta,
        gaps,
    }
}

/// Reassemble one line from its skeleton tokens. `next_var` supplies the
/// original bytes for each wildcard in order; `next_meta` supplies the next
/// value of the given metadata stream. The exact inverse of
/// [`preprocess_line`] plus tokenization. `meta_kinds` carries the value
/// kind of each metadata stream (pattern regexes are not needed to decode).
pub fn render_line(
    tokens: &[Token],
    gaps: Option<&[u64]>,
    meta_kinds: &[crate::patterns::ValueKind],
    mut next_var: impl FnMut() -> Result<Vec<u8>>,
    mut next_meta: impl FnMut(u16) -> Result<MetaValue>,
    out: &mut Vec<u8>,
) -> Result<()> {
    let default;
    let gaps = match gaps {
        Some(g) => {
            if g.len() != tokens.len() + 1 {
                return Err(Error::corrupt(format!(
                    "gap record has {} entries for {} tokens",
                    g.len(),
                    tokens.len()
                )));
            }
            g
        }
        None => {
            default = default_gaps(tokens.len());
            &default
        }
    };
    for (i, token) in tokens.iter().enumerate() {
        out.extend(std::iter::repeat_n(b' ', gaps[i] as usize));
        match token {
            Token::Wildcard => out.extend_from_slice(&next_var()?),
            Token::Text(segs) => {
                for seg in segs {
                    match seg {
                        Segment::Lit(bytes) => out.extend_from_slice(bytes),
                        Segment::Meta(idx) => {
                            let kind = meta_kinds.get(*idx as usize).ok_or_else(|| {
                                Error::corrupt(format!("unknown metadata stream {idx}"))
                            })?;
                            let value = next_meta(*idx)?;
                            out.extend_from_slice(&kind.render(&value));
                        }
                    }
                }
            }
        }
    }
    out.extend(std::iter::repeat_n(b' ', gaps[tokens.len()] as usize));
    Ok(())
}

/// Test/verification helper: reconstruct a single line from its own
/// pre-processed parts.
pub fn reconstruct_line(pre: &PreprocessedLine, patterns: &PatternSet) -> Result<Vec<u8>> {
    let mut queues: Vec<std::collections::VecDeque<MetaValue>> =
        vec![std::collections::VecDeque::new(); patterns.len()];
    for (idx, value) in &pre.meta {
        queues[*idx as usize].push_back(value.clone());
    }
    let mut vars = pre.vars.iter().cloned();
    let mut out = Vec::new();
    render_line(
        &pre.tokens,
        pre.gaps.as_deref(),
        &patterns.kinds(),
        || {
            vars.next()
                .ok_or_else(|| Error::corrupt("variable list exhausted"))
        },
        |idx| {
            queues[idx as usize]
                .pop_front()
                .ok_or_else(|| Error::corrupt(format!("metadata stream {idx} exhausted")))
        },
        &mut out,
    )?;
    Ok(out)
}
