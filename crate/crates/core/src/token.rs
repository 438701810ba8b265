//! Token model shared by the compressor and decompressor.
//!
//! A structural token is kept as a list of segments rather than a flat
//! string: literal byte runs interleaved with metadata placeholders. This
//! keeps placeholder substitution out-of-band, so input bytes that happen to
//! look like a placeholder tag can never be confused with one.

use crate::codec;

/// One piece of a structural token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    /// Raw bytes copied verbatim from the input.
    Lit(Vec<u8>),
    /// A metadata placeholder; the index refers into the active pattern set
    /// and selects the columnar stream holding the extracted values.
    Meta(u16),
}

/// A token after pre-processing.
///
/// `Wildcard` marks a token that was generalized into a variable; its
/// original bytes live in the line's variable list. Everything else is a
/// `Text` token whose segments reproduce the original bytes once metadata
/// stream values are substituted back in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Token {
    Wildcard,
    Text(Vec<Segment>),
}

impl Token {
    pub fn literal(bytes: impl Into<Vec<u8>>) -> Self {
        Token::Text(vec![Segment::Lit(bytes.into())])
    }

    pub fn is_wildcard(&self) -> bool {
        matches!(self, Token::Wildcard)
    }

    /// Bytes of a token that consists of a single literal segment.
    /// Only such tokens may be folded into a sibling wildcard branch.
    pub fn pure_literal_bytes(&self) -> Option<&[u8]> {
        match self {
            Token::Text(segs) => match segs.as_slice() {
                [Segment::Lit(bytes)] => Some(bytes),
                _ => None,
            },
            Token::Wildcard => None,
        }
    }

    pub fn has_meta(&self) -> bool {
        match self {
            Token::Wildcard => false,
            Token::Text(segs) => segs.iter().any(|s| matches!(s, Segment::Meta(_))),
        }
    }

    /// Canonical byte encoding, used for signatures, deterministic child
    /// ordering and archive serialization. Length prefixes everywhere keep
    /// token content from forging structure.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_canonical(&mut out);
        out
    }

    pub fn write_canonical(&self, out: &mut Vec<u8>) {
        match self {
            Token::Wildcard => out.push(0),
            Token::Text(segs) => {
                out.push(1);
                codec::varint_encode(segs.len() as u64, out);
                for seg in segs {
                    match seg {
                        Segment::Lit(bytes) => {
                            out.push(0);
                            codec::varint_encode(bytes.len() as u64, out);
                            out.extend_from_slice(bytes);
                        }
                        Segment::Meta(idx) => {
                            out.push(1);
                            codec::varint_encode(u64::from(*idx), out);
                        }
                    }
                }
            }
        }
    }

    pub fn read_canonical(bytes: &[u8], pos: usize) -> Result<(Token, usize), codec::CodecError> {
        let &kind = bytes
            .get(pos)
            .ok_or(codec::CodecError::Truncated { offset: pos })?;
        let mut pos = pos + 1;
        match kind {
            0 => Ok((Token::Wildcard, pos)),
            1 => {
                let (nseg, next) = codec::varint_decode(bytes, pos)?;
                pos = next;
                let mut segs = Vec::with_capacity(nseg as usize);
                for _ in 0..nseg {
                    let &tag = bytes
                        .get(pos)
                        .ok_or(codec::CodecError::Truncated { offset: pos })?;
                    pos += 1;
                    match tag {
                        0 => {
                            let (len, next) = codec::varint_decode(bytes, pos)?;
                            pos = next;
                            let end = pos + len as usize;
                            let lit = bytes
                                .get(pos..end)
                                .ok_or(codec::CodecError::Truncated { offset: pos })?;
                            segs.push(Segment::Lit(lit.to_vec()));
                            pos = end;
                        }
                        1 => {
                            let (idx, next) = codec::varint_decode(bytes, pos)?;
                            pos = next;
                            segs.push(Segment::Meta(idx as u16));
                        }
                        _ => return Err(codec::CodecError::Truncated { offset: pos - 1 }),
                    }
                }
                Ok((Token::Text(segs), pos))
            }
            _ => Err(codec::CodecError::Truncated { offset: pos - 1 }),
        }
    }

    /// Human-readable rendering for diagnostics; `tags` maps pattern indices
    /// to their placeholder tags.
    pub fn display(&self, tags: &[String]) -> String {
        match self {
            Token::Wildcard => "<*>".to_string(),
            Token::Text(segs) => {
                let mut s = String::new();
                for seg in segs {
                    match seg {
                        Segment::Lit(bytes) => s.push_str(&String::from_utf8_lossy(bytes)),
                        Segment::Meta(idx) => {
                            let tag = tags.get(*idx as usize).map(String::as_str).unwrap_or("?");
                            s.push('<');
                            s.push_str(tag);
                            s.push('>');
                        }
                    }
                }
                s
            }
        }
    }
}

/// The ordered original values of a line's wildcard tokens.
pub type VarList = Vec<Vec<u8>>;
