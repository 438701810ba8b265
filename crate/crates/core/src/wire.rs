//! Little wire helpers shared by the payload serializers: varint-first
//! writing into a byte vector and a position-tracking reader that turns
//! truncation into corruption errors.

use crate::codec;
use crate::error::{Error, Result};
use crate::token::Token;

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn varint(&mut self, v: u64) {
        codec::varint_encode(v, &mut self.buf);
    }

    pub fn byte(&mut self, b: u8) {
        self.buf.push(b);
    }

    pub fn raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Length-prefixed byte string.
    pub fn blob(&mut self, bytes: &[u8]) {
        self.varint(bytes.len() as u64);
        self.raw(bytes);
    }

    pub fn token(&mut self, token: &Token) {
        token.write_canonical(&mut self.buf);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    /// Context string included in corruption errors, e.g. a section name.
    context: &'a str,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8], context: &'a str) -> Self {
        Self {
            bytes,
            pos: 0,
            context,
        }
    }

    fn corrupt(&self, detail: impl std::fmt::Display) -> Error {
        Error::corrupt(format!("{} at byte {}: {detail}", self.context, self.pos))
    }

    pub fn varint(&mut self) -> Result<u64> {
        let (v, next) = codec::varint_decode(self.bytes, self.pos).map_err(|e| self.corrupt(e))?;
        self.pos = next;
        Ok(v)
    }

    pub fn usize(&mut self) -> Result<usize> {
        Ok(self.varint()? as usize)
    }

    pub fn byte(&mut self) -> Result<u8> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| self.corrupt("unexpected end of data"))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn raw(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .ok_or_else(|| self.corrupt("length overflow"))?;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| self.corrupt(format!("{len} bytes requested past end")))?;
        self.pos = end;
        Ok(slice)
    }

    pub fn blob(&mut self) -> Result<Vec<u8>> {
        let len = self.usize()?;
        Ok(self.raw(len)?.to_vec())
    }

    pub fn token(&mut self) -> Result<Token> {
        let (token, next) =
            Token::read_canonical(self.bytes, self.pos).map_err(|e| self.corrupt(e))?;
        self.pos = next;
        Ok(token)
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    /// Every payload section must be fully consumed; leftovers mean the
    /// reader and writer disagree about the format.
    pub fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::corrupt(format!(
                "{}: {} trailing byte(s) after final field",
                self.context,
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}
