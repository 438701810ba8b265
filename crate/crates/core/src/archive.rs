//! The self-describing archive container.
//!
//! Layout (all integers varint, little-endian byte order where fixed):
//!
//! ```text
//! magic        4 bytes  "URT1"
//! version      varint   (currently 1)
//! mode         1 byte   0 = single, 1 = chunked
//! chunk_lines  varint   lines per chunk (0 in single mode)
//! codec id     blob     final-codec identifier ("xz", "deflate")
//! tau          varint   }
//! tau_endpoint varint   } configuration echo for inspection
//! flags        1 byte   bit0 = stage 2 bypassed
//! meta table   varint n, then per pattern: tag blob, kind byte, pad varint
//! total_lines  varint
//! chunk index  varint n, then per chunk:
//!              offset, compressed_len, raw_len, line_start, line_count
//!              (varints, offsets strictly increasing, relative to the end
//!              of the header) and a fixed 4-byte CRC-32 (IEEE, LE) of the
//!              compressed frame
//! frames       concatenated final-codec frames
//! ```
//!
//! Each chunk frame is independently compressed and carries everything
//! needed to reconstruct its line span byte-exactly, so chunks decode in
//! parallel and in isolation.

use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::patterns::{MetaValue, PatternSet, ValueKind};
use crate::wire::{Reader, Writer};

pub const MAGIC: [u8; 4] = *b"URT1";
pub const FORMAT_VERSION: u64 = 1;

/// Archive operating mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Chunked,
    Single,
}

impl Mode {
    fn to_byte(self) -> u8 {
        match self {
            Mode::Single => 0,
            Mode::Chunked => 1,
        }
    }

    fn from_byte(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Mode::Single),
            1 => Ok(Mode::Chunked),
            _ => Err(Error::corrupt(format!("bad mode byte {b}"))),
        }
    }
}

/// The pluggable final codec applied to each chunk frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinalCodec {
    /// LZMA2 in an xz container (default).
    Xz,
    /// DEFLATE; the portable fallback.
    Deflate,
}

impl FinalCodec {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "xz" => Ok(FinalCodec::Xz),
            "deflate" => Ok(FinalCodec::Deflate),
            other => Err(Error::UnknownCodec(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            FinalCodec::Xz => "xz",
            FinalCodec::Deflate => "deflate",
        }
    }

    pub fn compress(&self, data: &[u8]) -> Result<Vec<u8>> {
        match self {
            FinalCodec::Xz => {
                let options = lzma_rust2::XzOptions::with_preset(6);
                let mut w = lzma_rust2::XzWriter::new(Vec::new(), options)
                    .map_err(|e| Error::Internal(format!("xz encoder: {e}")))?;
                w.write_all(data)?;
                Ok(w.finish()?)
            }
            FinalCodec::Deflate => {
                let mut enc =
                    flate2::write::DeflateEncoder::new(Vec::new(), flate2::Compression::new(6));
                enc.write_all(data)?;
                Ok(enc.finish()?)
            }
        }
    }

    pub fn decompress(&self, data: &[u8], expected_len: u64) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(expected_len as usize);
        match self {
            FinalCodec::Xz => {
                let mut r = lzma_rust2::XzReader::new(std::io::Cursor::new(data), false);
                r.read_to_end(&mut out)
                    .map_err(|e| Error::corrupt(format!("xz frame: {e}")))?;
            }
            FinalCodec::Deflate => {
                let mut r = flate2::read::DeflateDecoder::new(data);
                r.read_to_end(&mut out)
                    .map_err(|e| Error::corrupt(format!("deflate frame: {e}")))?;
            }
        }
        if out.len() as u64 != expected_len {
            return Err(Error::corrupt(format!(
                "frame decompressed to {} bytes, expected {expected_len}",
                out.len()
            )));
        }
        Ok(out)
    }
}

/// Buffer that keeps frames in memory up to a limit, then spills to an
/// unnamed temporary file.
pub struct Spool {
    limit: usize,
    mem: Vec<u8>,
    file: Option<std::fs::File>,
    len: u64,
}

impl Spool {
    pub fn new(limit: usize) -> Self {
        Self {
            limit,
            mem: Vec::new(),
            file: None,
            len: 0,
        }
    }

    pub fn write(&mut self, data: &[u8]) -> Result<()> {
        self.len += data.len() as u64;
        match &mut self.file {
            Some(f) => f.write_all(data)?,
            None => {
                if self.mem.len() + data.len() > self.limit {
                    let mut f = tempfile::tempfile()?;
                    f.write_all(&self.mem)?;
                    f.write_all(data)?;
                    self.mem = Vec::new();
                    self.file = Some(f);
                } else {
                    self.mem.extend_from_slice(data);
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn copy_to(mut self, out: &mut impl Write) -> Result<()> {
        match &mut self.file {
            Some(f) => {
                f.seek(SeekFrom::Start(0))?;
                std::io::copy(f, out)?;
            }
            None => out.write_all(&self.mem)?,
        }
        Ok(())
    }
}

/// Index entry for one chunk frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkEntry {
    /// Offset of the frame relative to the end of the header.
    pub offset: u64,
    pub compressed_len: u64,
    pub raw_len: u64,
    pub line_start: u64,
    pub line_count: u64,
    pub crc32: u32,
}

/// Header fields describing an archive.
#[derive(Debug, Clone)]
pub struct ArchiveInfo {
    pub mode: Mode,
    pub chunk_lines: u64,
    pub codec: FinalCodec,
    pub tau: u64,
    pub tau_endpoint: u64,
    pub stage2_bypassed: bool,
    /// Tag and value kind of each metadata stream, in pattern order.
    pub meta_table: Vec<(String, ValueKind)>,
    pub total_lines: u64,
    pub chunks: Vec<ChunkEntry>,
}

impl ArchiveInfo {
    pub fn meta_kinds(&self) -> Vec<ValueKind> {
        self.meta_table.iter().map(|(_, k)| *k).collect()
    }
}

fn kind_to_wire(kind: ValueKind) -> (u8, u64) {
    match kind {
        ValueKind::Text => (0, 0),
        ValueKind::Int { pad } => (1, u64::from(pad)),
        ValueKind::ClockHms => (2, 0),
        ValueKind::ClockHmsMillis => (3, 0),
    }
}

fn kind_from_wire(byte: u8, pad: u64) -> Result<ValueKind> {
    match byte {
        0 => Ok(ValueKind::Text),
        1 => Ok(ValueKind::Int { pad: pad as u8 }),
        2 => Ok(ValueKind::ClockHms),
        3 => Ok(ValueKind::ClockHmsMillis),
        b => Err(Error::corrupt(format!("bad value kind {b}"))),
    }
}

/// Incremental archive writer: frames are appended (already compressed, in
/// chunk order) and the header is assembled at the end.
pub struct ArchiveWriter {
    mode: Mode,
    chunk_lines: u64,
    codec: FinalCodec,
    tau: u64,
    tau_endpoint: u64,
    stage2_bypassed: bool,
    meta_table: Vec<(String, ValueKind)>,
    chunks: Vec<ChunkEntry>,
    spool: Spool,
    total_lines: u64,
}

impl ArchiveWriter {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mode: Mode,
        chunk_lines: u64,
        codec: FinalCodec,
        tau: u64,
        tau_endpoint: u64,
        stage2_bypassed: bool,
        patterns: &PatternSet,
        spool_limit: usize,
    ) -> Self {
        let meta_table = patterns
            .patterns()
            .iter()
            .map(|p| (p.tag.clone(), p.kind))
            .collect();
        Self {
            mode,
            chunk_lines,
            codec,
            tau,
            tau_endpoint,
            stage2_bypassed,
            meta_table,
            chunks: Vec::new(),
            spool: Spool::new(spool_limit),
            total_lines: 0,
        }
    }

    pub fn total_lines(&self) -> u64 {
        self.total_lines
    }

    /// Append one already-compressed chunk frame.
    pub fn add_frame(&mut self, compressed: &[u8], raw_len: u64, line_count: u64) -> Result<()> {
        let offset = self.spool.len();
        self.chunks.push(ChunkEntry {
            offset,
            compressed_len: compressed.len() as u64,
            raw_len,
            line_start: self.total_lines,
            line_count,
            crc32: crc32fast::hash(compressed),
        });
        self.total_lines += line_count;
        self.spool.write(compressed)?;
        Ok(())
    }

    pub fn finish(self, out: &mut impl Write) -> Result<u64> {
        let mut w = Writer::new();
        w.raw(&MAGIC);
        w.varint(FORMAT_VERSION);
        w.byte(self.mode.to_byte());
        w.varint(self.chunk_lines);
        w.blob(self.codec.id().as_bytes());
        w.varint(self.tau);
        w.varint(self.tau_endpoint);
        w.byte(u8::from(self.stage2_bypassed));
        w.varint(self.meta_table.len() as u64);
        for (tag, kind) in &self.meta_table {
            w.blob(tag.as_bytes());
            let (byte, pad) = kind_to_wire(*kind);
            w.byte(byte);
            w.varint(pad);
        }
        w.varint(self.total_lines);
        w.varint(self.chunks.len() as u64);
        for c in &self.chunks {
            w.varint(c.offset);
            w.varint(c.compressed_len);
            w.varint(c.raw_len);
            w.varint(c.line_start);
            w.varint(c.line_count);
            w.raw(&c.crc32.to_le_bytes());
        }
        let header = w.into_bytes();
        out.write_all(&header)?;
        let total = header.len() as u64 + self.spool.len();
        self.spool.copy_to(out)?;
        Ok(total)
    }
}

/// A fully loaded archive, ready for (parallel) per-chunk decoding.
pub struct Archive {
    pub info: ArchiveInfo,
    bytes: Vec<u8>,
    payload_base: usize,
}

impl Archive {
    pub fn open(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|source| Error::IoPath {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(bytes)
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::BadMagic);
        }
        let mut r = Reader::new(&bytes[MAGIC.len()..], "archive header");
        let version = r.varint()?;
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let mode = Mode::from_byte(r.byte()?)?;
        let chunk_lines = r.varint()?;
        let codec_id = r.blob()?;
        let codec = FinalCodec::from_id(
            std::str::from_utf8(&codec_id).map_err(|_| Error::corrupt("codec id not utf-8"))?,
        )?;
        let tau = r.varint()?;
        let tau_endpoint = r.varint()?;
        let stage2_bypassed = r.byte()? != 0;
        let nmeta = r.usize()?;
        let mut meta_table = Vec::with_capacity(nmeta);
        for _ in 0..nmeta {
            let tag = String::from_utf8(r.blob()?)
                .map_err(|_| Error::corrupt("pattern tag not utf-8"))?;
            let byte = r.byte()?;
            let pad = r.varint()?;
            meta_table.push((tag, kind_from_wire(byte, pad)?));
        }
        let total_lines = r.varint()?;
        let nchunks = r.usize()?;
        let mut chunks = Vec::with_capacity(nchunks);
        let mut expected_offset = 0u64;
        let mut expected_line = 0u64;
        for i in 0..nchunks {
            let offset = r.varint()?;
            let compressed_len = r.varint()?;
            let raw_len = r.varint()?;
            let line_start = r.varint()?;
            let line_count = r.varint()?;
            let crc = r.raw(4)?;
            let crc32 = u32::from_le_bytes(crc.try_into().expect("4 bytes"));
            if offset != expected_offset {
                return Err(Error::corrupt(format!(
                    "chunk {i}: offset {offset} not contiguous (expected {expected_offset})"
                )));
            }
            if line_start != expected_line {
                return Err(Error::corrupt(format!(
                    "chunk {i}: line span does not partition the file"
                )));
            }
            expected_offset += compressed_len;
            expected_line += line_count;
            chunks.push(ChunkEntry {
                offset,
                compressed_len,
                raw_len,
                line_start,
                line_count,
                crc32,
            });
        }
        if expected_line != total_lines {
            return Err(Error::corrupt(format!(
                "chunk line spans cover {expected_line} of {total_lines} lines"
            )));
        }
        let payload_base = MAGIC.len() + r.position();
        if payload_base as u64 + expected_offset != bytes.len() as u64 {
            return Err(Error::corrupt(format!(
                "archive is {} bytes, frames need {}",
                bytes.len(),
                payload_base as u64 + expected_offset
            )));
        }
        Ok(Self {
            info: ArchiveInfo {
                mode,
                chunk_lines,
                codec,
                tau,
                tau_endpoint,
                stage2_bypassed,
                meta_table,
                total_lines,
                chunks,
            },
            bytes,
            payload_base,
        })
    }

    pub fn chunk_count(&self) -> usize {
        self.info.chunks.len()
    }

    /// The compressed bytes of one frame (CRC already located, not checked).
    pub fn frame_bytes(&self, index: usize) -> Result<&[u8]> {
        let entry = self
            .info
            .chunks
            .get(index)
            .ok_or_else(|| Error::corrupt(format!("chunk {index} out of range")))?;
        let start = self.payload_base + entry.offset as usize;
        let end = start + entry.compressed_len as usize;
        self.bytes
            .get(start..end)
            .ok_or_else(|| Error::corrupt(format!("chunk {index} extends past end of file")))
    }

    /// Verify the CRC of one chunk frame and decompress it.
    pub fn chunk_payload(&self, index: usize) -> Result<Vec<u8>> {
        let frame = self.frame_bytes(index)?;
        let entry = &self.info.chunks[index];
        let computed = crc32fast::hash(frame);
        if computed != entry.crc32 {
            return Err(Error::ChunkCrc {
                index,
                stored: entry.crc32,
                computed,
            });
        }
        self.info.codec.decompress(frame, entry.raw_len)
    }
}

/// Serialize one metadata stream section value ordering helper: text values
/// verbatim, integer-like kinds through the delta/zigzag/varint pipeline.
pub fn serialize_meta_stream(kind: ValueKind, values: &[MetaValue], out: &mut Writer) {
    out.varint(values.len() as u64);
    match kind {
        ValueKind::Text => {
            for v in values {
                match v {
                    MetaValue::Text(bytes) => out.blob(bytes),
                    MetaValue::Int(_) => unreachable!("text stream holds text values"),
                }
            }
        }
        _ => {
            let ints: Vec<i64> = values
                .iter()
                .map(|v| match v {
                    MetaValue::Int(i) => *i,
                    MetaValue::Text(_) => unreachable!("int stream holds int values"),
                })
                .collect();
            out.blob(&crate::codec::encode_stream(&ints));
        }
    }
}

/// Inverse of [`serialize_meta_stream`].
pub fn parse_meta_stream(kind: ValueKind, r: &mut Reader) -> Result<Vec<MetaValue>> {
    let count = r.usize()?;
    match kind {
        ValueKind::Text => {
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                values.push(MetaValue::Text(r.blob()?));
            }
            Ok(values)
        }
        _ => {
            let bytes = r.blob()?;
            let ints = crate::codec::decode_stream(&bytes, count)
                .map_err(|e| Error::corrupt(format!("metadata stream: {e}")))?;
            Ok(ints.into_iter().map(MetaValue::Int).collect())
        }
    }
}
