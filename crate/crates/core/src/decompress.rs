//! Chunk decoding: reverse pathID lookup, residual template resolution,
//! global placeholder substitution and byte-exact line reassembly.
//!
//! All streams are consumed in exactly the order they were written; after
//! the last line of a chunk every cursor must sit at its stream's end, and
//! any mismatch aborts with a diagnostic rather than emitting wrong bytes.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::patterns::{MetaValue, ValueKind};
use crate::preprocess::render_line;
use crate::residual::{DecodedResiduals, NumericClass};
use crate::struct_tree::DecodedSkeleton;
use crate::token::Token;
use crate::var_subtree::{DecodedGroup, GroupEncoding};
use crate::wire::Reader;

pub const SECTION_COUNT: usize = 7;

/// Split a chunk payload into its seven length-prefixed sections:
/// lines, skeleton, groups, residuals, main, metadata, delimiters.
pub fn split_sections(payload: &[u8]) -> Result<[&[u8]; SECTION_COUNT]> {
    let mut r = Reader::new(payload, "chunk payload");
    let mut sections = [payload; SECTION_COUNT];
    for section in sections.iter_mut() {
        let len = r.usize()?;
        *section = r.raw(len)?;
    }
    r.finish()?;
    Ok(sections)
}

/// Everything a structural pathID resolves to.
struct GroupView {
    skeleton: Vec<Token>,
    arity: usize,
    decoded: Option<DecodedGroup>,
}

/// A universal pathID above the structural range: (group, endpoint).
struct EndpointRef {
    group: usize,
    rel: usize,
}

/// The decoded model of one chunk, with cursors for line-by-line replay.
pub struct ChunkModel {
    pub line_count: u64,
    pub last_terminated: bool,
    groups: Vec<GroupView>,
    endpoint_refs: Vec<EndpointRef>,
    residuals: DecodedResiduals,
    meta_values: Vec<Vec<MetaValue>>,
    meta_kinds: Vec<ValueKind>,
}

impl ChunkModel {
    pub fn parse<'a>(payload: &'a [u8], meta_kinds: &[ValueKind]) -> Result<(Self, Cursors<'a>)> {
        let [lines_sec, skeleton_sec, groups_sec, residuals_sec, main_sec, meta_sec, delim_sec] =
            split_sections(payload)?;

        let mut r = Reader::new(lines_sec, "lines section");
        let line_count = r.varint()?;
        let last_terminated = match r.byte()? {
            0 => false,
            1 => true,
            b => return Err(Error::corrupt(format!("bad terminator flag {b}"))),
        };
        r.finish()?;

        let mut r = Reader::new(skeleton_sec, "skeleton section");
        let skeleton = DecodedSkeleton::parse(&mut r)?;
        r.finish()?;

        let mut groups = Vec::with_capacity(skeleton.terminals.len());
        for path_id in 0..skeleton.terminals.len() as u64 {
            let tokens = skeleton.skeleton_of(path_id)?;
            let arity = tokens.iter().filter(|t| t.is_wildcard()).count();
            groups.push(GroupView {
                skeleton: tokens,
                arity,
                decoded: None,
            });
        }

        let mut r = Reader::new(groups_sec, "groups section");
        let mut endpoint_refs = Vec::new();
        match r.byte()? {
            0 => {} // stage 2 bypassed for this chunk
            1 => {
                for (gi, view) in groups.iter_mut().enumerate() {
                    let decoded = DecodedGroup::parse(&mut r, view.arity)?;
                    if let Some(decoded) = &decoded {
                        for rel in 0..decoded.endpoints.len() {
                            endpoint_refs.push(EndpointRef { group: gi, rel });
                        }
                    }
                    view.decoded = decoded;
                }
            }
            b => return Err(Error::corrupt(format!("bad stage-2 marker {b}"))),
        }
        r.finish()?;

        let mut r = Reader::new(residuals_sec, "residuals section");
        let residuals = DecodedResiduals::parse(&mut r)?;
        r.finish()?;

        let mut meta_values = Vec::with_capacity(meta_kinds.len());
        let mut r = Reader::new(meta_sec, "metadata section");
        for kind in meta_kinds {
            meta_values.push(crate::archive::parse_meta_stream(*kind, &mut r)?);
        }
        r.finish()?;

        let model = ChunkModel {
            line_count,
            last_terminated,
            groups,
            endpoint_refs,
            residuals,
            meta_values,
            meta_kinds: meta_kinds.to_vec(),
        };
        let cursors = Cursors {
            main: Reader::new(main_sec, "main stream"),
            delims: Reader::new(delim_sec, "delimiter stream"),
            template_cursor: 0,
            numeric_cursors: HashMap::new(),
            meta_cursors: vec![0; model.meta_kinds.len()],
        };
        Ok((model, cursors))
    }

    pub fn structural_count(&self) -> u64 {
        self.groups.len() as u64
    }

    pub fn endpoint_count(&self) -> u64 {
        self.endpoint_refs.len() as u64
    }

    /// Reverse lookup: resolve a universal pathID to its skeleton, the
    /// endpoint-covered values by original position, and the positions that
    /// still need residual resolution.
    fn reverse_lookup(&self, path_id: u64) -> Result<LineShape<'_>> {
        let structural = self.groups.len() as u64;
        let (group_idx, covered_values) = if path_id < structural {
            (path_id as usize, None)
        } else {
            let idx = (path_id - structural) as usize;
            let eref = self
                .endpoint_refs
                .get(idx)
                .ok_or_else(|| Error::corrupt(format!("unknown pathID {path_id}")))?;
            (eref.group, Some(eref.rel))
        };
        let view = &self.groups[group_idx];
        let mut values: Vec<Option<&[u8]>> = vec![None; view.arity];
        let covered = match covered_values {
            None => 0,
            Some(rel) => {
                let decoded = view.decoded.as_ref().ok_or_else(|| {
                    Error::corrupt("endpoint pathID for a group without a subtree")
                })?;
                let ep = &decoded.endpoints[rel];
                for (d, value) in ep.values.iter().enumerate() {
                    values[decoded.order[d]] = Some(value);
                }
                ep.values.len()
            }
        };
        let order: &[usize] = view
            .decoded
            .as_ref()
            .map(|d| d.order.as_slice())
            .unwrap_or(&[]);
        let residual_positions = GroupEncoding::residual_positions(order, covered, view.arity);
        Ok(LineShape {
            tokens: &view.skeleton,
            values,
            residual_positions,
        })
    }
}

struct LineShape<'a> {
    tokens: &'a [Token],
    /// Per original position: endpoint-covered value, if any.
    values: Vec<Option<&'a [u8]>>,
    residual_positions: Vec<usize>,
}

/// Mutable decode state: one cursor per stream.
pub struct Cursors<'a> {
    main: Reader<'a>,
    delims: Reader<'a>,
    template_cursor: usize,
    numeric_cursors: HashMap<NumericClass, usize>,
    meta_cursors: Vec<usize>,
}

/// Decode one whole chunk payload to its original bytes.
pub fn decode_chunk(payload: &[u8], meta_kinds: &[ValueKind]) -> Result<Vec<u8>> {
    let (model, mut cursors) = ChunkModel::parse(payload, meta_kinds)?;
    let mut out = Vec::with_capacity(payload.len());
    for lid in 0..model.line_count {
        decode_line(&model, &mut cursors, lid, &mut out)
            .map_err(|e| Error::corrupt(format!("line {lid}: {e}")))?;
    }
    cursors.verify_exhausted(&model)?;
    Ok(out)
}

fn decode_line(
    model: &ChunkModel,
    cursors: &mut Cursors,
    lid: u64,
    out: &mut Vec<u8>,
) -> Result<()> {
    let path_id = cursors.main.varint()?;
    let shape = model.reverse_lookup(path_id)?;

    // Resolve residual values in ascending original-position order.
    let mut resolved: Vec<(usize, Vec<u8>)> = Vec::with_capacity(shape.residual_positions.len());
    for &pos in &shape.residual_positions {
        let template_id = *model
            .residuals
            .template_ids
            .get(cursors.template_cursor)
            .ok_or_else(|| Error::corrupt("template ID stream exhausted"))?;
        cursors.template_cursor += 1;
        let template = model
            .residuals
            .templates
            .get(template_id as usize)
            .ok_or_else(|| Error::corrupt(format!("unknown template {template_id}")))?;
        let mut value = Vec::new();
        template.render(
            |class| {
                let cursor = cursors.numeric_cursors.entry(class).or_insert(0);
                let stream = model.residuals.numeric.get(&class).ok_or_else(|| {
                    Error::corrupt(format!("missing numeric stream {}", class.stream_name()))
                })?;
                let v = *stream.get(*cursor).ok_or_else(|| {
                    Error::corrupt(format!("numeric stream {} exhausted", class.stream_name()))
                })?;
                *cursor += 1;
                Ok(v)
            },
            &mut value,
        )?;
        resolved.push((pos, value));
    }

    // Gap shape: 0 = default, 1 = explicit widths (token count + 1 of them).
    let gaps = match cursors.delims.varint()? {
        0 => None,
        1 => {
            let mut gaps = Vec::with_capacity(shape.tokens.len() + 1);
            for _ in 0..=shape.tokens.len() {
                gaps.push(cursors.delims.varint()?);
            }
            Some(gaps)
        }
        b => return Err(Error::corrupt(format!("bad gap shape code {b}"))),
    };

    let mut var_pos = 0usize;
    let mut resolved_iter = resolved.iter().peekable();
    let meta_values = &model.meta_values;
    let meta_cursors = &mut cursors.meta_cursors;
    render_line(
        shape.tokens,
        gaps.as_deref(),
        &model.meta_kinds,
        || {
            let pos = var_pos;
            var_pos += 1;
            if let Some(v) = shape.values.get(pos).copied().flatten() {
                return Ok(v.to_vec());
            }
            match resolved_iter.peek() {
                Some((p, _)) if *p == pos => {
                    let (_, v) = resolved_iter.next().expect("peeked");
                    Ok(v.clone())
                }
                _ => Err(Error::corrupt(format!(
                    "no value for variable position {pos}"
                ))),
            }
        },
        |idx| {
            let cursor = meta_cursors
                .get_mut(idx as usize)
                .ok_or_else(|| Error::corrupt(format!("unknown metadata stream {idx}")))?;
            let values = &meta_values[idx as usize];
            let v = values
                .get(*cursor)
                .cloned()
                .ok_or_else(|| Error::corrupt(format!("metadata stream {idx} exhausted")))?;
            *cursor += 1;
            Ok(v)
        },
        out,
    )?;
    if lid + 1 < model.line_count || model.last_terminated {
        out.push(b'\n');
    }
    Ok(())
}

impl Cursors<'_> {
    /// After the last line every stream must be fully consumed.
    fn verify_exhausted(mut self, model: &ChunkModel) -> Result<()> {
        if self.main.remaining() != 0 {
            return Err(Error::corrupt(format!(
                "main stream has {} unread byte(s)",
                self.main.remaining()
            )));
        }
        if self.delims.remaining() != 0 {
            return Err(Error::corrupt(format!(
                "delimiter stream has {} unread byte(s)",
                self.delims.remaining()
            )));
        }
        if self.template_cursor != model.residuals.template_ids.len() {
            return Err(Error::corrupt(format!(
                "{} residual template ID(s) left unconsumed",
                model.residuals.template_ids.len() - self.template_cursor
            )));
        }
        for (class, stream) in &model.residuals.numeric {
            let consumed = self.numeric_cursors.remove(class).unwrap_or(0);
            if consumed != stream.len() {
                return Err(Error::corrupt(format!(
                    "numeric stream {} has {} value(s) left",
                    class.stream_name(),
                    stream.len() - consumed
                )));
            }
        }
        for (idx, values) in model.meta_values.iter().enumerate() {
            if self.meta_cursors[idx] != values.len() {
                return Err(Error::corrupt(format!(
                    "metadata stream {idx} has {} value(s) left",
                    values.len() - self.meta_cursors[idx]
                )));
            }
        }
        Ok(())
    }
}

/// Per-chunk statistics reported by `inspect`.
#[derive(Debug, Clone)]
pub struct ChunkReport {
    pub lines: u64,
    pub structural_paths: u64,
    pub endpoint_paths: u64,
    pub templates: u64,
    pub numeric_streams: u64,
    pub raw_payload_bytes: u64,
    pub compressed_bytes: u64,
    /// Raw byte size of each payload section, in section order:
    /// lines, skeleton, groups, residuals, main, metadata, delimiters.
    pub section_bytes: [u64; SECTION_COUNT],
}

/// Decode only the structural metadata of every chunk.
pub fn inspect_archive(archive: &crate::archive::Archive) -> Result<Vec<ChunkReport>> {
    let kinds = archive.info.meta_kinds();
    let mut reports = Vec::with_capacity(archive.chunk_count());
    for index in 0..archive.chunk_count() {
        let payload = archive.chunk_payload(index)?;
        let sections = split_sections(&payload)?;
        let (model, _) = ChunkModel::parse(&payload, &kinds)?;
        reports.push(ChunkReport {
            lines: model.line_count,
            structural_paths: model.structural_count(),
            endpoint_paths: model.endpoint_count(),
            templates: model.residuals.templates.len() as u64,
            numeric_streams: model.residuals.numeric.len() as u64,
            raw_payload_bytes: payload.len() as u64,
            compressed_bytes: archive.info.chunks[index].compressed_len,
            section_bytes: {
                let mut sizes = [0u64; SECTION_COUNT];
                for (i, s) in sections.iter().enumerate() {
                    sizes[i] = s.len() as u64;
                }
                sizes
            },
        });
    }
    Ok(reports)
}
