//! End-to-end orchestration: chunking, worker scheduling, stage sequencing,
//! archive assembly, verification and benchmarking.
//!
//! Concurrency contract: chunk workers each own their unit end to end; inside
//! a unit, batch workers build local trees that a single merger folds into
//! the unit tree on arrival. Archive bytes are independent of both thread
//! counts because every serialized ordering is canonical (lid order, group
//! order, canonical tree traversals).

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Mutex;
use std::time::{Duration, Instant};

pub use crate::archive::Mode;
use crate::archive::{Archive, ArchiveWriter, FinalCodec};
use crate::error::{Error, Result};
use crate::patterns::{MetaValue, PatternSet};
use crate::preprocess::{preprocess_line, split_lines};
use crate::residual::{global_sort, ResidualEntry, ResidualStreams};
use crate::struct_tree::{Group, StructTree};
use crate::var_subtree::{analyze_group, GroupEncoding};
use crate::wire::Writer;

/// Compression settings; `Default` matches the CLI defaults.
#[derive(Debug, Clone)]
pub struct CompressConfig {
    pub mode: Mode,
    pub chunk_lines: usize,
    /// Universal occurrence threshold for filtering and pruning.
    pub tau: u64,
    /// Endpoint residual threshold; defaults to `tau`.
    pub tau_endpoint: Option<u64>,
    pub worker_threads: usize,
    pub inner_threads: usize,
    /// Bypass stage 2 entirely: every variable flows to residual handling.
    pub ablation_s1_s3: bool,
    pub codec: FinalCodec,
    pub patterns: PatternSet,
    /// Compressed frames spill to a temporary file past this many bytes.
    pub spool_limit: usize,
}

impl Default for CompressConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Chunked,
            chunk_lines: 100_000,
            tau: 2,
            tau_endpoint: None,
            worker_threads: 4,
            inner_threads: 1,
            ablation_s1_s3: false,
            codec: FinalCodec::Xz,
            patterns: PatternSet::default_set(),
            spool_limit: 256 << 20,
        }
    }
}

impl CompressConfig {
    pub fn tau_endpoint(&self) -> u64 {
        self.tau_endpoint.unwrap_or(self.tau)
    }
}

/// Approximate per-stage wall shares (busy time divided by the worker count,
/// so the stage sum never exceeds the wall clock).
#[derive(Debug, Clone, Copy, Default)]
pub struct StageSeconds {
    pub structural: f64,
    pub variable: f64,
    pub residual: f64,
    pub final_codec: f64,
}

#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub original_bytes: u64,
    pub compressed_bytes: u64,
    pub wall_seconds: f64,
    pub lines: u64,
    pub chunks: u64,
    pub stages: StageSeconds,
}

impl RunMetrics {
    /// Compression ratio: original size over compressed size.
    pub fn cr(&self) -> f64 {
        self.original_bytes as f64 / self.compressed_bytes.max(1) as f64
    }

    /// Compression speed in MB (1e6 bytes) of input per second, end to end.
    pub fn cs_mbps(&self) -> f64 {
        self.original_bytes as f64 / 1e6 / self.wall_seconds.max(1e-9)
    }

    pub fn kv_lines(&self) -> String {
        format!(
            "original_bytes={}\ncompressed_bytes={}\nlines={}\nchunks={}\nwall_seconds={:.6}\n\
             cr={:.4}\ncs_mbps={:.4}\nstage_structural_s={:.6}\nstage_variable_s={:.6}\n\
             stage_residual_s={:.6}\nstage_final_codec_s={:.6}\n",
            self.original_bytes,
            self.compressed_bytes,
            self.lines,
            self.chunks,
            self.wall_seconds,
            self.cr(),
            self.cs_mbps(),
            self.stages.structural,
            self.stages.variable,
            self.stages.residual,
            self.stages.final_codec,
        )
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct UnitTimings {
    pub structural: Duration,
    pub variable: Duration,
    pub residual: Duration,
}

/// The fully analyzed in-memory model of one compression unit (a chunk in
/// chunked mode, the whole input in single mode).
pub struct UnitModel {
    pub tree: StructTree,
    pub groups: Vec<Group>,
    pub encodings: Vec<GroupEncoding>,
    /// Universal pathID per line, in lid order.
    pub main: Vec<u64>,
    pub structural_count: u64,
    /// First universal endpoint ID of each group.
    pub endpoint_bases: Vec<u64>,
    pub residuals: ResidualStreams,
    /// Extracted metadata values per pattern, in lid order.
    pub meta: Vec<Vec<MetaValue>>,
    /// Per-line gap shape overrides, in lid order.
    pub delims: Vec<Option<Vec<u64>>>,
    pub line_count: u64,
    pub last_terminated: bool,
    pub timings: UnitTimings,
}

struct BatchOut {
    index: usize,
    tree: StructTree,
    meta: Vec<Vec<MetaValue>>,
    delims: Vec<Option<Vec<u64>>>,
}

fn preprocess_batch(
    index: usize,
    base_lid: u64,
    lines: &[Vec<u8>],
    patterns: &PatternSet,
) -> BatchOut {
    let mut tree = StructTree::new();
    let mut meta: Vec<Vec<MetaValue>> = vec![Vec::new(); patterns.len()];
    let mut delims = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let pre = preprocess_line(line, patterns);
        for (idx, value) in pre.meta {
            meta[idx as usize].push(value);
        }
        delims.push(pre.gaps);
        tree.insert_line(base_lid + i as u64, &pre.tokens, pre.vars);
    }
    BatchOut {
        index,
        tree,
        meta,
        delims,
    }
}

/// Run stages 1-3 over one unit's lines.
pub fn build_unit_model(
    lines: &[Vec<u8>],
    last_terminated: bool,
    cfg: &CompressConfig,
    inner_threads: usize,
) -> Result<UnitModel> {
    let t0 = Instant::now();
    let nbatches = inner_threads.clamp(1, lines.len().max(1));
    let batch_size = lines.len().div_ceil(nbatches);
    let mut tree = StructTree::new();
    let mut meta: Vec<Vec<MetaValue>> = vec![Vec::new(); cfg.patterns.len()];
    let mut delims: Vec<Option<Vec<u64>>> = Vec::with_capacity(lines.len());

    if nbatches <= 1 {
        let out = preprocess_batch(0, 0, lines, &cfg.patterns);
        tree = out.tree;
        meta = out.meta;
        delims = out.delims;
    } else {
        // Independent batch workers; the current thread is the single
        // merger, integrating local trees as they arrive.
        let (tx, rx) = mpsc::channel::<BatchOut>();
        let mut slots: Vec<Option<BatchOut>> = Vec::new();
        slots.resize_with(nbatches, || None);
        std::thread::scope(|scope| {
            for (index, batch) in lines.chunks(batch_size).enumerate() {
                let tx = tx.clone();
                let patterns = &cfg.patterns;
                let base_lid = (index * batch_size) as u64;
                scope.spawn(move || {
                    let _ = tx.send(preprocess_batch(index, base_lid, batch, patterns));
                });
            }
            drop(tx);
            while let Ok(mut out) = rx.recv() {
                tree.merge(std::mem::take(&mut out.tree));
                let index = out.index;
                slots[index] = Some(out);
            }
        });
        // Metadata and delimiter buffers concatenate in batch order so the
        // streams stay in lid order regardless of arrival order.
        for slot in slots {
            let out = slot.ok_or_else(|| Error::Internal("missing batch output".into()))?;
            for (idx, mut values) in out.meta.into_iter().enumerate() {
                meta[idx].append(&mut values);
            }
            delims.extend(out.delims);
        }
    }

    tree.merge_isomorphic()?;
    let groups = tree.assign_path_ids();
    let structural = t0.elapsed();

    let t1 = Instant::now();
    let encodings: Vec<GroupEncoding> = if cfg.ablation_s1_s3 {
        groups
            .iter()
            .map(|g| analyze_group(&g.lines, 0, cfg.tau, cfg.tau, cfg.tau_endpoint()))
            .collect()
    } else if inner_threads > 1 && groups.len() > 1 {
        let slots: Mutex<Vec<Option<GroupEncoding>>> = {
            let mut v = Vec::new();
            v.resize_with(groups.len(), || None);
            Mutex::new(v)
        };
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..inner_threads.min(groups.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= groups.len() {
                        break;
                    }
                    let g = &groups[i];
                    let enc =
                        analyze_group(&g.lines, g.arity, cfg.tau, cfg.tau, cfg.tau_endpoint());
                    slots.lock().expect("poisoned")[i] = Some(enc);
                });
            }
        });
        slots
            .into_inner()
            .expect("poisoned")
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Internal("missing group encoding".into()))?
    } else {
        groups
            .iter()
            .map(|g| analyze_group(&g.lines, g.arity, cfg.tau, cfg.tau, cfg.tau_endpoint()))
            .collect()
    };

    // Contiguous per-group endpoint ID blocks, allocated in group order.
    let structural_count = groups.len() as u64;
    let mut endpoint_bases = Vec::with_capacity(groups.len());
    let mut next_endpoint = structural_count;
    for enc in &encodings {
        endpoint_bases.push(next_endpoint);
        next_endpoint += enc.endpoint_count;
    }

    let mut main = vec![u64::MAX; lines.len()];
    for (g, enc) in groups.iter().zip(&encodings) {
        for ((lid, _), code) in g.lines.iter().zip(&enc.line_codes) {
            let id = match code.endpoint {
                Some((rel, _)) => endpoint_bases[g.path_id as usize] + rel,
                None => g.path_id,
            };
            main[*lid as usize] = id;
        }
    }
    debug_assert!(main.iter().all(|&id| id != u64::MAX));
    let variable = t1.elapsed();

    let t2 = Instant::now();
    let mut entries: Vec<ResidualEntry> = Vec::new();
    for (g, enc) in groups.iter().zip(&encodings) {
        for ((lid, vars), code) in g.lines.iter().zip(&enc.line_codes) {
            let covered = code.endpoint.map_or(0, |(_, depth)| depth);
            for p in GroupEncoding::residual_positions(&enc.order, covered, g.arity) {
                entries.push(ResidualEntry {
                    lid: *lid,
                    position: p,
                    value: &vars[p],
                });
            }
        }
    }
    global_sort(&mut entries);
    let mut residuals = ResidualStreams::default();
    for e in &entries {
        residuals.push(e.value);
    }
    let residual = t2.elapsed();

    Ok(UnitModel {
        tree,
        groups,
        encodings,
        main,
        structural_count,
        endpoint_bases,
        residuals,
        meta,
        delims,
        line_count: lines.len() as u64,
        last_terminated,
        timings: UnitTimings {
            structural,
            variable,
            residual,
        },
    })
}

/// Serialize a unit model into the chunk payload byte form: seven
/// length-prefixed sections (lines, skeleton, groups, residuals, main
/// stream, metadata streams, delimiter stream).
pub fn serialize_unit(model: &UnitModel, cfg: &CompressConfig) -> Vec<u8> {
    let mut payload = Writer::new();

    let mut sec = Writer::new();
    sec.varint(model.line_count);
    sec.byte(u8::from(model.last_terminated));
    payload.blob(&sec.into_bytes());

    let mut sec = Writer::new();
    model.tree.serialize_skeleton(&mut sec);
    payload.blob(&sec.into_bytes());

    let mut sec = Writer::new();
    if cfg.ablation_s1_s3 {
        sec.byte(0);
    } else {
        sec.byte(1);
        for enc in &model.encodings {
            crate::var_subtree::serialize_group(enc, &mut sec);
        }
    }
    payload.blob(&sec.into_bytes());

    let mut sec = Writer::new();
    model.residuals.serialize(&mut sec);
    payload.blob(&sec.into_bytes());

    let mut sec = Writer::new();
    for &id in &model.main {
        sec.varint(id);
    }
    payload.blob(&sec.into_bytes());

    let mut sec = Writer::new();
    for (idx, values) in model.meta.iter().enumerate() {
        let kind = cfg.patterns.patterns()[idx].kind;
        crate::archive::serialize_meta_stream(kind, values, &mut sec);
    }
    payload.blob(&sec.into_bytes());

    let mut sec = Writer::new();
    for gaps in &model.delims {
        match gaps {
            None => sec.varint(0),
            Some(g) => {
                sec.varint(1);
                for &w in g {
                    sec.varint(w);
                }
            }
        }
    }
    payload.blob(&sec.into_bytes());

    payload.into_bytes()
}

/// Compress one unit's lines into a final-codec frame.
/// Returns (frame, raw payload length, timings, codec seconds).
pub fn compress_unit(
    lines: &[Vec<u8>],
    last_terminated: bool,
    cfg: &CompressConfig,
    inner_threads: usize,
) -> Result<(Vec<u8>, u64, UnitTimings, f64)> {
    let model = build_unit_model(lines, last_terminated, cfg, inner_threads)?;
    let payload = serialize_unit(&model, cfg);
    let t = Instant::now();
    let frame = cfg.codec.compress(&payload)?;
    Ok((
        frame,
        payload.len() as u64,
        model.timings,
        t.elapsed().as_secs_f64(),
    ))
}

/// Compression input source. Standard input is only valid in single mode.
#[derive(Debug, Clone)]
pub enum Input {
    Path(PathBuf),
    Stdin,
}

impl Input {
    fn read_all(&self) -> Result<Vec<u8>> {
        match self {
            Input::Path(p) => std::fs::read(p).map_err(|source| Error::IoPath {
                path: p.clone(),
                source,
            }),
            Input::Stdin => {
                let mut buf = Vec::new();
                std::io::stdin().lock().read_to_end(&mut buf)?;
                Ok(buf)
            }
        }
    }
}

/// Refuse to clobber existing files unless forced.
fn create_output(path: &Path, force: bool) -> Result<std::fs::File> {
    if !force && path.exists() {
        return Err(Error::Config(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        )));
    }
    std::fs::File::create(path).map_err(|source| Error::IoPath {
        path: path.to_path_buf(),
        source,
    })
}

struct FrameOut {
    index: usize,
    frame: Vec<u8>,
    raw_len: u64,
    line_count: u64,
    timings: UnitTimings,
    codec_seconds: f64,
}

/// Compress `input` into an archive at `output`.
pub fn compress_file(
    input: &Input,
    output: &Path,
    cfg: &CompressConfig,
    force: bool,
) -> Result<RunMetrics> {
    if matches!(input, Input::Stdin) && cfg.mode == Mode::Chunked {
        return Err(Error::Config(
            "standard input requires --mode single".into(),
        ));
    }
    if cfg.chunk_lines == 0 && cfg.mode == Mode::Chunked {
        return Err(Error::Config("--chunk-lines must be at least 1".into()));
    }
    if cfg.worker_threads == 0 || cfg.inner_threads == 0 {
        return Err(Error::Config("thread counts must be at least 1".into()));
    }
    if !force && output.exists() {
        return Err(Error::Config(format!(
            "{} exists; pass --force to overwrite",
            output.display()
        )));
    }
    let started = Instant::now();
    let chunk_lines_field = match cfg.mode {
        Mode::Chunked => cfg.chunk_lines as u64,
        Mode::Single => 0,
    };
    let mut writer = ArchiveWriter::new(
        cfg.mode,
        chunk_lines_field,
        cfg.codec,
        cfg.tau,
        cfg.tau_endpoint(),
        cfg.ablation_s1_s3,
        &cfg.patterns,
        cfg.spool_limit,
    );
    let original_bytes;
    let mut busy = UnitTimings::default();
    let mut codec_busy = 0f64;
    let mut chunks = 0u64;

    match cfg.mode {
        Mode::Single => {
            let data = input.read_all()?;
            original_bytes = data.len() as u64;
            let (lines, terminated) = split_lines(&data);
            if !lines.is_empty() {
                let owned: Vec<Vec<u8>> = lines.iter().map(|l| l.to_vec()).collect();
                drop(data);
                // Single mode keeps fine-grained concurrency: the whole
                // worker budget drives the one unit's internal pool.
                let inner = cfg.inner_threads.max(cfg.worker_threads);
                let (frame, raw_len, timings, codec_s) =
                    compress_unit(&owned, terminated, cfg, inner)?;
                writer.add_frame(&frame, raw_len, owned.len() as u64)?;
                busy = timings;
                codec_busy = codec_s;
                chunks = 1;
            }
        }
        Mode::Chunked => {
            let Input::Path(path) = input else {
                unreachable!("checked above")
            };
            let file = std::fs::File::open(path).map_err(|source| Error::IoPath {
                path: path.clone(),
                source,
            })?;
            let mut reader = std::io::BufReader::new(file);
            // Rendezvous handoff: the reader holds at most one finished
            // chunk, so worker_threads + 1 chunks are resident at once.
            let (job_tx, job_rx) = mpsc::sync_channel::<(usize, Vec<Vec<u8>>, bool)>(0);
            let (res_tx, res_rx) = mpsc::channel::<Result<FrameOut>>();
            let job_rx = Mutex::new(job_rx);
            let result: Result<(u64, u64)> = std::thread::scope(|scope| {
                for _ in 0..cfg.worker_threads {
                    let res_tx = res_tx.clone();
                    let job_rx = &job_rx;
                    scope.spawn(move || loop {
                        let job = { job_rx.lock().expect("poisoned").recv() };
                        let Ok((index, lines, terminated)) = job else {
                            break;
                        };
                        let line_count = lines.len() as u64;
                        let out = compress_unit(&lines, terminated, cfg, cfg.inner_threads).map(
                            |(frame, raw_len, timings, codec_seconds)| FrameOut {
                                index,
                                frame,
                                raw_len,
                                line_count,
                                timings,
                                codec_seconds,
                            },
                        );
                        if res_tx.send(out).is_err() {
                            break;
                        }
                    });
                }
                drop(res_tx);

                // Reader loop on this thread: at most worker_threads + 1
                // chunks are in flight at once.
                let mut read_bytes = 0u64;
                let mut index = 0usize;
                let mut current: Vec<Vec<u8>> = Vec::with_capacity(cfg.chunk_lines);
                let mut pending_unterminated = false;
                let mut read_err: Option<Error> = None;
                loop {
                    let mut line = Vec::new();
                    let n = match reader.read_until(b'\n', &mut line) {
                        Ok(n) => n,
                        Err(e) => {
                            read_err = Some(e.into());
                            break;
                        }
                    };
                    if n == 0 {
                        break;
                    }
                    read_bytes += n as u64;
                    let terminated = line.last() == Some(&b'\n');
                    if terminated {
                        line.pop();
                    } else {
                        pending_unterminated = true;
                    }
                    current.push(line);
                    if current.len() == cfg.chunk_lines {
                        let batch =
                            std::mem::replace(&mut current, Vec::with_capacity(cfg.chunk_lines));
                        // `pending_unterminated` can only be set on the very
                        // last line of the file, read just above.
                        if job_tx.send((index, batch, !pending_unterminated)).is_err() {
                            break;
                        }
                        index += 1;
                    }
                }
                if !current.is_empty() && read_err.is_none() {
                    let _ = job_tx.send((index, current, !pending_unterminated));
                    index += 1;
                }
                drop(job_tx);

                // Collect frames, reordering by chunk index.
                let mut reorder: BTreeMap<usize, FrameOut> = BTreeMap::new();
                let mut next = 0usize;
                let mut first_err: Option<Error> = read_err;
                for out in res_rx.iter() {
                    match out {
                        Ok(frame_out) => {
                            reorder.insert(frame_out.index, frame_out);
                            while let Some(frame_out) = reorder.remove(&next) {
                                if first_err.is_none() {
                                    if let Err(e) = writer.add_frame(
                                        &frame_out.frame,
                                        frame_out.raw_len,
                                        frame_out.line_count,
                                    ) {
                                        first_err = Some(e);
                                    }
                                    busy.structural += frame_out.timings.structural;
                                    busy.variable += frame_out.timings.variable;
                                    busy.residual += frame_out.timings.residual;
                                    codec_busy += frame_out.codec_seconds;
                                }
                                next += 1;
                            }
                        }
                        Err(e) => {
                            if first_err.is_none() {
                                first_err = Some(e);
                            }
                        }
                    }
                }
                match first_err {
                    Some(e) => Err(e),
                    None => {
                        if next != index {
                            return Err(Error::Internal(format!(
                                "collected {next} of {index} chunk frames"
                            )));
                        }
                        Ok((read_bytes, index as u64))
                    }
                }
            });
            let (read_bytes, chunk_count) = result?;
            original_bytes = read_bytes;
            chunks = chunk_count;
        }
    }

    let total_lines = writer.total_lines();

    // Write the archive atomically: temp file in the target directory, then
    // rename over the final name.
    let tmp_path = output.with_extension("urttmp");
    let compressed_bytes = {
        let mut tmp = std::fs::File::create(&tmp_path).map_err(|source| Error::IoPath {
            path: tmp_path.clone(),
            source,
        })?;
        match writer.finish(&mut tmp) {
            Ok(n) => {
                drop(tmp);
                if let Err(source) = std::fs::rename(&tmp_path, output) {
                    let _ = std::fs::remove_file(&tmp_path);
                    return Err(Error::IoPath {
                        path: output.to_path_buf(),
                        source,
                    });
                }
                n
            }
            Err(e) => {
                drop(tmp);
                let _ = std::fs::remove_file(&tmp_path);
                return Err(e);
            }
        }
    };

    let wall_seconds = started.elapsed().as_secs_f64();
    let threads = cfg.worker_threads.max(1) as f64;
    Ok(RunMetrics {
        original_bytes,
        compressed_bytes,
        wall_seconds,
        lines: total_lines,
        chunks,
        stages: StageSeconds {
            structural: busy.structural.as_secs_f64() / threads,
            variable: busy.variable.as_secs_f64() / threads,
            residual: busy.residual.as_secs_f64() / threads,
            final_codec: codec_busy / threads,
        },
    })
}

/// Decompression output sink.
#[derive(Debug, Clone)]
pub enum Output {
    Path(PathBuf),
    Stdout,
}

/// Decompress an archive, returning the number of bytes written.
pub fn decompress_file(
    archive_path: &Path,
    output: &Output,
    threads: usize,
    force: bool,
) -> Result<u64> {
    let archive = Archive::open(archive_path)?;
    match output {
        Output::Stdout => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            decompress_to(&archive, &mut lock, threads)
        }
        Output::Path(path) => {
            let mut file = create_output(path, force)?;
            match decompress_to(&archive, &mut file, threads) {
                Ok(n) => Ok(n),
                Err(e) => {
                    drop(file);
                    let _ = std::fs::remove_file(path);
                    Err(e)
                }
            }
        }
    }
}

/// Decode all chunks (in parallel waves) and write them in order.
pub fn decompress_to(archive: &Archive, out: &mut impl Write, threads: usize) -> Result<u64> {
    let threads = threads.max(1);
    let kinds = archive.info.meta_kinds();
    let mut written = 0u64;
    let nchunks = archive.chunk_count();
    let mut wave_start = 0usize;
    while wave_start < nchunks {
        let wave_end = (wave_start + threads).min(nchunks);
        let mut decoded: Vec<Result<Vec<u8>>> = Vec::new();
        if wave_end - wave_start == 1 {
            decoded.push(decode_one(archive, wave_start, &kinds));
        } else {
            decoded.resize_with(wave_end - wave_start, || {
                Err(Error::Internal("pending".into()))
            });
            let slots = Mutex::new(&mut decoded);
            std::thread::scope(|scope| {
                for (i, chunk_index) in (wave_start..wave_end).enumerate() {
                    let slots = &slots;
                    let kinds = &kinds;
                    scope.spawn(move || {
                        let r = decode_one(archive, chunk_index, kinds);
                        slots.lock().expect("poisoned")[i] = r;
                    });
                }
            });
        }
        for r in decoded {
            let bytes = r?;
            out.write_all(&bytes)?;
            written += bytes.len() as u64;
        }
        wave_start = wave_end;
    }
    out.flush()?;
    Ok(written)
}

fn decode_one(
    archive: &Archive,
    index: usize,
    kinds: &[crate::patterns::ValueKind],
) -> Result<Vec<u8>> {
    let payload = archive.chunk_payload(index)?;
    crate::decompress::decode_chunk(&payload, kinds)
        .map_err(|e| Error::corrupt(format!("chunk {index}: {e}")))
}

/// Outcome of verifying an archive against its original input.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub matches: bool,
    /// Byte offset of the first divergence, when any.
    pub first_divergence: Option<u64>,
    pub original_len: u64,
    pub decoded_len: u64,
}

/// Decompress `archive_path` and byte-compare against `input_path`.
pub fn verify(input_path: &Path, archive_path: &Path) -> Result<VerifyReport> {
    let original = std::fs::read(input_path).map_err(|source| Error::IoPath {
        path: input_path.to_path_buf(),
        source,
    })?;
    let archive = Archive::open(archive_path)?;
    let kinds = archive.info.meta_kinds();
    let mut offset = 0u64;
    let mut divergence: Option<u64> = None;
    for index in 0..archive.chunk_count() {
        let bytes = decode_one(&archive, index, &kinds)?;
        if divergence.is_none() {
            let start = offset as usize;
            for (i, &b) in bytes.iter().enumerate() {
                match original.get(start + i) {
                    Some(&ob) if ob == b => {}
                    _ => {
                        divergence = Some((start + i) as u64);
                        break;
                    }
                }
            }
        }
        offset += bytes.len() as u64;
    }
    if divergence.is_none() && offset != original.len() as u64 {
        divergence = Some(offset.min(original.len() as u64));
    }
    Ok(VerifyReport {
        matches: divergence.is_none(),
        first_divergence: divergence,
        original_len: original.len() as u64,
        decoded_len: offset,
    })
}

/// One row of benchmark output.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub file: String,
    pub config: String,
    pub original_bytes: u64,
    pub compressed_bytes: u64,
    pub cr: f64,
    pub cs_mbps: f64,
    pub baseline_cr: Option<f64>,
    pub error: Option<String>,
}

/// Compress every regular file in `dir` under each named configuration.
/// Per-file failures are recorded and the run continues. The baseline is a
/// DEFLATE pass over the raw file, or an external command reading stdin and
/// writing compressed bytes to stdout.
pub fn bench_corpus(
    dir: &Path,
    configs: &[(String, CompressConfig)],
    baseline_cmd: Option<&str>,
) -> Result<Vec<BenchRow>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|source| Error::IoPath {
            path: dir.to_path_buf(),
            source,
        })?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let tmp = tempfile::tempdir()?;
    let mut rows = Vec::new();
    for file in &files {
        let name = file
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let baseline_cr = baseline_ratio(file, baseline_cmd);
        for (config_name, cfg) in configs {
            let out = tmp.path().join(format!("{name}.{config_name}.urt"));
            let row = match compress_file(&Input::Path(file.clone()), &out, cfg, true) {
                Ok(m) => BenchRow {
                    file: name.clone(),
                    config: config_name.clone(),
                    original_bytes: m.original_bytes,
                    compressed_bytes: m.compressed_bytes,
                    cr: m.cr(),
                    cs_mbps: m.cs_mbps(),
                    baseline_cr,
                    error: None,
                },
                Err(e) => BenchRow {
                    file: name.clone(),
                    config: config_name.clone(),
                    original_bytes: 0,
                    compressed_bytes: 0,
                    cr: 0.0,
                    cs_mbps: 0.0,
                    baseline_cr,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

fn baseline_ratio(file: &Path, baseline_cmd: Option<&str>) -> Option<f64> {
    let data = std::fs::read(file).ok()?;
    if data.is_empty() {
        return None;
    }
    let compressed_len = match baseline_cmd {
        None => FinalCodec::Deflate.compress(&data).ok()?.len() as u64,
        Some(cmd) => {
            use std::process::{Command, Stdio};
            let mut child = Command::new("sh")
                .arg("-c")
                .arg(cmd)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::null())
                .spawn()
                .ok()?;
            let mut stdin = child.stdin.take()?;
            let writer = std::thread::spawn(move || {
                let _ = stdin.write_all(&data);
            });
            let out = child.wait_with_output().ok()?;
            let _ = writer.join();
            if !out.status.success() {
                return None;
            }
            out.stdout.len() as u64
        }
    };
    let original = std::fs::metadata(file).ok()?.len();
    Some(original as f64 / compressed_len.max(1) as f64)
}

/// Render benchmark rows as a tab-separated table.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let mut out =
        String::from("file\tconfig\toriginal\tcompressed\tcr\tcs_mbps\tbaseline_cr\tstatus\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{}\t{}\n",
            r.file,
            r.config,
            r.original_bytes,
            r.compressed_bytes,
            r.cr,
            r.cs_mbps,
            r.baseline_cr
                .map(|c| format!("{c:.4}"))
                .unwrap_or_else(|| "-".into()),
            r.error.as_deref().unwrap_or("ok"),
        ));
    }
    out
}
