//! Acceptance suite: ten criteria covering lossless roundtrips, ratio and
//! speed directions, encoder fidelity on the reference sample, codec
//! properties, the signature/isomorphism equivalence, and determinism.
//!
//! Each test prints one `criterion N: PASS` line (visible with
//! `--nocapture`); a failing assertion is the corresponding FAIL.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use urt_core::archive::FinalCodec;
use urt_core::codec;
use urt_core::pipeline::{
    build_unit_model, compress_file, decompress_file, verify, CompressConfig, Input, Mode, Output,
};
use urt_core::preprocess::split_lines;
use urt_core::struct_tree::{StructTree, ROOT};
use urt_core::synth;
use urt_core::token::Token;
use urt_core::var_subtree::{serialize_group, DecodedGroup, GroupEncoding};
use urt_core::wire::{Reader, Writer};

const SAMPLE_LINES: usize = 2000;
const SAMPLE_SEED: u64 = 20_240_601;

fn sample_dir() -> (tempfile::TempDir, Vec<(String, PathBuf)>) {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for style in synth::DATASET_STYLES {
        let path = dir.path().join(format!("{style}.log"));
        std::fs::write(
            &path,
            synth::dataset_sample(style, SAMPLE_LINES, SAMPLE_SEED),
        )
        .unwrap();
        files.push((style.to_string(), path));
    }
    (dir, files)
}

fn compress_to(
    input: &Path,
    out_dir: &Path,
    name: &str,
    cfg: &CompressConfig,
) -> urt_core::pipeline::RunMetrics {
    let out = out_dir.join(name);
    compress_file(&Input::Path(input.to_path_buf()), &out, cfg, true).unwrap()
}

fn roundtrip_exact(input: &Path, out_dir: &Path, name: &str, cfg: &CompressConfig) {
    let archive = out_dir.join(name);
    compress_file(&Input::Path(input.to_path_buf()), &archive, cfg, true).unwrap();
    let report = verify(input, &archive).unwrap();
    assert!(
        report.matches,
        "roundtrip mismatch for {name} at byte {:?}",
        report.first_divergence
    );
}

/// Criterion 1: byte-exact roundtrip on all sixteen sample files, in
/// chunked (1000-line chunks) and single modes, for tau in {1, 2, 5}.
#[test]
fn criterion_01_lossless_roundtrip_on_samples() {
    let started = Instant::now();
    let (dir, files) = sample_dir();
    for (style, path) in &files {
        for tau in [1u64, 2, 5] {
            for mode in [Mode::Chunked, Mode::Single] {
                let cfg = CompressConfig {
                    mode,
                    chunk_lines: 1000,
                    tau,
                    worker_threads: 2,
                    ..CompressConfig::default()
                };
                let tag = format!(
                    "{style}_tau{tau}_{}.urt",
                    if mode == Mode::Chunked {
                        "chunked"
                    } else {
                        "single"
                    }
                );
                roundtrip_exact(path, dir.path(), &tag, &cfg);
            }
        }
    }
    println!(
        "criterion 1 (lossless roundtrip, 16 samples x 2 modes x tau {{1,2,5}}): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 2: 1000 randomly generated files roundtrip byte-exactly.
#[test]
fn criterion_02_fuzz_roundtrip() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..1000u64 {
        let data = synth::fuzz_file(seed);
        let input = dir.path().join("fuzz.log");
        std::fs::write(&input, &data).unwrap();
        let cfg = CompressConfig {
            mode: if seed % 5 == 4 {
                Mode::Single
            } else {
                Mode::Chunked
            },
            chunk_lines: if seed % 2 == 0 { 100_000 } else { 777 },
            tau: [1, 2, 5][(seed % 3) as usize],
            worker_threads: 2,
            ..CompressConfig::default()
        };
        let archive = dir.path().join("fuzz.urt");
        compress_file(&Input::Path(input.clone()), &archive, &cfg, true).unwrap();
        let restored = dir.path().join("fuzz.out");
        decompress_file(&archive, &Output::Path(restored.clone()), 2, true).unwrap();
        let back = std::fs::read(&restored).unwrap();
        assert_eq!(back, data, "fuzz roundtrip mismatch for seed {seed}");
    }
    println!(
        "criterion 2 (fuzz roundtrip, 1000 files): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 3: higher compression ratio than a DEFLATE pass over the raw
/// file on at least 13 of the 16 samples.
#[test]
fn criterion_03_cr_dominance_over_deflate() {
    let started = Instant::now();
    let (dir, files) = sample_dir();
    let mut wins = 0usize;
    let mut table = String::new();
    for (style, path) in &files {
        let metrics = compress_to(
            path,
            dir.path(),
            &format!("{style}.urt"),
            &CompressConfig {
                worker_threads: 2,
                ..CompressConfig::default()
            },
        );
        let raw = std::fs::read(path).unwrap();
        let deflate_cr =
            raw.len() as f64 / FinalCodec::Deflate.compress(&raw).unwrap().len() as f64;
        if metrics.cr() > deflate_cr {
            wins += 1;
        }
        table.push_str(&format!(
            "  {style}: cr={:.2} deflate={:.2}\n",
            metrics.cr(),
            deflate_cr
        ));
    }
    assert!(wins >= 13, "only {wins}/16 samples beat DEFLATE:\n{table}");
    println!(
        "criterion 3 (CR > DEFLATE on {wins}/16 samples, need >= 13): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 4: the full pipeline's CR is never below the stage-2 bypass
/// variant, and strictly better on at least 10 samples.
#[test]
fn criterion_04_ablation_direction() {
    let started = Instant::now();
    let (dir, files) = sample_dir();
    let mut strict = 0usize;
    for (style, path) in &files {
        let base = CompressConfig {
            worker_threads: 2,
            ..CompressConfig::default()
        };
        let full = compress_to(path, dir.path(), &format!("{style}_full.urt"), &base);
        let ablation = compress_to(
            path,
            dir.path(),
            &format!("{style}_s1s3.urt"),
            &CompressConfig {
                ablation_s1_s3: true,
                ..base
            },
        );
        assert!(
            full.cr() >= ablation.cr(),
            "{style}: full {:.3} fell below bypass {:.3}",
            full.cr(),
            ablation.cr()
        );
        if full.compressed_bytes < ablation.compressed_bytes {
            strict += 1;
        }
    }
    assert!(strict >= 10, "only {strict}/16 strictly improved");
    println!(
        "criterion 4 (full >= bypass on all, strictly on {strict}/16, need >= 10): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 5: on every sample concatenated 10x, single-archive mode
/// compresses at least as well as chunked mode.
#[test]
fn criterion_05_mode_tradeoff_direction() {
    let started = Instant::now();
    let (dir, files) = sample_dir();
    for (style, path) in &files {
        let sample = std::fs::read(path).unwrap();
        let mut big = Vec::with_capacity(sample.len() * 10);
        for _ in 0..10 {
            big.extend_from_slice(&sample);
        }
        let input = dir.path().join(format!("{style}_10x.log"));
        std::fs::write(&input, &big).unwrap();
        let chunked = compress_to(
            &input,
            dir.path(),
            &format!("{style}_10x_chunked.urt"),
            &CompressConfig {
                chunk_lines: 2000,
                worker_threads: 4,
                ..CompressConfig::default()
            },
        );
        let single = compress_to(
            &input,
            dir.path(),
            &format!("{style}_10x_single.urt"),
            &CompressConfig {
                mode: Mode::Single,
                worker_threads: 4,
                ..CompressConfig::default()
            },
        );
        assert!(
            single.cr() >= chunked.cr(),
            "{style}: single {:.3} below chunked {:.3}",
            single.cr(),
            chunked.cr()
        );
    }
    println!(
        "criterion 5 (single-mode CR >= chunked CR on all 16 10x samples): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 6: on the twelve-line reference sample with tau=2 for
/// filtering and tau=1 for endpoints, the encoder finds one structural
/// path shared by all seven authentication lines, endpoints for the three
/// frequent (user, rhost, uid) combinations, and exactly one residual.
#[test]
fn criterion_06_reference_sample_fidelity() {
    let started = Instant::now();
    let data = synth::mixed_services_sample();
    let (lines, terminated) = split_lines(&data);
    let owned: Vec<Vec<u8>> = lines.iter().map(|l| l.to_vec()).collect();
    let cfg = CompressConfig {
        tau: 2,
        tau_endpoint: Some(1),
        ..CompressConfig::default()
    };
    let model = build_unit_model(&owned, terminated, &cfg, 1).unwrap();

    // Four structural groups: kernel-audit, httpd, database, sshd.
    assert_eq!(model.groups.len(), 4, "expected 4 structural pathIDs");

    // All seven authentication lines share one structural pathID.
    let (sshd_idx, sshd_group) = model
        .groups
        .iter()
        .enumerate()
        .find(|(_, g)| g.lines.len() == 7)
        .expect("one group holds the seven authentication lines");
    let lids: Vec<u64> = sshd_group.lines.iter().map(|(lid, _)| *lid).collect();
    assert_eq!(lids, vec![4, 5, 6, 8, 9, 10, 11]);

    let enc = &model.encodings[sshd_idx];
    assert_eq!(
        enc.endpoint_count, 4,
        "three leaves plus one interior endpoint"
    );

    // Decode the endpoint dictionary and check the frequent combinations.
    let mut w = Writer::new();
    serialize_group(enc, &mut w);
    let bytes = w.into_bytes();
    let mut r = Reader::new(&bytes, "group");
    let decoded = DecodedGroup::parse(&mut r, sshd_group.arity)
        .unwrap()
        .expect("sshd group has a subtree");
    let paths: Vec<Vec<Vec<u8>>> = decoded.endpoints.iter().map(|e| e.values.clone()).collect();
    for combo in [
        ["user=test1", "rhost=pokemon1.cs.edu", "uid=509"],
        ["user=root", "rhost=pc180.edu.tw", "uid=0"],
        ["user=root", "rhost=julia.arkos.de", "uid=0"],
    ] {
        let found = paths.iter().any(|p| {
            combo
                .iter()
                .all(|v| p.iter().any(|value| value == v.as_bytes()))
        });
        assert!(found, "no endpoint covers {combo:?}");
    }

    // Exactly one residual variable in the group: the rare remote host.
    let mut residual_values: Vec<&[u8]> = Vec::new();
    for ((_, vars), code) in sshd_group.lines.iter().zip(&enc.line_codes) {
        let covered = code.endpoint.map_or(0, |(_, d)| d);
        for p in GroupEncoding::residual_positions(&enc.order, covered, sshd_group.arity) {
            residual_values.push(&vars[p]);
        }
    }
    assert_eq!(residual_values, vec![b"rhost=srv2.alfahost.nl".as_slice()]);

    // And the whole sample still roundtrips byte-exactly at these settings.
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sample.log");
    std::fs::write(&input, &data).unwrap();
    roundtrip_exact(&input, dir.path(), "sample.urt", &cfg);

    println!(
        "criterion 6 (reference sample pattern structure): PASS in {:.2}s",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 7: delta/zigzag/varint roundtrip identity on a million random
/// values including extremes, plus varint minimality.
#[test]
fn criterion_07_codec_properties() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut values: Vec<i64> = Vec::with_capacity(1_000_000);
    for i in 0..1_000_000usize {
        values.push(match i % 101 {
            0 => i64::MIN,
            1 => i64::MAX,
            2 => 0,
            3 => -1,
            _ => rng.gen(),
        });
    }
    let encoded = codec::encode_stream(&values);
    let decoded = codec::decode_stream(&encoded, values.len()).unwrap();
    assert_eq!(decoded, values);

    // Minimality: encodings never carry a redundant trailing zero group.
    let mut buf = Vec::new();
    for i in 0..1_000_000usize {
        let u: u64 = match i % 97 {
            0 => 0,
            1 => u64::MAX,
            k if k < 20 => 1u64 << (i % 64),
            k if k < 40 => (1u64 << (i % 63)).wrapping_sub(1),
            _ => rng.gen(),
        };
        buf.clear();
        codec::varint_encode(u, &mut buf);
        let bits = 64 - u.leading_zeros() as usize;
        let expected_len = std::cmp::max(1, bits.div_ceil(7));
        assert_eq!(buf.len(), expected_len, "non-minimal varint for {u}");
        assert_eq!(buf.last().unwrap() & 0x80, 0);
        assert!(
            buf.len() == 1 || *buf.last().unwrap() != 0,
            "trailing zero group for {u}"
        );
        let (back, used) = codec::varint_decode(&buf, 0).unwrap();
        assert_eq!((back, used), (u, buf.len()));
    }
    println!(
        "criterion 7 (codec roundtrip + varint minimality, 1e6 values): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------
// Criterion 8 support: exhaustive labelled-tree enumeration and a
// brute-force rooted-isomorphism matcher, independent of the signature.
// ---------------------------------------------------------------------

/// Cheap order-invariant key: sorted (depth, label, terminal, degree).
type InvariantKey = Vec<(u8, u8, bool, u8)>;

#[derive(Clone, Debug)]
struct TestTree {
    label: u8,
    terminal: bool,
    children: Vec<TestTree>,
}

impl TestTree {
    fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(TestTree::node_count)
            .sum::<usize>()
    }

    fn invariant(&self) -> InvariantKey {
        fn walk(t: &TestTree, depth: u8, out: &mut InvariantKey) {
            out.push((depth, t.label, t.terminal, t.children.len() as u8));
            for c in &t.children {
                walk(c, depth + 1, out);
            }
        }
        let mut out = Vec::new();
        walk(self, 0, &mut out);
        out.sort_unstable();
        out
    }
}

/// Brute-force labelled rooted-tree isomorphism with unordered children,
/// via backtracking over child matchings.
fn brute_iso(a: &TestTree, b: &TestTree) -> bool {
    if a.label != b.label || a.terminal != b.terminal || a.children.len() != b.children.len() {
        return false;
    }
    fn match_children(ac: &[TestTree], bc: &[TestTree], used: &mut [bool], i: usize) -> bool {
        if i == ac.len() {
            return true;
        }
        for j in 0..bc.len() {
            if !used[j] && brute_iso(&ac[i], &bc[j]) {
                used[j] = true;
                if match_children(ac, bc, used, i + 1) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    let mut used = vec![false; b.children.len()];
    match_children(&a.children, &b.children, &mut used, 0)
}

/// All ordered tree shapes with exactly `n` nodes.
fn shapes(n: usize) -> Vec<TestTree> {
    if n == 1 {
        return vec![TestTree {
            label: 0,
            terminal: false,
            children: Vec::new(),
        }];
    }
    let mut out = Vec::new();
    // Compositions of n-1 into ordered positive parts.
    fn compositions(total: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if total == 0 {
            out.push(acc.clone());
            return;
        }
        for first in 1..=total {
            acc.push(first);
            compositions(total - first, acc, out);
            acc.pop();
        }
    }
    let mut parts = Vec::new();
    compositions(n - 1, &mut Vec::new(), &mut parts);
    for part in parts {
        let child_choices: Vec<Vec<TestTree>> = part.iter().map(|&k| shapes(k)).collect();
        let mut idx: Vec<usize> = vec![0; part.len()];
        'product: loop {
            let children: Vec<TestTree> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| child_choices[i][j].clone())
                .collect();
            out.push(TestTree {
                label: 0,
                terminal: false,
                children,
            });
            // Advance the mixed-radix counter.
            let mut i = 0;
            loop {
                if i == idx.len() {
                    break 'product;
                }
                idx[i] += 1;
                if idx[i] < child_choices[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
    out
}

fn paint(t: &mut TestTree, labels: &[u8], flags: &[bool], idx: &mut usize) {
    t.label = labels[*idx];
    t.terminal = flags[*idx];
    *idx += 1;
    for c in &mut t.children {
        paint(c, labels, flags, idx);
    }
}

/// Prefix trees keep sibling labels unique; labelings that violate that
/// are outside the signature's domain and are skipped.
fn siblings_unique(t: &TestTree) -> bool {
    let mut seen = [false; 3];
    for c in &t.children {
        if seen[c.label as usize] {
            return false;
        }
        seen[c.label as usize] = true;
    }
    t.children.iter().all(siblings_unique)
}

fn to_struct_tree(t: &TestTree) -> (StructTree, urt_core::struct_tree::NodeId) {
    let mut tree = StructTree::new();
    fn build(tree: &mut StructTree, parent: urt_core::struct_tree::NodeId, t: &TestTree) {
        let label = Token::literal(vec![t.label + b'a']);
        let node = tree.add_child(parent, label);
        if t.terminal {
            tree.set_terminal(node);
        }
        for c in &t.children {
            build(tree, node, c);
        }
    }
    build(&mut tree, ROOT, t);
    let top = tree.sorted_children(ROOT)[0];
    (tree, top)
}

fn signature_of(t: &TestTree) -> Vec<u8> {
    let (tree, top) = to_struct_tree(t);
    tree.structural_signature(top)
}

/// Criterion 8: signature equality coincides with brute-force rooted-tree
/// isomorphism for every labelled tree with up to six nodes over a
/// three-symbol alphabet (terminal placement exhaustive up to five nodes).
#[test]
fn criterion_08_signature_matches_isomorphism_oracle() {
    let started = Instant::now();
    let mut by_sig: HashMap<Vec<u8>, TestTree> = HashMap::new();
    let mut reps_by_inv: HashMap<InvariantKey, Vec<Vec<u8>>> = HashMap::new();
    let mut checked = 0u64;

    let mut process =
        |tree: &TestTree,
         by_sig: &mut HashMap<Vec<u8>, TestTree>,
         reps_by_inv: &mut HashMap<InvariantKey, Vec<Vec<u8>>>| {
            let sig = signature_of(tree);
            checked += 1;
            if let Some(rep) = by_sig.get(&sig) {
                // Soundness: equal signature implies isomorphic.
                assert!(
                    brute_iso(tree, rep),
                    "signature collision on non-isomorphic trees: {tree:?} vs {rep:?}"
                );
            } else {
                // Completeness: a new signature must not be isomorphic to any
                // previously seen representative (same cheap invariant only).
                let inv = tree.invariant();
                if let Some(sigs) = reps_by_inv.get(&inv) {
                    for other_sig in sigs {
                        let other = &by_sig[other_sig];
                        assert!(
                            !brute_iso(tree, other),
                            "isomorphic trees got different signatures: {tree:?} vs {other:?}"
                        );
                    }
                }
                reps_by_inv.entry(inv).or_default().push(sig.clone());
                by_sig.insert(sig, tree.clone());
            }
        };

    for n in 1..=6usize {
        for shape in shapes(n) {
            let label_codes = 3usize.pow(n as u32);
            let flag_codes = if n <= 5 { 1usize << n } else { 1 };
            for lc in 0..label_codes {
                let mut labels = Vec::with_capacity(n);
                let mut v = lc;
                for _ in 0..n {
                    labels.push((v % 3) as u8);
                    v /= 3;
                }
                for fc in 0..flag_codes {
                    let flags: Vec<bool> = if n <= 5 {
                        (0..n).map(|k| fc >> k & 1 == 1).collect()
                    } else {
                        vec![true; n]
                    };
                    let mut tree = shape.clone();
                    let mut idx = 0;
                    paint(&mut tree, &labels, &flags, &mut idx);
                    debug_assert_eq!(tree.node_count(), n);
                    if !siblings_unique(&tree) {
                        continue;
                    }
                    process(&tree, &mut by_sig, &mut reps_by_inv);
                }
            }
        }
    }
    println!(
        "criterion 8 (signature == brute-force isomorphism on {checked} trees, {} classes): PASS in {:.1}s",
        by_sig.len(),
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 9: archives are byte-identical across thread counts.
#[test]
fn criterion_09_thread_count_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.log");
    std::fs::write(
        &input,
        synth::dataset_sample("openssh", SAMPLE_LINES, SAMPLE_SEED),
    )
    .unwrap();
    let mut archives = Vec::new();
    for (workers, inner) in [(1usize, 1usize), (8, 4)] {
        let out = dir.path().join(format!("t{workers}.urt"));
        let cfg = CompressConfig {
            chunk_lines: 500,
            worker_threads: workers,
            inner_threads: inner,
            ..CompressConfig::default()
        };
        compress_file(&Input::Path(input.clone()), &out, &cfg, true).unwrap();
        archives.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(
        archives[0], archives[1],
        "archives differ across thread counts"
    );
    println!(
        "criterion 9 (byte-identical archives for thread counts 1 and 8): PASS in {:.1}s",
        started.elapsed().as_secs_f64()
    );
}

/// Criterion 10: a ~50 MB corpus compresses to completion in chunked mode,
/// and the full pipeline is at least as fast as the stage-2 bypass.
#[test]
fn criterion_10_throughput_sanity() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("big.log");
    {
        let mut data = Vec::with_capacity(52 << 20);
        let mut block = 0u64;
        while data.len() < 50 << 20 {
            let styles = ["thunderbird", "linux", "openssh", "hdfs"];
            let style = styles[(block % 4) as usize];
            data.extend_from_slice(&synth::dataset_sample(style, 20_000, block));
            block += 1;
        }
        std::fs::write(&input, &data).unwrap();
    }
    let base = CompressConfig {
        worker_threads: 4,
        ..CompressConfig::default()
    };
    let bypass_cfg = CompressConfig {
        ablation_s1_s3: true,
        ..base.clone()
    };
    // Untimed warmup pass so both measured runs see a hot page cache.
    compress_to(&input, dir.path(), "big_warmup.urt", &bypass_cfg);
    let full = compress_to(&input, dir.path(), "big_full.urt", &base);
    let bypass = compress_to(&input, dir.path(), "big_s1s3.urt", &bypass_cfg);
    assert!(full.original_bytes >= 50 << 20);
    assert!(
        full.cs_mbps() >= bypass.cs_mbps(),
        "full pipeline slower than bypass: {:.2} vs {:.2} MB/s",
        full.cs_mbps(),
        bypass.cs_mbps()
    );
    println!(
        "criterion 10 (50 MB corpus, full {:.2} MB/s >= bypass {:.2} MB/s): PASS in {:.1}s",
        full.cs_mbps(),
        bypass.cs_mbps(),
        started.elapsed().as_secs_f64()
    );
}
