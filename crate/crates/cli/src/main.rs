//! `urtc`: command-line compressor, decompressor and toolbox for the
//! unified-redundancy-tree archive format.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use urt_core::archive::{Archive, FinalCodec};
use urt_core::decompress::inspect_archive;
use urt_core::pipeline::{
    bench_corpus, bench_table, compress_file, decompress_file, verify, CompressConfig, Input, Mode,
    Output,
};
use urt_core::PatternSet;

#[derive(Parser)]
#[command(
    name = "urtc",
    version,
    about = "Lossless log compressor mining structure+variable redundancy",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a log file into an archive.
    Compress(CompressArgs),
    /// Restore the original bytes from an archive.
    Decompress(DecompressArgs),
    /// Decompress an archive and byte-compare against the original file.
    Verify(VerifyArgs),
    /// Compress every file in a directory and tabulate ratio and speed.
    Bench(BenchArgs),
    /// Print archive structure: header, pathID counts, stream sizes.
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Chunked,
    Single,
}

#[derive(Args)]
struct CompressArgs {
    /// Input log file, or `-` for standard input (single mode only).
    input: String,
    /// Output archive path.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "chunked")]
    mode: ModeArg,
    /// Lines per chunk in chunked mode.
    #[arg(long, default_value_t = 100_000)]
    chunk_lines: usize,
    /// Universal occurrence threshold (filtering and pruning).
    #[arg(long, default_value_t = 2)]
    tau: u64,
    /// Endpoint residual threshold; defaults to --tau.
    #[arg(long)]
    tau_endpoint: Option<u64>,
    /// Chunk worker threads (env URTC_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// Per-chunk worker pool size (env URTC_INNER_THREADS).
    #[arg(long)]
    inner_threads: Option<usize>,
    /// Bypass the variable-subtree stage; variables go straight to
    /// residual processing.
    #[arg(long = "ablation-s1s3")]
    ablation_s1s3: bool,
    /// Final codec: xz or deflate.
    #[arg(long, default_value = "xz")]
    codec: String,
    /// Metadata pattern file (TOML); defaults to the built-in set.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Overwrite the output if it exists.
    #[arg(long)]
    force: bool,
    /// Print machine-readable key=value metrics only.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct DecompressArgs {
    /// Input archive.
    input: PathBuf,
    /// Output path, or `-` for standard output.
    #[arg(short, long)]
    output: String,
    #[arg(long)]
    threads: Option<usize>,
    /// Overwrite the output if it exists.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Original log file.
    input: PathBuf,
    /// Archive to check against it.
    archive: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of log files.
    corpus: PathBuf,
    /// Comma-separated configurations: chunked, single, chunked-s1s3,
    /// single-s1s3.
    #[arg(long, default_value = "chunked")]
    configs: String,
    #[arg(long, default_value_t = 100_000)]
    chunk_lines: usize,
    #[arg(long, default_value_t = 2)]
    tau: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// External baseline command reading stdin, writing compressed bytes to
    /// stdout (e.g. "gzip -9 -c"); defaults to the built-in DEFLATE pass.
    #[arg(long)]
    baseline_cmd: Option<String>,
}

#[derive(Args)]
struct InspectArgs {
    /// Archive to describe.
    archive: PathBuf,
}

fn env_threads(var: &str) -> Option<usize> {
    std::env::var(var).ok()?.parse().ok()
}

fn thread_count(flag: Option<usize>, var: &str) -> usize {
    flag.or_else(|| env_threads(var)).unwrap_or(4).max(1)
}

fn build_config(args: &CompressArgs) -> Result<CompressConfig, urt_core::Error> {
    let patterns = match &args.patterns {
        Some(path) => PatternSet::load(path)?,
        None => PatternSet::default_set(),
    };
    Ok(CompressConfig {
        mode: match args.mode {
            ModeArg::Chunked => Mode::Chunked,
            ModeArg::Single => Mode::Single,
        },
        chunk_lines: args.chunk_lines,
        tau: args.tau.max(1),
        tau_endpoint: args.tau_endpoint,
        worker_threads: thread_count(args.threads, "URTC_THREADS"),
        inner_threads: thread_count(args.inner_threads, "URTC_INNER_THREADS"),
        ablation_s1_s3: args.ablation_s1s3,
        codec: FinalCodec::from_id(&args.codec)?,
        patterns,
        ..CompressConfig::default()
    })
}

fn run_compress(args: CompressArgs) -> Result<(), urt_core::Error> {
    let cfg = build_config(&args)?;
    let input = if args.input == "-" {
        Input::Stdin
    } else {
        Input::Path(PathBuf::from(&args.input))
    };
    let metrics = compress_file(&input, &args.output, &cfg, args.force)?;
    if args.quiet {
        print!("{}", metrics.kv_lines());
    } else {
        println!(
            "{} -> {} ({} lines, {} chunk(s))",
            args.input,
            args.output.display(),
            metrics.lines,
            metrics.chunks
        );
        println!(
            "{} -> {} bytes  CR {:.3}  CS {:.2} MB/s  wall {:.3}s",
            metrics.original_bytes,
            metrics.compressed_bytes,
            metrics.cr(),
            metrics.cs_mbps(),
            metrics.wall_seconds
        );
    }
    Ok(())
}

fn run_decompress(args: DecompressArgs) -> Result<(), urt_core::Error> {
    let output = if args.output == "-" {
        Output::Stdout
    } else {
        Output::Path(PathBuf::from(&args.output))
    };
    let threads = thread_count(args.threads, "URTC_THREADS");
    let written = decompress_file(&args.input, &output, threads, args.force)?;
    if !matches!(output, Output::Stdout) {
        eprintln!("{} bytes written", written);
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<bool, urt_core::Error> {
    let report = verify(&args.input, &args.archive)?;
    if report.matches {
        println!(
            "ok: {} bytes match ({})",
            report.original_len,
            args.archive.display()
        );
    } else {
        println!(
            "MISMATCH at byte {} (original {} bytes, decoded {} bytes)",
            report.first_divergence.unwrap_or(0),
            report.original_len,
            report.decoded_len
        );
    }
    Ok(report.matches)
}

fn run_bench(args: BenchArgs) -> Result<(), urt_core::Error> {
    let threads = thread_count(args.threads, "URTC_THREADS");
    let mut configs = Vec::new();
    for name in args
        .configs
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let mut cfg = CompressConfig {
            chunk_lines: args.chunk_lines,
            tau: args.tau,
            worker_threads: threads,
            ..CompressConfig::default()
        };
        match name {
            "chunked" => {}
            "single" => cfg.mode = Mode::Single,
            "chunked-s1s3" => cfg.ablation_s1_s3 = true,
            "single-s1s3" => {
                cfg.mode = Mode::Single;
                cfg.ablation_s1_s3 = true;
            }
            other => {
                return Err(urt_core::Error::Config(format!(
                    "unknown bench config {other:?}"
                )))
            }
        }
        configs.push((name.to_string(), cfg));
    }
    let rows = bench_corpus(&args.corpus, &configs, args.baseline_cmd.as_deref())?;
    print!("{}", bench_table(&rows));
    Ok(())
}

fn run_inspect(args: InspectArgs) -> Result<(), urt_core::Error> {
    let archive = Archive::open(&args.archive)?;
    let info = &archive.info;
    println!("archive          {}", args.archive.display());
    println!(
        "mode             {}",
        match info.mode {
            urt_core::archive::Mode::Chunked => "chunked",
            urt_core::archive::Mode::Single => "single",
        }
    );
    println!("chunk_lines      {}", info.chunk_lines);
    println!("final_codec      {}", info.codec.id());
    println!("tau              {}", info.tau);
    println!("tau_endpoint     {}", info.tau_endpoint);
    println!("stage2_bypassed  {}", info.stage2_bypassed);
    println!(
        "meta_streams     {}",
        info.meta_table
            .iter()
            .map(|(tag, _)| tag.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!("total_lines      {}", info.total_lines);
    println!("chunks           {}", info.chunks.len());
    let reports = inspect_archive(&archive)?;
    println!("\nchunk\tlines\tstruct_ids\tendpoint_ids\ttemplates\tnum_streams\traw\tcompressed");
    let mut totals = (0u64, 0u64);
    for (i, r) in reports.iter().enumerate() {
        println!(
            "{i}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.lines,
            r.structural_paths,
            r.endpoint_paths,
            r.templates,
            r.numeric_streams,
            r.raw_payload_bytes,
            r.compressed_bytes
        );
        totals.0 += r.structural_paths;
        totals.1 += r.endpoint_paths;
    }
    println!("\nsection bytes per chunk (raw payload share):");
    let names = [
        "lines",
        "skeleton",
        "groups",
        "residuals",
        "main",
        "metadata",
        "delims",
    ];
    for (i, r) in reports.iter().enumerate() {
        let shares: Vec<String> = names
            .iter()
            .zip(r.section_bytes.iter())
            .map(|(n, b)| format!("{n}={b}"))
            .collect();
        println!("chunk {i}: {}", shares.join(" "));
    }
    println!(
        "\ntotal structural pathIDs {} / endpoint pathIDs {}",
        totals.0, totals.1
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; anything else is a
            // usage error (exit 1).
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Compress(args) => run_compress(args),
        Command::Decompress(args) => run_decompress(args),
        Command::Verify(args) => match run_verify(args) {
            Ok(true) => Ok(()),
            Ok(false) => {
                return ExitCode::from(3);
            }
            Err(e) => Err(e),
        },
        Command::Bench(args) => run_bench(args),
        Command::Inspect(args) => run_inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
