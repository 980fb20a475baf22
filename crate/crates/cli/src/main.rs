use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gapdict::marking::MarkScheme;
use gapdict::testgen::{check_instance, random_instance, Fault, InstanceParams};
use gapdict::{
    naive_scan, parse_dictionary, Backend, Dictionary, GapIndex, IndexOptions, Occurrence,
    QueryText, ScanOptions,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "gapdict", version, about = "Single-gap dictionary matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report every occurrence of a dictionary pattern in a text.
    Scan(ScanArgs),
    /// Print index statistics for a dictionary.
    Stats {
        dict: PathBuf,
    },
    /// Compare both engines against the brute-force matcher on random instances.
    Selftest(SelftestArgs),
    /// Time index builds and scans on a random dictionary and text.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ScanArgs {
    dict: PathBuf,
    /// Text file, or `-` for standard input.
    text: PathBuf,
    #[arg(long, value_enum, default_value_t = Engine::Grid)]
    engine: Engine,
    /// Split the text into overlapping windows and scan them in parallel.
    #[arg(long)]
    chunked: bool,
    /// Report every qualifying gap, not only the smallest per end.
    #[arg(long)]
    all_gaps: bool,
    /// Print 1-based positions.
    #[arg(long)]
    one_based: bool,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of patterns.
    #[arg(long, default_value_t = 256)]
    patterns: usize,
    /// Text length in bytes.
    #[arg(long, default_value_t = 100_000)]
    text_len: usize,
    #[arg(long, default_value_t = 1)]
    alpha: usize,
    #[arg(long, default_value_t = 4)]
    beta: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Grid,
    Lookup,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Jsonl,
}

enum Failure {
    /// Malformed input: exit 2.
    Input(String),
    /// Unreadable or unwritable file: exit 3.
    Io(anyhow::Error),
    /// Self-test mismatch, already reported: exit 1.
    Check,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan(args) => cmd_scan(args),
        Command::Stats { dict } => cmd_stats(&dict),
        Command::Selftest(args) => cmd_selftest(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("gapdict: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("gapdict: {e:#}");
            ExitCode::from(3)
        }
        Err(Failure::Check) => ExitCode::from(1),
    }
}

fn load_dictionary(path: &Path) -> Result<Dictionary, Failure> {
    let bytes = fs::read(path)
        .with_context(|| format!("cannot read dictionary {}", path.display()))
        .map_err(Failure::Io)?;
    parse_dictionary(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_text(path: &Path) -> Result<Vec<u8>, Failure> {
    let mut bytes = Vec::new();
    if path.as_os_str() == "-" {
        io::stdin()
            .read_to_end(&mut bytes)
            .context("cannot read standard input")
            .map_err(Failure::Io)?;
    } else {
        bytes = fs::read(path)
            .with_context(|| format!("cannot read text {}", path.display()))
            .map_err(Failure::Io)?;
    }
    Ok(bytes)
}

fn cmd_scan(args: ScanArgs) -> Result<(), Failure> {
    if args.engine == Engine::Oracle && args.chunked {
        return Err(Failure::Input("--chunked cannot be used with --engine oracle".into()));
    }
    let dict = load_dictionary(&args.dict)?;
    let text = load_text(&args.text)?;
    let query = QueryText::new(&text).map_err(|e| Failure::Input(e.to_string()))?;
    let options = ScanOptions { all_gaps: args.all_gaps };

    let occurrences = match args.engine {
        Engine::Oracle => naive_scan(&dict, &text, args.all_gaps),
        Engine::Grid | Engine::Lookup => {
            let backend = if args.engine == Engine::Grid { Backend::Grid } else { Backend::Lookup };
            let index = GapIndex::build(
                dict,
                IndexOptions {
                    grid: backend == Backend::Grid,
                    lookup: backend == Backend::Lookup,
                },
            );
            let scanned = if args.chunked {
                index.scan_chunked(query, backend, options)
            } else {
                index.scan(query, backend, options)
            };
            scanned.map_err(|e| Failure::Input(e.to_string()))?
        }
    };

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    write_occurrences(&mut out, &occurrences, args.format, args.one_based)?;
    out.flush()?;
    Ok(())
}

fn write_occurrences(
    out: &mut impl Write,
    occurrences: &[Occurrence],
    format: Format,
    one_based: bool,
) -> Result<(), Failure> {
    for &occ in occurrences {
        let o = if one_based { occ.one_based() } else { occ };
        match format {
            Format::Tsv => writeln!(out, "{}\t{}\t{}\t{}", o.pattern_id, o.end, o.start, o.gap)?,
            Format::Jsonl => {
                serde_json::to_writer(&mut *out, &o).map_err(|e| Failure::Io(e.into()))?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

fn floor_log2(n: usize) -> u32 {
    usize::BITS - 1 - n.max(1).leading_zeros()
}

fn cmd_stats(path: &Path) -> Result<(), Failure> {
    let dict = load_dictionary(path)?;
    let (d, total_len) = (dict.len(), dict.total_len());
    let original = dict.original_count();
    let index = GapIndex::build(dict, IndexOptions::default());
    println!("d={d}");
    println!("patterns_in_file={original}");
    println!("total_len={total_len}");
    for (name, side) in [("first", index.first()), ("second", index.second())] {
        let nodes = side.topology().len();
        let marked = side.marks(MarkScheme::VerticalPath).count();
        let paths = side.paths();
        println!("{name}.nodes={nodes}");
        println!("{name}.marked={marked}");
        println!("{name}.vertical_paths={}", paths.path_count());
        println!(
            "{name}.max_crossings={} (bound floor(log2 N)+1 = {})",
            paths.max_crossings(),
            floor_log2(nodes) + 1
        );
    }
    let table = index.inter_table().expect("lookup backend built");
    let (rows, cols) = table.dimensions();
    println!("inter.dimensions={rows}x{cols}");
    println!("inter.fill_ops={}", table.fill_ops());
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> Result<(), Failure> {
    let fault = args.inject_fault.then_some(Fault::DropLookupOccurrence);
    let mut occurrences = 0;
    for trial in 0..args.trials {
        let seed = args.seed.wrapping_add(trial);
        let instance = random_instance(seed, InstanceParams::default());
        match check_instance(&instance, fault) {
            Ok(found) => occurrences += found,
            Err(m) => {
                println!("FAIL trial {trial}: {}", m.what);
                println!("  instance: {}", instance.describe());
                let first_diff = m
                    .expected
                    .iter()
                    .zip(&m.actual)
                    .position(|(a, b)| a != b)
                    .unwrap_or(m.expected.len().min(m.actual.len()));
                println!(
                    "  expected {} records, got {}; first difference at record {first_diff}",
                    m.expected.len(),
                    m.actual.len()
                );
                println!("  reproduce: gapdict selftest --seed {seed} --trials 1");
                return Err(Failure::Check);
            }
        }
    }
    println!("ok: {} trials from seed {}, {occurrences} occurrences checked", args.trials, args.seed);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.alpha > args.beta {
        return Err(Failure::Input("--alpha must not exceed --beta".into()));
    }
    let params = InstanceParams {
        max_patterns: args.patterns.max(1),
        max_subpattern_len: 12,
        max_beta: 0,
        max_text_len: 0,
    };
    // Reuse the generator for the patterns only, then fix d, bounds and text.
    let mut pairs = Vec::with_capacity(args.patterns);
    let mut seed = args.seed;
    while pairs.len() < args.patterns {
        let inst = random_instance(seed, params);
        pairs.extend(inst.dict.patterns().iter().map(|p| (p.p1.clone(), p.p2.clone())));
        seed = seed.wrapping_add(1);
    }
    pairs.truncate(args.patterns.max(1));
    let bounds = gapdict::GapBounds::new(args.alpha, args.beta).expect("checked above");
    let dict = Dictionary::from_pairs(bounds, pairs).map_err(|e| Failure::Input(e.to_string()))?;
    let text = bench_text(&dict, args.text_len, args.seed);

    println!(
        "d={} total_len={} n={} alpha={} beta={}",
        dict.len(),
        dict.total_len(),
        text.len(),
        args.alpha,
        args.beta
    );
    let query = QueryText::new(&text).expect("generated text is separator-free");
    for backend in [Backend::Grid, Backend::Lookup] {
        let started = Instant::now();
        let index = GapIndex::build(
            dict.clone(),
            IndexOptions {
                grid: backend == Backend::Grid,
                lookup: backend == Backend::Lookup,
            },
        );
        let build = started.elapsed();
        for chunked in [false, true] {
            let started = Instant::now();
            let found = if chunked {
                index.scan_chunked(query, backend, ScanOptions::default())
            } else {
                index.scan(query, backend, ScanOptions::default())
            }
            .expect("backend built")
            .len();
            let secs = started.elapsed().as_secs_f64();
            println!(
                "{backend}{}: build {:.3}s, scan {:.3}s, {:.0} symbols/s, {found} occurrences",
                if chunked { " (chunked)" } else { "" },
                build.as_secs_f64(),
                secs,
                text.len() as f64 / secs.max(1e-9)
            );
        }
    }
    Ok(())
}

/// Text over the dictionary's own symbols so matches actually occur.
fn bench_text(dict: &Dictionary, n: usize, seed: u64) -> Vec<u8> {
    let mut symbols: Vec<u8> = dict
        .patterns()
        .iter()
        .flat_map(|p| p.p1.iter().chain(&p.p2).copied())
        .collect();
    symbols.sort_unstable();
    symbols.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| *symbols.choose(&mut rng).unwrap()).collect()
}
