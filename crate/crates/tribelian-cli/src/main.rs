//! Command-line front end over the trib pipeline.
//!
//! ```text
//! tribelian build [--force]          build and cache every artifact
//! tribelian eval <rho|set|tau1> <n>  evaluate the output machines
//! tribelian verify [--max-n N]       sweep against direct counting
//! tribelian query <TEXT>             compile a first-order query
//! tribelian export <NAME> [--format walnut|dot|json]
//! tribelian stats                    per-artifact state counts
//! ```
//!
//! The cache directory comes from `--out-dir`, the `TRIB_CACHE_DIR`
//! environment variable, or `./cache`, in that order.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or parse error,
//! 3 pipeline abort.

mod cache;
mod export;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use tribelian::checks;
use tribelian::formula::{run_query, QueryError};
use tribelian::oracle::{sweep_window, TribOracle};
use tribelian::pipeline::{subset_vectors_at, Artifacts};
use tribelian::relations::RelationContext;
use tribelian::walnut;
use tribelian::worddfao::eval;

#[derive(Parser)]
#[command(
    name = "tribelian",
    version,
    about = "Abelian complexity of the Tribonacci word, as automata"
)]
struct Cli {
    /// Cache directory (default: $TRIB_CACHE_DIR, else ./cache)
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build all artifacts and write them to the cache
    Build {
        /// Rebuild even when the cache is up to date
        #[arg(long)]
        force: bool,
    },
    /// Evaluate the output machines at one index
    Eval { kind: EvalKind, n: u64 },
    /// Sweep the complexity automaton against direct counting
    Verify {
        #[arg(long, default_value_t = 100_000)]
        max_n: u64,
        /// Fixed scan window (default: scales with n, stability-checked)
        #[arg(long)]
        window: Option<usize>,
        /// Also write an `n,complexity,subset_id` table of the counted values
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compile a textual query and summarize the result
    Query { text: String },
    /// Export one artifact from the cache
    Export {
        name: String,
        #[arg(long, value_enum, default_value_t = Format::Walnut)]
        format: Format,
        /// Output path (default: <name>.<ext> in the working directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print per-artifact state counts
    Stats,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalKind {
    /// Abelian complexity
    Rho,
    /// The realized vector set at n
    Set,
    /// Least index with the same vector set
    Tau1,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Walnut,
    Dot,
    Json,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PIPELINE: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli.out_dir.unwrap_or_else(cache::default_dir);
    let result = match cli.command {
        Command::Build { force } => cmd_build(&dir, force),
        Command::Eval { kind, n } => cmd_eval(&dir, kind, n),
        Command::Verify { max_n, window, csv } => cmd_verify(&dir, max_n, window, csv),
        Command::Query { text } => cmd_query(&dir, &text),
        Command::Export { name, format, out } => cmd_export(&dir, &name, format, out),
        Command::Stats => cmd_stats(&dir),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load_cache(dir: &PathBuf) -> anyhow::Result<Artifacts> {
    cache::load(dir)
}

fn cmd_build(dir: &PathBuf, force: bool) -> anyhow::Result<ExitCode> {
    if !force {
        match cache::stale_artifact(dir) {
            None => {
                println!("cache at {} is up to date", dir.display());
                return Ok(ExitCode::SUCCESS);
            }
            Some(stale) if cache::manifest_path(dir).exists() => {
                println!("rebuilding: {stale} is missing or stale (dependents follow)");
            }
            _ => {}
        }
    }
    let start = Instant::now();
    let built = tribelian::pipeline::build_with_progress(|stage| {
        println!("[{:>8.2?}] {stage}", start.elapsed());
    });
    let artifacts = match built {
        Ok(a) => a,
        Err(e) => {
            eprintln!("pipeline abort: {e}");
            return Ok(ExitCode::from(EXIT_PIPELINE));
        }
    };
    let manifest = cache::store(dir, &artifacts)?;
    println!(
        "built {} artifacts into {} in {:.2?}",
        manifest.artifacts.len(),
        dir.display(),
        start.elapsed()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(dir: &PathBuf, kind: EvalKind, n: u64) -> anyhow::Result<ExitCode> {
    let artifacts = load_cache(dir)?;
    match kind {
        EvalKind::Rho => {
            let trac = artifacts
                .word("TRAC")
                .ok_or_else(|| anyhow::anyhow!("TRAC missing"))?;
            println!("{}", eval(trac, n));
        }
        EvalKind::Tau1 => {
            let tras = artifacts
                .word("TRAS")
                .ok_or_else(|| anyhow::anyhow!("TRAS missing"))?;
            println!("{}", eval(tras, n));
        }
        EvalKind::Set => {
            let vectors = subset_vectors_at(&artifacts, n);
            let inner: Vec<String> = vectors.iter().map(|v| v.to_string()).collect();
            println!("{{{}}}", inner.join(","));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    dir: &PathBuf,
    max_n: u64,
    window: Option<usize>,
    csv: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let artifacts = load_cache(dir)?;
    let trac = artifacts
        .word("TRAC")
        .ok_or_else(|| anyhow::anyhow!("TRAC missing"))?;
    let start = Instant::now();
    let prefix_len = match window {
        Some(w) => w + max_n as usize + 2,
        None => sweep_window(max_n as usize) + max_n as usize + 2,
    };
    let oracle = TribOracle::new(prefix_len);
    if let Some(path) = csv {
        write_counted_csv(&path, &artifacts, &oracle, max_n, window)?;
        println!("wrote {}", path.display());
    }
    let report = checks::verify_complexity(trac, &oracle, max_n, window)
        .map_err(|e| anyhow::anyhow!("oracle window: {e}"))?;
    println!(
        "checked n = 0..={} against direct counting in {:.2?}",
        max_n,
        start.elapsed()
    );
    println!("values seen: {:?}", report.values_seen);
    println!("mismatches: {}", report.mismatch_count);
    if report.mismatch_count > 0 {
        for m in &report.mismatches {
            println!(
                "  n={}: automaton {} vs oracle {}",
                m.n, m.automaton, m.oracle
            );
        }
        return Ok(ExitCode::from(EXIT_MISMATCH));
    }
    Ok(ExitCode::SUCCESS)
}

/// The directly counted table: index, complexity, and the least index
/// realizing the same vector set (resolved through the class table).
fn write_counted_csv(
    path: &PathBuf,
    artifacts: &Artifacts,
    oracle: &TribOracle,
    max_n: u64,
    window: Option<usize>,
) -> anyhow::Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "n,complexity,subset_id")?;
    for n in 0..=max_n {
        let w = window.unwrap_or_else(|| sweep_window(n as usize));
        let set = oracle
            .relative_set(n as usize, w)
            .map_err(|e| anyhow::anyhow!("oracle window: {e}"))?;
        let mask = tribelian::pipeline::SubsetOfA::from_vectors(&artifacts.range_set, &set)
            .ok_or_else(|| anyhow::anyhow!("vector outside the range set at n={n}"))?;
        let row = artifacts
            .class_table
            .find_subset(mask)
            .ok_or_else(|| anyhow::anyhow!("unknown vector set at n={n}"))?;
        writeln!(out, "{n},{},{}", set.len(), row.min_index)?;
    }
    Ok(())
}

fn cmd_query(dir: &PathBuf, text: &str) -> anyhow::Result<ExitCode> {
    let artifacts = load_cache(dir)?;
    let env = artifacts.query_env();
    let ctx = RelationContext::new().map_err(|e| anyhow::anyhow!("{e}"))?;
    let body = strip_command_wrapper(text);
    let rel = match run_query(body, &ctx, &env) {
        Ok(rel) => rel,
        Err(e @ (QueryError::Parse { .. } | QueryError::UnsupportedNumeration(_))) => {
            eprintln!("parse error: {e}");
            return Ok(ExitCode::from(EXIT_USAGE));
        }
        Err(e) => {
            eprintln!("compile error: {e}");
            return Ok(ExitCode::from(EXIT_USAGE));
        }
    };
    if rel.arity() == 0 {
        println!("{}", rel.holds());
        return Ok(ExitCode::SUCCESS);
    }
    println!("free variables: ({})", rel.vars().join(", "));
    println!(
        "states: {} ({} with sink)",
        rel.automaton().trim_state_count(),
        rel.automaton().num_states()
    );
    println!("empty: {}", rel.is_empty());
    let witnesses = rel.first_values(10);
    if !witnesses.is_empty() {
        println!("first accepted tuples:");
        for w in witnesses {
            let inner: Vec<String> = w.iter().map(|v| v.to_string()).collect();
            println!("  ({})", inner.join(", "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Accepts either a bare formula or a full `def name "..."` / `eval name
/// "..."` command line, with optional trailing `:` or `;`.
fn strip_command_wrapper(text: &str) -> &str {
    let trimmed = text.trim();
    let without_terminator = trimmed.trim_end_matches([':', ';']).trim_end();
    for keyword in ["def ", "eval "] {
        if let Some(rest) = without_terminator.strip_prefix(keyword) {
            if let Some(open) = rest.find('"') {
                let body = &rest[open + 1..];
                let end = body.rfind('"').unwrap_or(body.len());
                return &body[..end];
            }
        }
    }
    without_terminator
}

fn cmd_export(
    dir: &PathBuf,
    name: &str,
    format: Format,
    out: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let artifacts = load_cache(dir)?;
    let Some(artifact) = artifacts.get(name) else {
        eprintln!("unknown artifact `{name}`; cached artifacts:");
        for n in artifacts.names() {
            eprintln!("  {n}");
        }
        return Ok(ExitCode::from(EXIT_USAGE));
    };
    let manifest = cache::load_manifest(dir)?;
    let vars = manifest
        .artifacts
        .get(name)
        .map(|e| e.vars.clone())
        .unwrap_or_default();
    let (content, ext) = match format {
        Format::Walnut => (
            match artifact {
                tribelian::pipeline::Artifact::Relation(r) => {
                    walnut::serialize_automaton(r.automaton())
                }
                tribelian::pipeline::Artifact::Word(d) => walnut::serialize_dfao(d),
            },
            "txt",
        ),
        Format::Dot => (
            match artifact {
                tribelian::pipeline::Artifact::Relation(r) => export::automaton_dot(r.automaton()),
                tribelian::pipeline::Artifact::Word(d) => export::dfao_dot(d),
            },
            "dot",
        ),
        Format::Json => (
            serde_json::to_string_pretty(&export::artifact_json(name, &vars, artifact))?,
            "json",
        ),
    };
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.{ext}")));
    std::fs::write(&path, content)?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(dir: &PathBuf) -> anyhow::Result<ExitCode> {
    let artifacts = load_cache(dir)?;
    println!("convention: {}", cache::CONVENTION_NOTE);
    println!(
        "{:<14} {:<9} {:>9} {:>10} {:>9}",
        "artifact", "kind", "states", "with sink", "expected"
    );
    for stat in artifacts.stats() {
        let expected = stat
            .expected_trim
            .map(|e| e.to_string())
            .unwrap_or_else(|| "-".to_string());
        let marker = match stat.expected_trim {
            Some(e) if e != stat.states_trim => "  <- differs",
            _ => "",
        };
        println!(
            "{:<14} {:<9} {:>9} {:>10} {:>9}{}",
            stat.name, stat.kind, stat.states_trim, stat.states_complete, expected, marker
        );
    }
    let ranges = artifacts.ranges;
    println!(
        "coordinate excursions: letter0 (+{},-{}), letter1 (+{},-{}), letter2 (+{},-{})",
        ranges[0].positive,
        ranges[0].negative,
        ranges[1].positive,
        ranges[1].negative,
        ranges[2].positive,
        ranges[2].negative
    );
    println!("classes: {}", artifacts.class_table.rows.len());
    Ok(ExitCode::SUCCESS)
}
