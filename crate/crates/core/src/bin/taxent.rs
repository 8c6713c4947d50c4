//! Command-line front end: build, classify, eval, sweep-tau, dump.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use taxent::classifier::{blend_and_rank, classify_stream};
use taxent::config::PipelineConfig;
use taxent::evaluation::{evaluate_run, load_annotations, precision_at_k};
use taxent::pipeline::build_pipeline;
use taxent::store::{load_manifest, load_model, read_verified, save_model};

#[derive(Parser)]
#[command(name = "taxent", version, about = "Taxonomy enrichment and text classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a model directory from a config file.
    Build {
        /// Config file in key=value format.
        #[arg(long)]
        config: PathBuf,
        /// Override one config key, as key=value. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Directory the model is written to.
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify one text per input line against a built model.
    Classify {
        /// Model directory from a previous build.
        #[arg(long)]
        model: PathBuf,
        /// Input file, one text per line.
        #[arg(long)]
        input: PathBuf,
        /// Ranked categories per line (default: the model's k).
        #[arg(long)]
        k: Option<usize>,
        /// Results file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a results file against graded annotations.
    Eval {
        /// Results file from classify, or an attachments dump.
        #[arg(long)]
        results: PathBuf,
        /// Annotations file: item TAB category_path TAB grade.
        #[arg(long)]
        annotations: PathBuf,
        /// Comma-separated precision cutoffs.
        #[arg(long, default_value = "1,3,5")]
        ks: String,
        /// Count grade 1 (somewhat relevant) as a hit.
        #[arg(long)]
        count_somewhat: bool,
    },
    /// Re-score an input under a grid of tau values and report precision@k.
    SweepTau {
        /// Model directory from a previous build.
        #[arg(long)]
        model: PathBuf,
        /// Input file, one text per line.
        #[arg(long)]
        input: PathBuf,
        /// Annotations file keyed by 1-based input line number.
        #[arg(long)]
        annotations: PathBuf,
        /// Comma-separated tau values, each in [0,1].
        #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
        grid: String,
        /// Precision cutoff (default: the model's k).
        #[arg(long)]
        k: Option<usize>,
        /// Count grade 1 (somewhat relevant) as a hit.
        #[arg(long)]
        count_somewhat: bool,
    },
    /// Print one artifact file of a model directory after verifying it.
    Dump {
        /// Model directory from a previous build.
        #[arg(long)]
        model: PathBuf,
        /// Which artifact to print.
        #[arg(long, value_enum)]
        what: Artifact,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Artifact {
    Manifest,
    Categories,
    Centroids,
    Idf,
    Attachments,
    ConceptVectors,
    TypedEntities,
    Skipped,
}

impl Artifact {
    fn file_name(self) -> &'static str {
        match self {
            Artifact::Manifest => "manifest.txt",
            Artifact::Categories => "categories.txt",
            Artifact::Centroids => "centroids.tsv",
            Artifact::Idf => "idf.tsv",
            Artifact::Attachments => "attachments.tsv",
            Artifact::ConceptVectors => "concept_vectors.tsv",
            Artifact::TypedEntities => "typed_entities.tsv",
            Artifact::Skipped => "skipped_entities.txt",
        }
    }
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn main() {
    // Die quietly when a downstream pipe closes, like other line-oriented
    // tools; the runtime's default would surface EPIPE as an error.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build { config, set, out } => cmd_build(&config, &set, &out),
        Command::Classify {
            model,
            input,
            k,
            out,
        } => cmd_classify(&model, &input, k, out.as_deref()),
        Command::Eval {
            results,
            annotations,
            ks,
            count_somewhat,
        } => cmd_eval(&results, &annotations, &ks, count_somewhat),
        Command::SweepTau {
            model,
            input,
            annotations,
            grid,
            k,
            count_somewhat,
        } => cmd_sweep_tau(&model, &input, &annotations, &grid, k, count_somewhat),
        Command::Dump { model, what } => cmd_dump(&model, what),
    }
}

fn parse_sets(set: &[String]) -> Result<Vec<(String, String)>, CliError> {
    set.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {s:?}")))
        })
        .collect()
}

fn cmd_build(config: &std::path::Path, set: &[String], out: &std::path::Path) -> Result<(), CliError> {
    let overrides = parse_sets(set)?;
    let cfg = PipelineConfig::load(config, &overrides).map_err(data)?;
    let artifacts = build_pipeline(&cfg).map_err(data)?;
    save_model(&artifacts, out).map_err(data)?;

    let s = &artifacts.summary;
    println!("categories={}", s.categories);
    println!("documents={}", s.documents);
    println!("entities_typed={}", s.entities_typed);
    println!("entities_attached={}", s.entities_attached);
    println!("entities_skipped={}", s.entities_skipped);
    println!("empty_centroids={}", s.empty_centroids);
    println!("model_dir={}", out.display());
    Ok(())
}

fn require_k(k: Option<usize>, default: usize) -> Result<usize, CliError> {
    match k {
        Some(0) => Err(CliError::Usage("--k must be at least 1".into())),
        Some(k) => Ok(k),
        None => Ok(default),
    }
}

fn cmd_classify(
    model_dir: &std::path::Path,
    input: &std::path::Path,
    k: Option<usize>,
    out: Option<&std::path::Path>,
) -> Result<(), CliError> {
    // verify the model before touching the output path so a corrupt
    // directory leaves nothing behind
    let model = load_model(model_dir).map_err(data)?;
    let k = require_k(k, model.params.k)?;

    let input_file = File::open(input)
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let reader = BufReader::new(input_file);

    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            classify_stream(&model, reader, BufWriter::new(file), k).map_err(data)
        }
        None => {
            let stdout = std::io::stdout();
            classify_stream(&model, reader, BufWriter::new(stdout.lock()), k).map_err(data)
        }
    }
}

fn parse_ks(ks: &str) -> Result<Vec<usize>, CliError> {
    let parsed: Result<Vec<usize>, _> = ks.split(',').map(|s| s.trim().parse()).collect();
    let parsed =
        parsed.map_err(|_| CliError::Usage(format!("--ks expects comma-separated integers, got {ks:?}")))?;
    if parsed.is_empty() || parsed.contains(&0) {
        return Err(CliError::Usage("--ks values must be at least 1".into()));
    }
    Ok(parsed)
}

fn cmd_eval(
    results: &std::path::Path,
    annotations: &std::path::Path,
    ks: &str,
    count_somewhat: bool,
) -> Result<(), CliError> {
    let ks = parse_ks(ks)?;
    let report = evaluate_run(results, annotations, &ks, count_somewhat).map_err(data)?;
    if report.n_items == 0 {
        eprintln!("warning: results file has no items");
    }
    let stdout = std::io::stdout();
    report.render(stdout.lock()).map_err(data)
}

fn parse_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for part in grid.split(',') {
        let v: f64 = part
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--grid expects comma-separated numbers, got {grid:?}")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Usage(format!("--grid values must be in [0,1], got {v}")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Usage("--grid must list at least one value".into()));
    }
    Ok(values)
}

fn cmd_sweep_tau(
    model_dir: &std::path::Path,
    input: &std::path::Path,
    annotations: &std::path::Path,
    grid: &str,
    k: Option<usize>,
    count_somewhat: bool,
) -> Result<(), CliError> {
    let grid = parse_grid(grid)?;
    let model = load_model(model_dir).map_err(data)?;
    let k = require_k(k, model.params.k)?;
    let judgments = load_annotations(annotations).map_err(data)?;

    let input_file = File::open(input)
        .map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let lines: Vec<String> = BufReader::new(input_file)
        .lines()
        .collect::<Result<_, _>>()
        .map_err(data)?;
    if lines.is_empty() {
        eprintln!("warning: input file has no lines");
    }

    // term and entity scores are computed once per line; each tau only
    // re-blends them
    let parts: Vec<_> = lines
        .iter()
        .map(|line| model.score_parts(line.trim_end_matches(['\r', '\n'])))
        .collect();

    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    writeln!(out, "# tau\tprecision@{k}").map_err(data)?;
    for &tau in &grid {
        let mut sum = 0.0;
        for (i, part) in parts.iter().enumerate() {
            let ranked = blend_and_rank(&part.per_category, tau, k);
            let paths: Vec<String> = ranked
                .iter()
                .map(|(id, _)| model.tax.category(*id).path.clone())
                .collect();
            sum += precision_at_k(&paths, &judgments, &(i + 1).to_string(), k, count_somewhat);
        }
        let mean = if parts.is_empty() { 0.0 } else { sum / parts.len() as f64 };
        writeln!(out, "{tau}\t{mean}").map_err(data)?;
    }
    out.flush().map_err(data)
}

fn cmd_dump(model_dir: &std::path::Path, what: Artifact) -> Result<(), CliError> {
    let manifest = load_manifest(model_dir).map_err(data)?;
    let bytes = match what {
        Artifact::Manifest => std::fs::read(model_dir.join(what.file_name()))
            .map_err(|e| CliError::Data(format!("{}: {e}", model_dir.display())))?,
        _ => read_verified(model_dir, &manifest, what.file_name()).map_err(data)?,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    out.write_all(&bytes).map_err(data)
}
