//! `sillage` command-line interface.
//!
//! Subcommands compose through files: `generate` or real logs feed
//! `autolabel` and `features`, whose CSV feeds `analyze`, whose JSON
//! report feeds `plot`. Every subcommand is deterministic; identical
//! inputs and flags produce byte-identical outputs. Exit codes: 0 on
//! success, 1 on a domain error (one machine-parsable line on stderr),
//! 2 on a usage error.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use sillage::analysis::{analyze, describe, load_report, save_report, ComponentSelection};
use sillage::annotation::{
    align, autolabel_session, cohen_kappa, load_annotations, save_annotations, AutolabelOptions,
};
use sillage::corpus::{load_scheme, load_sessions, save_sessions, validate_corpus};
use sillage::features::{extract_all, load_features, save_features, FlagOptions, VARIABLE_NAMES};
use sillage::plot::render_svg;
use sillage::synth::{default_archetypes, generate, load_archetypes};
use sillage::text::normalize_tokens;

#[derive(Parser)]
#[command(
    name = "sillage",
    version,
    about = "Behavioral typologies from web-search session logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the eight behavioral variables per session into features.csv
    Features(FeaturesArgs),
    /// Measure inter-annotator agreement between two annotation files
    Kappa(KappaArgs),
    /// Standardize, run PCA and Ward clustering; write report.json
    Analyze(AnalyzeArgs),
    /// Render a report as an SVG of the first principal plane
    Plot(PlotArgs),
    /// Generate a seeded synthetic corpus from behavioral archetypes
    Generate(GenerateArgs),
    /// Annotate sessions with the lexicon-based baseline
    Autolabel(AutolabelArgs),
    /// Print descriptive statistics of a feature file
    Stats(StatsArgs),
}

#[derive(Args)]
struct FeaturesArgs {
    /// Proposition scheme (scheme.json)
    #[arg(long)]
    scheme: PathBuf,
    /// Session log (sessions.jsonl)
    #[arg(long)]
    sessions: PathBuf,
    /// Annotation matrices (annotations.csv)
    #[arg(long)]
    annotations: PathBuf,
    /// Output feature CSV
    #[arg(long)]
    out: PathBuf,
    /// Let the catch-all column trigger persistence/intermittence
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    include_autre_in_flags: bool,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// First annotator's annotations.csv
    #[arg(long)]
    annotations_a: PathBuf,
    /// Second annotator's annotations.csv
    #[arg(long)]
    annotations_b: PathBuf,
    /// Optional JSON report destination
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input feature CSV (from `features`)
    #[arg(long)]
    features: PathBuf,
    /// Number of clusters to cut
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Score columns to cluster on: "all" or a count
    #[arg(long, default_value = "all")]
    components: String,
    /// Probability mass of the concentration ellipses
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Output report JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// Input report JSON (from `analyze`)
    #[arg(long)]
    report: PathBuf,
    /// Output SVG
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    scheme: PathBuf,
    /// Use the five bundled archetypes
    #[arg(long, conflicts_with = "specs")]
    default_archetypes: bool,
    /// Archetype spec file (JSON) with per-archetype counts
    #[arg(long)]
    specs: Option<PathBuf>,
    /// Sessions per archetype (with --default-archetypes)
    #[arg(long, default_value_t = 14)]
    count: usize,
    /// Generator seed; same seed, same corpus
    #[arg(long)]
    seed: u64,
    /// Directory for sessions.jsonl, annotations.csv and labels.csv
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AutolabelArgs {
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long)]
    sessions: PathBuf,
    /// Output annotations.csv
    #[arg(long)]
    out: PathBuf,
    /// Maximum edit distance for single-word lexicon matches
    #[arg(long, default_value_t = 1)]
    fuzzy_distance: usize,
    /// File of stopwords (one per line) excluded from catch-all terms
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    features: PathBuf,
    /// Optional JSON destination
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A domain error: stable code plus human-readable message.
struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>) -> CliError {
        CliError {
            code,
            message: message.into(),
        }
    }
}

macro_rules! from_core_error {
    ($($ty:ty),+) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError { code: e.code(), message: e.to_string() }
            }
        })+
    };
}

from_core_error!(
    sillage::CorpusError,
    sillage::AnnotationError,
    sillage::FeatureError,
    sillage::AnalysisError,
    sillage::SynthError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::new("IoError", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::new("JsonError", e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Features(args) => cmd_features(args),
        Command::Kappa(args) => cmd_kappa(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Autolabel(args) => cmd_autolabel(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.code, e.message);
            ExitCode::from(1)
        }
    }
}

fn cmd_features(args: FeaturesArgs) -> Result<(), CliError> {
    let scheme = load_scheme(&args.scheme)?;
    let sessions = load_sessions(&args.sessions)?;
    for diagnostic in validate_corpus(&sessions, &scheme) {
        eprintln!(
            "warning: session '{}': {}",
            diagnostic.session_id, diagnostic.issue
        );
    }
    let annotations = load_annotations(&args.annotations, &scheme)?;
    let fm = extract_all(
        &sessions,
        &annotations,
        &scheme,
        FlagOptions {
            include_autre_column: args.include_autre_in_flags,
        },
    )?;
    save_features(&fm, &args.out)?;
    println!(
        "wrote {} feature rows ({} variables) to {}",
        fm.n_rows(),
        fm.n_variables(),
        args.out.display()
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct KappaOutput<'a> {
    n_items: usize,
    unmatched_a: usize,
    unmatched_b: usize,
    per_proposition: &'a [sillage::annotation::ColumnAgreement],
}

fn cmd_kappa(args: KappaArgs) -> Result<(), CliError> {
    let scheme = load_scheme(&args.scheme)?;
    let a = load_annotations(&args.annotations_a, &scheme)?;
    let b = load_annotations(&args.annotations_b, &scheme)?;
    let alignment = align(&a, &b)?;
    let report = cohen_kappa(&alignment, &scheme)?;

    println!("paired rows: {}", report.n_items);
    if !alignment.unmatched_a.is_empty() || !alignment.unmatched_b.is_empty() {
        println!(
            "unmatched rows: {} only in A, {} only in B",
            alignment.unmatched_a.len(),
            alignment.unmatched_b.len()
        );
    }
    println!("{:<10} {:>8} {:>12}", "column", "kappa", "agreement");
    for column in &report.per_proposition {
        let note = if column.kappa < 0.8 {
            "  (below 0.80)"
        } else {
            ""
        };
        println!(
            "{:<10} {:>8.3} {:>12.3}{note}",
            column.label, column.kappa, column.observed_agreement
        );
    }

    if let Some(path) = &args.out {
        let output = KappaOutput {
            n_items: report.n_items,
            unmatched_a: alignment.unmatched_a.len(),
            unmatched_b: alignment.unmatched_b.len(),
            per_proposition: &report.per_proposition,
        };
        let mut file = fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, &output)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

fn parse_components(raw: &str) -> Result<ComponentSelection, CliError> {
    if raw.eq_ignore_ascii_case("all") {
        return Ok(ComponentSelection::All);
    }
    raw.parse::<usize>()
        .map(ComponentSelection::First)
        .map_err(|_| {
            CliError::new(
                "InvalidComponents",
                format!("--components must be 'all' or a positive integer, got '{raw}'"),
            )
        })
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let fm = load_features(&args.features)?;
    let components = parse_components(&args.components)?;
    let report = analyze(&fm, args.k, components, args.level)?;
    save_report(&report, &args.out)?;

    println!(
        "analyzed {} sessions into {} clusters (Dim 1 {:.1}%, Dim 2 {:.1}%)",
        fm.n_rows(),
        report.k,
        report.explained_ratio[0] * 100.0,
        report.explained_ratio[1] * 100.0
    );
    for profile in &report.profiles {
        let top: Vec<&str> = profile
            .ranked_variables
            .iter()
            .take(3)
            .map(String::as_str)
            .collect();
        println!(
            "cluster {} (n={}): distinguished by {}",
            profile.cluster,
            profile.size,
            top.join(", ")
        );
    }
    println!("report written to {}", args.out.display());
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), CliError> {
    let report = load_report(&args.report)?;
    let svg = render_svg(&report)?;
    fs::write(&args.out, svg)?;
    println!(
        "plotted {} sessions / {} clusters to {}",
        report.session_ids.len(),
        report.k,
        args.out.display()
    );
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let scheme = load_scheme(&args.scheme)?;
    let specs = if args.default_archetypes {
        default_archetypes(&scheme)
            .into_iter()
            .map(|s| (s, args.count))
            .collect()
    } else if let Some(path) = &args.specs {
        load_archetypes(path)?
    } else {
        return Err(CliError::new(
            "InvalidSpec",
            "pass --default-archetypes or --specs <file>",
        ));
    };

    let corpus = generate(&specs, &scheme, args.seed)?;
    fs::create_dir_all(&args.out_dir)?;
    save_sessions(&corpus.sessions, args.out_dir.join("sessions.jsonl"))?;
    save_annotations(
        &corpus.annotations,
        &scheme,
        args.out_dir.join("annotations.csv"),
    )?;
    let mut labels = String::from("session_id,archetype\n");
    for planted in &corpus.planted {
        labels.push_str(&format!("{},{}\n", planted.session_id, planted.archetype));
    }
    fs::write(args.out_dir.join("labels.csv"), labels)?;
    println!(
        "wrote {} sessions over {} archetypes (seed {}) to {}",
        corpus.sessions.len(),
        specs.len(),
        args.seed,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_autolabel(args: AutolabelArgs) -> Result<(), CliError> {
    let scheme = load_scheme(&args.scheme)?;
    let sessions = load_sessions(&args.sessions)?;
    let mut options = AutolabelOptions {
        fuzzy_distance: args.fuzzy_distance,
        stopwords: BTreeSet::new(),
    };
    if let Some(path) = &args.stopwords {
        for line in fs::read_to_string(path)?.lines() {
            for token in normalize_tokens(line) {
                options.stopwords.insert(token.text);
            }
        }
    }
    let mut matrices = Vec::with_capacity(sessions.len());
    for session in &sessions {
        matrices.push(autolabel_session(session, &scheme, &options)?);
    }
    save_annotations(&matrices, &scheme, &args.out)?;
    let rows: usize = matrices.iter().map(|m| m.n_rows()).sum();
    println!(
        "auto-annotated {} queries across {} sessions to {}",
        rows,
        matrices.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), CliError> {
    let fm = load_features(&args.features)?;
    let table = describe(&fm)?;

    print!("{:<8}", "");
    for name in VARIABLE_NAMES {
        print!(" {name:>14}");
    }
    println!();
    type Pick = fn(&sillage::analysis::VariableSummary) -> f64;
    let rows: [(&str, Pick); 5] = [
        ("Min", |v| v.min),
        ("Max", |v| v.max),
        ("Moy", |v| v.mean),
        ("E-type", |v| v.sd),
        ("Med", |v| v.median),
    ];
    for (label, pick) in rows {
        print!("{label:<8}");
        for summary in &table.variables {
            print!(" {:>14.2}", pick(summary));
        }
        println!();
    }

    if let Some(path) = &args.out {
        let mut file = fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, &table)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}
