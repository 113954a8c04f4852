//! `rhythmform` — analyze the rhythmic complexity of symbolic scores.
//!
//! Subcommands: `static`, `dynamic`, `graph`, `compare`. Inputs are Standard
//! MIDI Files or the JSON rhythm format; outputs are machine-first (JSON/CSV/
//! DOT) with an optional SVG rendering.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rhythmform::dynamics::{
    compare_static, dynamic_metrics, static_metrics, AnalysisConfig, IncludeFinal,
};
use rhythmform::error::Error;
use rhythmform::export;
use rhythmform::score::{parse_midi, parse_rhythm_json, BeatRule, Score};
use rhythmform::visibility::TimeAxis;

// Exit codes, stable and documented in the README:
// 0 success, 2 usage (clap), 3 unreadable input, 4 parse/validation failure,
// 5 comparability error, 6 analysis error (empty piece, too short, bad argument).
const EXIT_IO: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_COMPARE: u8 = 5;
const EXIT_ANALYSIS: u8 = 6;

#[derive(Parser)]
#[command(name = "rhythmform", version, about = "Rhythmic complexity metrics for symbolic scores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Whole-piece heterogeneity, syncopation and graph summary.
    Static(StaticArgs),
    /// Sliding measure-window series of heterogeneity and syncopation.
    Dynamic(DynamicArgs),
    /// Visibility graph exports: edge list, DOT, partition CSV.
    Graph(GraphArgs),
    /// Side-by-side static table for several pieces under one configuration.
    Compare(CompareArgs),
}

#[derive(Args)]
struct StaticArgs {
    /// Input score (.mid or .json).
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DynamicArgs {
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GraphArgs {
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more input scores.
    #[arg(required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BeatRuleArg {
    Denominator,
    Compound,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmptyMeasureArg {
    Skip,
    Zero,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TimeAxisArg {
    Index,
    Onset,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IncludeFinalArg {
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
    Svg,
}

#[derive(Args)]
struct CommonArgs {
    /// Ordinal pattern length D.
    #[arg(long, default_value_t = 3)]
    embedding_dim: usize,
    /// Window advance for pattern extraction.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Histogram bins for the off-beat distribution.
    #[arg(long, default_value_t = 11)]
    bins: usize,
    /// Beat length rule.
    #[arg(long, value_enum, default_value_t = BeatRuleArg::Denominator)]
    beat_rule: BeatRuleArg,
    /// Explicit beat length in ticks, overriding the rule.
    #[arg(long)]
    beat_ticks: Option<u64>,
    /// On-beat tolerance in ticks.
    #[arg(long, default_value_t = 0)]
    tolerance: u64,
    /// Treatment of measures without onsets.
    #[arg(long, value_enum, default_value_t = EmptyMeasureArg::Skip)]
    empty_measure: EmptyMeasureArg,
    /// Window length in measures (dynamic mode).
    #[arg(long, default_value_t = 2)]
    window: usize,
    /// Window slide in measures (dynamic mode).
    #[arg(long, default_value_t = 1)]
    slide: usize,
    /// Community detection seed; RHYTHMFORM_SEED overrides the default.
    #[arg(long)]
    seed: Option<u64>,
    /// Abscissa of the duration series.
    #[arg(long, value_enum, default_value_t = TimeAxisArg::Index)]
    time_axis: TimeAxisArg,
    /// Comma-separated voice ids to analyze (default: all).
    #[arg(long, value_delimiter = ',')]
    voices: Vec<usize>,
    /// Append the final event's duration to the interval series.
    #[arg(long, value_enum, default_value_t = IncludeFinalArg::Auto)]
    include_final: IncludeFinalArg,
    /// Drop events shorter than this many ticks.
    #[arg(long, default_value_t = 0)]
    min_duration: u64,
    /// Anacrusis shift of the measure grid, in ticks.
    #[arg(long, default_value_t = 0)]
    pickup: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Output formats (json and csv are always on where they apply).
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
}

impl CommonArgs {
    fn config(&self) -> AnalysisConfig {
        let seed = self.seed.unwrap_or_else(|| {
            std::env::var("RHYTHMFORM_SEED")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(42)
        });
        AnalysisConfig {
            embedding_dim: self.embedding_dim,
            stride: self.stride,
            bins: self.bins,
            beat_rule: match self.beat_rule {
                BeatRuleArg::Denominator => BeatRule::Denominator,
                BeatRuleArg::Compound => BeatRule::Compound,
            },
            beat_ticks: self.beat_ticks,
            tolerance: self.tolerance,
            empty_measure: match self.empty_measure {
                EmptyMeasureArg::Skip => rhythmform::syncopation::EmptyMeasureRule::Skip,
                EmptyMeasureArg::Zero => rhythmform::syncopation::EmptyMeasureRule::Zero,
            },
            window: self.window,
            slide: self.slide,
            seed,
            time_axis: match self.time_axis {
                TimeAxisArg::Index => TimeAxis::Index,
                TimeAxisArg::Onset => TimeAxis::Onset,
            },
            voices: if self.voices.is_empty() { None } else { Some(self.voices.clone()) },
            include_final: match self.include_final {
                IncludeFinalArg::Auto => IncludeFinal::Auto,
                IncludeFinalArg::On => IncludeFinal::On,
                IncludeFinalArg::Off => IncludeFinal::Off,
            },
            min_duration: self.min_duration,
            pickup: self.pickup,
        }
    }

    fn wants(&self, format: Format) -> bool {
        self.format.contains(&format)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Static(args) => run_static(&args),
        Command::Dynamic(args) => run_dynamic(&args),
        Command::Graph(args) => run_graph(&args),
        Command::Compare(args) => run_compare(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("rhythmform: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::MidiParse { .. }
        | Error::UnsupportedMidi(_)
        | Error::JsonSchema { .. }
        | Error::Validation(_) => EXIT_PARSE,
        Error::Comparability(_) => EXIT_COMPARE,
        Error::Argument(_)
        | Error::InsufficientData(_)
        | Error::EmptyPiece(_)
        | Error::InsufficientLength(_) => EXIT_ANALYSIS,
    }
}

struct Input {
    score: Score,
    hash: String,
    stem: String,
}

fn load(path: &Path) -> Result<Input, Error> {
    let bytes = std::fs::read(path)?;
    let hash = export::content_hash(&bytes);
    let score = if bytes.starts_with(b"MThd") {
        parse_midi(&bytes)?
    } else {
        parse_rhythm_json(std::str::from_utf8(&bytes).map_err(|e| Error::JsonSchema {
            field: "document".into(),
            message: format!("input is neither MIDI nor UTF-8 JSON: {e}"),
        })?)?
    };
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "score".into());
    Ok(Input { score, hash, stem })
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn run_static(args: &StaticArgs) -> Result<(), Error> {
    let config = args.common.config();
    let input = load(&args.input)?;
    let analysis = static_metrics(&input.score, &config, &input.stem, &input.hash)?;
    let path = write_out(
        &args.common.out,
        &format!("{}.report.json", input.stem),
        &export::report_json(&analysis.report),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_dynamic(args: &DynamicArgs) -> Result<(), Error> {
    let config = args.common.config();
    let input = load(&args.input)?;
    let series = dynamic_metrics(&input.score, &config, &input.hash)?;
    let csv_path = write_out(
        &args.common.out,
        &format!("{}.dynamic.csv", input.stem),
        &export::series_csv(&series),
    )?;
    let json_path = write_out(
        &args.common.out,
        &format!("{}.dynamic.json", input.stem),
        &export::series_json(&series),
    )?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", json_path.display());
    if args.common.wants(Format::Svg) {
        let svg = plot::series_svg(&series, &input.score.annotations);
        let svg_path = write_out(&args.common.out, &format!("{}.dynamic.svg", input.stem), &svg)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn run_graph(args: &GraphArgs) -> Result<(), Error> {
    let config = args.common.config();
    let input = load(&args.input)?;
    let analysis = static_metrics(&input.score, &config, &input.stem, &input.hash)?;
    let prepared = rhythmform::dynamics::prepare(&input.score, &config)?;
    let edges_path = write_out(
        &args.common.out,
        &format!("{}.edges.txt", input.stem),
        &export::edge_list(&analysis.graph),
    )?;
    let dot_path = write_out(
        &args.common.out,
        &format!("{}.dot", input.stem),
        &export::dot(&analysis.graph, &analysis.partition, &analysis.series),
    )?;
    let partition_path = write_out(
        &args.common.out,
        &format!("{}.partition.csv", input.stem),
        &export::partition_csv(&analysis.partition, &prepared.onsets, &analysis.series, &input.hash),
    )?;
    println!("wrote {}", edges_path.display());
    println!("wrote {}", dot_path.display());
    println!("wrote {}", partition_path.display());
    if args.common.wants(Format::Svg) {
        let svg = plot::partition_svg(&analysis.series, &analysis.partition);
        let svg_path = write_out(&args.common.out, &format!("{}.graph.svg", input.stem), &svg)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn run_compare(args: &CompareArgs) -> Result<(), Error> {
    let config = args.common.config();
    let mut reports = Vec::new();
    for path in &args.inputs {
        let input = load(path)?;
        reports.push(static_metrics(&input.score, &config, &input.stem, &input.hash)?.report);
    }
    let rows = compare_static(&reports)?;
    let echo = serde_json::to_string(&config).expect("config serializes");
    let path = write_out(&args.common.out, "comparison.csv", &export::compare_csv(&rows, &echo))?;
    println!("wrote {}", path.display());
    Ok(())
}
