//! Static (whole piece) and dynamic (sliding measure window) evaluation of the
//! three complexity metrics under one shared configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heterogeneity::{heterogeneity, pattern_distribution, permutation_entropy};
use crate::score::{
    extract_ioi, measure_grid, merge_voices, BeatRule, IoiSeries, MeasureGrid, OnsetSeries, Score,
    VoiceSelection,
};
use crate::syncopation::{
    offbeat_histogram, offbeat_proportion, syncopation, BeatSpec, EmptyMeasureRule,
};
use crate::visibility::louvain::{detect_communities, Partition};
use crate::visibility::{
    build_visibility, graph_summary, DurationSeries, GraphSummary, TimeAxis, VisibilityGraph,
};

/// Whether the final event's duration joins the interval series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncludeFinal {
    /// Off for heterogeneity and syncopation, on for the visibility graph.
    #[default]
    Auto,
    On,
    Off,
}

impl IncludeFinal {
    fn for_entropy(self) -> bool {
        matches!(self, IncludeFinal::On)
    }

    fn for_visibility(self) -> bool {
        !matches!(self, IncludeFinal::Off)
    }
}

/// Every knob of the analysis; echoed verbatim into all outputs so a report
/// fully determines how to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub embedding_dim: usize,
    pub stride: usize,
    pub bins: usize,
    pub beat_rule: BeatRule,
    /// Overrides the beat length derived from the time signature.
    pub beat_ticks: Option<u64>,
    pub tolerance: u64,
    pub empty_measure: EmptyMeasureRule,
    pub window: usize,
    pub slide: usize,
    pub seed: u64,
    pub time_axis: TimeAxis,
    /// Voice ids fed into the analysis; `None` means all voices.
    pub voices: Option<Vec<usize>>,
    pub include_final: IncludeFinal,
    pub min_duration: u64,
    pub pickup: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 3,
            stride: 1,
            bins: 11,
            beat_rule: BeatRule::Denominator,
            beat_ticks: None,
            tolerance: 0,
            empty_measure: EmptyMeasureRule::Skip,
            window: 2,
            slide: 1,
            seed: 42,
            time_axis: TimeAxis::Index,
            voices: None,
            include_final: IncludeFinal::Auto,
            min_duration: 0,
            pickup: 0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=8).contains(&self.embedding_dim) {
            return Err(Error::Argument("embedding dimension must be in 2..=8".into()));
        }
        if self.stride == 0 {
            return Err(Error::Argument("stride must be at least 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::Argument("bins must be at least 2".into()));
        }
        if self.window == 0 || self.slide == 0 || self.slide > self.window {
            return Err(Error::Argument(
                "window and slide must satisfy 1 <= slide <= window".into(),
            ));
        }
        Ok(())
    }

    fn selection(&self) -> VoiceSelection {
        match &self.voices {
            None => VoiceSelection::All,
            Some(ids) => VoiceSelection::Subset(ids.iter().copied().collect()),
        }
    }
}

/// The score prepared for analysis: merged onsets plus the measure grid.
pub struct PreparedScore {
    pub grid: MeasureGrid,
    pub onsets: OnsetSeries,
    /// All measures the grid covers, including a trailing partial one.
    pub total_measures: usize,
    /// Measures that end at or before `end_tick`; windows never reach past these.
    pub full_measures: usize,
}

pub fn prepare(score: &Score, config: &AnalysisConfig) -> Result<PreparedScore> {
    config.validate()?;
    let mut score = score.clone();
    score.filter_min_duration(config.min_duration);
    let grid = measure_grid(&score, config.beat_rule, config.pickup)?;
    let onsets = merge_voices(&score, &config.selection(), &grid)?;
    let total_measures = grid.measure_count();
    let full_measures = grid.full_measures_until(score.end_tick);
    Ok(PreparedScore { grid, onsets, total_measures, full_measures })
}

fn beat_spec_for(grid: &MeasureGrid, measure: usize, config: &AnalysisConfig) -> Result<BeatSpec> {
    let beat = config.beat_ticks.unwrap_or_else(|| grid.beat_length(measure));
    BeatSpec::new(beat, config.tolerance)
}

/// Off-beat proportions of the measures in `[from, to)`, honoring the
/// empty-measure rule.
fn measure_proportions(
    prepared: &PreparedScore,
    config: &AnalysisConfig,
    from: usize,
    to: usize,
) -> Result<Vec<f64>> {
    let mut proportions = Vec::new();
    for measure in from..to {
        let (start, end) = prepared.grid.measure_span(measure);
        let slice: Vec<u64> = prepared
            .onsets
            .onsets
            .iter()
            .copied()
            .filter(|&o| o >= start && o < end)
            .collect();
        let beat = beat_spec_for(&prepared.grid, measure, config)?;
        match offbeat_proportion(&slice, start, end, &beat)? {
            Some(p) => proportions.push(p),
            None => {
                if config.empty_measure == EmptyMeasureRule::Zero {
                    proportions.push(0.0);
                }
            }
        }
    }
    Ok(proportions)
}

fn entropy_ioi(prepared: &PreparedScore, config: &AnalysisConfig) -> Result<IoiSeries> {
    extract_ioi(&prepared.onsets, config.include_final.for_entropy())
}

/// Duration series for the visibility graph, with the chosen abscissa.
pub fn duration_series(prepared: &PreparedScore, config: &AnalysisConfig) -> Result<DurationSeries> {
    let ioi = extract_ioi(&prepared.onsets, config.include_final.for_visibility())?;
    let coords = match config.time_axis {
        TimeAxis::Index => (0..ioi.values.len() as u64).collect(),
        TimeAxis::Onset => prepared.onsets.onsets[..ioi.values.len()].to_vec(),
    };
    DurationSeries::new(ioi.values, coords)
}

/// Whole-piece values under one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct StaticReport {
    pub config: AnalysisConfig,
    pub input_sha256: String,
    pub label: String,
    pub events: usize,
    pub measures: usize,
    pub heterogeneity: f64,
    pub syncopation: f64,
    pub graph: GraphSummary,
    pub communities: usize,
    pub modularity: f64,
}

pub struct StaticAnalysis {
    pub report: StaticReport,
    pub graph: VisibilityGraph,
    pub partition: Partition,
    pub series: DurationSeries,
}

/// Run the full static pipeline: entropy over the whole interval series,
/// syncopation over all measures, and the visibility graph with its summary.
pub fn static_metrics(score: &Score, config: &AnalysisConfig, label: &str, input_sha256: &str) -> Result<StaticAnalysis> {
    let prepared = prepare(score, config)?;
    if prepared.onsets.onsets.is_empty() {
        return Err(Error::EmptyPiece("no onsets after filtering".into()));
    }
    let ioi = entropy_ioi(&prepared, config)?;
    let h = heterogeneity(&ioi.values, config.embedding_dim, config.stride)?;
    let proportions = measure_proportions(&prepared, config, 0, prepared.total_measures)?;
    let q = syncopation(&offbeat_histogram(&proportions, config.bins)?)?;
    let series = duration_series(&prepared, config)?;
    let graph = build_visibility(&series)?;
    let summary = graph_summary(&graph);
    let partition = detect_communities(&graph, config.seed);
    let report = StaticReport {
        config: config.clone(),
        input_sha256: input_sha256.to_string(),
        label: label.to_string(),
        events: prepared.onsets.onsets.len(),
        measures: prepared.total_measures,
        heterogeneity: h,
        syncopation: q,
        graph: summary,
        communities: partition.community_count(),
        modularity: partition.modularity_value(),
    };
    Ok(StaticAnalysis { report, graph, partition, series })
}

/// One sliding-window entry. `None` marks insufficient data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowEntry {
    pub start_measure: usize,
    pub end_measure: usize,
    pub heterogeneity: Option<f64>,
    pub syncopation: Option<f64>,
}

/// The dynamic metric series, one entry per window position.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexitySeries {
    pub config: AnalysisConfig,
    pub input_sha256: String,
    pub entries: Vec<WindowEntry>,
}

impl ComplexitySeries {
    /// Mean over windows that carry a value, with the covered fraction.
    pub fn mean_heterogeneity(&self) -> (Option<f64>, f64) {
        mean_of(self.entries.iter().map(|e| e.heterogeneity), self.entries.len())
    }

    pub fn mean_syncopation(&self) -> (Option<f64>, f64) {
        mean_of(self.entries.iter().map(|e| e.syncopation), self.entries.len())
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>, total: usize) -> (Option<f64>, f64) {
    let defined: Vec<f64> = values.flatten().collect();
    if defined.is_empty() || total == 0 {
        return (None, 0.0);
    }
    let coverage = defined.len() as f64 / total as f64;
    (Some(defined.iter().sum::<f64>() / defined.len() as f64), coverage)
}

/// Slide a `window`-measure window by `slide` measures and evaluate
/// heterogeneity and syncopation inside each position. Windows that cannot
/// host a single pattern window carry markers instead of values.
pub fn dynamic_metrics(score: &Score, config: &AnalysisConfig, input_sha256: &str) -> Result<ComplexitySeries> {
    let prepared = prepare(score, config)?;
    if prepared.full_measures < config.window {
        return Err(Error::InsufficientLength(format!(
            "piece spans {} full measures, window needs {}",
            prepared.full_measures, config.window
        )));
    }
    let mut entries = Vec::new();
    let mut start = 0usize;
    while start + config.window <= prepared.full_measures {
        let end = start + config.window;
        let (lo, hi) = (prepared.grid.measure_span(start).0, prepared.grid.measure_span(end - 1).1);
        let slice: Vec<u64> = prepared
            .onsets
            .onsets
            .iter()
            .copied()
            .filter(|&o| o >= lo && o < hi)
            .collect();
        let h = if slice.len() >= config.embedding_dim + 1 {
            let ioi: Vec<u64> = slice.windows(2).map(|w| w[1] - w[0]).collect();
            match heterogeneity(&ioi, config.embedding_dim, config.stride) {
                Ok(value) => Some(value),
                Err(Error::InsufficientData(_)) => None,
                Err(other) => return Err(other),
            }
        } else {
            None
        };
        let proportions = measure_proportions(&prepared, config, start, end)?;
        let q = if proportions.is_empty() {
            None
        } else {
            Some(syncopation(&offbeat_histogram(&proportions, config.bins)?)?)
        };
        entries.push(WindowEntry { start_measure: start, end_measure: end, heterogeneity: h, syncopation: q });
        start += config.slide;
    }
    Ok(ComplexitySeries { config: config.clone(), input_sha256: input_sha256.to_string(), entries })
}

/// One row of the static comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub heterogeneity: f64,
    pub syncopation: f64,
    pub assortativity: Option<f64>,
    pub transitivity: f64,
}

/// Comparison across pieces, ordered by ascending heterogeneity. Refuses
/// reports produced under different configurations.
pub fn compare_static(reports: &[StaticReport]) -> Result<Vec<ComparisonRow>> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Argument("nothing to compare".into()))?;
    for report in &reports[1..] {
        if report.config != first.config {
            return Err(Error::Comparability(format!(
                "'{}' and '{}' were analyzed under different configurations",
                first.label, report.label
            )));
        }
    }
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| ComparisonRow {
            label: r.label.clone(),
            heterogeneity: r.heterogeneity,
            syncopation: r.syncopation,
            assortativity: r.graph.assortativity,
            transitivity: r.graph.transitivity,
        })
        .collect();
    rows.sort_by(|a, b| a.heterogeneity.total_cmp(&b.heterogeneity).then(a.label.cmp(&b.label)));
    Ok(rows)
}

/// Heterogeneity of an interval sub-series (exposed for window-level checks).
pub fn window_heterogeneity(values: &[u64], d: usize, stride: usize) -> Result<f64> {
    permutation_entropy(&pattern_distribution(values, d, stride)?)
}
