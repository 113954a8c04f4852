//! Deterministic text renderings of analysis results. Re-running the same
//! analysis on the same input yields byte-identical output; nothing here
//! embeds timestamps.

use sha2::{Digest, Sha256};

use crate::dynamics::{ComparisonRow, ComplexitySeries, StaticReport};
use crate::score::OnsetSeries;
use crate::visibility::louvain::Partition;
use crate::visibility::{DurationSeries, VisibilityGraph};

/// Hex SHA-256 of raw input bytes, echoed into every output file.
pub fn content_hash(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Static report as pretty JSON.
pub fn report_json(report: &StaticReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

/// `window_start_measure,window_end_measure,heterogeneity,syncopation` rows,
/// markers as empty fields, config echo in leading comments.
pub fn series_csv(series: &ComplexitySeries) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(&series.config).expect("config serializes")
    ));
    out.push_str(&format!("# input_sha256: {}\n", series.input_sha256));
    out.push_str("window_start_measure,window_end_measure,heterogeneity,syncopation\n");
    for entry in &series.entries {
        out.push_str(&format!(
            "{},{},{},{}\n",
            entry.start_measure,
            entry.end_measure,
            fmt_opt(entry.heterogeneity),
            fmt_opt(entry.syncopation),
        ));
    }
    out
}

/// The dynamic series as JSON (entries plus config echo).
pub fn series_json(series: &ComplexitySeries) -> String {
    let mut out = serde_json::to_string_pretty(series).expect("series serializes");
    out.push('\n');
    out
}

/// One `i j` pair per line.
pub fn edge_list(graph: &VisibilityGraph) -> String {
    let mut out = String::new();
    for &(u, v) in graph.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Undirected DOT with `community` and `duration` node attributes.
pub fn dot(graph: &VisibilityGraph, partition: &Partition, series: &DurationSeries) -> String {
    let mut out = String::from("graph rhythm {\n");
    for node in 0..graph.node_count() {
        out.push_str(&format!(
            "  {node} [community={}, duration={}];\n",
            partition.community_of(node),
            series.values()[node]
        ));
    }
    for &(u, v) in graph.edges() {
        out.push_str(&format!("  {u} -- {v};\n"));
    }
    out.push_str("}\n");
    out
}

/// `node,onset_tick,duration,community` rows.
pub fn partition_csv(
    partition: &Partition,
    onsets: &OnsetSeries,
    series: &DurationSeries,
    input_sha256: &str,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("# input_sha256: {input_sha256}\n"));
    out.push_str("node,onset_tick,duration,community\n");
    for node in 0..series.len() {
        out.push_str(&format!(
            "{node},{},{},{}\n",
            onsets.onsets[node],
            series.values()[node],
            partition.community_of(node)
        ));
    }
    out
}

/// Comparison table CSV, one row per piece in the given (already sorted) order.
pub fn compare_csv(rows: &[ComparisonRow], config_echo: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# config: {config_echo}\n"));
    out.push_str("piece,heterogeneity,syncopation,assortativity,transitivity\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{},{:.6}\n",
            row.label,
            row.heterogeneity,
            row.syncopation,
            fmt_opt(row.assortativity),
            row.transitivity
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{static_metrics, AnalysisConfig};
    use crate::score::parse_rhythm_json;

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            content_hash(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn exports_are_deterministic_and_tagged() {
        let score = parse_rhythm_json(
            r#"{"voices":[[{"onset":0,"duration":480},{"onset":480,"duration":240},
                           {"onset":720,"duration":240},{"onset":960,"duration":480},
                           {"onset":1440,"duration":480}]]}"#,
        )
        .unwrap();
        let config = AnalysisConfig::default();
        let analysis = static_metrics(&score, &config, "t", "deadbeef").unwrap();
        let a = report_json(&analysis.report);
        let b = report_json(&analysis.report);
        assert_eq!(a, b);
        assert!(a.contains("deadbeef"));

        let dot_text = dot(&analysis.graph, &analysis.partition, &analysis.series);
        assert!(dot_text.starts_with("graph rhythm {"));
        assert!(dot_text.contains("community="));
        assert!(dot_text.contains("duration="));
        assert!(dot_text.contains(" -- "));

        let edges = edge_list(&analysis.graph);
        assert_eq!(edges.lines().count(), analysis.graph.edge_count());
        assert!(edges.lines().all(|l| l.split(' ').count() == 2));
    }
}
