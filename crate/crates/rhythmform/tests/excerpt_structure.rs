//! Structure detection on the opening phrase of the theme fixture: the four
//! measures group into four communities that track the measures, with the
//! known ambiguity that the last event of the second measure attaches to the
//! following group.

use std::path::PathBuf;

use rhythmform::dynamics::{prepare, AnalysisConfig};
use rhythmform::score::{extract_ioi, parse_rhythm_json, NoteEvent, Score};
use rhythmform::visibility::louvain::detect_communities;
use rhythmform::visibility::{build_visibility, DurationSeries};

fn opening_excerpt() -> Score {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mozart_k331_theme.json");
    let text = std::fs::read_to_string(path).unwrap();
    let full = parse_rhythm_json(&text).unwrap();
    // keep the first four measures (4 * 1440 ticks) as a standalone score
    let cut = 4 * 1440;
    let voices: Vec<Vec<NoteEvent>> = full
        .voices
        .iter()
        .map(|v| v.iter().copied().filter(|e| e.onset < cut).collect())
        .collect();
    Score {
        ticks_per_quarter: full.ticks_per_quarter,
        time_signatures: full.time_signatures.clone(),
        voices,
        end_tick: cut,
        annotations: vec![],
    }
}

#[test]
fn opening_phrase_groups_into_four_segments() {
    let score = opening_excerpt();
    let config = AnalysisConfig::default();
    let prepared = prepare(&score, &config).unwrap();
    assert_eq!(prepared.onsets.onsets.len(), 19);

    let ioi = extract_ioi(&prepared.onsets, true).unwrap();
    let series = DurationSeries::indexed(ioi.values).unwrap();
    let graph = build_visibility(&series).unwrap();
    let partition = detect_communities(&graph, config.seed);

    assert_eq!(partition.community_count(), 4);

    // contiguous segments
    let ids = partition.assignments();
    let mut boundaries = partition.segment_boundaries();
    boundaries.dedup();
    assert_eq!(boundaries.len(), 3, "four contiguous segments expected: {ids:?}");

    // events per measure: 5, 5, 4, 5 -> measure starts at event 0, 5, 10, 14.
    // Each segment boundary sits within one event of a measure boundary; the
    // second one lands one event early (event 9, the last event of measure 2,
    // joins the third group).
    for (bound, measure_start) in boundaries.iter().zip([5usize, 10, 14]) {
        assert!(
            bound.abs_diff(measure_start) <= 1,
            "segment boundary {bound} too far from measure start {measure_start}"
        );
    }
    assert_eq!(ids[9], ids[10], "the ambiguous boundary event attaches forward");
}
