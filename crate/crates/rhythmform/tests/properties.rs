//! Property tests for the invariants that hold on arbitrary input.

use proptest::prelude::*;

use rhythmform::dynamics::{prepare, AnalysisConfig};
use rhythmform::heterogeneity::{count_patterns, heterogeneity, pattern_distribution, permutation_entropy};
use rhythmform::score::{extract_ioi, parse_rhythm_json};
use rhythmform::syncopation::{emd_1d, OffbeatHistogram};
use rhythmform::visibility::{build_visibility, DurationSeries};

fn durations() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(1u64..=16, 4..40)
}

fn histogram(bins: usize) -> impl Strategy<Value = OffbeatHistogram> {
    prop::collection::vec(0u32..20, bins).prop_filter_map("all-zero histogram", |counts| {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            return None;
        }
        Some(
            OffbeatHistogram::from_mass(
                counts.iter().map(|&c| c as f64 / total as f64).collect(),
            )
            .unwrap(),
        )
    })
}

proptest! {
    /// 0 <= H <= 1 for any series and window length.
    #[test]
    fn entropy_is_bounded(values in durations(), d in 2usize..=5) {
        prop_assume!(values.len() >= d);
        let h = heterogeneity(&values, d, 1).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&h));
    }

    /// H is invariant under uniform rescaling of all durations.
    #[test]
    fn entropy_scaling_invariance(values in durations(), scale in 2u64..=20) {
        prop_assume!(values.len() >= 3);
        let scaled: Vec<u64> = values.iter().map(|v| v * scale).collect();
        prop_assert_eq!(
            heterogeneity(&values, 3, 1).unwrap(),
            heterogeneity(&scaled, 3, 1).unwrap()
        );
    }

    /// H = 1 exactly when all N_D patterns appear equally often, and never
    /// exceeds 1 as the distribution drifts away from uniform.
    #[test]
    fn equifrequent_distribution_attains_one(copies in 1usize..5) {
        let mut series = Vec::new();
        for _ in 0..copies {
            series.extend_from_slice(&[1, 1, 2, 1]); // (1,1)=tie (1,2)=up (2,1)=down
        }
        let dist = pattern_distribution(&series, 2, 1).unwrap();
        let h = permutation_entropy(&dist).unwrap();
        prop_assert!(h <= 1.0 + 1e-12);
        if copies == 1 {
            prop_assert!((h - 1.0).abs() < 1e-12);
        }
    }

    /// Pattern counts match the closed form for every valid length.
    #[test]
    fn pattern_count_is_consistent(d in 2usize..=8) {
        let expected = [3u64, 13, 75, 541, 4683, 47293, 545835][d - 2];
        prop_assert_eq!(count_patterns(d).unwrap(), expected);
    }

    /// The 1-D transport distance is a metric: symmetry, identity, triangle.
    #[test]
    fn emd_is_a_metric(a in histogram(6), b in histogram(6), c in histogram(6)) {
        let ab = emd_1d(&a, &b).unwrap();
        let ba = emd_1d(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(emd_1d(&a, &a).unwrap().abs() < 1e-12);
        let ac = emd_1d(&a, &c).unwrap();
        let cb = emd_1d(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9);
    }

    /// The visibility graph always contains the consecutive-event path, and is
    /// invariant under scaling the values and affinely rescaling the axis.
    #[test]
    fn visibility_path_and_invariance(
        values in prop::collection::vec(1u64..=30, 2..50),
        y_scale in 1u64..=9,
        x_scale in 1u64..=5,
        x_offset in 0u64..100,
    ) {
        let base = build_visibility(&DurationSeries::indexed(values.clone()).unwrap()).unwrap();
        for i in 0..values.len() - 1 {
            prop_assert!(base.has_edge(i, i + 1));
        }
        let scaled_values: Vec<u64> = values.iter().map(|v| v * y_scale).collect();
        let coords: Vec<u64> = (0..values.len() as u64).map(|i| x_offset + i * x_scale).collect();
        let scaled = build_visibility(&DurationSeries::new(scaled_values, coords).unwrap()).unwrap();
        prop_assert_eq!(base.edges(), scaled.edges());
    }

    /// Merged onsets are strictly increasing and duplicate-free, and summing
    /// the between-onset intervals reconstructs the onset sequence.
    #[test]
    fn merge_and_roundtrip(raw in prop::collection::vec((0u64..20_000, 1u64..2_000), 2..40)) {
        let mut events: Vec<(u64, u64)> = raw;
        events.sort();
        events.dedup_by_key(|e| e.0);
        prop_assume!(events.len() >= 2);
        let body: Vec<String> = events
            .iter()
            .map(|(o, d)| format!(r#"{{"onset":{o},"duration":{d}}}"#))
            .collect();
        let score = parse_rhythm_json(&format!(r#"{{"voices":[[{}]]}}"#, body.join(","))).unwrap();
        let prepared = prepare(&score, &AnalysisConfig::default()).unwrap();
        let onsets = &prepared.onsets.onsets;
        prop_assert!(onsets.windows(2).all(|w| w[1] > w[0]));
        let ioi = extract_ioi(&prepared.onsets, false).unwrap();
        let mut acc = onsets[0];
        for (value, expected) in ioi.values.iter().zip(&onsets[1..]) {
            acc += value;
            prop_assert_eq!(acc, *expected);
        }
    }
}
