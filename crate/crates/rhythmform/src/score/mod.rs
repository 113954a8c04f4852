//! Score ingestion: parsing, voice merging, inter-onset intervals and the measure grid.
//!
//! Everything downstream works on the onset series of a voice (or aggregate of
//! voices). Rests never appear as events: the gap a rest leaves is absorbed
//! into the inter-onset interval of the note before it.

mod json;
mod midi;

pub use json::parse_rhythm_json;
pub use midi::parse_midi;

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A time signature taking effect at the start of `start_measure`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeSignature {
    pub numerator: u32,
    pub denominator: u32,
    pub start_measure: usize,
}

impl TimeSignature {
    pub fn new(numerator: u32, denominator: u32, start_measure: usize) -> Result<Self> {
        if numerator < 1 {
            return Err(Error::Validation("time signature numerator must be >= 1".into()));
        }
        if !matches!(denominator, 1 | 2 | 4 | 8 | 16 | 32) {
            return Err(Error::Validation(format!(
                "time signature denominator must be a power of two in 1..=32, got {denominator}"
            )));
        }
        Ok(Self { numerator, denominator, start_measure })
    }

    /// Measure length in ticks at the given resolution.
    pub fn measure_ticks(&self, ticks_per_quarter: u32) -> u64 {
        self.numerator as u64 * self.denominator_ticks(ticks_per_quarter)
    }

    /// Ticks of one denominator note (an eighth in 6/8, a quarter in 4/4).
    pub fn denominator_ticks(&self, ticks_per_quarter: u32) -> u64 {
        ticks_per_quarter as u64 * 4 / self.denominator as u64
    }
}

/// A single sounded event. Pitch is irrelevant to rhythm and not retained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoteEvent {
    pub onset: u64,
    pub duration: u64,
    pub voice: usize,
}

/// Section label attached to a measure (fixture annotations, plot markers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub measure: usize,
    pub label: String,
}

/// A parsed symbolic score.
#[derive(Debug, Clone)]
pub struct Score {
    pub ticks_per_quarter: u32,
    pub time_signatures: Vec<TimeSignature>,
    pub voices: Vec<Vec<NoteEvent>>,
    pub end_tick: u64,
    pub annotations: Vec<Annotation>,
}

impl Score {
    /// Check the container invariants shared by both parsers.
    pub fn validate(&self) -> Result<()> {
        if self.ticks_per_quarter == 0 {
            return Err(Error::Validation("ticks_per_quarter must be positive".into()));
        }
        if self.time_signatures.is_empty() {
            return Err(Error::Validation("score needs at least one time signature".into()));
        }
        if self.time_signatures[0].start_measure != 0 {
            return Err(Error::Validation("first time signature must start at measure 0".into()));
        }
        for pair in self.time_signatures.windows(2) {
            if pair[1].start_measure <= pair[0].start_measure {
                return Err(Error::Validation(
                    "time signatures must be sorted by start_measure and unique".into(),
                ));
            }
        }
        let mut max_end = 0u64;
        for (vi, voice) in self.voices.iter().enumerate() {
            for ev in voice {
                if ev.duration == 0 {
                    return Err(Error::Validation(format!(
                        "voice {vi}: event at tick {} has zero duration",
                        ev.onset
                    )));
                }
                max_end = max_end.max(ev.onset + ev.duration);
            }
            for pair in voice.windows(2) {
                if pair[1].onset <= pair[0].onset {
                    return Err(Error::Validation(format!(
                        "voice {vi}: onsets must be strictly increasing"
                    )));
                }
            }
        }
        if self.end_tick < max_end {
            return Err(Error::Validation(format!(
                "end_tick {} is before the last event end {max_end}",
                self.end_tick
            )));
        }
        Ok(())
    }

    pub fn note_count(&self) -> usize {
        self.voices.iter().map(Vec::len).sum()
    }

    /// Drop events shorter than `min_duration` ticks (ornament filtering).
    pub fn filter_min_duration(&mut self, min_duration: u64) {
        if min_duration <= 1 {
            return;
        }
        for voice in &mut self.voices {
            voice.retain(|ev| ev.duration >= min_duration);
        }
    }
}

/// Merged onset sequence of one or more voices, plus the length assigned to
/// the final event (notated duration extended by any trailing rest up to the
/// next measure boundary, capped at `end_tick`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnsetSeries {
    pub onsets: Vec<u64>,
    pub final_event_length: u64,
    pub tick_unit: u32,
}

/// Inter-onset intervals; `tick_unit` rides along for unit conversions only,
/// every metric is invariant to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoiSeries {
    pub values: Vec<u64>,
    pub tick_unit: u32,
}

/// Which beat subdivides a measure for the on-beat test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeatRule {
    /// One denominator note (eighth in 6/8). Always divides the measure.
    #[default]
    Denominator,
    /// Dotted grouping for compound meters (dotted quarter in 6/8, 9/8, 12/8);
    /// falls back to the denominator when the numerator is not divisible by 3.
    Compound,
}

/// Measure boundaries and the beat length in force within each measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureGrid {
    /// `boundaries[i]` is the start tick of measure `i`; the last entry closes
    /// the final measure, so there are `measure_count() + 1` entries.
    boundaries: Vec<u64>,
    beat_lengths: Vec<u64>,
}

impl MeasureGrid {
    pub fn measure_count(&self) -> usize {
        self.beat_lengths.len()
    }

    pub fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }

    pub fn measure_span(&self, index: usize) -> (u64, u64) {
        (self.boundaries[index], self.boundaries[index + 1])
    }

    pub fn beat_length(&self, index: usize) -> u64 {
        self.beat_lengths[index]
    }

    /// Measure containing `tick`; boundary ticks belong to the starting measure.
    pub fn measure_of(&self, tick: u64) -> Option<usize> {
        if tick < self.boundaries[0] || tick >= *self.boundaries.last().unwrap() {
            return None;
        }
        match self.boundaries.binary_search(&tick) {
            Ok(i) => Some(i),
            Err(i) => Some(i - 1),
        }
    }

    /// First boundary at or after `tick`, if any.
    fn boundary_at_or_after(&self, tick: u64) -> Option<u64> {
        self.boundaries.iter().copied().find(|&b| b >= tick)
    }

    /// Count of measures that end at or before `end_tick`.
    pub fn full_measures_until(&self, end_tick: u64) -> usize {
        (0..self.measure_count()).take_while(|&i| self.boundaries[i + 1] <= end_tick).count()
    }
}

/// Voice subset fed into an analysis.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum VoiceSelection {
    #[default]
    All,
    Subset(BTreeSet<usize>),
}

impl VoiceSelection {
    fn indices(&self, score: &Score) -> Result<Vec<usize>> {
        match self {
            VoiceSelection::All => Ok((0..score.voices.len()).collect()),
            VoiceSelection::Subset(ids) => {
                if ids.is_empty() {
                    return Err(Error::Argument("voice selection is empty".into()));
                }
                for &id in ids {
                    if id >= score.voices.len() {
                        return Err(Error::Argument(format!(
                            "unknown voice id {id}; score has {} voices",
                            score.voices.len()
                        )));
                    }
                }
                Ok(ids.iter().copied().collect())
            }
        }
    }
}

/// Build the measure grid, accumulating measure lengths and switching meter at
/// each signature change. `pickup` shifts the whole grid right for anacrusis.
pub fn measure_grid(score: &Score, beat_rule: BeatRule, pickup: u64) -> Result<MeasureGrid> {
    if score.time_signatures.is_empty() {
        return Err(Error::Validation("score has no time signature".into()));
    }
    let tpq = score.ticks_per_quarter;
    let mut boundaries = vec![pickup];
    let mut beat_lengths = Vec::new();
    let mut sig_iter = score.time_signatures.iter().peekable();
    let mut current = *sig_iter.next().unwrap();
    let mut measure = 0usize;
    let mut tick = pickup;
    // Extend until the grid covers end_tick (at least one measure).
    while tick < score.end_tick.max(pickup + 1) {
        if let Some(next) = sig_iter.peek() {
            if next.start_measure == measure {
                current = **next;
                sig_iter.next();
            } else if next.start_measure < measure {
                return Err(Error::Validation(format!(
                    "time signature change at measure {} was not reached in order",
                    next.start_measure
                )));
            }
        }
        let len = current.measure_ticks(tpq);
        let beat = beat_ticks(&current, tpq, beat_rule);
        debug_assert_eq!(len % current.denominator_ticks(tpq), 0);
        tick += len;
        boundaries.push(tick);
        beat_lengths.push(beat);
        measure += 1;
    }
    if let Some(next) = sig_iter.peek() {
        if next.start_measure >= measure {
            // Signature change beyond the sounding content; harmless, ignore.
        }
    }
    Ok(MeasureGrid { boundaries, beat_lengths })
}

fn beat_ticks(sig: &TimeSignature, tpq: u32, rule: BeatRule) -> u64 {
    let den = sig.denominator_ticks(tpq);
    match rule {
        BeatRule::Denominator => den,
        BeatRule::Compound => {
            if sig.numerator % 3 == 0 && sig.numerator > 3 {
                3 * den
            } else {
                den
            }
        }
    }
}

/// Merge the selected voices into one onset sequence. Simultaneous onsets
/// (chords, doublings across hands) collapse to a single rhythmic event.
pub fn merge_voices(
    score: &Score,
    selection: &VoiceSelection,
    grid: &MeasureGrid,
) -> Result<OnsetSeries> {
    let indices = selection.indices(score)?;
    let mut onsets = BTreeSet::new();
    let mut last: Option<(u64, u64)> = None; // (onset, longest duration at that onset)
    for &vi in &indices {
        for ev in &score.voices[vi] {
            onsets.insert(ev.onset);
            last = match last {
                None => Some((ev.onset, ev.duration)),
                Some((o, _)) if ev.onset > o => Some((ev.onset, ev.duration)),
                Some((o, d)) if ev.onset == o => Some((o, d.max(ev.duration))),
                keep => keep,
            };
        }
    }
    let onsets: Vec<u64> = onsets.into_iter().collect();
    let (last_onset, last_duration) = match last {
        Some(v) => v,
        None => return Err(Error::EmptyPiece("selected voices contain no notes".into())),
    };
    let note_end = last_onset + last_duration;
    let extended_end = grid
        .boundary_at_or_after(note_end)
        .unwrap_or(note_end)
        .min(score.end_tick.max(note_end));
    let final_event_length = extended_end.max(note_end) - last_onset;
    Ok(OnsetSeries { onsets, final_event_length, tick_unit: score.ticks_per_quarter })
}

/// Inter-onset intervals: `values[i] = onsets[i+1] - onsets[i]`. With
/// `include_final` the last event's own span is appended so the series has one
/// value per event.
pub fn extract_ioi(series: &OnsetSeries, include_final: bool) -> Result<IoiSeries> {
    let needed = if include_final { 1 } else { 2 };
    if series.onsets.len() < needed {
        return Err(Error::InsufficientData(format!(
            "need at least {needed} onsets, have {}",
            series.onsets.len()
        )));
    }
    let mut values: Vec<u64> =
        series.onsets.windows(2).map(|pair| pair[1] - pair[0]).collect();
    if include_final {
        values.push(series.final_event_length);
    }
    Ok(IoiSeries { values, tick_unit: series.tick_unit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain_score(onsets_durs: &[(u64, u64)], num: u32, den: u32, tpq: u32) -> Score {
        let voice: Vec<NoteEvent> = onsets_durs
            .iter()
            .map(|&(onset, duration)| NoteEvent { onset, duration, voice: 0 })
            .collect();
        let end_tick = voice.iter().map(|e| e.onset + e.duration).max().unwrap_or(0);
        let score = Score {
            ticks_per_quarter: tpq,
            time_signatures: vec![TimeSignature::new(num, den, 0).unwrap()],
            voices: vec![voice],
            end_tick,
            annotations: vec![],
        };
        score.validate().unwrap();
        score
    }

    #[test]
    fn grid_four_four() {
        let score = plain_score(&[(0, 480), (480, 480), (960, 480), (1440, 480)], 4, 4, 480);
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        assert_eq!(grid.measure_span(0), (0, 1920));
        assert_eq!(grid.beat_length(0), 480);
    }

    #[test]
    fn grid_six_eight_both_rules() {
        let score = plain_score(&[(0, 240), (1200, 240)], 6, 8, 480);
        let den = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        assert_eq!(den.beat_length(0), 240);
        assert_eq!(den.measure_span(0), (0, 1440));
        let comp = measure_grid(&score, BeatRule::Compound, 0).unwrap();
        assert_eq!(comp.beat_length(0), 720);
    }

    #[test]
    fn grid_signature_change() {
        let mut score = plain_score(&[(0, 480), (5000, 280)], 4, 4, 480);
        score.time_signatures.push(TimeSignature::new(3, 4, 2).unwrap());
        score.validate().unwrap();
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        assert_eq!(&grid.boundaries()[..4], &[0, 1920, 3840, 5280]);
    }

    #[test]
    fn grid_pickup_shift() {
        let score = plain_score(&[(0, 240), (240, 240), (480, 1920)], 4, 4, 480);
        let grid = measure_grid(&score, BeatRule::Denominator, 480).unwrap();
        assert_eq!(grid.boundaries()[0], 480);
        assert_eq!(grid.measure_of(0), None);
        assert_eq!(grid.measure_of(480), Some(0));
    }

    #[test]
    fn merge_collapses_chords() {
        let mut score = plain_score(&[(0, 480), (480, 480)], 4, 4, 480);
        score.voices.push(vec![
            NoteEvent { onset: 0, duration: 1920, voice: 1 },
        ]);
        score.end_tick = 1920;
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let merged = merge_voices(&score, &VoiceSelection::All, &grid).unwrap();
        assert_eq!(merged.onsets, vec![0, 480]);
        // last-onset event ends at 960; the trailing rest to the measure end joins it
        assert_eq!(merged.final_event_length, 1440);
    }

    #[test]
    fn merge_rejects_unknown_voice() {
        let score = plain_score(&[(0, 480)], 4, 4, 480);
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let sel = VoiceSelection::Subset([3usize].into_iter().collect());
        assert!(matches!(merge_voices(&score, &sel, &grid), Err(Error::Argument(_))));
        let sel = VoiceSelection::Subset(BTreeSet::new());
        assert!(matches!(merge_voices(&score, &sel, &grid), Err(Error::Argument(_))));
    }

    #[test]
    fn voice_subset_selects_one_staff() {
        let mut score = plain_score(&[(0, 480), (480, 480), (960, 960)], 4, 4, 480);
        score.voices.push(vec![
            NoteEvent { onset: 240, duration: 240, voice: 1 },
            NoteEvent { onset: 720, duration: 240, voice: 1 },
        ]);
        score.validate().unwrap();
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let upper = VoiceSelection::Subset([0usize].into_iter().collect());
        let merged = merge_voices(&score, &upper, &grid).unwrap();
        assert_eq!(merged.onsets, vec![0, 480, 960]);
        let all = merge_voices(&score, &VoiceSelection::All, &grid).unwrap();
        assert_eq!(all.onsets, vec![0, 240, 480, 720, 960]);
    }

    #[test]
    fn min_duration_drops_ornaments() {
        let mut score = plain_score(&[(0, 20), (480, 480), (960, 15), (1440, 480)], 4, 4, 480);
        score.filter_min_duration(30);
        let onsets: Vec<u64> = score.voices[0].iter().map(|e| e.onset).collect();
        assert_eq!(onsets, vec![480, 1440]);
        // threshold 0 keeps everything
        let mut untouched = plain_score(&[(0, 20), (480, 480)], 4, 4, 480);
        untouched.filter_min_duration(0);
        assert_eq!(untouched.voices[0].len(), 2);
    }

    #[test]
    fn final_event_absorbs_trailing_rest() {
        // quarter note at beat 4 of a 6/8 measure followed by an eighth rest:
        // the closing event spans note + rest to the next boundary.
        let mut score = plain_score(&[(0, 240), (240, 240), (480, 240), (720, 480)], 6, 8, 480);
        score.end_tick = 1440;
        score.validate().unwrap();
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let merged = merge_voices(&score, &VoiceSelection::All, &grid).unwrap();
        assert_eq!(merged.final_event_length, 720);
    }

    #[test]
    fn ioi_paper_example() {
        // quarter,quarter,eighth,eighth,quarter at the eighth-note unit.
        let score = plain_score(
            &[(0, 480), (480, 480), (960, 240), (1200, 240), (1440, 480)],
            4,
            4,
            480,
        );
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let merged = merge_voices(&score, &VoiceSelection::All, &grid).unwrap();
        let ioi = extract_ioi(&merged, false).unwrap();
        assert_eq!(ioi.values, vec![480, 480, 240, 240]);
        let unit = 240;
        let in_eighths: Vec<u64> = ioi.values.iter().map(|v| v / unit).collect();
        assert_eq!(in_eighths, vec![2, 2, 1, 1]);
        let with_final = extract_ioi(&merged, true).unwrap();
        assert_eq!(with_final.values, vec![480, 480, 240, 240, 480]);
    }

    #[test]
    fn ioi_single_onset_needs_final() {
        let score = plain_score(&[(0, 480)], 4, 4, 480);
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let merged = merge_voices(&score, &VoiceSelection::All, &grid).unwrap();
        assert!(extract_ioi(&merged, false).is_err());
        let ioi = extract_ioi(&merged, true).unwrap();
        // the piece ends with the note, so no trailing rest joins it
        assert_eq!(ioi.values, vec![480]);
    }

    #[test]
    fn rest_between_notes_is_absorbed() {
        // eighth note, eighth rest, eighth note -> one IOI of two eighths.
        let score = plain_score(&[(0, 240), (480, 240)], 4, 4, 480);
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let merged = merge_voices(&score, &VoiceSelection::All, &grid).unwrap();
        let ioi = extract_ioi(&merged, false).unwrap();
        assert_eq!(ioi.values, vec![480]);
    }

    #[test]
    fn ioi_roundtrip_reconstructs_onsets() {
        let score = plain_score(
            &[(0, 100), (360, 240), (600, 120), (720, 700), (1500, 420)],
            4,
            4,
            480,
        );
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        let merged = merge_voices(&score, &VoiceSelection::All, &grid).unwrap();
        let ioi = extract_ioi(&merged, false).unwrap();
        let mut acc = merged.onsets[0];
        let mut rebuilt = vec![acc];
        for v in &ioi.values {
            acc += v;
            rebuilt.push(acc);
        }
        assert_eq!(rebuilt, merged.onsets);
    }
}
