//! The JSON rhythm format.
//!
//! ```json
//! {
//!   "ticks_per_quarter": 480,
//!   "time_signatures": [{"measure": 0, "numerator": 6, "denominator": 8}],
//!   "voices": [[{"onset": 0, "duration": 480, "tie": false}, ...], ...],
//!   "annotations": [{"measure": 0, "label": "A"}]
//! }
//! ```
//!
//! `ticks_per_quarter` defaults to 480 and the time signature to 4/4. A `tie`
//! flag merges an event into its predecessor, extending the predecessor's
//! duration to the tied event's end. `annotations` is optional and carries
//! section labels for plotting.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::score::{Annotation, NoteEvent, Score, TimeSignature};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default = "default_tpq")]
    ticks_per_quarter: u32,
    #[serde(default)]
    time_signatures: Vec<RawSignature>,
    voices: Vec<Vec<RawEvent>>,
    #[serde(default)]
    annotations: Vec<RawAnnotation>,
    #[serde(default)]
    end_tick: Option<u64>,
}

fn default_tpq() -> u32 {
    480
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignature {
    measure: usize,
    numerator: u32,
    denominator: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    onset: u64,
    duration: i64,
    #[serde(default)]
    tie: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotation {
    measure: usize,
    label: String,
}

/// Parse the JSON rhythm format into a validated [`Score`].
pub fn parse_rhythm_json(text: &str) -> Result<Score> {
    let raw: RawDocument = serde_json::from_str(text)
        .map_err(|e| Error::JsonSchema { field: json_error_field(&e), message: e.to_string() })?;

    if raw.voices.is_empty() {
        return Err(Error::JsonSchema {
            field: "voices".into(),
            message: "at least one voice is required".into(),
        });
    }

    let mut time_signatures = Vec::new();
    if raw.time_signatures.is_empty() {
        time_signatures.push(TimeSignature::new(4, 4, 0)?);
    } else {
        for sig in &raw.time_signatures {
            time_signatures.push(TimeSignature::new(sig.numerator, sig.denominator, sig.measure)?);
        }
        if time_signatures[0].start_measure != 0 {
            return Err(Error::JsonSchema {
                field: "time_signatures".into(),
                message: "first entry must start at measure 0".into(),
            });
        }
    }

    let mut voices = Vec::with_capacity(raw.voices.len());
    for (vi, raw_voice) in raw.voices.iter().enumerate() {
        let mut voice: Vec<NoteEvent> = Vec::with_capacity(raw_voice.len());
        for (ei, ev) in raw_voice.iter().enumerate() {
            if ev.duration <= 0 {
                return Err(Error::Validation(format!(
                    "voices[{vi}][{ei}].duration must be positive, got {}",
                    ev.duration
                )));
            }
            let duration = ev.duration as u64;
            if ev.tie {
                let prev = voice.last_mut().ok_or_else(|| Error::Validation(format!(
                    "voices[{vi}][{ei}]: tie without a preceding event"
                )))?;
                let tied_end = ev.onset + duration;
                if ev.onset < prev.onset + prev.duration || tied_end <= prev.onset + prev.duration {
                    return Err(Error::Validation(format!(
                        "voices[{vi}][{ei}]: tied event must extend its predecessor"
                    )));
                }
                prev.duration = tied_end - prev.onset;
                continue;
            }
            if let Some(prev) = voice.last() {
                if ev.onset <= prev.onset {
                    return Err(Error::Validation(format!(
                        "voices[{vi}][{ei}].onset must be strictly increasing"
                    )));
                }
            }
            voice.push(NoteEvent { onset: ev.onset, duration, voice: vi });
        }
        voices.push(voice);
    }

    let max_end = voices
        .iter()
        .flatten()
        .map(|e| e.onset + e.duration)
        .max()
        .unwrap_or(0);
    let end_tick = raw.end_tick.unwrap_or(max_end).max(max_end);

    let annotations = raw
        .annotations
        .into_iter()
        .map(|a| Annotation { measure: a.measure, label: a.label })
        .collect();

    let score = Score {
        ticks_per_quarter: raw.ticks_per_quarter,
        time_signatures,
        voices,
        end_tick,
        annotations,
    };
    score.validate()?;
    Ok(score)
}

fn json_error_field(err: &serde_json::Error) -> String {
    // serde_json reports the failing key in its message; fall back to position.
    let msg = err.to_string();
    match msg.split('`').nth(1) {
        Some(field) => field.to_string(),
        None => format!("line {} column {}", err.line(), err.column()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{measure_grid, BeatRule};

    #[test]
    fn minimal_document() {
        let score = parse_rhythm_json(r#"{"voices":[[{"onset":0,"duration":480}]]}"#).unwrap();
        assert_eq!(score.ticks_per_quarter, 480);
        assert_eq!(score.voices.len(), 1);
        assert_eq!(score.voices[0][0], NoteEvent { onset: 0, duration: 480, voice: 0 });
        assert_eq!(score.time_signatures[0], TimeSignature::new(4, 4, 0).unwrap());
    }

    #[test]
    fn simultaneous_onsets_across_voices_are_kept() {
        let score = parse_rhythm_json(
            r#"{"voices":[[{"onset":0,"duration":480}],[{"onset":0,"duration":240}]]}"#,
        )
        .unwrap();
        assert_eq!(score.note_count(), 2);
    }

    #[test]
    fn explicit_six_eight_measure_length() {
        let score = parse_rhythm_json(
            r#"{"time_signatures":[{"measure":0,"numerator":6,"denominator":8}],
                "voices":[[{"onset":0,"duration":240}]]}"#,
        )
        .unwrap();
        let grid = measure_grid(&score, BeatRule::Denominator, 0).unwrap();
        assert_eq!(grid.measure_span(0), (0, 6 * 240));
    }

    #[test]
    fn non_positive_duration_is_rejected() {
        let err = parse_rhythm_json(r#"{"voices":[[{"onset":0,"duration":0}]]}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert!(err.to_string().contains("duration"));
    }

    #[test]
    fn schema_violation_names_field() {
        let err =
            parse_rhythm_json(r#"{"voices":[[{"onset":"zero","duration":480}]]}"#).unwrap_err();
        match err {
            Error::JsonSchema { field, .. } => assert!(field.contains("onset") || field.contains("line")),
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn tie_merges_into_predecessor() {
        let score = parse_rhythm_json(
            r#"{"voices":[[{"onset":0,"duration":480},{"onset":480,"duration":240,"tie":true}]]}"#,
        )
        .unwrap();
        assert_eq!(score.voices[0].len(), 1);
        assert_eq!(score.voices[0][0].duration, 720);
    }

    #[test]
    fn tie_without_predecessor_fails() {
        let err = parse_rhythm_json(r#"{"voices":[[{"onset":0,"duration":480,"tie":true}]]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
