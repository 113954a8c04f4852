//! Standard MIDI File ingestion, formats 0 and 1, PPQ division only.
//!
//! One voice is produced per (track, channel) pair that contains notes.
//! Note-on with velocity 0 closes a note like a note-off. A second note-on for
//! a pitch that is still sounding truncates the first note at the new onset.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::score::{NoteEvent, Score, TimeSignature};

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        Error::MidiParse { offset: self.pos, message: message.into() }
    }

    fn u8(&mut self) -> Result<u8> {
        let b = *self.data.get(self.pos).ok_or_else(|| self.fail("unexpected end of file"))?;
        self.pos += 1;
        Ok(b)
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(self.fail(format!("expected {n} bytes, file truncated")));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.bytes(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.bytes(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    /// MIDI variable-length quantity, at most four bytes.
    fn varlen(&mut self) -> Result<u32> {
        let mut value = 0u32;
        for _ in 0..4 {
            let b = self.u8()?;
            value = (value << 7) | (b & 0x7F) as u32;
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(self.fail("variable-length quantity longer than four bytes"))
    }
}

#[derive(Debug, Clone, Copy)]
struct SigEvent {
    tick: u64,
    numerator: u32,
    denominator: u32,
}

/// Parse a Standard MIDI File into a [`Score`].
pub fn parse_midi(bytes: &[u8]) -> Result<Score> {
    let mut cur = Cursor::new(bytes);

    if cur.bytes(4).map_err(|_| cur.fail("missing MThd header"))? != b"MThd" {
        return Err(Error::MidiParse { offset: 0, message: "not a MIDI file (missing MThd)".into() });
    }
    let header_len = cur.u32()?;
    if header_len < 6 {
        return Err(cur.fail(format!("header chunk length {header_len} < 6")));
    }
    let format = cur.u16()?;
    if format > 1 {
        return Err(Error::UnsupportedMidi(format!("SMF format {format}; only 0 and 1 are handled")));
    }
    let declared_tracks = cur.u16()? as usize;
    let division = cur.u16()?;
    if division & 0x8000 != 0 {
        return Err(Error::UnsupportedMidi("SMPTE division; only PPQ timing is handled".into()));
    }
    if division == 0 {
        return Err(cur.fail("PPQ division of zero"));
    }
    cur.bytes(header_len as usize - 6)?;

    // (track, channel) -> finished events
    let mut voices: BTreeMap<(usize, u8), Vec<NoteEvent>> = BTreeMap::new();
    let mut signatures: Vec<SigEvent> = Vec::new();
    let mut end_tick = 0u64;

    let mut track_index = 0usize;
    while cur.pos < bytes.len() {
        if cur.bytes(4)? != b"MTrk" {
            return Err(Error::MidiParse {
                offset: cur.pos - 4,
                message: "expected MTrk chunk".into(),
            });
        }
        let track_len = cur.u32()? as usize;
        let track_end = cur.pos + track_len;
        if track_end > bytes.len() {
            return Err(cur.fail(format!("track chunk length {track_len} overruns the file")));
        }

        let mut tick = 0u64;
        let mut running_status: Option<u8> = None;
        // (channel, pitch) -> onset of the currently sounding note
        let mut open: BTreeMap<(u8, u8), u64> = BTreeMap::new();

        while cur.pos < track_end {
            tick += cur.varlen()? as u64;
            let first = cur.u8()?;
            let status = if first & 0x80 != 0 {
                if first < 0xF0 {
                    running_status = Some(first);
                }
                first
            } else {
                cur.pos -= 1;
                running_status.ok_or_else(|| cur.fail("data byte without running status"))?
            };

            match status {
                0xFF => {
                    let meta_type = cur.u8()?;
                    let len = cur.varlen()? as usize;
                    let data = cur.bytes(len)?;
                    running_status = None;
                    match meta_type {
                        0x58 => {
                            if len < 2 {
                                return Err(cur.fail("time signature meta event shorter than 2 bytes"));
                            }
                            let dd = data[1] as u32;
                            if dd > 5 {
                                return Err(Error::UnsupportedMidi(format!(
                                    "time signature denominator 2^{dd}"
                                )));
                            }
                            signatures.push(SigEvent {
                                tick,
                                numerator: data[0] as u32,
                                denominator: 1 << dd,
                            });
                        }
                        0x2F => {
                            end_tick = end_tick.max(tick);
                            break;
                        }
                        _ => {}
                    }
                }
                0xF0 | 0xF7 => {
                    let len = cur.varlen()? as usize;
                    cur.bytes(len)?;
                    running_status = None;
                }
                _ => {
                    let kind = status & 0xF0;
                    let channel = status & 0x0F;
                    match kind {
                        0x90 | 0x80 => {
                            let pitch = cur.u8()? & 0x7F;
                            let velocity = cur.u8()? & 0x7F;
                            let is_on = kind == 0x90 && velocity > 0;
                            if is_on {
                                if let Some(onset) = open.insert((channel, pitch), tick) {
                                    close_note(&mut voices, track_index, channel, onset, tick);
                                }
                            } else if let Some(onset) = open.remove(&(channel, pitch)) {
                                close_note(&mut voices, track_index, channel, onset, tick);
                            }
                        }
                        0xA0 | 0xB0 | 0xE0 => {
                            cur.bytes(2)?;
                        }
                        0xC0 | 0xD0 => {
                            cur.bytes(1)?;
                        }
                        _ => return Err(cur.fail(format!("unexpected status byte {status:#04x}"))),
                    }
                }
            }
        }
        if cur.pos != track_end {
            // end-of-track meta terminated early; skip any padding the length declared
            if cur.pos < track_end {
                cur.pos = track_end;
            } else {
                return Err(cur.fail("track events overran the declared chunk length"));
            }
        }
        // close anything still sounding at the end of the track
        for ((channel, _pitch), onset) in open {
            close_note(&mut voices, track_index, channel, onset, tick);
        }
        end_tick = end_tick.max(tick);
        track_index += 1;
    }

    if track_index != declared_tracks && declared_tracks != 0 {
        return Err(Error::MidiParse {
            offset: bytes.len(),
            message: format!("header declared {declared_tracks} tracks, found {track_index}"),
        });
    }

    let mut voice_vec: Vec<Vec<NoteEvent>> = Vec::new();
    for ((_, _), mut events) in voices {
        let vi = voice_vec.len();
        events.sort_by_key(|e| e.onset);
        // chords within one channel collapse to a single rhythmic event
        let mut merged: Vec<NoteEvent> = Vec::with_capacity(events.len());
        for mut ev in events {
            ev.voice = vi;
            match merged.last_mut() {
                Some(prev) if prev.onset == ev.onset => {
                    prev.duration = prev.duration.max(ev.duration)
                }
                _ => merged.push(ev),
            }
        }
        // truncation may have left an event running past its successor's start
        for i in 0..merged.len().saturating_sub(1) {
            let next_onset = merged[i + 1].onset;
            if merged[i].onset + merged[i].duration > next_onset {
                merged[i].duration = next_onset - merged[i].onset;
            }
        }
        merged.retain(|e| e.duration > 0);
        if !merged.is_empty() {
            voice_vec.push(merged);
        }
    }
    if voice_vec.is_empty() {
        return Err(Error::EmptyPiece("midi file contains no notes".into()));
    }

    let max_note_end = voice_vec
        .iter()
        .flatten()
        .map(|e| e.onset + e.duration)
        .max()
        .unwrap_or(0);
    let time_signatures = resolve_signatures(signatures, division as u32)?;

    let score = Score {
        ticks_per_quarter: division as u32,
        time_signatures,
        voices: voice_vec,
        end_tick: end_tick.max(max_note_end),
        annotations: Vec::new(),
    };
    score.validate()?;
    Ok(score)
}

fn close_note(
    voices: &mut BTreeMap<(usize, u8), Vec<NoteEvent>>,
    track: usize,
    channel: u8,
    onset: u64,
    end: u64,
) {
    if end > onset {
        voices.entry((track, channel)).or_default().push(NoteEvent {
            onset,
            duration: end - onset,
            voice: 0,
        });
    }
}

/// Convert tick-positioned signature events into measure-indexed ones,
/// checking that every change lands exactly on a measure boundary.
fn resolve_signatures(mut events: Vec<SigEvent>, tpq: u32) -> Result<Vec<TimeSignature>> {
    events.sort_by_key(|e| e.tick);
    events.dedup_by_key(|e| e.tick);
    if events.is_empty() || events[0].tick != 0 {
        events.insert(0, SigEvent { tick: 0, numerator: 4, denominator: 4 });
    }
    let mut out: Vec<TimeSignature> = Vec::with_capacity(events.len());
    let mut measure = 0usize;
    let mut tick = 0u64;
    let mut current = TimeSignature::new(events[0].numerator, events[0].denominator, 0)?;
    out.push(current);
    for ev in &events[1..] {
        let measure_len = current.measure_ticks(tpq);
        let span = ev.tick - tick;
        if span % measure_len != 0 {
            return Err(Error::Validation(format!(
                "time signature change at tick {} is not on a measure boundary",
                ev.tick
            )));
        }
        measure += (span / measure_len) as usize;
        tick = ev.tick;
        current = TimeSignature::new(ev.numerator, ev.denominator, measure)?;
        out.push(current);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal SMF builder for tests.
    pub(crate) fn smf(division: u16, tracks: &[Vec<u8>]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"MThd");
        out.extend_from_slice(&6u32.to_be_bytes());
        out.extend_from_slice(&(if tracks.len() > 1 { 1u16 } else { 0u16 }).to_be_bytes());
        out.extend_from_slice(&(tracks.len() as u16).to_be_bytes());
        out.extend_from_slice(&division.to_be_bytes());
        for track in tracks {
            out.extend_from_slice(b"MTrk");
            out.extend_from_slice(&(track.len() as u32).to_be_bytes());
            out.extend_from_slice(track);
        }
        out
    }

    fn eot() -> Vec<u8> {
        vec![0x00, 0xFF, 0x2F, 0x00]
    }

    #[test]
    fn four_quarter_notes() {
        let mut tr = Vec::new();
        for _ in 0..4 {
            tr.extend_from_slice(&[0x00, 0x90, 60, 64]); // note on
            tr.extend_from_slice(&[0x83, 0x60, 0x80, 60, 0]); // delta 480, note off
        }
        tr.extend_from_slice(&eot());
        let score = parse_midi(&smf(480, &[tr])).unwrap();
        assert_eq!(score.ticks_per_quarter, 480);
        assert_eq!(score.voices.len(), 1);
        let onsets: Vec<u64> = score.voices[0].iter().map(|e| e.onset).collect();
        assert_eq!(onsets, vec![0, 480, 960, 1440]);
        assert!(score.voices[0].iter().all(|e| e.duration == 480));
    }

    #[test]
    fn velocity_zero_note_on_acts_as_note_off() {
        let mut tr = Vec::new();
        tr.extend_from_slice(&[0x00, 0x90, 60, 64]);
        tr.extend_from_slice(&[0x83, 0x60, 0x90, 60, 0]); // vel 0 = off, running status applies below
        tr.extend_from_slice(&eot());
        let score = parse_midi(&smf(480, &[tr])).unwrap();
        assert_eq!(score.voices[0][0].duration, 480);
    }

    #[test]
    fn running_status() {
        let mut tr = Vec::new();
        tr.extend_from_slice(&[0x00, 0x90, 60, 64]);
        tr.extend_from_slice(&[0x60, 60, 0]); // delta 96, running 0x90, vel 0
        tr.extend_from_slice(&[0x00, 62, 64]);
        tr.extend_from_slice(&[0x60, 62, 0]);
        tr.extend_from_slice(&eot());
        let score = parse_midi(&smf(480, &[tr])).unwrap();
        let onsets: Vec<u64> = score.voices[0].iter().map(|e| e.onset).collect();
        assert_eq!(onsets, vec![0, 96]);
    }

    #[test]
    fn time_signature_meta() {
        let mut tr = Vec::new();
        tr.extend_from_slice(&[0x00, 0xFF, 0x58, 0x04, 6, 3, 36, 8]); // 6/8
        tr.extend_from_slice(&[0x00, 0x90, 60, 64]);
        tr.extend_from_slice(&[0x83, 0x60, 0x80, 60, 0]);
        tr.extend_from_slice(&eot());
        let score = parse_midi(&smf(480, &[tr])).unwrap();
        assert_eq!(score.time_signatures[0], TimeSignature::new(6, 8, 0).unwrap());
    }

    #[test]
    fn overlapping_same_pitch_truncates_first() {
        // note on at 0, second note on of the same pitch at 240, offs at 480/720
        let mut tr = Vec::new();
        tr.extend_from_slice(&[0x00, 0x90, 60, 64]);
        tr.extend_from_slice(&[0x81, 0x70, 0x90, 60, 64]); // delta 240
        tr.extend_from_slice(&[0x81, 0x70, 0x80, 60, 0]); // delta 240 -> closes the 2nd at 480
        tr.extend_from_slice(&eot());
        let score = parse_midi(&smf(480, &[tr])).unwrap();
        let evs = &score.voices[0];
        assert_eq!(evs.len(), 2);
        assert_eq!((evs[0].onset, evs[0].duration), (0, 240));
        assert_eq!((evs[1].onset, evs[1].duration), (240, 240));
    }

    #[test]
    fn smpte_division_is_unsupported() {
        let bytes = smf(0x8000 | (25 << 8) | 40, &[eot()]);
        assert!(matches!(parse_midi(&bytes), Err(Error::UnsupportedMidi(_))));
    }

    #[test]
    fn malformed_header_reports_offset() {
        let err = parse_midi(b"MThX\x00\x00\x00\x06").unwrap_err();
        match err {
            Error::MidiParse { offset, .. } => assert_eq!(offset, 0),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn truncated_track_reports_offset() {
        let mut bytes = smf(480, &[eot()]);
        bytes.truncate(bytes.len() - 2);
        let err = parse_midi(&bytes).unwrap_err();
        assert!(matches!(err, Error::MidiParse { .. }), "{err}");
    }

    #[test]
    fn signature_change_off_boundary_is_rejected() {
        let mut tr = Vec::new();
        tr.extend_from_slice(&[0x00, 0xFF, 0x58, 0x04, 4, 2, 24, 8]); // 4/4
        tr.extend_from_slice(&[0x00, 0x90, 60, 64]);
        // change at tick 960 = half a 4/4 measure
        tr.extend_from_slice(&[0x87, 0x40, 0xFF, 0x58, 0x04, 3, 2, 24, 8]);
        tr.extend_from_slice(&[0x87, 0x40, 0x80, 60, 0]);
        tr.extend_from_slice(&eot());
        let err = parse_midi(&smf(480, &[tr])).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn two_tracks_two_voices() {
        let mut t1 = Vec::new();
        t1.extend_from_slice(&[0x00, 0x90, 60, 64]);
        t1.extend_from_slice(&[0x83, 0x60, 0x80, 60, 0]);
        t1.extend_from_slice(&eot());
        let mut t2 = Vec::new();
        t2.extend_from_slice(&[0x00, 0x91, 40, 64]);
        t2.extend_from_slice(&[0x83, 0x60, 0x81, 40, 0]);
        t2.extend_from_slice(&eot());
        let score = parse_midi(&smf(480, &[t1, t2])).unwrap();
        assert_eq!(score.voices.len(), 2);
    }

    #[test]
    fn reparse_is_deterministic() {
        let mut tr = Vec::new();
        tr.extend_from_slice(&[0x00, 0xFF, 0x58, 0x04, 6, 3, 36, 8]);
        for _ in 0..3 {
            tr.extend_from_slice(&[0x00, 0x90, 60, 64]);
            tr.extend_from_slice(&[0x81, 0x70, 0x80, 60, 0]);
        }
        tr.extend_from_slice(&eot());
        let bytes = smf(480, &[tr]);
        let a = parse_midi(&bytes).unwrap();
        let b = parse_midi(&bytes).unwrap();
        assert_eq!(a.voices, b.voices);
        assert_eq!(a.time_signatures, b.time_signatures);
    }
}
