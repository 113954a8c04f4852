//! Syncopation: the transport cost from the observed off-beat-proportion
//! histogram to the all-on-beat histogram, normalized to `[0, 1]`.

use crate::error::{Error, Result};

/// The beat grid inside one measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeatSpec {
    pub beat_length: u64,
    /// Ticks of slack around the grid, for quantization noise in performed MIDI.
    pub tolerance: u64,
}

impl BeatSpec {
    pub fn new(beat_length: u64, tolerance: u64) -> Result<Self> {
        if beat_length == 0 {
            return Err(Error::Argument("beat length must be positive".into()));
        }
        if tolerance >= beat_length.div_ceil(2) {
            return Err(Error::Argument(format!(
                "tolerance {tolerance} must be below half the beat length {beat_length}"
            )));
        }
        Ok(Self { beat_length, tolerance })
    }
}

/// How measures without any onset enter the histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyMeasureRule {
    /// An empty measure has no notes to be on or off the beat.
    #[default]
    Skip,
    /// Count it as proportion zero.
    Zero,
}

/// Distribution of per-measure off-beat proportions over equally spaced bins;
/// bin `k` stands for proportions nearest `k / (bins - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffbeatHistogram {
    mass: Vec<f64>,
}

impl OffbeatHistogram {
    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// All mass on the first bin: every note of every measure on the beat.
    pub fn all_on_beat(bins: usize) -> Self {
        let mut mass = vec![0.0; bins];
        mass[0] = 1.0;
        Self { mass }
    }

    /// Construct directly from masses (tests and oracles).
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        if mass.len() < 2 {
            return Err(Error::Argument("histogram needs at least 2 bins".into()));
        }
        Ok(Self { mass })
    }
}

/// Fraction of onsets in one measure that do not start on an integer multiple
/// of the beat length (within tolerance), measured from the measure start.
pub fn offbeat_proportion(onsets: &[u64], measure_start: u64, measure_end: u64, beat: &BeatSpec) -> Result<Option<f64>> {
    if onsets.is_empty() {
        return Ok(None);
    }
    let mut off = 0usize;
    for &onset in onsets {
        if onset < measure_start || onset >= measure_end {
            return Err(Error::Argument(format!(
                "onset {onset} outside measure [{measure_start}, {measure_end})"
            )));
        }
        let rem = (onset - measure_start) % beat.beat_length;
        let distance = rem.min(beat.beat_length - rem);
        if distance > beat.tolerance {
            off += 1;
        }
    }
    Ok(Some(off as f64 / onsets.len() as f64))
}

/// Bin proportions to the nearest center `k / (bins - 1)`; ties go to the
/// lower bin. Mass is normalized to 1.
pub fn offbeat_histogram(proportions: &[f64], bins: usize) -> Result<OffbeatHistogram> {
    if bins < 2 {
        return Err(Error::Argument(format!("need at least 2 bins, got {bins}")));
    }
    if proportions.is_empty() {
        return Err(Error::EmptyPiece("no measures contributed off-beat proportions".into()));
    }
    let mut mass = vec![0.0; bins];
    for &p in proportions {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("proportion {p} outside [0, 1]")));
        }
        let scaled = p * (bins - 1) as f64;
        let lo = scaled.floor();
        let hi = (lo + 1.0).min((bins - 1) as f64);
        let k = if scaled - lo <= hi - scaled { lo } else { hi };
        mass[k as usize] += 1.0;
    }
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    Ok(OffbeatHistogram { mass })
}

/// One-dimensional earth mover's distance with unit distance between adjacent
/// bins: the sum of absolute cumulative differences.
pub fn emd_1d(p: &OffbeatHistogram, r: &OffbeatHistogram) -> Result<f64> {
    if p.bins() != r.bins() {
        return Err(Error::Argument(format!(
            "histograms have different bin counts: {} vs {}",
            p.bins(),
            r.bins()
        )));
    }
    let mut cum = 0.0;
    let mut cost = 0.0;
    for (a, b) in p.mass.iter().zip(&r.mass) {
        cum += a - b;
        cost += cum.abs();
    }
    Ok(cost)
}

/// Syncopation `Q = EMD(P_off, all-on-beat) / (bins - 1)`, in `[0, 1]`.
pub fn syncopation(p_off: &OffbeatHistogram) -> Result<f64> {
    let reference = OffbeatHistogram::all_on_beat(p_off.bins());
    Ok(emd_1d(p_off, &reference)? / (p_off.bins() - 1) as f64)
}
