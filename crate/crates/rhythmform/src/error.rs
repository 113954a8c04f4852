use thiserror::Error;

/// Errors produced by parsing and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem in a Standard MIDI File, with the byte offset of the defect.
    #[error("midi parse error at byte {offset}: {message}")]
    MidiParse { offset: usize, message: String },

    /// Valid SMF content this crate deliberately does not handle (e.g. SMPTE division).
    #[error("unsupported midi feature: {0}")]
    UnsupportedMidi(String),

    /// The JSON rhythm document does not conform to the schema; names the offending field.
    #[error("invalid rhythm json ({field}): {message}")]
    JsonSchema { field: String, message: String },

    /// A parsed value violates an invariant (non-positive duration, unsorted onsets, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller-supplied argument is out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The series is too short for the requested operation. Dynamics converts
    /// this into an explicit marker instead of failing the whole run.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The score contains no onsets at all.
    #[error("empty piece: {0}")]
    EmptyPiece(String),

    /// The score spans fewer full measures than one analysis window.
    #[error("insufficient length: {0}")]
    InsufficientLength(String),

    /// Reports produced under different configurations cannot be compared.
    #[error("comparability error: {0}")]
    Comparability(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
