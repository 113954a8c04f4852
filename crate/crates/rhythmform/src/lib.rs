//! Rhythmic complexity analysis for symbolic scores.
//!
//! Three metrics over the inter-onset intervals of a piece:
//!
//! * **heterogeneity** — normalized permutation entropy over tie-aware
//!   ordinal patterns ([`heterogeneity`]),
//! * **syncopation** — earth mover's distance from the per-measure
//!   off-beat-proportion histogram to the all-on-beat histogram
//!   ([`syncopation`]),
//! * **structure** — communities and degree statistics of the natural
//!   visibility graph of the duration series ([`visibility`]).
//!
//! [`score`] parses Standard MIDI Files and a JSON rhythm format and turns
//! them into onset and interval series; [`dynamics`] evaluates the metrics
//! statically (whole piece) or over a sliding measure window; [`export`]
//! renders results as JSON, CSV, DOT and edge lists.

pub mod dynamics;
pub mod error;
pub mod export;
pub mod heterogeneity;
pub mod score;
pub mod syncopation;
pub mod visibility;

pub use error::{Error, Result};
