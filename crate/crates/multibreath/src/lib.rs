//! Multi-person breathing rate estimation from WiFi CSI phase differences.
//!
//! The pipeline turns a packets x subcarriers phase-difference matrix into
//! per-person breathing rates:
//!
//! 1. [`model`] — synthetic scene generator standing in for the radio link,
//!    plus the raw per-antenna phase error model it abstracts.
//! 2. [`preprocess`] — Hampel-filter calibration (detrend + denoise) and
//!    Hankelization of every subcarrier into a third-order CSI tensor.
//! 3. [`cpd`] — tensor algebra and canonical polyadic decomposition via
//!    alternating least squares, with the k-rank uniqueness diagnostic.
//! 4. [`matching`] — pairing of the decomposed signals through
//!    autocorrelation, dynamic time warping, and stable roommate matching.
//! 5. [`estimate`] — fusion, peak detection, rate computation, scoring, and
//!    the FFT baseline the tensor route outperforms.
//! 6. [`cli`] — file formats and the synth/run/sweep commands behind the
//!    `multibreath` binary.
//!
//! See the `examples/` directory for one runnable walkthrough per stage.

pub mod cli;
pub mod cpd;
pub mod error;
pub mod estimate;
mod linalg;
pub mod matching;
pub mod model;
pub mod preprocess;

pub use error::{Error, Result};
