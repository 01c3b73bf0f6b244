//! Neuromorphic detection of high-frequency oscillations (HFOs) in
//! intracranial EEG.
//!
//! The chain is: band-pass filtering into the ripple (80–250 Hz) and fast
//! ripple (250–500 Hz) bands, baseline-adapted asynchronous delta modulation
//! into UP/DN spike streams, an event-driven two-layer spiking network with
//! mismatch-sampled time constants, and ensemble event detection. The
//! [`analytics`] module turns detections into per-channel rates, test-retest
//! scores, HFO areas and outcome-prediction metrics.

// `!(x > 0.0)` is how NaN is rejected alongside the range check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adm;
pub mod analytics;
pub mod error;
pub mod filters;
pub mod headstage;
pub mod pipeline;
pub mod signal_io;
pub mod snn;

pub use adm::{AdmConfig, Polarity, SpikeTrain};
pub use analytics::{Classification, HfoEvent, HfoVector, PredictionMetrics};
pub use error::{Error, Result};
pub use filters::{BandName, BandSpec, BiquadCoeffs};
pub use pipeline::{AdmSettings, ChainSettings, DetectionSettings};
pub use signal_io::{EventAnnotation, Recording, RecordingFormat, SynthSpec};
pub use snn::{NetworkConfig, NetworkParams, OutputRaster};
