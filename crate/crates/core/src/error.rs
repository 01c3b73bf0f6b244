use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, field {field}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        field: usize,
        value: String,
    },

    #[error("row {row}, field {field}: sample is not finite")]
    NonFinite { row: usize, field: usize },

    #[error("sample rate {0} Hz is below the 1000 Hz minimum")]
    SampleRateTooLow(f64),

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),

    #[error(
        "event {index} ({start_s} s + {length_s} s) extends past the {duration_s} s recording"
    )]
    EventPastEnd {
        index: usize,
        start_s: f64,
        length_s: f64,
        duration_s: f64,
    },

    #[error("invalid synthesis spec: {0}")]
    InvalidSynthSpec(String),

    #[error("band edge {edge_hz} Hz is not below the Nyquist frequency {nyquist_hz} Hz")]
    BandEdgeAboveNyquist { edge_hz: f64, nyquist_hz: f64 },

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("signal is {got_s} s long; baseline estimation needs at least {need_s} s")]
    SignalTooShort { got_s: f64, need_s: f64 },

    #[error("baseline must be positive, got {0}")]
    NonPositiveBaseline(f64),

    #[error("invalid ADM configuration: {0}")]
    InvalidAdmConfig(String),

    #[error("spike times are not strictly increasing at index {index}")]
    UnsortedSpikes { index: usize },

    #[error("invalid network configuration: {0}")]
    InvalidNetworkConfig(String),

    #[error("reference step {dt_s} s is coarser than {max_s} s (a tenth of the fastest synapse)")]
    StepTooCoarse { dt_s: f64, max_s: f64 },

    #[error("HFO vectors disagree on channel set: {0}")]
    ChannelMismatch(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("parameter grid is empty")]
    EmptyGrid,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
