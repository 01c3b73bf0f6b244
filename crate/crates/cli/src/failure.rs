//! Error kinds and their process exit codes.

use std::fmt;

use hfo_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Data,
    Invariant,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Data => 3,
            Kind::Invariant => 4,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn failure(kind: Kind, message: impl Into<String>) -> anyhow::Error {
    Failure {
        kind,
        message: message.into(),
    }
    .into()
}

pub fn config(message: impl Into<String>) -> anyhow::Error {
    failure(Kind::Config, message)
}

pub fn data(message: impl Into<String>) -> anyhow::Error {
    failure(Kind::Data, message)
}

pub fn invariant(message: impl Into<String>) -> anyhow::Error {
    failure(Kind::Invariant, message)
}

/// Tags any error as a configuration problem, keeping its message.
pub fn as_config(e: impl fmt::Display) -> anyhow::Error {
    config(e.to_string())
}

fn core_kind(e: &CoreError) -> Kind {
    use CoreError::*;
    match e {
        InvalidSynthSpec(_)
        | EventPastEnd { .. }
        | BandEdgeAboveNyquist { .. }
        | InvalidBand(_)
        | InvalidAdmConfig(_)
        | InvalidNetworkConfig(_)
        | StepTooCoarse { .. }
        | EmptyGrid => Kind::Config,
        Io { .. }
        | MalformedHeader(_)
        | RaggedRow { .. }
        | NonNumeric { .. }
        | NonFinite { .. }
        | SampleRateTooLow(_)
        | InvalidRecording(_)
        | InvalidAnnotation(_)
        | SignalTooShort { .. }
        | NonPositiveBaseline(_)
        | ChannelMismatch(_)
        | InvalidInput(_) => Kind::Data,
        UnsortedSpikes { .. } => Kind::Invariant,
    }
}

/// The first tagged cause decides; untagged I/O is a data error and anything
/// else is treated as a broken invariant.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.kind.code();
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_kind(e).code();
        }
        if cause.is::<std::io::Error>() {
            return Kind::Data.code();
        }
    }
    Kind::Invariant.code()
}
