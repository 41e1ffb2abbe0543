use std::fmt;

use stratagraph::Error;

/// Process exit codes, one per failing stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Options,
    Io,
    Reconstruct,
    Fit,
}

impl Stage {
    pub fn code(self) -> u8 {
        match self {
            Stage::Options => 1,
            Stage::Io => 2,
            Stage::Reconstruct => 3,
            Stage::Fit => 4,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Stage::Options => "options",
            Stage::Io => "io",
            Stage::Reconstruct => "reconstruct",
            Stage::Fit => "fit",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
}

impl Failure {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        Failure {
            stage,
            message: message.into(),
        }
    }

    pub fn options(message: impl Into<String>) -> Self {
        Failure::new(Stage::Options, message)
    }

    /// Anything that goes wrong while loading an input is an input failure.
    pub fn input(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::UnknownIndex(_) => Failure::from(e),
            other => Failure::new(Stage::Io, other.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let stage = match &e {
            Error::InvalidParameter(_) | Error::UnknownIndex(_) => Stage::Options,
            Error::Io { .. } | Error::Parse { .. } => Stage::Io,
            _ => Stage::Reconstruct,
        };
        Failure::new(stage, e.to_string())
    }
}

impl fmt::Display for Failure {
    /// `error[<stage>]: <message>` on one line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message.replace(['\n', '\r'], " ");
        write!(f, "error[{}]: {}", self.stage.tag(), one_line)
    }
}
