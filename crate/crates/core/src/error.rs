use core::fmt;

/// Errors raised by the state algebra, optics and protocol drivers.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Two operands live on different numbers of modes.
    ModeCountMismatch { expected: usize, found: usize },
    /// A mode index is out of range, or two mode indices coincide.
    InvalidMode { mode: usize, mode_count: usize },
    /// The state has (numerically) zero norm and cannot be normalized.
    ZeroState,
    /// A label on `mode` is not `+a` or `-a` for a single amplitude `a`.
    NotQubitSpace { mode: usize },
    /// A mode subset is empty or covers every mode.
    TrivialPartition,
    /// An outcome that has probability zero was conditioned on.
    ImpossibleOutcome,
    /// An argument lies outside its domain.
    InvalidArgument(&'static str),
    /// A root finder did not bracket a sign change.
    NoSignChange,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ModeCountMismatch { expected, found } => {
                write!(f, "mode count mismatch: expected {expected}, found {found}")
            }
            Error::InvalidMode { mode, mode_count } => {
                write!(f, "invalid mode index {mode} for a {mode_count}-mode state")
            }
            Error::ZeroState => f.write_str("state has zero norm"),
            Error::NotQubitSpace { mode } => {
                write!(f, "labels on mode {mode} are not of the form +a / -a")
            }
            Error::TrivialPartition => f.write_str("mode subset must be nonempty and proper"),
            Error::ImpossibleOutcome => f.write_str("conditioning on a zero-probability outcome"),
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::NoSignChange => f.write_str("no sign change in bracketing interval"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
