use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("zero-norm state")]
    ZeroNorm,

    #[error("improper party: {0}")]
    ImproperParty(String),

    #[error("leg dimension mismatch: {0}")]
    LegDimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("layout inconsistency at act #{act} leg #{leg}: interaction leg has dimension {expected}, free #{free} has dimension {found}")]
    LayoutMismatch {
        act: usize,
        leg: usize,
        free: usize,
        expected: usize,
        found: usize,
    },

    #[error("layout error: duplicate leg ordinal {ordinal} in act #{act}")]
    DuplicateLeg { act: usize, ordinal: usize },

    #[error("layout error: act #{act} refers to free #{ordinal}, but only {count} frees are declared")]
    OrdinalOutOfRange {
        act: usize,
        ordinal: usize,
        count: usize,
    },

    #[error("layout error: act #{act} wires {found} legs to an interaction with {expected} legs")]
    ArityMismatch {
        act: usize,
        expected: usize,
        found: usize,
    },

    #[error("layout error: free #{0} is not referenced by any act")]
    UnreferencedFree(usize),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("stepper stalled at t = {t}: stepsize {dt:e} fell below {min:e}")]
    StepperStalled { t: f64, dt: f64, min: f64 },

    #[error("Master-equation evolution does not work with non-unitary interaction picture")]
    NonUnitaryMaster,

    #[error("negativity requires a density-operator evolution")]
    NegativityRequiresDensity,

    #[error("Fock index exceeds cutoff: {index} >= {cutoff}")]
    FockExceedsCutoff { index: usize, cutoff: usize },

    #[error("invalid parameter value: {0}")]
    InvalidParameter(String),

    #[error("unknown parameter {0}")]
    UnknownParameter(String),

    #[error("missing value for parameter {0}")]
    MissingValue(String),

    #[error("cannot parse {token:?} as {expected}")]
    BadValue { token: String, expected: String },

    #[error("parameter {0} registered twice")]
    DuplicateParameter(String),

    #[error("malformed complex number {0:?}")]
    MalformedComplex(String),

    #[error("unexpected argument {0:?}")]
    UnexpectedArgument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output error: {0}")]
    Output(#[from] std::io::Error),

    #[error("corrupt sv file {path}: {reason}")]
    CorruptSv { path: PathBuf, reason: String },

    #[error("state/system dimension mismatch: state has {state:?}, system has {system:?}")]
    StateSystemMismatch {
        state: Vec<usize>,
        system: Vec<usize>,
    },
}

impl Error {
    /// Errors caused by the command line rather than by the simulation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::UnknownParameter(_)
                | Error::MissingValue(_)
                | Error::BadValue { .. }
                | Error::DuplicateParameter(_)
                | Error::MalformedComplex(_)
                | Error::UnexpectedArgument(_)
                | Error::InvalidParameter(_)
                | Error::NegativityRequiresDensity
        )
    }
}
