//! Error type shared by every module in the crate.

use thiserror::Error;

/// All failure modes surfaced by the library.
///
/// Variants split into validation failures (bad geometry, bad files, bad
/// arguments) and numerical failures (degenerate inputs an otherwise valid
/// computation cannot proceed on). The CLI maps the two groups to distinct
/// exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Scene validation failed; the message names the first violated field.
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    /// A frequency was zero or negative.
    #[error("frequency must be positive, got {0}")]
    NonpositiveFrequency(f64),

    /// A wavenumber was zero or negative.
    #[error("wavenumber must be positive, got {0}")]
    NonpositiveWavenumber(f64),

    /// Source and observation point coincide; the field kernel is singular.
    #[error("zero separation between source and observation point")]
    ZeroSeparation,

    /// A reflection coefficient magnitude left the passive range [0, 1].
    #[error("reflection magnitude for wall {wall} is {magnitude}, must be at most 1")]
    ReflectionMagnitude { wall: &'static str, magnitude: f64 },

    /// A map that must have a positive maximum is all zero.
    #[error("degenerate map: zero maximum")]
    DegenerateMap,

    /// A map has zero variance, so correlation against it is undefined.
    #[error("constant map: correlation undefined")]
    ConstantMap,

    /// Two maps that must share a grid have different cell counts.
    #[error("map dimensions differ: {a_nu}x{a_nv} vs {b_nu}x{b_nv}")]
    DimensionMismatch {
        a_nu: usize,
        a_nv: usize,
        b_nu: usize,
        b_nv: usize,
    },

    /// A map violates a structural invariant (unit, sign, finiteness, meta).
    #[error("invalid map: {0}")]
    InvalidMap(String),

    /// Shift-search parameters are inconsistent with the map dimensions.
    #[error("invalid shift search: {0}")]
    InvalidShiftSearch(String),

    /// Every candidate shift was rejected by the minimum-overlap constraint.
    #[error("no shift satisfies the overlap constraint")]
    NoAdmissibleShift,

    /// Calibration configuration is unusable.
    #[error("invalid calibration config: {0}")]
    InvalidCalibration(String),

    /// Synthetic-reference specification is unusable.
    #[error("invalid synthesis spec: {0}")]
    InvalidSynth(String),

    /// A text input failed to parse; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// A required key is absent from a key-value file.
    #[error("{path}: missing key `{key}`")]
    MissingKey { path: String, key: String },

    /// An underlying I/O operation failed.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Wraps an I/O error with the path it occurred on.
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for failures of the computation itself rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroSeparation
                | Error::DegenerateMap
                | Error::ConstantMap
                | Error::NoAdmissibleShift
        )
    }
}
