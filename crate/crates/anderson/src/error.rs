use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: dim={dim}, half_side={half_side} (need dim >= 1 and half_side >= 1)")]
    InvalidLattice { dim: i64, half_side: i64 },

    #[error("box too large: (2*{half_side}+1)^{dim} overflows")]
    BoxTooLarge { dim: i64, half_side: i64 },

    #[error("invalid disorder density: {0}")]
    InvalidDisorder(String),

    #[error("potential length {got} does not match box volume {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("eigensolver failed to converge at eigenvalue index {index} after {iterations} iterations")]
    EigenNonConvergence { index: usize, iterations: usize },

    #[error("inertia count broke down near E={energy}: pivot below {floor:e} even after {retries} upward shifts")]
    CountBreakdown { energy: f64, floor: f64, retries: usize },

    #[error("inverse iteration stagnated for eigenvalue {value} (residual {residual:e})")]
    InverseIterationStagnation { value: f64, residual: f64 },

    #[error("eigenvectors required but not present")]
    MissingEigenvectors,

    #[error("zero vector has no localization center")]
    ZeroVector,

    #[error("energy {energy} outside calibrated range [{min}, {max}]")]
    OutsideCalibratedRange { energy: f64, min: f64, max: f64 },

    #[error("density nonpositive at reference energy {energy}: nu={nu}")]
    DensityNonpositive { energy: f64, nu: f64 },

    #[error("inadmissible exponent beta={beta}: need {lower} < beta < 1 for dim {dim}")]
    InadmissibleExponent { beta: f64, lower: f64, dim: usize },

    #[error("intervals not disjoint: [{a0}, {a1}] overlaps [{b0}, {b1}]")]
    IntervalsNotDisjoint { a0: f64, a1: f64, b0: f64, b1: f64 },

    #[error("boxes not disjoint: product boxes {first} and {second} overlap")]
    BoxesNotDisjoint { first: usize, second: usize },

    #[error("insufficient levels: need at least 2, got {got}")]
    InsufficientLevels { got: usize },

    #[error("insufficient centers: need at least 2, got {got}")]
    InsufficientCenters { got: usize },

    #[error("empty interval or negative length: [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },

    #[error("interval [{lo}, {hi}] carries no spectral mass in the calibrated table")]
    EmptyMass { lo: f64, hi: f64 },

    #[error("grid does not cover the spectrum envelope [{env_lo}, {env_hi}]: grid spans [{grid_lo}, {grid_hi}]")]
    GridTooSmall {
        env_lo: f64,
        env_hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("config validation failed:\n{}", .0.join("\n"))]
    ConfigValidation(Vec<String>),

    #[error("density-of-states table hash mismatch: expected {expected}, file has {actual}")]
    DosTableHashMismatch { expected: String, actual: String },

    #[error("malformed density-of-states table file: {0}")]
    MalformedDosTable(String),

    #[error("realization {index} failed after {retries} replacement seeds: {source}")]
    RealizationFailed {
        index: usize,
        retries: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
