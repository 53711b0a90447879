use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} lies outside the domain [{lo}, {hi}]")]
    Domain { point: f64, lo: f64, hi: f64 },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("structural error: {0}")]
    Structure(String),

    #[error("ordering error at line {line}: {message}")]
    Ordering { line: u64, message: String },

    #[error("unknown exercise `{0}`")]
    UnknownExercise(String),

    #[error("POI index {0} out of range 0..=20")]
    PoiOutOfRange(usize),

    #[error("degenerate geometry at t = {time}: both side distances are zero")]
    DegenerateGeometry { time: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no landmark: {0}")]
    NoLandmark(String),

    #[error("invalid landmarks: {0}")]
    InvalidLandmarks(String),

    #[error("invalid knots: {0}")]
    InvalidKnots(String),

    #[error("rank-deficient design (rank {rank} < {k} coefficients); use a positive smoothing lambda")]
    RankDeficient { rank: usize, k: usize },

    #[error("functional data do not share a basis")]
    BasisMismatch,

    #[error("degenerate cohort: {0}")]
    DegenerateCohort(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("HB grade {0} outside 1..=6")]
    InvalidGrade(i64),

    #[error("missing labels: {0}")]
    MissingLabels(String),

    #[error("cannot map {k} clusters onto a ladder of {ladder} grades")]
    UnsupportedGradeCount { k: usize, ladder: usize },

    #[error("correlation undefined for constant input")]
    UndefinedCorrelation,

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("mixed item representations: {0}")]
    MixedRepresentation(String),

    #[error("configuration conflict: {0}")]
    Conflict(String),

    #[error("internal numerical failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => "parse",
            Error::Structure(_) | Error::Ordering { .. } | Error::MixedRepresentation(_) => {
                "schema"
            }
            Error::Io(_) => "io",
            Error::Domain { .. }
            | Error::InvalidCurve(_)
            | Error::UnknownExercise(_)
            | Error::PoiOutOfRange(_)
            | Error::InvalidKnots(_)
            | Error::InvalidParameter(_)
            | Error::InvalidGrade(_)
            | Error::OutOfRange(_)
            | Error::InvalidLandmarks(_) => "invalid-input",
            Error::MissingLabels(_) | Error::SizeMismatch(_) | Error::BasisMismatch => "mismatch",
            Error::UnsupportedGradeCount { .. } => "unsupported",
            Error::Conflict(_) => "config",
            Error::DegenerateGeometry { .. }
            | Error::InsufficientData(_)
            | Error::NoLandmark(_)
            | Error::RankDeficient { .. }
            | Error::DegenerateCohort(_)
            | Error::UndefinedCorrelation
            | Error::Internal(_) => "numerical",
        }
    }
}
