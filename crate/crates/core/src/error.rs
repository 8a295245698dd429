use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The variant name is the stable identifier printed by the command-line
/// front end; see [`Error::name`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptyTable: cylinder table has no admissible words")]
    EmptyTable,
    #[error("InsufficientDepths: need at least {needed}, got {got}")]
    InsufficientDepths { needed: usize, got: usize },
    #[error("NoSignChange: pressure does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("NotOpen: P(-phi_u) = {pressure} is not negative")]
    NotOpen { pressure: f64 },
    #[error("NoCycle: word graph is acyclic")]
    NoCycle,
    #[error("InvalidSubshift: {0}")]
    InvalidSubshift(String),
    #[error("InvalidTable: {0}")]
    InvalidTable(String),
    #[error("InvalidBaker: {0}")]
    InvalidBaker(String),
    #[error("InvalidDiskConfig: {0}")]
    InvalidDiskConfig(String),
    #[error("InvalidWord: {0}")]
    InvalidWord(String),
    #[error("GrazingHit: |eta| = {eta} at the image")]
    GrazingHit { eta: f64 },
    #[error("NoConvergence: {0}")]
    NoConvergence(String),
    #[error("ShadowedPath: segment {segment} of word {word} crosses disk {disk}")]
    ShadowedPath { word: String, segment: usize, disk: usize },
    #[error("NotHyperbolic: |trace| = {trace} <= 2")]
    NotHyperbolic { trace: f64 },
    #[error("TooFewSurvivors: fit window [1e-3, 1e-1] is empty")]
    TooFewSurvivors,
    #[error("BadDimension: {0}")]
    BadDimension(String),
    #[error("DimensionMismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("DimensionCap: N = {n} exceeds cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("DegenerateCounts: only {nonzero} nonzero counts")]
    DegenerateCounts { nonzero: usize },
    #[error("NotSymplectic: det = {det}")]
    NotSymplectic { det: f64 },
    #[error("EmptyData: nothing to plot")]
    EmptyData,
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error("ConfigParse: {0}")]
    ConfigParse(String),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// Stable variant name, e.g. `"BadDimension"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyTable => "EmptyTable",
            Error::InsufficientDepths { .. } => "InsufficientDepths",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::NotOpen { .. } => "NotOpen",
            Error::NoCycle => "NoCycle",
            Error::InvalidSubshift(_) => "InvalidSubshift",
            Error::InvalidTable(_) => "InvalidTable",
            Error::InvalidBaker(_) => "InvalidBaker",
            Error::InvalidDiskConfig(_) => "InvalidDiskConfig",
            Error::InvalidWord(_) => "InvalidWord",
            Error::GrazingHit { .. } => "GrazingHit",
            Error::NoConvergence(_) => "NoConvergence",
            Error::ShadowedPath { .. } => "ShadowedPath",
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::TooFewSurvivors => "TooFewSurvivors",
            Error::BadDimension(_) => "BadDimension",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DimensionCap { .. } => "DimensionCap",
            Error::DegenerateCounts { .. } => "DegenerateCounts",
            Error::NotSymplectic { .. } => "NotSymplectic",
            Error::EmptyData => "EmptyData",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ConfigParse(_) => "ConfigParse",
            Error::Io(_) => "Io",
            Error::Serialization(_) => "Serialization",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
