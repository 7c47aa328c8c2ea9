use thiserror::Error;

/// Errors reported by the library.
///
/// Everything here is a usage, input, or format problem that a caller can
/// fix; violated internal invariants panic instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("code width must be between 1 and {max} bits, got {width}")]
    InvalidWidth { width: usize, max: usize },

    #[error("code width mismatch: expected {expected} bits, got {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("radius {radius} out of range for {width}-bit codes")]
    RadiusOutOfRange { radius: u32, width: usize },

    #[error("bit index {index} out of range for {width}-bit code")]
    BitOutOfRange { index: usize, width: usize },

    #[error("invalid bitstring {reason}")]
    InvalidBitstring { reason: String },

    #[error("either all entries must carry a superlabel or none may")]
    MixedSuperlabels,

    #[error("relevance mode requires superlabels but the dataset has none")]
    MissingSuperlabels,

    #[error("query set is empty")]
    EmptyQuerySet,

    #[error("top-k cutoff must be at least 1")]
    ZeroCutoff,

    #[error("unknown class id {class_id}")]
    UnknownClass { class_id: u32 },

    #[error("operation requires at least two classes, dataset has {found}")]
    SingleClass { found: usize },

    #[error("histogram code at distance {distance} lies outside ball of radius {radius}")]
    CodeOutsideBall { distance: u32, radius: u32 },

    #[error("flip order must be a permutation of all {width} bit indices")]
    InvalidFlipOrder { width: usize },

    #[error("exhaustive orthodrome enumeration is limited to {limit}-bit spaces, got {width}")]
    EnumerationTooWide { width: usize, limit: usize },

    #[error("invalid loss configuration: {reason}")]
    InvalidLossConfig { reason: String },

    #[error("code vectors must have equal nonzero length, got {left} and {right}")]
    VectorLengthMismatch { left: usize, right: usize },

    #[error("code vectors must contain only finite values")]
    NonFiniteInput,

    #[error("similarity flag must be 0 or 1, got {value}")]
    InvalidSimilarityFlag { value: u8 },

    #[error("pair carries no superclass flag but the two-level loss requires one")]
    MissingSuperclassFlag,

    #[error("{origin}:{line}: {reason}")]
    TextParse {
        origin: String,
        line: usize,
        reason: String,
    },

    #[error("{origin}: byte {offset}: {reason}")]
    BinaryParse {
        origin: String,
        offset: usize,
        reason: String,
    },

    #[error("infeasible synthesis parameters: {reason}")]
    InfeasibleSynthesis { reason: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
