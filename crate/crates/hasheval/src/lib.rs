//! Evaluation toolkit for hashing-based retrieval over bit-packed binary
//! codes.
//!
//! The crate covers four concerns:
//!
//! * **Codes and retrieval** ([`code`], [`dataset`], [`mod@histogram`]):
//!   fixed-width codes up to 256 bits with popcount Hamming distance,
//!   labeled code collections, Hamming balls and radius retrieval.
//! * **Metrics** ([`metrics`]): P@K and P@d<=r, average precision with
//!   explicit tie policies and exact best/worst bounds, and the
//!   dispersion-aware LGAP/mLGAP scores built on the penalty function
//!   [`metrics::penalty_phi`]. Collisions make plain mAP ambiguous; these
//!   surfaces make the ambiguity measurable or remove it.
//! * **Geometry** ([`analysis`]): class diameters and margins, separation
//!   checks, orthodrome cycles and an empirical harness for the 2/3
//!   utilization bound on separated datasets.
//! * **Losses** ([`losses`]): pairwise training losses (squared-distance
//!   contrastive and L1 buffer-zone variants) as pure functions.
//!
//! Metric computations are generic over a [`Scalar`]; `f64` (the [`Score`]
//! alias) is the everyday instantiation and `BigRational` (the
//! [`ExactScore`] alias) runs the identical formulas exactly.
//!
//! ```
//! use hasheval::{lgap, BinaryCode, Entry, LabeledCodeSet, RelevanceMode};
//!
//! let entries = ["0000", "0001", "0011"]
//!     .iter()
//!     .map(|s| Entry::new(BinaryCode::from_bitstring(s).unwrap(), 0, None))
//!     .collect();
//! let db = LabeledCodeSet::new(4, entries).unwrap();
//! let query = Entry::new(BinaryCode::from_bitstring("0000").unwrap(), 0, None);
//! let score: f64 = lgap(&db, &query, 1, RelevanceMode::FineLabel).unwrap();
//! assert!(score > 0.0 && score <= 1.0);
//! ```

pub mod analysis;
pub mod code;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod histogram;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod scalar;
pub mod seeding;
pub mod synth;

pub use code::{ball_volume, hamming_distance, BinaryCode, HammingBall, MAX_WIDTH};
pub use dataset::{retrieve_within, Entry, LabeledCodeSet};
pub use error::{Error, Result};
pub use histogram::{histogram, CodeHistogram};
pub use metrics::{
    ap_bounds, average_precision, indicator, lgap, mean_average_precision, mlgap, penalty_phi,
    precision_at_k, precision_at_radius, RankedRetrieval, RelevanceMode, TiePolicy,
};
pub use scalar::Scalar;

/// Everyday scalar for metric values.
pub type Score = f64;

/// Exact scalar: the same metric formulas in arbitrary-precision rational
/// arithmetic.
pub type ExactScore = num_rational::BigRational;
