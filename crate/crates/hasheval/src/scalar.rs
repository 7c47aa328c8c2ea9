//! Scalar abstraction for metric values.
//!
//! Every retrieval metric in this crate is a ratio of integer counts (or a
//! sum of such ratios), so the computations are generic over the scalar
//! used to carry them. `f64` is the everyday choice; `BigRational` runs the
//! same formulas in exact arithmetic, which the test suites use to
//! cross-check the floating-point path.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

use crate::error::{Error, Result};

/// Numeric type that metric computations are generic over.
pub trait Scalar: Num + PartialOrd + Clone {
    /// Exact conversion from a count.
    fn from_count(n: u64) -> Self;

    /// The ratio `num / den` where the operands may exceed machine words
    /// (ball volumes in wide code spaces). `den` must be nonzero.
    fn from_big_ratio(num: &BigUint, den: &BigUint) -> Self;

    /// The ratio of two counts; `den` must be nonzero.
    fn ratio(num: u64, den: u64) -> Self {
        debug_assert!(den != 0);
        Self::from_count(num) / Self::from_count(den)
    }
}

impl Scalar for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }

    fn from_big_ratio(num: &BigUint, den: &BigUint) -> Self {
        // 256-bit spaces keep both operands far below f64::MAX
        let n = num.to_f64().unwrap_or(f64::INFINITY);
        let d = den.to_f64().unwrap_or(f64::INFINITY);
        if n == 0.0 {
            0.0
        } else {
            n / d
        }
    }
}

impl Scalar for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }

    fn from_big_ratio(num: &BigUint, den: &BigUint) -> Self {
        f64::from_big_ratio(num, den) as f32
    }
}

impl Scalar for BigRational {
    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_big_ratio(num: &BigUint, den: &BigUint) -> Self {
        BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
    }
}

/// Mean of the values summed in a canonical (sorted ascending) order, so
/// the result is bit-identical under any permutation of the inputs. This is
/// the fixed reduction order every aggregate in this crate uses.
pub fn deterministic_mean<S: Scalar>(mut values: Vec<S>) -> Result<S> {
    if values.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    values.sort_by(|a, b| {
        a.partial_cmp(b)
            .expect("metric values are finite and totally ordered")
    });
    let n = values.len() as u64;
    let sum = values.into_iter().fold(S::zero(), |acc, v| acc + v);
    Ok(sum / S::from_count(n))
}
