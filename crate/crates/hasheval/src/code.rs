//! Bit-packed binary hash codes and Hamming-space primitives.
//!
//! A [`BinaryCode`] holds a fixed-width code of 1 to 256 bits packed into
//! four machine words, so equality, hashing and Hamming distance are a few
//! XOR/popcount instructions. Bit index 0 is the least significant bit of
//! word 0; when rendered as a bitstring the leftmost character is bit 0.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Maximum supported code width in bits.
pub const MAX_WIDTH: usize = 256;

const WORDS: usize = MAX_WIDTH / 64;

/// A fixed-width binary hash code.
///
/// Storage bits at positions >= the width are always zero, so two codes
/// compare equal iff their widths match and all payload bits match.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryCode {
    width: u16,
    words: [u64; WORDS],
}

impl BinaryCode {
    /// All-zero code of the given width.
    pub fn zeros(width: usize) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::InvalidWidth {
                width,
                max: MAX_WIDTH,
            });
        }
        Ok(Self {
            width: width as u16,
            words: [0; WORDS],
        })
    }

    /// Builds a code from the low `width` bits of `value`.
    pub fn from_value(width: usize, value: u64) -> Result<Self> {
        let mut code = Self::zeros(width)?;
        if width < 64 && value >> width != 0 {
            return Err(Error::BitOutOfRange {
                index: 63 - value.leading_zeros() as usize,
                width,
            });
        }
        code.words[0] = value;
        Ok(code)
    }

    /// Parses a bitstring of '0'/'1' characters; the leftmost character is
    /// bit index 0.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let mut code = Self::zeros(s.len())?;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => code.words[i / 64] |= 1 << (i % 64),
                other => {
                    return Err(Error::InvalidBitstring {
                        reason: format!("character {:?} at position {}", other, i),
                    })
                }
            }
        }
        Ok(code)
    }

    /// Unpacks a code from LSB-first bytes (bit index 0 = LSB of byte 0).
    /// Padding bits beyond the width must be zero.
    pub fn from_le_bytes(width: usize, bytes: &[u8]) -> Result<Self> {
        let mut code = Self::zeros(width)?;
        let expected = width.div_ceil(8);
        if bytes.len() != expected {
            return Err(Error::InvalidBitstring {
                reason: format!(
                    "expected {} packed bytes for width {}, got {}",
                    expected,
                    width,
                    bytes.len()
                ),
            });
        }
        for (i, &b) in bytes.iter().enumerate() {
            code.words[i / 8] |= u64::from(b) << ((i % 8) * 8);
        }
        if code.clear_padding() {
            return Err(Error::InvalidBitstring {
                reason: format!("nonzero padding bits beyond width {}", width),
            });
        }
        Ok(code)
    }

    /// Packs the code into ceil(width/8) LSB-first bytes.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let n = self.width().div_ceil(8);
        (0..n)
            .map(|i| (self.words[i / 8] >> ((i % 8) * 8)) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn bit(&self, index: usize) -> bool {
        debug_assert!(index < self.width());
        self.words[index / 64] >> (index % 64) & 1 == 1
    }

    /// Returns a copy with the bit at `index` flipped.
    pub fn with_bit_flipped(&self, index: usize) -> Result<Self> {
        if index >= self.width() {
            return Err(Error::BitOutOfRange {
                index,
                width: self.width(),
            });
        }
        let mut out = *self;
        out.words[index / 64] ^= 1 << (index % 64);
        Ok(out)
    }

    /// Bitwise complement over the code's width.
    pub fn complement(&self) -> Self {
        let mut out = *self;
        for w in &mut out.words {
            *w = !*w;
        }
        out.clear_padding();
        out
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Distance without a width check; callers must guarantee equal widths.
    pub(crate) fn distance(&self, other: &Self) -> u32 {
        debug_assert_eq!(self.width, other.width);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    /// Zeroes any bits at positions >= width; reports whether any were set.
    fn clear_padding(&mut self) -> bool {
        let mut had = false;
        let w = self.width();
        for (i, word) in self.words.iter_mut().enumerate() {
            let lo = i * 64;
            if lo >= w {
                had |= *word != 0;
                *word = 0;
            } else if lo + 64 > w {
                let mask = (1u64 << (w - lo)) - 1;
                had |= *word & !mask != 0;
                *word &= mask;
            }
        }
        had
    }
}

impl fmt::Display for BinaryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryCode({})", self)
    }
}

/// Codes order by width, then by numeric value (bit i weighs 2^i).
impl Ord for BinaryCode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl PartialOrd for BinaryCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Number of differing bit positions between two equal-width codes.
pub fn hamming_distance(a: &BinaryCode, b: &BinaryCode) -> Result<u32> {
    if a.width() != b.width() {
        return Err(Error::WidthMismatch {
            expected: a.width(),
            found: b.width(),
        });
    }
    Ok(a.distance(b))
}

/// Number of codes within Hamming radius `r` of a center in `k`-bit space:
/// sum of C(k, i) for i = 0..=r. Exact for every supported width.
pub fn ball_volume(k: usize, r: u32) -> Result<BigUint> {
    if k == 0 || k > MAX_WIDTH {
        return Err(Error::InvalidWidth {
            width: k,
            max: MAX_WIDTH,
        });
    }
    if r as usize > k {
        return Err(Error::RadiusOutOfRange {
            radius: r,
            width: k,
        });
    }
    let mut total = BigUint::one();
    let mut binom = BigUint::one();
    for i in 1..=r as usize {
        binom = binom * BigUint::from(k - i + 1) / BigUint::from(i);
        total += &binom;
    }
    Ok(total)
}

/// A Hamming ball: all codes within `radius` of `center`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HammingBall {
    center: BinaryCode,
    radius: u32,
}

impl HammingBall {
    pub fn new(center: BinaryCode, radius: u32) -> Result<Self> {
        if radius as usize > center.width() {
            return Err(Error::RadiusOutOfRange {
                radius,
                width: center.width(),
            });
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> &BinaryCode {
        &self.center
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn volume(&self) -> BigUint {
        ball_volume(self.center.width(), self.radius).expect("ball invariants hold")
    }

    pub fn contains(&self, code: &BinaryCode) -> Result<bool> {
        Ok(hamming_distance(&self.center, code)? <= self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_identity_and_antipode() {
        let a = BinaryCode::from_bitstring("0110").unwrap();
        assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
        assert_eq!(hamming_distance(&a, &a.complement()).unwrap(), 4);
    }

    #[test]
    fn distance_counts_differing_positions() {
        let a = BinaryCode::from_bitstring("0110").unwrap();
        let b = BinaryCode::from_bitstring("1111").unwrap();
        assert_eq!(hamming_distance(&a, &b).unwrap(), 2);
    }

    #[test]
    fn distance_rejects_width_mismatch() {
        let a = BinaryCode::from_bitstring("0110").unwrap();
        let b = BinaryCode::from_bitstring("01101").unwrap();
        assert!(matches!(
            hamming_distance(&a, &b),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn ball_volumes_match_binomial_sums() {
        assert_eq!(ball_volume(4, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(ball_volume(4, 1).unwrap(), BigUint::from(5u32));
        assert_eq!(ball_volume(4, 2).unwrap(), BigUint::from(11u32));
        assert_eq!(ball_volume(4, 4).unwrap(), BigUint::from(16u32));
        assert_eq!(ball_volume(256, 256).unwrap(), BigUint::one() << 256u32);
    }

    #[test]
    fn ball_volume_rejects_bad_radius() {
        assert!(matches!(
            ball_volume(4, 5),
            Err(Error::RadiusOutOfRange { .. })
        ));
    }

    #[test]
    fn width_bounds_enforced() {
        assert!(BinaryCode::zeros(0).is_err());
        assert!(BinaryCode::zeros(257).is_err());
        assert!(BinaryCode::zeros(256).is_ok());
    }

    #[test]
    fn bitstring_round_trip_keeps_bit_order() {
        let c = BinaryCode::from_bitstring("1000").unwrap();
        assert!(c.bit(0));
        assert!(!c.bit(3));
        assert_eq!(c.to_string(), "1000");
        // bit 0 is the LSB of byte 0
        assert_eq!(c.to_le_bytes(), vec![0b0000_0001]);
    }

    #[test]
    fn le_bytes_reject_nonzero_padding() {
        assert!(BinaryCode::from_le_bytes(4, &[0b0001_0000]).is_err());
        assert!(BinaryCode::from_le_bytes(4, &[0b0000_1111]).is_ok());
    }

    #[test]
    fn value_ordering() {
        // "1000" encodes 1, "0100" encodes 2
        let one = BinaryCode::from_bitstring("1000").unwrap();
        let two = BinaryCode::from_bitstring("0100").unwrap();
        assert!(one < two);
        let wide = BinaryCode::from_value(200, 0).unwrap();
        let wide_hi = wide.with_bit_flipped(199).unwrap();
        assert!(wide < wide_hi);
    }

    #[test]
    fn ball_membership() {
        let center = BinaryCode::from_bitstring("0000").unwrap();
        let ball = HammingBall::new(center, 1).unwrap();
        assert!(ball
            .contains(&BinaryCode::from_bitstring("0100").unwrap())
            .unwrap());
        assert!(!ball
            .contains(&BinaryCode::from_bitstring("0110").unwrap())
            .unwrap());
        assert_eq!(ball.volume(), BigUint::from(5u32));
    }
}
