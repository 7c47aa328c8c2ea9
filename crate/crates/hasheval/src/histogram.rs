//! Code-occurrence histograms: how many entries map to each code value.

use std::collections::BTreeMap;

use crate::code::BinaryCode;
use crate::error::{Error, Result};

/// Multiplicity map from code value to occurrence count.
///
/// Zero counts are never stored, and the total always equals the number of
/// codes histogrammed. Iteration is in ascending code-value order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeHistogram {
    width: usize,
    counts: BTreeMap<BinaryCode, u64>,
}

impl CodeHistogram {
    pub fn empty(width: usize) -> Result<Self> {
        BinaryCode::zeros(width)?;
        Ok(Self {
            width,
            counts: BTreeMap::new(),
        })
    }

    /// Histograms the given codes; all must share `width`.
    pub fn from_codes<'a, I>(width: usize, codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a BinaryCode>,
    {
        let mut hist = Self::empty(width)?;
        for code in codes {
            hist.add(code)?;
        }
        Ok(hist)
    }

    pub fn add(&mut self, code: &BinaryCode) -> Result<()> {
        if code.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: code.width(),
            });
        }
        *self.counts.entry(*code).or_insert(0) += 1;
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Total number of histogrammed codes (sum of all counts).
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Largest single-code count; 0 for an empty histogram.
    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    /// Number of distinct codes present.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, code: &BinaryCode) -> u64 {
        self.counts.get(code).copied().unwrap_or(0)
    }

    /// (code, count) pairs in ascending code-value order.
    pub fn iter(&self) -> impl Iterator<Item = (&BinaryCode, u64)> {
        self.counts.iter().map(|(c, &n)| (c, n))
    }
}

/// Histogram of a code list; see [`CodeHistogram::from_codes`].
pub fn histogram<'a, I>(width: usize, codes: I) -> Result<CodeHistogram>
where
    I: IntoIterator<Item = &'a BinaryCode>,
{
    CodeHistogram::from_codes(width, codes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_histogram_totals_zero() {
        let h = CodeHistogram::empty(4).unwrap();
        assert_eq!(h.total(), 0);
        assert_eq!(h.distinct(), 0);
        assert_eq!(h.max_count(), 0);
    }

    #[test]
    fn multiplicities_counted() {
        let c = BinaryCode::from_bitstring("0001").unwrap();
        let d = BinaryCode::from_bitstring("0010").unwrap();
        let h = histogram(4, [&c, &c, &d]).unwrap();
        assert_eq!(h.count(&c), 2);
        assert_eq!(h.count(&d), 1);
        assert_eq!(h.total(), 3);
        assert_eq!(h.distinct(), 2);
    }

    #[test]
    fn mixed_widths_rejected() {
        let c = BinaryCode::from_bitstring("0001").unwrap();
        let e = BinaryCode::from_bitstring("00010").unwrap();
        assert!(matches!(
            histogram(4, [&c, &e]),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn iteration_sorted_by_code_value() {
        // "1000" = 1, "0100" = 2, "0010" = 4
        let codes: Vec<_> = ["0010", "1000", "0100"]
            .iter()
            .map(|s| BinaryCode::from_bitstring(s).unwrap())
            .collect();
        let h = histogram(4, codes.iter()).unwrap();
        let order: Vec<String> = h.iter().map(|(c, _)| c.to_string()).collect();
        assert_eq!(order, vec!["1000", "0100", "0010"]);
    }
}
