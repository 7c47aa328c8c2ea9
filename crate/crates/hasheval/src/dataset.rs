//! Labeled code collections and radius retrieval.

use std::collections::BTreeSet;

use crate::code::BinaryCode;
use crate::error::{Error, Result};

/// One database or query record: a code plus its class label and, when the
/// dataset carries them, a superclass label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    code: BinaryCode,
    label: u32,
    superlabel: Option<u32>,
}

impl Entry {
    pub fn new(code: BinaryCode, label: u32, superlabel: Option<u32>) -> Self {
        Self {
            code,
            label,
            superlabel,
        }
    }

    pub fn code(&self) -> &BinaryCode {
        &self.code
    }

    pub fn label(&self) -> u32 {
        self.label
    }

    pub fn superlabel(&self) -> Option<u32> {
        self.superlabel
    }
}

/// An immutable, ordered collection of labeled codes sharing one width.
///
/// Duplicate codes are kept as distinct entries; several operations
/// (histograms, the dispersion penalty) depend on those multiplicities.
#[derive(Clone, Debug)]
pub struct LabeledCodeSet {
    width: usize,
    entries: Vec<Entry>,
    has_superlabels: bool,
}

impl LabeledCodeSet {
    /// Validates width uniformity and the all-or-none superlabel rule.
    pub fn new(width: usize, entries: Vec<Entry>) -> Result<Self> {
        // reuse the width validation in BinaryCode
        BinaryCode::zeros(width)?;
        for e in &entries {
            if e.code.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: e.code.width(),
                });
            }
        }
        let has_superlabels = match entries.first() {
            None => false,
            Some(first) => {
                let has = first.superlabel.is_some();
                if entries.iter().any(|e| e.superlabel.is_some() != has) {
                    return Err(Error::MixedSuperlabels);
                }
                has
            }
        };
        Ok(Self {
            width,
            entries,
            has_superlabels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&Entry> {
        self.entries.get(index)
    }

    pub fn has_superlabels(&self) -> bool {
        self.has_superlabels
    }

    pub fn codes(&self) -> impl Iterator<Item = &BinaryCode> {
        self.entries.iter().map(Entry::code)
    }

    /// Distinct class ids present, in ascending order.
    pub fn class_ids(&self) -> BTreeSet<u32> {
        self.entries.iter().map(Entry::label).collect()
    }

    fn check_query_width(&self, q: &BinaryCode) -> Result<()> {
        if q.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: q.width(),
            });
        }
        Ok(())
    }
}

/// All entries within Hamming radius `r` of the query, as
/// `(entry index, distance)` pairs in database input order.
///
/// Duplicated codes yield duplicated results; ranking and tie handling are
/// a separate concern.
pub fn retrieve_within(
    db: &LabeledCodeSet,
    query: &BinaryCode,
    r: u32,
) -> Result<Vec<(usize, u32)>> {
    db.check_query_width(query)?;
    if r as usize > db.width() {
        return Err(Error::RadiusOutOfRange {
            radius: r,
            width: db.width(),
        });
    }
    Ok(db
        .entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let d = query.distance(&e.code);
            (d <= r).then_some((i, d))
        })
        .collect())
}
