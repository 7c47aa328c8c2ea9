//! Hamming-space geometry of a labeled dataset: per-class diameters and
//! margins, separation checks, orthodrome cycles, and utilization
//! statistics.
//!
//! An orthodrome is the binary-space analogue of a great circle: starting
//! from any code, flipping all bit positions once in some order reaches
//! the antipodal code, and repeating the same order returns to the start.
//! The resulting 2k-code cycle is isometric (Hamming distance equals
//! cycle distance), which is what makes it a useful probe: a dataset whose
//! classes are separated (every diameter below every margin, no class
//! collapsed to a single code) can occupy at most 2/3 of any orthodrome.
//! [`proposition_check`] is an empirical falsification harness for that
//! bound, not a proof.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::BinaryCode;
use crate::dataset::LabeledCodeSet;
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// Intra-class diameter and nearest-other-class margin of one class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassGeometry {
    pub class_id: u32,
    /// Largest Hamming distance between two codes of this class.
    pub diameter: u32,
    /// Smallest Hamming distance from this class to any other class.
    pub margin: u32,
}

fn distinct_codes_by_class(db: &LabeledCodeSet) -> BTreeMap<u32, Vec<BinaryCode>> {
    let mut map: BTreeMap<u32, BTreeSet<BinaryCode>> = BTreeMap::new();
    for e in db.entries() {
        map.entry(e.label()).or_default().insert(*e.code());
    }
    map.into_iter()
        .map(|(label, set)| (label, set.into_iter().collect()))
        .collect()
}

fn diameter_of(codes: &[BinaryCode]) -> u32 {
    let mut max = 0;
    for (i, a) in codes.iter().enumerate() {
        for b in &codes[i + 1..] {
            max = max.max(a.distance(b));
        }
    }
    max
}

/// Maximum pairwise distance within one class; 0 for a singleton class.
pub fn class_diameter(db: &LabeledCodeSet, class_id: u32) -> Result<u32> {
    let classes = distinct_codes_by_class(db);
    let codes = classes
        .get(&class_id)
        .ok_or(Error::UnknownClass { class_id })?;
    Ok(diameter_of(codes))
}

/// Minimum distance from any code of `class_id` to any code of a
/// different class. Requires at least two classes.
pub fn class_margin(db: &LabeledCodeSet, class_id: u32) -> Result<u32> {
    let classes = distinct_codes_by_class(db);
    if classes.len() < 2 {
        return Err(Error::SingleClass {
            found: classes.len(),
        });
    }
    let own = classes
        .get(&class_id)
        .ok_or(Error::UnknownClass { class_id })?;
    let mut min = u32::MAX;
    for (other_id, other) in &classes {
        if *other_id == class_id {
            continue;
        }
        for a in own {
            for b in other {
                min = min.min(a.distance(b));
            }
        }
    }
    Ok(min)
}

/// Outcome of checking every class for diameter < margin.
#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    /// True iff every class's diameter is strictly below its margin.
    pub holds: bool,
    /// Smallest class diameter. A value of 0 means some class collapsed
    /// onto a single code, even if `holds` is true.
    pub h_tilde_s: u32,
    pub classes: Vec<ClassGeometry>,
}

/// Checks diameter < margin for every class and reports the smallest
/// diameter alongside the verdict.
pub fn separation_check(db: &LabeledCodeSet) -> Result<SeparationReport> {
    let classes = distinct_codes_by_class(db);
    if classes.len() < 2 {
        return Err(Error::SingleClass {
            found: classes.len(),
        });
    }
    let ids: Vec<u32> = classes.keys().copied().collect();
    let mut report = SeparationReport {
        holds: true,
        h_tilde_s: u32::MAX,
        classes: Vec::with_capacity(ids.len()),
    };
    for id in ids {
        let own = &classes[&id];
        let diameter = diameter_of(own);
        let mut margin = u32::MAX;
        for (other_id, other) in &classes {
            if *other_id == id {
                continue;
            }
            for a in own {
                for b in other {
                    margin = margin.min(a.distance(b));
                }
            }
        }
        report.holds &= diameter < margin;
        report.h_tilde_s = report.h_tilde_s.min(diameter);
        report.classes.push(ClassGeometry {
            class_id: id,
            diameter,
            margin,
        });
    }
    Ok(report)
}

/// A 2k-code cycle obtained by flipping every bit position once in a fixed
/// order (reaching the antipodal code) and then once more (returning).
///
/// Invariants: consecutive codes differ in exactly one bit (cyclically),
/// `codes[i + k]` is the complement of `codes[i]`, and all 2k codes are
/// distinct.
#[derive(Clone, Debug)]
pub struct Orthodrome {
    start: BinaryCode,
    flip_order: Vec<usize>,
    codes: Vec<BinaryCode>,
}

impl Orthodrome {
    pub fn start(&self) -> &BinaryCode {
        &self.start
    }

    pub fn flip_order(&self) -> &[usize] {
        &self.flip_order
    }

    /// The 2k codes of the cycle, beginning at the start code.
    pub fn codes(&self) -> &[BinaryCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> usize {
        self.start.width()
    }

    /// Cycle-order-independent identity, for deduplication.
    pub fn code_set(&self) -> BTreeSet<BinaryCode> {
        self.codes.iter().copied().collect()
    }
}

/// Builds the orthodrome through `start` that flips bits in `flip_order`,
/// which must be a permutation of all bit indices.
pub fn orthodrome(start: BinaryCode, flip_order: &[usize]) -> Result<Orthodrome> {
    let k = start.width();
    let mut seen = vec![false; k];
    if flip_order.len() != k {
        return Err(Error::InvalidFlipOrder { width: k });
    }
    for &i in flip_order {
        if i >= k || seen[i] {
            return Err(Error::InvalidFlipOrder { width: k });
        }
        seen[i] = true;
    }
    let mut codes = Vec::with_capacity(2 * k);
    let mut current = start;
    for half in 0..2 {
        for &bit in flip_order {
            codes.push(current);
            current = current.with_bit_flipped(bit)?;
        }
        debug_assert_eq!(current, if half == 0 { start.complement() } else { start });
    }
    debug_assert_eq!(current, start);
    Ok(Orthodrome {
        start,
        flip_order: flip_order.to_vec(),
        codes,
    })
}

/// Every distinct orthodrome (by code set) of a `width`-bit space.
///
/// The start/order pairs collapse heavily; still, the construction is
/// factorial in the width, so this is restricted to small spaces.
pub fn enumerate_orthodromes(width: usize) -> Result<Vec<Orthodrome>> {
    const ENUM_LIMIT: usize = 8;
    BinaryCode::zeros(width)?;
    if width > ENUM_LIMIT {
        return Err(Error::EnumerationTooWide {
            width,
            limit: ENUM_LIMIT,
        });
    }
    let mut out: Vec<Orthodrome> = Vec::new();
    let mut seen: HashSet<Vec<BinaryCode>> = HashSet::new();
    let mut order: Vec<usize> = (0..width).collect();
    loop {
        for value in 0..(1u64 << width) {
            let start = BinaryCode::from_value(width, value)?;
            let o = orthodrome(start, &order)?;
            let key: Vec<BinaryCode> = o.code_set().into_iter().collect();
            if seen.insert(key) {
                out.push(o);
            }
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(items: &mut [usize]) -> bool {
    let n = items.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && items[i - 1] >= items[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while items[j] <= items[i - 1] {
        j -= 1;
    }
    items.swap(i - 1, j);
    items[i..].reverse();
    true
}

fn random_code<R: Rng>(width: usize, rng: &mut R) -> BinaryCode {
    let mut code = BinaryCode::zeros(width).expect("validated width");
    for i in 0..width {
        if rng.random::<bool>() {
            code = code.with_bit_flipped(i).expect("index in range");
        }
    }
    code
}

fn random_orthodrome<R: Rng>(width: usize, rng: &mut R) -> Orthodrome {
    let start = random_code(width, rng);
    let mut order: Vec<usize> = (0..width).collect();
    order.shuffle(rng);
    orthodrome(start, &order).expect("random order is a permutation")
}

/// `count` orthodromes drawn with random starts and flip orders.
pub fn sample_orthodromes(width: usize, count: usize, seed: u64) -> Result<Vec<Orthodrome>> {
    BinaryCode::zeros(width)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| random_orthodrome(width, &mut rng))
        .collect())
}

/// Occupied codes on the orthodrome and its cycle length, as exact counts.
pub fn orthodrome_occupancy(db: &LabeledCodeSet, o: &Orthodrome) -> Result<(usize, usize)> {
    if db.width() != o.width() {
        return Err(Error::WidthMismatch {
            expected: db.width(),
            found: o.width(),
        });
    }
    let occupied: HashSet<&BinaryCode> = db.codes().collect();
    let hit = o.codes().iter().filter(|c| occupied.contains(c)).count();
    Ok((hit, o.len()))
}

/// Fraction of the 2k orthodrome codes assigned to any class in `db`.
pub fn orthodrome_utilization(db: &LabeledCodeSet, o: &Orthodrome) -> Result<f64> {
    let (hit, len) = orthodrome_occupancy(db, o)?;
    Ok(hit as f64 / len as f64)
}

/// Why a proposition check could not produce a bound verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum PropositionOutcome {
    /// The dataset does not meet the separated-classes precondition.
    PreconditionUnmet { reason: String },
    /// Orthodromes were checked; see the stats.
    Checked(PropositionStats),
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PropositionStats {
    /// Number of orthodromes inspected.
    pub orthodromes_checked: u64,
    /// True when every distinct orthodrome of the space was inspected.
    pub exhaustive: bool,
    /// Most occupied codes seen on any single orthodrome.
    pub max_occupied: usize,
    /// Cycle length 2k shared by all orthodromes of the space.
    pub cycle_len: usize,
    /// `max_occupied / cycle_len`.
    pub max_utilization: f64,
    /// True iff some orthodrome exceeded 2/3 utilization (checked in
    /// integer arithmetic: 3 * occupied > 2 * cycle length).
    pub violation: bool,
}

/// Result of probing the 2/3-utilization bound on one dataset.
#[derive(Clone, Debug, Serialize)]
pub struct PropositionReport {
    /// Separation verdict of the dataset, when computable.
    pub separation: Option<SeparationReport>,
    pub outcome: PropositionOutcome,
}

const EXHAUSTIVE_WIDTH: usize = 4;
const SAMPLE_CHUNK: u64 = 512;

/// Probes the claim that a separated dataset (diameter < margin for every
/// class, with no class collapsed to one code) occupies at most 2/3 of
/// every orthodrome.
///
/// Small spaces are enumerated exhaustively; wider ones draw up to
/// `budget` seeded random orthodromes. The report carries the maximum
/// observed utilization; it is empirical evidence, not a proof.
pub fn proposition_check(db: &LabeledCodeSet, budget: u64, seed: u64) -> PropositionReport {
    let separation = match separation_check(db) {
        Ok(s) => s,
        Err(e) => {
            return PropositionReport {
                separation: None,
                outcome: PropositionOutcome::PreconditionUnmet {
                    reason: e.to_string(),
                },
            }
        }
    };
    if !separation.holds || separation.h_tilde_s < 1 {
        let reason = if !separation.holds {
            "some class diameter reaches or exceeds its margin".to_string()
        } else {
            "some class is collapsed onto a single code (smallest diameter is 0)".to_string()
        };
        return PropositionReport {
            separation: Some(separation),
            outcome: PropositionOutcome::PreconditionUnmet { reason },
        };
    }

    let k = db.width();
    let occupied: HashSet<BinaryCode> = db.codes().copied().collect();
    let occupancy = |o: &Orthodrome| o.codes().iter().filter(|c| occupied.contains(c)).count();

    let (max_occupied, checked, exhaustive) = if k <= EXHAUSTIVE_WIDTH {
        let all = enumerate_orthodromes(k).expect("small width");
        let capped: Vec<&Orthodrome> = all.iter().take(budget as usize).collect();
        let max = capped.iter().map(|o| occupancy(o)).max().unwrap_or(0);
        let n = capped.len() as u64;
        (max, n, n == all.len() as u64)
    } else {
        // independent seeded streams per chunk keep the scan reproducible
        // under any parallelism
        let chunks = budget.div_ceil(SAMPLE_CHUNK);
        let max = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let n = SAMPLE_CHUNK.min(budget - chunk * SAMPLE_CHUNK);
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, chunk));
                (0..n)
                    .map(|_| occupancy(&random_orthodrome(k, &mut rng)))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        (max, budget, false)
    };

    let cycle_len = 2 * k;
    PropositionReport {
        separation: Some(separation),
        outcome: PropositionOutcome::Checked(PropositionStats {
            orthodromes_checked: checked,
            exhaustive,
            max_occupied,
            cycle_len,
            max_utilization: max_occupied as f64 / cycle_len as f64,
            violation: 3 * max_occupied > 2 * cycle_len,
        }),
    }
}

/// Occupancy of one sampled or enumerated orthodrome.
#[derive(Clone, Debug, Serialize)]
pub struct OrthodromeStat {
    pub id: u64,
    pub occupied: usize,
    pub fraction: f64,
}

/// How much of the code space a dataset occupies.
#[derive(Clone, Debug, Serialize)]
pub struct UtilizationReport {
    pub width: usize,
    pub distinct_codes: usize,
    /// 2^width; exact, since powers of two are representable.
    pub total_codes: f64,
    /// distinct_codes / 2^width.
    pub global_utilization: f64,
    /// Per-orthodrome occupancy, when requested.
    pub per_orthodrome: Vec<OrthodromeStat>,
}

/// Distinct-code count and global utilization of the dataset.
pub fn utilization_report(db: &LabeledCodeSet) -> UtilizationReport {
    let distinct: HashSet<&BinaryCode> = db.codes().collect();
    let total = (db.width() as f64).exp2();
    UtilizationReport {
        width: db.width(),
        distinct_codes: distinct.len(),
        total_codes: total,
        global_utilization: distinct.len() as f64 / total,
        per_orthodrome: Vec::new(),
    }
}

/// Utilization report extended with per-orthodrome occupancy over an
/// exhaustive enumeration (small widths) or a seeded sample.
pub fn utilization_report_with_orthodromes(
    db: &LabeledCodeSet,
    budget: u64,
    seed: u64,
) -> Result<UtilizationReport> {
    let mut report = utilization_report(db);
    let orthodromes = if db.width() <= EXHAUSTIVE_WIDTH {
        enumerate_orthodromes(db.width())?
            .into_iter()
            .take(budget as usize)
            .collect()
    } else {
        sample_orthodromes(db.width(), budget as usize, seed)?
    };
    report.per_orthodrome = orthodromes
        .iter()
        .enumerate()
        .map(|(id, o)| {
            let (occupied, len) = orthodrome_occupancy(db, o)?;
            Ok(OrthodromeStat {
                id: id as u64,
                occupied,
                fraction: occupied as f64 / len as f64,
            })
        })
        .collect::<Result<_>>()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Entry;

    fn entry(bits: &str, label: u32) -> Entry {
        Entry::new(BinaryCode::from_bitstring(bits).unwrap(), label, None)
    }

    fn set(width: usize, items: &[(&str, u32)]) -> LabeledCodeSet {
        LabeledCodeSet::new(width, items.iter().map(|(s, l)| entry(s, *l)).collect()).unwrap()
    }

    #[test]
    fn diameter_cases() {
        let db = set(4, &[("0000", 0), ("0000", 1), ("1111", 1)]);
        assert_eq!(class_diameter(&db, 0).unwrap(), 0);
        assert_eq!(class_diameter(&db, 1).unwrap(), 4);
        assert!(matches!(
            class_diameter(&db, 9),
            Err(Error::UnknownClass { .. })
        ));

        // mutual distances {1, 2, 2} -> diameter 2 (brute-forced by hand)
        let db = set(3, &[("000", 0), ("001", 0), ("011", 0), ("111", 1)]);
        assert_eq!(class_diameter(&db, 0).unwrap(), 2);
    }

    #[test]
    fn margin_cases() {
        let shared = set(4, &[("0000", 0), ("0000", 1)]);
        assert_eq!(class_margin(&shared, 0).unwrap(), 0);

        let antipodal = set(4, &[("0000", 0), ("1111", 1)]);
        assert_eq!(class_margin(&antipodal, 0).unwrap(), 4);
        assert_eq!(class_margin(&antipodal, 1).unwrap(), 4);

        let single = set(4, &[("0000", 0), ("0001", 0)]);
        assert!(matches!(
            class_margin(&single, 0),
            Err(Error::SingleClass { .. })
        ));

        // three classes: min over cross-class pairs
        let db = set(4, &[("0000", 0), ("0011", 1), ("1111", 2), ("0111", 2)]);
        assert_eq!(class_margin(&db, 0).unwrap(), 2);
        assert_eq!(class_margin(&db, 1).unwrap(), 1);
        assert_eq!(class_margin(&db, 2).unwrap(), 1);
    }

    #[test]
    fn separation_singleton_classes_hold_but_flag_zero_diameter() {
        let db = set(4, &[("0000", 0), ("1111", 1)]);
        let rep = separation_check(&db).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.h_tilde_s, 0);
    }

    #[test]
    fn separation_fails_on_intermixed_codes() {
        let db = set(4, &[("0000", 0), ("0001", 1), ("0011", 0), ("0111", 1)]);
        let rep = separation_check(&db).unwrap();
        assert!(!rep.holds);
    }

    #[test]
    fn separation_constructed_instance() {
        // two classes of diameter 1 with margin 3 in a 6-bit space,
        // verified by exhaustive distance check at construction time
        let db = set(
            6,
            &[("000000", 0), ("000001", 0), ("001110", 1), ("001111", 1)],
        );
        let rep = separation_check(&db).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.h_tilde_s, 1);
        for g in &rep.classes {
            assert_eq!(g.diameter, 1);
            assert_eq!(g.margin, 3);
        }
    }

    #[test]
    fn orthodrome_follows_flip_order() {
        // 4-bit start 0000 flipped in order (1, 3, 0, 2): the cycle walks
        // to 1111 and back, eight distinct codes
        let start = BinaryCode::from_bitstring("0000").unwrap();
        let o = orthodrome(start, &[1, 3, 0, 2]).unwrap();
        let want = [
            "0000", "0100", "0101", "1101", "1111", "1011", "1010", "0010",
        ];
        let got: Vec<String> = o.codes().iter().map(|c| c.to_string()).collect();
        assert_eq!(got, want);
        for (i, c) in o.codes().iter().enumerate() {
            assert_eq!(*c, o.codes()[(i + 4) % 8].complement());
            let next = &o.codes()[(i + 1) % 8];
            assert_eq!(c.distance(next), 1);
        }
    }

    #[test]
    fn orthodrome_width_one() {
        let start = BinaryCode::from_bitstring("0").unwrap();
        let o = orthodrome(start, &[0]).unwrap();
        assert_eq!(o.len(), 2);
        assert_eq!(o.codes()[1], start.complement());
    }

    #[test]
    fn orthodrome_rejects_non_permutations() {
        let start = BinaryCode::from_bitstring("0000").unwrap();
        assert!(orthodrome(start, &[0, 1, 2]).is_err());
        assert!(orthodrome(start, &[0, 1, 2, 2]).is_err());
        assert!(orthodrome(start, &[0, 1, 2, 4]).is_err());
    }

    #[test]
    fn enumeration_counts_small_spaces() {
        // every orthodrome of Q3 omits exactly one antipodal pair
        assert_eq!(enumerate_orthodromes(3).unwrap().len(), 4);
        assert_eq!(enumerate_orthodromes(4).unwrap().len(), 24);
    }

    #[test]
    fn utilization_extremes() {
        let db = set(2, &[("00", 0), ("01", 0), ("10", 1), ("11", 1)]);
        let o = orthodrome(BinaryCode::from_bitstring("00").unwrap(), &[0, 1]).unwrap();
        assert_eq!(orthodrome_utilization(&db, &o).unwrap(), 1.0);

        let empty = LabeledCodeSet::new(2, vec![]).unwrap();
        assert_eq!(orthodrome_utilization(&empty, &o).unwrap(), 0.0);
    }

    #[test]
    fn global_utilization_report() {
        let db = set(4, &[("0000", 0), ("0000", 1), ("0000", 2)]);
        let rep = utilization_report(&db);
        assert_eq!(rep.distinct_codes, 1);
        assert_eq!(rep.total_codes, 16.0);
        assert_eq!(rep.global_utilization, 1.0 / 16.0);
    }

    #[test]
    fn proposition_reports_unmet_preconditions() {
        let db = set(4, &[("0000", 0), ("0001", 1)]);
        let rep = proposition_check(&db, 100, 0);
        assert!(matches!(
            rep.outcome,
            PropositionOutcome::PreconditionUnmet { .. }
        ));

        let single = set(4, &[("0000", 0)]);
        let rep = proposition_check(&single, 100, 0);
        assert!(rep.separation.is_none());
        assert!(matches!(
            rep.outcome,
            PropositionOutcome::PreconditionUnmet { .. }
        ));
    }

    #[test]
    fn proposition_exhaustive_on_separated_instance() {
        // two diameter-1 classes, margin 2, in a 3-bit space
        let db = set(3, &[("010", 0), ("011", 0), ("100", 1), ("101", 1)]);
        let rep = proposition_check(&db, 1_000, 0);
        match rep.outcome {
            PropositionOutcome::Checked(stats) => {
                assert!(stats.exhaustive);
                assert!(!stats.violation);
                assert!(stats.max_utilization <= 2.0 / 3.0 + 1e-12);
            }
            other => panic!("expected a checked outcome, got {:?}", other),
        }
    }
}
