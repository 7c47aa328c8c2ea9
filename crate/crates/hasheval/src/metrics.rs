//! Retrieval metrics over ranked Hamming-distance results.
//!
//! Besides the classical precision and average-precision family, this
//! module makes tie handling explicit: retrieved items at equal distance
//! form tie blocks whose internal order is arbitrary, so AP is computed
//! under a caller-chosen [`TiePolicy`] and bounded by [`ap_bounds`]. The
//! dispersion-aware scores ([`lgap`], [`mlgap`], [`penalty_phi`]) depend
//! only on per-code multiplicities and are therefore immune to that
//! ambiguity.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::code::{BinaryCode, HammingBall};
use crate::dataset::{Entry, LabeledCodeSet};
use crate::error::{Error, Result};
use crate::histogram::CodeHistogram;
use crate::scalar::{deterministic_mean, Scalar};

/// How relevance between a query and a database entry is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelevanceMode {
    /// Relevant iff the class labels match.
    #[serde(rename = "fine")]
    FineLabel,
    /// Relevant iff the superclass labels match; requires superlabels.
    #[serde(rename = "coarse")]
    CoarseLabel,
}

/// How items inside a tie block are ordered before rank-sensitive metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TiePolicy {
    /// Relevant items first within each block: the optimistic bound.
    Best,
    /// Relevant items last within each block: the pessimistic bound.
    Worst,
    /// Each block shuffled by a generator seeded with the given value.
    /// Equal seeds always produce identical orderings; every ranking is
    /// resolved from a fresh generator so the outcome for one query does
    /// not depend on how many others were evaluated.
    SeededRandom(u64),
    /// Database input order within each block (legacy-style ranking).
    StableInput,
}

/// Relevance indicator: is `item` a true positive for `query`?
pub fn indicator(item: &Entry, query: &Entry, mode: RelevanceMode) -> Result<bool> {
    match mode {
        RelevanceMode::FineLabel => Ok(item.label() == query.label()),
        RelevanceMode::CoarseLabel => match (item.superlabel(), query.superlabel()) {
            (Some(a), Some(b)) => Ok(a == b),
            _ => Err(Error::MissingSuperlabels),
        },
    }
}

/// One retrieved item inside a tie block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankedItem {
    /// Index of the entry in the database it came from.
    pub entry: usize,
    pub relevant: bool,
}

/// A maximal group of retrieved items at the same distance from the query.
#[derive(Clone, Debug)]
pub struct TieBlock {
    pub distance: u32,
    pub items: Vec<RankedItem>,
}

/// A distance-sorted retrieval result with explicit tie blocks.
#[derive(Clone, Debug)]
pub struct RankedRetrieval {
    query_label: u32,
    blocks: Vec<TieBlock>,
    total_relevant_in_db: usize,
}

impl RankedRetrieval {
    /// Ranks the whole database against one query. Items within a block
    /// keep database input order until a policy says otherwise.
    pub fn from_query(db: &LabeledCodeSet, query: &Entry, mode: RelevanceMode) -> Result<Self> {
        Self::from_query_skipping(db, query, mode, None)
    }

    /// Same as [`Self::from_query`] but omitting one database index, used
    /// for self-match exclusion when a set is evaluated against itself.
    pub fn from_query_skipping(
        db: &LabeledCodeSet,
        query: &Entry,
        mode: RelevanceMode,
        skip: Option<usize>,
    ) -> Result<Self> {
        check_widths(db, query)?;
        check_mode(db, query, mode)?;
        let mut scored: Vec<(u32, RankedItem)> = Vec::with_capacity(db.len());
        for (i, e) in db.entries().iter().enumerate() {
            if skip == Some(i) {
                continue;
            }
            let d = query.code().distance(e.code());
            let relevant = indicator(e, query, mode)?;
            scored.push((d, RankedItem { entry: i, relevant }));
        }
        // stable sort keeps input order inside each distance group
        scored.sort_by_key(|(d, _)| *d);
        let total_relevant_in_db = scored.iter().filter(|(_, it)| it.relevant).count();
        let mut blocks: Vec<TieBlock> = Vec::new();
        for (d, item) in scored {
            match blocks.last_mut() {
                Some(b) if b.distance == d => b.items.push(item),
                _ => blocks.push(TieBlock {
                    distance: d,
                    items: vec![item],
                }),
            }
        }
        Ok(Self {
            query_label: query.label(),
            blocks,
            total_relevant_in_db,
        })
    }

    /// Builds a ranking directly from `(distance, [(entry, relevant)])`
    /// blocks; distances must be strictly increasing.
    pub fn from_blocks(
        query_label: u32,
        blocks: Vec<(u32, Vec<(usize, bool)>)>,
        total_relevant_in_db: usize,
    ) -> Result<Self> {
        for pair in blocks.windows(2) {
            if pair[0].0 >= pair[1].0 {
                return Err(Error::InvalidBitstring {
                    reason: format!(
                        "tie block distances must be strictly increasing, got {} then {}",
                        pair[0].0, pair[1].0
                    ),
                });
            }
        }
        let blocks = blocks
            .into_iter()
            .map(|(distance, items)| TieBlock {
                distance,
                items: items
                    .into_iter()
                    .map(|(entry, relevant)| RankedItem { entry, relevant })
                    .collect(),
            })
            .collect();
        Ok(Self {
            query_label,
            blocks,
            total_relevant_in_db,
        })
    }

    pub fn query_label(&self) -> u32 {
        self.query_label
    }

    pub fn blocks(&self) -> &[TieBlock] {
        &self.blocks
    }

    /// Total number of ranked items.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.items.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Relevant items across the whole ranking.
    pub fn total_relevant_in_db(&self) -> usize {
        self.total_relevant_in_db
    }

    /// Flattens the blocks into one ranked list under the given policy.
    pub fn resolve(&self, policy: TiePolicy) -> Vec<RankedItem> {
        let mut rng = match policy {
            TiePolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let mut out = Vec::with_capacity(self.len());
        for block in &self.blocks {
            let mut items = block.items.clone();
            match policy {
                TiePolicy::Best => items.sort_by_key(|it| !it.relevant),
                TiePolicy::Worst => items.sort_by_key(|it| it.relevant),
                TiePolicy::SeededRandom(_) => {
                    items.shuffle(rng.as_mut().expect("rng present for random policy"))
                }
                TiePolicy::StableInput => {}
            }
            out.extend(items);
        }
        out
    }
}

fn check_widths(db: &LabeledCodeSet, query: &Entry) -> Result<()> {
    if query.code().width() != db.width() {
        return Err(Error::WidthMismatch {
            expected: db.width(),
            found: query.code().width(),
        });
    }
    Ok(())
}

fn check_mode(db: &LabeledCodeSet, query: &Entry, mode: RelevanceMode) -> Result<()> {
    if mode == RelevanceMode::CoarseLabel {
        let db_ok = db.is_empty() || db.has_superlabels();
        if !db_ok || query.superlabel().is_none() {
            return Err(Error::MissingSuperlabels);
        }
    }
    Ok(())
}

fn check_radius(db: &LabeledCodeSet, r: u32) -> Result<()> {
    if r as usize > db.width() {
        return Err(Error::RadiusOutOfRange {
            radius: r,
            width: db.width(),
        });
    }
    Ok(())
}

/// AP over an already-resolved relevance sequence truncated to `k`.
fn ap_over_flags<S: Scalar, I>(flags: I, k: usize) -> S
where
    I: IntoIterator<Item = bool>,
{
    let mut hits = 0u64;
    let mut acc = S::zero();
    for (rank0, rel) in flags.into_iter().take(k).enumerate() {
        if rel {
            hits += 1;
            acc = acc + S::ratio(hits, rank0 as u64 + 1);
        }
    }
    if hits == 0 {
        S::zero()
    } else {
        acc / S::from_count(hits)
    }
}

/// Fraction of relevant items among the top `k` after tie resolution.
///
/// When fewer than `k` items were retrieved the fraction is over the items
/// that exist; an empty ranking scores 0.
pub fn precision_at_k<S: Scalar>(
    ranking: &RankedRetrieval,
    k: usize,
    policy: TiePolicy,
) -> Result<S> {
    if k == 0 {
        return Err(Error::ZeroCutoff);
    }
    let resolved = ranking.resolve(policy);
    let m = k.min(resolved.len());
    if m == 0 {
        return Ok(S::zero());
    }
    let hits = resolved[..m].iter().filter(|it| it.relevant).count() as u64;
    Ok(S::ratio(hits, m as u64))
}

/// Precision over everything retrieved within Hamming radius `r`:
/// relevant / retrieved, or 0 when the ball is empty. Order-free, so no
/// tie policy is involved.
pub fn precision_at_radius<S: Scalar>(
    db: &LabeledCodeSet,
    query: &Entry,
    r: u32,
    mode: RelevanceMode,
) -> Result<S> {
    let (total, relevant) = radius_counts(db, query, r, mode, None)?;
    if total == 0 {
        return Ok(S::zero());
    }
    Ok(S::ratio(relevant, total))
}

pub(crate) fn radius_counts(
    db: &LabeledCodeSet,
    query: &Entry,
    r: u32,
    mode: RelevanceMode,
    skip: Option<usize>,
) -> Result<(u64, u64)> {
    check_widths(db, query)?;
    check_radius(db, r)?;
    check_mode(db, query, mode)?;
    let mut total = 0u64;
    let mut relevant = 0u64;
    for (i, e) in db.entries().iter().enumerate() {
        if skip == Some(i) {
            continue;
        }
        if query.code().distance(e.code()) <= r {
            total += 1;
            if indicator(e, query, mode)? {
                relevant += 1;
            }
        }
    }
    Ok((total, relevant))
}

/// Average precision of the top `k` under a tie policy: the mean of P@i
/// over the relevant ranks i, or 0 when no relevant item appears.
pub fn average_precision<S: Scalar>(
    ranking: &RankedRetrieval,
    k: usize,
    policy: TiePolicy,
) -> Result<S> {
    if k == 0 {
        return Err(Error::ZeroCutoff);
    }
    Ok(ap_over_flags(
        ranking.resolve(policy).into_iter().map(|it| it.relevant),
        k,
    ))
}

/// The exact range AP can take over reorderings within tie blocks,
/// returned as `(worst, best)`.
///
/// For a block fully inside the top k, relevant-last (relevant-first)
/// placement is pointwise minimal (maximal). A block straddling the
/// cutoff additionally chooses how many of its relevant items land inside
/// the top k at all, which changes the AP denominator; all feasible
/// counts are enumerated, so the bounds equal the true min and max over
/// every within-block permutation. They coincide with the Worst/Best
/// policy APs whenever the cutoff does not split a tie block.
pub fn ap_bounds<S: Scalar>(ranking: &RankedRetrieval, k: usize) -> Result<(S, S)> {
    if k == 0 {
        return Err(Error::ZeroCutoff);
    }
    // fixed relevant counts of blocks fully inside the cutoff, plus the
    // straddling block's slice, if any
    let mut inside: Vec<(usize, usize)> = Vec::new();
    let mut straddle: Option<(usize, usize, usize)> = None; // (slice, size, relevant)
    let mut pos = 0usize;
    for block in &ranking.blocks {
        let size = block.items.len();
        let relevant = block.items.iter().filter(|it| it.relevant).count();
        if pos + size <= k {
            inside.push((size, relevant));
        } else if pos < k {
            straddle = Some((k - pos, size, relevant));
            break;
        } else {
            break;
        }
        pos += size;
    }

    let flags_for = |slice_relevant: usize, slice_len: usize, relevant_first: bool| {
        let mut flags: Vec<bool> = Vec::with_capacity(k);
        let mut push_block = |len: usize, rel: usize| {
            if relevant_first {
                flags.extend(std::iter::repeat_n(true, rel));
                flags.extend(std::iter::repeat_n(false, len - rel));
            } else {
                flags.extend(std::iter::repeat_n(false, len - rel));
                flags.extend(std::iter::repeat_n(true, rel));
            }
        };
        for &(size, relevant) in &inside {
            push_block(size, relevant);
        }
        if slice_len > 0 {
            push_block(slice_len, slice_relevant);
        }
        flags
    };

    let candidate_counts: Vec<(usize, usize)> = match straddle {
        None => vec![(0, 0)],
        Some((slice, size, relevant)) => {
            let lo = relevant.saturating_sub(size - slice);
            let hi = relevant.min(slice);
            (lo..=hi).map(|m| (m, slice)).collect()
        }
    };

    let mut worst: Option<S> = None;
    let mut best: Option<S> = None;
    for (m, slice) in candidate_counts {
        let low: S = ap_over_flags(flags_for(m, slice, false), k);
        let high: S = ap_over_flags(flags_for(m, slice, true), k);
        worst = Some(match worst {
            Some(w) if w <= low => w,
            _ => low,
        });
        best = Some(match best {
            Some(b) if b >= high => b,
            _ => high,
        });
    }
    Ok((
        worst.expect("at least one candidate"),
        best.expect("at least one candidate"),
    ))
}

/// Mean of per-query AP over a query set, with the crate's fixed
/// deterministic reduction order.
pub fn mean_average_precision<S: Scalar>(
    queries: &LabeledCodeSet,
    db: &LabeledCodeSet,
    k: usize,
    policy: TiePolicy,
    mode: RelevanceMode,
) -> Result<S> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    if k == 0 {
        return Err(Error::ZeroCutoff);
    }
    let aps = queries
        .entries()
        .iter()
        .map(|q| {
            let ranking = RankedRetrieval::from_query(db, q, mode)?;
            average_precision(&ranking, k, policy)
        })
        .collect::<Result<Vec<S>>>()?;
    deterministic_mean(aps)
}

/// Dispersion penalty of a ball histogram: total count divided by
/// (largest single-code count x ball volume). 1 on perfectly uniform
/// occupancy of the whole ball, smaller the more the counts concentrate;
/// an empty histogram scores 0.
pub fn penalty_phi<S: Scalar>(hist: &CodeHistogram, ball: &HammingBall) -> Result<S> {
    if hist.width() != ball.center().width() {
        return Err(Error::WidthMismatch {
            expected: ball.center().width(),
            found: hist.width(),
        });
    }
    for (code, _) in hist.iter() {
        let d = ball.center().distance(code);
        if d > ball.radius() {
            return Err(Error::CodeOutsideBall {
                distance: d,
                radius: ball.radius(),
            });
        }
    }
    if hist.is_empty() {
        return Ok(S::zero());
    }
    let a = BigUint::from(hist.total());
    let b = BigUint::from(hist.max_count()) * ball.volume();
    Ok(S::from_big_ratio(&a, &b))
}

/// Local group average precision of one query at radius `r`: radius-ball
/// precisions weighted by the dispersion penalty of each ball, averaged
/// over radii 0..=r. Empty balls contribute 0 while the r+1 denominator
/// stays fixed, so sparse neighborhoods are penalized.
pub fn lgap<S: Scalar>(
    db: &LabeledCodeSet,
    query: &Entry,
    r: u32,
    mode: RelevanceMode,
) -> Result<S> {
    lgap_skipping(db, query, r, mode, None)
}

pub(crate) fn lgap_skipping<S: Scalar>(
    db: &LabeledCodeSet,
    query: &Entry,
    r: u32,
    mode: RelevanceMode,
    skip: Option<usize>,
) -> Result<S> {
    check_widths(db, query)?;
    check_radius(db, r)?;
    check_mode(db, query, mode)?;
    let k = db.width();
    let radii = r as usize + 1;

    // one pass over the database, bucketed by exact distance
    let mut totals = vec![0u64; radii];
    let mut relevants = vec![0u64; radii];
    let mut codes_at: Vec<Vec<BinaryCode>> = vec![Vec::new(); radii];
    for (i, e) in db.entries().iter().enumerate() {
        if skip == Some(i) {
            continue;
        }
        let d = query.code().distance(e.code());
        if d <= r {
            let d = d as usize;
            totals[d] += 1;
            if indicator(e, query, mode)? {
                relevants[d] += 1;
            }
            codes_at[d].push(*e.code());
        }
    }

    let mut counts: BTreeMap<BinaryCode, u64> = BTreeMap::new();
    let mut max_count = 0u64;
    let mut cum_total = 0u64;
    let mut cum_relevant = 0u64;
    let mut volume: BigUint = num_traits::One::one();
    let mut binom: BigUint = num_traits::One::one();
    let mut acc = S::zero();
    for j in 0..radii {
        if j > 0 {
            binom = binom * BigUint::from(k - j + 1) / BigUint::from(j);
            volume += &binom;
        }
        for code in &codes_at[j] {
            let c = counts.entry(*code).or_insert(0);
            *c += 1;
            max_count = max_count.max(*c);
        }
        cum_total += totals[j];
        cum_relevant += relevants[j];
        if cum_total > 0 {
            let precision = S::ratio(cum_relevant, cum_total);
            let phi = S::from_big_ratio(
                &BigUint::from(cum_total),
                &(BigUint::from(max_count) * &volume),
            );
            acc = acc + precision * phi;
        }
    }
    Ok(acc / S::from_count(radii as u64))
}

/// Mean LGAP over a query set with the fixed deterministic reduction
/// order; invariant to permutations of both database and query order.
pub fn mlgap<S: Scalar>(
    queries: &LabeledCodeSet,
    db: &LabeledCodeSet,
    r: u32,
    mode: RelevanceMode,
) -> Result<S> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    let values = queries
        .entries()
        .iter()
        .map(|q| lgap(db, q, r, mode))
        .collect::<Result<Vec<S>>>()?;
    deterministic_mean(values)
}
