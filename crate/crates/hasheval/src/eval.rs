//! Whole-run evaluation: per-query metrics under every requested tie
//! policy, aggregate means, AP bounds, mLGAP and utilization, assembled
//! into one machine-readable report.
//!
//! Queries are evaluated in parallel; every aggregate uses the crate's
//! fixed deterministic reduction order, so a report is byte-identical
//! across runs and worker counts for the same inputs and seed.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{utilization_report, UtilizationReport};
use crate::dataset::LabeledCodeSet;
use crate::error::{Error, Result};
use crate::metrics::{
    ap_bounds, average_precision, lgap_skipping, RankedRetrieval, RelevanceMode, TiePolicy,
};
use crate::scalar::deterministic_mean;

/// Tie policy selector as it appears in reports and on the command line;
/// `Random` resolves to a seeded policy using the run's seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Best,
    Worst,
    Random,
    Stable,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Best => "best",
            PolicyKind::Worst => "worst",
            PolicyKind::Random => "random",
            PolicyKind::Stable => "stable",
        }
    }

    pub fn to_policy(self, seed: u64) -> TiePolicy {
        match self {
            PolicyKind::Best => TiePolicy::Best,
            PolicyKind::Worst => TiePolicy::Worst,
            PolicyKind::Random => TiePolicy::SeededRandom(seed),
            PolicyKind::Stable => TiePolicy::StableInput,
        }
    }
}

/// Whether a query's own database entry takes part in its retrieval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelfMatchMode {
    Include,
    /// Skip the database entry at the query's own index; meaningful when
    /// a set is evaluated against itself.
    Exclude,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalParams {
    /// Radius for the dispersion-aware metrics.
    pub radius: u32,
    /// AP cutoff; `None` evaluates over the whole database.
    pub top_k: Option<usize>,
    pub policies: Vec<PolicyKind>,
    pub mode: RelevanceMode,
    pub self_match: SelfMatchMode,
    pub seed: u64,
}

/// Per-query scores.
#[derive(Clone, Debug, Serialize)]
pub struct QueryReport {
    pub index: usize,
    pub label: u32,
    /// AP under each requested policy, keyed by policy name.
    pub ap: BTreeMap<&'static str, f64>,
    /// Exact AP bounds over all orderings within tie blocks.
    pub ap_worst: f64,
    pub ap_best: f64,
    pub lgap: f64,
}

/// Echo of the inputs plus every aggregate the run produced.
#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub params: EvalParams,
    /// The AP cutoff actually used.
    pub top_k: usize,
    pub db_size: usize,
    pub query_count: usize,
    pub width: usize,
    /// Mean AP per requested policy.
    pub map: BTreeMap<&'static str, f64>,
    /// Means of the per-query exact AP bounds.
    pub map_worst: f64,
    pub map_best: f64,
    pub mlgap: f64,
    pub utilization: UtilizationReport,
    pub per_query: Vec<QueryReport>,
}

/// Runs the full evaluation of `queries` against `db`.
pub fn evaluate(
    queries: &LabeledCodeSet,
    db: &LabeledCodeSet,
    params: &EvalParams,
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(Error::EmptyQuerySet);
    }
    if queries.width() != db.width() {
        return Err(Error::WidthMismatch {
            expected: db.width(),
            found: queries.width(),
        });
    }
    let top_k = match params.top_k {
        Some(0) => return Err(Error::ZeroCutoff),
        Some(k) => k,
        None => db.len().max(1),
    };

    let per_query: Vec<QueryReport> = queries
        .entries()
        .par_iter()
        .enumerate()
        .map(|(index, q)| {
            let skip = match params.self_match {
                SelfMatchMode::Exclude if index < db.len() => Some(index),
                _ => None,
            };
            let ranking = RankedRetrieval::from_query_skipping(db, q, params.mode, skip)?;
            let mut ap = BTreeMap::new();
            for kind in &params.policies {
                let value: f64 = average_precision(&ranking, top_k, kind.to_policy(params.seed))?;
                ap.insert(kind.as_str(), value);
            }
            let (ap_worst, ap_best): (f64, f64) = ap_bounds(&ranking, top_k)?;
            let lgap_value: f64 = lgap_skipping(db, q, params.radius, params.mode, skip)?;
            Ok(QueryReport {
                index,
                label: q.label(),
                ap,
                ap_worst,
                ap_best,
                lgap: lgap_value,
            })
        })
        .collect::<Result<_>>()?;

    let mut map = BTreeMap::new();
    for kind in &params.policies {
        let values: Vec<f64> = per_query
            .iter()
            .map(|q| *q.ap.get(kind.as_str()).expect("policy computed above"))
            .collect();
        map.insert(kind.as_str(), deterministic_mean(values)?);
    }
    let map_worst = deterministic_mean(per_query.iter().map(|q| q.ap_worst).collect())?;
    let map_best = deterministic_mean(per_query.iter().map(|q| q.ap_best).collect())?;
    let mlgap = deterministic_mean(per_query.iter().map(|q| q.lgap).collect())?;

    Ok(EvalReport {
        params: params.clone(),
        top_k,
        db_size: db.len(),
        query_count: queries.len(),
        width: db.width(),
        map,
        map_worst,
        map_best,
        mlgap,
        utilization: utilization_report(db),
        per_query,
    })
}
