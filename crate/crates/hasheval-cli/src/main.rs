//! Command-line interface over the hasheval library.
//!
//! Exit codes: 0 on success, 2 for usage/parse errors, 3 when an internal
//! invariant is violated.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hasheval::analysis::{proposition_check, utilization_report};
use hasheval::eval::{evaluate, EvalParams, PolicyKind, SelfMatchMode};
use hasheval::losses::{
    buffer_loss_single, buffer_loss_two_level, default_config, dsh_loss, DatasetKind, LossConfig,
    RealCodePair,
};
use hasheval::metrics::RelevanceMode;
use hasheval::synth::{synthesize, SynthParams};
use hasheval::{histogram, io as formats, LabeledCodeSet};

#[derive(Parser)]
#[command(
    name = "hasheval",
    version,
    about = "Evaluate hashing-based retrieval over bit-packed binary codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Best,
    Worst,
    Random,
    Stable,
}

impl From<PolicyArg> for PolicyKind {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Best => PolicyKind::Best,
            PolicyArg::Worst => PolicyKind::Worst,
            PolicyArg::Random => PolicyKind::Random,
            PolicyArg::Stable => PolicyKind::Stable,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Fine,
    Coarse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SelfMatchArg {
    Include,
    Exclude,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Single,
    TwoLevel,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query set against a database; emits a JSON report
    Eval {
        /// Database file (text or binary, detected by magic bytes)
        db: PathBuf,
        /// Query file (text or binary)
        queries: PathBuf,
        /// Radius for the locality-group metrics (LGAP/mLGAP)
        #[arg(long)]
        radius: u32,
        /// AP cutoff; defaults to the database size
        #[arg(long)]
        topk: Option<usize>,
        /// Tie policy to aggregate; repeatable
        #[arg(long = "policy", value_enum)]
        policies: Vec<PolicyArg>,
        /// Relevance by fine class label or coarse superclass label
        #[arg(long, value_enum, default_value = "fine")]
        mode: ModeArg,
        /// Master seed for the random tie policy
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Whether a query's own database entry takes part in retrieval;
        /// defaults to exclude when db and queries are the same path
        #[arg(long = "self-match", value_enum)]
        self_match: Option<SelfMatchArg>,
    },
    /// Dump the per-code occurrence histogram of a dataset
    Hist {
        db: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Class geometry, separation verdict and the orthodrome bound probe
    Analyze {
        db: PathBuf,
        /// Maximum number of orthodromes to enumerate or sample
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a synthetic dataset and write it in the binary format
    Synth {
        out: PathBuf,
        /// Code width in bits
        #[arg(long)]
        k: usize,
        /// Number of classes
        #[arg(long)]
        classes: u32,
        /// Samples drawn per class
        #[arg(long = "per-class")]
        per_class: u32,
        /// Hamming radius of each class ball around its center
        #[arg(long = "intra-radius")]
        intra_radius: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compute the pairwise losses for a pair list file
    Losses {
        pairs: PathBuf,
        #[arg(long = "dataset-kind", value_enum)]
        dataset_kind: KindArg,
        /// Regularizer weight; must be supplied explicitly
        #[arg(long)]
        alpha: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal invariant violation");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Eval {
            db,
            queries,
            radius,
            topk,
            policies,
            mode,
            seed,
            self_match,
        } => cmd_eval(
            &db, &queries, radius, topk, &policies, mode, seed, self_match,
        ),
        Command::Hist { db, format } => cmd_hist(&db, format),
        Command::Analyze { db, budget, seed } => cmd_analyze(&db, budget, seed),
        Command::Synth {
            out,
            k,
            classes,
            per_class,
            intra_radius,
            seed,
        } => cmd_synth(&out, k, classes, per_class, intra_radius, seed),
        Command::Losses {
            pairs,
            dataset_kind,
            alpha,
        } => cmd_losses(&pairs, dataset_kind, alpha),
    }
}

fn load(path: &Path) -> anyhow::Result<LabeledCodeSet> {
    Ok(formats::read_dataset(path)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    db_path: &Path,
    query_path: &Path,
    radius: u32,
    topk: Option<usize>,
    policies: &[PolicyArg],
    mode: ModeArg,
    seed: u64,
    self_match: Option<SelfMatchArg>,
) -> anyhow::Result<()> {
    let db = load(db_path)?;
    let queries = load(query_path)?;
    let self_match = match self_match {
        Some(SelfMatchArg::Include) => SelfMatchMode::Include,
        Some(SelfMatchArg::Exclude) => SelfMatchMode::Exclude,
        None if db_path == query_path => SelfMatchMode::Exclude,
        None => SelfMatchMode::Include,
    };
    let mut kinds: Vec<PolicyKind> = policies.iter().map(|&p| p.into()).collect();
    if kinds.is_empty() {
        kinds = vec![PolicyKind::Stable];
    }
    kinds.sort();
    kinds.dedup();
    let params = EvalParams {
        radius,
        top_k: topk,
        policies: kinds,
        mode: match mode {
            ModeArg::Fine => RelevanceMode::FineLabel,
            ModeArg::Coarse => RelevanceMode::CoarseLabel,
        },
        self_match,
        seed,
    };
    let report = evaluate(&queries, &db, &params)?;
    let mut value = serde_json::to_value(&report)?;
    value["params"]["db"] = json!(db_path.display().to_string());
    value["params"]["queries"] = json!(query_path.display().to_string());
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn cmd_hist(db_path: &Path, format: FormatArg) -> anyhow::Result<()> {
    let db = load(db_path)?;
    let hist = histogram(db.width(), db.codes())?;
    let utilization = utilization_report(&db);
    match format {
        FormatArg::Csv => {
            println!("code,count");
            for (code, count) in hist.iter() {
                println!("{},{}", code, count);
            }
            println!("distinct,{}", hist.distinct());
            println!("utilization,{}", utilization.global_utilization);
        }
        FormatArg::Json => {
            let rows: Vec<Value> = hist
                .iter()
                .map(|(code, count)| json!({"code": code.to_string(), "count": count}))
                .collect();
            let out = json!({
                "params": {"db": db_path.display().to_string()},
                "width": db.width(),
                "rows": rows,
                "distinct": hist.distinct(),
                "total": hist.total(),
                "utilization": utilization.global_utilization,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
    }
    Ok(())
}

fn cmd_analyze(db_path: &Path, budget: u64, seed: u64) -> anyhow::Result<()> {
    let db = load(db_path)?;
    let proposition = proposition_check(&db, budget, seed);
    let utilization = utilization_report(&db);

    let (classes, h_tilde_s, holds, warning) = match &proposition.separation {
        Some(sep) => {
            let classes: Vec<Value> = sep
                .classes
                .iter()
                .map(
                    |g| json!({"class_id": g.class_id, "diameter": g.diameter, "margin": g.margin}),
                )
                .collect();
            (
                Value::Array(classes),
                json!(sep.h_tilde_s),
                json!(sep.holds),
                Value::Null,
            )
        }
        None => {
            // margins need a second class; report diameters only
            let classes: Vec<Value> = db
                .class_ids()
                .into_iter()
                .map(|id| {
                    let diameter = hasheval::analysis::class_diameter(&db, id)
                        .expect("class ids come from the dataset");
                    json!({"class_id": id, "diameter": diameter, "margin": Value::Null})
                })
                .collect();
            (
                Value::Array(classes),
                Value::Null,
                Value::Null,
                json!("fewer than two classes: margins and separation omitted"),
            )
        }
    };

    let out = json!({
        "params": {"db": db_path.display().to_string(), "budget": budget, "seed": seed},
        "width": db.width(),
        "db_size": db.len(),
        "classes": classes,
        "h_tilde_s": h_tilde_s,
        "separation_holds": holds,
        "warning": warning,
        "proposition": serde_json::to_value(&proposition)?,
        "utilization": serde_json::to_value(&utilization)?,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn cmd_synth(
    out_path: &Path,
    k: usize,
    classes: u32,
    per_class: u32,
    intra_radius: u32,
    seed: u64,
) -> anyhow::Result<()> {
    let params = SynthParams {
        width: k,
        n_classes: classes,
        per_class,
        intra_radius,
        seed,
    };
    let db = synthesize(&params)?;
    formats::write_binary_file(&db, out_path)?;
    let out = json!({
        "params": {
            "k": k,
            "classes": classes,
            "per_class": per_class,
            "intra_radius": intra_radius,
            "seed": seed,
        },
        "out": out_path.display().to_string(),
        "records": db.len(),
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

/// One record of the pair list file: `y[,Y] v1 v2 ... | u1 u2 ...`.
fn parse_pairs(src: &str, origin: &str) -> anyhow::Result<Vec<RealCodePair<f64>>> {
    let mut pairs = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fail = |reason: String| anyhow::anyhow!("{}:{}: {}", origin, lineno, reason);
        let mut tokens = line.split_whitespace();
        let flags = tokens.next().expect("non-empty line");
        let (y, capital_y) = match flags.split_once(',') {
            None => (
                flags
                    .parse::<u8>()
                    .map_err(|_| fail(format!("invalid similarity flag {:?}", flags)))?,
                None,
            ),
            Some((a, b)) => (
                a.parse::<u8>()
                    .map_err(|_| fail(format!("invalid similarity flag {:?}", a)))?,
                Some(
                    b.parse::<u8>()
                        .map_err(|_| fail(format!("invalid superclass flag {:?}", b)))?,
                ),
            ),
        };
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        let mut seen_bar = false;
        for tok in tokens {
            if tok == "|" {
                if seen_bar {
                    return Err(fail("more than one '|' separator".to_string()));
                }
                seen_bar = true;
                continue;
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| fail(format!("invalid value {:?}", tok)))?;
            if seen_bar { &mut b2 } else { &mut b1 }.push(v);
        }
        if !seen_bar {
            return Err(fail(
                "missing '|' separator between the two vectors".to_string(),
            ));
        }
        if b1.len() != b2.len() || b1.is_empty() {
            return Err(fail(format!(
                "vectors must have equal nonzero length, got {} and {}",
                b1.len(),
                b2.len()
            )));
        }
        match width {
            None => width = Some(b1.len()),
            Some(w) if w != b1.len() => {
                return Err(fail(format!(
                    "vector length {} does not match {}",
                    b1.len(),
                    w
                )))
            }
            _ => {}
        }
        pairs.push(RealCodePair::new(b1, b2, y, capital_y).map_err(|e| fail(e.to_string()))?);
    }
    if pairs.is_empty() {
        anyhow::bail!("{}: no pairs in file", origin);
    }
    Ok(pairs)
}

fn cmd_losses(pairs_path: &Path, kind: KindArg, alpha: f64) -> anyhow::Result<()> {
    let src =
        std::fs::read_to_string(pairs_path).with_context(|| format!("{}", pairs_path.display()))?;
    let pairs = parse_pairs(&src, &pairs_path.display().to_string())?;
    let k = pairs[0].len();
    let kind = match kind {
        KindArg::Single => DatasetKind::SingleLabel,
        KindArg::TwoLevel => DatasetKind::TwoLevel,
    };
    let cfg: LossConfig<f64> = default_config(k, kind, alpha)?;

    let mut rows = Vec::with_capacity(pairs.len());
    let mut total_dsh = 0.0;
    let mut total_single = 0.0;
    let mut total_two_level = if kind == DatasetKind::TwoLevel {
        Some(0.0)
    } else {
        None
    };
    for (index, pair) in pairs.iter().enumerate() {
        let dsh = dsh_loss(pair, &cfg);
        let single = buffer_loss_single(pair, &cfg);
        total_dsh += dsh;
        total_single += single;
        let two_level = match total_two_level.as_mut() {
            Some(total) => {
                let v = buffer_loss_two_level(pair, &cfg)?;
                *total += v;
                Some(v)
            }
            None => None,
        };
        rows.push(json!({
            "index": index,
            "y": pair.y(),
            "superclass_y": pair.superclass_y(),
            "dsh": dsh,
            "buffer_single": single,
            "buffer_two_level": two_level,
        }));
    }

    let out = json!({
        "params": {
            "pairs": pairs_path.display().to_string(),
            "k": k,
            "dataset_kind": serde_json::to_value(kind)?,
            "alpha": alpha,
            "m": cfg.m,
            "r1": cfg.r1,
            "r2": cfg.r2,
            "r3": cfg.r3,
            "r4": cfg.r4,
        },
        "pairs": rows,
        "totals": {
            "dsh": total_dsh,
            "buffer_single": total_single,
            "buffer_two_level": total_two_level,
        },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
