//! Pairwise training losses over real-valued (pre-binarization) code
//! vectors, as standalone functions: the classical squared-distance
//! contrastive loss and two L1 buffer-zone variants that stop pulling
//! same-class codes all the way together, so learned codes stay dispersed.
//!
//! Label convention: `y = 0` means the two samples share a class and
//! `y = 1` means they differ; likewise `superclass_y` for superclasses.

use num_traits::{Float, FromPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};

/// Which margin defaults a dataset needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// Class labels only: one buffer zone.
    SingleLabel,
    /// Class plus superclass labels: two nested buffer zones.
    TwoLevel,
}

/// Margins and buffer-zone bounds for the losses.
///
/// Invariants: `m > 0`, `0 < r1 < r2`, and when the second zone is present
/// `r2 <= r3 < r4`. The regularizer weight `alpha` has no sensible
/// universal default and must always be supplied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossConfig<F> {
    pub m: F,
    pub r1: F,
    pub r2: F,
    pub r3: Option<F>,
    pub r4: Option<F>,
    pub alpha: F,
}

impl<F: Float> LossConfig<F> {
    pub fn new(m: F, r1: F, r2: F, r3: Option<F>, r4: Option<F>, alpha: F) -> Result<Self> {
        let fail = |reason: &str| Error::InvalidLossConfig {
            reason: reason.to_string(),
        };
        for (name, value) in [
            ("m", Some(m)),
            ("r1", Some(r1)),
            ("r2", Some(r2)),
            ("r3", r3),
            ("r4", r4),
            ("alpha", Some(alpha)),
        ] {
            if value.is_some_and(|v| !v.is_finite()) {
                return Err(fail(&format!("{} must be finite", name)));
            }
        }
        if m <= F::zero() {
            return Err(fail("margin m must be positive"));
        }
        if r1 <= F::zero() || r2 <= r1 {
            return Err(fail("bounds must satisfy 0 < r1 < r2"));
        }
        match (r3, r4) {
            (Some(r3), Some(r4)) => {
                if r3 < r2 || r4 <= r3 {
                    return Err(fail("bounds must satisfy r2 <= r3 < r4"));
                }
            }
            (None, None) => {}
            _ => return Err(fail("r3 and r4 must be given together")),
        }
        Ok(Self {
            m,
            r1,
            r2,
            r3,
            r4,
            alpha,
        })
    }
}

/// The heuristic margin settings for a `k`-bit space: `m = 2k` with
/// buffer zone `[k/6, k/3]`, split into `[k/12, k/6]` and `[k/6, k/3]`
/// for two-level datasets.
pub fn default_config<F: Float + FromPrimitive>(
    k: usize,
    kind: DatasetKind,
    alpha: F,
) -> Result<LossConfig<F>> {
    if k == 0 {
        return Err(Error::InvalidLossConfig {
            reason: "code length must be at least 1".to_string(),
        });
    }
    let kf = F::from_usize(k).expect("width fits the float");
    let f = |d: f64| kf / F::from_f64(d).expect("constant fits the float");
    let m = kf + kf;
    match kind {
        DatasetKind::SingleLabel => LossConfig::new(m, f(6.0), f(3.0), None, None, alpha),
        DatasetKind::TwoLevel => {
            LossConfig::new(m, f(12.0), f(6.0), Some(f(6.0)), Some(f(3.0)), alpha)
        }
    }
}

/// A pair of real code vectors with similarity flags.
#[derive(Clone, Debug)]
pub struct RealCodePair<F> {
    b1: Vec<F>,
    b2: Vec<F>,
    y: u8,
    superclass_y: Option<u8>,
}

impl<F: Float> RealCodePair<F> {
    /// `y = 0` for a same-class pair, 1 otherwise; `superclass_y` likewise
    /// for superclasses when the dataset has them.
    pub fn new(b1: Vec<F>, b2: Vec<F>, y: u8, superclass_y: Option<u8>) -> Result<Self> {
        if b1.len() != b2.len() || b1.is_empty() {
            return Err(Error::VectorLengthMismatch {
                left: b1.len(),
                right: b2.len(),
            });
        }
        if b1.iter().chain(&b2).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        for flag in [Some(y), superclass_y].into_iter().flatten() {
            if flag > 1 {
                return Err(Error::InvalidSimilarityFlag { value: flag });
            }
        }
        Ok(Self {
            b1,
            b2,
            y,
            superclass_y,
        })
    }

    pub fn len(&self) -> usize {
        self.b1.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn b1(&self) -> &[F] {
        &self.b1
    }

    pub fn b2(&self) -> &[F] {
        &self.b2
    }

    pub fn y(&self) -> u8 {
        self.y
    }

    pub fn superclass_y(&self) -> Option<u8> {
        self.superclass_y
    }
}

fn l2_squared<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

fn l1<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (&x, &y)| acc + (x - y).abs())
}

fn hinge<F: Float>(x: F) -> F {
    x.max(F::zero())
}

/// Pulls each coordinate of a code toward {-1, +1}: sum of ||v| - 1|.
/// Summed per index pair so the result is bit-exact under swapping
/// (b1, b2).
fn regularizer<F: Float>(pair: &RealCodePair<F>) -> F {
    pair.b1
        .iter()
        .zip(&pair.b2)
        .fold(F::zero(), |acc, (&a, &b)| {
            acc + ((a.abs() - F::one()).abs() + (b.abs() - F::one()).abs())
        })
}

fn half<F: Float>() -> F {
    F::one() / (F::one() + F::one())
}

/// Squared-distance contrastive loss: (1-y)/2 * ||b1-b2||^2 +
/// y/2 * max(m - ||b1-b2||^2, 0) + alpha * regularizer.
pub fn dsh_loss<F: Float>(pair: &RealCodePair<F>, cfg: &LossConfig<F>) -> F {
    let d2 = l2_squared(&pair.b1, &pair.b2);
    let y = F::from(pair.y).expect("flag fits the float");
    let attract = (F::one() - y) * d2;
    let repel = y * hinge(cfg.m - d2);
    half::<F>() * (attract + repel) + cfg.alpha * regularizer(pair)
}

fn buffer_zone<F: Float>(d: F, lo: F, hi: F) -> F {
    hinge(lo - d) + hinge(d - hi)
}

/// Buffer-zone loss for single-label data: same-class pairs are free
/// inside the L1 distance band [r1, r2] and penalized outside it;
/// different-class pairs pay an L1 hinge at margin m.
pub fn buffer_loss_single<F: Float>(pair: &RealCodePair<F>, cfg: &LossConfig<F>) -> F {
    let d = l1(&pair.b1, &pair.b2);
    let y = F::from(pair.y).expect("flag fits the float");
    let attract = (F::one() - y) * buffer_zone(d, cfg.r1, cfg.r2);
    let repel = y * hinge(cfg.m - d);
    half::<F>() * (attract + repel) + cfg.alpha * regularizer(pair)
}

/// Two-level buffer-zone loss: a tight band [r1, r2] for same-class
/// pairs, a wider band [r3, r4] for same-superclass pairs, and the margin
/// hinge for pairs from different superclasses.
pub fn buffer_loss_two_level<F: Float>(pair: &RealCodePair<F>, cfg: &LossConfig<F>) -> Result<F> {
    let capital_y = pair.superclass_y.ok_or(Error::MissingSuperclassFlag)?;
    let (r3, r4) = match (cfg.r3, cfg.r4) {
        (Some(r3), Some(r4)) => (r3, r4),
        _ => {
            return Err(Error::InvalidLossConfig {
                reason: "two-level loss needs r3 and r4".to_string(),
            })
        }
    };
    let d = l1(&pair.b1, &pair.b2);
    let y = F::from(pair.y).expect("flag fits the float");
    let cy = F::from(capital_y).expect("flag fits the float");
    let fine = (F::one() - y) * buffer_zone(d, cfg.r1, cfg.r2);
    let coarse = (F::one() - cy) * buffer_zone(d, r3, r4);
    let repel = cy * hinge(cfg.m - d);
    Ok(half::<F>() * (fine + coarse + repel) + cfg.alpha * regularizer(pair))
}

/// d/dv of ||v| - 1|, defined as 0 at the non-differentiable points.
fn regularizer_grad<F: Float>(v: F) -> F {
    let s_outer = (v.abs() - F::one()).signum_or_zero();
    let s_inner = v.signum_or_zero();
    s_outer * s_inner
}

trait SignumOrZero {
    fn signum_or_zero(self) -> Self;
}

impl<F: Float> SignumOrZero for F {
    fn signum_or_zero(self) -> Self {
        if self > F::zero() {
            F::one()
        } else if self < F::zero() {
            -F::one()
        } else {
            F::zero()
        }
    }
}

/// Subgradient of [`dsh_loss`] with respect to (b1, b2). At hinge kinks
/// and the non-differentiable points of the regularizer the zero
/// subgradient is chosen.
pub fn dsh_loss_gradients<F: Float>(
    pair: &RealCodePair<F>,
    cfg: &LossConfig<F>,
) -> (Vec<F>, Vec<F>) {
    let d2 = l2_squared(&pair.b1, &pair.b2);
    let y = F::from(pair.y).expect("flag fits the float");
    // d/db1 of 1/2 d2 is (b1 - b2); hinge side flips the sign when active
    let weight = (F::one() - y)
        - y * if cfg.m - d2 > F::zero() {
            F::one()
        } else {
            F::zero()
        };
    let mut g1 = Vec::with_capacity(pair.len());
    let mut g2 = Vec::with_capacity(pair.len());
    for (&a, &b) in pair.b1.iter().zip(&pair.b2) {
        let diff = a - b;
        g1.push(weight * diff + cfg.alpha * regularizer_grad(a));
        g2.push(-(weight * diff) + cfg.alpha * regularizer_grad(b));
    }
    (g1, g2)
}

fn l1_gradients<F: Float>(pair: &RealCodePair<F>, dloss_dd: F, alpha: F) -> (Vec<F>, Vec<F>) {
    let mut g1 = Vec::with_capacity(pair.len());
    let mut g2 = Vec::with_capacity(pair.len());
    for (&a, &b) in pair.b1.iter().zip(&pair.b2) {
        let s = (a - b).signum_or_zero();
        g1.push(dloss_dd * s + alpha * regularizer_grad(a));
        g2.push(-(dloss_dd * s) + alpha * regularizer_grad(b));
    }
    (g1, g2)
}

fn buffer_zone_grad<F: Float>(d: F, lo: F, hi: F) -> F {
    let below = if lo - d > F::zero() {
        -F::one()
    } else {
        F::zero()
    };
    let above = if d - hi > F::zero() {
        F::one()
    } else {
        F::zero()
    };
    below + above
}

/// Subgradient of [`buffer_loss_single`]; zero subgradients at kinks.
pub fn buffer_loss_single_gradients<F: Float>(
    pair: &RealCodePair<F>,
    cfg: &LossConfig<F>,
) -> (Vec<F>, Vec<F>) {
    let d = l1(&pair.b1, &pair.b2);
    let y = F::from(pair.y).expect("flag fits the float");
    let attract = (F::one() - y) * buffer_zone_grad(d, cfg.r1, cfg.r2);
    let repel = y * if cfg.m - d > F::zero() {
        -F::one()
    } else {
        F::zero()
    };
    l1_gradients(pair, half::<F>() * (attract + repel), cfg.alpha)
}

/// Subgradient of [`buffer_loss_two_level`]; zero subgradients at kinks.
pub fn buffer_loss_two_level_gradients<F: Float>(
    pair: &RealCodePair<F>,
    cfg: &LossConfig<F>,
) -> Result<(Vec<F>, Vec<F>)> {
    let capital_y = pair.superclass_y.ok_or(Error::MissingSuperclassFlag)?;
    let (r3, r4) = match (cfg.r3, cfg.r4) {
        (Some(r3), Some(r4)) => (r3, r4),
        _ => {
            return Err(Error::InvalidLossConfig {
                reason: "two-level loss needs r3 and r4".to_string(),
            })
        }
    };
    let d = l1(&pair.b1, &pair.b2);
    let y = F::from(pair.y).expect("flag fits the float");
    let cy = F::from(capital_y).expect("flag fits the float");
    let fine = (F::one() - y) * buffer_zone_grad(d, cfg.r1, cfg.r2);
    let coarse = (F::one() - cy) * buffer_zone_grad(d, r3, r4);
    let repel = cy
        * if cfg.m - d > F::zero() {
            -F::one()
        } else {
            F::zero()
        };
    Ok(l1_gradients(
        pair,
        half::<F>() * (fine + coarse + repel),
        cfg.alpha,
    ))
}
