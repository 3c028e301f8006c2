//! Empirical growth exponents and desk-scale checks of the growth identity.
//!
//! The growth exponent is `limsup log|f(n)| / log n` over nonzero terms. A
//! finite prefix only supports an estimate: per dyadic block
//! `[2^j, 2^(j+1))` we keep the exact record `max |f(n)|` and its first
//! argmax, then fit a line through `(log n_j, log |f(n_j)|)` over the upper
//! half of the blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsr::{branch_and_bound, BnbOptions, JsrBracket, MatrixSet};
use crate::linalg::Scalar;
use crate::rep::{LinearRep, SequenceOracle};

/// Smallest horizon accepted by [`estimate_growth`].
pub const MIN_HORIZON: u64 = 1 << 10;

pub const DEFAULT_HORIZON: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block: u32,
    /// `None` when the block holds only zeros.
    pub argmax: Option<u64>,
    #[serde(with = "crate::serde_float")]
    pub max_abs: f64,
    #[serde(with = "crate::serde_float")]
    pub ln_max: f64,
    pub nonzero: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    #[serde(with = "crate::serde_float")]
    pub value: f64,
    /// `max_j log|f(n_j)| / log n_j` over block records with `n_j ≥ 2`.
    #[serde(with = "crate::serde_float")]
    pub limsup_proxy: f64,
    pub blocks: Vec<BlockRecord>,
    /// Inclusive range of block indices used by the fit.
    pub fit_window: (u32, u32),
    #[serde(with = "crate::serde_float")]
    pub nonzero_fraction: f64,
    pub horizon: u64,
}

/// Rejects sequences whose upper half of `terms` is identically zero.
pub fn check_not_eventually_zero(terms: &[Scalar]) -> Result<()> {
    let half = terms.len() / 2;
    if terms[half..].iter().all(Scalar::is_zero) {
        Err(Error::EventuallyZero)
    } else {
        Ok(())
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Growth estimate from the first `horizon` terms of `terms`. Only complete
/// dyadic blocks below the horizon are used.
pub fn estimate_growth_terms(terms: &[Scalar], horizon: u64) -> Result<GrowthEstimate> {
    if horizon < MIN_HORIZON {
        return Err(Error::HorizonTooSmall {
            required: MIN_HORIZON,
            available: horizon,
        });
    }
    if (terms.len() as u64) < horizon {
        return Err(Error::HorizonTooSmall {
            required: horizon,
            available: terms.len() as u64,
        });
    }
    let terms = &terms[..horizon as usize];
    check_not_eventually_zero(terms)?;

    let mut blocks = Vec::new();
    let mut nonzero_total = 0u64;
    let mut j = 0u32;
    while (2u64 << j) <= horizon {
        let (lo, hi) = (1u64 << j, 2u64 << j);
        let mut best: Option<(u64, Scalar)> = None;
        let mut nonzero = 0;
        for n in lo..hi {
            let t = &terms[n as usize];
            if t.is_zero() {
                continue;
            }
            nonzero += 1;
            let a = t.abs();
            if best.as_ref().is_none_or(|(_, b)| a > *b) {
                best = Some((n, a));
            }
        }
        nonzero_total += nonzero;
        blocks.push(match best {
            Some((n, a)) => BlockRecord {
                block: j,
                argmax: Some(n),
                max_abs: a.to_f64(),
                ln_max: a.ln_abs(),
                nonzero,
            },
            None => BlockRecord {
                block: j,
                argmax: None,
                max_abs: 0.0,
                ln_max: f64::NEG_INFINITY,
                nonzero,
            },
        });
        j += 1;
    }

    let count = blocks.len() as u32;
    let fit_window = (count / 2, count - 1);
    let points: Vec<(f64, f64)> = blocks[fit_window.0 as usize..]
        .iter()
        .filter_map(|b| b.argmax.map(|n| ((n as f64).ln(), b.ln_max)))
        .collect();
    let limsup_proxy = blocks
        .iter()
        .filter_map(|b| {
            b.argmax
                .filter(|&n| n >= 2)
                .map(|n| b.ln_max / (n as f64).ln())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let value = least_squares_slope(&points).unwrap_or(limsup_proxy);
    let covered = (1u64 << count) - 1;
    Ok(GrowthEstimate {
        value,
        limsup_proxy,
        blocks,
        fit_window,
        nonzero_fraction: nonzero_total as f64 / covered as f64,
        horizon,
    })
}

pub fn estimate_growth(oracle: &SequenceOracle, horizon: u64) -> Result<GrowthEstimate> {
    estimate_growth_terms(oracle.terms(), horizon)
}

pub fn estimate_growth_rep(rep: &LinearRep, horizon: u64) -> Result<GrowthEstimate> {
    if horizon < MIN_HORIZON {
        return Err(Error::HorizonTooSmall {
            required: MIN_HORIZON,
            available: horizon,
        });
    }
    estimate_growth_terms(&rep.eval_prefix(horizon), horizon)
}

/// Tolerance and search limits for the JSR bracket used by growth checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSettings {
    pub tol: f64,
    pub bnb: BnbOptions,
}

impl Default for BoundSettings {
    fn default() -> Self {
        BoundSettings {
            tol: 1e-3,
            bnb: BnbOptions::default(),
        }
    }
}

impl BoundSettings {
    pub fn bracket(&self, rep: &LinearRep) -> Result<JsrBracket> {
        branch_and_bound(&MatrixSet::from_rep(rep), self.tol, &self.bnb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperGrowthReport {
    #[serde(with = "crate::serde_float")]
    pub ub: f64,
    pub eps: f64,
    /// `log_k(ub + eps)`.
    #[serde(with = "crate::serde_float")]
    pub exponent: f64,
    #[serde(with = "crate::serde_float")]
    pub c_emp: f64,
    pub argmax: u64,
    pub horizon: u64,
    /// No record in the top quarter `[3N/4, N)`.
    pub stable: bool,
}

/// `c_emp = max_{1≤n<N} |f(n)| / n^(log_k(ub+eps))` with `ub` the upper
/// end of the JSR bracket. Ties keep the smallest `n`.
pub fn check_upper_growth(
    rep: &LinearRep,
    eps: f64,
    horizon: u64,
    settings: &BoundSettings,
) -> Result<UpperGrowthReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let ub = settings.bracket(rep)?.upper;
    let terms = rep.eval_prefix(horizon);
    Ok(upper_growth_from_terms(&terms, rep.k(), ub, eps))
}

pub fn upper_growth_from_terms(terms: &[Scalar], k: u32, ub: f64, eps: f64) -> UpperGrowthReport {
    let exponent = (ub + eps).ln() / (k as f64).ln();
    let mut best = f64::NEG_INFINITY;
    let mut argmax = 1;
    for (n, t) in terms.iter().enumerate().skip(1) {
        if t.is_zero() {
            continue;
        }
        let score = t.ln_abs() - exponent * (n as f64).ln();
        if score > best {
            best = score;
            argmax = n as u64;
        }
    }
    let horizon = terms.len() as u64;
    UpperGrowthReport {
        ub,
        eps,
        exponent,
        c_emp: best.exp(),
        argmax,
        horizon,
        stable: argmax < horizon / 4 * 3,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    #[serde(with = "crate::serde_float")]
    pub grexp: f64,
    #[serde(with = "crate::serde_float")]
    pub limsup_proxy: f64,
    /// `None` stands for `−∞` (a zero lower bound).
    pub log_k_lower: Option<f64>,
    pub log_k_upper: Option<f64>,
    pub tol: f64,
    /// Distance from the estimate to the nearer end of the widened
    /// interval; negative on failure.
    #[serde(with = "crate::serde_float")]
    pub margin: f64,
    pub pass: bool,
    pub provenance: String,
    pub bracket: JsrBracket,
    pub blocks: Vec<BlockRecord>,
}

/// Checks `log_k(lower) − tol ≤ GrExp_est ≤ log_k(upper) + tol`.
///
/// Refuses representations that are not basis-grade unless
/// `allow_non_basis` is set.
pub fn verify_theorem(
    rep: &LinearRep,
    horizon: u64,
    tol: f64,
    settings: &BoundSettings,
    allow_non_basis: bool,
) -> Result<TheoremReport> {
    if !allow_non_basis {
        rep.require_basis()?;
    }
    let estimate = estimate_growth_rep(rep, horizon)?;
    let bracket = settings.bracket(rep)?;
    let ln_k = (rep.k() as f64).ln();
    let log_k = |x: f64| if x > 0.0 { Some(x.ln() / ln_k) } else { None };
    let (lo, hi) = (log_k(bracket.lower), log_k(bracket.upper));
    let below = estimate.value - (lo.unwrap_or(f64::NEG_INFINITY) - tol);
    let above = hi.unwrap_or(f64::NEG_INFINITY) + tol - estimate.value;
    let margin = below.min(above);
    Ok(TheoremReport {
        grexp: estimate.value,
        limsup_proxy: estimate.limsup_proxy,
        log_k_lower: lo,
        log_k_upper: hi,
        tol,
        margin,
        pass: margin >= 0.0,
        provenance: rep.provenance().as_str().to_string(),
        bracket,
        blocks: estimate.blocks,
    })
}
