//! Explicit index families along which `|f|` grows at the JSR rate.
//!
//! For a basis representation write `G(n) = A_{i_0}·…·A_{i_s}·v` (the basis
//! sequences at `n`). Three ingredients are assembled:
//!
//! * a cycle word `y` of length `m` whose product `A` has `ρ(A)^(1/m)` close
//!   to the JSR lower bound;
//! * prefix words `u_1, …, u_d` (most significant digits) with `G([u_i])`
//!   spanning `ℚ^d`;
//! * suffix words `v_ℓ` (least significant digits, length `p_ℓ`, value
//!   `q_ℓ`) whose rows `wᵀ·P(v_ℓ)` span the dual space, which is the same as
//!   expanding every basis sequence as `Σ γ·f(k^p·n + q)`.
//!
//! Then `f([u_i yⁿ v_ℓ]_k) = wᵀ·P(v_ℓ)·Aⁿ·G([u_i])`, and the maximum over
//! `(i, ℓ)` is within a constant factor of `‖Aⁿ‖ ≥ ρ(A)ⁿ`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::check_not_eventually_zero;
use crate::jsr::{for_each_necklace, lower_bound, MatrixSet};
use crate::kernel::{minimize, KernelBasis};
use crate::linalg::{
    dominant_pair_estimate, spectral_radius_lower, unit_vector, DominantPair, Echelon, Insert,
    Scalar,
};
use crate::rep::{digits, DigitWord, LinearRep};

/// Indices checked when verifying a kernel expansion.
pub const EXPANSION_HORIZON: u64 = 1 << 10;

/// Terms inspected by the eventually-zero guard.
const ZERO_GUARD_TERMS: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleChoice {
    pub word: DigitWord,
    pub rate: f64,
    pub lower_bound: f64,
}

/// Shortest (then lexicographically least up to rotation) word of length at
/// most `m_max` whose product satisfies `ρ^(1/m) > lower_bound − eps`.
pub fn find_cycle(set: &MatrixSet, eps: f64, m_max: usize) -> Result<CycleChoice> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let lb = lower_bound(set, m_max);
    let k = (set.len() as u32).max(2);
    let target = lb.bound - eps;
    for m in 1..=m_max.max(1) {
        let mut found = None;
        for_each_necklace(k, m, &mut |word| {
            if word.iter().any(|&i| i as usize >= set.len()) {
                return true;
            }
            let p = set.product(word);
            let lo = spectral_radius_lower(&p.body, 30);
            let rate = if lo > 0.0 {
                ((lo.ln() + p.log_scale) / m as f64).exp()
            } else {
                0.0
            };
            if rate > target {
                found = Some((word.to_vec(), rate));
                return false;
            }
            true
        });
        if let Some((word, rate)) = found {
            return Ok(CycleChoice {
                word: DigitWord::new(word, k)?,
                rate,
                lower_bound: lb.bound,
            });
        }
    }
    // the lower-bound witness itself always qualifies
    let word = if lb.witness.is_empty() {
        DigitWord::new(vec![0], k)?
    } else {
        lb.witness
    };
    Ok(CycleChoice {
        word,
        rate: lb.bound,
        lower_bound: lb.bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanningWords {
    pub words: Vec<DigitWord>,
    /// `G([X_j])` for each word.
    pub vectors: Vec<Vec<Scalar>>,
    pub rank: usize,
}

/// Breadth-first search over words, prepending digits, until the vectors
/// `P(word)·v` reach rank `d`. Only words whose vector was new are extended.
pub fn find_spanning_words(rep: &LinearRep, budget: u64) -> Result<SpanningWords> {
    let d = rep.dim();
    let mut ech = Echelon::new(d);
    let mut out = SpanningWords {
        words: Vec::new(),
        vectors: Vec::new(),
        rank: 0,
    };
    let mut queue = VecDeque::new();
    queue.push_back((DigitWord::empty(rep.k()), rep.v().to_vec()));
    let mut tried = 0u64;
    while let Some((word, vec)) = queue.pop_front() {
        tried += 1;
        if tried > budget {
            break;
        }
        if let Insert::Independent(_) = ech.insert(vec.clone()) {
            out.words.push(word.clone());
            out.vectors.push(vec.clone());
            if ech.rank() == d {
                out.rank = d;
                return Ok(out);
            }
            for (i, a) in rep.mats().iter().enumerate() {
                let child = DigitWord::new(vec![i as u32], rep.k())?.concat(&word);
                queue.push_back((child, a.mul_vec(&vec)));
            }
        }
    }
    Err(Error::SpanningBudgetExhausted {
        budget,
        rank: ech.rank(),
        dim: d,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub gamma: Scalar,
    pub p: u32,
    pub q: u64,
}

/// `g_s(n) = Σ_ℓ γ_{ℓ,s}·f(k^(p_ℓ)·n + q_ℓ)`, where `g_s(n)` is coordinate
/// `s` of `G(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelExpansion {
    pub terms: Vec<Vec<ExpansionTerm>>,
}

impl KernelExpansion {
    /// Distinct `(p, q)` pairs in order of first use.
    pub fn suffixes(&self) -> Vec<(u32, u64)> {
        let mut out = Vec::new();
        for t in self.terms.iter().flatten() {
            if !out.contains(&(t.p, t.q)) {
                out.push((t.p, t.q));
            }
        }
        out
    }

    /// Checks the identity exactly for `n < horizon`; returns the first failure.
    pub fn verify(&self, rep: &LinearRep, horizon: u64) -> Result<()> {
        let k = rep.k() as u64;
        let p_max = self.terms.iter().flatten().map(|t| t.p).max().unwrap_or(0);
        let f = rep.eval_prefix(k.pow(p_max) * (horizon + 1));
        for n in 0..horizon {
            let g = rep.state(n);
            for (s, terms) in self.terms.iter().enumerate() {
                let sum: Scalar = terms
                    .iter()
                    .map(|t| &t.gamma * &f[(k.pow(t.p) * n + t.q) as usize])
                    .sum();
                if sum != g[s] {
                    return Err(Error::ExpansionMismatch { index: s, n });
                }
            }
        }
        Ok(())
    }
}

/// Single-term expansion read off a kernel basis: member `(ℓ, r)` is the
/// sequence `f(k^ℓ·n + r)` itself. `rep` must be the representation built
/// from `basis`.
pub fn kernel_expansion(rep: &LinearRep, basis: &KernelBasis) -> Result<KernelExpansion> {
    if basis.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: basis.dim(),
        });
    }
    let terms = basis
        .members
        .iter()
        .map(|&(p, q)| {
            vec![ExpansionTerm {
                gamma: Scalar::one(),
                p,
                q,
            }]
        })
        .collect();
    let exp = KernelExpansion { terms };
    exp.verify(rep, EXPANSION_HORIZON)?;
    Ok(exp)
}

/// Expansion for an arbitrary representation: rows `wᵀ·P(word)` are
/// collected breadth first (appending digits) until they span the dual
/// space, then each unit row is solved for exactly.
pub fn kernel_expansion_general(rep: &LinearRep, budget: u64) -> Result<KernelExpansion> {
    let d = rep.dim();
    let k = rep.k();
    let mut ech = Echelon::new(d);
    let mut rows: Vec<(u32, u64)> = Vec::new();
    let mut queue = VecDeque::new();
    queue.push_back((DigitWord::empty(k), rep.w().to_vec()));
    let mut tried = 0u64;
    while ech.rank() < d {
        let Some((word, row)) = queue.pop_front() else {
            break;
        };
        tried += 1;
        if tried > budget {
            break;
        }
        if let Insert::Independent(_) = ech.insert(row.clone()) {
            let q = word
                .value_u64()
                .ok_or_else(|| Error::InvalidArgument("suffix word too long".into()))?;
            rows.push((word.len() as u32, q));
            for (i, a) in rep.mats().iter().enumerate() {
                let child = word.concat(&DigitWord::new(vec![i as u32], k)?);
                queue.push_back((child, a.vec_mul(&row)));
            }
        }
    }
    if ech.rank() < d {
        return Err(Error::SpanningBudgetExhausted {
            budget,
            rank: ech.rank(),
            dim: d,
        });
    }
    let mut terms = Vec::with_capacity(d);
    for s in 0..d {
        let coeffs = ech.express(&unit_vector(d, s)).expect("full rank");
        terms.push(
            coeffs
                .into_iter()
                .zip(&rows)
                .filter(|(g, _)| !g.is_zero())
                .map(|(gamma, &(p, q))| ExpansionTerm { gamma, p, q })
                .collect(),
        );
    }
    let exp = KernelExpansion { terms };
    exp.verify(rep, EXPANSION_HORIZON)?;
    Ok(exp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessMode {
    /// The cycle product has a simple real dominant eigenvalue; the
    /// bilinear form uses its left and right eigenvectors.
    Eigen { lambda: f64 },
    /// Complex or tied dominant eigenvalues; the form uses seeded random
    /// weights and the threshold carries an extra `n^(−d)` factor.
    Probe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuffixWord {
    pub word: String,
    pub p: u32,
    pub q: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub n: u32,
    /// Decimal index `N` realizing the maximum.
    pub index: String,
    pub prefix: usize,
    pub suffix: usize,
    /// Exact `f(N)`.
    pub value: String,
    #[serde(with = "crate::serde_float")]
    pub ln_abs: f64,
    /// `Σ α_ℓ·β_i·f(N_{ℓ,i})`.
    #[serde(with = "crate::serde_float")]
    pub bilinear: f64,
    #[serde(with = "crate::serde_float")]
    pub ln_threshold: f64,
    #[serde(with = "crate::serde_float")]
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFamily {
    pub k: u32,
    pub dim: usize,
    pub cycle: String,
    pub m: usize,
    #[serde(with = "crate::serde_float")]
    pub rate: f64,
    pub eps: f64,
    pub mode: WitnessMode,
    /// The input was reduced before the construction.
    pub minimized: bool,
    pub prefixes: Vec<String>,
    pub suffixes: Vec<SuffixWord>,
    /// Weights of the bilinear form over suffixes and prefixes.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `Σ|α_ℓ|·Σ|β_i|`.
    #[serde(with = "crate::serde_float")]
    pub k_norm: f64,
    /// `|xᵀy| / K` for the eigenvector pair, in eigen mode.
    pub analytic_constant: Option<f64>,
    /// `|B(1)| / K / (rate − eps)^m`.
    #[serde(with = "crate::serde_float")]
    pub constant: f64,
    #[serde(with = "crate::serde_float")]
    pub ln_constant: f64,
    pub seed: u64,
    pub trace: Vec<WitnessRecord>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessOptions {
    pub m_max: usize,
    pub budget: u64,
    /// Seed for probe weights.
    pub seed: u64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            m_max: 8,
            budget: 10_000,
            seed: 0,
        }
    }
}

fn prepare(
    rep: &LinearRep,
    budget: u64,
) -> Result<(LinearRep, SpanningWords, KernelExpansion, bool)> {
    let attempt = |r: &LinearRep| -> Result<(SpanningWords, KernelExpansion)> {
        Ok((
            find_spanning_words(r, budget)?,
            kernel_expansion_general(r, budget)?,
        ))
    };
    match attempt(rep) {
        Ok((s, e)) => Ok((rep.clone(), s, e, false)),
        Err(Error::SpanningBudgetExhausted { .. }) => {
            let reduced = minimize(rep);
            reduced.require_basis()?;
            let (s, e) = attempt(&reduced)?;
            Ok((reduced, s, e, true))
        }
        Err(e) => Err(e),
    }
}

fn float_matrix(rows: &[Vec<Scalar>]) -> DMatrix<f64> {
    let d = rows.len();
    DMatrix::from_fn(d, d, |i, j| rows[i][j].to_f64())
}

struct Weights {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    analytic: Option<f64>,
}

/// `α` with `Σ α_ℓ r_ℓ = x` and `β` with `Σ β_i G_i = y`.
fn weights_for(
    rows: &DMatrix<f64>,
    cols: &DMatrix<f64>,
    x: &[f64],
    y: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let alpha = rows
        .transpose()
        .lu()
        .solve(&DVector::from_column_slice(x))?;
    let beta = cols.clone().lu().solve(&DVector::from_column_slice(y))?;
    Some((
        alpha.iter().copied().collect(),
        beta.iter().copied().collect(),
    ))
}

fn choose_weights(
    mode: &WitnessMode,
    pair: Option<&DominantPair>,
    rows: &DMatrix<f64>,
    cols: &DMatrix<f64>,
    seed: u64,
) -> Result<Weights> {
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    if let (WitnessMode::Eigen { .. }, Some(p)) = (mode, pair) {
        if let Some((alpha, beta)) = weights_for(rows, cols, &p.left, &p.right) {
            let k_norm = alpha.iter().map(|a| a.abs()).sum::<f64>()
                * beta.iter().map(|b| b.abs()).sum::<f64>();
            let xy: f64 = p.left.iter().zip(&p.right).map(|(a, b)| a * b).sum();
            return Ok(Weights {
                analytic: Some(xy.abs() / k_norm),
                alpha,
                beta,
            });
        }
    }
    let d = rows.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let alpha: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let beta: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let x = rows.transpose() * DVector::from_column_slice(&alpha);
        let y = cols * DVector::from_column_slice(&beta);
        if x.dot(&y).abs() > 1e-6 * norm(x.as_slice()) * norm(y.as_slice()) {
            return Ok(Weights {
                alpha,
                beta,
                analytic: None,
            });
        }
    }
    Err(Error::InvalidArgument(
        "no non-orthogonal probe pair found".into(),
    ))
}

/// Builds the index family `[u_i yⁿ v_ℓ]_k` for `n = 1..=n_max` and checks
/// `max |f(N)| ≥ c·(rate − eps)^(n·m)`.
///
/// The constant is calibrated at `n = 1` from the bilinear form
/// `B(n) = Σ α_ℓ·β_i·f([u_i yⁿ v_ℓ]_k) = xᵀ·Aⁿ·y`, since
/// `max |f(N)| ≥ |B(n)| / K`. Representations whose spanning or dual rank
/// is deficient are minimized first, which is flagged in the result. A
/// failed growth check is reported through `pass` and the per-`n` trace
/// rather than as an error.
pub fn build_witness(
    rep: &LinearRep,
    eps: f64,
    n_max: u32,
    options: &WitnessOptions,
) -> Result<WitnessFamily> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    rep.require_basis()?;
    check_not_eventually_zero(&rep.eval_prefix(ZERO_GUARD_TERMS))?;

    let (rep, spanning, expansion, minimized) = prepare(rep, options.budget)?;
    let k = rep.k();
    let d = rep.dim();
    let set = MatrixSet::from_rep(&rep);
    let cycle = find_cycle(&set, eps, options.m_max)?;
    let m = cycle.word.len();
    let product = set.product(cycle.word.digits());
    let pair = dominant_pair_estimate(&product.body, 1e-9);
    let mode = match &pair {
        Some(p) => WitnessMode::Eigen {
            lambda: p.lambda * product.log_scale.exp(),
        },
        None => WitnessMode::Probe,
    };

    let terms = expansion.suffixes();
    let suffixes: Vec<DigitWord> = terms
        .iter()
        .map(|&(p, q)| digits(q, k).map(|w| w.padded(p as usize)))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<Scalar>> = suffixes
        .iter()
        .map(|s| rep.apply_word_row(rep.w(), s))
        .collect();
    let cols: Vec<Vec<Scalar>> = spanning.vectors.clone();
    let col_matrix = float_matrix(&cols).transpose();
    let weights = choose_weights(
        &mode,
        pair.as_ref(),
        &float_matrix(&rows),
        &col_matrix,
        options.seed,
    )?;
    let k_norm = weights.alpha.iter().map(|a| a.abs()).sum::<f64>()
        * weights.beta.iter().map(|b| b.abs()).sum::<f64>();

    let base = cycle.rate - eps;
    let ln_base = if base > 0.0 {
        base.ln()
    } else {
        f64::NEG_INFINITY
    };
    let mut trace = Vec::with_capacity(n_max as usize);
    let mut ln_constant = f64::NEG_INFINITY;
    for n in 1..=n_max {
        let middle = cycle.word.repeat(n as usize);
        let mut best: Option<(Scalar, BigUint, usize, usize)> = None;
        let mut bilinear = 0.0;
        for (li, low) in suffixes.iter().enumerate() {
            for (ui, high) in spanning.words.iter().enumerate() {
                let index = low.concat(&middle).concat(high).value();
                let value = rep.eval_big(&index);
                bilinear += weights.alpha[li] * weights.beta[ui] * value.to_f64();
                if best.as_ref().is_none_or(|(b, ..)| value.abs() > b.abs()) {
                    best = Some((value, index, ui, li));
                }
            }
        }
        let (value, index, prefix, suffix) = best.expect("nonempty family");
        if n == 1 {
            ln_constant = bilinear.abs().ln() - k_norm.ln() - m as f64 * ln_base;
        }
        let mut ln_threshold = ln_constant + (n as usize * m) as f64 * ln_base;
        if mode == WitnessMode::Probe {
            ln_threshold -= d as f64 * (n as f64).ln();
        }
        if ln_threshold.is_nan() {
            ln_threshold = f64::NEG_INFINITY;
        }
        let ln_abs = value.ln_abs();
        trace.push(WitnessRecord {
            n,
            index: index.to_string(),
            prefix,
            suffix,
            value: value.to_string(),
            ln_abs,
            bilinear,
            ln_threshold,
            threshold: ln_threshold.exp(),
            pass: ln_abs >= ln_threshold - 1e-9,
        });
    }

    Ok(WitnessFamily {
        k,
        dim: d,
        cycle: cycle.word.to_digit_string(),
        m,
        rate: cycle.rate,
        eps,
        mode,
        minimized,
        prefixes: spanning
            .words
            .iter()
            .map(DigitWord::to_digit_string)
            .collect(),
        suffixes: suffixes
            .iter()
            .zip(&terms)
            .map(|(w, &(p, q))| SuffixWord {
                word: w.to_digit_string(),
                p,
                q,
            })
            .collect(),
        alpha: weights.alpha,
        beta: weights.beta,
        k_norm,
        analytic_constant: weights.analytic,
        constant: ln_constant.exp(),
        ln_constant,
        seed: options.seed,
        pass: trace.iter().all(|r| r.pass),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBoundReport {
    /// Longest prefix or suffix word.
    pub m_bound: usize,
    /// Values of `n` whose recorded index violates `N < k^(2M + n·m)`.
    pub violations: Vec<u32>,
    pub pass: bool,
}

pub fn length_bound_check(family: &WitnessFamily, k: u32) -> Result<LengthBoundReport> {
    let m_bound = family
        .prefixes
        .iter()
        .map(|p| DigitWord::parse_digit_string(p, k).map(|w| w.len()))
        .chain(family.suffixes.iter().map(|s| Ok(s.p as usize)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let mut violations = Vec::new();
    for r in &family.trace {
        let index: BigUint = r
            .index
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad index {}", r.index)))?;
        let limit = BigUint::from(k).pow((2 * m_bound + r.n as usize * family.m) as u32);
        if index >= limit {
            violations.push(r.n);
        }
    }
    Ok(LengthBoundReport {
        m_bound,
        pass: violations.is_empty(),
        violations,
    })
}
