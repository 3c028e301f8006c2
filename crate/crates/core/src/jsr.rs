//! Two-sided bounds on the joint spectral radius of a finite matrix set.
//!
//! Lower bounds come from spectral radii of products (`ρ(𝒜) ≥ ρ(P)^(1/m)` for
//! every product `P` of length `m`); upper bounds from norms of products
//! (`ρ(𝒜) ≤ max ‖P‖^(1/m)` for any submultiplicative norm). The branch and
//! bound search refines the upper side with the prefix-covering argument: if
//! every infinite word has a prefix `P` with `‖P‖^(1/|P|) ≤ β`, then `ρ ≤ β`.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_radius_lower, FMat, Matrix, NormKind, Scalar, ScaledMat};
use crate::rep::{DigitWord, LinearRep};

/// Squarings used when bounding the spectral radius of a single product.
const PRODUCT_ITERS: u32 = 30;

/// Relative margin a longer product must beat to replace the current best.
const TIE_TOL: f64 = 1e-9;

/// Nonempty list of square matrices with a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    mats: Vec<Matrix>,
    floats: Vec<FMat>,
    radix_hint: Option<u32>,
}

impl MatrixSet {
    pub fn new(mats: Vec<Matrix>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty matrix set".into()))?;
        let d = first.dim();
        if let Some(m) = mats.iter().find(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dim(),
            });
        }
        let floats = mats.iter().map(Matrix::to_float).collect();
        Ok(MatrixSet {
            mats,
            floats,
            radix_hint: None,
        })
    }

    pub fn from_rep(rep: &LinearRep) -> Self {
        let mut s = MatrixSet::new(rep.mats().to_vec()).expect("representation matrices are valid");
        s.radix_hint = Some(rep.k());
        s
    }

    /// Parses either a representation file or a bare JSON array of matrices.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.is_array() {
            let raw: Vec<Vec<Vec<Scalar>>> = serde_json::from_value(value)?;
            MatrixSet::new(
                raw.into_iter()
                    .map(Matrix::from_rows)
                    .collect::<Result<_>>()?,
            )
        } else {
            Ok(MatrixSet::from_rep(&LinearRep::from_json(text)?))
        }
    }

    pub fn mats(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn floats(&self) -> &[FMat] {
        &self.floats
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mats[0].dim()
    }

    pub fn radix_hint(&self) -> Option<u32> {
        self.radix_hint
    }

    /// Alphabet size used for words over this set.
    fn radix(&self) -> u32 {
        (self.len() as u32).max(2)
    }

    pub fn scaled(&self, alpha: &Scalar) -> MatrixSet {
        let mut s = MatrixSet::new(self.mats.iter().map(|m| m.scale(alpha)).collect()).unwrap();
        s.radix_hint = self.radix_hint;
        s
    }

    /// `{T⁻¹·A_i·T}`.
    pub fn conjugated(&self, t: &Matrix, t_inv: &Matrix) -> Result<MatrixSet> {
        let mats = self
            .mats
            .iter()
            .map(|a| t_inv.mul(a)?.mul(t))
            .collect::<Result<Vec<_>>>()?;
        let mut s = MatrixSet::new(mats)?;
        s.radix_hint = self.radix_hint;
        Ok(s)
    }

    /// Float product `A_{w_0}·…·A_{w_{m−1}}` in scaled form.
    pub fn product(&self, word: &[u32]) -> ScaledMat {
        word.iter()
            .fold(ScaledMat::identity(self.dim()), |acc, &i| {
                acc.mul(&self.floats[i as usize])
            })
    }
}

/// `ρ(P)^(1/m)` lower estimate for a scaled product of length `m`.
fn product_rate_lower(p: &ScaledMat, m: usize) -> f64 {
    let lo = spectral_radius_lower(&p.body, PRODUCT_ITERS);
    if lo == 0.0 {
        return 0.0;
    }
    ((lo.ln() + p.log_scale) / m as f64).exp()
}

/// Calls `emit` on every necklace (lexicographically least rotation) of
/// length `n` over `k` letters, in lexicographic order. Stops early when
/// `emit` returns `false`.
pub fn for_each_necklace(k: u32, n: usize, emit: &mut dyn FnMut(&[u32]) -> bool) {
    fn gen(
        t: usize,
        p: usize,
        n: usize,
        k: u32,
        a: &mut Vec<u32>,
        emit: &mut dyn FnMut(&[u32]) -> bool,
    ) -> bool {
        if t > n {
            if n % p == 0 {
                return emit(&a[1..=n]);
            }
            return true;
        }
        a[t] = a[t - p];
        if !gen(t + 1, p, n, k, a, emit) {
            return false;
        }
        for j in a[t - p] + 1..k {
            a[t] = j;
            if !gen(t + 1, t, n, k, a, emit) {
                return false;
            }
        }
        true
    }
    if n == 0 {
        return;
    }
    let mut a = vec![0u32; n + 1];
    gen(1, 1, n, k, &mut a, emit);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub bound: f64,
    pub witness: DigitWord,
    pub work: u64,
    pub truncated: bool,
}

/// Default cap on products examined by the enumerations below.
pub const DEFAULT_WORK_BUDGET: u64 = 200_000;

/// Best `ρ(P)^(1/m)` over products of length `m ≤ m_max`, one product per
/// cyclic class (`ρ(PQ) = ρ(QP)`). Ties keep the shortest, then
/// lexicographically least, word.
pub fn lower_bound(set: &MatrixSet, m_max: usize) -> LowerBound {
    lower_bound_with_budget(set, m_max, DEFAULT_WORK_BUDGET)
}

pub fn lower_bound_with_budget(set: &MatrixSet, m_max: usize, budget: u64) -> LowerBound {
    let k = set.radix();
    let mut best = LowerBound {
        bound: 0.0,
        witness: DigitWord::empty(k),
        work: 0,
        truncated: false,
    };
    for m in 1..=m_max.max(1) {
        let mut emit = |word: &[u32]| {
            if word.iter().any(|&i| i as usize >= set.len()) {
                return true;
            }
            if best.work >= budget {
                best.truncated = true;
                return false;
            }
            best.work += 1;
            let rate = product_rate_lower(&set.product(word), word.len());
            if best.witness.is_empty() || rate > best.bound * (1.0 + TIE_TOL) {
                best.bound = rate;
                best.witness = DigitWord::new(word.to_vec(), k).unwrap();
            }
            true
        };
        for_each_necklace(k, m, &mut emit);
        if best.truncated {
            break;
        }
    }
    best
}

/// `max_{|word| = m} ‖P_word‖^(1/m)`. Identical products reached by
/// different words are evaluated once.
pub fn upper_bound(set: &MatrixSet, m: usize, kind: &NormKind) -> Result<f64> {
    upper_bound_with_budget(set, m, kind, DEFAULT_WORK_BUDGET)
}

fn mat_key(p: &ScaledMat) -> (u64, Vec<u64>) {
    (
        p.log_scale.to_bits(),
        p.body.data().iter().map(|x| x.to_bits()).collect(),
    )
}

pub fn upper_bound_with_budget(
    set: &MatrixSet,
    m: usize,
    kind: &NormKind,
    budget: u64,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "product length must be at least 1".into(),
        ));
    }
    kind.validate(set.dim())?;
    let mut level = vec![ScaledMat::identity(set.dim())];
    let mut work = 0u64;
    for _ in 0..m {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for p in &level {
            for a in set.floats() {
                work += 1;
                if work > budget {
                    return Err(Error::BudgetExceeded(budget));
                }
                let q = p.mul(a);
                if seen.insert(mat_key(&q)) {
                    next.push(q);
                }
            }
        }
        level = next;
    }
    Ok(level
        .iter()
        .map(|p| (p.ln_norm(kind) / m as f64).exp())
        .fold(0.0, f64::max))
}

/// Limits and norm choice for [`branch_and_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbOptions {
    /// Maximum number of tree nodes expanded.
    pub max_nodes: u64,
    /// Products enumerated (up to cyclic rotation) for the lower bound.
    pub lower_budget: u64,
    /// Longest product length for the lower bound.
    pub lower_depth: usize,
    pub kind: NormKind,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            max_nodes: 100_000,
            lower_budget: 20_000,
            lower_depth: 12,
            kind: NormKind::RowSum,
        }
    }
}

/// Bracket report. `witness` is the lower-bound product word as a digit
/// string, least-significant (leftmost factor) first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsrBracket {
    #[serde(with = "crate::serde_float")]
    pub lower: f64,
    #[serde(with = "crate::serde_float")]
    pub upper: f64,
    pub witness: String,
    pub norm_kind: NormKind,
    pub depth: usize,
    pub work: u64,
    pub truncated: bool,
}

impl JsrBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn witness_word(&self, radix: u32) -> DigitWord {
        DigitWord::parse_digit_string(&self.witness, radix).expect("witness digits")
    }
}

struct Node {
    product: ScaledMat,
    depth: usize,
    // min over proper prefixes of ‖prefix‖^(1/len)
    ancestor_min: f64,
}

/// Brackets `ρ(set)` to within `tol` when the node budget allows.
///
/// The lower side is [`lower_bound`]. The upper side expands the product
/// tree breadth first; a node whose `‖P‖^(1/depth)` is at most
/// `lower + tol` is not extended. The final upper bound is the largest
/// covering value over pruned nodes and, on budget exhaustion, over the
/// unexpanded frontier.
pub fn branch_and_bound(set: &MatrixSet, tol: f64, options: &BnbOptions) -> Result<JsrBracket> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    options.kind.validate(set.dim())?;
    let lb = lower_bound_with_budget(set, options.lower_depth, options.lower_budget);
    let alpha = lb.bound;
    let threshold = alpha + tol;

    let mut queue: VecDeque<Node> = VecDeque::new();
    queue.push_back(Node {
        product: ScaledMat::identity(set.dim()),
        depth: 0,
        ancestor_min: f64::INFINITY,
    });
    let mut covered = 0.0f64;
    let mut expanded = 0u64;
    let mut max_depth = 0usize;
    let mut truncated = false;
    while let Some(node) = queue.pop_front() {
        if expanded >= options.max_nodes {
            truncated = true;
            covered = covered.max(node.ancestor_min);
            for rest in queue.drain(..) {
                covered = covered.max(rest.ancestor_min);
            }
            break;
        }
        for a in set.floats() {
            expanded += 1;
            let product = node.product.mul(a);
            let depth = node.depth + 1;
            max_depth = max_depth.max(depth);
            let value = (product.ln_norm(&options.kind) / depth as f64).exp();
            let bound = node.ancestor_min.min(value);
            if value <= threshold {
                covered = covered.max(bound);
            } else {
                queue.push_back(Node {
                    product,
                    depth,
                    ancestor_min: bound,
                });
            }
        }
    }
    let upper = covered.max(alpha);
    Ok(JsrBracket {
        lower: alpha,
        upper,
        witness: lb.witness.to_digit_string(),
        norm_kind: options.kind.clone(),
        depth: max_depth,
        work: lb.work + expanded,
        truncated: truncated || lb.truncated && upper - alpha > tol,
    })
}

/// Coordinate descent over positive diagonal weights `w` (with `w_0 = 1`)
/// minimizing `max_i ‖D⁻¹A_iD‖_∞`. Each round tries `log w_c ± h` for every
/// coordinate; `h` halves after a round without improvement. Log-weights are
/// clamped to `[−30, 30]`.
pub fn scaled_norm_refine(set: &MatrixSet, rounds: usize) -> (NormKind, f64) {
    let d = set.dim();
    let objective = |logw: &[f64]| -> f64 {
        let kind = NormKind::ScaledRowSum(logw.iter().map(|t| t.exp()).collect());
        set.floats()
            .iter()
            .map(|a| a.norm(&kind))
            .fold(0.0, f64::max)
    };
    let mut logw = vec![0.0; d];
    let mut best = objective(&logw);
    let mut step = 1.0;
    for _ in 0..rounds.max(1) {
        let mut improved = false;
        for c in 1..d {
            for dir in [-1.0, 1.0] {
                let mut trial = logw.clone();
                trial[c] = (trial[c] + dir * step).clamp(-30.0, 30.0);
                let value = objective(&trial);
                if value < best {
                    best = value;
                    logw = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (
        NormKind::ScaledRowSum(logw.iter().map(|t| t.exp()).collect()),
        best,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    #[serde(with = "crate::serde_float")]
    pub capacity: f64,
    /// `log₂ upper − log₂ lower`.
    #[serde(with = "crate::serde_float")]
    pub width: f64,
    pub bracket: JsrBracket,
}

/// `log₂` of the bracket midpoint.
pub fn capacity(set: &MatrixSet, tol: f64, options: &BnbOptions) -> Result<CapacityReport> {
    let bracket = branch_and_bound(set, tol, options)?;
    let mid = 0.5 * (bracket.lower + bracket.upper);
    Ok(CapacityReport {
        capacity: mid.log2(),
        width: bracket.upper.log2() - bracket.lower.log2(),
        bracket,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub basis: JsrBracket,
    pub spanning: JsrBracket,
    /// `basis.lower ≤ spanning.upper + tol`.
    pub consistent: bool,
    /// `basis.upper < spanning.lower`.
    pub strict_certified: bool,
    pub checked_terms: u64,
}

/// Terms compared before bracketing two representations of one sequence.
pub const COMPARE_TERMS: u64 = 1 << 10;

/// Brackets the JSR of a basis representation and of another (spanning)
/// representation of the same sequence.
pub fn compare_representations(
    basis_rep: &LinearRep,
    spanning_rep: &LinearRep,
    tol: f64,
    options: &BnbOptions,
) -> Result<CompareReport> {
    let a = basis_rep.eval_prefix(COMPARE_TERMS);
    let b = spanning_rep.eval_prefix(COMPARE_TERMS);
    if let Some(n) = a.iter().zip(&b).position(|(x, y)| x != y) {
        return Err(Error::RepresentationsDisagree(n as u64));
    }
    let basis = branch_and_bound(&MatrixSet::from_rep(basis_rep), tol, options)?;
    let spanning = branch_and_bound(&MatrixSet::from_rep(spanning_rep), tol, options)?;
    Ok(CompareReport {
        consistent: basis.lower <= spanning.upper + tol,
        strict_certified: basis.upper < spanning.lower,
        basis,
        spanning,
        checked_terms: COMPARE_TERMS,
    })
}
