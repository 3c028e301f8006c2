//! k-kernel bases from sequence data, the matrix set attached to a basis, and
//! reduction of arbitrary representations to minimal ones.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, unit_vector, Echelon, Insert, Matrix, Scalar};
use crate::rep::{LinearRep, Provenance, RepFile, SequenceOracle};

/// A kernel node `(ell, r)` names the sequence `n ↦ f(k^ell·n + r)`.
pub type KernelIndex = (u32, u64);

/// Greedy basis of the span of the k-kernel, with `g_1 = f` first.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    pub k: u32,
    /// Deepest level that was scanned.
    pub depth: u32,
    pub trunc_len: u64,
    pub members: Vec<KernelIndex>,
    /// Coefficients of every scanned node in terms of `members`.
    pub coeff_table: BTreeMap<KernelIndex, Vec<Scalar>>,
    /// Cumulative rank after each level.
    pub rank_history: Vec<usize>,
    /// All supplied terms in the upper half of the horizon vanish.
    pub eventually_zero: bool,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.members.len()
    }

    /// `[g_1(n), …, g_d(n)]` read from the oracle, if all indices are in range.
    pub fn basis_vector(&self, oracle: &SequenceOracle, n: u64) -> Option<Vec<Scalar>> {
        self.members
            .iter()
            .map(|&(ell, r)| {
                let idx = (self.k as u64)
                    .checked_pow(ell)?
                    .checked_mul(n)?
                    .checked_add(r)?;
                (idx < oracle.horizon()).then(|| oracle.term(idx).clone())
            })
            .collect()
    }
}

fn kernel_vector(oracle: &SequenceOracle, k: u64, ell: u32, r: u64, len: u64) -> Vec<Scalar> {
    let step = k.pow(ell);
    (0..len)
        .map(|n| oracle.term(step * n + r).clone())
        .collect()
}

fn tail_is_zero(oracle: &SequenceOracle) -> bool {
    let h = oracle.horizon();
    h > 0
        && oracle.terms()[(h / 2) as usize..]
            .iter()
            .all(Scalar::is_zero)
}

/// Greedy exact elimination over truncated kernel sequences.
///
/// Level 0 holds `f` itself; level `ell + 1` holds the `k` children of each
/// member found at level `ell`, scanned in increasing `r`. Dependent nodes
/// are recorded with their coefficients and not expanded. The scan stops at
/// the first level that adds no member; reaching `max_depth` with the rank
/// still growing is an error.
pub fn extract_basis(
    oracle: &SequenceOracle,
    k: u32,
    max_depth: u32,
    trunc_len: u64,
) -> Result<KernelBasis> {
    if k < 2 {
        return Err(Error::InvalidRadix(k));
    }
    let kk = k as u64;
    let min_trunc = kk
        .checked_pow(max_depth + 1)
        .ok_or_else(|| Error::InvalidArgument("max_depth too large".into()))?;
    if trunc_len < min_trunc {
        return Err(Error::InvalidArgument(format!(
            "truncation length {trunc_len} must be at least k^(max_depth+1) = {min_trunc}"
        )));
    }
    let required = kk.pow(max_depth).saturating_mul(trunc_len);
    if oracle.horizon() < required {
        return Err(Error::HorizonTooSmall {
            required,
            available: oracle.horizon(),
        });
    }

    let eventually_zero = tail_is_zero(oracle);
    let mut coeff_table = BTreeMap::new();
    let mut rank_history = Vec::new();

    let first = kernel_vector(oracle, kk, 0, 0, trunc_len);
    if first.iter().all(Scalar::is_zero) {
        // The zero sequence: keep f as a (degenerate) single member so that
        // downstream code still sees g_1 = f.
        let members = vec![(0, 0)];
        coeff_table.insert((0, 0), vec![Scalar::one()]);
        for i in 0..kk {
            coeff_table.insert((1, i), vec![Scalar::zero()]);
        }
        return Ok(KernelBasis {
            k,
            depth: 1,
            trunc_len,
            members,
            coeff_table,
            rank_history: vec![1, 1],
            eventually_zero: true,
        });
    }

    let mut ech = Echelon::new(trunc_len as usize);
    let mut members: Vec<KernelIndex> = Vec::new();
    let mut frontier: Vec<KernelIndex> = vec![(0, 0)];
    let mut depth = 0;
    for ell in 0..=max_depth {
        depth = ell;
        let candidates: Vec<KernelIndex> = if ell == 0 {
            vec![(0, 0)]
        } else {
            let mut c: Vec<KernelIndex> = frontier
                .iter()
                .flat_map(|&(pl, pr)| (0..kk).map(move |i| (pl + 1, pr + i * kk.pow(pl))))
                .collect();
            c.sort_unstable();
            c
        };
        let mut added = Vec::new();
        for (cl, cr) in candidates {
            let vec = kernel_vector(oracle, kk, cl, cr, trunc_len);
            match ech.insert(vec) {
                Insert::Independent(idx) => {
                    members.push((cl, cr));
                    coeff_table.insert((cl, cr), unit_vector(idx + 1, idx));
                    added.push((cl, cr));
                }
                Insert::Dependent(c) => {
                    coeff_table.insert((cl, cr), c);
                }
            }
        }
        rank_history.push(members.len());
        if added.is_empty() {
            break;
        }
        if ell == max_depth {
            return Err(Error::RankStillGrowing {
                depth: max_depth,
                rank: members.len(),
            });
        }
        frontier = added;
    }
    let d = members.len();
    for c in coeff_table.values_mut() {
        c.resize(d, Scalar::zero());
    }
    Ok(KernelBasis {
        k,
        depth,
        trunc_len,
        members,
        coeff_table,
        rank_history,
        eventually_zero,
    })
}

/// Matrices with `A_i·[g_1(n), …, g_d(n)]ᵀ = [g_1(kn+i), …, g_d(kn+i)]ᵀ`,
/// `v = [g_s(0)]`, `w = e_1`.
pub fn matrices_from_basis(basis: &KernelBasis, oracle: &SequenceOracle) -> Result<LinearRep> {
    let k = basis.k as u64;
    let d = basis.dim();
    let mut mats = Vec::with_capacity(basis.k as usize);
    for i in 0..k {
        let mut rows = Vec::with_capacity(d);
        for &(ell, r) in &basis.members {
            let child = (ell + 1, r + i * k.pow(ell));
            let coeffs = basis.coeff_table.get(&child).ok_or(Error::MissingChild {
                ell: child.0,
                r: child.1,
            })?;
            rows.push(coeffs.clone());
        }
        mats.push(Matrix::from_rows(rows)?);
    }
    let v: Vec<Scalar> = basis
        .members
        .iter()
        .map(|&(_, r)| oracle.term(r).clone())
        .collect();
    let w = unit_vector(d, 0);
    let rep = LinearRep::new(basis.k, mats, v, w, Provenance::Basis)?;

    for n in 0..basis.trunc_len {
        let Some(g) = basis.basis_vector(oracle, n) else {
            break;
        };
        for (i, a) in rep.mats().iter().enumerate() {
            let Some(child) = basis.basis_vector(oracle, k * n + i as u64) else {
                continue;
            };
            if a.mul_vec(&g) != child {
                return Err(Error::InvalidRepresentation(format!(
                    "basis relation fails for digit {i} at n = {n}"
                )));
            }
        }
    }
    Ok(rep)
}

/// Span of `{A_{word}·v}` (forward) restricted representation.
fn restrict_reachable(rep: &LinearRep) -> Option<LinearRep> {
    let d = rep.dim();
    let mut ech = Echelon::new(d);
    if let Insert::Dependent(_) = ech.insert(rep.v().to_vec()) {
        return None;
    }
    let mut next = 0;
    while next < ech.members().len() {
        let b = ech.members()[next].clone();
        for a in rep.mats() {
            ech.insert(a.mul_vec(&b));
        }
        next += 1;
    }
    let basis = ech.members().to_vec();
    let r = basis.len();
    let mats = rep
        .mats()
        .iter()
        .map(|a| {
            // column j of the restricted matrix = coordinates of A·b_j
            let cols: Vec<Vec<Scalar>> = basis
                .iter()
                .map(|b| {
                    ech.express(&a.mul_vec(b))
                        .expect("reachable space is invariant")
                })
                .collect();
            let rows = (0..r)
                .map(|i| cols.iter().map(|c| c[i].clone()).collect())
                .collect();
            Matrix::from_rows(rows).unwrap()
        })
        .collect();
    let v = ech.express(rep.v()).unwrap();
    let w = basis.iter().map(|b| dot(rep.w(), b)).collect();
    LinearRep::new(rep.k(), mats, v, w, rep.provenance()).ok()
}

/// Quotient by the unobservable subspace: span of `{wᵀ·A_{word}}`.
fn restrict_observable(rep: &LinearRep) -> Option<LinearRep> {
    let d = rep.dim();
    let mut ech = Echelon::new(d);
    if let Insert::Dependent(_) = ech.insert(rep.w().to_vec()) {
        return None;
    }
    let mut next = 0;
    while next < ech.members().len() {
        let u = ech.members()[next].clone();
        for a in rep.mats() {
            ech.insert(a.vec_mul(&u));
        }
        next += 1;
    }
    let basis = ech.members().to_vec();
    let mats = rep
        .mats()
        .iter()
        .map(|a| {
            let rows = basis
                .iter()
                .map(|u| {
                    ech.express(&a.vec_mul(u))
                        .expect("observable space is invariant")
                })
                .collect();
            Matrix::from_rows(rows).unwrap()
        })
        .collect();
    let w = ech.express(rep.w()).unwrap();
    let v = basis.iter().map(|u| dot(u, rep.v())).collect();
    LinearRep::new(rep.k(), mats, v, w, rep.provenance()).ok()
}

fn zero_rep(k: u32) -> LinearRep {
    LinearRep::new(
        k,
        vec![Matrix::identity(1); k as usize],
        vec![Scalar::zero()],
        vec![Scalar::zero()],
        Provenance::Basis,
    )
    .unwrap()
}

/// Two-sided reduction to a representation of minimal dimension with the
/// same values. The result is tagged `basis` when padding with leading zeros
/// is neutral on it, `unknown` otherwise.
pub fn minimize(rep: &LinearRep) -> LinearRep {
    let reduced = restrict_reachable(rep)
        .and_then(|r| restrict_observable(&r))
        .unwrap_or_else(|| zero_rep(rep.k()));
    let provenance = if reduced.pad_invariance_violation(64, 0x5eed).is_none() {
        Provenance::Basis
    } else {
        Provenance::Unknown
    };
    let out = reduced.with_provenance(provenance);
    match rep.name() {
        Some(n) => out.with_name(format!("{n}/min")),
        None => out,
    }
}

/// Limits for [`guess_regular`]. `None` picks the largest depth that the
/// horizon supports with `trunc_len = k^(depth+1)` and one doubling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GuessBudget {
    pub max_depth: Option<u32>,
    pub trunc_len: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuessReport {
    pub found: bool,
    pub rep: Option<RepFile>,
    pub members: Vec<KernelIndex>,
    pub rank_history: Vec<usize>,
    pub stability: bool,
    pub eventually_zero: bool,
    pub depth: u32,
    pub trunc_len: u64,
    pub message: Option<String>,
}

fn pick_budget(horizon: u64, k: u64, budget: GuessBudget) -> Option<(u32, u64)> {
    let cap = budget.max_depth.unwrap_or(24);
    (1..=cap).rev().find_map(|depth| {
        let min_trunc = k.checked_pow(depth + 1)?;
        let trunc = budget.trunc_len.map_or(min_trunc, |t| t.max(min_trunc));
        let need = k.checked_pow(depth)?.checked_mul(trunc.checked_mul(2)?)?;
        (need <= horizon).then_some((depth, trunc))
    })
}

/// Guesses a basis representation from a sequence prefix. Success requires
/// the kernel rank to be unchanged when the truncation length doubles and the
/// emitted representation to reproduce every supplied term.
pub fn guess_regular(oracle: &SequenceOracle, k: u32, budget: GuessBudget) -> GuessReport {
    let mut report = GuessReport {
        found: false,
        rep: None,
        members: Vec::new(),
        rank_history: Vec::new(),
        stability: false,
        eventually_zero: false,
        depth: 0,
        trunc_len: 0,
        message: None,
    };
    if k < 2 {
        report.message = Some(Error::InvalidRadix(k).to_string());
        return report;
    }
    let Some((depth, trunc)) = pick_budget(oracle.horizon(), k as u64, budget) else {
        report.message = Some(format!(
            "horizon {} too small for any kernel depth",
            oracle.horizon()
        ));
        return report;
    };
    report.depth = depth;
    report.trunc_len = trunc;
    let first = match extract_basis(oracle, k, depth, trunc) {
        Ok(b) => b,
        Err(e) => {
            if let Error::RankStillGrowing { .. } = e {
                report.rank_history = partial_rank_history(oracle, k, depth, trunc);
            }
            report.message = Some(e.to_string());
            return report;
        }
    };
    let second = match extract_basis(oracle, k, depth, 2 * trunc) {
        Ok(b) => b,
        Err(e) => {
            report.rank_history = first.rank_history.clone();
            report.message = Some(format!("not stable under doubling: {e}"));
            return report;
        }
    };
    report.rank_history = second.rank_history.clone();
    report.members = second.members.clone();
    report.eventually_zero = second.eventually_zero;
    report.stability = first.members == second.members;
    if !report.stability {
        report.message = Some(format!(
            "rank changed from {} to {} when doubling the truncation length",
            first.dim(),
            second.dim()
        ));
        return report;
    }
    let rep = match matrices_from_basis(&second, oracle) {
        Ok(r) => r,
        Err(e) => {
            report.message = Some(e.to_string());
            return report;
        }
    };
    if rep.eval_prefix(oracle.horizon()) != oracle.terms() {
        report.message = Some("representation does not reproduce all supplied terms".into());
        return report;
    }
    if report.eventually_zero {
        report.message = Some("sequence is eventually zero; growth analysis does not apply".into());
    }
    report.found = true;
    report.rep = Some(RepFile::from(&rep));
    report
}

fn partial_rank_history(oracle: &SequenceOracle, k: u32, depth: u32, trunc: u64) -> Vec<usize> {
    (1..=depth)
        .map(|d| match extract_basis(oracle, k, d, trunc) {
            Ok(b) => b.dim(),
            Err(Error::RankStillGrowing { rank, .. }) => rank,
            Err(_) => 0,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::scalars_from_i64;
    use crate::rep::catalog;

    fn stern(n: u64) -> i64 {
        match n {
            0 => 0,
            1 => 1,
            _ if n % 2 == 0 => stern(n / 2),
            _ => stern(n / 2) + stern(n / 2 + 1),
        }
    }

    fn oracle(horizon: u64, f: impl Fn(u64) -> i64) -> SequenceOracle {
        SequenceOracle::from_fn(horizon, |n| Scalar::from(f(n)))
    }

    #[test]
    fn stern_basis() {
        let o = oracle(1 << 10, stern);
        let b = extract_basis(&o, 2, 3, 16).unwrap();
        assert_eq!(b.members, vec![(0, 0), (1, 1)]);
        // s(2n) = s(n); s(4n+1) = s(n) + s(2n+1); s(4n+3) = -s(n) + 2 s(2n+1)
        assert_eq!(b.coeff_table[&(1, 0)], scalars_from_i64(&[1, 0]));
        assert_eq!(b.coeff_table[&(2, 1)], scalars_from_i64(&[1, 1]));
        assert_eq!(b.coeff_table[&(2, 3)], scalars_from_i64(&[-1, 2]));
    }

    #[test]
    fn constant_and_digit_sum_bases() {
        let b = extract_basis(&oracle(1 << 10, |_| 1), 2, 3, 16).unwrap();
        assert_eq!(b.members, vec![(0, 0)]);
        let b = extract_basis(&oracle(1 << 10, |n| n.count_ones() as i64), 2, 3, 16).unwrap();
        assert_eq!(b.members, vec![(0, 0), (1, 1)]);
        assert_eq!(b.coeff_table[&(2, 3)], scalars_from_i64(&[-1, 2]));
    }

    #[test]
    fn extraction_errors() {
        let o = oracle(100, |n| n as i64);
        assert!(matches!(
            extract_basis(&o, 2, 3, 16),
            Err(Error::HorizonTooSmall { .. })
        ));
        assert!(matches!(
            extract_basis(&o, 2, 3, 8),
            Err(Error::InvalidArgument(_))
        ));
        let primes = oracle(1 << 12, |n| is_prime(n) as i64);
        assert!(matches!(
            extract_basis(&primes, 2, 4, 128),
            Err(Error::RankStillGrowing { .. })
        ));
    }

    fn is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
    }

    #[test]
    fn stern_matrices_from_basis() {
        let o = oracle(1 << 12, stern);
        let b = extract_basis(&o, 2, 3, 16).unwrap();
        let rep = matrices_from_basis(&b, &o).unwrap();
        assert_eq!(rep.mats()[0], Matrix::from_i64(&[&[1, 0], &[1, 1]]));
        assert_eq!(rep.mats()[1], Matrix::from_i64(&[&[0, 1], &[-1, 2]]));
        assert_eq!(rep.v(), scalars_from_i64(&[0, 1]).as_slice());
        assert!((0..1024).all(|n| rep.eval(n) == Scalar::from(stern(n))));
    }

    #[test]
    fn constant_and_identity_matrices() {
        let o = oracle(1 << 10, |_| 1);
        let rep = matrices_from_basis(&extract_basis(&o, 2, 3, 16).unwrap(), &o).unwrap();
        assert_eq!(
            rep.mats(),
            &[Matrix::from_i64(&[&[1]]), Matrix::from_i64(&[&[1]])]
        );
        assert_eq!(
            (rep.v(), rep.w()),
            (
                scalars_from_i64(&[1]).as_slice(),
                scalars_from_i64(&[1]).as_slice()
            )
        );

        let o = oracle(1 << 10, |n| n as i64);
        let b = extract_basis(&o, 2, 3, 16).unwrap();
        assert_eq!(b.members, vec![(0, 0), (1, 1)]);
        let rep = matrices_from_basis(&b, &o).unwrap();
        // basis {n, 2n+1}: 2n = 2·g1; 2(2n+1)+1 = 2·g2 + 1 = −2·g1 + 3·g2 ... checked by evaluation
        assert!((0..1024).all(|n| rep.eval(n) == Scalar::from(n as i64)));
    }

    #[test]
    fn missing_child_is_reported() {
        let o = oracle(1 << 10, stern);
        let mut b = extract_basis(&o, 2, 3, 16).unwrap();
        b.coeff_table.remove(&(2, 3));
        assert_eq!(
            matrices_from_basis(&b, &o).unwrap_err(),
            Error::MissingChild { ell: 2, r: 3 }
        );
    }

    #[test]
    fn minimize_examples() {
        let spanning = catalog("paper_spanning_3x3", Some(Scalar::from(2))).unwrap();
        let m = minimize(&spanning);
        assert_eq!(m.dim(), 1);
        assert_eq!(m.mats()[0], Matrix::identity(1));
        assert_eq!(m.provenance(), Provenance::Basis);
        assert_eq!(minimize(&catalog("stern", None).unwrap()).dim(), 2);
        assert_eq!(minimize(&catalog("const_one_2x2", None).unwrap()).dim(), 1);
    }

    #[test]
    fn minimize_zero_rep() {
        let z = LinearRep::new(
            2,
            vec![Matrix::identity(2), Matrix::identity(2)],
            scalars_from_i64(&[0, 1]),
            scalars_from_i64(&[1, 0]),
            Provenance::Unknown,
        )
        .unwrap();
        let m = minimize(&z);
        assert_eq!(m.dim(), 1);
        assert!((0..32).all(|n| m.eval(n).is_zero()));
    }

    #[test]
    fn guess_examples() {
        let r = guess_regular(&oracle(1 << 14, stern), 2, GuessBudget::default());
        assert!(r.found && r.stability, "{r:?}");
        assert_eq!(r.members.len(), 2);

        let zeros = guess_regular(&oracle(1 << 12, |_| 0), 2, GuessBudget::default());
        assert!(zeros.found && zeros.eventually_zero);
        assert_eq!(zeros.rep.unwrap().d, 1);

        let primes = guess_regular(
            &oracle(1 << 12, |n| is_prime(n) as i64),
            2,
            GuessBudget::default(),
        );
        assert!(!primes.found);
        assert!(
            primes.rank_history.windows(2).all(|w| w[1] > w[0]),
            "{:?}",
            primes.rank_history
        );
    }
}
