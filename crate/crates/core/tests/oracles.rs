//! Cross-checks against independent computations: direct recursions,
//! exhaustive enumeration, and grid search.

use kreg_core::growth::{check_upper_growth, estimate_growth_rep, verify_theorem, BoundSettings};
use kreg_core::jsr::{
    branch_and_bound, compare_representations, lower_bound, scaled_norm_refine, upper_bound,
    upper_bound_with_budget, BnbOptions, MatrixSet,
};
use kreg_core::kernel::{extract_basis, matrices_from_basis, minimize};
use kreg_core::linalg::{spectral_radius_bracket, Matrix, NormKind, ScaledMat};
use kreg_core::witness::{build_witness, kernel_expansion, WitnessOptions};
use kreg_core::{catalog, LinearRep, Provenance, Scalar, SequenceOracle};

const PHI: f64 = 1.618_033_988_749_895;

fn rep(name: &str) -> LinearRep {
    catalog(name, None).unwrap()
}

fn stern_table(len: usize) -> Vec<u64> {
    let mut s = vec![0u64; len.max(2)];
    s[1] = 1;
    for n in 2..len {
        s[n] = if n % 2 == 0 {
            s[n / 2]
        } else {
            s[n / 2] + s[n / 2 + 1]
        };
    }
    s
}

#[test]
fn catalog_sequences_match_their_definitions() {
    let n = 10_000;
    let stern = stern_table(n);
    let ints = |r: &LinearRep| -> Vec<Scalar> { r.eval_prefix(n as u64) };
    let expect = |f: &dyn Fn(usize) -> u64| -> Vec<Scalar> {
        (0..n).map(|i| Scalar::from_integer(f(i) as i64)).collect()
    };
    assert_eq!(ints(&rep("stern")), expect(&|i| stern[i]));
    assert_eq!(
        ints(&rep("sum_of_digits_2")),
        expect(&|i| i.count_ones() as u64)
    );
    assert_eq!(ints(&rep("identity_n")), expect(&|i| i as u64));
    assert_eq!(ints(&rep("const_one_2x2")), expect(&|_| 1));
    assert_eq!(ints(&rep("paper_spanning_3x3")), expect(&|_| 1));
}

#[test]
fn stern_along_the_pure_cycle_is_fibonacci() {
    // N = (2/3)(4^n − 1) has binary digits (01)^n read from the low end;
    // s(N) = F(2n)
    let stern = stern_table(1 << 21);
    let (mut a, mut b) = (0u64, 1u64);
    let r = rep("stern");
    for n in 1..10u32 {
        let big_n = (2 * (4u64.pow(n) - 1)) / 3;
        (a, b) = (b, a + b);
        (a, b) = (b, a + b);
        assert_eq!(stern[big_n as usize], a, "n = {n}");
        assert_eq!(r.eval(big_n), Scalar::from_integer(a as i64));
    }
}

fn all_words_lower(set: &MatrixSet, m_max: usize) -> f64 {
    let mut best = 0.0f64;
    for m in 1..=m_max {
        for code in 0..(1u64 << m) {
            let word: Vec<u32> = (0..m).map(|i| ((code >> i) & 1) as u32).collect();
            let p: ScaledMat = set.product(&word);
            let (lo, _) = spectral_radius_bracket(&p.body, 30);
            if lo > 0.0 {
                best = best.max(((lo.ln() + p.log_scale) / m as f64).exp());
            }
        }
    }
    best
}

#[test]
fn necklace_lower_bound_matches_all_words() {
    for name in ["stern", "sum_of_digits_2", "identity_n"] {
        let set = MatrixSet::from_rep(&rep(name));
        let lb = lower_bound(&set, 8);
        let brute = all_words_lower(&set, 8);
        assert!(lb.bound >= brute - 1e-9, "{name}: {} vs {brute}", lb.bound);
        assert!(
            lb.bound <= brute * (1.0 + 1e-9) + 1e-9,
            "{name}: {} vs {brute}",
            lb.bound
        );
    }
}

#[test]
fn stern_bracket_against_plain_upper_bound() {
    let set = MatrixSet::from_rep(&rep("stern"));
    let b = branch_and_bound(&set, 1e-3, &BnbOptions::default()).unwrap();
    let plain = upper_bound_with_budget(&set, 20, &NormKind::RowSum, 1 << 22).unwrap();
    assert!(b.upper <= plain + 1e-12);
    assert!(b.lower <= PHI + 1e-9 && PHI <= b.upper + 1e-9);
    let m8 = upper_bound(&set, 8, &NormKind::RowSum).unwrap();
    assert!((1.618..=1.766).contains(&m8));
}

#[test]
fn scaled_refine_against_grid_search() {
    let set = MatrixSet::from_rep(&rep("stern"));
    let grid_min = (-5000..=5000)
        .map(|i| {
            let w = vec![1.0, (i as f64 * 1e-3).exp()];
            let kind = NormKind::ScaledRowSum(w);
            set.floats()
                .iter()
                .map(|a| a.norm(&kind))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    let (_, refined) = scaled_norm_refine(&set, 40);
    assert!(refined >= PHI);
    assert!(refined <= grid_min + 1e-3, "{refined} vs {grid_min}");
}

#[test]
fn unipotent_pair_with_scaled_weights() {
    let set = MatrixSet::from_rep(&rep("sum_of_digits_2"));
    let (kind, _) = scaled_norm_refine(&set, 8);
    let u = upper_bound(&set, 16, &kind).unwrap();
    assert!(u > 1.0 && u <= 16f64.powf(1.0 / 16.0) + 1e-6, "{u}");
    let frob = upper_bound(&set, 16, &NormKind::Frobenius).unwrap();
    assert!(frob <= 1.19);
    assert!(
        upper_bound(&set, 32, &NormKind::RowSum).unwrap()
            <= upper_bound(&set, 16, &NormKind::RowSum).unwrap()
    );
}

#[test]
fn compare_examples() {
    let opts = BnbOptions::default();
    let stern = rep("stern");
    let r = compare_representations(&stern, &stern, 1e-3, &opts).unwrap();
    assert_eq!(r.basis, r.spanning);
    assert!(r.consistent && !r.strict_certified);

    // identity_n with a spurious diag(3) block that neither v nor w sees
    let id = rep("identity_n");
    let padded: Vec<Matrix> = id
        .mats()
        .iter()
        .map(|a| {
            let mut rows: Vec<Vec<Scalar>> = a
                .row_vecs()
                .into_iter()
                .map(|mut r| {
                    r.push(Scalar::zero());
                    r
                })
                .collect();
            rows.push(vec![
                Scalar::zero(),
                Scalar::zero(),
                Scalar::from_integer(3),
            ]);
            Matrix::from_rows(rows).unwrap()
        })
        .collect();
    let mut v = id.v().to_vec();
    v.push(Scalar::zero());
    let mut w = id.w().to_vec();
    w.push(Scalar::zero());
    let spanning = LinearRep::new(2, padded, v, w, Provenance::Spanning).unwrap();
    let r = compare_representations(&minimize(&id), &spanning, 1e-3, &opts).unwrap();
    assert!(r.strict_certified, "{r:?}");
    assert!((r.spanning.lower - 3.0).abs() < 1e-9);
}

#[test]
fn growth_anchors_at_full_horizon() {
    let est = |name: &str| estimate_growth_rep(&rep(name), 1 << 20).unwrap().value;
    assert!(est("const_one_2x2").abs() < 0.01);
    assert!((est("identity_n") - 1.0).abs() < 0.01);
    assert!((est("stern") - PHI.log2()).abs() < 0.03);
}

#[test]
fn upper_growth_and_theorem_on_catalog() {
    let s = BoundSettings::default();
    let stern = check_upper_growth(&rep("stern"), 0.05, 1 << 20, &s).unwrap();
    assert!(stern.c_emp.is_finite() && stern.argmax < 1 << 15 && stern.stable);
    let id = check_upper_growth(&rep("identity_n"), 0.1, 1 << 20, &s).unwrap();
    assert!(id.c_emp <= 1.0 + 1e-12);
    for name in ["stern", "identity_n"] {
        let t = verify_theorem(&rep(name), 1 << 20, 0.05, &s, false).unwrap();
        assert!(t.pass, "{name}: {t:?}");
    }
}

#[test]
fn witness_families_on_catalog() {
    for name in ["const_one_2x2", "identity_n", "stern", "sum_of_digits_2"] {
        let r = rep(name);
        let f = build_witness(&r, 0.05, 20, &WitnessOptions::default()).unwrap();
        assert!(f.pass, "{name}: {:#?}", f.trace);
        let grexp = estimate_growth_rep(&r, 1 << 20).unwrap().value;
        let log_rate = f.rate.ln() / (r.k() as f64).ln();
        assert!(log_rate <= grexp + 0.05, "{name}: {log_rate} vs {grexp}");
    }
}

#[test]
fn expansions_of_kernel_built_reps() {
    for name in [
        "stern",
        "sum_of_digits_2",
        "identity_n",
        "const_one_2x2",
        "paper_spanning_3x3",
    ] {
        let oracle = SequenceOracle::from_rep(&rep(name), 1 << 12);
        let basis = extract_basis(&oracle, 2, 4, 32).unwrap();
        let built = matrices_from_basis(&basis, &oracle).unwrap();
        let e = kernel_expansion(&built, &basis).unwrap();
        assert_eq!(e.terms.len(), basis.dim());
        assert_eq!(e.terms[0][0].p, 0);
    }
}
