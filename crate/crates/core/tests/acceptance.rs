//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use kreg_core::growth::{check_upper_growth, estimate_growth_rep, BoundSettings};
use kreg_core::jsr::{
    branch_and_bound, compare_representations, lower_bound, scaled_norm_refine, upper_bound,
    BnbOptions, MatrixSet,
};
use kreg_core::kernel::{guess_regular, minimize, GuessBudget};
use kreg_core::linalg::{spectral_radius_bracket, Matrix, ScaledMat};
use kreg_core::rep::catalog_entries;
use kreg_core::witness::{build_witness, length_bound_check, WitnessOptions};
use kreg_core::{catalog, Error, LinearRep, Provenance, Scalar, SequenceOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PHI: f64 = 1.618_033_988_749_895;
const BASIS_REPS: [&str; 4] = ["const_one_2x2", "identity_n", "stern", "sum_of_digits_2"];

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn rep(name: &str) -> LinearRep {
    catalog(name, None).unwrap()
}

fn log_k(x: f64, k: u32) -> f64 {
    x.ln() / (k as f64).ln()
}

fn criterion_1() -> Outcome {
    let spanning = catalog("paper_spanning_3x3", Some(Scalar::from_integer(2))).unwrap();
    let basis = minimize(&spanning);
    let r = compare_representations(&basis, &spanning, 1e-7, &BnbOptions::default()).unwrap();
    let near = |x: f64, t: f64| (x - t).abs() <= 1e-6;
    let ok = near(r.basis.lower, 1.0)
        && near(r.basis.upper, 1.0)
        && near(r.spanning.lower, 2.0)
        && near(r.spanning.upper, 2.0)
        && r.strict_certified
        && r.consistent;
    check(
        ok,
        format!(
            "basis [{:.9}, {:.9}] spanning [{:.9}, {:.9}] strict={}",
            r.basis.lower, r.basis.upper, r.spanning.lower, r.spanning.upper, r.strict_certified
        ),
    )
}

fn criterion_2() -> Outcome {
    let settings = BoundSettings::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in BASIS_REPS {
        let r = rep(name);
        let est = estimate_growth_rep(&r, 1 << 20).unwrap();
        let b = settings.bracket(&r).unwrap();
        let lo = if b.lower > 0.0 {
            log_k(b.lower, r.k())
        } else {
            f64::NEG_INFINITY
        };
        let hi = log_k(b.upper, r.k());
        let inside = lo - 0.05 <= est.value && est.value <= hi + 0.05;
        ok &= inside;
        parts.push(format!(
            "{name}: {:.4} in [{:.4}, {:.4}]",
            est.value, lo, hi
        ));
    }
    let stern = branch_and_bound(
        &MatrixSet::from_rep(&rep("stern")),
        1e-3,
        &BnbOptions::default(),
    )
    .unwrap();
    let stern_ok = stern.lower <= 1.6180 + 5e-5
        && stern.upper >= 1.6180
        && stern.width() <= 1e-3
        && stern.witness == "01";
    ok &= stern_ok;
    parts.push(format!(
        "stern bracket [{:.6}, {:.6}] witness {}",
        stern.lower, stern.upper, stern.witness
    ));
    check(ok, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let settings = BoundSettings::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for name in BASIS_REPS {
        let r = check_upper_growth(&rep(name), 0.05, 1 << 20, &settings).unwrap();
        ok &= r.argmax < 1 << 15;
        parts.push(format!("{name}: c_emp {:.4} at n={}", r.c_emp, r.argmax));
    }
    check(ok, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let f = build_witness(&rep("stern"), 0.05, 20, &WitnessOptions::default()).unwrap();
    let lb = length_bound_check(&f, 2).unwrap();
    let c = f.constant;
    let mut ok =
        f.pass && lb.pass && f.m == 2 && f.trace.len() == 20 && (f.rate - PHI).abs() < 1e-9;
    for r in &f.trace {
        let value: f64 = r.value.parse::<f64>().unwrap().abs();
        ok &= value >= c * (PHI - 0.05).powi(2 * r.n as i32) * (1.0 - 1e-9);
    }
    let last = f.trace.last().unwrap();
    check(
        ok,
        format!(
            "cycle {} c={:.4} |f(N_20)|={} threshold {:.1} M={}",
            f.cycle, c, last.value, last.threshold, lb.m_bound
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for entry in catalog_entries() {
        let r = catalog(&entry.name, None).unwrap();
        let oracle = SequenceOracle::from_rep(&r, 1 << 14);
        let g = guess_regular(&oracle, r.k(), GuessBudget::default());
        let guessed = match g.rep.map(|f| f.into_rep()) {
            Some(Ok(x)) if g.found => x,
            _ => {
                ok = false;
                parts.push(format!("{}: not found", entry.name));
                continue;
            }
        };
        let same = guessed.eval_prefix(1 << 14) == oracle.terms();
        let small = guessed.dim() <= entry.d;
        let once = minimize(&r);
        let twice = minimize(&once);
        let reference = r.eval_prefix(10_000);
        let idem = once.dim() == twice.dim()
            && once.mats() == twice.mats()
            && once.eval_prefix(10_000) == reference
            && twice.eval_prefix(10_000) == reference;
        ok &= same && small && idem;
        parts.push(format!(
            "{}: d={} min={}",
            entry.name,
            guessed.dim(),
            once.dim()
        ));
    }
    check(ok, parts.join("; "))
}

fn random_pair(rng: &mut ChaCha8Rng, d: usize) -> MatrixSet {
    let mut m = || {
        let rows = (0..d)
            .map(|_| {
                (0..d)
                    .map(|_| Scalar::from_integer(rng.gen_range(0..2i64)))
                    .collect()
            })
            .collect();
        Matrix::from_rows(rows).unwrap()
    };
    let a = m();
    let b = m();
    MatrixSet::new(vec![a, b]).unwrap()
}

fn random_unimodular(rng: &mut ChaCha8Rng) -> (Matrix, Matrix) {
    // product of elementary shears, inverted factor by factor
    let mut t = Matrix::identity(2);
    let mut t_inv = Matrix::identity(2);
    for _ in 0..3 {
        let c = rng.gen_range(-2..=2i64);
        let (e, e_inv) = if rng.gen_bool(0.5) {
            (
                Matrix::from_i64(&[&[1, c], &[0, 1]]),
                Matrix::from_i64(&[&[1, -c], &[0, 1]]),
            )
        } else {
            (
                Matrix::from_i64(&[&[1, 0], &[c, 1]]),
                Matrix::from_i64(&[&[1, 0], &[-c, 1]]),
            )
        };
        t = t.mul(&e).unwrap();
        t_inv = e_inv.mul(&t_inv).unwrap();
    }
    (t, t_inv)
}

/// `max ρ_lower(P)^(1/12)` over all `2^12` products, by depth-first search.
fn exhaustive_length_12(set: &MatrixSet) -> f64 {
    fn go(set: &MatrixSet, p: &ScaledMat, depth: usize, best: &mut f64) {
        if depth == 12 {
            let (lo, _) = spectral_radius_bracket(&p.body, 20);
            if lo > 0.0 {
                *best = best.max(((lo.ln() + p.log_scale) / 12.0).exp());
            }
            return;
        }
        for a in set.floats() {
            go(set, &p.mul(a), depth + 1, best);
        }
    }
    let mut best = 0.0;
    go(set, &ScaledMat::identity(set.dim()), 0, &mut best);
    best
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let opts = BnbOptions {
        max_nodes: 2_000,
        lower_budget: 2_000,
        lower_depth: 8,
        ..BnbOptions::default()
    };
    let tol = 1e-3;
    let alphas = [
        Scalar::new(1, 3),
        Scalar::new(5, 2),
        Scalar::new(7, 4),
        Scalar::new(2, 9),
    ];
    let (mut sound, mut scale, mut similar, mut oracle) = (0, 0, 0, 0);
    let mut first_failure = None;
    for trial in 0..500 {
        let set = random_pair(&mut rng, 2);
        let b = branch_and_bound(&set, tol, &opts).unwrap();
        let s_ok = 0.0 <= b.lower
            && b.lower <= b.upper + 1e-9
            && (b.lower == 0.0 || !b.witness.is_empty());

        let alpha = &alphas[trial % alphas.len()];
        let a = alpha.to_f64();
        let bs = branch_and_bound(&set.scaled(alpha), tol * a, &opts).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs().max(1e-300) || x == y;
        let e_ok = rel(bs.lower, a * b.lower) && rel(bs.upper, a * b.upper);

        let (t, t_inv) = random_unimodular(&mut rng);
        let bt = branch_and_bound(&set.conjugated(&t, &t_inv).unwrap(), tol, &opts).unwrap();
        let v_ok = b.lower.max(bt.lower) <= b.upper.min(bt.upper) + 1e-9;

        let brute = exhaustive_length_12(&set);
        let o_ok = b.lower - 1e-9 <= b.upper && brute <= b.upper + 1e-9;

        sound += s_ok as u32;
        scale += e_ok as u32;
        similar += v_ok as u32;
        oracle += o_ok as u32;
        if !(s_ok && e_ok && v_ok && o_ok) && first_failure.is_none() {
            first_failure = Some(format!(
                "trial {trial}: {:?} {b:?} scaled {bs:?} conj {bt:?} brute {brute}",
                set.mats()
            ));
        }
    }
    // soundness also on three-dimensional pairs
    for _ in 0..100 {
        let set = random_pair(&mut rng, 3);
        let b = branch_and_bound(&set, tol, &opts).unwrap();
        if b.lower <= b.upper + 1e-9 {
            sound += 1;
        } else if first_failure.is_none() {
            first_failure = Some(format!("3x3 {:?} {b:?}", set.mats()));
        }
    }
    let ok = sound == 600 && scale == 500 && similar == 500 && oracle == 500;
    let mut detail =
        format!("sound {sound}/600 scale {scale}/500 similar {similar}/500 brute {oracle}/500");
    if let Some(f) = first_failure {
        detail.push_str(&format!("; first failure {f}"));
    }
    check(ok, detail)
}

fn criterion_7() -> Outcome {
    let set = MatrixSet::from_rep(&rep("sum_of_digits_2"));
    let b = branch_and_bound(&set, 1e-3, &BnbOptions::default()).unwrap();
    let (kind, _) = scaled_norm_refine(&set, 8);
    let u16 = upper_bound(&set, 16, &kind).unwrap();
    let u32_ = upper_bound(&set, 32, &kind).unwrap();
    let lb = lower_bound(&set, 12);

    let zero = LinearRep::new(
        2,
        vec![Matrix::from_i64(&[&[1]]), Matrix::from_i64(&[&[0]])],
        vec![Scalar::one()],
        vec![Scalar::one()],
        Provenance::Basis,
    )
    .unwrap();
    let growth_rejects = estimate_growth_rep(&zero, 1 << 12) == Err(Error::EventuallyZero);
    let witness_rejects = build_witness(&zero, 0.05, 5, &WitnessOptions::default()).err()
        == Some(Error::EventuallyZero);

    let ok = b.truncated
        && b.upper > b.lower + 1e-3
        && (b.lower - 1.0).abs() <= 1e-9
        && (lb.bound - 1.0).abs() <= 1e-9
        && u16 <= 1.19
        && u32_ <= 1.10
        && u32_ <= u16
        && growth_rejects
        && witness_rejects;
    check(
        ok,
        format!(
            "bnb [{:.6}, {:.6}] truncated={} depth {}; scaled upper m=16 {:.6} m=32 {:.6}; eventually-zero rejected growth={} witness={}",
            b.lower, b.upper, b.truncated, b.depth, u16, u32_, growth_rejects, witness_rejects
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 7] = [
        (
            1,
            "counterexample: basis JSR 1 < spanning JSR 2",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            2,
            "growth sandwich on catalog basis reps",
            Duration::from_secs(60),
            criterion_2,
        ),
        (
            3,
            "upper growth constant attained below 2^15",
            Duration::from_secs(60),
            criterion_3,
        ),
        (
            4,
            "Stern witness family growth and length bound",
            Duration::from_secs(10),
            criterion_4,
        ),
        (
            5,
            "kernel reconstruction and minimization",
            Duration::MAX,
            criterion_5,
        ),
        (
            6,
            "JSR property suite on 500 random pairs",
            Duration::MAX,
            criterion_6,
        ),
        (
            7,
            "degenerate cases: unipotent pair and eventually zero",
            Duration::MAX,
            criterion_7,
        ),
    ];
    let mut failures = 0;
    for (id, title, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let pass = outcome.ok && in_time;
        if !pass {
            failures += 1;
        }
        let budget = if limit == Duration::MAX {
            String::new()
        } else {
            format!(" (limit {}s)", limit.as_secs())
        };
        println!(
            "criterion {id} {}: {title} [{:.2}s{budget}] {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
