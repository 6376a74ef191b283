//! Acceptance criteria. Each test prints one PASS/FAIL line per criterion
//! (or sub-check) and then asserts it. Run with `--nocapture` to see them.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use permprop::exact::{self, enumerate_sn, ExactMoments};
use permprop::montecarlo;
use permprop::perm::choose2;
use permprop::spherical::{self, evaluate_word, satisfies_budget, SearchMode};
use permprop::BlockDecomposition;

fn report(criterion: &str, what: &str, pass: bool, detail: String) -> bool {
    println!(
        "criterion {criterion}: {} - {what} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn r(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

const CENSUS: [u64; 10] = [1, 2, 6, 24, 120, 684, 4348, 30549, 236394, 2006492];

#[test]
fn criterion_1_census_reproduction() {
    let start = Instant::now();
    let mut ok = true;
    for (i, &expected) in CENSUS.iter().enumerate() {
        let n = i + 1;
        let dp = exact::count_proper(n).unwrap();
        ok &= dp == BigUint::from(expected);
        if n <= 8 {
            ok &= exact::brute_force_joint_table(n).unwrap().count_proper() == BigUint::from(expected);
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(120);
    let pass = report("1", "proper counts n = 1..10 (brute n <= 8, DP all)", ok && fast, format!("{elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_2_oracle_equivalence() {
    let mut equal = true;
    for n in 1..=8 {
        equal &= exact::lehmer_dp_joint_table(n).unwrap() == exact::brute_force_joint_table(n).unwrap();
    }
    let mut mass_sym = true;
    for n in 1..=25 {
        let t = exact::lehmer_dp_joint_table(n).unwrap();
        mass_sym &= t.total() == exact::factorial(n) && t.is_symmetric();
    }
    let a = report("2a", "DP table equals brute-force table for n <= 8", equal, "cell-by-cell".into());
    let b = report("2b", "mass n! and (k,m) <-> (C(n,2)-k, n-1-m) symmetry for n <= 25", mass_sym, "exact".into());
    assert!(a && b);
}

#[test]
fn criterion_3_first_moment_exact() {
    let mut ok = true;
    for n in 2..=12usize {
        let m = exact::exact_moments(n).unwrap();
        ok &= m.e_x == exact::formula_ex(n).unwrap()
            && m.e_d2 == exact::formula_ed2(n).unwrap()
            && m.e_l == r(choose2(n as u64) as i64, 2)
            && m.e_d == r(n as i64 - 1, 2);
    }
    let pass = report("3", "E[X], E[D^2], E[L], E[D] equal closed forms for 2 <= n <= 12", ok, "zero tolerance".into());
    assert!(pass);
}

#[test]
fn criterion_4_second_moment_trend() {
    let one = BigRational::one();
    let ratios: Vec<BigRational> = (10..=25)
        .map(|n| exact::exact_moments(n).unwrap().second_moment_ratio())
        .collect();
    let in_band = ratios.iter().all(|q| *q > r(1, 2) && *q < r(3, 2));
    let dist = |q: &BigRational| if *q > one { q - &one } else { &one - q };
    let closer = dist(&ratios[15]) < dist(&ratios[0]);
    let pass = report(
        "4",
        "E[X^2]*64/n^4 in (0.5, 1.5) for 10..=25 and closer to 1 at 25 than at 10",
        in_band && closer,
        format!(
            "r(10) = {}, r(25) = {}",
            exact::decimal_string(&ratios[0], 6),
            exact::decimal_string(&ratios[15], 6)
        ),
    );
    assert!(pass);
}

const DECAY_SEED: u64 = 42;

#[test]
fn criterion_5_decay() {
    let exact_rates: Vec<BigRational> = (1..=20)
        .map(|n| exact::proper_probability(&exact::lehmer_dp_joint_table(n).unwrap()))
        .collect();
    let exact_decreasing = (6..20).all(|i| exact_rates[i] < exact_rates[i - 1]);
    let a = report("5a", "exact proper ratio strictly decreasing for 6 <= n <= 20", exact_decreasing, "exact".into());

    let rows = montecarlo::decay_experiment(&[20, 40, 80, 160], 10_000, DECAY_SEED, exact::DEFAULT_DP_CAP).unwrap();
    let rates: Vec<f64> = rows.iter().map(|r| r.summary.proper_rate()).collect();
    let hits: Vec<u64> = rows.iter().map(|r| r.summary.proper_hits).collect();

    let exact20 = exact::to_f64(rows[0].exact_rate.as_ref().unwrap());
    let s20 = &rows[0].summary;
    let z20 = (s20.proper_rate() - exact20).abs() / s20.se_rate();
    let b = report(
        "5b",
        "Monte Carlo n = 20 within 3 standard errors of exact",
        z20 < 3.0,
        format!("{:.4} vs {exact20:.4}, {z20:.2} se", s20.proper_rate()),
    );

    let s10 = montecarlo::estimate_moments(10, 50_000, DECAY_SEED).unwrap();
    let c = report(
        "5c",
        "Monte Carlo rate at n = 10 within [0.52, 0.58]",
        (0.52..=0.58).contains(&s10.proper_rate()),
        format!("{:.4}", s10.proper_rate()),
    );

    let mc_decreasing = rates.windows(2).all(|w| w[1] < w[0]);
    let d = report(
        "5d",
        "Monte Carlo rates at n = 20, 40, 80, 160 strictly decreasing",
        mc_decreasing,
        format!("proper hits per 10000 samples: {hits:?}"),
    );

    assert!(a && b && c, "exact or calibration checks failed");
    assert!(d, "Monte Carlo rates not strictly decreasing: hits {hits:?}");
}

#[test]
fn criterion_6_chebyshev_bound() {
    let mut ok = true;
    for n in 11..=25 {
        let t = exact::lehmer_dp_joint_table(n).unwrap();
        let m = ExactMoments::from_table(&t);
        ok &= exact::proper_probability(&t) <= exact::chebyshev_bound_from(&m);
    }
    let pass = report("6", "exact Pr[X <= n] <= Chebyshev bound for 11 <= n <= 25", ok, "exact".into());
    assert!(pass);
}

#[test]
fn criterion_7_monte_carlo_calibration() {
    let start = Instant::now();
    let s200 = montecarlo::estimate_moments(200, 20_000, DECAY_SEED).unwrap();
    let z = (s200.mean_x() - 4941.75).abs() / s200.se_mean();
    let a = report(
        "7a",
        "n = 200 mean of X within 4 standard errors of 4941.75",
        z < 4.0,
        format!("mean {:.3}, {z:.2} se", s200.mean_x()),
    );
    let s2000 = montecarlo::estimate_moments(2000, 100_000, DECAY_SEED).unwrap();
    let q = s2000.ratio_to_n4_over_64();
    let b = report("7b", "n = 2000 E[X^2]*64/n^4 in [0.9, 1.1]", (0.9..=1.1).contains(&q), format!("{q:.5}"));
    let elapsed = start.elapsed();
    let c = report("7c", "runtime under 5 minutes", elapsed < Duration::from_secs(300), format!("{elapsed:.2?}"));
    assert!(a && b && c);
}

#[test]
fn criterion_8_spherical_implies_proper() {
    let start = Instant::now();
    let mut ok = true;
    let mut pairs = 0usize;
    let mut spherical_pairs = 0usize;
    for w in enumerate_sn(6).unwrap() {
        let j = w.left_descent_set().left_descents().to_vec();
        for mask in 0u32..1 << j.len() {
            let sub: Vec<usize> = j.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i).collect();
            pairs += 1;
            if let Some(word) = spherical::witness_word(&w, &sub, SearchMode::Verification).unwrap() {
                spherical_pairs += 1;
                let (product, reduced) = evaluate_word(6, word.letters()).unwrap();
                let b = BlockDecomposition::new(6, &sub).unwrap();
                ok &= w.is_proper()
                    && product == w
                    && reduced
                    && word.len() as u64 == w.inversion_number()
                    && satisfies_budget(word.letters(), &b);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = report(
        "8",
        "every I-spherical (w, I) in S_6 is proper and its witness re-verifies",
        ok && elapsed < Duration::from_secs(600),
        format!("{spherical_pairs} of {pairs} pairs spherical, {elapsed:.2?}"),
    );
    assert!(pass);
}

fn run_bin(args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_permprop"))
        .args(args)
        .args(["--threads", threads])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_9_determinism() {
    let runs: [&[&str]; 4] = [
        &["sample", "--n", "200", "--samples", "20000", "--seed", "42", "--format", "csv"],
        &["decay", "--n", "10,20,40", "--samples", "10000", "--seed", "42", "--format", "csv"],
        &["decay", "--n", "10,20,40", "--samples", "10000", "--seed", "42", "--format", "json"],
        &["census", "--n", "5", "--format", "json"],
    ];
    let mut ok = true;
    for args in runs {
        let reference = run_bin(args, "1");
        for threads in ["1", "2", "4"] {
            ok &= run_bin(args, threads) == reference;
        }
    }
    let pass = report("9", "byte-identical output across runs and --threads 1/2/4", ok, format!("{} commands", runs.len()));
    assert!(pass);
}
