//! Acceptance criteria 1 to 11. Each criterion prints one `PASS`/`FAIL` line;
//! run with `cargo test --test acceptance -- --nocapture` to see them.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use cesaro_core::base::{embed_q, verify_factorization, PiecewiseFunction};
use cesaro_core::cesaro::{
    boundedness_check, cesaro_block, cesaro_naive, cesaro_naive_series, diameter_estimate, verify_nonconvergence_bounds,
};
use cesaro_core::norms::{check_contraction, norm_l1_plus_linf, ContractionTarget};
use cesaro_core::operator::{floor_log3, pow3, sign_flip_count};
use cesaro_core::residuality::{density_probe, margin, openness_probe};
use cesaro_core::scalar::{Complex64, Rational};
use cesaro_core::scenario::Scenario;
use cesaro_core::space::{CellFunction, CellIndex, ChainId, ChainValues, ChainWeights, FactorSpace, ValueTail, WeightTail};
use cesaro_core::verify::{random_cell_function, random_monotone_space, sample_counts, shift_relation_failures};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5eed_2024;

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn report(criterion: u32, passed: bool, detail: String) -> bool {
    println!("criterion {criterion:>2}: {} {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn cq(re: Rational) -> Complex<Rational> {
    Complex::new(re, q(0, 1))
}

fn ones<T: cesaro_core::scalar::Scalar>() -> CellFunction<T> {
    CellFunction::constant(1, Complex::new(T::one(), T::zero()))
}

fn criterion_1() -> bool {
    let started = Instant::now();
    let v = ones::<f64>();
    let bounds = verify_nonconvergence_bounds(&v, &Complex::new(1.0, 0.0), ChainId(0), 1, 8).unwrap();
    let exact = verify_nonconvergence_bounds(&ones::<Rational>(), &cq(q(1, 1)), ChainId(0), 1, 8).unwrap();
    let elapsed = started.elapsed();
    let largest = bounds.checks.iter().map(|c| c.count).max().unwrap();
    let spots = [(7u64, q(-5, 7)), (25, q(13, 25)), (79, q(-41, 79))];
    let exact_v = ones::<Rational>();
    let spot_ok = spots.iter().all(|(n, expected)| {
        let idx = CellIndex::new(0, 1);
        cesaro_naive(&exact_v, idx, *n).unwrap() == cq(expected.clone())
            && cesaro_block(&exact_v, idx, *n).unwrap() == cq(expected.clone())
    });
    report(
        1,
        bounds.passed() && exact.passed() && largest == pow3(17).unwrap() - 2 && spot_ok && elapsed < Duration::from_secs(1),
        format!(
            "16 checkpoints up to N={largest} (float and exact), spot values A_7, A_25, A_79 exact: {spot_ok}, {} ms",
            elapsed.as_millis()
        ),
    )
}

fn criterion_2() -> bool {
    let z0 = Complex::new(1.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut functions: Vec<(String, CellFunction<f64>, Complex64)> = vec![
        ("Re = 1/2".into(), CellFunction::constant(2, Complex::new(0.5, 0.0)), z0),
        ("Re = 3/4".into(), CellFunction::constant(2, Complex::new(0.75, 0.0)), z0),
    ];
    let mixed = (0..3)
        .map(|_| {
            let prefix = (0..40).map(|_| Complex::new(rng.gen_range(0.5..=1.0), rng.gen_range(-1.0..1.0))).collect();
            ChainValues::new(prefix, ValueTail::Constant(Complex::new(rng.gen_range(0.5..=1.0), 0.3)))
        })
        .collect();
    functions.push(("mixed".into(), CellFunction::new(mixed).unwrap(), z0));
    // cell averages of a base-space step function
    let motif = Scenario::load(&scenarios().join("motif.toml")).unwrap().model::<f64>().unwrap();
    functions.push(("base averages".into(), motif.v, motif.z0));
    let mut checks = 0;
    let mut failures = Vec::new();
    for (name, v, z0) in &functions {
        for j in 0..v.chain_count() {
            for n in [1u64, 2, 3, 5, 13, 40] {
                let r = verify_nonconvergence_bounds(v, z0, ChainId(j), n, 6).unwrap();
                checks += r.checks.len();
                if !r.passed() {
                    failures.push(format!("{name} chain {j} n {n}"));
                }
            }
        }
    }
    report(2, failures.is_empty(), format!("{checks} checkpoint bounds over 4 functions, ell = 1..6, failing: {failures:?}"))
}

fn random_rational_function(rng: &mut ChaCha8Rng) -> CellFunction<Rational> {
    let value = |rng: &mut ChaCha8Rng| {
        Complex::new(q(rng.gen_range(-20..=20), rng.gen_range(1..=12)), q(rng.gen_range(-20..=20), rng.gen_range(1..=12)))
    };
    let chains = (0..rng.gen_range(1..=2))
        .map(|_| {
            let prefix = (0..rng.gen_range(0..10)).map(|_| value(rng)).collect();
            let tail = if rng.gen_bool(0.3) { ValueTail::Zero } else { ValueTail::Constant(value(rng)) };
            ChainValues::new(prefix, tail)
        })
        .collect();
    CellFunction::new(chains).unwrap()
}

fn criterion_3() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let counts = sample_counts(10_000, 500);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let chains = rng.gen_range(1..=3);
        let v = random_cell_function(chains, &mut rng);
        let n = rng.gen_range(0..30);
        for j in 0..chains {
            let idx = CellIndex::new(j, n);
            let naive = cesaro_naive_series(&v, idx, &counts).unwrap();
            let scale = v.chain(ChainId(j)).unwrap().sup_modulus().max(f64::MIN_POSITIVE);
            for (a, &count) in naive.iter().zip(&counts) {
                worst = worst.max((a - cesaro_block(&v, idx, count).unwrap()).norm() / scale);
            }
        }
    }
    let exact_counts = sample_counts(2_000, 120);
    let mut mismatches = 0;
    for _ in 0..20 {
        let v = random_rational_function(&mut rng);
        let n = rng.gen_range(0..30);
        for j in 0..v.chain_count() {
            let idx = CellIndex::new(j, n);
            let naive = cesaro_naive_series(&v, idx, &exact_counts).unwrap();
            for (a, &count) in naive.iter().zip(&exact_counts) {
                if *a != cesaro_block(&v, idx, count).unwrap() {
                    mismatches += 1;
                }
            }
        }
    }
    report(
        3,
        worst <= 1e-12 && mismatches == 0,
        format!("200 functions x {} counts: max relative error {worst:e}; 20 exact functions: {mismatches} mismatches", counts.len()),
    )
}

fn criterion_4() -> bool {
    let mut mismatches = 0;
    for n in 0..=2000u64 {
        let mut enumerated = 0u32;
        for m in 0..=2000u64 {
            if m > 0 && is_power_of_three(n + m) {
                enumerated += 1;
            }
            if sign_flip_count(n, m) != enumerated {
                mismatches += 1;
            }
        }
    }
    let mut log_failures = 0;
    let mut p = 1u64;
    for t in 0..=38u32 {
        let mut cases = vec![(p, t), (p + 1, t)];
        if t > 0 {
            cases.push((p - 1, t - 1));
        }
        log_failures += cases.iter().filter(|(x, e)| floor_log3(*x).unwrap() != *e).count();
        p *= 3;
    }
    report(
        4,
        mismatches == 0 && log_failures == 0,
        format!("sign_flip_count on n, m <= 2000: {mismatches} mismatches; floor_log3 at 3^t, 3^t +- 1, t <= 38: {log_failures} mismatches"),
    )
}

fn is_power_of_three(mut x: u64) -> bool {
    while x.is_multiple_of(3) && x > 1 {
        x /= 3;
    }
    x == 1
}

fn criterion_5() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let mut worst = (0.0f64, 0.0f64);
    let mut failures = 0;
    for i in 0..3 {
        let space = random_monotone_space(rng.gen_range(1..=3), &mut rng);
        let r = check_contraction(ContractionTarget::Shift(&space), 1000, SEED + i).unwrap();
        failures += r.failures;
        worst = (worst.0.max(r.worst_l1_ratio), worst.1.max(r.worst_linf_ratio));
    }
    for name in ["half_line.toml", "motif.toml"] {
        let model = Scenario::load(&scenarios().join(name)).unwrap().model::<f64>().unwrap();
        let r = check_contraction(ContractionTarget::Base(model.partition.as_ref().unwrap()), 1000, SEED).unwrap();
        failures += r.failures;
        worst = (worst.0.max(r.worst_l1_ratio), worst.1.max(r.worst_linf_ratio));
    }
    let decreasing = FactorSpace::new_unchecked(vec![ChainWeights { prefix: vec![4.0, 2.0], tail: WeightTail::Constant(1.0) }]);
    let control = check_contraction(ContractionTarget::Shift(&decreasing), 1000, SEED).unwrap();
    let control_fails = control.failures > 0 && control.worst_l1_ratio > 1.0;
    report(
        5,
        failures == 0 && control_fails,
        format!(
            "S on 3 spaces and T on 2 base spaces, 1000 samples each: worst ratios L1 {:.17} Linf {:.17}; decreasing weights: {} failures, L1 ratio {}",
            worst.0, worst.1, control.failures, control.worst_l1_ratio
        ),
    )
}

fn criterion_6() -> bool {
    let model = Scenario::load(&scenarios().join("motif.toml")).unwrap().model::<f64>().unwrap();
    let partition = model.partition.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut functions = Vec::new();
    for _ in 0..20 {
        let v = random_cell_function(partition.chain_count(), &mut rng);
        functions.push(embed_q(&partition, &v).unwrap());
    }
    for _ in 0..5 {
        functions.push(PiecewiseFunction::random_finite_support(partition.space(), 20, &mut rng));
    }
    let mut failures = 0;
    let mut worst = 0.0f64;
    for g in &functions {
        let r = verify_factorization(&partition, g, 50, 20).unwrap();
        failures += r.failures.len();
        worst = worst.max(r.max_error);
    }
    report(
        6,
        failures == 0 && worst <= 1e-12,
        format!("20 cell step functions and 5 finer ones, k <= 50, 20 cells per chain, iterates and averages: max error {worst:e}, {failures} failures"),
    )
}

fn criterion_7() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut failures = 0;
    for _ in 0..3 {
        let v = random_cell_function(1, &mut rng);
        failures += shift_relation_failures(&v, 100, 1000).unwrap();
    }
    report(7, failures == 0, format!("3 random functions, all n < m <= 100, k <= 1000, exact equality: {failures} mismatches"))
}

fn criterion_8() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut violations = 0;
    for _ in 0..200 {
        let v = random_cell_function(1, &mut rng);
        let counts: Vec<u64> = (0..5).map(|_| rng.gen_range(1..=100_000)).collect();
        if !boundedness_check(&v, CellIndex::new(0, rng.gen_range(0..100)), &counts).unwrap() {
            violations += 1;
        }
    }
    report(8, violations == 0, format!("1000 (v, N) pairs, N <= 100000: {violations} functions with |A_N| above sup|v|"))
}

/// `min over thresholds τ` of `τ + Σ w·(|v|−τ)₊`, scanning every cell modulus.
fn threshold_oracle(cells: &[(f64, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    for &(_, tau) in cells.iter().chain(std::iter::once(&(0.0, 0.0))) {
        let mut cost = tau;
        for &(w, r) in cells {
            if r > tau {
                cost += w * (r - tau);
            }
        }
        best = best.min(cost);
    }
    best
}

fn criterion_9() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let weights: Vec<f64> = {
            let mut w = rng.gen_range(0.05..1.0);
            (0..20)
                .map(|_| {
                    w += rng.gen_range(0.0..0.5);
                    w
                })
                .collect()
        };
        let len = rng.gen_range(0..=20usize);
        let values: Vec<Complex64> =
            (0..len).map(|_| Complex::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
        let space = FactorSpace::new(vec![ChainWeights { prefix: weights.clone(), tail: WeightTail::Constant(weights[19]) }]).unwrap();
        let v = CellFunction::new(vec![ChainValues::new(values.clone(), ValueTail::Zero)]).unwrap();
        let cells: Vec<(f64, f64)> = values.iter().zip(&weights).map(|(z, w)| (*w, z.norm())).collect();
        worst = worst.max((norm_l1_plus_linf(&space, &v).unwrap() - threshold_oracle(&cells)).abs());
    }
    let space = FactorSpace::new(vec![
        ChainWeights { prefix: vec![0.5], tail: WeightTail::Geometric { base: 1.0, ratio: 2.0 } },
        ChainWeights::constant(3.0),
        ChainWeights::constant(0.01),
    ])
    .unwrap();
    let indicators: Vec<f64> = [vec![0], vec![1], vec![2], vec![0, 1, 2]]
        .iter()
        .map(|js| {
            let ids: Vec<ChainId> = js.iter().map(|j| ChainId(*j)).collect();
            norm_l1_plus_linf(&space, &space.indicator(&ids).unwrap()).unwrap()
        })
        .collect();
    let unit = indicators.iter().all(|x| *x == 1.0);
    report(9, worst <= 1e-9 && unit, format!("500 zero-tail functions on <= 20 cells: max deviation {worst:e}; indicator norms {indicators:?}"))
}

fn criterion_10() -> bool {
    let (t_min, t_max) = (2, 12);
    let space = FactorSpace::uniform(3, 1.0).unwrap();
    let all: Vec<ChainId> = (0..3).map(ChainId).collect();
    let one = space.indicator(&all).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for delta in [1.0, 0.3, 0.01] {
        let r = density_probe(&space, &CellFunction::zero(3), delta, t_min, t_max).unwrap();
        ok &= r.passed() && r.margin_after >= 2.0 * delta / 9.0 && r.selected.len() == 3;
        parts.push(format!("delta {delta}: margin {:.6}", r.margin_after));
    }
    let epsilon = margin(&one, t_min, t_max).unwrap().margin;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let mut openness_failures = 0;
    let mut tried = 0;
    while tried < 20 {
        let w = random_cell_function(3, &mut rng);
        let norm = norm_l1_plus_linf(&space, &w).unwrap();
        if norm == 0.0 {
            continue;
        }
        tried += 1;
        let w = w.scale(&Complex::new(epsilon / 3.0 * rng.gen_range(0.05..0.95) / norm, 0.0));
        if !openness_probe(&space, &one, &w, t_min, t_max).unwrap().passed() {
            openness_failures += 1;
        }
    }
    let diameters: Vec<f64> = (0..3).map(|j| diameter_estimate(&one, ChainId(j), t_min, t_max).unwrap().value).collect();
    let two_ninths = diameters.iter().all(|d| *d >= 2.0 / 9.0);
    report(
        10,
        ok && openness_failures == 0 && two_ninths,
        format!("density {}; openness: {openness_failures} of 20 failed; d_est(1; j, 0) = {:.6}", parts.join(", "), diameters[0]),
    )
}

fn criterion_11() -> bool {
    let started = Instant::now();
    let path = scenarios().join("canonical.toml");
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_cesaro"))
            .args(["verify", "--suite", "all", "--threads", threads, "--scenario"])
            .arg(&path)
            .output()
            .unwrap();
        (out.status.code(), out.stdout)
    };
    let outputs = [run("1"), run("8"), run("1"), run("8")];
    let elapsed = started.elapsed();
    let identical = outputs.iter().all(|o| *o == outputs[0]);
    let clean = outputs[0].0 == Some(0);
    let per_run = elapsed / 4;
    report(
        11,
        identical && clean && per_run < Duration::from_secs(60),
        format!("4 runs (threads 1, 8, 1, 8) byte-identical: {identical}, exit 0: {clean}, {} ms per run", per_run.as_millis()),
    )
}

#[test]
fn acceptance() {
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
