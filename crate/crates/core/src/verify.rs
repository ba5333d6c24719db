//! Verification suites run against a scenario.
//!
//! Every suite produces a list of named checks. The rendered report has one
//! `[PASS]`/`[FAIL]`/`[SKIP]` line per check followed by the machine rows
//! `suite,checks,passed,failed` and their values. Reports contain no timings,
//! so a fixed scenario and seed give identical bytes for any thread count.

use std::fmt::Write as _;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::base::{verify_factorization, PiecewiseFunction};
use crate::cesaro::{
    boundedness_check, cesaro_block, cesaro_naive_series, checkpoint_set, diameter_estimate, verify_nonconvergence_bounds,
    Family,
};
use crate::error::Result;
use crate::norms::{check_contraction, norm_l1_plus_linf, ContractionTarget};
use crate::operator::{floor_log3, iterate_value, pow3, sigma, sign_flip_count, Sign};
use crate::residuality::{density_probe, finite_j_remark_probe, margin, openness_probe, TOLERANCE};
use crate::scalar::{format_sig17, Complex64, Rational, Scalar};
use crate::scenario::{Model, Scenario};
use crate::space::{CellFunction, CellIndex, ChainId, ChainValues, ChainWeights, FactorSpace, ValueTail, WeightTail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Theorem1,
    Lemmas,
    Norms,
    Residuality,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem1 => "theorem1",
            Suite::Lemmas => "lemmas",
            Suite::Norms => "norms",
            Suite::Residuality => "residuality",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn counted(&self) -> usize {
        self.checks.iter().filter(|c| c.status != Status::Skip).count()
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Pass).count()
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            let _ = writeln!(out, "[{tag}] {}: {}", c.name, c.detail);
        }
        let _ = writeln!(out, "suite,checks,passed,failed");
        let _ = writeln!(out, "{},{},{},{}", self.suite.name(), self.counted(), self.passed(), self.failed());
        out
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        let status = if passed { Status::Pass } else { Status::Fail };
        self.0.push(Check { name: name.into(), status, detail: detail.into() });
    }

    fn skip(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), status: Status::Skip, detail: detail.into() });
    }

    /// Records an error as a failed check instead of aborting the suite.
    fn run(&mut self, name: &str, f: impl FnOnce(&mut Checks) -> Result<()>) {
        if let Err(e) = f(self) {
            self.add(name, false, format!("error: {e}"));
        }
    }
}

fn g(x: f64) -> String {
    format_sig17(x)
}

fn random_value(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random function with a short prefix and a zero or constant tail.
pub fn random_cell_function(chain_count: usize, rng: &mut ChaCha8Rng) -> CellFunction<f64> {
    let chains = (0..chain_count)
        .map(|_| {
            let len = rng.gen_range(0..12);
            let prefix = (0..len).map(|_| random_value(rng)).collect();
            let tail = if rng.gen_bool(0.3) { ValueTail::Zero } else { ValueTail::Constant(random_value(rng)) };
            ChainValues::new(prefix, tail)
        })
        .collect();
    CellFunction::new(chains).expect("finite values")
}

/// Random nondecreasing weights on `chain_count` chains.
pub fn random_monotone_space(chain_count: usize, rng: &mut ChaCha8Rng) -> FactorSpace<f64> {
    let chains = (0..chain_count)
        .map(|_| {
            let mut w = rng.gen_range(0.1..2.0);
            let prefix = (0..rng.gen_range(0..6))
                .map(|_| {
                    w += rng.gen_range(0.0..1.0);
                    w
                })
                .collect();
            let tail = if rng.gen_bool(0.5) {
                WeightTail::Constant(w + rng.gen_range(0.0..1.0))
            } else {
                WeightTail::Geometric { base: w + rng.gen_range(0.0..1.0), ratio: rng.gen_range(1.0..2.0) }
            };
            ChainWeights { prefix, tail }
        })
        .collect();
    FactorSpace::new(chains).expect("monotone by construction")
}

fn theorem1_bounds<T: Scalar>(scenario: &Scenario, model: &Model<T>, checks: &mut Checks) -> Result<()> {
    let mode = if scenario.exact { "exact" } else { "float" };
    for j in 0..model.v.chain_count() {
        for &n in &scenario.starts {
            let name = format!("bounds chain {j} n {n}");
            if n == 0 {
                checks.skip(name, "bounds are stated for n >= 1");
                continue;
            }
            let report = verify_nonconvergence_bounds(&model.v, &model.z0, ChainId(j), n, scenario.l_max)?;
            if !report.precondition_holds() {
                let cells: Vec<String> = report
                    .precondition_violations
                    .iter()
                    .map(|c| c.map_or("tail".to_string(), |m| m.to_string()))
                    .collect();
                checks.skip(name, format!("Re(v/z0) outside [1/2, 1] at cells {}", cells.join(" ")));
                continue;
            }
            let extreme = |family: Family, pick: fn(f64, f64) -> f64, init: f64| {
                report
                    .checks
                    .iter()
                    .filter(|c| c.family == family)
                    .map(|c| c.re_over_z0.to_f64())
                    .fold(init, pick)
            };
            let failed: Vec<String> =
                report.checks.iter().filter(|c| !c.passed).map(|c| format!("N={}", c.count)).collect();
            let detail = format!(
                "{} checkpoints ({mode}), max even {}, min odd {}{}",
                report.checks.len(),
                g(extreme(Family::Even, f64::max, f64::NEG_INFINITY)),
                g(extreme(Family::Odd, f64::min, f64::INFINITY)),
                if failed.is_empty() { String::new() } else { format!(", failing {}", failed.join(" ")) }
            );
            checks.add(name, report.passed(), detail);
        }
    }
    Ok(())
}

fn theorem1(scenario: &Scenario, seed: u64, checks: &mut Checks) {
    checks.run("bounds", |c| {
        if scenario.exact {
            theorem1_bounds(scenario, &scenario.model::<Rational>()?, c)
        } else {
            theorem1_bounds(scenario, &scenario.model::<f64>()?, c)
        }
    });
    checks.run("contraction", |c| {
        let model = scenario.model::<f64>()?;
        let samples = scenario.probes.contraction_samples;
        let report = check_contraction(ContractionTarget::Shift(&model.space), samples, seed)?;
        c.add(
            "contraction S",
            report.passed(),
            format!(
                "{samples} samples, worst L1 ratio {}, worst Linf ratio {}, {} failures",
                g(report.worst_l1_ratio),
                g(report.worst_linf_ratio),
                report.failures
            ),
        );
        if let Some(partition) = &model.partition {
            let report = check_contraction(ContractionTarget::Base(partition), samples, seed.wrapping_add(1))?;
            c.add(
                "contraction T",
                report.passed(),
                format!(
                    "{samples} samples, worst L1 ratio {}, worst Linf ratio {}, {} failures",
                    g(report.worst_l1_ratio),
                    g(report.worst_linf_ratio),
                    report.failures
                ),
            );
        }
        Ok(())
    });
}

/// `(S^k v)(j,m) = σ(n,m−n)·(S^{k+m−n} v)(j,n)` for all `n < m ≤ m_max`, `k ≤ k_max`.
pub fn shift_relation_failures(v: &CellFunction<f64>, m_max: u64, k_max: u64) -> Result<u64> {
    let per_chain = (0..v.chain_count())
        .into_par_iter()
        .map(|j| {
            let mut failures = 0u64;
            for m in 1..=m_max {
                for n in 0..m {
                    let sign = Sign::from_parity(sign_flip_count(n, m - n));
                    for k in 1..=k_max {
                        let left = iterate_value(v, CellIndex::new(j, m), k)?;
                        let right = sign.apply(iterate_value(v, CellIndex::new(j, n), k + m - n)?);
                        if left != right {
                            failures += 1;
                        }
                    }
                }
            }
            Ok(failures)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_chain.iter().sum())
}

/// `N·A_N(v;j,m)·σ(n,m−n) = Σ_{k=1+m−n}^{N+m−n} (S^k v)(j,n)`, compared with
/// relative tolerance `1e-12` against the sum of moduli.
fn n_independence_failures(v: &CellFunction<f64>, m_max: u64, counts: &[u64]) -> Result<u64> {
    let mut failures = 0;
    for j in 0..v.chain_count() {
        for m in 1..=m_max {
            for n in 0..m {
                let sign = Sign::from_parity(sign_flip_count(n, m - n));
                for &count in counts {
                    let left = sign.apply(cesaro_block(v, CellIndex::new(j, m), count)? * count as f64);
                    let mut right = Complex::new(0.0, 0.0);
                    let mut scale = 0.0;
                    for k in 1 + m - n..=count + m - n {
                        let z = iterate_value(v, CellIndex::new(j, n), k)?;
                        right += z;
                        scale += z.norm();
                    }
                    if (left - right).norm() > 1e-12 * scale.max(1.0) {
                        failures += 1;
                    }
                }
            }
        }
    }
    Ok(failures)
}

/// Sampled counts `N ≤ limit`: the first 100 and evenly spread ones after.
pub fn sample_counts(limit: u64, points: usize) -> Vec<u64> {
    let mut counts: Vec<u64> = (1..=limit.min(100)).collect();
    let rest = points.saturating_sub(counts.len()) as u64;
    for i in 1..=rest {
        counts.push(100 + (limit.saturating_sub(100) * i) / rest);
    }
    counts.sort_unstable();
    counts.dedup();
    counts
}

/// Largest relative deviation of blockwise from naive averages.
pub fn block_vs_naive_error(v: &CellFunction<f64>, counts: &[u64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for j in 0..v.chain_count() {
        let idx = CellIndex::new(j, 0);
        let naive = cesaro_naive_series(v, idx, counts)?;
        let scale = v.chain(ChainId(j))?.sup_modulus().max(f64::MIN_POSITIVE);
        for (a, &count) in naive.iter().zip(counts) {
            let b = cesaro_block(v, idx, count)?;
            worst = worst.max((a - b).norm() / scale);
        }
    }
    Ok(worst)
}

fn lemmas(scenario: &Scenario, seed: u64, checks: &mut Checks) {
    let probes = &scenario.probes;
    checks.run("model", |c| {
        let model = scenario.model::<f64>()?;
        let failures = shift_relation_failures(&model.v, 100, 1000)?;
        c.add("shift relation (model)", failures == 0, format!("n < m <= 100, k <= 1000, {failures} mismatches"));
        let failures = n_independence_failures(&model.v, 12, &[1, 2, 10, 100, 1000])?;
        c.add("n-independence (model)", failures == 0, format!("n < m <= 12, 5 counts, {failures} mismatches"));
        let counts = sample_counts(10_000, 500);
        let err = block_vs_naive_error(&model.v, &counts)?;
        c.add("block vs naive (model)", err <= 1e-12, format!("{} counts up to 10000, max relative error {}", counts.len(), g(err)));
        if scenario.exact {
            let exact = scenario.model::<Rational>()?;
            let counts = sample_counts(2000, 150);
            let mut mismatches = 0;
            for j in 0..exact.v.chain_count() {
                let idx = CellIndex::new(j, 1);
                let naive = cesaro_naive_series(&exact.v, idx, &counts)?;
                for (a, &count) in naive.iter().zip(&counts) {
                    if *a != cesaro_block(&exact.v, idx, count)? {
                        mismatches += 1;
                    }
                }
            }
            c.add("block vs naive (exact)", mismatches == 0, format!("{} counts up to 2000, {mismatches} mismatches", counts.len()));
        }
        let mut worst = 0.0f64;
        let mut monotone = true;
        for j in 0..model.v.chain_count() {
            let sup = model.v.chain(ChainId(j))?.sup_modulus();
            let mut previous = 0.0;
            for t_max in scenario.t_min.max(1)..=scenario.t_max {
                let d = diameter_estimate(&model.v, ChainId(j), scenario.t_min.max(1).min(t_max), t_max)?.value;
                monotone &= d >= previous;
                previous = d;
                if sup > 0.0 {
                    worst = worst.max(d / (2.0 * sup));
                } else if d > 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
        c.add(
            "diameter bounds (model)",
            worst <= 1.0 + 1e-12 && monotone,
            format!("max d/(2 sup) {}, nondecreasing in t_max: {monotone}", g(worst)),
        );
        Ok(())
    });

    checks.run("random", |c| {
        let chain_count = scenario.model::<f64>()?.v.chain_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<CellFunction<f64>> =
            (0..probes.random_functions).map(|_| random_cell_function(chain_count, &mut rng)).collect();
        let bounded_counts: Vec<Vec<u64>> =
            samples.iter().map(|_| (0..5).map(|_| rng.gen_range(1..=100_000)).collect()).collect();
        let starts: Vec<u64> = samples.iter().map(|_| rng.gen_range(0..50)).collect();

        let shift = samples.par_iter().take(5).map(|v| shift_relation_failures(v, 100, 200)).collect::<Result<Vec<_>>>()?;
        let failures: u64 = shift.iter().sum();
        c.add("shift relation (random)", failures == 0, format!("5 functions, n < m <= 100, k <= 200, {failures} mismatches"));

        let indep = samples.par_iter().take(10).map(|v| n_independence_failures(v, 8, &[1, 7, 50, 400])).collect::<Result<Vec<_>>>()?;
        let failures: u64 = indep.iter().sum();
        c.add("n-independence (random)", failures == 0, format!("10 functions, n < m <= 8, {failures} mismatches"));

        let counts = sample_counts(10_000, 500);
        let errors = samples.par_iter().map(|v| block_vs_naive_error(v, &counts)).collect::<Result<Vec<_>>>()?;
        let worst = errors.iter().copied().fold(0.0, f64::max);
        c.add(
            "block vs naive (random)",
            worst <= 1e-12,
            format!("{} functions, {} counts up to 10000, max relative error {}", samples.len(), counts.len(), g(worst)),
        );

        let bounded = samples
            .par_iter()
            .zip(&bounded_counts)
            .zip(&starts)
            .map(|((v, counts), &n)| {
                (0..v.chain_count()).try_fold(true, |ok, j| Ok(ok && boundedness_check(v, CellIndex::new(j, n), counts)?))
            })
            .collect::<Result<Vec<bool>>>()?;
        let violations = bounded.iter().filter(|b| !**b).count();
        c.add(
            "boundedness (random)",
            violations == 0,
            format!("{} functions x 5 counts up to 100000, {violations} violations", samples.len()),
        );

        let mut worst = 0.0f64;
        for v in samples.iter().take(20) {
            for j in 0..v.chain_count() {
                let d = diameter_estimate(v, ChainId(j), 1, 12)?.value;
                let sup = v.chain(ChainId(j))?.sup_modulus();
                if sup > 0.0 {
                    worst = worst.max(d / (2.0 * sup));
                }
            }
        }
        c.add("diameter bounds (random)", worst <= 1.0 + 1e-12, format!("20 functions, max d/(2 sup) {}", g(worst)));
        Ok(())
    });

    checks.run("signs", |c| {
        let limit = 60;
        let mut failures = 0;
        for n in 0..=limit {
            for m in 0..=limit {
                for k in 0..=limit {
                    if sigma(n, m + k) != sigma(n, m) * sigma(n + m, k) {
                        failures += 1;
                    }
                }
            }
        }
        c.add("sigma cocycle", failures == 0, format!("n, m, k <= {limit}, {failures} mismatches"));

        let mut failures = 0;
        for n in 0..=2000u64 {
            let mut count = 0u32;
            let mut next_power = 1u64;
            while next_power <= n {
                next_power *= 3;
            }
            for m in 1..=2000u64 {
                if n + m == next_power {
                    count += 1;
                    next_power *= 3;
                }
                if sign_flip_count(n, m) != count {
                    failures += 1;
                }
            }
        }
        c.add("sign flip count", failures == 0, format!("n, m <= 2000 against enumeration, {failures} mismatches"));

        let mut failures = 0;
        for t in 0..=38u32 {
            let p = pow3(t).expect("3^38 fits in u64");
            let mut cases = vec![(p, t), (p + 1, t)];
            if t > 0 {
                cases.push((p - 1, t - 1));
            }
            for (x, expected) in cases {
                if floor_log3(x)? != expected {
                    failures += 1;
                }
            }
        }
        c.add("floor log3", failures == 0, format!("3^t and 3^t +- 1 for t <= 38, {failures} mismatches"));
        Ok(())
    });

    checks.run("factorization", |c| {
        let model = scenario.model::<f64>()?;
        let Some(partition) = &model.partition else {
            c.skip("factorization", "scenario has no base space");
            return Ok(());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        let mut functions = vec![partition.function().clone()];
        for _ in 0..probes.factorization_functions {
            functions.push(PiecewiseFunction::random_finite_support(partition.space(), 24, &mut rng));
        }
        let reports = functions
            .par_iter()
            .map(|f| verify_factorization(partition, f, probes.factorization_k_max, probes.factorization_cells))
            .collect::<Result<Vec<_>>>()?;
        let failed: usize = reports.iter().map(|r| r.failures.len()).sum();
        let checked: usize = reports.iter().map(|r| r.checks).sum();
        let worst = reports.iter().map(|r| r.max_error).fold(0.0, f64::max);
        c.add(
            "factorization",
            failed == 0,
            format!(
                "{} functions, k <= {}, {} cells, {checked} comparisons, max error {}, {failed} failures",
                functions.len(),
                probes.factorization_k_max,
                probes.factorization_cells,
                g(worst)
            ),
        );
        Ok(())
    });
}

/// `min_τ τ + Σ w·(|v| − τ)_+` over `τ ∈ {0} ∪ {|v|}`, by direct summation
/// over the prefix cells of a zero-tail function.
pub fn brute_force_norm(space: &FactorSpace<f64>, v: &CellFunction<f64>) -> Result<f64> {
    let mut cells = Vec::new();
    for j in 0..v.chain_count() {
        for (n, z) in v.chain(ChainId(j))?.prefix.iter().enumerate() {
            cells.push((space.weight(CellIndex::new(j, n as u64))?, z.norm()));
        }
    }
    let candidates = std::iter::once(0.0).chain(cells.iter().map(|c| c.1));
    Ok(candidates
        .map(|tau| tau + cells.iter().map(|(w, r)| w * (r - tau).max(0.0)).sum::<f64>())
        .fold(f64::INFINITY, f64::min))
}

fn norms(scenario: &Scenario, seed: u64, checks: &mut Checks) {
    checks.run("rearrangement", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        let mut worst = 0.0f64;
        let samples = scenario.probes.random_functions;
        for _ in 0..samples {
            let chain_count = rng.gen_range(1..=4);
            let space = random_monotone_space(chain_count, &mut rng);
            let mut budget = rng.gen_range(0..=20usize);
            let chains = (0..chain_count)
                .map(|_| {
                    let len = rng.gen_range(0..=budget);
                    budget -= len;
                    ChainValues::new((0..len).map(|_| random_value(&mut rng) * 2.0).collect(), ValueTail::Zero)
                })
                .collect();
            let v = CellFunction::new(chains)?;
            let expected = brute_force_norm(&space, &v)?;
            let actual = norm_l1_plus_linf(&space, &v)?;
            worst = worst.max((actual - expected).abs());
        }
        c.add(
            "rearrangement vs threshold search",
            worst <= 1e-9,
            format!("{samples} zero-tail functions on <= 20 cells, max deviation {}", g(worst)),
        );
        Ok(())
    });
    checks.run("indicator", |c| {
        let model = scenario.model::<f64>()?;
        let mut values = Vec::new();
        let all: Vec<ChainId> = (0..model.space.chain_count()).map(ChainId).collect();
        values.push(norm_l1_plus_linf(&model.space, &model.space.indicator(&all)?)?);
        for j in &all {
            values.push(norm_l1_plus_linf(&model.space, &model.space.indicator(&[*j])?)?);
        }
        let exact = values.iter().all(|x| *x == 1.0);
        c.add("indicator norm", exact, format!("{} indicators of infinite sets, all equal to 1: {exact}", values.len()));
        Ok(())
    });
}

fn residuality(scenario: &Scenario, seed: u64, checks: &mut Checks) {
    let (t_min, t_max) = (scenario.t_min, scenario.t_max);
    let probes = &scenario.probes;
    checks.run("indicator diameters", |c| {
        let model = scenario.model::<f64>()?;
        let all: Vec<ChainId> = (0..model.space.chain_count()).map(ChainId).collect();
        let report = margin(&model.space.indicator(&all)?, t_min, t_max)?;
        let ok = report.chains.iter().all(|d| d.value >= 2.0 / 9.0 - TOLERANCE);
        c.add("indicator diameter", ok, format!("min over chains {} (bound 2/9)", g(report.margin)));
        let m = margin(&model.v, t_min, t_max)?;
        c.skip("model margin", format!("{} (in G0: {})", g(m.margin), m.in_g0));
        Ok(())
    });
    checks.run("density", |c| {
        let model = scenario.model::<f64>()?;
        let chain_count = model.space.chain_count();
        for &delta in &probes.deltas {
            let zero = CellFunction::zero(chain_count);
            let report = density_probe(&model.space, &zero, delta, t_min, t_max)?;
            c.add(
                format!("density v1=0 delta {}", g(delta)),
                report.passed(),
                format!("selected {} chains, margin after {}", report.selected.len(), g(report.margin_after)),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
        let samples: Vec<CellFunction<f64>> = (0..50).map(|_| random_cell_function(chain_count, &mut rng)).collect();
        for &delta in &probes.deltas {
            let reports = samples
                .par_iter()
                .map(|v| density_probe(&model.space, v, delta, t_min, t_max))
                .collect::<Result<Vec<_>>>()?;
            let failed = reports.iter().filter(|r| !r.passed()).count();
            c.add(format!("density random delta {}", g(delta)), failed == 0, format!("50 samples, {failed} failures"));
        }
        Ok(())
    });
    checks.run("openness", |c| {
        let model = scenario.model::<f64>()?;
        let chain_count = model.space.chain_count();
        let all: Vec<ChainId> = (0..chain_count).map(ChainId).collect();
        let v0 = model.space.indicator(&all)?;
        let epsilon = margin(&v0, t_min, t_max)?.margin;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5));
        let mut perturbations = Vec::new();
        while perturbations.len() < probes.openness_samples {
            let w = random_cell_function(chain_count, &mut rng);
            let norm = norm_l1_plus_linf(&model.space, &w)?;
            if norm == 0.0 {
                continue;
            }
            let target = epsilon / 3.0 * rng.gen_range(0.05..0.95);
            perturbations.push(w.scale(&Complex::new(target / norm, 0.0)));
        }
        let reports = perturbations
            .par_iter()
            .map(|w| openness_probe(&model.space, &v0, w, t_min, t_max))
            .collect::<Result<Vec<_>>>()?;
        let failed = reports.iter().filter(|r| !r.passed()).count();
        let refined = reports.iter().filter(|r| r.refined).count();
        let worst = reports.iter().map(|r| r.margin_after).fold(f64::INFINITY, f64::min);
        c.add(
            "openness v0=1",
            failed == 0,
            format!(
                "{} perturbations, epsilon {}, min margin after {}, {refined} refined, {failed} failures",
                reports.len(),
                g(epsilon),
                g(worst)
            ),
        );
        Ok(())
    });
    checks.run("remark", |c| {
        let report = finite_j_remark_probe(probes.remark_samples, seed.wrapping_add(6), t_min, t_max)?;
        c.add(
            "finite chain remark",
            report.passed(),
            format!(
                "{} samples, {} included, {} counterexamples",
                report.samples,
                report.included,
                report.counterexamples.len()
            ),
        );
        Ok(())
    });
}

type SuiteFn = fn(&Scenario, u64, &mut Checks);

/// Runs one suite (or all of them) on a scenario. `seed` overrides the
/// scenario's seed when given.
pub fn run_suite(scenario: &Scenario, suite: Suite, seed: Option<u64>) -> SuiteReport {
    let seed = seed.unwrap_or(scenario.seed);
    let mut checks = Checks(Vec::new());
    let prefixed = |checks: &mut Checks, name: &str, f: SuiteFn| {
        let start = checks.0.len();
        f(scenario, seed, checks);
        for c in &mut checks.0[start..] {
            c.name = format!("{name} {}", c.name);
        }
    };
    let parts: &[(Suite, SuiteFn)] = &[
        (Suite::Theorem1, theorem1),
        (Suite::Lemmas, lemmas),
        (Suite::Norms, norms),
        (Suite::Residuality, residuality),
    ];
    for (s, f) in parts {
        if suite == *s || suite == Suite::All {
            prefixed(&mut checks, s.name(), *f);
        }
    }
    SuiteReport { suite, checks: checks.0 }
}

/// The checkpoints a scenario requests are valid for every start.
pub fn checkpoints_valid(scenario: &Scenario) -> Result<()> {
    for &n in &scenario.starts {
        checkpoint_set(n, scenario.t_min, scenario.t_max)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = "[checkpoints]\nt_min = 2\nt_max = 8\nz0 = \"1\"\n[[chain]]\nvalue_tail = \"constant 1\"\n[probes]\nrandom_functions = 20\ncontraction_samples = 100\n";

    #[test]
    fn theorem1_on_canonical() {
        let s = Scenario::from_toml(CANONICAL).unwrap();
        let r = run_suite(&s, Suite::Theorem1, None);
        assert_eq!(r.failed(), 0, "{}", r.render());
        assert!(r.render().ends_with("suite,checks,passed,failed\ntheorem1,2,2,0\n"), "{}", r.render());
    }

    #[test]
    fn decreasing_weights_fail_contraction() {
        let text = "[space]\nallow_nonmonotone = true\n[[chain]]\nweights = [4, 2]\nvalue_tail = \"constant 1\"\n[probes]\ncontraction_samples = 200\n";
        let s = Scenario::from_toml(text).unwrap();
        let r = run_suite(&s, Suite::Theorem1, None);
        let contraction = r.checks.iter().find(|c| c.name.contains("contraction S")).unwrap();
        assert_eq!(contraction.status, Status::Fail);
    }

    #[test]
    fn brute_force_matches_hand_value() {
        let space = FactorSpace::new(vec![ChainWeights { prefix: vec![1.0, 2.0], tail: WeightTail::Constant(2.0) }]).unwrap();
        let v = CellFunction::new(vec![ChainValues::new(vec![Complex::new(3.0, 0.0), Complex::new(1.0, 0.0)], ValueTail::Zero)]).unwrap();
        // τ = 1: 1 + 1·2 = 3; τ = 0: 3 + 2 = 5; τ = 3: 3
        assert_eq!(brute_force_norm(&space, &v).unwrap(), 3.0);
    }

    #[test]
    fn sample_counts_shape() {
        let c = sample_counts(10_000, 500);
        assert_eq!(c.len(), 500);
        assert_eq!((c[0], c[99], *c.last().unwrap()), (1, 100, 10_000));
    }
}
