//! Probes for openness and density of `G₀ = {v : inf_j d(v;j,0) > 0}`.
//!
//! `d` is always the checkpoint estimate from [`diameter_estimate`], which is
//! a lower bound; every inequality below is a lower bound on a perturbed
//! diameter, so a failure points at a bug or at too coarse an estimate.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cesaro::{diameter_estimate, DiameterEstimate};
use crate::error::{Error, Result};
use crate::norms::{norm_l1_plus_linf, optimal_split, optimal_threshold, split_thresholds, Extended, SplitResult};
use crate::scalar::Complex64;
use crate::space::{CellFunction, ChainId, ChainValues, FactorSpace, ValueTail};

/// Absolute tolerance on margin comparisons.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub chains: Vec<DiameterEstimate>,
    pub margin: f64,
    pub in_g0: bool,
}

/// Per-chain diameter estimates at `n = 0` and their minimum. Chains are
/// evaluated in parallel and reported in chain order.
pub fn margin(v: &CellFunction<f64>, t_min: u32, t_max: u32) -> Result<MarginReport> {
    let chains = (0..v.chain_count())
        .into_par_iter()
        .map(|j| diameter_estimate(v, ChainId(j), t_min, t_max))
        .collect::<Result<Vec<_>>>()?;
    let margin = chains.iter().map(|d| d.value).fold(f64::INFINITY, f64::min);
    Ok(MarginReport { in_g0: margin > TOLERANCE, margin, chains })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpennessReport {
    pub epsilon: f64,
    pub w_norm: f64,
    pub tau: f64,
    pub w1_l1: f64,
    pub w2_linf: f64,
    /// `w₁` has zero tails, so its values vanish at infinity on every chain.
    pub w1_vanishes: bool,
    pub margin_after: f64,
    /// `d(w₂;j,0) ≤ 2ε/3` on every chain.
    pub w2_bounded: bool,
    /// `d(v₀+w) ≥ d(v₀) − d(w₁) − d(w₂)` on every chain.
    pub triangle_holds: bool,
    /// The margin bound needed a second pass with a longer checkpoint range.
    pub refined: bool,
    pub t_max: u32,
}

impl OpennessReport {
    pub fn passed(&self) -> bool {
        self.w1_vanishes
            && self.w2_bounded
            && self.triangle_holds
            && self.margin_after >= self.epsilon / 3.0 - TOLERANCE
    }
}

fn find_split(space: &FactorSpace<f64>, w: &CellFunction<f64>, limit: f64) -> Result<SplitResult> {
    let best = optimal_threshold(space, w)?;
    for tau in std::iter::once(best).chain(split_thresholds(w)) {
        let split = optimal_split(space, w, tau)?;
        if let Extended::Finite(a) = split.w1_l1 {
            if a < limit && split.w2_linf < limit {
                return Ok(split);
            }
        }
    }
    Err(Error::SplitNotFound(limit))
}

/// Replays the openness argument at `v0` for the perturbation `w`.
pub fn openness_probe(
    space: &FactorSpace<f64>,
    v0: &CellFunction<f64>,
    w: &CellFunction<f64>,
    t_min: u32,
    t_max: u32,
) -> Result<OpennessReport> {
    let epsilon = margin(v0, t_min, t_max)?.margin;
    if !(epsilon > TOLERANCE) {
        return Err(Error::Precondition(format!("v0 has margin {epsilon}, not in G0")));
    }
    let limit = epsilon / 3.0;
    let w_norm = norm_l1_plus_linf(space, w)?;
    if !(w_norm < limit) {
        return Err(Error::NormTooLarge { norm: w_norm, limit });
    }
    let split = find_split(space, w, limit)?;
    let sum = v0.combine(w, &Complex::new(1.0, 0.0), &Complex::new(1.0, 0.0))?;

    let mut t_used = t_max;
    let mut refined = false;
    let (before, after, d1, d2) = loop {
        let before = margin(v0, t_min, t_used)?;
        let after = margin(&sum, t_min, t_used)?;
        let d1 = margin(&split.w1, t_min, t_used)?;
        let d2 = margin(&split.w2, t_min, t_used)?;
        if after.margin >= limit - TOLERANCE || refined || t_used + 2 > 38 {
            break (before, after, d1, d2);
        }
        refined = true;
        t_used += 2;
    };
    let triangle_holds = (0..v0.chain_count()).all(|j| {
        after.chains[j].value >= before.chains[j].value - d1.chains[j].value - d2.chains[j].value - TOLERANCE
    });
    Ok(OpennessReport {
        epsilon,
        w_norm,
        tau: split.tau,
        w1_l1: split.w1_l1.as_f64(),
        w2_linf: split.w2_linf,
        w1_vanishes: split.w1.has_zero_tails(),
        margin_after: after.margin,
        w2_bounded: d2.chains.iter().all(|d| d.value <= 2.0 * limit + TOLERANCE),
        triangle_holds,
        refined,
        t_max: t_used,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityChain {
    pub chain: ChainId,
    pub selected: bool,
    pub before: f64,
    pub after: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub delta: f64,
    /// Chains with `d(v₁;j,0) < δ/9`.
    pub selected: Vec<ChainId>,
    /// `‖δ·𝟙_{J₁×ℕ}‖_{L¹+L∞}`.
    pub p_norm: f64,
    pub margin_after: f64,
    pub chains: Vec<DensityChain>,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        if self.selected.is_empty() {
            return true;
        }
        let norm_ok = (self.p_norm - self.delta).abs() <= 1e-15 * self.delta;
        norm_ok && self.margin_after >= self.delta / 9.0 - TOLERANCE && self.chains.iter().all(|c| c.passed)
    }
}

/// Replays the density argument: perturbs `v1` by `δ·𝟙` on the chains whose
/// diameter is below `δ/9` and checks that every chain ends up at `≥ δ/9`.
pub fn density_probe(
    space: &FactorSpace<f64>,
    v1: &CellFunction<f64>,
    delta: f64,
    t_min: u32,
    t_max: u32,
) -> Result<DensityReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Precondition(format!("delta must be positive, got {delta}")));
    }
    let before = margin(v1, t_min, t_max)?;
    let selected: Vec<ChainId> =
        before.chains.iter().filter(|d| d.value < delta / 9.0).map(|d| d.chain).collect();
    let indicator = space.indicator(&selected)?;
    let p = indicator.scale(&Complex::new(delta, 0.0));
    let p_norm = norm_l1_plus_linf(space, &p)?;
    let sum = v1.combine(&p, &Complex::new(1.0, 0.0), &Complex::new(1.0, 0.0))?;
    let after = margin(&sum, t_min, t_max)?;
    let unit = margin(&indicator, t_min, t_max)?;
    let chains = before
        .chains
        .iter()
        .zip(&after.chains)
        .zip(&unit.chains)
        .map(|((b, a), u)| {
            let is_selected = selected.contains(&b.chain);
            let passed = if is_selected {
                a.value >= delta * u.value - b.value - TOLERANCE && a.value >= delta / 9.0 - TOLERANCE
            } else {
                a.value == b.value && a.value >= delta / 9.0 - TOLERANCE
            };
            DensityChain { chain: b.chain, selected: is_selected, before: b.value, after: a.value, passed }
        })
        .collect();
    Ok(DensityReport { delta, selected, p_norm, margin_after: after.margin, chains })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemarkReport {
    pub samples: usize,
    /// Samples whose every chain has positive estimated diameter.
    pub included: usize,
    /// Indices of included samples whose margin is not positive.
    pub counterexamples: Vec<usize>,
}

impl RemarkReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn random_phase(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random functions on up to four chains; most chains get a constant tail of
/// modulus in `[1/2, 1)`, some a zero tail.
pub fn random_remark_sample(rng: &mut ChaCha8Rng) -> CellFunction<f64> {
    let chains = rng.gen_range(1..=4);
    let rows = (0..chains)
        .map(|_| {
            let len = rng.gen_range(0..6);
            let prefix = (0..len).map(|_| random_phase(rng, 0.0, 2.0)).collect();
            let tail =
                if rng.gen_bool(0.15) { ValueTail::Zero } else { ValueTail::Constant(random_phase(rng, 0.5, 1.0)) };
            ChainValues::new(prefix, tail)
        })
        .collect();
    CellFunction::new(rows).expect("finite values")
}

/// With finitely many chains, positive diameter on every chain forces a
/// positive margin. Samples with some chain of zero estimated diameter are
/// excluded.
pub fn finite_j_remark_probe(samples: usize, seed: u64, t_min: u32, t_max: u32) -> Result<RemarkReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn: Vec<CellFunction<f64>> = (0..samples).map(|_| random_remark_sample(&mut rng)).collect();
    let margins = drawn.par_iter().map(|v| margin(v, t_min, t_max)).collect::<Result<Vec<_>>>()?;
    let mut report = RemarkReport { samples, included: 0, counterexamples: Vec::new() };
    for (i, m) in margins.iter().enumerate() {
        if m.chains.iter().all(|d| d.value > TOLERANCE) {
            report.included += 1;
            if !(m.margin > 0.0) {
                report.counterexamples.push(i);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex::new(x, 0.0)
    }

    #[test]
    fn margin_examples() {
        let zero = margin(&CellFunction::zero(2), 4, 12).unwrap();
        assert_eq!(zero.margin, 0.0);
        assert!(!zero.in_g0);
        let one = margin(&CellFunction::constant(3, c(1.0)), 4, 12).unwrap();
        assert!(one.margin >= 2.0 / 9.0 && one.in_g0);
        assert!((one.margin - 1.0).abs() < 0.01);
        let half = margin(&CellFunction::indicator(2, &[ChainId(0)]).unwrap(), 4, 12).unwrap();
        assert_eq!(half.margin, 0.0);
    }

    #[test]
    fn density_examples() {
        let space = FactorSpace::uniform(2, 1.0).unwrap();
        for delta in [1.0, 0.3] {
            let r = density_probe(&space, &CellFunction::zero(2), delta, 4, 12).unwrap();
            assert_eq!(r.selected.len(), 2);
            assert!(r.passed(), "{r:?}");
            assert!((r.margin_after - delta).abs() < 0.01 * delta);
        }
        let r = density_probe(&space, &CellFunction::constant(2, c(1.0)), 1.0, 4, 12).unwrap();
        assert!(r.selected.is_empty() && r.passed());
    }

    #[test]
    fn openness_examples() {
        let space = FactorSpace::uniform(2, 1.0).unwrap();
        let one = CellFunction::constant(2, c(1.0));
        let r = openness_probe(&space, &one, &CellFunction::zero(2), 4, 12).unwrap();
        assert!(r.passed());
        assert!((r.margin_after - r.epsilon).abs() < 1e-15);

        let eps = margin(&one, 4, 12).unwrap().margin;
        let w = CellFunction::constant(2, c(eps / 4.0));
        let r = openness_probe(&space, &one, &w, 4, 12).unwrap();
        assert!(r.passed(), "{r:?}");

        let w = CellFunction::new(vec![
            ChainValues::new(vec![c(0.1), c(-0.1)], ValueTail::Zero),
            ChainValues::new(vec![], ValueTail::Zero),
        ])
        .unwrap();
        let r = openness_probe(&space, &one, &w, 4, 12).unwrap();
        assert!(r.passed(), "{r:?}");
        // the clamp at v*(1) realizes the norm
        assert!((r.w1_l1 + r.w2_linf - r.w_norm).abs() < 1e-15);

        let big = CellFunction::constant(2, c(0.5));
        assert!(matches!(openness_probe(&space, &one, &big, 4, 12), Err(Error::NormTooLarge { .. })));
        assert!(matches!(
            openness_probe(&space, &CellFunction::zero(2), &big, 4, 12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn remark_probe_excludes_zero_tail_samples() {
        let r = finite_j_remark_probe(100, 11, 4, 12).unwrap();
        assert!(r.passed());
        assert!(r.included < r.samples);
        assert!(r.included > 0);
    }

    #[test]
    fn diameter_scales_with_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let v = random_remark_sample(&mut rng);
            let k = random_phase(&mut rng, 0.1, 3.0);
            let a = margin(&v, 4, 12).unwrap();
            let b = margin(&v.scale(&k), 4, 12).unwrap();
            for (x, y) in a.chains.iter().zip(&b.chains) {
                assert!((y.value - k.norm() * x.value).abs() <= 1e-12 * (1.0 + x.value));
            }
        }
    }
}
