//! `L¹`, `L∞` and `L¹+L∞` norms on the atomic space.
//!
//! The `L¹+L∞` norm is `∫₀¹ v*`, read off the decreasing rearrangement, which
//! for step functions is a finite list of (level, width) pairs. The infimum
//! over decompositions `v = v₁ + v₂` is attained by clamping `|v|` at the level
//! `v*(1)`; [`optimal_split`] builds those clamp decompositions.

use std::fmt;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::base::{apply_t_base, Partition, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::operator::apply_s;
use crate::scalar::{Complex64, CompensatedSum};
use crate::space::{CellFunction, ChainValues, FactorSpace, ValueTail};

/// A nonnegative value that may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

fn check_chains(space: &FactorSpace<f64>, v: &CellFunction<f64>) -> Result<()> {
    if space.chain_count() != v.chain_count() {
        return Err(Error::MismatchedChains { left: space.chain_count(), right: v.chain_count() });
    }
    Ok(())
}

pub fn norm_l1(space: &FactorSpace<f64>, v: &CellFunction<f64>) -> Result<Extended> {
    check_chains(space, v)?;
    let mut acc = CompensatedSum::default();
    for (weights, values) in space.chains().iter().zip(v.chains()) {
        if let ValueTail::Constant(c) = values.tail {
            if c.norm() > 0.0 {
                // every chain has infinite total weight
                return Ok(Extended::Infinite);
            }
        }
        for (n, z) in values.prefix.iter().enumerate() {
            acc += weights.at(n as u64) * z.norm();
        }
    }
    Ok(Extended::Finite(acc.value()))
}

pub fn norm_linf(space: &FactorSpace<f64>, v: &CellFunction<f64>) -> Result<f64> {
    check_chains(space, v)?;
    Ok(v.chains().iter().map(ChainValues::sup_modulus).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub level: f64,
    pub width: Extended,
}

/// Decreasing rearrangement of `|v|` as a step profile.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RearrangementProfile {
    /// Strictly decreasing levels, all positive.
    pub steps: Vec<Step>,
}

impl RearrangementProfile {
    /// `∫₀^t v*` for `t ≥ 0`.
    pub fn integral_up_to(&self, t: f64) -> f64 {
        let mut remaining = t;
        let mut acc = CompensatedSum::default();
        for step in &self.steps {
            if remaining <= 0.0 {
                break;
            }
            let take = match step.width {
                Extended::Finite(w) => w.min(remaining),
                Extended::Infinite => remaining,
            };
            acc += step.level * take;
            remaining -= take;
        }
        acc.value()
    }
}

pub fn rearrange(space: &FactorSpace<f64>, v: &CellFunction<f64>) -> Result<RearrangementProfile> {
    check_chains(space, v)?;
    let mut raw: Vec<Step> = Vec::new();
    for (weights, values) in space.chains().iter().zip(v.chains()) {
        for (n, z) in values.prefix.iter().enumerate() {
            raw.push(Step { level: z.norm(), width: Extended::Finite(weights.at(n as u64)) });
        }
        if let ValueTail::Constant(c) = values.tail {
            raw.push(Step { level: c.norm(), width: Extended::Infinite });
        }
    }
    raw.retain(|s| s.level > 0.0);
    raw.sort_by(|a, b| b.level.total_cmp(&a.level));
    let mut steps: Vec<Step> = Vec::new();
    for s in raw {
        match steps.last_mut() {
            Some(last) if last.level == s.level => {
                last.width = match (last.width, s.width) {
                    (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
                    _ => Extended::Infinite,
                };
            }
            _ => steps.push(s),
        }
    }
    Ok(RearrangementProfile { steps })
}

/// `‖v‖_{L¹+L∞} = ∫₀¹ v*`.
pub fn norm_l1_plus_linf(space: &FactorSpace<f64>, v: &CellFunction<f64>) -> Result<f64> {
    Ok(rearrange(space, v)?.integral_up_to(1.0))
}

/// Level `v*(1)`: the clamp threshold that realizes the `L¹+L∞` norm.
pub fn optimal_threshold(space: &FactorSpace<f64>, v: &CellFunction<f64>) -> Result<f64> {
    let profile = rearrange(space, v)?;
    let mut covered = 0.0;
    for step in &profile.steps {
        match step.width {
            Extended::Infinite => return Ok(step.level),
            Extended::Finite(w) => {
                covered += w;
                if covered >= 1.0 {
                    return Ok(step.level);
                }
            }
        }
    }
    Ok(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub tau: f64,
    /// Excess of `w` over modulus `tau`.
    pub w1: CellFunction<f64>,
    /// `w` clamped to modulus `tau`, phase kept.
    pub w2: CellFunction<f64>,
    pub w1_l1: Extended,
    pub w2_linf: f64,
    pub cost: Extended,
}

fn clamp(z: Complex64, tau: f64) -> (Complex64, Complex64) {
    let r = z.norm();
    if r <= tau {
        (Complex::new(0.0, 0.0), z)
    } else {
        let kept = z * (tau / r);
        (z - kept, kept)
    }
}

pub fn optimal_split(space: &FactorSpace<f64>, w: &CellFunction<f64>, tau: f64) -> Result<SplitResult> {
    check_chains(space, w)?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("split threshold must be >= 0, got {tau}")));
    }
    let mut excess = Vec::new();
    let mut clamped = Vec::new();
    for chain in w.chains() {
        let (p1, p2): (Vec<_>, Vec<_>) = chain.prefix.iter().map(|&z| clamp(z, tau)).unzip();
        let (t1, t2) = match chain.tail {
            ValueTail::Zero => (ValueTail::Zero, ValueTail::Zero),
            ValueTail::Constant(c) => {
                let (a, b) = clamp(c, tau);
                let wrap = |z: Complex64| {
                    if z.norm() == 0.0 {
                        ValueTail::Zero
                    } else {
                        ValueTail::Constant(z)
                    }
                };
                (wrap(a), wrap(b))
            }
        };
        excess.push(ChainValues::new(p1, t1));
        clamped.push(ChainValues::new(p2, t2));
    }
    let w1 = CellFunction::new(excess)?;
    let w2 = CellFunction::new(clamped)?;
    let w1_l1 = norm_l1(space, &w1)?;
    let w2_linf = norm_linf(space, &w2)?;
    let cost = match w1_l1 {
        Extended::Finite(a) => Extended::Finite(a + w2_linf),
        Extended::Infinite => Extended::Infinite,
    };
    Ok(SplitResult { tau, w1, w2, w1_l1, w2_linf, cost })
}

/// `0` together with every distinct modulus of `w`, ascending.
pub fn split_thresholds(w: &CellFunction<f64>) -> Vec<f64> {
    let mut taus: Vec<f64> = std::iter::once(0.0)
        .chain(w.chains().iter().flat_map(|c| {
            c.prefix.iter().map(|z| z.norm()).chain(std::iter::once(c.tail.value().norm()))
        }))
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus
}

#[derive(Debug, Clone, Copy)]
pub enum ContractionTarget<'a> {
    /// `S` on the factor space.
    Shift(&'a FactorSpace<f64>),
    /// `T` on the base space of a partition.
    Base(&'a Partition),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub samples: usize,
    pub worst_l1_ratio: f64,
    pub worst_linf_ratio: f64,
    pub failures: usize,
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

const CONTRACTION_SLACK: f64 = 1e-12;

fn ratio(after: f64, before: f64) -> f64 {
    if before == 0.0 {
        if after == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        after / before
    }
}

fn random_value(rng: &mut ChaCha8Rng) -> Complex64 {
    if rng.gen_bool(0.2) {
        Complex::new(0.0, 0.0)
    } else {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }
}

/// Random function with finitely many nonzero cells, at most `max_len` per chain.
pub fn random_finite_support(chain_count: usize, max_len: usize, rng: &mut ChaCha8Rng) -> CellFunction<f64> {
    let chains = (0..chain_count)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            ChainValues::new((0..len).map(|_| random_value(rng)).collect(), ValueTail::Zero)
        })
        .collect();
    CellFunction::new(chains).expect("finite values")
}

/// Samples finitely supported functions and checks `‖op v‖₁ ≤ ‖v‖₁` and
/// `‖op v‖∞ ≤ ‖v‖∞`, with relative slack `1e-12`.
pub fn check_contraction(target: ContractionTarget<'_>, sample_count: usize, seed: u64) -> Result<ContractionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        ContractionReport { samples: sample_count, worst_l1_ratio: 0.0, worst_linf_ratio: 0.0, failures: 0 };
    for _ in 0..sample_count {
        let (l1_before, l1_after, inf_before, inf_after) = match target {
            ContractionTarget::Shift(space) => {
                let v = random_finite_support(space.chain_count(), 12, &mut rng);
                let sv = apply_s(&v).function;
                (
                    norm_l1(space, &v)?.as_f64(),
                    norm_l1(space, &sv)?.as_f64(),
                    norm_linf(space, &v)?,
                    norm_linf(space, &sv)?,
                )
            }
            ContractionTarget::Base(partition) => {
                let g = PiecewiseFunction::random_finite_support(partition.space(), 6, &mut rng);
                let tg = apply_t_base(partition, &g, 1)?;
                let space = partition.space();
                (
                    g.l1_norm(space)?.as_f64(),
                    tg.l1_norm(space)?.as_f64(),
                    g.linf_norm(space)?,
                    tg.linf_norm(space)?,
                )
            }
        };
        let r1 = ratio(l1_after, l1_before);
        let rinf = ratio(inf_after, inf_before);
        report.worst_l1_ratio = report.worst_l1_ratio.max(r1);
        report.worst_linf_ratio = report.worst_linf_ratio.max(rinf);
        if r1 > 1.0 + CONTRACTION_SLACK || rinf > 1.0 + CONTRACTION_SLACK {
            report.failures += 1;
        }
    }
    Ok(report)
}
