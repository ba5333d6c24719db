//! Cesàro averages `A_N(v;j,n) = (1/N) Σ_{k=1..N} (S^k v)(j,n)`.
//!
//! Two evaluators exist. [`cesaro_naive`] adds the `N` iterates one by one and
//! serves as the oracle. [`cesaro_block`] groups the target cells `m = n+k`
//! by `⌊log₃ m⌋`, inside which the cumulative sign is constant, so a sum over
//! `3^20` iterates costs a few dozen block reductions.

use std::io::{self, Write};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::operator::{count_powers_of_3, floor_log3, iterate_value, pow3, Sign};
use crate::scalar::{modulus, re_over, to_f64_complex, Complex64, ComplexSum, Scalar};
use crate::space::{CellFunction, CellIndex, ChainId, ChainValues, ValueTail};

pub const DEFAULT_T_MIN: u32 = 4;
pub const DEFAULT_T_MAX: u32 = 20;

fn check_count(idx: CellIndex, count: u64) -> Result<()> {
    if count == 0 {
        return Err(Error::Precondition("Cesàro average needs N >= 1".into()));
    }
    idx.n
        .checked_add(count)
        .map(|_| ())
        .ok_or_else(|| Error::IndexOverflow(format!("n + N = {} + {count} exceeds u64", idx.n)))
}

/// `Σ_{k=1..N} (S^k v)(j,n)`, one iterate at a time in ascending `k`.
pub fn naive_sum<T: Scalar>(v: &CellFunction<T>, idx: CellIndex, count: u64) -> Result<Complex<T>> {
    check_count(idx, count)?;
    let mut acc = ComplexSum::<T>::default();
    for k in 1..=count {
        acc.push(&iterate_value(v, idx, k)?);
    }
    Ok(acc.total())
}

pub fn cesaro_naive<T: Scalar>(v: &CellFunction<T>, idx: CellIndex, count: u64) -> Result<Complex<T>> {
    Ok(naive_sum(v, idx, count)? / T::from_u64(count))
}

/// Naive averages at several `N` from a single ascending pass. Bitwise equal
/// to calling [`cesaro_naive`] for each entry.
pub fn cesaro_naive_series<T: Scalar>(
    v: &CellFunction<T>,
    idx: CellIndex,
    counts: &[u64],
) -> Result<Vec<Complex<T>>> {
    let Some(&max) = counts.iter().max() else {
        return Ok(Vec::new());
    };
    check_count(idx, max)?;
    if counts.contains(&0) {
        return Err(Error::Precondition("Cesàro average needs N >= 1".into()));
    }
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&i| counts[i]);
    let mut out = vec![Complex::zero(); counts.len()];
    let mut acc = ComplexSum::<T>::default();
    let mut k = 0u64;
    for i in order {
        while k < counts[i] {
            k += 1;
            acc.push(&iterate_value(v, idx, k)?);
        }
        out[i] = acc.total() / T::from_u64(counts[i]);
    }
    Ok(out)
}

/// Sum of `v` over cells `lo..=hi` of one chain: the explicit prefix part
/// term by term, the tail part as count × constant.
fn range_sum<T: Scalar>(chain: &ChainValues<T>, lo: u64, hi: u64) -> Complex<T> {
    let mut acc = ComplexSum::<T>::default();
    let len = chain.prefix.len() as u64;
    if lo < len {
        for m in lo..=hi.min(len - 1) {
            acc.push(&chain.prefix[m as usize]);
        }
    }
    let tail_lo = lo.max(len);
    if let ValueTail::Constant(c) = &chain.tail {
        if hi >= tail_lo {
            let count = T::from_u64(hi - tail_lo + 1);
            acc.push(&Complex::new(c.re.clone() * count.clone(), c.im.clone() * count));
        }
    }
    acc.total()
}

/// `Σ_{k=1..N} (S^k v)(j,n)` by sign-constant blocks, in ascending block order.
pub fn block_sum<T: Scalar>(v: &CellFunction<T>, idx: CellIndex, count: u64) -> Result<Complex<T>> {
    check_count(idx, count)?;
    let chain = v.chain(idx.chain)?;
    let last = idx.n + count;
    let flips_before = count_powers_of_3(idx.n);
    let mut total = ComplexSum::<T>::default();
    let mut lo = idx.n + 1;
    let mut t = floor_log3(lo)?;
    loop {
        let hi = pow3(t + 1).map_or(u64::MAX, |p| p - 1).min(last);
        // every m in [3^t, 3^{t+1}) has t+1 powers of three at or below it
        let sign = Sign::from_parity(t + 1 - flips_before);
        total.push(&sign.apply(range_sum(chain, lo, hi)));
        if hi == last {
            break;
        }
        lo = hi + 1;
        t += 1;
    }
    Ok(total.total())
}

pub fn cesaro_block<T: Scalar>(v: &CellFunction<T>, idx: CellIndex, count: u64) -> Result<Complex<T>> {
    Ok(block_sum(v, idx, count)? / T::from_u64(count))
}

/// Which of the two checkpoint families an exponent belongs to, relative to
/// `b = ⌊log₃ max(n,1)⌋`: `t − b` even or odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Checkpoint {
    pub t: u32,
    /// `N = 3^t − n − 1`.
    pub count: u64,
    pub family: Family,
}

/// All checkpoints `N = 3^t − n − 1` for `t_min ≤ t ≤ t_max`.
pub fn checkpoint_set(n: u64, t_min: u32, t_max: u32) -> Result<Vec<Checkpoint>> {
    if t_min > t_max {
        return Err(Error::EmptyCheckpointRange { t_min, t_max });
    }
    let b = floor_log3(n.max(1))?;
    (t_min..=t_max)
        .map(|t| {
            let p = pow3(t).ok_or_else(|| Error::IndexOverflow(format!("3^{t} exceeds u64")))?;
            if p < n.saturating_add(2) {
                return Err(Error::CheckpointTooSmall { t, n });
            }
            let family = if (t as i64 - b as i64) % 2 == 0 { Family::Even } else { Family::Odd };
            Ok(Checkpoint { t, count: p - n - 1, family })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CesaroEntry<T: Scalar> {
    pub count: u64,
    pub average: Complex<T>,
    pub re_over_z0: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CesaroReport<T: Scalar> {
    pub start: CellIndex,
    pub entries: Vec<CesaroEntry<T>>,
}

impl<T: Scalar> CesaroReport<T> {
    pub fn max_re_over_z0(&self) -> Option<&T> {
        self.entries.iter().map(|e| &e.re_over_z0).max_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn min_re_over_z0(&self) -> Option<&T> {
        self.entries.iter().map(|e| &e.re_over_z0).min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

/// Block-evaluated averages at the given checkpoints.
pub fn cesaro_report<T: Scalar>(
    v: &CellFunction<T>,
    start: CellIndex,
    checkpoints: &[Checkpoint],
    z0: &Complex<T>,
) -> Result<CesaroReport<T>> {
    if z0.is_zero() {
        return Err(Error::ZeroZ0);
    }
    let entries = checkpoints
        .iter()
        .map(|cp| {
            let average = cesaro_block(v, start, cp.count)?;
            let re_over_z0 = re_over(&average, z0);
            Ok(CesaroEntry { count: cp.count, average, re_over_z0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CesaroReport { start, entries })
}

pub const CSV_HEADER: &str = "chain,n,N,re,im,re_over_z0";

pub fn write_csv<T: Scalar, W: Write>(out: &mut W, reports: &[CesaroReport<T>]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        for e in &r.entries {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.start.chain,
                r.start.n,
                e.count,
                e.average.re.to_csv(),
                e.average.im.to_csv(),
                e.re_over_z0.to_csv()
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck<T: Scalar> {
    pub ell: u32,
    pub family: Family,
    pub count: u64,
    pub re_over_z0: T,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport<T: Scalar> {
    pub start: CellIndex,
    pub b: u32,
    /// Cells `m ≥ 1` (or `None` for the tail) where `Re(v/z0) ∉ [1/2, 1]`.
    pub precondition_violations: Vec<Option<u64>>,
    pub checks: Vec<BoundCheck<T>>,
}

impl<T: Scalar> BoundsReport<T> {
    pub fn precondition_holds(&self) -> bool {
        self.precondition_violations.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.precondition_holds() && self.checks.iter().all(|c| c.passed)
    }
}

/// Cells `m ≥ 1` of a chain where `Re(v/z0)` leaves `[1/2, 1]`.
pub fn halfstrip_violations<T: Scalar>(chain: &ChainValues<T>, z0: &Complex<T>) -> Vec<Option<u64>> {
    let inside = |z: &Complex<T>| {
        let r = re_over(z, z0);
        r >= T::half() && r <= T::one()
    };
    let mut out: Vec<Option<u64>> = chain
        .prefix
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, z)| !inside(z))
        .map(|(m, _)| Some(m as u64))
        .collect();
    if !inside(&chain.tail.value()) {
        out.push(None);
    }
    out
}

/// Checks `Re(A_N/z0) ≤ −1/9` at `N = 3^{b+2ℓ} − n − 1` and `≥ 1/9` at
/// `N = 3^{b+2ℓ+1} − n − 1` for `ℓ = 1..=l_max`, with `b = ⌊log₃ n⌋`.
pub fn verify_nonconvergence_bounds<T: Scalar>(
    v: &CellFunction<T>,
    z0: &Complex<T>,
    chain: ChainId,
    n: u64,
    l_max: u32,
) -> Result<BoundsReport<T>> {
    if z0.is_zero() {
        return Err(Error::ZeroZ0);
    }
    if n == 0 {
        return Err(Error::Precondition("bounds are stated for start cells n >= 1".into()));
    }
    let start = CellIndex { chain, n };
    let precondition_violations = halfstrip_violations(v.chain(chain)?, z0);
    let b = floor_log3(n)?;
    let ninth = T::one() / T::from_u64(9);
    let slack = T::bound_slack();
    let mut checks = Vec::with_capacity(2 * l_max as usize);
    for ell in 1..=l_max {
        for (t, family) in [(b + 2 * ell, Family::Even), (b + 2 * ell + 1, Family::Odd)] {
            let p = pow3(t).ok_or_else(|| Error::IndexOverflow(format!("3^{t} exceeds u64")))?;
            let count = p - n - 1;
            let value = re_over(&cesaro_block(v, start, count)?, z0);
            let passed = match family {
                Family::Even => value <= -ninth.clone() + slack.clone(),
                Family::Odd => value >= ninth.clone() - slack.clone(),
            };
            checks.push(BoundCheck { ell, family, count, re_over_z0: value, passed });
        }
    }
    Ok(BoundsReport { start, b, precondition_violations, checks })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiameterEstimate {
    pub chain: ChainId,
    /// Max pairwise distance among checkpoint averages at `n = 0`; a lower
    /// bound for the diameter of the accumulation set.
    pub value: f64,
    pub t_min: u32,
    pub t_max: u32,
    pub averages: Vec<Complex64>,
}

pub fn diameter_of(points: &[Complex64]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

pub fn diameter_estimate<T: Scalar>(
    v: &CellFunction<T>,
    chain: ChainId,
    t_min: u32,
    t_max: u32,
) -> Result<DiameterEstimate> {
    let start = CellIndex { chain, n: 0 };
    let averages = checkpoint_set(0, t_min, t_max)?
        .iter()
        .map(|cp| cesaro_block(v, start, cp.count).map(|a| to_f64_complex(&a)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiameterEstimate { chain, value: diameter_of(&averages), t_min, t_max, averages })
}

/// `|A_N| ≤ sup_m |v(j,m)|` at every listed `N` (naive summation).
pub fn boundedness_check<T: Scalar>(v: &CellFunction<T>, idx: CellIndex, counts: &[u64]) -> Result<bool> {
    let sup = v.chain(idx.chain)?.sup_modulus();
    // computed moduli may exceed the true value by a few ulps
    let bound = sup * (1.0 + 1e-14);
    Ok(cesaro_naive_series(v, idx, counts)?.iter().all(|a| modulus(a) <= bound))
}
