//! The weighted shift `S = K·M_ψ` on cell functions.
//!
//! `ψ(j, n) = −1` exactly when `n` is a power of three (`1` included), so the
//! cumulative sign of `m` steps from cell `n` is `(−1)^{#powers of 3 in (n, n+m]}`.
//! All power-of-three arithmetic is done on integers; a float logarithm is off
//! by one right at `3^t`, which is exactly where the sign flips.

use std::ops::Mul;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{CellFunction, CellIndex, ChainValues, ValueTail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(count: u32) -> Self {
        if count.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn apply<T: Scalar>(self, z: Complex<T>) -> Complex<T> {
        match self {
            Sign::Plus => z,
            Sign::Minus => -z,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

fn floor_log3_wide(x: u128) -> u32 {
    debug_assert!(x >= 1);
    let mut t = 0;
    let mut power: u128 = 3;
    while power <= x {
        t += 1;
        match power.checked_mul(3) {
            Some(p) => power = p,
            None => break,
        }
    }
    t
}

/// Largest `t` with `3^t ≤ x`.
pub fn floor_log3(x: u64) -> Result<u32> {
    if x == 0 {
        return Err(Error::ZeroArgument);
    }
    Ok(floor_log3_wide(x as u128))
}

/// `3^t`, or `None` if it does not fit in a `u64`.
pub fn pow3(t: u32) -> Option<u64> {
    3u64.checked_pow(t)
}

pub fn is_power_of_3(m: u64) -> Result<bool> {
    let t = floor_log3(m)?;
    Ok(pow3(t) == Some(m))
}

/// Number of powers of three in `[1, x]`.
fn powers_up_to(x: u128) -> u32 {
    if x == 0 {
        0
    } else {
        floor_log3_wide(x) + 1
    }
}

/// Number of powers of three in `[1, x]`.
pub fn count_powers_of_3(x: u64) -> u32 {
    powers_up_to(x as u128)
}

/// Number of powers of three in `(n, n+m]`.
pub fn sign_flip_count(n: u64, m: u64) -> u32 {
    powers_up_to(n as u128 + m as u128) - powers_up_to(n as u128)
}

/// Cumulative sign of `m` steps of `S` started at cell `n`.
pub fn sigma(n: u64, m: u64) -> Sign {
    Sign::from_parity(sign_flip_count(n, m))
}

/// The multiplier `ψ(·, n)`; independent of the chain.
pub fn psi(n: u64) -> Sign {
    if n != 0 && is_power_of_3(n).unwrap_or(false) {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

/// `ψ` written out as a cell function. Exact for every `n` below the returned
/// horizon; the constant `+1` tail is wrong from the horizon on.
pub fn psi_function<T: Scalar>(chain_count: usize, min_horizon: u64) -> (CellFunction<T>, u64) {
    let mut q = 1u64;
    while q < min_horizon {
        q *= 3;
    }
    let prefix: Vec<Complex<T>> =
        (0..=q).map(|n| psi(n).apply(Complex::new(T::one(), T::zero()))).collect();
    let chain = ChainValues::new(prefix, ValueTail::Constant(Complex::new(T::one(), T::zero())));
    let f = CellFunction::new(vec![chain; chain_count]).expect("finite values");
    (f, 3 * q)
}

/// Result of one application of `S`, exact on cells `n < exact_below`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shifted<T: Scalar> {
    pub function: CellFunction<T>,
    /// `None` when the representation is exact at every cell.
    pub exact_below: Option<u64>,
}

impl<T: Scalar> Shifted<T> {
    pub fn is_exact_at(&self, n: u64) -> bool {
        self.exact_below.is_none_or(|h| n < h)
    }
}

/// `(Sv)(j,n) = ψ(n+1)·v(j,n+1)`.
///
/// Zero tails shift exactly. A constant tail picks up a sign flip at every
/// power of three, which no prefix-plus-constant form can hold, so the result
/// is exact only below a horizon.
pub fn apply_s<T: Scalar>(v: &CellFunction<T>) -> Shifted<T> {
    apply_s_to(v, 0)
}

/// Like [`apply_s`], with the explicit prefix long enough that the result is
/// exact at least on `n < horizon`.
pub fn apply_s_to<T: Scalar>(v: &CellFunction<T>, horizon: u64) -> Shifted<T> {
    let has_constant_tail = v.chains().iter().any(|c| c.tail != ValueTail::Zero);
    // q: power of three past every prefix; on [q, 3q−1) the shifted constant
    // tail carries sign +1.
    let mut q = 1u64;
    while q < v.prefix_len() as u64 || 3 * q - 1 < horizon {
        q *= 3;
    }
    let chains = v
        .chains()
        .iter()
        .map(|c| {
            let len = match c.tail {
                ValueTail::Zero => c.prefix.len().saturating_sub(1) as u64,
                ValueTail::Constant(_) => q,
            };
            let prefix = (0..len).map(|n| psi(n + 1).apply(c.at(n + 1))).collect();
            ChainValues::new(prefix, c.tail.clone())
        })
        .collect();
    Shifted {
        function: CellFunction::new(chains).expect("finite values"),
        exact_below: has_constant_tail.then_some(3 * q - 1),
    }
}

/// `k`-fold application of [`apply_s`], exact at least on `n < horizon`.
pub fn apply_s_times<T: Scalar>(v: &CellFunction<T>, k: u64, horizon: u64) -> Shifted<T> {
    let mut current = Shifted { function: v.clone(), exact_below: None };
    for step in 1..=k {
        let next = apply_s_to(&current.function, horizon + (k - step));
        let inherited = current.exact_below.map(|h| h.saturating_sub(1));
        let exact_below = match (inherited, next.exact_below) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        current = Shifted { function: next.function, exact_below };
    }
    current
}

/// `(S^k v)(j,n) = σ(n,k)·v(j,n+k)` in `O(log(n+k))`.
pub fn iterate_value<T: Scalar>(v: &CellFunction<T>, idx: CellIndex, k: u64) -> Result<Complex<T>> {
    let target = idx.n.checked_add(k).ok_or_else(|| {
        Error::IndexOverflow(format!("n + k = {} + {} exceeds u64", idx.n, k))
    })?;
    let chain = v.chain(idx.chain)?;
    Ok(sigma(idx.n, k).apply(chain.at(target)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ChainId;

    fn powers_by_multiplication(limit: u128) -> Vec<u128> {
        let mut out = vec![];
        let mut p = 1u128;
        while p <= limit {
            out.push(p);
            p *= 3;
        }
        out
    }

    fn enumerated_flips(n: u64, m: u64) -> u32 {
        let powers = powers_by_multiplication(n as u128 + m as u128);
        powers.iter().filter(|&&p| p > n as u128 && p <= n as u128 + m as u128).count() as u32
    }

    #[test]
    fn floor_log3_examples() {
        assert_eq!(floor_log3(1).unwrap(), 0);
        // 26 -> 8 -> 2 under integer division by 3: two steps stay positive
        assert_eq!(floor_log3(26).unwrap(), 2);
        assert_eq!(floor_log3(27).unwrap(), 3);
        let p30 = (0..30).fold(1u64, |acc, _| acc * 3);
        assert_eq!(floor_log3(p30).unwrap(), 30);
        assert_eq!(floor_log3(p30 - 1).unwrap(), 29);
        assert_eq!(floor_log3(u64::MAX).unwrap(), 40);
        assert_eq!(floor_log3(0), Err(Error::ZeroArgument));
    }

    #[test]
    fn power_of_three_examples() {
        assert!(is_power_of_3(1).unwrap());
        assert!(is_power_of_3(9).unwrap());
        assert!(!is_power_of_3(10).unwrap());
        let p25 = (0..25).fold(1u64, |acc, _| acc * 3);
        assert!(is_power_of_3(p25).unwrap());
        assert!(!is_power_of_3(p25 + 1).unwrap());
        assert!(is_power_of_3(0).is_err());
    }

    #[test]
    fn flip_count_examples() {
        assert_eq!(sign_flip_count(1, 2), 1);
        assert_eq!(sign_flip_count(17, 0), 0);
        assert_eq!(sign_flip_count(2, 7), 2);
        assert_eq!(sign_flip_count(0, 1), 1);
        assert_eq!(sign_flip_count(u64::MAX, u64::MAX), enumerated_flips(u64::MAX, u64::MAX));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(1, 1), Sign::Plus);
        assert_eq!(sigma(0, 1), Sign::Minus);
        assert_eq!(sigma(1, 2), Sign::Minus);
        assert_eq!(sigma(0, 8), Sign::Plus);
    }

    #[test]
    fn closed_form_matches_floor_log_difference() {
        for n in 1..300u64 {
            for m in 0..300u64 {
                let closed = floor_log3(n + m).unwrap() - floor_log3(n).unwrap();
                assert_eq!(sign_flip_count(n, m), closed);
            }
        }
        for m in 1..500u64 {
            assert_eq!(sign_flip_count(0, m), floor_log3(m).unwrap() + 1);
        }
    }

    #[test]
    fn enumeration_agreement_small() {
        for n in 0..200 {
            for m in 0..200 {
                assert_eq!(sign_flip_count(n, m), enumerated_flips(n, m), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn cocycle_identity() {
        for n in 0..60u64 {
            for m in 0..60u64 {
                for k in 0..60u64 {
                    assert_eq!(sigma(n, m + k), sigma(n, m) * sigma(n + m, k));
                }
            }
        }
    }

    fn one() -> Complex<f64> {
        Complex::new(1.0, 0.0)
    }

    #[test]
    fn shift_of_constant() {
        let v = CellFunction::constant(1, one());
        let s = apply_s_to(&v, 4);
        let at = |n| s.function.value(CellIndex::new(0, n)).unwrap();
        assert_eq!(at(0), -one());
        assert_eq!(at(1), one());
        assert_eq!(at(2), -one());
        assert_eq!(at(3), one());
        let h = s.exact_below.unwrap();
        for n in 0..h {
            assert_eq!(at(n), iterate_value(&v, CellIndex::new(0, n), 1).unwrap(), "n={n}");
        }
    }

    #[test]
    fn shift_of_zero_and_finite_support() {
        let zero = CellFunction::<f64>::zero(2);
        let s = apply_s(&zero);
        assert_eq!(s.exact_below, None);
        assert!(s.function.same_values(&zero));

        let v = CellFunction::new(vec![ChainValues::new(
            vec![Complex::new(5.0, 0.0), Complex::new(7.0, 0.0)],
            ValueTail::Zero,
        )])
        .unwrap();
        let s = apply_s(&v);
        assert_eq!(s.exact_below, None);
        assert_eq!(s.function.value(CellIndex::new(0, 0)).unwrap(), Complex::new(-7.0, 0.0));
        for n in 1..20 {
            assert_eq!(s.function.value(CellIndex::new(0, n)).unwrap(), Complex::new(0.0, 0.0));
        }
    }

    #[test]
    fn iterate_examples() {
        let v = CellFunction::constant(1, one());
        assert_eq!(iterate_value(&v, CellIndex::new(0, 1), 2).unwrap(), -one());
        assert_eq!(iterate_value(&v, CellIndex::new(0, 0), 8).unwrap(), one());
        assert!(matches!(
            iterate_value(&v, CellIndex::new(0, u64::MAX), 1),
            Err(Error::IndexOverflow(_))
        ));
        assert!(iterate_value(&v, CellIndex { chain: ChainId(1), n: 0 }, 1).is_err());
    }

    #[test]
    fn repeated_shift_matches_closed_form() {
        let v = CellFunction::new(vec![
            ChainValues::new(
                (0..12).map(|k| Complex::new(k as f64 - 3.5, (k * k) as f64 * 0.1)).collect(),
                ValueTail::Constant(Complex::new(0.75, -0.25)),
            ),
            ChainValues::new(vec![Complex::new(2.0, 1.0); 5], ValueTail::Zero),
        ])
        .unwrap();
        for k in 1..=20u64 {
            let s = apply_s_times(&v, k, 40);
            assert!(s.exact_below.unwrap() >= 40);
            for j in 0..2 {
                for n in 0..40 {
                    let idx = CellIndex::new(j, n);
                    assert_eq!(
                        s.function.value(idx).unwrap(),
                        iterate_value(&v, idx, k).unwrap(),
                        "k={k} j={j} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn psi_function_has_unit_sup() {
        let (f, horizon) = psi_function::<f64>(2, 30);
        assert!(horizon >= 30);
        for n in 0..horizon {
            assert_eq!(f.value(CellIndex::new(1, n)).unwrap().re, psi(n).as_i8() as f64);
        }
        assert_eq!(f.chains()[0].sup_modulus(), 1.0);
    }
}
