//! Real scalar types the cell machinery is generic over.
//!
//! Two implementations exist: `f64`, summed with Neumaier-compensated
//! accumulators, and [`Rational`] (arbitrary precision), summed exactly. Both
//! feed the same Cesàro code paths so that exact and floating results can be
//! diffed against each other.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Neg};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Complex64 = Complex<f64>;

/// Running sum of a sequence of scalars in a fixed order.
pub trait Accumulator<T>: Default + Clone {
    fn push(&mut self, x: &T);
    fn total(&self) -> T;
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub fn value(&self) -> f64 {
        self.sum + self.err
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        let t = self.sum + rhs;
        if self.sum.abs() >= rhs.abs() {
            self.err += (self.sum - t) + rhs;
        } else {
            self.err += (rhs - t) + self.sum;
        }
        self.sum = t;
    }
}

impl Add<f64> for CompensatedSum {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self += rhs;
        self
    }
}

impl Accumulator<f64> for CompensatedSum {
    fn push(&mut self, x: &f64) {
        *self += *x;
    }
    fn total(&self) -> f64 {
        self.value()
    }
}

#[derive(Debug, Clone)]
pub struct ExactSum(Rational);

impl Default for ExactSum {
    fn default() -> Self {
        ExactSum(Rational::zero())
    }
}

impl Accumulator<Rational> for ExactSum {
    fn push(&mut self, x: &Rational) {
        self.0 += x;
    }
    fn total(&self) -> Rational {
        self.0.clone()
    }
}

/// Componentwise accumulator for complex values.
#[derive(Debug, Clone)]
pub struct ComplexSum<T: Scalar> {
    re: T::Acc,
    im: T::Acc,
}

impl<T: Scalar> Default for ComplexSum<T> {
    fn default() -> Self {
        ComplexSum { re: T::Acc::default(), im: T::Acc::default() }
    }
}

impl<T: Scalar> ComplexSum<T> {
    pub fn push(&mut self, z: &Complex<T>) {
        self.re.push(&z.re);
        self.im.push(&z.im);
    }

    pub fn total(&self) -> Complex<T> {
        Complex::new(self.re.total(), self.im.total())
    }
}

pub trait Scalar:
    Num + Neg<Output = Self> + Clone + PartialOrd + Debug + Send + Sync + 'static
{
    type Acc: Accumulator<Self> + Send;

    /// Slack allowed when comparing a computed value against a bound.
    fn bound_slack() -> Self;
    fn from_u64(n: u64) -> Self;
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn is_finite_value(&self) -> bool;
    fn parse_real(s: &str) -> Result<Self>;
    /// Shortest form that parses back to the same value.
    fn to_text(&self) -> String;
    /// CSV form: 17 significant digits for floats, `p/q` for rationals.
    fn to_csv(&self) -> String;

    fn pow_u64(&self, n: u64) -> Self;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Scalar for f64 {
    type Acc = CompensatedSum;

    fn bound_slack() -> Self {
        1e-12
    }
    fn from_u64(n: u64) -> Self {
        n as f64
    }
    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn parse_real(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: f64 = parse_f64(p)?;
            let q: f64 = parse_f64(q)?;
            if q == 0.0 {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(p / q);
        }
        parse_f64(s)
    }
    fn to_text(&self) -> String {
        format!("{self}")
    }
    fn to_csv(&self) -> String {
        format_sig17(*self)
    }
    fn pow_u64(&self, n: u64) -> Self {
        match i32::try_from(n) {
            Ok(k) => self.powi(k),
            Err(_) => self.powf(n as f64),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let x: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("non-finite number: {s:?}")));
    }
    Ok(x)
}

impl Scalar for Rational {
    type Acc = ExactSum;

    fn bound_slack() -> Self {
        Rational::zero()
    }
    fn from_u64(n: u64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_finite_value(&self) -> bool {
        true
    }
    fn parse_real(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn to_text(&self) -> String {
        format!("{self}")
    }
    fn to_csv(&self) -> String {
        format!("{self}")
    }
    fn pow_u64(&self, n: u64) -> Self {
        num_traits::pow(self.clone(), n as usize)
    }
}

/// Parses `p/q`, integers and decimals (with optional exponent) exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(joined.as_bytes(), 10).ok_or_else(bad)?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Positional notation with 17 significant digits where the magnitude allows
/// it, scientific otherwise.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp10 = x.abs().log10().floor() as i32;
    if (-6..=16).contains(&exp10) {
        let decimals = (16 - exp10).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`; parts may be rationals `p/q`.
pub fn parse_complex<T: Scalar>(s: &str) -> Result<Complex<T>> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::new(T::parse_real(&s)?, T::zero()));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |part: &str| -> Result<T> {
        match part {
            "" | "+" => Ok(T::one()),
            "-" => Ok(-T::one()),
            p => T::parse_real(p),
        }
    };
    match split {
        Some(k) => Ok(Complex::new(T::parse_real(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex::new(T::zero(), imag(body)?)),
    }
}

pub fn format_complex<T: Scalar>(z: &Complex<T>) -> String {
    let zero = T::zero();
    if z.im == zero {
        return z.re.to_text();
    }
    let im = if z.im == T::one() {
        String::new()
    } else if z.im == -T::one() {
        "-".to_string()
    } else {
        z.im.to_text()
    };
    if z.re == zero {
        return format!("{im}i");
    }
    if z.im < zero {
        format!("{}{im}i", z.re.to_text())
    } else {
        format!("{}+{im}i", z.re.to_text())
    }
}

pub fn modulus<T: Scalar>(z: &Complex<T>) -> f64 {
    z.re.to_f64().hypot(z.im.to_f64())
}

pub fn to_f64_complex<T: Scalar>(z: &Complex<T>) -> Complex64 {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// `Re(a / z)` computed without leaving the scalar type.
pub fn re_over<T: Scalar>(a: &Complex<T>, z: &Complex<T>) -> T {
    let norm_sqr = z.re.clone() * z.re.clone() + z.im.clone() * z.im.clone();
    (a.re.clone() * z.re.clone() + a.im.clone() * z.im.clone()) / norm_sqr
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut sum = CompensatedSum::default();
        let mut naive = 0.0;
        for _ in 0..10 {
            sum += 1e16;
            sum += 1.0;
            sum += -1e16;
            naive += 1e16;
            naive += 1.0;
            naive += -1e16;
        }
        assert_eq!(sum.value(), 10.0);
        assert_ne!(naive, 10.0);
    }

    #[test]
    fn rational_literals() {
        let r = |s| parse_rational(s).unwrap();
        assert_eq!(r("3/4"), Rational::new(3.into(), 4.into()));
        assert_eq!(r("-0.75"), Rational::new((-3).into(), 4.into()));
        assert_eq!(r("1.5e-3"), Rational::new(3.into(), 2000.into()));
        assert_eq!(r("12"), Rational::from_integer(12.into()));
        assert_eq!(r("0.1"), Rational::new(1.into(), 10.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn complex_literals() {
        let c = |s| parse_complex::<f64>(s).unwrap();
        assert_eq!(c("i"), Complex::new(0.0, 1.0));
        assert_eq!(c("-i"), Complex::new(0.0, -1.0));
        assert_eq!(c("1+2i"), Complex::new(1.0, 2.0));
        assert_eq!(c("3/4-1/2i"), Complex::new(0.75, -0.5));
        assert_eq!(c("1e-3i"), Complex::new(0.0, 1e-3));
        assert_eq!(c("2e-1+1e+1i"), Complex::new(0.2, 10.0));
        assert_eq!(c(" -2.5 "), Complex::new(-2.5, 0.0));
        let q = parse_complex::<Rational>("3/4-i").unwrap();
        assert_eq!(q.re, Rational::new(3.into(), 4.into()));
        assert_eq!(q.im, -Rational::one());
    }

    #[test]
    fn complex_text_round_trips() {
        for s in ["0", "1", "-3.5", "i", "-i", "2i", "1+i", "1-2.5i", "-0.25+4i"] {
            let z = parse_complex::<f64>(s).unwrap();
            assert_eq!(parse_complex::<f64>(&format_complex(&z)).unwrap(), z, "{s}");
        }
    }

    #[test]
    fn sig17_formatting() {
        assert_eq!(format_sig17(-5.0 / 7.0), "-0.71428571428571430");
        assert_eq!(format_sig17(0.0), "0");
        assert_eq!(format_sig17(1.0), "1.0000000000000000");
        assert!(format_sig17(1e-9).contains('e'));
    }

    #[test]
    fn re_over_matches_division() {
        let a = Complex::new(1.0, 2.0);
        let z = Complex::new(0.5, -1.5);
        assert!((re_over(&a, &z) - (a / z).re).abs() < 1e-15);
    }
}
