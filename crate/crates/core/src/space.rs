//! The atomic factor space `J × ℕ` and complex functions on it.
//!
//! Every chain carries a finite prefix of explicit data followed by an
//! analytic tail rule, so cells far beyond the prefix are never materialized.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_complex, modulus, parse_complex, to_f64_complex, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainId(pub usize);

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex {
    pub chain: ChainId,
    pub n: u64,
}

impl CellIndex {
    pub fn new(chain: usize, n: u64) -> Self {
        CellIndex { chain: ChainId(chain), n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightTail<T> {
    Constant(T),
    /// `weight(n) = base · ratio^n`, with `n` the absolute cell index.
    Geometric { base: T, ratio: T },
}

impl<T: Scalar> WeightTail<T> {
    fn at(&self, n: u64) -> T {
        match self {
            WeightTail::Constant(c) => c.clone(),
            WeightTail::Geometric { base, ratio } => base.clone() * ratio.pow_u64(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainWeights<T> {
    pub prefix: Vec<T>,
    pub tail: WeightTail<T>,
}

impl<T: Scalar> ChainWeights<T> {
    pub fn constant(w: T) -> Self {
        ChainWeights { prefix: Vec::new(), tail: WeightTail::Constant(w) }
    }

    pub fn at(&self, n: u64) -> T {
        match usize::try_from(n).ok().and_then(|k| self.prefix.get(k)) {
            Some(w) => w.clone(),
            None => self.tail.at(n),
        }
    }

    fn validate(&self, chain: usize) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidWeights { chain, reason });
        let zero = T::zero();
        for (n, w) in self.prefix.iter().enumerate() {
            if !(w.is_finite_value() && *w > zero) {
                return fail(format!("weight at n={n} is not positive and finite"));
            }
            if n > 0 && *w < self.prefix[n - 1] {
                return fail(format!("weight decreases at n={n}"));
            }
        }
        match &self.tail {
            WeightTail::Constant(c) => {
                if !(c.is_finite_value() && *c > zero) {
                    return fail("constant tail must be positive and finite".into());
                }
            }
            WeightTail::Geometric { base, ratio } => {
                if !(base.is_finite_value() && *base > zero) {
                    return fail("geometric base must be positive and finite".into());
                }
                if !(ratio.is_finite_value() && *ratio >= T::one()) {
                    return fail("geometric ratio must be at least 1".into());
                }
            }
        }
        if let Some(last) = self.prefix.last() {
            let seam = self.tail.at(self.prefix.len() as u64);
            if seam < *last {
                return fail(format!("tail starts below the prefix at n={}", self.prefix.len()));
            }
        }
        Ok(())
    }
}

/// The atomic space `Y`: finitely many chains, each with nondecreasing cell
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSpace<T: Scalar = f64> {
    chains: Vec<ChainWeights<T>>,
}

impl<T: Scalar> FactorSpace<T> {
    pub fn new(chains: Vec<ChainWeights<T>>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::InvalidWeights { chain: 0, reason: "no chains".into() });
        }
        for (j, c) in chains.iter().enumerate() {
            c.validate(j)?;
        }
        Ok(FactorSpace { chains })
    }

    /// Builds a space without the monotonicity check. Only meant for negative
    /// controls: operators on such a space are not contractions.
    pub fn new_unchecked(chains: Vec<ChainWeights<T>>) -> Self {
        FactorSpace { chains }
    }

    pub fn uniform(chain_count: usize, weight: T) -> Result<Self> {
        Self::new(vec![ChainWeights::constant(weight); chain_count])
    }

    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    pub fn chain(&self, j: ChainId) -> Result<&ChainWeights<T>> {
        self.chains
            .get(j.0)
            .ok_or(Error::InvalidChain { chain: j.0, chain_count: self.chains.len() })
    }

    pub fn chains(&self) -> &[ChainWeights<T>] {
        &self.chains
    }

    pub fn weight(&self, idx: CellIndex) -> Result<T> {
        Ok(self.chain(idx.chain)?.at(idx.n))
    }

    pub fn is_monotone(&self) -> bool {
        self.chains.iter().enumerate().all(|(j, c)| c.validate(j).is_ok())
    }

    pub fn indicator(&self, chains: &[ChainId]) -> Result<CellFunction<T>> {
        CellFunction::indicator(self.chain_count(), chains)
    }

    pub fn to_f64(&self) -> FactorSpace<f64> {
        let conv = |w: &T| w.to_f64();
        FactorSpace {
            chains: self
                .chains
                .iter()
                .map(|c| ChainWeights {
                    prefix: c.prefix.iter().map(conv).collect(),
                    tail: match &c.tail {
                        WeightTail::Constant(w) => WeightTail::Constant(conv(w)),
                        WeightTail::Geometric { base, ratio } => {
                            WeightTail::Geometric { base: conv(base), ratio: conv(ratio) }
                        }
                    },
                })
                .collect(),
        }
    }

    /// One line per chain: `chain,prefix...,constant,c` or
    /// `chain,prefix...,geometric,base,ratio`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (j, c) in self.chains.iter().enumerate() {
            let mut fields = vec![j.to_string()];
            fields.extend(c.prefix.iter().map(|w| w.to_text()));
            match &c.tail {
                WeightTail::Constant(w) => fields.extend(["constant".into(), w.to_text()]),
                WeightTail::Geometric { base, ratio } => {
                    fields.extend(["geometric".into(), base.to_text(), ratio.to_text()])
                }
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut chains = Vec::new();
        for (line_no, fields) in chain_lines(text)? {
            let (tail_at, kind) = fields
                .iter()
                .enumerate()
                .skip(1)
                .find(|(_, f)| matches!(f.as_str(), "constant" | "geometric"))
                .map(|(k, f)| (k, f.clone()))
                .ok_or_else(|| config_err(line_no, "missing weight tail kind"))?;
            let prefix = fields[1..tail_at]
                .iter()
                .map(|f| T::parse_real(f))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| config_err(line_no, &e.to_string()))?;
            let params = &fields[tail_at + 1..];
            let real = |s: &String| T::parse_real(s).map_err(|e| config_err(line_no, &e.to_string()));
            let tail = match (kind.as_str(), params) {
                ("constant", [c]) => WeightTail::Constant(real(c)?),
                ("geometric", [b, r]) => WeightTail::Geometric { base: real(b)?, ratio: real(r)? },
                _ => return Err(config_err(line_no, "wrong number of tail parameters")),
            };
            chains.push(ChainWeights { prefix, tail });
        }
        Self::new(chains)
    }
}

fn config_err(line: usize, message: &str) -> Error {
    Error::Config { line, message: message.to_string() }
}

/// Splits serialized chain text into field lists, checking chain numbering.
fn chain_lines(text: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
        let chain: usize = fields[0]
            .parse()
            .map_err(|_| config_err(k + 1, "chain id must be a nonnegative integer"))?;
        if chain != out.len() {
            return Err(config_err(k + 1, &format!("expected chain {}, found {chain}", out.len())));
        }
        out.push((k + 1, fields));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValueTail<T> {
    Zero,
    Constant(Complex<T>),
}

impl<T: Scalar> ValueTail<T> {
    pub fn value(&self) -> Complex<T> {
        match self {
            ValueTail::Zero => Complex::zero(),
            ValueTail::Constant(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainValues<T> {
    pub prefix: Vec<Complex<T>>,
    pub tail: ValueTail<T>,
}

impl<T: Scalar> ChainValues<T> {
    pub fn new(prefix: Vec<Complex<T>>, tail: ValueTail<T>) -> Self {
        ChainValues { prefix, tail }
    }

    pub fn at(&self, n: u64) -> Complex<T> {
        match usize::try_from(n).ok().and_then(|k| self.prefix.get(k)) {
            Some(v) => v.clone(),
            None => self.tail.value(),
        }
    }

    /// Largest modulus on the chain, tail included.
    pub fn sup_modulus(&self) -> f64 {
        self.prefix
            .iter()
            .map(modulus)
            .chain(std::iter::once(modulus(&self.tail.value())))
            .fold(0.0, f64::max)
    }
}

/// A complex function on `J × ℕ`: per chain, an explicit prefix followed by a
/// zero or constant tail.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFunction<T: Scalar = f64> {
    chains: Vec<ChainValues<T>>,
}

impl<T: Scalar> CellFunction<T> {
    pub fn new(chains: Vec<ChainValues<T>>) -> Result<Self> {
        for (j, c) in chains.iter().enumerate() {
            let finite = |z: &Complex<T>| z.re.is_finite_value() && z.im.is_finite_value();
            if !(c.prefix.iter().all(finite) && finite(&c.tail.value())) {
                return Err(Error::Parse(format!("non-finite value on chain {j}")));
            }
        }
        Ok(CellFunction { chains })
    }

    pub fn zero(chain_count: usize) -> Self {
        CellFunction { chains: vec![ChainValues::new(Vec::new(), ValueTail::Zero); chain_count] }
    }

    pub fn constant(chain_count: usize, c: Complex<T>) -> Self {
        let tail = if c.is_zero() { ValueTail::Zero } else { ValueTail::Constant(c) };
        CellFunction { chains: vec![ChainValues::new(Vec::new(), tail); chain_count] }
    }

    /// `1` on every cell of the listed chains, `0` elsewhere.
    pub fn indicator(chain_count: usize, chains: &[ChainId]) -> Result<Self> {
        let mut f = Self::zero(chain_count);
        for &j in chains {
            let slot = f
                .chains
                .get_mut(j.0)
                .ok_or(Error::InvalidChain { chain: j.0, chain_count })?;
            slot.tail = ValueTail::Constant(Complex::one());
        }
        Ok(f)
    }

    pub fn chain_count(&self) -> usize {
        self.chains.len()
    }

    pub fn chains(&self) -> &[ChainValues<T>] {
        &self.chains
    }

    pub fn chain(&self, j: ChainId) -> Result<&ChainValues<T>> {
        self.chains
            .get(j.0)
            .ok_or(Error::InvalidChain { chain: j.0, chain_count: self.chains.len() })
    }

    pub fn value(&self, idx: CellIndex) -> Result<Complex<T>> {
        Ok(self.chain(idx.chain)?.at(idx.n))
    }

    /// Longest explicit prefix over all chains.
    pub fn prefix_len(&self) -> usize {
        self.chains.iter().map(|c| c.prefix.len()).max().unwrap_or(0)
    }

    pub fn has_zero_tails(&self) -> bool {
        self.chains.iter().all(|c| c.tail == ValueTail::Zero)
    }

    /// Pointwise `a·self + b·other`.
    pub fn combine(&self, other: &Self, a: &Complex<T>, b: &Complex<T>) -> Result<Self> {
        if self.chain_count() != other.chain_count() {
            return Err(Error::MismatchedChains {
                left: self.chain_count(),
                right: other.chain_count(),
            });
        }
        let chains = self
            .chains
            .iter()
            .zip(&other.chains)
            .map(|(v, w)| {
                let len = v.prefix.len().max(w.prefix.len());
                let prefix = (0..len as u64)
                    .map(|n| a.clone() * v.at(n) + b.clone() * w.at(n))
                    .collect();
                let tail = match (&v.tail, &w.tail) {
                    (ValueTail::Zero, ValueTail::Zero) => ValueTail::Zero,
                    _ => ValueTail::Constant(
                        a.clone() * v.tail.value() + b.clone() * w.tail.value(),
                    ),
                };
                ChainValues { prefix, tail }
            })
            .collect();
        Ok(CellFunction { chains })
    }

    pub fn scale(&self, c: &Complex<T>) -> Self {
        self.combine(self, c, &Complex::zero()).expect("same chain count")
    }

    /// True when both functions agree at every cell.
    pub fn same_values(&self, other: &Self) -> bool {
        self.chain_count() == other.chain_count()
            && self.chains.iter().zip(&other.chains).all(|(v, w)| {
                let len = v.prefix.len().max(w.prefix.len()) as u64;
                (0..=len).all(|n| v.at(n) == w.at(n)) && v.tail.value() == w.tail.value()
            })
    }

    pub fn to_f64(&self) -> CellFunction<f64> {
        let conv = |z: &Complex<T>| to_f64_complex(z);
        CellFunction {
            chains: self
                .chains
                .iter()
                .map(|c| ChainValues {
                    prefix: c.prefix.iter().map(conv).collect(),
                    tail: match &c.tail {
                        ValueTail::Zero => ValueTail::Zero,
                        ValueTail::Constant(z) => ValueTail::Constant(conv(z)),
                    },
                })
                .collect(),
        }
    }

    /// One line per chain: `chain,prefix...,zero` or `chain,prefix...,constant,c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (j, c) in self.chains.iter().enumerate() {
            let mut fields = vec![j.to_string()];
            fields.extend(c.prefix.iter().map(format_complex));
            match &c.tail {
                ValueTail::Zero => fields.push("zero".into()),
                ValueTail::Constant(z) => fields.extend(["constant".into(), format_complex(z)]),
            }
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut chains = Vec::new();
        for (line_no, fields) in chain_lines(text)? {
            let err = |e: Error| config_err(line_no, &e.to_string());
            let tail_at = fields
                .iter()
                .skip(1)
                .position(|f| matches!(f.as_str(), "zero" | "constant"))
                .map(|k| k + 1)
                .ok_or_else(|| config_err(line_no, "missing value tail kind"))?;
            let prefix = fields[1..tail_at]
                .iter()
                .map(|f| parse_complex::<T>(f))
                .collect::<Result<Vec<_>>>()
                .map_err(err)?;
            let tail = match (fields[tail_at].as_str(), &fields[tail_at + 1..]) {
                ("zero", []) => ValueTail::Zero,
                ("constant", [c]) => ValueTail::Constant(parse_complex::<T>(c).map_err(err)?),
                _ => return Err(config_err(line_no, "wrong number of tail parameters")),
            };
            chains.push(ChainValues { prefix, tail });
        }
        Self::new(chains)
    }
}
