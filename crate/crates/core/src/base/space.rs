use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::norms::Extended;
use crate::scalar::{CompensatedSum, Complex64};

/// One element of the repeating motif, with offsets relative to the start of
/// its period.
#[derive(Debug, Clone, PartialEq)]
pub enum MotifPiece {
    Interval { lo: f64, hi: f64 },
    Atom { weight: f64 },
}

impl MotifPiece {
    pub fn measure(&self) -> f64 {
        match *self {
            MotifPiece::Interval { lo, hi } => hi - lo,
            MotifPiece::Atom { weight } => weight,
        }
    }
}

/// Pieces repeated on `[origin + p·period, origin + (p+1)·period)`, `p ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    pub origin: f64,
    pub period: f64,
    pub pieces: Vec<MotifPiece>,
}

/// A σ-finite space made of finitely many atoms and intervals (the head),
/// optionally followed by a periodic motif that makes the total measure
/// infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSpace {
    atoms: Vec<f64>,
    segments: Vec<(f64, f64)>,
    motif: Option<Motif>,
    per_period: f64,
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl BaseSpace {
    /// Segments are sorted by left endpoint; they must be disjoint and, when a
    /// motif is present, lie left of its origin.
    pub fn new(atoms: Vec<f64>, mut segments: Vec<(f64, f64)>, motif: Option<Motif>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidBaseSpace(msg));
        if let Some(w) = atoms.iter().find(|w| !positive(**w)) {
            return bad(format!("atom weight {w} must be positive and finite"));
        }
        segments.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(lo, hi) in &segments {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return bad(format!("segment [{lo},{hi}) must satisfy 0 <= lo < hi < inf"));
            }
        }
        for pair in segments.windows(2) {
            if pair[1].0 < pair[0].1 {
                return bad(format!("segments [{},{}) and [{},{}) overlap", pair[0].0, pair[0].1, pair[1].0, pair[1].1));
            }
        }
        let mut per_period = 0.0;
        if let Some(m) = &motif {
            if !(m.origin >= 0.0 && m.origin.is_finite()) || !positive(m.period) {
                return bad(format!("motif origin {} / period {} invalid", m.origin, m.period));
            }
            if m.pieces.is_empty() {
                return bad("motif has no pieces".into());
            }
            if let Some(&(lo, hi)) = segments.last() {
                if hi > m.origin {
                    return bad(format!("segment [{lo},{hi}) reaches past the motif origin {}", m.origin));
                }
            }
            let mut intervals = Vec::new();
            for piece in &m.pieces {
                match *piece {
                    MotifPiece::Interval { lo, hi } => {
                        if !(lo >= 0.0 && lo < hi && hi <= m.period) {
                            return bad(format!("motif interval [{lo},{hi}) outside [0,{})", m.period));
                        }
                        intervals.push((lo, hi));
                    }
                    MotifPiece::Atom { weight } => {
                        if !positive(weight) {
                            return bad(format!("motif atom weight {weight} must be positive"));
                        }
                    }
                }
            }
            intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
            if intervals.windows(2).any(|p| p[1].0 < p[0].1) {
                return bad("motif intervals overlap".into());
            }
            for piece in &m.pieces {
                per_period += piece.measure();
            }
        }
        Ok(BaseSpace { atoms, segments, motif, per_period })
    }

    /// `[0, ∞)` cut into unit periods.
    pub fn half_line(period: f64) -> Result<Self> {
        BaseSpace::new(
            Vec::new(),
            Vec::new(),
            Some(Motif { origin: 0.0, period, pieces: vec![MotifPiece::Interval { lo: 0.0, hi: period }] }),
        )
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.segments
    }

    pub fn motif(&self) -> Option<&Motif> {
        self.motif.as_ref()
    }

    pub fn is_infinite(&self) -> bool {
        self.motif.is_some()
    }

    /// Number of head pieces: atoms first, then segments.
    pub fn head_len(&self) -> usize {
        self.atoms.len() + self.segments.len()
    }

    pub fn head_measure(&self, i: usize) -> f64 {
        if i < self.atoms.len() {
            self.atoms[i]
        } else {
            let (lo, hi) = self.segments[i - self.atoms.len()];
            hi - lo
        }
    }

    pub fn describe_head(&self, i: usize) -> String {
        if i < self.atoms.len() {
            format!("atom{i}")
        } else {
            let (lo, hi) = self.segments[i - self.atoms.len()];
            format!("[{lo},{hi})")
        }
    }

    pub fn motif_len(&self) -> usize {
        self.motif.as_ref().map_or(0, |m| m.pieces.len())
    }

    pub fn piece_measure(&self, k: usize) -> f64 {
        self.motif.as_ref().map_or(0.0, |m| m.pieces[k].measure())
    }

    /// Measure of one motif period (0 without a motif).
    pub fn per_period_measure(&self) -> f64 {
        self.per_period
    }

    /// Absolute location of periods `[start, end)`.
    pub fn describe_periods(&self, start: u64, end: u64) -> String {
        match &self.motif {
            Some(m) => {
                let from = m.origin + start as f64 * m.period;
                let to = m.origin + end as f64 * m.period;
                format!("periods[{start},{end})=[{from},{to})")
            }
            None => String::from("none"),
        }
    }
}

/// Piecewise constant function: one value per head piece and, per motif
/// period, one value per motif piece.
///
/// Periods `0..explicit.len()` are stored; later periods repeat `cycle`.
/// When `exact_periods` is `Some(h)`, values on periods `≥ h` are placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    pub head: Vec<Complex64>,
    pub explicit: Vec<Vec<Complex64>>,
    pub cycle: Vec<Vec<Complex64>>,
    pub exact_periods: Option<u64>,
}

fn czero() -> Complex64 {
    Complex::new(0.0, 0.0)
}

impl PiecewiseFunction {
    pub fn new(
        space: &BaseSpace,
        head: Vec<Complex64>,
        explicit: Vec<Vec<Complex64>>,
        cycle: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let f = PiecewiseFunction { head, explicit, cycle, exact_periods: None };
        f.check(space)?;
        Ok(f)
    }

    pub fn constant(space: &BaseSpace, c: Complex64) -> Self {
        let cycle = if space.is_infinite() { vec![vec![c; space.motif_len()]] } else { Vec::new() };
        PiecewiseFunction { head: vec![c; space.head_len()], explicit: Vec::new(), cycle, exact_periods: None }
    }

    pub fn zero(space: &BaseSpace) -> Self {
        PiecewiseFunction::constant(space, czero())
    }

    pub fn check(&self, space: &BaseSpace) -> Result<()> {
        let bad = |msg: String| Err(Error::MisalignedFunction(msg));
        if self.head.len() != space.head_len() {
            return bad(format!("{} head values for {} head pieces", self.head.len(), space.head_len()));
        }
        let width = space.motif_len();
        if space.is_infinite() == self.cycle.is_empty() {
            return bad("a repeating cycle is required exactly when the space has a motif".into());
        }
        if let Some(p) = self.explicit.iter().chain(&self.cycle).find(|p| p.len() != width) {
            return bad(format!("period with {} values for {} motif pieces", p.len(), width));
        }
        let all = self.head.iter().chain(self.explicit.iter().chain(&self.cycle).flatten());
        if all.clone().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return bad("non-finite value".into());
        }
        Ok(())
    }

    pub fn cycle_len(&self) -> u64 {
        self.cycle.len() as u64
    }

    pub fn period(&self, p: u64) -> &[Complex64] {
        let e = self.explicit.len() as u64;
        if p < e {
            &self.explicit[p as usize]
        } else {
            &self.cycle[((p - e) % self.cycle_len()) as usize]
        }
    }

    pub fn require_exact(&self, end_period: u64) -> Result<()> {
        match self.exact_periods {
            Some(h) if end_period > h => Err(Error::NotExact(h)),
            _ => Ok(()),
        }
    }

    fn period_integral(&self, space: &BaseSpace, values: &[Complex64]) -> Complex64 {
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        for (k, z) in values.iter().enumerate() {
            let m = space.piece_measure(k);
            re += m * z.re;
            im += m * z.im;
        }
        Complex::new(re.value(), im.value())
    }

    /// `∫ g` over motif periods `[start, end)`.
    pub fn integral_over_periods(&self, space: &BaseSpace, start: u64, end: u64) -> Result<Complex64> {
        self.require_exact(end)?;
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        let mut push = |z: Complex64| {
            re += z.re;
            im += z.im;
        };
        let e = self.explicit.len() as u64;
        for p in start..end.min(e) {
            push(self.period_integral(space, &self.explicit[p as usize]));
        }
        let from = start.max(e);
        if from < end {
            let r = self.cycle_len();
            let span = end - from;
            let phase = (from - e) % r;
            let integrals: Vec<Complex64> = self.cycle.iter().map(|v| self.period_integral(space, v)).collect();
            let full = span / r;
            if full > 0 {
                let total: Complex64 = integrals.iter().sum();
                push(total * full as f64);
            }
            for i in 0..span % r {
                push(integrals[((phase + i) % r) as usize]);
            }
        }
        Ok(Complex::new(re.value(), im.value()))
    }

    /// The common value on periods `[start, end)`, if there is one.
    pub fn constant_over_periods(&self, start: u64, end: u64) -> Result<Option<Complex64>> {
        self.require_exact(end)?;
        if start >= end {
            return Ok(None);
        }
        let first = self.period(start).first().copied();
        let Some(first) = first else { return Ok(None) };
        let e = self.explicit.len() as u64;
        let same = |p: &[Complex64]| p.iter().all(|z| *z == first);
        for p in start..end.min(e) {
            if !same(&self.explicit[p as usize]) {
                return Ok(None);
            }
        }
        let from = start.max(e);
        if from < end {
            let r = self.cycle_len();
            let span = (end - from).min(r);
            for i in 0..span {
                if !same(self.period(from + i)) {
                    return Ok(None);
                }
            }
        }
        Ok(Some(first))
    }

    pub fn l1_norm(&self, space: &BaseSpace) -> Result<Extended> {
        if let Some(h) = self.exact_periods {
            return Err(Error::NotExact(h));
        }
        if self.cycle.iter().flatten().any(|z| z.norm() > 0.0) {
            return Ok(Extended::Infinite);
        }
        let mut acc = CompensatedSum::default();
        for (i, z) in self.head.iter().enumerate() {
            acc += space.head_measure(i) * z.norm();
        }
        for period in &self.explicit {
            for (k, z) in period.iter().enumerate() {
                acc += space.piece_measure(k) * z.norm();
            }
        }
        Ok(Extended::Finite(acc.value()))
    }

    pub fn linf_norm(&self, _space: &BaseSpace) -> Result<f64> {
        if let Some(h) = self.exact_periods {
            return Err(Error::NotExact(h));
        }
        let all = self.head.iter().chain(self.explicit.iter().chain(&self.cycle).flatten());
        Ok(all.map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Random function vanishing outside the head and the first `max_periods`
    /// motif periods.
    pub fn random_finite_support(space: &BaseSpace, max_periods: usize, rng: &mut ChaCha8Rng) -> Self {
        let value = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.2) {
                czero()
            } else {
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        };
        let head = (0..space.head_len()).map(|_| value(rng)).collect();
        if !space.is_infinite() {
            return PiecewiseFunction { head, explicit: Vec::new(), cycle: Vec::new(), exact_periods: None };
        }
        let periods = rng.gen_range(0..=max_periods);
        let explicit = (0..periods).map(|_| (0..space.motif_len()).map(|_| value(rng)).collect()).collect();
        PiecewiseFunction {
            head,
            explicit,
            cycle: vec![vec![czero(); space.motif_len()]],
            exact_periods: None,
        }
    }
}
