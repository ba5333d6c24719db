use std::fmt::Write as _;

use super::scan::{in_halfstrip, HalfStripScan};
use super::space::{BaseSpace, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::norms::Extended;
use crate::space::{ChainWeights, FactorSpace, WeightTail};

/// How tail cells grow along a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Every cell with `n ≥ 1` holds the same number of motif periods.
    Constant,
    /// Cell `n ≥ 1` holds `2^(n−1)` times the base number of periods.
    Doubling,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::Constant => "constant",
            Schedule::Doubling => "doubling",
        }
    }
}

/// Material of a finite first cell `H(j,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadItem {
    /// A head piece of the base space (atom or segment).
    Piece(usize),
    /// A whole motif period.
    Period(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellLocation<'a> {
    Head(&'a [HeadItem]),
    Periods { start: u64, end: u64 },
}

/// The cells `H(j,n)` covering the base space.
///
/// Head material (atoms, segments and any motif periods before the first
/// fully captured one) is packed into the first cells `H(j,0)`. The remaining
/// periods are cut into slabs: first one slab for each chain whose `H(j,0)` is
/// still empty, then round-robin over chains for `n = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    space: BaseSpace,
    f: PiecewiseFunction,
    scan: HalfStripScan,
    chain_count: usize,
    schedule: Schedule,
    periods_per_cell: u64,
    origin: u64,
    heads: Vec<Vec<HeadItem>>,
    head_weights: Vec<f64>,
    lead_rank: Vec<Option<u64>>,
    lead_chains: Vec<usize>,
    absorbed_owner: Vec<usize>,
    cell_measure: f64,
}

const ALIGNMENT_TOLERANCE: f64 = 1e-9;

pub fn build_partition(
    space: &BaseSpace,
    f: &PiecewiseFunction,
    scan: &HalfStripScan,
    chain_count: usize,
    cell_measure: f64,
    schedule: Schedule,
) -> Result<Partition> {
    f.check(space)?;
    if let Some(h) = f.exact_periods {
        return Err(Error::NotExact(h));
    }
    if scan.captured != Extended::Infinite || scan.z0.norm() == 0.0 {
        return Err(Error::Precondition("the half-strip scan did not capture infinite measure".into()));
    }
    if chain_count == 0 {
        return Err(Error::Precondition("at least one chain is required".into()));
    }
    let z0 = scan.z0;
    for (r, period) in f.cycle.iter().enumerate() {
        if let Some(k) = period.iter().position(|z| !in_halfstrip(*z, z0)) {
            return Err(Error::ComplementTooLarge(format!(
                "motif piece {k} in cycle period {r} lies outside the half-strip in every repetition, \
                 so the complement has infinite measure"
            )));
        }
    }
    let per_period = space.per_period_measure();
    let ratio = cell_measure / per_period;
    let k = ratio.round();
    if !(k >= 1.0) || (ratio - k).abs() > ALIGNMENT_TOLERANCE * k || k > (1u64 << 52) as f64 {
        return Err(Error::MisalignedCellMeasure { cell_measure, per_period });
    }
    let k = k as u64;
    let cell_measure = k as f64 * per_period;

    let origin = f
        .explicit
        .iter()
        .rposition(|period| period.iter().any(|z| !in_halfstrip(*z, z0)))
        .map_or(0, |p| p as u64 + 1);

    let items = (0..space.head_len())
        .map(|i| (HeadItem::Piece(i), space.head_measure(i)))
        .chain((0..origin).map(|p| (HeadItem::Period(p), per_period)));
    let mut heads: Vec<Vec<HeadItem>> = vec![Vec::new(); chain_count];
    let mut head_weights = vec![0.0; chain_count];
    let mut absorbed_owner = Vec::new();
    let mut j = 0;
    for (item, m) in items {
        if m > cell_measure {
            return Err(Error::ComplementTooLarge(format!(
                "a head piece of measure {m} exceeds the cell measure {cell_measure}"
            )));
        }
        if head_weights[j] + m > cell_measure {
            j += 1;
            if j == chain_count {
                return Err(Error::ComplementTooLarge(format!(
                    "head material does not fit into {chain_count} first cells of measure {cell_measure}"
                )));
            }
        }
        heads[j].push(item);
        head_weights[j] += m;
        if let HeadItem::Period(_) = item {
            absorbed_owner.push(j);
        }
    }
    let mut lead_rank = vec![None; chain_count];
    let mut lead_chains = Vec::new();
    for (j, items) in heads.iter().enumerate() {
        if items.is_empty() {
            lead_rank[j] = Some(lead_chains.len() as u64);
            lead_chains.push(j);
            head_weights[j] = cell_measure;
        }
    }
    Ok(Partition {
        space: space.clone(),
        f: f.clone(),
        scan: scan.clone(),
        chain_count,
        schedule,
        periods_per_cell: k,
        origin,
        heads,
        head_weights,
        lead_rank,
        lead_chains,
        absorbed_owner,
        cell_measure,
    })
}

fn overflow(what: &str) -> Error {
    Error::IndexOverflow(format!("period index of {what} exceeds u64"))
}

impl Partition {
    pub fn space(&self) -> &BaseSpace {
        &self.space
    }

    pub fn function(&self) -> &PiecewiseFunction {
        &self.f
    }

    pub fn scan(&self) -> &HalfStripScan {
        &self.scan
    }

    pub fn chain_count(&self) -> usize {
        self.chain_count
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn periods_per_cell(&self) -> u64 {
        self.periods_per_cell
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// Periods before this index belong to first cells.
    pub fn head_origin(&self) -> u64 {
        self.origin
    }

    /// First period of the round-robin tail.
    pub fn tail_origin(&self) -> u64 {
        self.origin + self.lead_chains.len() as u64 * self.periods_per_cell
    }

    /// Chain owning each head piece of the base space.
    pub fn head_owner(&self, piece: usize) -> usize {
        self.heads
            .iter()
            .position(|items| items.contains(&HeadItem::Piece(piece)))
            .expect("every head piece is assigned")
    }

    pub fn location(&self, j: usize, n: u64) -> Result<CellLocation<'_>> {
        if j >= self.chain_count {
            return Err(Error::InvalidChain { chain: j, chain_count: self.chain_count });
        }
        if n == 0 && self.lead_rank[j].is_none() {
            return Ok(CellLocation::Head(&self.heads[j]));
        }
        let (start, end) = self.cell_periods(j, n)?;
        Ok(CellLocation::Periods { start, end })
    }

    fn cell_periods(&self, j: usize, n: u64) -> Result<(u64, u64)> {
        let k = self.periods_per_cell;
        let jj = self.chain_count as u64;
        if n == 0 {
            let r = self.lead_rank[j].expect("lead slab");
            let start = self.origin + r * k;
            return Ok((start, start + k));
        }
        let base = self.tail_origin();
        let (start, len) = match self.schedule {
            Schedule::Constant => {
                let slot = (n - 1).checked_mul(jj).and_then(|s| s.checked_add(j as u64)).ok_or_else(|| overflow("cell"))?;
                let start = slot.checked_mul(k).and_then(|s| s.checked_add(base)).ok_or_else(|| overflow("cell"))?;
                (start, k)
            }
            Schedule::Doubling => {
                let g = u32::try_from(n - 1).map_err(|_| overflow("cell"))?;
                let scale = 1u64.checked_shl(g).filter(|_| g < 64).ok_or_else(|| overflow("cell"))?;
                let len = k.checked_mul(scale).ok_or_else(|| overflow("cell"))?;
                let before = jj.checked_mul(k).and_then(|x| x.checked_mul(scale - 1)).ok_or_else(|| overflow("cell"))?;
                let start = base
                    .checked_add(before)
                    .and_then(|s| s.checked_add(j as u64 * len))
                    .ok_or_else(|| overflow("cell"))?;
                (start, len)
            }
        };
        let end = start.checked_add(len).ok_or_else(|| overflow("cell"))?;
        Ok((start, end))
    }

    /// First period past every cell `(j, n)` with `n < h`.
    pub fn prefix_end_period(&self, h: u64) -> Result<u64> {
        match h {
            0 => Ok(0),
            1 => Ok(self.tail_origin()),
            _ => Ok(self.cell_periods(self.chain_count - 1, h - 1)?.1),
        }
    }

    /// Number of leading cells per chain that end at or before period `end`.
    pub fn cells_within(&self, end: u64) -> Result<u64> {
        let mut h = 0u64;
        while h < 4096 && self.prefix_end_period(h + 1)? <= end {
            h += 1;
        }
        Ok(h)
    }

    /// The cell containing motif period `p`.
    pub fn cell_of_period(&self, p: u64) -> (usize, u64) {
        if p < self.origin {
            return (self.absorbed_owner[p as usize], 0);
        }
        let k = self.periods_per_cell;
        let base = self.tail_origin();
        if p < base {
            return (self.lead_chains[((p - self.origin) / k) as usize], 0);
        }
        let jj = self.chain_count as u64;
        match self.schedule {
            Schedule::Constant => {
                let s = (p - base) / k;
                ((s % jj) as usize, s / jj + 1)
            }
            Schedule::Doubling => {
                let q = (p - base) / (jj * k);
                let g = (q + 1).ilog2();
                let offset = p - base - jj * k * ((1u64 << g) - 1);
                ((offset / (k << g)) as usize, g as u64 + 1)
            }
        }
    }

    pub fn cell_weight(&self, j: usize, n: u64) -> Result<f64> {
        match self.location(j, n)? {
            CellLocation::Head(_) => Ok(self.head_weights[j]),
            CellLocation::Periods { start, end } => Ok((end - start) as f64 * self.space.per_period_measure()),
        }
    }

    /// The factor space `Y` with `ν(j,n) = μ(H(j,n))`.
    pub fn factor_space(&self) -> Result<FactorSpace<f64>> {
        let tail = match self.schedule {
            Schedule::Constant => WeightTail::Constant(self.cell_measure),
            Schedule::Doubling => WeightTail::Geometric { base: self.cell_measure / 2.0, ratio: 2.0 },
        };
        FactorSpace::new(
            self.head_weights
                .iter()
                .map(|w| ChainWeights { prefix: vec![*w], tail: tail.clone() })
                .collect(),
        )
    }

    /// Checks disjointness and coverage, containment of tail cells in the
    /// half-strip, weight monotonicity and finiteness. Tail rules are checked
    /// on the first `cells` cells of every chain. Returns the violations.
    pub fn validate(&self, cells: u64) -> Vec<String> {
        let mut problems = Vec::new();
        let mut seen = vec![0usize; self.space.head_len()];
        let mut periods_seen = vec![0usize; self.origin as usize];
        for items in &self.heads {
            for item in items {
                match *item {
                    HeadItem::Piece(i) => seen[i] += 1,
                    HeadItem::Period(p) => periods_seen[p as usize] += 1,
                }
            }
        }
        for (i, count) in seen.iter().enumerate() {
            if *count != 1 {
                problems.push(format!("head piece {i} assigned {count} times"));
            }
        }
        for (p, count) in periods_seen.iter().enumerate() {
            if *count != 1 {
                problems.push(format!("head period {p} assigned {count} times"));
            }
        }

        let mut ranges = Vec::new();
        for j in 0..self.chain_count {
            for n in 0..cells {
                match self.location(j, n) {
                    Ok(CellLocation::Periods { start, end }) => {
                        if self.cell_of_period(start) != (j, n) || self.cell_of_period(end - 1) != (j, n) {
                            problems.push(format!("cell ({j},{n}) does not invert to itself"));
                        }
                        ranges.push((start, end, j, n));
                    }
                    Ok(CellLocation::Head(_)) => {}
                    Err(e) => problems.push(format!("cell ({j},{n}): {e}")),
                }
            }
        }
        ranges.sort();
        let mut next = self.origin;
        for &(start, end, j, n) in &ranges {
            if start != next {
                problems.push(format!("cell ({j},{n}) starts at period {start}, expected {next}"));
            }
            next = end;
        }

        let z0 = self.scan.z0;
        let explicit = self.f.explicit.len() as u64;
        for p in self.origin..explicit {
            if self.f.period(p).iter().any(|z| !in_halfstrip(*z, z0)) {
                problems.push(format!("tail period {p} leaves the half-strip"));
            }
        }
        if self.f.cycle.iter().flatten().any(|z| !in_halfstrip(*z, z0)) {
            problems.push("a recurring piece leaves the half-strip".into());
        }

        match self.factor_space() {
            Ok(space) => {
                for j in 0..self.chain_count {
                    for n in 0..cells {
                        let a = self.cell_weight(j, n);
                        let b = space.weight(crate::space::CellIndex::new(j, n));
                        if a.is_err() || b.is_err() || a.as_ref().ok() != b.as_ref().ok() {
                            problems.push(format!("weight of ({j},{n}) disagrees with the factor space"));
                        }
                    }
                }
            }
            Err(e) => problems.push(format!("weights: {e}")),
        }
        problems
    }

    /// Line-oriented description: header, the first `cells` cells of every
    /// chain, then the tail rule per chain.
    pub fn to_text(&self, cells: u64) -> String {
        let mut s = String::new();
        let k = self.periods_per_cell;
        let jj = self.chain_count as u64;
        let _ = writeln!(s, "partition");
        let _ = writeln!(s, "chains {}", self.chain_count);
        let _ = writeln!(s, "schedule {}", self.schedule.name());
        let _ = writeln!(s, "z0 {} {}", self.scan.z0.re, self.scan.z0.im);
        let _ = writeln!(s, "captured {} per_cycle {}", self.scan.captured, self.scan.captured_per_cycle);
        let _ = writeln!(s, "per_period_measure {}", self.space.per_period_measure());
        let _ = writeln!(s, "cell_measure {}", self.cell_measure);
        let _ = writeln!(s, "periods_per_cell {k}");
        for j in 0..self.chain_count {
            for n in 0..cells {
                let Ok(location) = self.location(j, n) else { continue };
                let weight = self.cell_weight(j, n).unwrap_or(f64::NAN);
                let what = match location {
                    CellLocation::Head(items) => items
                        .iter()
                        .map(|item| match *item {
                            HeadItem::Piece(i) => self.space.describe_head(i),
                            HeadItem::Period(p) => self.space.describe_periods(p, p + 1),
                        })
                        .collect::<Vec<_>>()
                        .join(" "),
                    CellLocation::Periods { start, end } => self.space.describe_periods(start, end),
                };
                let _ = writeln!(s, "cell {j} {n} measure {weight} {what}");
            }
        }
        let base = self.tail_origin();
        for j in 0..self.chain_count as u64 {
            let _ = match self.schedule {
                Schedule::Constant => writeln!(
                    s,
                    "tail {j} n>=1 start_period {} + (n-1)*{} length {k}",
                    base + j * k,
                    jj * k
                ),
                Schedule::Doubling => writeln!(
                    s,
                    "tail {j} n>=1 start_period {base} + {}*(2^(n-1)-1) + {}*2^(n-1) length {k}*2^(n-1)",
                    jj * k,
                    j * k
                ),
            };
        }
        s
    }
}
