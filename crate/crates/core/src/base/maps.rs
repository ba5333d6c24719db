use num_complex::Complex;

use super::partition::{CellLocation, HeadItem, Partition, Schedule};
use super::space::PiecewiseFunction;
use crate::cesaro::cesaro_naive_series;
use crate::error::{Error, Result};
use crate::operator::{iterate_value, psi};
use crate::scalar::{CompensatedSum, Complex64};
use crate::space::{CellFunction, CellIndex, ChainValues, ValueTail};

/// Explicit periods beyond this many are refused when materializing.
const MAX_EXPLICIT_PERIODS: u64 = 1 << 22;

fn czero() -> Complex64 {
    Complex::new(0.0, 0.0)
}

/// `∫_{H(j,n)} g` and, when `g` is constant on the cell, that constant.
fn cell_integral(partition: &Partition, g: &PiecewiseFunction, j: usize, n: u64) -> Result<(Complex64, Option<Complex64>)> {
    let space = partition.space();
    match partition.location(j, n)? {
        CellLocation::Periods { start, end } => {
            Ok((g.integral_over_periods(space, start, end)?, g.constant_over_periods(start, end)?))
        }
        CellLocation::Head(items) => {
            let mut re = CompensatedSum::default();
            let mut im = CompensatedSum::default();
            // None: nothing seen yet; Some(None): values differ
            let mut common: Option<Option<Complex64>> = None;
            let note = |common: &mut Option<Option<Complex64>>, z: Option<Complex64>| {
                *common = Some(match (*common, z) {
                    (None, z) => z,
                    (Some(Some(c)), Some(z)) if c == z => Some(c),
                    _ => None,
                });
            };
            for item in items {
                match *item {
                    HeadItem::Piece(i) => {
                        let z = g.head[i];
                        re += space.head_measure(i) * z.re;
                        im += space.head_measure(i) * z.im;
                        note(&mut common, Some(z));
                    }
                    HeadItem::Period(p) => {
                        let z = g.integral_over_periods(space, p, p + 1)?;
                        re += z.re;
                        im += z.im;
                        note(&mut common, g.constant_over_periods(p, p + 1)?);
                    }
                }
            }
            Ok((Complex::new(re.value(), im.value()), common.flatten()))
        }
    }
}

/// `(1/μ(H(j,n)))·∫_{H(j,n)} g`, returning the value itself when `g` is
/// constant on the cell.
pub fn cell_average(partition: &Partition, g: &PiecewiseFunction, j: usize, n: u64) -> Result<Complex64> {
    let (integral, constant) = cell_integral(partition, g, j, n)?;
    match constant {
        Some(c) => Ok(c),
        None => Ok(integral / partition.cell_weight(j, n)?),
    }
}

/// First cell index `n ≥ 1` from which every cell lies in the repeating part
/// of `g`.
fn first_periodic_cell(partition: &Partition, g: &PiecewiseFunction) -> Result<u64> {
    let e = g.explicit.len() as u64;
    let mut n = 1;
    while partition.prefix_end_period(n)? < e {
        n += 1;
    }
    Ok(n)
}

fn check_alignment(partition: &Partition, g: &PiecewiseFunction) -> Result<()> {
    let r = g.cycle_len();
    let k = partition.periods_per_cell();
    let aligned = match partition.schedule() {
        Schedule::Constant => (partition.chain_count() as u64 * k).is_multiple_of(r),
        Schedule::Doubling => k.is_multiple_of(r),
    };
    if aligned {
        Ok(())
    } else {
        Err(Error::MisalignedFunction(format!(
            "cycle of {r} periods does not divide the tail stride of the partition"
        )))
    }
}

/// `P g`: cell averages. The tail is constant because the cycle of `g` is
/// aligned with the tail stride.
pub fn project_p(partition: &Partition, g: &PiecewiseFunction) -> Result<CellFunction<f64>> {
    g.check(partition.space())?;
    if let Some(h) = g.exact_periods {
        return Err(Error::NotExact(h));
    }
    check_alignment(partition, g)?;
    let stable = first_periodic_cell(partition, g)?;
    let chains = (0..partition.chain_count())
        .map(|j| {
            let prefix = (0..stable).map(|n| cell_average(partition, g, j, n)).collect::<Result<Vec<_>>>()?;
            let tail = cell_average(partition, g, j, stable)?;
            let tail = if tail == czero() { ValueTail::Zero } else { ValueTail::Constant(tail) };
            Ok(ChainValues::new(prefix, tail))
        })
        .collect::<Result<Vec<_>>>()?;
    CellFunction::new(chains)
}

fn materialize(
    partition: &Partition,
    end: u64,
    value: impl Fn(usize, u64) -> Complex64,
) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    if end > MAX_EXPLICIT_PERIODS {
        return Err(Error::IndexOverflow(format!("{end} explicit periods requested")));
    }
    let space = partition.space();
    let width = space.motif_len();
    let head = (0..space.head_len()).map(|i| value(partition.head_owner(i), 0)).collect();
    let explicit = (0..end)
        .map(|p| {
            let (j, n) = partition.cell_of_period(p);
            vec![value(j, n); width]
        })
        .collect();
    Ok((head, explicit))
}

/// `Q v`: the step function equal to `v(j,n)` on `H(j,n)`.
pub fn embed_q(partition: &Partition, v: &CellFunction<f64>) -> Result<PiecewiseFunction> {
    if v.chain_count() != partition.chain_count() {
        return Err(Error::MismatchedChains { left: partition.chain_count(), right: v.chain_count() });
    }
    let at = |j: usize, n: u64| v.value(CellIndex::new(j, n)).expect("chain checked");
    let cells = v.prefix_len().max(1) as u64;
    let end = partition.prefix_end_period(cells)?;
    let (head, explicit) = materialize(partition, end, at)?;
    let width = partition.space().motif_len();
    let cycle = match partition.schedule() {
        Schedule::Constant => {
            let stride = partition.chain_count() as u64 * partition.periods_per_cell();
            (end..end + stride)
                .map(|p| {
                    let (j, n) = partition.cell_of_period(p);
                    vec![at(j, n); width]
                })
                .collect()
        }
        Schedule::Doubling => {
            let tail = at(0, cells);
            if (0..partition.chain_count()).any(|j| at(j, cells) != tail) {
                return Err(Error::MisalignedFunction(
                    "with growing cells, chains must share one tail value to give a periodic step function".into(),
                ));
            }
            vec![vec![tail; width]]
        }
    };
    Ok(PiecewiseFunction { head, explicit, cycle, exact_periods: None })
}

/// `T g`: on `H(j,n)`, `ψ(n+1)` times the average of `g` over `H(j,n+1)`.
///
/// When `g` vanishes on its repeating part the result is exact everywhere.
/// Otherwise the sign pattern never becomes periodic, so the result is
/// materialized on cells `n < min_cells` (fewer if `g` is itself only exact
/// on a prefix) and marked exact only there.
pub fn apply_t_base(partition: &Partition, g: &PiecewiseFunction, min_cells: u64) -> Result<PiecewiseFunction> {
    g.check(partition.space())?;
    let width = partition.space().motif_len();
    let zero_cycle = g.cycle.iter().flatten().all(|z| *z == czero());
    let (cells, exact) = match g.exact_periods {
        None if zero_cycle => (min_cells.max(first_periodic_cell(partition, g)?), true),
        None => (min_cells, false),
        Some(h) => (min_cells.min(partition.cells_within(h)?.saturating_sub(1)), false),
    };
    if cells == 0 {
        return Err(Error::NotExact(g.exact_periods.unwrap_or(0)));
    }
    let mut out = vec![Vec::with_capacity(cells as usize); partition.chain_count()];
    for (j, row) in out.iter_mut().enumerate() {
        for n in 0..cells {
            row.push(psi(n + 1).apply(cell_average(partition, g, j, n + 1)?));
        }
    }
    let end = partition.prefix_end_period(cells)?;
    let (head, explicit) = materialize(partition, end, |j, n| out[j][n as usize])?;
    Ok(PiecewiseFunction {
        head,
        explicit,
        cycle: vec![vec![czero(); width]],
        exact_periods: if exact { None } else { Some(end) },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub k_max: u64,
    pub cells: u64,
    pub checks: usize,
    pub max_error: f64,
    pub failures: Vec<String>,
}

impl FactorizationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const FACTORIZATION_TOLERANCE: f64 = 1e-12;

/// Compares `T^k g` (repeated [`apply_t_base`]) with `Q S^k P g` (closed-form
/// iterates of `P g`) on cells `n < cells`, for `k ≤ k_max`, together with the
/// Cesàro averages of both sides.
pub fn verify_factorization(
    partition: &Partition,
    g: &PiecewiseFunction,
    k_max: u64,
    cells: u64,
) -> Result<FactorizationReport> {
    let v = project_p(partition, g)?;
    let chain_count = partition.chain_count();
    let mut report = FactorizationReport { k_max, cells, checks: 0, max_error: 0.0, failures: Vec::new() };
    let mut sums = vec![vec![czero(); cells as usize]; chain_count];
    let counts: Vec<u64> = (1..=k_max).collect();
    let expected_averages = (0..chain_count)
        .map(|j| {
            (0..cells)
                .map(|n| cesaro_naive_series(&v, CellIndex::new(j, n), &counts))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut compare = |what: &str, j: usize, n: u64, k: u64, actual: Complex64, expected: Complex64| {
        let err = (actual - expected).norm();
        report.checks += 1;
        report.max_error = report.max_error.max(err);
        if !(err <= FACTORIZATION_TOLERANCE * expected.norm().max(1.0)) {
            report.failures.push(format!("{what} ({j},{n}) k={k}: {actual} vs {expected}"));
        }
    };
    let mut step_failures = Vec::new();
    let mut current = g.clone();
    for k in 1..=k_max {
        current = apply_t_base(partition, &current, cells + (k_max - k))?;
        for j in 0..chain_count {
            for n in 0..cells {
                let expected = iterate_value(&v, CellIndex::new(j, n), k)?;
                let (integral, constant) = cell_integral(partition, &current, j, n)?;
                let actual = match constant {
                    Some(c) => c,
                    None => {
                        step_failures.push(format!("T^{k} g is not constant on cell ({j},{n})"));
                        integral / partition.cell_weight(j, n)?
                    }
                };
                compare("iterate", j, n, k, actual, expected);
                let sum = &mut sums[j][n as usize];
                *sum += actual;
                let average = *sum / k as f64;
                compare("average", j, n, k, average, expected_averages[j][n as usize][k as usize - 1]);
            }
        }
    }
    report.failures.extend(step_failures);
    Ok(report)
}
