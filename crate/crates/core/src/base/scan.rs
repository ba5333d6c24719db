use std::f64::consts::PI;

use num_complex::Complex;

use super::space::{BaseSpace, PiecewiseFunction};
use crate::error::{Error, Result};
use crate::norms::Extended;
use crate::scalar::{CompensatedSum, Complex64};

pub const DEFAULT_DIRECTIONS: usize = 24;
pub const DEFAULT_RADII: usize = 8;

/// Rounding allowance on the half-strip boundaries `1/2` and `1`.
pub const HALFSTRIP_SLACK: f64 = 1e-12;

/// `Re(value/z0) ∈ [1/2, 1]`.
pub fn in_halfstrip(value: Complex64, z0: Complex64) -> bool {
    let r = (value / z0).re;
    (0.5 - HALFSTRIP_SLACK..=1.0 + HALFSTRIP_SLACK).contains(&r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfStripScan {
    pub z0: Complex64,
    pub epsilon: f64,
    pub captured: Extended,
    /// Captured measure inside one repetition of the function's cycle.
    pub captured_per_cycle: f64,
    pub candidates_tried: usize,
}

/// Measure captured by `z0` in the finite part and in one cycle.
fn capture(space: &BaseSpace, f: &PiecewiseFunction, z0: Complex64) -> (f64, f64) {
    let mut finite = CompensatedSum::default();
    for (i, z) in f.head.iter().enumerate() {
        if in_halfstrip(*z, z0) {
            finite += space.head_measure(i);
        }
    }
    for period in &f.explicit {
        for (k, z) in period.iter().enumerate() {
            if in_halfstrip(*z, z0) {
                finite += space.piece_measure(k);
            }
        }
    }
    let mut cycle = CompensatedSum::default();
    for period in &f.cycle {
        for (k, z) in period.iter().enumerate() {
            if in_halfstrip(*z, z0) {
                cycle += space.piece_measure(k);
            }
        }
    }
    (finite.value(), cycle.value())
}

/// `μ{Re(f/z0) ∈ [1/2, 1]}`.
pub fn measure_of_halfstrip(space: &BaseSpace, f: &PiecewiseFunction, z0: Complex64) -> Result<Extended> {
    if z0.norm() == 0.0 {
        return Err(Error::ZeroZ0);
    }
    f.check(space)?;
    let (finite, cycle) = capture(space, f, z0);
    Ok(if cycle > 0.0 { Extended::Infinite } else { Extended::Finite(finite) })
}

fn push_distinct(list: &mut Vec<Complex64>, z: Complex64) {
    if !list.contains(&z) {
        list.push(z);
    }
}

/// Searches for `z0` whose half-strip has infinite measure.
///
/// Candidates `4v/3` for recurring values `|v| > epsilon` come first, densest
/// level first, then a polar grid of `directions` angles over radii built from
/// the distinct moduli of `f` plus `radii` interpolated values. The first
/// candidate that captures a recurring piece is returned.
pub fn choose_z0(
    space: &BaseSpace,
    f: &PiecewiseFunction,
    epsilon: f64,
    directions: usize,
    radii: usize,
) -> Result<HalfStripScan> {
    f.check(space)?;
    if !(epsilon > 0.0) || directions == 0 || radii == 0 {
        return Err(Error::Precondition(format!(
            "need epsilon > 0 and nonzero grid sizes (epsilon {epsilon}, K {directions}, R {radii})"
        )));
    }
    let recurring: Vec<Complex64> = f.cycle.iter().flatten().copied().collect();
    if !recurring.iter().any(|z| z.norm() > epsilon) {
        return Err(Error::Precondition(format!("the set {{|f| > {epsilon}}} has finite measure")));
    }

    // recurring values ordered by decreasing measure per cycle
    let mut levels: Vec<(Complex64, f64)> = Vec::new();
    for period in &f.cycle {
        for (k, z) in period.iter().enumerate() {
            if z.norm() > epsilon {
                match levels.iter_mut().find(|(v, _)| v == z) {
                    Some(level) => level.1 += space.piece_measure(k),
                    None => levels.push((*z, space.piece_measure(k))),
                }
            }
        }
    }
    levels.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut candidates = Vec::new();
    for (v, _) in &levels {
        push_distinct(&mut candidates, v * (4.0 / 3.0));
    }
    let sup = f.head.iter().chain(f.explicit.iter().flatten()).chain(&recurring).map(|z| z.norm()).fold(0.0, f64::max);
    let mut moduli: Vec<f64> = f
        .head
        .iter()
        .chain(f.explicit.iter().flatten())
        .chain(&recurring)
        .map(|z| z.norm())
        .filter(|r| *r >= epsilon && *r <= 2.0 * sup)
        .map(|r| r * 4.0 / 3.0)
        .collect();
    moduli.sort_by(f64::total_cmp);
    moduli.dedup();
    let (lo, hi) = (moduli[0], moduli[moduli.len() - 1]);
    let mut rs = moduli.clone();
    for i in 0..radii {
        let t = if radii == 1 { 0.5 } else { i as f64 / (radii - 1) as f64 };
        rs.push(lo + (hi - lo) * t);
    }
    for k in 0..directions {
        let theta = 2.0 * PI * k as f64 / directions as f64;
        for r in &rs {
            push_distinct(&mut candidates, Complex::from_polar(*r, theta));
        }
    }

    let mut best = (0, -1.0);
    for (i, z0) in candidates.iter().enumerate() {
        let (finite, cycle) = capture(space, f, *z0);
        if cycle > 0.0 {
            return Ok(HalfStripScan {
                z0: *z0,
                epsilon,
                captured: Extended::Infinite,
                captured_per_cycle: cycle,
                candidates_tried: i + 1,
            });
        }
        if finite > best.1 {
            best = (i, finite);
        }
    }
    Err(Error::NoZ0Found { best_direction: candidates[best.0].arg(), best_measure: best.1.max(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::space::{Motif, MotifPiece};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex::new(re, im)
    }

    fn alternating() -> (BaseSpace, PiecewiseFunction) {
        let space = BaseSpace::half_line(1.0).unwrap();
        let f = PiecewiseFunction::new(&space, vec![], vec![], vec![vec![c(1.0, 0.0)], vec![c(0.0, 1.0)]]).unwrap();
        (space, f)
    }

    #[test]
    fn halfstrip_examples() {
        let space = BaseSpace::half_line(1.0).unwrap();
        let f = PiecewiseFunction::constant(&space, c(0.75, 0.0));
        assert_eq!(measure_of_halfstrip(&space, &f, c(1.0, 0.0)).unwrap(), Extended::Infinite);
        let f = PiecewiseFunction::constant(&space, c(2.0, 0.0));
        assert_eq!(measure_of_halfstrip(&space, &f, c(1.0, 0.0)).unwrap(), Extended::Finite(0.0));
        let finite = BaseSpace::new(vec![], vec![(0.0, 5.0), (5.0, 7.0)], None).unwrap();
        let f = PiecewiseFunction::new(&finite, vec![c(1.0, 0.0), c(0.0, 0.0)], vec![], vec![]).unwrap();
        assert_eq!(measure_of_halfstrip(&finite, &f, c(1.0, 0.0)).unwrap(), Extended::Finite(5.0));
        assert_eq!(measure_of_halfstrip(&finite, &f, c(0.0, 0.0)), Err(Error::ZeroZ0));
    }

    #[test]
    fn constant_function_scan() {
        let space = BaseSpace::half_line(1.0).unwrap();
        let v0 = c(0.3, -0.6);
        let f = PiecewiseFunction::constant(&space, v0);
        let scan = choose_z0(&space, &f, 0.1, DEFAULT_DIRECTIONS, DEFAULT_RADII).unwrap();
        assert_eq!(scan.z0, v0 * (4.0 / 3.0));
        assert!(((v0 / scan.z0).re - 0.75).abs() < 1e-15);
        assert_eq!(scan.captured, Extended::Infinite);
    }

    #[test]
    fn alternating_scan_takes_real_value() {
        let (space, f) = alternating();
        let scan = choose_z0(&space, &f, 0.1, DEFAULT_DIRECTIONS, DEFAULT_RADII).unwrap();
        assert_eq!(scan.z0, c(4.0 / 3.0, 0.0));
        assert_eq!(scan.captured_per_cycle, 1.0);
    }

    #[test]
    fn scan_prefers_denser_level() {
        let space = BaseSpace::new(
            vec![],
            vec![],
            Some(Motif {
                origin: 0.0,
                period: 1.0,
                pieces: vec![MotifPiece::Interval { lo: 0.0, hi: 0.25 }, MotifPiece::Interval { lo: 0.25, hi: 1.0 }],
            }),
        )
        .unwrap();
        let f = PiecewiseFunction::new(&space, vec![], vec![], vec![vec![c(1.0, 0.0), c(-1.0, 0.0)]]).unwrap();
        let scan = choose_z0(&space, &f, 0.1, DEFAULT_DIRECTIONS, DEFAULT_RADII).unwrap();
        assert_eq!(scan.z0, c(-4.0 / 3.0, 0.0));
        assert_eq!(scan.captured_per_cycle, 0.75);
    }

    #[test]
    fn finite_level_sets_are_rejected() {
        let space = BaseSpace::half_line(1.0).unwrap();
        let f = PiecewiseFunction::new(&space, vec![], vec![vec![c(5.0, 0.0)]], vec![vec![c(0.01, 0.0)]]).unwrap();
        assert!(matches!(choose_z0(&space, &f, 0.1, 24, 8), Err(Error::Precondition(_))));
    }
}
