//! Scenario files.
//!
//! ```toml
//! [scenario]
//! name = "canonical"
//! seed = 7
//! exact = false
//! threads = 1
//!
//! [checkpoints]
//! t_min = 2
//! t_max = 8
//! starts = [1]
//! z0 = "1"
//! l_max = 8
//!
//! [[chain]]
//! weights = []
//! weight_tail = "constant 1"
//! values = []
//! value_tail = "constant 1"
//! ```
//!
//! Instead of `[[chain]]` tables a `[base]` table describes a base space and a
//! function `f` on it; the factor space and `v = P f` then come from the
//! constructed partition. Numbers may be written as TOML numbers or as strings
//! (`"3/4"`, `"1+2i"`); strings are parsed exactly in exact mode.

use std::ops::Range;

use num_complex::Complex;
use serde::Deserialize;
use toml::Spanned;

use crate::base::{
    build_partition, choose_z0, project_p, BaseSpace, Motif, MotifPiece, Partition, PiecewiseFunction, Schedule,
    DEFAULT_DIRECTIONS, DEFAULT_RADII,
};
use crate::cesaro::{checkpoint_set, DEFAULT_T_MAX, DEFAULT_T_MIN};
use crate::error::{Error, Result};
use crate::scalar::{parse_complex, Complex64, Scalar};
use crate::space::{CellFunction, ChainValues, ChainWeights, FactorSpace, ValueTail, WeightTail};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn text(&self) -> String {
        match self {
            Num::Int(i) => i.to_string(),
            Num::Float(x) => format!("{x:?}"),
            Num::Text(s) => s.clone(),
        }
    }
}

type Field<T> = Option<Spanned<T>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    scenario: Option<RawMeta>,
    checkpoints: Option<Spanned<RawCheckpoints>>,
    space: Option<RawSpace>,
    #[serde(default)]
    chain: Vec<Spanned<RawChain>>,
    base: Option<Spanned<RawBase>>,
    probes: Option<RawProbes>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeta {
    name: Option<String>,
    seed: Option<u64>,
    exact: Option<bool>,
    threads: Field<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheckpoints {
    t_min: Field<u32>,
    t_max: Field<u32>,
    starts: Field<Vec<u64>>,
    z0: Field<Num>,
    l_max: Field<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    allow_nonmonotone: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    weights: Field<Vec<Num>>,
    weight_tail: Field<String>,
    values: Field<Vec<Num>>,
    value_tail: Field<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBase {
    atoms: Field<Vec<Num>>,
    atom_values: Field<Vec<Num>>,
    segments: Field<Vec<String>>,
    segment_values: Field<Vec<Num>>,
    motif_origin: Field<Num>,
    motif_period: Field<Num>,
    motif_pieces: Field<Vec<String>>,
    motif_values: Field<Vec<Num>>,
    epsilon: Field<Num>,
    chains: Field<usize>,
    cell_measure: Field<Num>,
    schedule: Field<String>,
    directions: Field<usize>,
    radii: Field<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbes {
    deltas: Field<Vec<Num>>,
    openness_samples: Option<usize>,
    remark_samples: Option<usize>,
    contraction_samples: Option<usize>,
    factorization_k_max: Option<u64>,
    factorization_cells: Option<u64>,
    factorization_functions: Option<usize>,
    random_functions: Option<usize>,
}

/// Text of a number together with the line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub text: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub weights: Vec<String>,
    pub weight_tail: String,
    pub values: Vec<String>,
    pub value_tail: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseSpec {
    pub space: BaseSpace,
    pub f: PiecewiseFunction,
    pub epsilon: f64,
    pub chains: usize,
    pub cell_measure: f64,
    pub schedule: Schedule,
    pub directions: usize,
    pub radii: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Factor { chains: Vec<ChainSpec>, allow_nonmonotone: bool },
    Base(BaseSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probes {
    pub deltas: Vec<f64>,
    pub openness_samples: usize,
    pub remark_samples: usize,
    pub contraction_samples: usize,
    pub factorization_k_max: u64,
    pub factorization_cells: u64,
    pub factorization_functions: usize,
    /// Sample count for the randomized lemma and norm checks.
    pub random_functions: usize,
}

impl Default for Probes {
    fn default() -> Self {
        Probes {
            deltas: vec![1.0, 0.3, 0.01],
            openness_samples: 20,
            remark_samples: 100,
            contraction_samples: 1000,
            factorization_k_max: 50,
            factorization_cells: 20,
            factorization_functions: 20,
            random_functions: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub exact: bool,
    pub threads: usize,
    pub t_min: u32,
    pub t_max: u32,
    pub starts: Vec<u64>,
    pub z0: Option<Located>,
    pub l_max: u32,
    pub model: ModelSpec,
    pub probes: Probes,
}

/// A scenario resolved to a factor space, a function and `z0`.
#[derive(Debug, Clone)]
pub struct Model<T: Scalar> {
    pub space: FactorSpace<T>,
    pub v: CellFunction<T>,
    pub z0: Complex<T>,
    pub partition: Option<Partition>,
}

struct Lines<'a> {
    text: &'a str,
}

impl Lines<'_> {
    fn at(&self, offset: usize) -> usize {
        1 + self.text[..offset.min(self.text.len())].bytes().filter(|b| *b == b'\n').count()
    }

    fn span(&self, span: Range<usize>) -> usize {
        self.at(span.start)
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        Error::Config { line: self.span(span), message: message.into() }
    }
}

fn parse_f64_at(lines: &Lines<'_>, value: &Spanned<Num>, what: &str) -> Result<f64> {
    f64::parse_real(&value.get_ref().text()).map_err(|e| lines.err(value.span(), format!("{what}: {e}")))
}

fn parse_c64(lines: &Lines<'_>, span: Range<usize>, text: &str, what: &str) -> Result<Complex64> {
    parse_complex::<f64>(text).map_err(|e| lines.err(span, format!("{what}: {e}")))
}

fn complex_list(lines: &Lines<'_>, field: &Field<Vec<Num>>, what: &str) -> Result<Vec<Complex64>> {
    match field {
        None => Ok(Vec::new()),
        Some(list) => list
            .get_ref()
            .iter()
            .map(|n| parse_c64(lines, list.span(), &n.text(), what))
            .collect(),
    }
}

fn real_list(lines: &Lines<'_>, field: &Field<Vec<Num>>, what: &str) -> Result<Vec<f64>> {
    complex_list(lines, field, what)?
        .into_iter()
        .map(|z| {
            if z.im == 0.0 {
                Ok(z.re)
            } else {
                Err(lines.err(field.as_ref().map_or(0..0, |f| f.span()), format!("{what} must be real")))
            }
        })
        .collect()
}

fn numbers(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

fn parse_base(lines: &Lines<'_>, raw: &Spanned<RawBase>) -> Result<BaseSpec> {
    let b = raw.get_ref();
    let whole = raw.span();
    let atoms = real_list(lines, &b.atoms, "atoms")?;
    let mut segments = Vec::new();
    if let Some(list) = &b.segments {
        for s in list.get_ref() {
            let parts = numbers(s);
            let parsed: Vec<f64> = parts.iter().filter_map(|p| f64::parse_real(p).ok()).collect();
            if parts.len() != 2 || parsed.len() != 2 {
                return Err(lines.err(list.span(), format!("segment {s:?} must be \"lo hi\"")));
            }
            segments.push((parsed[0], parsed[1]));
        }
    }
    let motif = match (&b.motif_period, &b.motif_pieces) {
        (None, None) => None,
        (Some(period), pieces) => {
            let origin = match &b.motif_origin {
                Some(o) => parse_f64_at(lines, o, "motif_origin")?,
                None => segments.iter().map(|s| s.1).fold(0.0, f64::max),
            };
            let period_value = parse_f64_at(lines, period, "motif_period")?;
            let pieces = match pieces {
                None => vec![MotifPiece::Interval { lo: 0.0, hi: period_value }],
                Some(list) => list
                    .get_ref()
                    .iter()
                    .map(|s| {
                        let parts = numbers(s);
                        let nums: Vec<f64> = parts[1.min(parts.len())..]
                            .iter()
                            .filter_map(|p| f64::parse_real(p).ok())
                            .collect();
                        match (parts.first().copied(), nums.as_slice()) {
                            (Some("interval"), [lo, hi]) if parts.len() == 3 => {
                                Ok(MotifPiece::Interval { lo: *lo, hi: *hi })
                            }
                            (Some("atom"), [w]) if parts.len() == 2 => Ok(MotifPiece::Atom { weight: *w }),
                            _ => Err(lines.err(
                                list.span(),
                                format!("motif piece {s:?} must be \"interval lo hi\" or \"atom w\""),
                            )),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            Some(Motif { origin, period: period_value, pieces })
        }
        (None, Some(list)) => return Err(lines.err(list.span(), "motif_pieces given without motif_period")),
    };
    let space = BaseSpace::new(atoms, segments, motif).map_err(|e| lines.err(whole.clone(), e.to_string()))?;

    let mut head = complex_list(lines, &b.atom_values, "atom_values")?;
    let segment_values = complex_list(lines, &b.segment_values, "segment_values")?;
    if head.len() != space.atoms().len() || segment_values.len() != space.segments().len() {
        return Err(lines.err(whole.clone(), "one value is needed per atom and per segment"));
    }
    head.extend(segment_values);
    let flat = complex_list(lines, &b.motif_values, "motif_values")?;
    let width = space.motif_len();
    let cycle: Vec<Vec<Complex64>> = if width == 0 {
        if !flat.is_empty() {
            return Err(lines.err(whole.clone(), "motif_values given without a motif"));
        }
        Vec::new()
    } else {
        if flat.is_empty() || flat.len() % width != 0 {
            let span = b.motif_values.as_ref().map_or(whole.clone(), |f| f.span());
            return Err(lines.err(span, format!("motif_values must list whole periods of {width} values")));
        }
        flat.chunks(width).map(<[Complex64]>::to_vec).collect()
    };
    let f = PiecewiseFunction::new(&space, head, Vec::new(), cycle)
        .map_err(|e| lines.err(whole.clone(), e.to_string()))?;

    let epsilon = match &b.epsilon {
        Some(e) => parse_f64_at(lines, e, "epsilon")?,
        None => 0.1,
    };
    let cell_measure = match &b.cell_measure {
        Some(c) => parse_f64_at(lines, c, "cell_measure")?,
        None => space.per_period_measure(),
    };
    let schedule = match &b.schedule {
        None => Schedule::Constant,
        Some(s) => match s.get_ref().as_str() {
            "constant" => Schedule::Constant,
            "doubling" => Schedule::Doubling,
            other => return Err(lines.err(s.span(), format!("unknown schedule {other:?}"))),
        },
    };
    let positive = |field: &Field<usize>, default: usize, what: &str| -> Result<usize> {
        match field {
            None => Ok(default),
            Some(v) if *v.get_ref() >= 1 => Ok(*v.get_ref()),
            Some(v) => Err(lines.err(v.span(), format!("{what} must be at least 1"))),
        }
    };
    Ok(BaseSpec {
        space,
        f,
        epsilon,
        chains: positive(&b.chains, 1, "chains")?,
        cell_measure,
        schedule,
        directions: positive(&b.directions, DEFAULT_DIRECTIONS, "directions")?,
        radii: positive(&b.radii, DEFAULT_RADII, "radii")?,
    })
}

fn weight_tail<T: Scalar>(text: &str) -> Result<WeightTail<T>> {
    let parts = numbers(text);
    match parts.as_slice() {
        ["constant", c] => Ok(WeightTail::Constant(T::parse_real(c)?)),
        ["geometric", b, r] => Ok(WeightTail::Geometric { base: T::parse_real(b)?, ratio: T::parse_real(r)? }),
        _ => Err(Error::Parse(format!("weight tail {text:?} must be \"constant c\" or \"geometric base ratio\""))),
    }
}

fn value_tail<T: Scalar>(text: &str) -> Result<ValueTail<T>> {
    let t = text.trim();
    if t == "zero" {
        return Ok(ValueTail::Zero);
    }
    match t.strip_prefix("constant") {
        Some(rest) if rest.starts_with(char::is_whitespace) => Ok(ValueTail::Constant(parse_complex(rest)?)),
        _ => Err(Error::Parse(format!("value tail {text:?} must be \"zero\" or \"constant c\""))),
    }
}

fn lift_space<T: Scalar>(space: &FactorSpace<f64>) -> Result<FactorSpace<T>> {
    let lift = |x: f64| T::from_f64(x).ok_or_else(|| Error::Parse(format!("weight {x} is not finite")));
    let chains = space
        .chains()
        .iter()
        .map(|c| {
            let prefix = c.prefix.iter().map(|w| lift(*w)).collect::<Result<Vec<_>>>()?;
            let tail = match c.tail {
                WeightTail::Constant(w) => WeightTail::Constant(lift(w)?),
                WeightTail::Geometric { base, ratio } => WeightTail::Geometric { base: lift(base)?, ratio: lift(ratio)? },
            };
            Ok(ChainWeights { prefix, tail })
        })
        .collect::<Result<Vec<_>>>()?;
    FactorSpace::new(chains)
}

fn lift_complex<T: Scalar>(z: Complex64) -> Result<Complex<T>> {
    match (T::from_f64(z.re), T::from_f64(z.im)) {
        (Some(re), Some(im)) => Ok(Complex::new(re, im)),
        _ => Err(Error::Parse(format!("value {z} is not finite"))),
    }
}

fn lift_function<T: Scalar>(v: &CellFunction<f64>) -> Result<CellFunction<T>> {
    let chains = v
        .chains()
        .iter()
        .map(|c| {
            let prefix = c.prefix.iter().map(|z| lift_complex(*z)).collect::<Result<Vec<_>>>()?;
            let tail = match c.tail {
                ValueTail::Zero => ValueTail::Zero,
                ValueTail::Constant(z) => ValueTail::Constant(lift_complex(z)?),
            };
            Ok(ChainValues::new(prefix, tail))
        })
        .collect::<Result<Vec<_>>>()?;
    CellFunction::new(chains)
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario> {
        let lines = Lines { text };
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map_or(1, |s| lines.at(s.start)),
            message: e.message().to_string(),
        })?;

        let meta = raw.scenario.as_ref();
        let threads = match meta.and_then(|m| m.threads.as_ref()) {
            Some(t) if *t.get_ref() == 0 => return Err(lines.err(t.span(), "threads must be at least 1")),
            Some(t) => *t.get_ref(),
            None => 1,
        };
        let mut scenario = Scenario {
            name: meta.and_then(|m| m.name.clone()).unwrap_or_else(|| "scenario".into()),
            seed: meta.and_then(|m| m.seed).unwrap_or(0),
            exact: meta.and_then(|m| m.exact).unwrap_or(false),
            threads,
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
            starts: vec![1],
            z0: None,
            l_max: 8,
            model: ModelSpec::Factor { chains: Vec::new(), allow_nonmonotone: false },
            probes: Probes::default(),
        };

        let mut checkpoint_line = 1;
        if let Some(cp) = &raw.checkpoints {
            checkpoint_line = lines.span(cp.span());
            let c = cp.get_ref();
            if let Some(t) = &c.t_min {
                scenario.t_min = *t.get_ref();
            }
            if let Some(t) = &c.t_max {
                scenario.t_max = *t.get_ref();
            }
            if let Some(s) = &c.starts {
                if s.get_ref().is_empty() {
                    return Err(lines.err(s.span(), "starts must not be empty"));
                }
                scenario.starts = s.get_ref().clone();
            }
            if let Some(z) = &c.z0 {
                scenario.z0 = Some(Located { text: z.get_ref().text(), line: lines.span(z.span()) });
            }
            if let Some(l) = &c.l_max {
                scenario.l_max = *l.get_ref();
            }
        }
        for &n in &scenario.starts {
            checkpoint_set(n, scenario.t_min, scenario.t_max)
                .map_err(|e| Error::Config { line: checkpoint_line, message: format!("start cell {n}: {e}") })?;
        }

        match (&raw.base, raw.chain.is_empty()) {
            (Some(_), false) => {
                return Err(lines.err(raw.chain[0].span(), "use either [[chain]] tables or a [base] table"));
            }
            (Some(base), true) => scenario.model = ModelSpec::Base(parse_base(&lines, base)?),
            (None, true) => return Err(Error::Config { line: 1, message: "no [[chain]] or [base] given".into() }),
            (None, false) => {
                let chains = raw
                    .chain
                    .iter()
                    .map(|c| {
                        let r = c.get_ref();
                        let strings = |f: &Field<Vec<Num>>| {
                            f.as_ref().map_or_else(Vec::new, |v| v.get_ref().iter().map(Num::text).collect())
                        };
                        ChainSpec {
                            weights: strings(&r.weights),
                            weight_tail: r.weight_tail.as_ref().map_or("constant 1".into(), |s| s.get_ref().clone()),
                            values: strings(&r.values),
                            value_tail: r.value_tail.as_ref().map_or("zero".into(), |s| s.get_ref().clone()),
                            line: lines.span(c.span()),
                        }
                    })
                    .collect();
                let allow = raw.space.as_ref().and_then(|s| s.allow_nonmonotone).unwrap_or(false);
                scenario.model = ModelSpec::Factor { chains, allow_nonmonotone: allow };
            }
        }

        if let Some(p) = &raw.probes {
            let probes = &mut scenario.probes;
            if let Some(d) = &p.deltas {
                probes.deltas = real_list(&lines, &p.deltas, "deltas")?;
                if probes.deltas.iter().any(|x| !(*x > 0.0)) {
                    return Err(lines.err(d.span(), "deltas must be positive"));
                }
            }
            let set = |dst: &mut usize, src: Option<usize>| {
                if let Some(x) = src {
                    *dst = x;
                }
            };
            set(&mut probes.openness_samples, p.openness_samples);
            set(&mut probes.remark_samples, p.remark_samples);
            set(&mut probes.contraction_samples, p.contraction_samples);
            set(&mut probes.factorization_functions, p.factorization_functions);
            set(&mut probes.random_functions, p.random_functions);
            if let Some(k) = p.factorization_k_max {
                probes.factorization_k_max = k;
            }
            if let Some(c) = p.factorization_cells {
                probes.factorization_cells = c;
            }
        }

        // surface value errors now, with their lines
        if let ModelSpec::Factor { .. } = scenario.model {
            scenario.factor_parts::<f64>()?;
            if scenario.exact {
                scenario.factor_parts::<crate::scalar::Rational>()?;
            }
        }
        if let Some(z) = &scenario.z0 {
            let parsed = parse_complex::<f64>(&z.text)
                .map_err(|e| Error::Config { line: z.line, message: format!("z0: {e}") })?;
            if parsed == Complex::new(0.0, 0.0) {
                return Err(Error::Config { line: z.line, message: "z0 must be nonzero".into() });
            }
        }
        Ok(scenario)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { line: 0, message: format!("cannot read {}: {e}", path.display()) })?;
        Scenario::from_toml(&text)
    }

    fn factor_parts<T: Scalar>(&self) -> Result<(FactorSpace<T>, CellFunction<T>)> {
        let ModelSpec::Factor { chains, allow_nonmonotone } = &self.model else {
            return Err(Error::Precondition("not a factor-space scenario".into()));
        };
        let mut weights = Vec::new();
        let mut values = Vec::new();
        for (j, c) in chains.iter().enumerate() {
            let at = |e: Error| Error::Config { line: c.line, message: format!("chain {j}: {e}") };
            let prefix = c.weights.iter().map(|w| T::parse_real(w)).collect::<Result<Vec<_>>>().map_err(at)?;
            weights.push(ChainWeights { prefix, tail: weight_tail(&c.weight_tail).map_err(at)? });
            let prefix = c.values.iter().map(|z| parse_complex(z)).collect::<Result<Vec<_>>>().map_err(at)?;
            values.push(ChainValues::new(prefix, value_tail(&c.value_tail).map_err(at)?));
        }
        let space = if *allow_nonmonotone {
            FactorSpace::new_unchecked(weights)
        } else {
            FactorSpace::new(weights).map_err(|e| match &e {
                Error::InvalidWeights { chain, .. } => {
                    Error::Config { line: chains[*chain].line, message: e.to_string() }
                }
                _ => e,
            })?
        };
        let v = CellFunction::new(values).map_err(|e| Error::Config { line: chains[0].line, message: e.to_string() })?;
        Ok((space, v))
    }

    /// Builds the partition for a base scenario.
    pub fn partition(&self) -> Result<Option<Partition>> {
        let ModelSpec::Base(b) = &self.model else { return Ok(None) };
        let scan = choose_z0(&b.space, &b.f, b.epsilon, b.directions, b.radii)?;
        build_partition(&b.space, &b.f, &scan, b.chains, b.cell_measure, b.schedule).map(Some)
    }

    pub fn model<T: Scalar>(&self) -> Result<Model<T>> {
        let (space, v, scan_z0, partition) = match &self.model {
            ModelSpec::Factor { .. } => {
                let (space, v) = self.factor_parts::<T>()?;
                (space, v, None, None)
            }
            ModelSpec::Base(b) => {
                let partition = self.partition()?.expect("base scenario");
                let space = lift_space::<T>(&partition.factor_space()?)?;
                let v = lift_function::<T>(&project_p(&partition, &b.f)?)?;
                let z0 = lift_complex::<T>(partition.scan().z0)?;
                (space, v, Some(z0), Some(partition))
            }
        };
        let z0 = match (&self.z0, scan_z0) {
            (Some(z), _) => parse_complex::<T>(&z.text)?,
            (None, Some(z)) => z,
            (None, None) => Complex::new(T::one(), T::zero()),
        };
        Ok(Model { space, v, z0, partition })
    }

    pub fn is_base(&self) -> bool {
        matches!(self.model, ModelSpec::Base(_))
    }
}
