//! C ABI over `cesaro-core`.
//!
//! Models are opaque handles created from scenario text or files and released
//! with [`cesaro_model_free`]. Every fallible call returns a [`CesaroStatus`];
//! on failure [`cesaro_last_error`] describes the most recent error on the
//! calling thread. Strings returned by the library are freed with
//! [`cesaro_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cesaro_core::cesaro::{cesaro_block, diameter_estimate};
use cesaro_core::error::Error;
use cesaro_core::norms::{norm_l1, norm_l1_plus_linf, norm_linf, Extended};
use cesaro_core::operator::{floor_log3, iterate_value, sigma, sign_flip_count};
use cesaro_core::residuality::margin;
use cesaro_core::scenario::{Model, Scenario};
use cesaro_core::space::{CellIndex, ChainId};
use cesaro_core::verify::{run_suite, Suite};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesaroStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Infeasible = 4,
    Overflow = 5,
    Io = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesaroSuite {
    Theorem1 = 0,
    Lemmas = 1,
    Norms = 2,
    Residuality = 3,
    All = 4,
}

/// A loaded scenario with its factor space, function and `z0`.
pub struct CesaroModel {
    scenario: Scenario,
    model: Model<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> CesaroStatus {
    match e {
        Error::Config { .. } | Error::Parse(_) | Error::EmptyCheckpointRange { .. } | Error::CheckpointTooSmall { .. } => {
            CesaroStatus::Config
        }
        Error::NoZ0Found { .. }
        | Error::ComplementTooLarge(_)
        | Error::MisalignedCellMeasure { .. }
        | Error::MisalignedFunction(_)
        | Error::Precondition(_) => CesaroStatus::Infeasible,
        Error::IndexOverflow(_) => CesaroStatus::Overflow,
        _ => CesaroStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (CesaroStatus, String)>) -> CesaroStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CesaroStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            CesaroStatus::Internal
        }
    }
}

fn core(e: Error) -> (CesaroStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CesaroStatus, String) {
    (CesaroStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (CesaroStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (CesaroStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn model<'a>(p: *const CesaroModel) -> Result<&'a CesaroModel, (CesaroStatus, String)> {
    p.as_ref().ok_or_else(|| null("model"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (CesaroStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn chain_of(m: &CesaroModel, chain: usize) -> Result<ChainId, (CesaroStatus, String)> {
    if chain < m.model.v.chain_count() {
        Ok(ChainId(chain))
    } else {
        Err(core(Error::InvalidChain { chain, chain_count: m.model.v.chain_count() }))
    }
}

fn build(scenario: Scenario, out: *mut *mut CesaroModel) -> Result<(), (CesaroStatus, String)> {
    let model = scenario.model::<f64>().map_err(core)?;
    let handle = Box::into_raw(Box::new(CesaroModel { scenario, model }));
    // SAFETY: out was checked non-null by the caller.
    unsafe { out.write(handle) };
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cesaro_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses scenario TOML text into a new model.
///
/// # Safety
/// `toml` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_model_from_toml(toml: *const c_char, out: *mut *mut CesaroModel) -> CesaroStatus {
    guard(|| {
        let toml = text(toml, "toml")?;
        if out.is_null() {
            return Err(null("out"));
        }
        build(Scenario::from_toml(toml).map_err(core)?, out)
    })
}

/// Loads a scenario file into a new model.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_model_from_file(path: *const c_char, out: *mut *mut CesaroModel) -> CesaroStatus {
    guard(|| {
        let path = text(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let contents = std::fs::read_to_string(path)
            .map_err(|e| (CesaroStatus::Io, format!("cannot read {path}: {e}")))?;
        build(Scenario::from_toml(&contents).map_err(core)?, out)
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cesaro_model_free(model: *mut CesaroModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of chains, or 0 for a null model.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cesaro_model_chain_count(model: *const CesaroModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.v.chain_count())
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_floor_log3(x: u64, out: *mut u32) -> CesaroStatus {
    guard(|| write(out, floor_log3(x).map_err(core)?, "out"))
}

/// Number of powers of three in `(n, n+m]`.
#[no_mangle]
pub extern "C" fn cesaro_sign_flip_count(n: u64, m: u64) -> u32 {
    sign_flip_count(n, m)
}

/// `σ(n, m)` as `1` or `-1`.
#[no_mangle]
pub extern "C" fn cesaro_sigma(n: u64, m: u64) -> i8 {
    sigma(n, m).as_i8()
}

/// `(S^k v)(chain, n)`.
///
/// # Safety
/// `model` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_iterate(
    model: *const CesaroModel,
    chain: usize,
    n: u64,
    k: u64,
    re: *mut f64,
    im: *mut f64,
) -> CesaroStatus {
    guard(|| {
        let m = self::model(model)?;
        let z = iterate_value(&m.model.v, CellIndex { chain: chain_of(m, chain)?, n }, k).map_err(core)?;
        write(re, z.re, "re")?;
        write(im, z.im, "im")
    })
}

/// Blockwise Cesàro average `A_N(v; chain, n)` with `N = count`.
///
/// # Safety
/// `model` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_average(
    model: *const CesaroModel,
    chain: usize,
    n: u64,
    count: u64,
    re: *mut f64,
    im: *mut f64,
) -> CesaroStatus {
    guard(|| {
        let m = self::model(model)?;
        let z = cesaro_block(&m.model.v, CellIndex { chain: chain_of(m, chain)?, n }, count).map_err(core)?;
        write(re, z.re, "re")?;
        write(im, z.im, "im")
    })
}

/// Diameter estimate of the averages at cell `(chain, 0)` over checkpoints
/// `t_min..=t_max`.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_diameter(
    model: *const CesaroModel,
    chain: usize,
    t_min: u32,
    t_max: u32,
    out: *mut f64,
) -> CesaroStatus {
    guard(|| {
        let m = self::model(model)?;
        let d = diameter_estimate(&m.model.v, chain_of(m, chain)?, t_min, t_max).map_err(core)?;
        write(out, d.value, "out")
    })
}

/// Minimum diameter estimate over all chains.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_margin(model: *const CesaroModel, t_min: u32, t_max: u32, out: *mut f64) -> CesaroStatus {
    guard(|| {
        let m = self::model(model)?;
        write(out, margin(&m.model.v, t_min, t_max).map_err(core)?.margin, "out")
    })
}

/// L¹, L∞ and L¹+L∞ norms of the model function. An infinite L¹ norm is
/// reported as `INFINITY`.
///
/// # Safety
/// `model` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_norms(
    model: *const CesaroModel,
    l1: *mut f64,
    linf: *mut f64,
    l1_plus_linf: *mut f64,
) -> CesaroStatus {
    guard(|| {
        let m = self::model(model)?;
        let a = match norm_l1(&m.model.space, &m.model.v).map_err(core)? {
            Extended::Finite(x) => x,
            Extended::Infinite => f64::INFINITY,
        };
        let b = norm_linf(&m.model.space, &m.model.v).map_err(core)?;
        let c = norm_l1_plus_linf(&m.model.space, &m.model.v).map_err(core)?;
        write(l1, a, "l1")?;
        write(linf, b, "linf")?;
        write(l1_plus_linf, c, "l1_plus_linf")
    })
}

/// Runs a verification suite with the scenario's seed. Writes the rendered
/// report (free with [`cesaro_string_free`]) and the number of failed checks.
///
/// # Safety
/// `model` must be a live handle; `report` and `failed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cesaro_verify(
    model: *const CesaroModel,
    suite: CesaroSuite,
    report: *mut *mut c_char,
    failed: *mut usize,
) -> CesaroStatus {
    guard(|| {
        let m = self::model(model)?;
        if report.is_null() {
            return Err(null("report"));
        }
        let suite = match suite {
            CesaroSuite::Theorem1 => Suite::Theorem1,
            CesaroSuite::Lemmas => Suite::Lemmas,
            CesaroSuite::Norms => Suite::Norms,
            CesaroSuite::Residuality => Suite::Residuality,
            CesaroSuite::All => Suite::All,
        };
        let r = run_suite(&m.scenario, suite, None);
        write(failed, r.failed(), "failed")?;
        let text = CString::new(r.render()).map_err(|_| (CesaroStatus::Internal, "nul in report".into()))?;
        write(report, text.into_raw(), "report")
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cesaro_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
