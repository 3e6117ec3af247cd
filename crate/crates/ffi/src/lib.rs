//! C interface to `jchsim`.
//!
//! Every function returns a [`JchsimStatus`]. On failure the message is
//! available from [`jchsim_last_error`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use jchsim::analytic_dimer::{entropy_time_avg, variance_time_avg};
use jchsim::driver::{detect_resonances, sweep, Config, DetectionOptions, Mode, ResonanceReport, SweepResult};
use jchsim::effective::dimer_effective;
use jchsim::polariton::JcParams;
use jchsim::preparation::initialize_with_ancilla;
use jchsim::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JchsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Numerical = 5,
    LowFidelity = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JchsimMode {
    Closed = 0,
    Open = 1,
}

/// Run configuration.
pub struct JchsimConfig(Config);

/// Finished detuning sweep.
pub struct JchsimSweep(SweepResult);

/// Resonances detected on a sweep.
pub struct JchsimReport {
    report: ResonanceReport,
    curves: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> JchsimStatus {
    match e {
        Error::Config { .. } => JchsimStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => JchsimStatus::Io,
        Error::LowFidelity { .. } => JchsimStatus::LowFidelity,
        Error::StepSizeFailure { .. } | Error::NotHermitian(_) | Error::UnphysicalState | Error::TrajectoryTooShort { .. } => {
            JchsimStatus::Numerical
        }
        Error::SiteOutOfRange { .. } => JchsimStatus::OutOfRange,
        _ => JchsimStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (JchsimStatus, String)>) -> JchsimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            JchsimStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            JchsimStatus::Panic
        }
    }
}

fn lib(e: Error) -> (JchsimStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (JchsimStatus, String) {
    (JchsimStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (JchsimStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (JchsimStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (JchsimStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (JchsimStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last call on this thread, empty after success. Valid until
/// the next call.
#[no_mangle]
pub extern "C" fn jchsim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn jchsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Time-averaged dimer variance and linear entropy.
///
/// # Safety
/// `var` and `entropy` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_dimer_analytic(
    omega: f64,
    g: f64,
    delta_over_g: f64,
    j: f64,
    var: *mut f64,
    entropy: *mut f64,
) -> JchsimStatus {
    guard(|| {
        let var = out(var, "var")?;
        let entropy = out(entropy, "entropy")?;
        let p = JcParams::from_ratio(omega, delta_over_g, g).map_err(lib)?;
        if !(j >= 0.0 && j.is_finite()) {
            return Err((JchsimStatus::InvalidArgument, format!("J must be non-negative, got {j}")));
        }
        let h = dimer_effective(&p, j);
        *var = variance_time_avg(&h, j);
        *entropy = entropy_time_avg(&h, j);
        Ok(())
    })
}

/// Default configuration of `mode`.
///
/// # Safety
/// `cfg` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_config_default(mode: JchsimMode, cfg: *mut *mut JchsimConfig) -> JchsimStatus {
    guard(|| {
        let cfg = out(cfg, "cfg")?;
        let m = match mode {
            JchsimMode::Closed => Mode::Closed,
            JchsimMode::Open => Mode::Open,
        };
        *cfg = Box::into_raw(Box::new(JchsimConfig(Config::defaults(m))));
        Ok(())
    })
}

/// Configuration from TOML text; missing keys take the defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `cfg` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_config_from_toml(toml: *const c_char, cfg: *mut *mut JchsimConfig) -> JchsimStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let cfg = out(cfg, "cfg")?;
        let c = Config::load(Some(text), &[]).map_err(lib)?;
        *cfg = Box::into_raw(Box::new(JchsimConfig(c)));
        Ok(())
    })
}

/// Sets `key` (dotted, e.g. `physics.g`) to a TOML literal. A bare word is a string.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn jchsim_config_set(cfg: *mut JchsimConfig, key: *const c_char, value: *const c_char) -> JchsimStatus {
    guard(|| {
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        let cfg = out(cfg, "cfg")?;
        cfg.0 = cfg.0.with_value(key, value).map_err(lib)?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jchsim_config_free(cfg: *mut JchsimConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the sweep described by `cfg`. Failed grid points are recorded, not fatal.
///
/// # Safety
/// `cfg` must be a live handle and `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_sweep_run(cfg: *const JchsimConfig, result: *mut *mut JchsimSweep) -> JchsimStatus {
    guard(|| {
        let cfg = handle(cfg, "cfg")?;
        let result = out(result, "result")?;
        let r = sweep(&cfg.0).map_err(lib)?;
        *result = Box::into_raw(Box::new(JchsimSweep(r)));
        Ok(())
    })
}

/// Grid points and site pairs `(0, j)` of a sweep.
///
/// # Safety
/// `sweep` must be a live handle; the outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_sweep_shape(sweep: *const JchsimSweep, points: *mut usize, pairs: *mut usize) -> JchsimStatus {
    guard(|| {
        let s = handle(sweep, "sweep")?;
        *out(points, "points")? = s.0.records.len();
        *out(pairs, "pairs")? = s.0.pair_labels.len();
        Ok(())
    })
}

/// Row `index`: detuning, analytic dimer variance, and `|C_{0j}|` and
/// `|C_{0j}|/Var` for each pair. `correlations` and `ratios` hold `capacity`
/// entries each and may be null. `failed` is set to 1 for a failed point.
///
/// # Safety
/// `sweep` must be a live handle; non-null pointers valid for the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_sweep_row(
    sweep: *const JchsimSweep,
    index: usize,
    delta_over_g: *mut f64,
    var_dimer: *mut f64,
    correlations: *mut f64,
    ratios: *mut f64,
    capacity: usize,
    failed: *mut i32,
) -> JchsimStatus {
    guard(|| {
        let s = handle(sweep, "sweep")?;
        let r = s.0.records.get(index).ok_or_else(|| {
            (JchsimStatus::OutOfRange, format!("row {index} out of range ({} rows)", s.0.records.len()))
        })?;
        *out(delta_over_g, "delta_over_g")? = r.delta_over_g;
        *out(var_dimer, "var_dimer")? = r.var_dimer_analytic;
        *out(failed, "failed")? = i32::from(r.failure.is_some());
        let n = r.correlations.len();
        if (!correlations.is_null() || !ratios.is_null()) && capacity < n {
            return Err((JchsimStatus::InvalidArgument, format!("capacity {capacity} below {n} pairs")));
        }
        if !correlations.is_null() {
            let dst = std::slice::from_raw_parts_mut(correlations, n);
            for (d, c) in dst.iter_mut().zip(&r.correlations) {
                *d = c.abs();
            }
        }
        if !ratios.is_null() {
            std::slice::from_raw_parts_mut(ratios, n).copy_from_slice(&r.ratios());
        }
        Ok(())
    })
}

/// Writes the sweep as CSV.
///
/// # Safety
/// `sweep` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn jchsim_sweep_write_csv(sweep: *const JchsimSweep, path: *const c_char) -> JchsimStatus {
    guard(|| {
        let s = handle(sweep, "sweep")?;
        let path = str_arg(path, "path")?;
        let f = std::fs::File::create(path).map_err(|e| (JchsimStatus::Io, format!("cannot write {path}: {e}")))?;
        s.0.write_csv(std::io::BufWriter::new(f)).map_err(lib)
    })
}

/// # Safety
/// `sweep` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jchsim_sweep_free(sweep: *mut JchsimSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Resonances of the ratio curves of `sweep`.
///
/// # Safety
/// `sweep` must be a live handle and `report` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_detect(
    sweep: *const JchsimSweep,
    prominence_fraction: f64,
    anti_resonance_tolerance: f64,
    report: *mut *mut JchsimReport,
) -> JchsimStatus {
    guard(|| {
        let s = handle(sweep, "sweep")?;
        let report = out(report, "report")?;
        if !(prominence_fraction >= 0.0) || !(anti_resonance_tolerance >= 0.0) {
            return Err((JchsimStatus::InvalidArgument, "tolerances must be non-negative".into()));
        }
        let opts = DetectionOptions { prominence_fraction, anti_resonance_tolerance };
        let r = detect_resonances(&s.0, &opts);
        let curves = s.0.ratio_curves().into_iter().map(|(name, _)| name).collect();
        *report = Box::into_raw(Box::new(JchsimReport { report: r, curves }));
        Ok(())
    })
}

/// Number of resonances and anti-resonances.
///
/// # Safety
/// `report` must be a live handle; the outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_report_counts(
    report: *const JchsimReport,
    resonances: *mut usize,
    anti_resonances: *mut usize,
) -> JchsimStatus {
    guard(|| {
        let r = handle(report, "report")?;
        *out(resonances, "resonances")? = r.report.resonances.len();
        *out(anti_resonances, "anti_resonances")? = r.report.anti_resonances.len();
        Ok(())
    })
}

/// Resonance `index`: pair index (0 for `ij`, 1 for `ik`, ...), refined and
/// grid positions, prominence.
///
/// # Safety
/// `report` must be a live handle; the outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_report_resonance(
    report: *const JchsimReport,
    index: usize,
    pair: *mut usize,
    position: *mut f64,
    grid_position: *mut f64,
    prominence: *mut f64,
) -> JchsimStatus {
    guard(|| {
        let r = handle(report, "report")?;
        let p = r.report.resonances.get(index).ok_or_else(|| (JchsimStatus::OutOfRange, format!("resonance {index} out of range")))?;
        *out(pair, "pair")? = r.curves.iter().position(|c| *c == p.curve).unwrap_or(usize::MAX);
        *out(position, "position")? = p.position;
        *out(grid_position, "grid_position")? = p.grid_position;
        *out(prominence, "prominence")? = p.prominence;
        Ok(())
    })
}

/// Position of anti-resonance `index`.
///
/// # Safety
/// `report` must be a live handle; `position` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_report_anti_resonance(report: *const JchsimReport, index: usize, position: *mut f64) -> JchsimStatus {
    guard(|| {
        let r = handle(report, "report")?;
        let a = r
            .report
            .anti_resonances
            .get(index)
            .ok_or_else(|| (JchsimStatus::OutOfRange, format!("anti-resonance {index} out of range")))?;
        *out(position, "position")? = a.position;
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn jchsim_report_free(report: *mut JchsimReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Ancilla preparation at `physics.delta_over_g` with the settings of `cfg`.
/// A result below the fidelity floor returns `LowFidelity`.
///
/// # Safety
/// `cfg` must be a live handle; the outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn jchsim_init_protocol(cfg: *const JchsimConfig, fidelity: *mut f64, upper_leakage: *mut f64) -> JchsimStatus {
    guard(|| {
        let c = &handle(cfg, "cfg")?.0;
        let fidelity = out(fidelity, "fidelity")?;
        let upper_leakage = out(upper_leakage, "upper_leakage")?;
        let p = c.params(c.physics.delta_over_g).map_err(lib)?;
        let r = initialize_with_ancilla(&p, &c.preparation_spec()).map_err(lib)?;
        *fidelity = r.fidelity;
        *upper_leakage = r.upper_leakage;
        Ok(())
    })
}
