//! C interface to `kdv-asymptotics`.
//!
//! An experiment is created from the same JSON document the command line
//! tool reads and is used through an opaque handle. Every function returns a
//! [`KdvaStatus`]; on failure a description is available from
//! [`kdva_last_error`] on the same thread. Field outputs are written into
//! caller-provided buffers whose length must equal [`kdva_grid_len`].
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kdv_asymptotics::cli::{parse_config, CliError, Experiment};
use kdv_asymptotics::composer::BurstAsymptotics;
use kdv_asymptotics::full_solver::simulate_full;
use kdv_asymptotics::regular::RegularExpansion;
use kdv_asymptotics::verifier::{convergence_sweep, SweepMode, SweepProblem};
use kdv_asymptotics::{EffectiveParams, Error, InitialKind};

/// Result code of every call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdvaStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// The configuration is not valid JSON or not valid UTF-8.
    Parse = 2,
    /// The configuration or a request violates an invariant.
    Validation = 3,
    /// The computation failed.
    Numerical = 4,
    /// An output buffer has the wrong length.
    Buffer = 5,
    /// A panic was caught inside the library.
    Panic = 6,
}

/// Opaque experiment handle.
pub struct KdvaExperiment {
    exp: Experiment,
}

/// Effective constants of the parameter set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvaEffectiveParams {
    /// Squared effective speed.
    pub c2: f64,
    pub c: f64,
    /// Dispersion coefficient of the KdV equations.
    pub dispersion: f64,
    /// Flux coefficient of the KdV equations.
    pub gamma_h: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(KdvaStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Parse(_) | CliError::Usage(_) => KdvaStatus::Parse,
            CliError::Validation { .. } => KdvaStatus::Validation,
            CliError::Numerical(_) | CliError::Io(_) => KdvaStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_validation() {
            KdvaStatus::Validation
        } else {
            KdvaStatus::Numerical
        };
        Failure(status, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> KdvaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            KdvaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(&format!("panic: {message}"));
            KdvaStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(KdvaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn experiment<'a>(handle: *const KdvaExperiment) -> Result<&'a Experiment, Failure> {
    handle.as_ref().map(|h| &h.exp).ok_or_else(|| null("experiment"))
}

unsafe fn buffer<'a>(ptr: *mut f64, len: usize, expected: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    if len != expected {
        return Err(Failure(
            KdvaStatus::Buffer,
            format!("{what} has length {len}, expected {expected}"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

fn copy_fields(u: &[f64], v: &[f64], u_out: &mut [f64], v_out: &mut [f64]) {
    u_out.copy_from_slice(u);
    v_out.copy_from_slice(v);
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn kdva_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kdva_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Parses and validates `config_json` and stores a new handle in `*out`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kdva_experiment_new(config_json: *const c_char, out: *mut *mut KdvaExperiment) -> KdvaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure(KdvaStatus::Parse, format!("config is not UTF-8: {e}")))?;
        let exp = parse_config(text)?;
        *out = Box::into_raw(Box::new(KdvaExperiment { exp }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from [`kdva_experiment_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kdva_experiment_free(handle: *mut KdvaExperiment) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kdva_effective_params(
    handle: *const KdvaExperiment,
    out: *mut KdvaEffectiveParams,
) -> KdvaStatus {
    guard(|| {
        let exp = experiment(handle)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let eff = EffectiveParams::new(&exp.params);
        *out = KdvaEffectiveParams {
            c2: eff.c2,
            c: eff.c,
            dispersion: eff.dispersion,
            gamma_h: eff.gamma_h,
        };
        Ok(())
    })
}

/// Number of nodes of the spatial grid.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kdva_grid_len(handle: *const KdvaExperiment, out: *mut usize) -> KdvaStatus {
    guard(|| {
        let exp = experiment(handle)?;
        *out.as_mut().ok_or_else(|| null("out"))? = exp.grid.len();
        Ok(())
    })
}

/// Node positions of the spatial grid.
///
/// # Safety
/// `x` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kdva_grid_nodes(handle: *const KdvaExperiment, x: *mut f64, len: usize) -> KdvaStatus {
    guard(|| {
        let exp = experiment(handle)?;
        let x = buffer(x, len, exp.grid.len(), "x")?;
        x.copy_from_slice(&exp.grid.nodes());
        Ok(())
    })
}

/// Full solution at `t_end` for the configured `epsilon`.
///
/// # Safety
/// `u` and `v` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kdva_simulate_full(
    handle: *const KdvaExperiment,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> KdvaStatus {
    guard(|| {
        let exp = experiment(handle)?;
        let n = exp.grid.len();
        let (u, v) = (buffer(u, len, n, "u")?, buffer(v, len, n, "v")?);
        let mut config = exp.solver.clone();
        config.output_times = vec![config.t_end];
        let snaps = simulate_full(&exp.initial, &exp.grid, &exp.params, &exp.f, exp.eps, &config)?;
        let last = snaps.last().ok_or(Error::MissingSnapshot(config.t_end))?;
        copy_fields(&last.u, &last.v, u, v);
        Ok(())
    })
}

/// Regular asymptotics `(u0_bar, v0_bar)` at time `t` (smooth data only).
///
/// # Safety
/// `u` and `v` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kdva_simulate_regular(
    handle: *const KdvaExperiment,
    t: f64,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> KdvaStatus {
    guard(|| {
        let exp = experiment(handle)?;
        let n = exp.grid.len();
        let (u, v) = (buffer(u, len, n, "u")?, buffer(v, len, n, "v")?);
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure(KdvaStatus::Validation, format!("t must be finite and >= 0, got {t}")));
        }
        let reg = RegularExpansion::new(&exp.initial, &exp.params, &exp.f)?;
        let fields = reg.fields(&exp.grid, t);
        copy_fields(&fields.u, &fields.v, u, v);
        Ok(())
    })
}

/// Composed KdV asymptotics at `t_end` for the configured `epsilon`
/// (burst data only).
///
/// # Safety
/// `u` and `v` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kdva_simulate_burst(
    handle: *const KdvaExperiment,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> KdvaStatus {
    guard(|| {
        let exp = experiment(handle)?;
        let n = exp.grid.len();
        let (u, v) = (buffer(u, len, n, "u")?, buffer(v, len, n, "v")?);
        if exp.initial.kind != InitialKind::Burst {
            return Err(Failure(KdvaStatus::Validation, "burst asymptotics need burst data".into()));
        }
        let t = exp.solver.t_end;
        let asym = BurstAsymptotics::build(&exp.initial, &exp.params, &exp.f, exp.eps, &exp.kdv_grid, &[t])?;
        let (cu, cv) = asym.compose(&exp.grid.nodes(), t)?;
        copy_fields(&cu, &cv, u, v);
        Ok(())
    })
}

/// Runs the convergence sweep over `epsilon_list` and stores a JSON report
/// in `*out`, to be released with [`kdva_string_free`]. Undefined numbers
/// (such as the fitted order of a one-row sweep) are `null`.
///
/// # Safety
/// `handle` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kdva_sweep_json(handle: *const KdvaExperiment, out: *mut *mut c_char) -> KdvaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let exp = experiment(handle)?;
        let mode = match exp.initial.kind {
            InitialKind::Smooth => SweepMode::SmoothRegular,
            InitialKind::Burst => SweepMode::BurstKdv,
        };
        let problem = SweepProblem {
            params: exp.params,
            f: exp.f.clone(),
            initial: exp.initial,
            grid: exp.grid,
            zeta_grid: exp.kdv_grid,
            solver: exp.solver.clone(),
        };
        let report = convergence_sweep(&problem, &exp.eps_list, mode)?;
        let rows: Vec<serde_json::Value> = report
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "eps": r.eps,
                    "err_l2_u": r.err_l2_u,
                    "err_linf_u": r.err_linf_u,
                    "err_l2_v": r.err_l2_v,
                    "err_linf_v": r.err_linf_v,
                    "pde_residual_linf": r.pde_residual_linf,
                })
            })
            .collect();
        let json = serde_json::json!({
            "mode": format!("{mode:?}"),
            "fitted_order": report.fitted_order,
            "rows": rows,
        });
        let text = CString::new(json.to_string()).map_err(|e| Failure(KdvaStatus::Numerical, e.to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kdva_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
