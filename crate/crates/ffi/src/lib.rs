//! C ABI for the sinrgrid power-control library.
//!
//! Conventions:
//! - Handles are opaque; create them with `sg_model_new` and release them
//!   with `sg_model_free`.
//! - Every fallible call returns an [`SgStatus`]; out-parameters are written
//!   only when the call returns `SG_STATUS_OK`.
//! - The most recent failure message of the calling thread is available via
//!   [`sg_last_error_message`].
//! - Panics never unwind across the boundary; they are reported as
//!   `SG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sinrgrid::analytic::{critical_gamma, mean_field_power, solve_beta, Branch};
use sinrgrid::erasure::sample_mask;
use sinrgrid::lattice::{gain_profile, interference_sum, ChannelParams, GainProfile, LatticeSpec};
use sinrgrid::numeric::{build_matrix, solve_powers};
use sinrgrid::spectrum::{eigenvalues, max_feasible_gamma_no_erasure, pave_no_erasure};
use sinrgrid::Error;

/// Result of every fallible call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    /// The call succeeded and all out-parameters are valid.
    Ok = 0,
    /// A pointer was null or a parameter was outside its domain.
    InvalidArgument = 1,
    /// The requested configuration admits no positive finite-power solution.
    Infeasible = 2,
    /// No fixed point exists at the requested target (beyond the critical
    /// point).
    NoSolution = 3,
    /// A numeric procedure failed to converge or degenerated.
    Numeric = 4,
    /// A panic was caught at the boundary; the handle remains usable.
    Panic = 5,
}

/// Opaque network model: lattice geometry plus channel constants.
pub struct SgModel {
    spec: LatticeSpec,
    alpha: f64,
    noise: f64,
    profile: GainProfile,
}

/// Stable-branch asymptotic solution at one `(gamma, e)` point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgAnalyticPower {
    /// Fixed-point parameter of the erasure-averaged resolvent.
    pub beta: f64,
    /// Mean transmit power per active link.
    pub p_ave: f64,
    /// Per-link transmit-power variance.
    pub variance: f64,
}

/// Minimum-power solve of one sampled erasure realization.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgSampleStats {
    /// 1 when a positive finite-power solution exists, else 0.
    pub feasible: i32,
    /// Number of links that survived the erasure draw.
    pub active_links: u64,
    /// Mean power over active links; NaN when infeasible.
    pub p_ave: f64,
    /// Power variance (erased links count as zero power, normalized per
    /// active link); NaN when infeasible.
    pub p_var: f64,
    /// Smallest eigenvalue of the active-link coupling matrix; negative when
    /// infeasible, NaN when no links survived.
    pub min_active_eigenvalue: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn fail(status: SgStatus, message: impl Into<String>) -> SgStatus {
    set_error(message);
    status
}

fn status_of(err: &Error) -> SgStatus {
    match err {
        Error::InvalidSpec(_)
        | Error::Asymmetry { .. }
        | Error::Domain(_)
        | Error::Config(_)
        | Error::Schema(_)
        | Error::GridMismatch(_)
        | Error::Io { .. } => SgStatus::InvalidArgument,
        Error::Infeasible { .. } | Error::EmptyNetwork | Error::MeanFieldInfeasible { .. } => {
            SgStatus::Infeasible
        }
        Error::NoSolution => SgStatus::NoSolution,
        Error::SingularSystem { .. } | Error::Divergence { .. } | Error::Edge { .. } => {
            SgStatus::Numeric
        }
    }
}

fn report(err: Error) -> SgStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn guarded(f: impl FnOnce() -> SgStatus) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_owned());
            fail(SgStatus::Panic, format!("caught panic: {message}"))
        }
    }
}

/// Checks an out-pointer and dereferences a model handle.
///
/// Returns `None` (with the error recorded) when either pointer is null.
unsafe fn model_ref<'a>(model: *const SgModel) -> Option<&'a SgModel> {
    if model.is_null() {
        set_error("model handle is null");
        return None;
    }
    Some(&*model)
}

fn params(model: &SgModel, gamma: f64) -> Result<ChannelParams, Error> {
    ChannelParams::new(model.alpha, model.noise, gamma)
}

fn check_erasure(e: f64) -> Result<(), Error> {
    if (0.0..=1.0).contains(&e) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "erasure probability {e} not in [0, 1]"
        )))
    }
}

macro_rules! out_param {
    ($ptr:expr, $name:literal) => {
        if $ptr.is_null() {
            return fail(SgStatus::InvalidArgument, concat!($name, " is null"));
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Static NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn sg_status_name(status: SgStatus) -> *const c_char {
    let name: &CStr = match status {
        SgStatus::Ok => c"ok",
        SgStatus::InvalidArgument => c"invalid argument",
        SgStatus::Infeasible => c"infeasible",
        SgStatus::NoSolution => c"no solution",
        SgStatus::Numeric => c"numeric failure",
        SgStatus::Panic => c"panic",
    };
    name.as_ptr()
}

/// Copies the calling thread's most recent error message into `buf` as a
/// NUL-terminated string, truncating to `cap` bytes, and returns the full
/// message length in bytes (excluding the NUL). `buf` may be null (or `cap`
/// zero) to query the length alone.
///
/// # Safety
///
/// When `buf` is non-null it must point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sg_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a model of `side^dim` links on a torus with antenna scale `s`,
/// pathloss exponent `alpha`, and noise power `noise`; writes the handle to
/// `out_model`.
///
/// # Safety
///
/// `out_model` must be a valid pointer. The returned handle must be released
/// with [`sg_model_free`].
#[no_mangle]
pub unsafe extern "C" fn sg_model_new(
    dim: u32,
    side: u32,
    s: f64,
    alpha: f64,
    noise: f64,
    out_model: *mut *mut SgModel,
) -> SgStatus {
    out_param!(out_model, "out_model");
    guarded(|| {
        let spec = match LatticeSpec::new(dim as usize, side as usize, s) {
            Ok(spec) => spec,
            Err(err) => return report(err),
        };
        let reference = match ChannelParams::new(alpha, noise, 1.0) {
            Ok(p) => p,
            Err(err) => return report(err),
        };
        let profile = gain_profile(&spec, &reference);
        let model = Box::new(SgModel {
            spec,
            alpha,
            noise,
            profile,
        });
        *out_model = Box::into_raw(model);
        SgStatus::Ok
    })
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
///
/// `model` must be null or a handle obtained from [`sg_model_new`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sg_model_free(model: *mut SgModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes the number of links in the model to `out_links`.
///
/// # Safety
///
/// `model` must be a live handle and `out_links` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_model_links(model: *const SgModel, out_links: *mut u64) -> SgStatus {
    out_param!(out_links, "out_links");
    let Some(model) = model_ref(model) else {
        return SgStatus::InvalidArgument;
    };
    *out_links = model.spec.n() as u64;
    SgStatus::Ok
}

/// Writes the total interference gain seen by one link (the lattice sum of
/// the gain profile over all other sites) to `out_sum`.
///
/// # Safety
///
/// `model` must be a live handle and `out_sum` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_interference_sum(
    model: *const SgModel,
    out_sum: *mut f64,
) -> SgStatus {
    out_param!(out_sum, "out_sum");
    let Some(model) = model_ref(model) else {
        return SgStatus::InvalidArgument;
    };
    guarded(|| {
        *out_sum = interference_sum(&model.profile);
        SgStatus::Ok
    })
}

/// Writes the largest supportable target of the fully active network to
/// `out_gamma`.
///
/// # Safety
///
/// `model` must be a live handle and `out_gamma` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_max_feasible_gamma(
    model: *const SgModel,
    out_gamma: *mut f64,
) -> SgStatus {
    out_param!(out_gamma, "out_gamma");
    let Some(model) = model_ref(model) else {
        return SgStatus::InvalidArgument;
    };
    guarded(|| {
        *out_gamma = max_feasible_gamma_no_erasure(&model.profile);
        SgStatus::Ok
    })
}

/// Writes the critical target at erasure probability `e` (the edge beyond
/// which no finite-power solution exists) to `out_gamma`. Requires
/// `0 < e < 1`; at `e = 0` use [`sg_max_feasible_gamma`].
///
/// # Safety
///
/// `model` must be a live handle and `out_gamma` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_critical_gamma(
    model: *const SgModel,
    e: f64,
    out_gamma: *mut f64,
) -> SgStatus {
    out_param!(out_gamma, "out_gamma");
    let Some(model) = model_ref(model) else {
        return SgStatus::InvalidArgument;
    };
    guarded(|| {
        if !(e > 0.0 && e < 1.0) {
            return fail(
                SgStatus::InvalidArgument,
                format!("erasure probability {e} not in (0, 1)"),
            );
        }
        *out_gamma = critical_gamma(&model.profile, model.noise, e);
        SgStatus::Ok
    })
}

/// Writes the stable-branch asymptotic solution at `(gamma, e)` to `out`.
/// Returns `SG_STATUS_NO_SOLUTION` beyond the critical target. Requires
/// `0 <= e < 1`.
///
/// # Safety
///
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_analytic_power(
    model: *const SgModel,
    gamma: f64,
    e: f64,
    out: *mut SgAnalyticPower,
) -> SgStatus {
    out_param!(out, "out");
    let Some(model) = model_ref(model) else {
        return SgStatus::InvalidArgument;
    };
    guarded(|| {
        if !(0.0..1.0).contains(&e) {
            return fail(
                SgStatus::InvalidArgument,
                format!("erasure probability {e} not in [0, 1)"),
            );
        }
        let params = match params(model, gamma) {
            Ok(p) => p,
            Err(err) => return report(err),
        };
        let spectrum = match eigenvalues(&model.profile, &params) {
            Ok(s) => s,
            Err(err) => return report(err),
        };
        if e == 0.0 {
            if spectrum.lambda0() <= 0.0 {
                return fail(
                    SgStatus::NoSolution,
                    format!("target {gamma} exceeds the fully active feasibility bound"),
                );
            }
            let p_ave = match pave_no_erasure(&spectrum) {
                Ok(p) => p,
                Err(err) => return report(err),
            };
            *out = SgAnalyticPower {
                beta: 0.0,
                p_ave,
                variance: 0.0,
            };
            return SgStatus::Ok;
        }
        let roots = match solve_beta(e, &spectrum) {
            Ok(r) => r,
            Err(err) => return report(err),
        };
        let Some(stable) = roots.iter().rev().find(|r| r.branch == Branch::Stable) else {
            return fail(
                SgStatus::NoSolution,
                "no stable fixed-point branch at this target",
            );
        };
        *out = SgAnalyticPower {
            beta: stable.beta,
            p_ave: stable.p_ave,
            variance: stable.variance,
        };
        SgStatus::Ok
    })
}

/// Writes the mean-field power estimate at `(gamma, e)` to `out_power`.
/// Returns `SG_STATUS_INFEASIBLE` at or beyond the mean-field singular
/// target.
///
/// # Safety
///
/// `model` must be a live handle and `out_power` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_mean_field_power(
    model: *const SgModel,
    gamma: f64,
    e: f64,
    out_power: *mut f64,
) -> SgStatus {
    out_param!(out_power, "out_power");
    let Some(model) = model_ref(model) else {
        return SgStatus::InvalidArgument;
    };
    guarded(|| {
        let params = match params(model, gamma) {
            Ok(p) => p,
            Err(err) => return report(err),
        };
        match mean_field_power(&model.profile, &params, e) {
            Ok(power) => {
                *out_power = power;
                SgStatus::Ok
            }
            Err(err) => report(err),
        }
    })
}

/// Draws one erasure realization from `seed`, solves the surviving network
/// at target `gamma`, and writes the outcome to `out_stats`.
///
/// Infeasibility of the sampled network is not an error: the call returns
/// `SG_STATUS_OK` with `feasible = 0` and diagnostic fields filled in.
///
/// # Safety
///
/// `model` must be a live handle and `out_stats` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_sample_power(
    model: *const SgModel,
    gamma: f64,
    e: f64,
    seed: u64,
    out_stats: *mut SgSampleStats,
) -> SgStatus {
    out_param!(out_stats, "out_stats");
    let Some(model) = model_ref(model) else {
        return SgStatus::InvalidArgument;
    };
    guarded(|| {
        if let Err(err) = check_erasure(e) {
            return report(err);
        }
        let params = match params(model, gamma) {
            Ok(p) => p,
            Err(err) => return report(err),
        };
        let mask = sample_mask(model.spec.n(), e, seed);
        let active = mask.active_count() as u64;
        let matrix = build_matrix(&model.profile, &params);
        match solve_powers(&matrix, &mask) {
            Ok(solution) => {
                *out_stats = SgSampleStats {
                    feasible: 1,
                    active_links: active,
                    p_ave: solution.p_ave,
                    p_var: solution.p_var,
                    min_active_eigenvalue: solution.min_active_eigenvalue,
                };
                SgStatus::Ok
            }
            Err(Error::Infeasible {
                min_active_eigenvalue,
                ..
            }) => {
                *out_stats = SgSampleStats {
                    feasible: 0,
                    active_links: active,
                    p_ave: f64::NAN,
                    p_var: f64::NAN,
                    min_active_eigenvalue,
                };
                SgStatus::Ok
            }
            Err(Error::EmptyNetwork) => {
                *out_stats = SgSampleStats {
                    feasible: 0,
                    active_links: 0,
                    p_ave: f64::NAN,
                    p_var: f64::NAN,
                    min_active_eigenvalue: f64::NAN,
                };
                SgStatus::Ok
            }
            Err(err) => report(err),
        }
    })
}
