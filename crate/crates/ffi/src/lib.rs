//! C interface to the `nfv` solver.
//!
//! Solvers are opaque heap handles created by [`nfv_solver_new`] and
//! released by [`nfv_solver_free`]. Every fallible call returns an
//! [`NfvStatus`]; on failure the message for the calling thread is
//! available through [`nfv_last_error_message`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nfv::flux::{FluxModel, FluxVariant, NumericalFluxChoice};
use nfv::grid::Field;
use nfv::models::{reconstruction_error, Preset};
use nfv::nonlocal::{sample_kernels, SampledKernelTables};
use nfv::scheme::{run, Direction, SchemeConfig};
use nfv::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    ShapeMismatch = 4,
    StepFailure = 5,
    Io = 6,
    Panic = 7,
}

/// Time direction for [`nfv_solver_advance`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NfvDirection {
    Forward = 0,
    Reversed = 1,
}

/// Opaque solver state.
pub struct NfvSolver {
    model: Box<dyn FluxModel>,
    tables: SampledKernelTables,
    config: SchemeConfig,
    initial: Field,
    field: Field,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> NfvStatus {
    match err {
        Error::InvalidInput(_) | Error::Parse(_) | Error::Model(_) => NfvStatus::InvalidArgument,
        Error::Config(_) => NfvStatus::Config,
        Error::ShapeMismatch(_) => NfvStatus::ShapeMismatch,
        Error::StepFailure { .. } => NfvStatus::StepFailure,
        Error::Io(_) => NfvStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), NfvStatus>>(f: F) -> NfvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NfvStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic inside nfv");
            NfvStatus::Panic
        }
    }
}

fn fail(err: Error) -> NfvStatus {
    set_error(err.to_string());
    status_of(&err)
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, NfvStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        return Err(NfvStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{name} is not valid UTF-8"));
        NfvStatus::InvalidArgument
    })
}

unsafe fn solver_ref<'a>(s: *const NfvSolver) -> Result<&'a NfvSolver, NfvStatus> {
    s.as_ref().ok_or_else(|| {
        set_error("solver handle is null");
        NfvStatus::NullPointer
    })
}

unsafe fn solver_mut<'a>(s: *mut NfvSolver) -> Result<&'a mut NfvSolver, NfvStatus> {
    s.as_mut().ok_or_else(|| {
        set_error("solver handle is null");
        NfvStatus::NullPointer
    })
}

fn out_ptr<T>(p: *mut T, name: &str) -> Result<(), NfvStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        return Err(NfvStatus::NullPointer);
    }
    Ok(())
}

fn build(preset: &str, n: usize, flux: &str, alpha: f64, cfl: f64) -> Result<NfvSolver, Error> {
    let preset: Preset = preset.parse()?;
    if n == 0 {
        return Err(Error::InvalidInput("grid size must be positive".into()));
    }
    let variant: FluxVariant = flux.parse()?;
    let alpha = match variant {
        FluxVariant::LaxFriedrichsAcg | FluxVariant::LaxFriedrichsSplit => alpha,
        _ => 0.0,
    };
    let grid = preset.grid(n)?;
    let model = preset.flux_model();
    let tables = sample_kernels(&preset.model.kernels(), &grid)?;
    let config =
        SchemeConfig::for_model(NumericalFluxChoice::new(variant, alpha), model.as_ref(), preset.t_end)?.with_cfl(cfl);
    config.validate()?;
    let initial = preset.initial(&grid)?;
    Ok(NfvSolver { model, tables, config, field: initial.clone(), initial })
}

/// Creates a solver for a named preset on an `n x n` periodic grid, loaded
/// with the preset's initial data at time 0.
///
/// `flux` is one of `lxf`, `lxf-split`, `godunov`, `upwind`; `alpha` is
/// ignored by the last two.
#[no_mangle]
pub unsafe extern "C" fn nfv_solver_new(
    preset: *const c_char,
    n: usize,
    flux: *const c_char,
    alpha: f64,
    cfl: f64,
    out: *mut *mut NfvSolver,
) -> NfvStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let preset = str_arg(preset, "preset")?;
        let flux = str_arg(flux, "flux")?;
        let solver = build(preset, n, flux, alpha, cfl).map_err(fail)?;
        *out = Box::into_raw(Box::new(solver));
        Ok(())
    })
}

/// Releases a solver. Null is accepted.
#[no_mangle]
pub unsafe extern "C" fn nfv_solver_free(solver: *mut NfvSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Grid dimensions.
#[no_mangle]
pub unsafe extern "C" fn nfv_solver_shape(solver: *const NfvSolver, n1: *mut usize, n2: *mut usize) -> NfvStatus {
    guard(|| {
        let s = solver_ref(solver)?;
        out_ptr(n1, "n1")?;
        out_ptr(n2, "n2")?;
        *n1 = s.field.grid().n1();
        *n2 = s.field.grid().n2();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nfv_solver_time(solver: *const NfvSolver, t: *mut f64) -> NfvStatus {
    guard(|| {
        let s = solver_ref(solver)?;
        out_ptr(t, "t")?;
        *t = s.field.time();
        Ok(())
    })
}

/// Copies the current cell averages (row-major, `i` fastest) into `buf`,
/// which must hold exactly `n1 * n2` values.
#[no_mangle]
pub unsafe extern "C" fn nfv_solver_get_field(solver: *const NfvSolver, buf: *mut f64, len: usize) -> NfvStatus {
    guard(|| {
        let s = solver_ref(solver)?;
        out_ptr(buf, "buf")?;
        let values = s.field.values();
        if len != values.len() {
            return Err(fail(Error::ShapeMismatch(format!("buffer holds {len} values, field has {}", values.len()))));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(values);
        Ok(())
    })
}

/// Replaces the current state. Values must be finite.
#[no_mangle]
pub unsafe extern "C" fn nfv_solver_set_field(
    solver: *mut NfvSolver,
    buf: *const f64,
    len: usize,
    time: f64,
) -> NfvStatus {
    guard(|| {
        let s = solver_mut(solver)?;
        if buf.is_null() {
            set_error("buf is null");
            return Err(NfvStatus::NullPointer);
        }
        let values = std::slice::from_raw_parts(buf, len).to_vec();
        if !time.is_finite() {
            return Err(fail(Error::InvalidInput(format!("time must be finite, got {time}"))));
        }
        s.field = Field::from_values(*s.field.grid(), 1, values, time).map_err(fail)?;
        Ok(())
    })
}

/// Advances the state from its current time to `t_end`.
#[no_mangle]
pub unsafe extern "C" fn nfv_solver_advance(solver: *mut NfvSolver, t_end: f64, direction: NfvDirection) -> NfvStatus {
    guard(|| {
        let s = solver_mut(solver)?;
        if !(t_end.is_finite() && t_end >= s.field.time()) {
            return Err(fail(Error::InvalidInput(format!(
                "t_end = {t_end} is before the current time {}",
                s.field.time()
            ))));
        }
        let dir = match direction {
            NfvDirection::Forward => Direction::Forward,
            NfvDirection::Reversed => Direction::Reversed,
        };
        let cfg = s.config.with_direction(dir).with_t_end(t_end);
        let out = run(&s.field, &cfg, s.model.as_ref(), &s.tables).map_err(fail)?;
        s.field = out.field;
        Ok(())
    })
}

/// Discrete L1 distance between the current state and the initial data.
#[no_mangle]
pub unsafe extern "C" fn nfv_solver_error(solver: *const NfvSolver, err: *mut f64) -> NfvStatus {
    guard(|| {
        let s = solver_ref(solver)?;
        out_ptr(err, "err")?;
        *err = reconstruction_error(&s.field, &s.initial).map_err(fail)?[0];
        Ok(())
    })
}

/// Encrypts a preset to time `t`, decrypts, and reports the discrete L1
/// reconstruction error. A negative `t` selects the preset's horizon.
#[no_mangle]
pub unsafe extern "C" fn nfv_encdec_error(
    preset: *const c_char,
    n: usize,
    flux: *const c_char,
    alpha: f64,
    t: f64,
    err: *mut f64,
) -> NfvStatus {
    guard(|| {
        out_ptr(err, "err")?;
        let preset_name = str_arg(preset, "preset")?;
        let flux = str_arg(flux, "flux")?;
        let mut s = build(preset_name, n, flux, alpha, 1.0).map_err(fail)?;
        let horizon = if t < 0.0 { s.config.t_end } else { t };
        let forward = run(&s.field, &s.config.with_t_end(horizon), s.model.as_ref(), &s.tables).map_err(fail)?;
        let back = s.config.with_t_end(horizon).with_direction(Direction::Reversed);
        s.field = run(&forward.field.with_time(0.0), &back, s.model.as_ref(), &s.tables).map_err(fail)?.field;
        *err = reconstruction_error(&s.field, &s.initial).map_err(fail)?[0];
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length
/// without the terminator.
#[no_mangle]
pub unsafe extern "C" fn nfv_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn nfv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
