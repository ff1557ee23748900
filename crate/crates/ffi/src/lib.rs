//! C ABI over `spinwave-lab`.
//!
//! Every function returns a [`SwlStatus`]. On failure the message is kept
//! per thread and read with [`swl_last_error`]. Handles are opaque and owned
//! by the caller, who releases them with the matching `_free` function.
//! Panics never cross the boundary; they surface as `SWL_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spinwave_lab::cli::{run_experiment, write_json_lines, ExperimentConfig, ResultRecord};
use spinwave_lab::ed::{spectrum, thermal_summary};
use spinwave_lab::model::{heisenberg_operator, Boundary, LatticeBox, SectorBasis, SpinValue};
use spinwave_lab::Error;

#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwlStatus {
    SWL_OK = 0,
    SWL_NULL_POINTER = 1,
    SWL_INVALID_INPUT = 2,
    SWL_BUDGET = 3,
    SWL_PRECONDITION = 4,
    SWL_NOT_CONVERGED = 5,
    SWL_IO = 6,
    SWL_INTERNAL = 7,
}

/// Eigenvalues of one particle-number sector, ascending.
pub struct SwlSpectrum {
    values: Vec<f64>,
}

/// Records of one experiment run.
pub struct SwlRecords {
    records: Vec<ResultRecord>,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct SwlConstants {
    pub c0: f64,
    pub c3: f64,
    pub c4: f64,
    pub b0: f64,
    pub zeta_3_2: f64,
    pub zeta_5_2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SwlStatus {
    match e {
        Error::InvalidInput(_) | Error::Serde(_) => SwlStatus::SWL_INVALID_INPUT,
        Error::Budget { .. } => SwlStatus::SWL_BUDGET,
        Error::Precondition(_) => SwlStatus::SWL_PRECONDITION,
        Error::NotConverged { .. } => SwlStatus::SWL_NOT_CONVERGED,
        Error::Io(_) => SwlStatus::SWL_IO,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> SwlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwlStatus::SWL_OK,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            SwlStatus::SWL_INTERNAL
        }
    }
}

fn null(what: &str) -> SwlStatus {
    set_error(format!("null pointer: {what}"));
    SwlStatus::SWL_NULL_POINTER
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn swl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Partition function and free energy per site of a box at one beta.
///
/// # Safety
/// `z` and `f` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn swl_free_energy(dim: usize, side: usize, two_s: u32, beta: f64, z: *mut f64, f: *mut f64) -> SwlStatus {
    if z.is_null() || f.is_null() {
        return null("output");
    }
    guard(|| {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(format!("beta must be positive and finite, got {beta}")));
        }
        let t = thermal_summary(&LatticeBox::new(dim, side)?, SpinValue::new(two_s)?, beta)?;
        *z = t.partition_function;
        *f = t.free_energy_per_site;
        Ok(())
    })
}

/// Eigenvalues of the open-boundary Heisenberg Hamiltonian in sector `n`:
/// all of them, or the lowest few when the sector exceeds the dense threshold.
///
/// # Safety
/// `out` must be valid for writes. The handle written there is released
/// with [`swl_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn swl_spectrum_new(dim: usize, side: usize, two_s: u32, n: usize, out: *mut *mut SwlSpectrum) -> SwlStatus {
    if out.is_null() {
        return null("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let basis = SectorBasis::new(&LatticeBox::new(dim, side)?, SpinValue::new(two_s)?, n)?;
        let spec = spectrum(&heisenberg_operator(&basis, Boundary::Open), false, None)?;
        *out = Box::into_raw(Box::new(SwlSpectrum { values: spec.eigenvalues }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a live handle from [`swl_spectrum_new`].
#[no_mangle]
pub unsafe extern "C" fn swl_spectrum_len(h: *const SwlSpectrum) -> usize {
    h.as_ref().map_or(0, |s| s.values.len())
}

/// Copies up to `cap` eigenvalues into `buf`; the count copied goes to `written`.
///
/// # Safety
/// `h` must be a live handle, `buf` valid for `cap` writes and `written` for one.
#[no_mangle]
pub unsafe extern "C" fn swl_spectrum_values(h: *const SwlSpectrum, buf: *mut f64, cap: usize, written: *mut usize) -> SwlStatus {
    let Some(s) = h.as_ref() else { return null("handle") };
    if written.is_null() || (buf.is_null() && cap > 0) {
        return null("output");
    }
    let k = cap.min(s.values.len());
    if k > 0 {
        ptr::copy_nonoverlapping(s.values.as_ptr(), buf, k);
    }
    *written = k;
    SwlStatus::SWL_OK
}

/// # Safety
/// `h` must be null or a handle from [`swl_spectrum_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn swl_spectrum_free(h: *mut SwlSpectrum) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn swl_constants(out: *mut SwlConstants) -> SwlStatus {
    if out.is_null() {
        return null("out");
    }
    guard(|| {
        let c = spinwave_lab::spinwave::constants()?;
        *out = SwlConstants { c0: c.c0, c3: c.c3, c4: c.c4, b0: c.b0, zeta_3_2: c.zeta_3_2, zeta_5_2: c.zeta_5_2 };
        Ok(())
    })
}

/// Runs an experiment described by a JSON config with the same keys as the
/// command-line flags plus `command`. The `out` key is ignored.
///
/// # Safety
/// `config_json` must be a nul-terminated string and `out` valid for writes.
/// The handle is released with [`swl_records_free`].
#[no_mangle]
pub unsafe extern "C" fn swl_run(config_json: *const c_char, out: *mut *mut SwlRecords) -> SwlStatus {
    if config_json.is_null() || out.is_null() {
        return null("argument");
    }
    *out = ptr::null_mut();
    let text = CStr::from_ptr(config_json);
    guard(|| {
        let text = text.to_str().map_err(|e| Error::invalid(e.to_string()))?;
        let mut cfg = ExperimentConfig::from_json(text)?;
        cfg.out = None;
        let records = run_experiment(&cfg)?;
        *out = Box::into_raw(Box::new(SwlRecords { records }));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a live handle from [`swl_run`].
#[no_mangle]
pub unsafe extern "C" fn swl_records_len(h: *const SwlRecords) -> usize {
    h.as_ref().map_or(0, |r| r.records.len())
}

/// 1 when every record is `ok` with all certificates passing, else 0.
///
/// # Safety
/// `h` must be null or a live handle from [`swl_run`].
#[no_mangle]
pub unsafe extern "C" fn swl_records_passed(h: *const SwlRecords) -> i32 {
    h.as_ref().map_or(0, |r| r.records.iter().all(ResultRecord::passed) as i32)
}

/// Records as JSON lines. Release the string with [`swl_string_free`].
///
/// # Safety
/// `h` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn swl_records_json(h: *const SwlRecords, out: *mut *mut c_char) -> SwlStatus {
    let Some(r) = h.as_ref() else { return null("handle") };
    if out.is_null() {
        return null("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let mut buf = Vec::new();
        write_json_lines(&r.records, &mut buf)?;
        *out = CString::new(buf).map_err(|e| Error::Serde(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`swl_run`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn swl_records_free(h: *mut SwlRecords) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `s` must be null or a string from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn swl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
