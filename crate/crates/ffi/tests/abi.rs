use std::ffi::{CStr, CString};
use std::ptr;

use spinwave_lab_ffi::*;

fn last_error() -> String {
    let p = swl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn free_energy_of_two_spins() {
    let (mut z, mut f) = (0.0, 0.0);
    let status = unsafe { swl_free_energy(1, 2, 1, 2.0, &mut z, &mut f) };
    assert_eq!(status, SwlStatus::SWL_OK);
    // Triplet at energy 0, singlet at energy 1.
    let want = 3.0 + (-2.0f64).exp();
    assert!((z - want).abs() < 1e-12);
    assert!((f + want.ln() / 4.0).abs() < 1e-12);
    assert!(swl_last_error().is_null());
}

#[test]
fn errors_map_to_codes_with_messages() {
    let (mut z, mut f) = (0.0, 0.0);
    assert_eq!(unsafe { swl_free_energy(1, 0, 1, 1.0, &mut z, &mut f) }, SwlStatus::SWL_INVALID_INPUT);
    assert!(last_error().contains("invalid"));
    assert_eq!(unsafe { swl_free_energy(2, 5, 1, 1.0, &mut z, &mut f) }, SwlStatus::SWL_BUDGET);
    assert!(last_error().contains("budget"));
    assert_eq!(unsafe { swl_free_energy(1, 2, 1, f64::NAN, &mut z, &mut f) }, SwlStatus::SWL_INVALID_INPUT);
    assert_eq!(unsafe { swl_free_energy(1, 2, 1, 1.0, ptr::null_mut(), &mut f) }, SwlStatus::SWL_NULL_POINTER);
    assert!(last_error().contains("null"));
}

#[test]
fn spectrum_handle_lifecycle() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { swl_spectrum_new(1, 4, 1, 1, &mut h) }, SwlStatus::SWL_OK);
    assert!(!h.is_null());
    let n = unsafe { swl_spectrum_len(h) };
    assert_eq!(n, 4);
    let mut buf = vec![f64::NAN; 8];
    let mut written = 0;
    assert_eq!(unsafe { swl_spectrum_values(h, buf.as_mut_ptr(), buf.len(), &mut written) }, SwlStatus::SWL_OK);
    assert_eq!(written, 4);
    // One magnon on an open 4-chain: S * 2(1 - cos(pi k / 4)).
    for (k, v) in buf[..4].iter().enumerate() {
        let want = 1.0 - (std::f64::consts::PI * k as f64 / 4.0).cos();
        assert!((v - want).abs() < 1e-12, "{v} vs {want}");
    }
    unsafe { swl_spectrum_free(h) };
    unsafe { swl_spectrum_free(ptr::null_mut()) };
    assert_eq!(unsafe { swl_spectrum_len(ptr::null()) }, 0);

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { swl_spectrum_new(1, 4, 1, 9, &mut h) }, SwlStatus::SWL_INVALID_INPUT);
    assert!(h.is_null());
}

#[test]
fn constants_struct() {
    let mut c = SwlConstants::default();
    assert_eq!(unsafe { swl_constants(&mut c) }, SwlStatus::SWL_OK);
    assert!((c.c0 + 0.0301142294871594).abs() < 1e-14);
    assert!((c.c4 - 0.252731009858663).abs() < 1e-12);
    assert!((c.b0 - 1.94157804017524).abs() < 1e-12);
}

#[test]
fn run_from_json_config() {
    let cfg = CString::new(r#"{"command": "gap", "dim": 3, "side": 2}"#).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { swl_run(cfg.as_ptr(), &mut h) }, SwlStatus::SWL_OK);
    assert_eq!(unsafe { swl_records_len(h) }, 1);
    assert_eq!(unsafe { swl_records_passed(h) }, 1);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { swl_records_json(h, &mut text) }, SwlStatus::SWL_OK);
    let json = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    unsafe { swl_string_free(text) };
    unsafe { swl_records_free(h) };
    let records = spinwave_lab::cli::read_json_lines(&json).unwrap();
    assert!((records[0].output("gap").unwrap() - 1.0).abs() < 1e-8);

    let bad = CString::new(r#"{"command": "gap", "bogus": 1}"#).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { swl_run(bad.as_ptr(), &mut h) }, SwlStatus::SWL_INVALID_INPUT);
    assert!(h.is_null());
    assert!(last_error().contains("bogus"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spinwave_lab.h")).unwrap();
    for name in [
        "swl_last_error",
        "swl_free_energy",
        "swl_spectrum_new",
        "swl_spectrum_len",
        "swl_spectrum_values",
        "swl_spectrum_free",
        "swl_constants",
        "swl_run",
        "swl_records_len",
        "swl_records_passed",
        "swl_records_json",
        "swl_records_free",
        "swl_string_free",
        "typedef struct SwlSpectrum SwlSpectrum;",
        "typedef struct SwlRecords SwlRecords;",
        "SWL_NOT_CONVERGED = 5",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let program = r#"
#include "spinwave_lab.h"
int main(void) {
    double z, f;
    SwlSpectrum *h = NULL;
    SwlStatus s = swl_free_energy(1, 2, 1, 1.0, &z, &f);
    if (s == SWL_OK) s = swl_spectrum_new(1, 4, 1, 1, &h);
    swl_spectrum_free(h);
    return (int)s;
}
"#;
    let Ok(mut child) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include"), "-"])
        .stdin(Stdio::piped())
        .spawn()
    else {
        eprintln!("no C compiler on PATH; header syntax not checked");
        return;
    };
    child.stdin.take().unwrap().write_all(program.as_bytes()).unwrap();
    assert!(child.wait().unwrap().success());
}
