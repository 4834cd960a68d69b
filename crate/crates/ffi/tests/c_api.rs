use std::ffi::{c_char, CStr, CString};
use std::ptr;

use nfv_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        nfv_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn new_solver(preset: &str, n: usize, flux: &str) -> *mut NfvSolver {
    let preset = CString::new(preset).unwrap();
    let flux = CString::new(flux).unwrap();
    let mut s = ptr::null_mut();
    let st = unsafe { nfv_solver_new(preset.as_ptr(), n, flux.as_ptr(), 1.0, 1.0, &mut s) };
    assert_eq!(st, NfvStatus::Ok, "{}", last_error());
    assert!(!s.is_null());
    s
}

#[test]
fn lifecycle_and_field_access() {
    let s = new_solver("encdec-smooth", 16, "upwind");
    let (mut n1, mut n2) = (0, 0);
    unsafe {
        assert_eq!(nfv_solver_shape(s, &mut n1, &mut n2), NfvStatus::Ok);
        assert_eq!((n1, n2), (16, 16));
        let mut buf = vec![0.0; n1 * n2];
        assert_eq!(nfv_solver_get_field(s, buf.as_mut_ptr(), buf.len()), NfvStatus::Ok);
        // midpoint sample of the smooth profile at cell (0, 0)
        let c = -1.0 + 1.0 / 16.0;
        let pi = std::f64::consts::PI;
        let expected = (pi * c + pi / 3.0).sin().powi(2);
        assert!((buf[0] - expected).abs() < 1e-15);

        let mut t = -1.0;
        assert_eq!(nfv_solver_advance(s, 0.1, NfvDirection::Forward), NfvStatus::Ok);
        assert_eq!(nfv_solver_time(s, &mut t), NfvStatus::Ok);
        assert_eq!(t, 0.1);

        let constant = vec![2.0; 256];
        assert_eq!(nfv_solver_set_field(s, constant.as_ptr(), 256, 0.0), NfvStatus::Ok);
        assert_eq!(nfv_solver_advance(s, 0.05, NfvDirection::Reversed), NfvStatus::Ok);
        assert_eq!(nfv_solver_get_field(s, buf.as_mut_ptr(), buf.len()), NfvStatus::Ok);
        assert!(buf.iter().all(|v| (v - 2.0).abs() < 1e-13));
        nfv_solver_free(s);
    }
}

#[test]
fn encrypt_decrypt_round_trip_matches_the_handle_path() {
    let s = new_solver("encdec-smooth", 20, "lxf");
    let preset = CString::new("encdec-smooth").unwrap();
    let flux = CString::new("lxf").unwrap();
    let mut direct = 0.0;
    let mut via_handle = 0.0;
    unsafe {
        assert_eq!(nfv_encdec_error(preset.as_ptr(), 20, flux.as_ptr(), 1.0, -1.0, &mut direct), NfvStatus::Ok);
        assert_eq!(nfv_solver_advance(s, 0.3, NfvDirection::Forward), NfvStatus::Ok);
        let mut buf = vec![0.0; 400];
        nfv_solver_get_field(s, buf.as_mut_ptr(), 400);
        assert_eq!(nfv_solver_set_field(s, buf.as_ptr(), 400, 0.0), NfvStatus::Ok);
        assert_eq!(nfv_solver_advance(s, 0.3, NfvDirection::Reversed), NfvStatus::Ok);
        assert_eq!(nfv_solver_error(s, &mut via_handle), NfvStatus::Ok);
        nfv_solver_free(s);
    }
    assert!(direct > 0.0);
    assert_eq!(direct, via_handle);
}

#[test]
fn errors_are_reported() {
    let good = CString::new("encdec-smooth").unwrap();
    let bad = CString::new("traffic").unwrap();
    let godunov = CString::new("godunov").unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(nfv_solver_new(bad.as_ptr(), 8, godunov.as_ptr(), 0.0, 1.0, &mut s), NfvStatus::Config);
        assert!(s.is_null());
        assert!(last_error().contains("traffic"));
        assert_eq!(nfv_solver_new(ptr::null(), 8, godunov.as_ptr(), 0.0, 1.0, &mut s), NfvStatus::NullPointer);
        assert_eq!(nfv_solver_new(good.as_ptr(), 8, godunov.as_ptr(), 0.0, 0.0, &mut s), NfvStatus::Config);
        assert_eq!(
            nfv_solver_new(good.as_ptr(), 8, godunov.as_ptr(), 0.0, 1.0, ptr::null_mut()),
            NfvStatus::NullPointer
        );

        let s = new_solver("encdec-smooth", 8, "godunov");
        let mut buf = vec![0.0; 10];
        assert_eq!(nfv_solver_get_field(s, buf.as_mut_ptr(), 10), NfvStatus::ShapeMismatch);
        buf[0] = f64::NAN;
        assert_eq!(nfv_solver_set_field(s, buf.as_ptr(), 64.min(buf.len()), 0.0), NfvStatus::ShapeMismatch);
        let nan = vec![f64::NAN; 64];
        assert_eq!(nfv_solver_set_field(s, nan.as_ptr(), 64, 0.0), NfvStatus::InvalidArgument);
        assert_eq!(nfv_solver_advance(s, -1.0, NfvDirection::Forward), NfvStatus::InvalidArgument);
        let mut t = 0.0;
        assert_eq!(nfv_solver_time(ptr::null(), &mut t), NfvStatus::NullPointer);
        nfv_solver_free(s);
        nfv_solver_free(ptr::null_mut());
    }
}

#[test]
fn message_truncation_and_version() {
    let bad = CString::new("nope").unwrap();
    let flux = CString::new("upwind").unwrap();
    let mut s = ptr::null_mut();
    unsafe {
        nfv_solver_new(bad.as_ptr(), 8, flux.as_ptr(), 0.0, 1.0, &mut s);
        let full = nfv_last_error_message(ptr::null_mut(), 0);
        let mut small = [0 as c_char; 5];
        assert_eq!(nfv_last_error_message(small.as_mut_ptr(), 5), full);
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes().len(), 4);
        assert_eq!(CStr::from_ptr(nfv_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/nfv.h")).unwrap();
    for name in [
        "nfv_solver_new",
        "nfv_solver_free",
        "nfv_solver_shape",
        "nfv_solver_time",
        "nfv_solver_get_field",
        "nfv_solver_set_field",
        "nfv_solver_advance",
        "nfv_solver_error",
        "nfv_encdec_error",
        "nfv_last_error_message",
        "nfv_version",
        "typedef struct NfvSolver NfvSolver",
        "NFV_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "{name} missing from nfv.h");
    }
}
