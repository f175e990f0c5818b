use std::ffi::{CStr, CString};
use std::ptr;

use mocv_ffi::*;

const STANDARD: &str = include_str!("../../core/scenarios/standard.cfg");

fn last_error() -> String {
    unsafe {
        let need = mocv_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0 as std::ffi::c_char; need];
        mocv_last_error_message(buf.as_mut_ptr(), need);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn standard(k: u32) -> *mut MocvScenario {
    let text = CString::new(STANDARD).unwrap();
    let mut h = ptr::null_mut();
    let st = unsafe { mocv_scenario_from_toml(text.as_ptr(), k, &mut h) };
    assert_eq!(st, MocvStatus::Ok, "{}", last_error());
    assert!(!h.is_null());
    h
}

#[test]
fn dims_and_directions() {
    let h = standard(9);
    let (mut n, mut d, mut k) = (0, 0, 0);
    unsafe {
        assert_eq!(mocv_scenario_dims(h, &mut n, &mut d, &mut k), MocvStatus::Ok);
        assert_eq!((n, d, k), (1, 2, 9));
        let mut z = [0.0; 2];
        assert_eq!(mocv_base_direction(h, 4, z.as_mut_ptr(), 2), MocvStatus::Ok);
        assert_eq!(z, [0.5, 0.5]);
        assert_eq!(mocv_base_direction(h, 9, z.as_mut_ptr(), 2), MocvStatus::InvalidArgument);
        mocv_scenario_free(h);
    }
}

#[test]
fn value_and_p_match_closed_form() {
    let h = standard(0);
    let x = [0.0];
    let mut v = vec![0.0; 33];
    unsafe {
        assert_eq!(mocv_value_thresholds(h, 0.0, x.as_ptr(), 1, v.as_mut_ptr(), v.len()), MocvStatus::Ok);
        let expected = -5.0 * ((-0.1f64).exp() - (-0.2f64).exp());
        assert!((v[0] - expected).abs() < 1e-12, "{}", v[0]);

        let (mut p, mut it, mut res) = ([0.0], 0u32, 1.0);
        assert_eq!(mocv_solve_p(h, 0.0, x.as_ptr(), 1, 0, p.as_mut_ptr(), &mut it, &mut res), MocvStatus::Ok);
        assert!((p[0] + (-0.1f64).exp()).abs() < 1e-15);
        assert_eq!(it, 1);
        assert_eq!(res, 0.0);

        let mut r = 1.0;
        assert_eq!(mocv_hjb_max_residual(h, 0.2, x.as_ptr(), 1, &mut r), MocvStatus::Ok);
        assert!(r < 1e-12);
        mocv_scenario_free(h);
    }
}

#[test]
fn errors_are_reported() {
    let h = standard(5);
    let x = [0.0, 1.0];
    let mut v = [0.0; 5];
    unsafe {
        assert_eq!(
            mocv_value_thresholds(h, 0.0, x.as_ptr(), 2, v.as_mut_ptr(), 5),
            MocvStatus::InvalidArgument
        );
        assert!(last_error().contains("state dimension"));
        assert_eq!(
            mocv_value_thresholds(h, 0.0, x.as_ptr(), 1, v.as_mut_ptr(), 3),
            MocvStatus::BufferTooSmall
        );
        assert_eq!(
            mocv_value_thresholds(h, 2.0, x.as_ptr(), 1, v.as_mut_ptr(), 5),
            MocvStatus::DomainError
        );
        assert_eq!(
            mocv_value_thresholds(ptr::null(), 0.0, x.as_ptr(), 1, v.as_mut_ptr(), 5),
            MocvStatus::NullPointer
        );
        mocv_scenario_free(h);
        mocv_scenario_free(ptr::null_mut());
    }

    let bad = CString::new(STANDARD.replace("[0.0, 1.0]]", "[0.0, 0.0]]")).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { mocv_scenario_from_toml(bad.as_ptr(), 0, &mut out) }, MocvStatus::ConfigError);
    assert!(out.is_null());
    assert!(last_error().contains("ConeSpec invariant"));

    let garbled = CString::new("horizon = ").unwrap();
    assert_eq!(unsafe { mocv_scenario_from_toml(garbled.as_ptr(), 0, &mut out) }, MocvStatus::ParseError);

    let missing = CString::new("/nonexistent/scenario.cfg").unwrap();
    assert_eq!(unsafe { mocv_scenario_from_file(missing.as_ptr(), 0, &mut out) }, MocvStatus::ConfigError);
}

#[test]
fn truncated_error_message() {
    let garbled = CString::new("horizon = ").unwrap();
    let mut out = ptr::null_mut();
    unsafe { mocv_scenario_from_toml(garbled.as_ptr(), 0, &mut out) };
    let mut buf = [1 as std::ffi::c_char; 8];
    let need = unsafe { mocv_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(need > 8);
    assert_eq!(buf[7], 0);
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(mocv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/mocv.h");
    let src = std::env::temp_dir().join(format!("mocv_header_{}.c", std::process::id()));
    std::fs::write(&src, format!("#include \"{header}\"\nint main(void) {{ return 0; }}\n")).unwrap();
    let status = match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror"]).arg(&src).status() {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler, skipping header check");
            return;
        }
    };
    let _ = std::fs::remove_file(&src);
    assert!(status.success());
}
