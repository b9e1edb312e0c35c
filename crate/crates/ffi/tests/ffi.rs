use std::ffi::{CStr, CString};
use std::ptr;

use sqztomo_ffi::*;

fn parse(spec: &str) -> *mut SqzState {
    let c = CString::new(spec).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sqz_state_parse(c.as_ptr(), &mut s) }, SqzStatus::SQZ_OK);
    assert!(!s.is_null());
    s
}

fn last_error() -> String {
    let p = sqz_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn vacuum_closed_form() {
    let s = parse("vacuum");
    let lambdas = [0.0, 0.5, 1.0];
    let thetas = [0.0, 1.2];
    let mut t = ptr::null_mut();
    let st = unsafe {
        sqz_tomogram_compute(s, SqzRoute::SQZ_ROUTE_CLOSED_FORM, lambdas.as_ptr(), 3, thetas.as_ptr(), 2, 4, 64, &mut t)
    };
    assert_eq!(st, SqzStatus::SQZ_OK);
    assert!(sqz_last_error().is_null());
    assert_eq!(unsafe { sqz_tomogram_frames(t) }, 6);
    assert_eq!(unsafe { sqz_tomogram_n_max(t) }, 4);
    let mut w = vec![0.0; 30];
    assert_eq!(unsafe { sqz_tomogram_values(t, w.as_mut_ptr(), w.len()) }, SqzStatus::SQZ_OK);
    for f in 0..6 {
        let l = lambdas[f % 3];
        assert!((w[5 * f] - 1.0 / l.cosh()).abs() < 1e-14);
        assert_eq!(w[5 * f + 1], 0.0);
    }
    let mut tail = [f64::NAN; 6];
    assert_eq!(unsafe { sqz_tomogram_tail_mass(t, tail.as_mut_ptr(), 6) }, SqzStatus::SQZ_OK);
    assert!(tail.iter().all(|x| (0.0..0.1).contains(x)));

    let mut short = [0.0; 29];
    assert_eq!(unsafe { sqz_tomogram_values(t, short.as_mut_ptr(), 29) }, SqzStatus::SQZ_BUFFER_TOO_SMALL);
    assert!(short.iter().all(|&x| x == 0.0));
    assert!(last_error().contains("need 30"));
    unsafe {
        sqz_tomogram_free(t);
        sqz_state_free(s);
    }
}

#[test]
fn routes_agree() {
    let s = parse("coherent:1");
    let lambdas = [0.5];
    let thetas = [1.0];
    let compute = |route| {
        let mut t = ptr::null_mut();
        let st = unsafe { sqz_tomogram_compute(s, route, lambdas.as_ptr(), 1, thetas.as_ptr(), 1, 6, 48, &mut t) };
        assert_eq!(st, SqzStatus::SQZ_OK);
        let mut w = [0.0; 7];
        assert_eq!(unsafe { sqz_tomogram_values(t, w.as_mut_ptr(), 7) }, SqzStatus::SQZ_OK);
        unsafe { sqz_tomogram_free(t) };
        w
    };
    let oracle = compute(SqzRoute::SQZ_ROUTE_ORACLE);
    let closed = compute(SqzRoute::SQZ_ROUTE_CLOSED_FORM);
    let density = compute(SqzRoute::SQZ_ROUTE_KERNEL_DENSITY);
    for n in 0..7 {
        assert!((oracle[n] - closed[n]).abs() < 1e-10);
        assert!((oracle[n] - density[n]).abs() < 1e-9);
    }
    unsafe { sqz_state_free(s) };
}

#[test]
fn errors_are_reported() {
    let bad = CString::new("squeezed:1").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sqz_state_parse(bad.as_ptr(), &mut s) }, SqzStatus::SQZ_INVALID_ARGUMENT);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { sqz_state_parse(ptr::null(), &mut s) }, SqzStatus::SQZ_NULL_POINTER);

    let s = parse("fock:2");
    let l = [0.0];
    let mut t = ptr::null_mut();
    let st = unsafe { sqz_tomogram_compute(s, SqzRoute::SQZ_ROUTE_ORACLE, l.as_ptr(), 1, ptr::null(), 1, 4, 64, &mut t) };
    assert_eq!(st, SqzStatus::SQZ_NULL_POINTER);
    let nan = [f64::NAN];
    let st = unsafe { sqz_tomogram_compute(s, SqzRoute::SQZ_ROUTE_ORACLE, nan.as_ptr(), 1, l.as_ptr(), 1, 4, 64, &mut t) };
    assert_eq!(st, SqzStatus::SQZ_INVALID_ARGUMENT);
    assert!(t.is_null());

    let big = parse("coherent:6");
    let st = unsafe { sqz_tomogram_compute(big, SqzRoute::SQZ_ROUTE_ORACLE, l.as_ptr(), 1, l.as_ptr(), 1, 10, 40, &mut t) };
    assert_eq!(st, SqzStatus::SQZ_TRUNCATION);

    assert_eq!(unsafe { sqz_tomogram_frames(ptr::null()) }, 0);
    unsafe {
        sqz_tomogram_free(ptr::null_mut());
        sqz_state_free(big);
        sqz_state_free(s);
    }
}

#[test]
fn optical_and_moments() {
    let s = parse("vacuum");
    let mut w = 0.0;
    assert_eq!(unsafe { sqz_optical_tomogram(s, 16, 0.3, 0.9, &mut w) }, SqzStatus::SQZ_OK);
    let expected = (-0.09f64).exp() / std::f64::consts::PI.sqrt();
    assert!((w - expected).abs() < 1e-13);
    unsafe { sqz_state_free(s) };

    let mut m = SqzMoments::default();
    assert_eq!(unsafe { sqz_kanai_moments(0.1, 0.5, 0.0, 2.0, &mut m) }, SqzStatus::SQZ_OK);
    assert_eq!(m.t, 2.0);
    assert!(m.sigma_q > 0.0 && m.sigma_p > 0.0);
    assert!(m.sigma_q * m.sigma_p - m.sigma_pq * m.sigma_pq >= 0.25 - 1e-9);
    assert_eq!(unsafe { sqz_kanai_moments(1.5, 0.5, 0.0, 2.0, &mut m) }, SqzStatus::SQZ_INVALID_ARGUMENT);
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sqz_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/sqztomo.h")).unwrap();
    for sym in [
        "SqzStatus sqz_state_parse(",
        "void sqz_state_free(",
        "SqzStatus sqz_tomogram_compute(",
        "SqzStatus sqz_tomogram_values(",
        "SqzStatus sqz_tomogram_tail_mass(",
        "size_t sqz_tomogram_frames(",
        "SqzStatus sqz_optical_tomogram(",
        "SqzStatus sqz_kanai_moments(",
        "const char *sqz_last_error(void)",
        "typedef struct SqzTomogram SqzTomogram;",
        "SQZ_BUFFER_TOO_SMALL = 5",
    ] {
        assert!(h.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(&src, "#include \"sqztomo.h\"\nint main(void) { SqzMoments m; (void)m; return SQZ_OK; }\n").unwrap();
    let out = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .output()
        .unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("sqztomo-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
