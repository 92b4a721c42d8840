use bic_ffi::*;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        bic_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn params(n: usize, eps: f64, d: f64, g: f64) -> *mut BicParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { bic_params_new(n, eps, d, g, &mut p) }, BicStatus::Ok);
    p
}

#[test]
fn solve_and_read_states() {
    let p = params(3, 1.1, 7.0, 0.01);
    let mut list = ptr::null_mut();
    let st = unsafe { bic_solve(p, BicSector::Antisymmetric, BicMode::Full, 1.0, 1.3, &mut list) };
    assert_eq!(st, BicStatus::Ok);
    let k = unsafe { bic_state_list_len(list) };
    assert!(k >= 1);
    let mut s = BicStateSummary::default();
    assert_eq!(unsafe { bic_state_get(list, 0, &mut s) }, BicStatus::Ok);
    let mut e1 = 0.0;
    assert_eq!(unsafe { bic_resonant_energy(1, 7.0, &mut e1) }, BicStatus::Ok);
    assert!((s.energy - e1).abs() <= 1e-10);
    assert_eq!(s.sector, 0);
    assert!(s.exact_resonance);
    let (mut re, mut im) = (vec![0.0; 3], vec![0.0; 3]);
    assert_eq!(unsafe { bic_state_amplitudes(list, 0, re.as_mut_ptr(), im.as_mut_ptr(), 3) }, BicStatus::Ok);
    assert!(re[1].abs() < 1e-8 && (re[0] + re[2]).abs() < 1e-8);
    let norm: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum();
    assert!((norm - s.p).abs() < 1e-12);
    assert_eq!(unsafe { bic_state_amplitudes(list, 0, re.as_mut_ptr(), im.as_mut_ptr(), 2) }, BicStatus::SizeMismatch);
    assert_eq!(unsafe { bic_state_get(list, k, &mut s) }, BicStatus::OutOfRange);
    unsafe {
        bic_state_list_free(list);
        bic_params_free(p);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { bic_params_new(1, 1.1, 7.0, 0.01, &mut p) }, BicStatus::Domain);
    assert!(p.is_null());
    assert!(last_error().contains("n must be at least 2"));
    assert_eq!(unsafe { bic_params_new(3, 1.1, 7.0, 0.01, ptr::null_mut()) }, BicStatus::NullPointer);
    let mut e = 0.0;
    assert_eq!(unsafe { bic_resonant_energy(1, -1.0, &mut e) }, BicStatus::Domain);
    let label = CString::new("no-such-class").unwrap();
    assert_eq!(unsafe { bic_probability_approximant(label.as_ptr(), 1, 5.0, 0.01, &mut e) }, BicStatus::Label);
    let q = params(3, 1.2, 15.0, 1e-4);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { bic_approx_pole(q, BicSector::Both, 0, &mut re, &mut im) }, BicStatus::Label);
    unsafe {
        bic_params_free(q);
        bic_params_free(ptr::null_mut());
        bic_state_list_free(ptr::null_mut());
    }
}

#[test]
fn poles_and_probability() {
    let q = params(3, 1.2, 15.0, 1e-4);
    let (mut ar, mut ai) = (0.0, 0.0);
    assert_eq!(unsafe { bic_approx_pole(q, BicSector::Antisymmetric, 0, &mut ar, &mut ai) }, BicStatus::Ok);
    let (mut zr, mut zi) = (0.0, 0.0);
    assert_eq!(unsafe { bic_find_pole(q, BicSector::Antisymmetric, BicSheet::Second, ar, ai, &mut zr, &mut zi) }, BicStatus::Ok);
    assert!(zi < 0.0);
    assert!(((zr - ar).powi(2) + (zi - ai).powi(2)).sqrt() < 1e-6);
    unsafe { bic_params_free(q) };
    let label = CString::new("n3-a").unwrap();
    let mut p = 0.0;
    assert_eq!(unsafe { bic_probability_approximant(label.as_ptr(), 1, 7.0, 0.01, &mut p) }, BicStatus::Ok);
    assert!((p - 0.5666070969524746).abs() < 1e-12);
}

#[test]
fn critical_point() {
    let mut c = BicCriticalPoint::default();
    assert_eq!(unsafe { bic_critical_distance(4, 0.01, 1, &mut c) }, BicStatus::Ok);
    assert!((c.d_c - 0.052).abs() < 0.005);
    assert!(c.merge_gap >= 0.0 && c.merge_gap < 1e-6);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(bic_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("bic.h")
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(header()).unwrap();
    for f in [
        "bic_last_error_message",
        "bic_version",
        "bic_params_new",
        "bic_params_free",
        "bic_resonant_energy",
        "bic_solve",
        "bic_state_list_len",
        "bic_state_get",
        "bic_state_amplitudes",
        "bic_state_list_free",
        "bic_find_pole",
        "bic_approx_pole",
        "bic_critical_distance",
        "bic_probability_approximant",
    ] {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(h.contains("typedef struct BicParams BicParams;"));
    assert!(h.contains("BIC_STATUS_NO_CONVERGENCE = 9"));
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libbic_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_against_static_library() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not built in this profile; C link check not run");
        return;
    };
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("bic_smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("c").join("smoke.c");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status();
    let Ok(status) = status else {
        eprintln!("no C compiler available; C link check not run");
        return;
    };
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let mut lines = text.lines();
    let first: Vec<f64> = lines.next().unwrap().split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert!(first[0] >= 1.0);
    assert!((first[1] - first[2]).abs() <= 1e-10);
    let second = lines.next().unwrap();
    assert!(second.starts_with("2 "), "{second}");
}
