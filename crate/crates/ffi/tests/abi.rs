use std::ffi::{CStr, CString};
use std::ptr;

use jchsim_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(jchsim_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn dimer_asymptote() {
    let (mut v, mut e) = (0.0, 0.0);
    let s = unsafe { jchsim_dimer_analytic(1.0, 0.01, 1000.0, 1e-4, &mut v, &mut e) };
    assert_eq!(s, JchsimStatus::Ok);
    assert!((v - 0.5946).abs() < 5e-3 && (e - 0.4616).abs() < 5e-3, "{v} {e}");
    assert_eq!(last_error(), "");
}

#[test]
fn null_and_bad_arguments() {
    let mut v = 0.0;
    assert_eq!(unsafe { jchsim_dimer_analytic(1.0, 0.01, 2.0, 1e-4, &mut v, ptr::null_mut()) }, JchsimStatus::NullPointer);
    assert!(last_error().contains("entropy"));
    let mut e = 0.0;
    assert_eq!(unsafe { jchsim_dimer_analytic(1.0, -1.0, 2.0, 1e-4, &mut v, &mut e) }, JchsimStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    unsafe {
        jchsim_config_free(ptr::null_mut());
        jchsim_sweep_free(ptr::null_mut());
        jchsim_report_free(ptr::null_mut());
    }
}

#[test]
fn config_errors_name_the_key() {
    let mut cfg = ptr::null_mut();
    let text = CString::new("[physics]\ngee = 1.0\n").unwrap();
    assert_eq!(unsafe { jchsim_config_from_toml(text.as_ptr(), &mut cfg) }, JchsimStatus::Config);
    assert!(cfg.is_null());
    assert!(last_error().contains("physics.gee"), "{}", last_error());

    assert_eq!(unsafe { jchsim_config_default(JchsimMode::Closed, &mut cfg) }, JchsimStatus::Ok);
    let key = CString::new("sweep.points").unwrap();
    let bad = CString::new("1").unwrap();
    assert_eq!(unsafe { jchsim_config_set(cfg, key.as_ptr(), bad.as_ptr()) }, JchsimStatus::Config);
    unsafe { jchsim_config_free(cfg) };
}

#[test]
fn sweep_and_detect() {
    let text = CString::new(
        "[lattice]\nshape = \"trimer\"\n[sweep]\nmin = 1.0\nmax = 10.0\npoints = 41\n[quench]\nn_time_samples = 600\n",
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { jchsim_config_from_toml(text.as_ptr(), &mut cfg) }, JchsimStatus::Ok);
    let mut sw = ptr::null_mut();
    assert_eq!(unsafe { jchsim_sweep_run(cfg, &mut sw) }, JchsimStatus::Ok, "{}", last_error());
    let (mut points, mut pairs) = (0usize, 0usize);
    assert_eq!(unsafe { jchsim_sweep_shape(sw, &mut points, &mut pairs) }, JchsimStatus::Ok);
    assert_eq!((points, pairs), (41, 2));

    let (mut x, mut var, mut failed) = (0.0, 0.0, -1);
    let mut c = [0.0; 2];
    let mut r = [0.0; 2];
    let s = unsafe { jchsim_sweep_row(sw, 40, &mut x, &mut var, c.as_mut_ptr(), r.as_mut_ptr(), 2, &mut failed) };
    assert_eq!(s, JchsimStatus::Ok);
    assert!((x - 10.0).abs() < 1e-12 && failed == 0);
    assert!((r[0] - c[0] / var).abs() < 1e-12);
    let s = unsafe { jchsim_sweep_row(sw, 41, &mut x, &mut var, ptr::null_mut(), ptr::null_mut(), 0, &mut failed) };
    assert_eq!(s, JchsimStatus::OutOfRange);
    let s = unsafe { jchsim_sweep_row(sw, 0, &mut x, &mut var, c.as_mut_ptr(), ptr::null_mut(), 1, &mut failed) };
    assert_eq!(s, JchsimStatus::InvalidArgument);

    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { jchsim_detect(sw, 0.1, 0.05, &mut rep) }, JchsimStatus::Ok);
    let (mut nr, mut na) = (0usize, 0usize);
    assert_eq!(unsafe { jchsim_report_counts(rep, &mut nr, &mut na) }, JchsimStatus::Ok);
    assert!(nr >= 2);
    let mut found = [false; 2];
    for k in 0..nr {
        let (mut pair, mut pos, mut grid, mut prom) = (0usize, 0.0, 0.0, 0.0);
        assert_eq!(unsafe { jchsim_report_resonance(rep, k, &mut pair, &mut pos, &mut grid, &mut prom) }, JchsimStatus::Ok);
        assert!(pair < 2 && prom > 0.0);
        found[pair] = true;
    }
    assert_eq!(found, [true, true]);
    let mut pos = 0.0;
    assert_eq!(unsafe { jchsim_report_anti_resonance(rep, na, &mut pos) }, JchsimStatus::OutOfRange);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { jchsim_sweep_write_csv(sw, path.as_ptr()) }, JchsimStatus::Ok);
    let body = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(body.starts_with("delta_over_g,var_dimer_analytic,c_ij,c_ik,ratio_ij,ratio_ik"));
    let nowhere = CString::new("/nonexistent-dir/s.csv").unwrap();
    assert_eq!(unsafe { jchsim_sweep_write_csv(sw, nowhere.as_ptr()) }, JchsimStatus::Io);

    unsafe {
        jchsim_report_free(rep);
        jchsim_sweep_free(sw);
        jchsim_config_free(cfg);
    }
}

#[test]
fn init_protocol_status() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { jchsim_config_default(JchsimMode::Open, &mut cfg) }, JchsimStatus::Ok);
    let (mut f, mut leak) = (0.0, 0.0);
    assert_eq!(unsafe { jchsim_init_protocol(cfg, &mut f, &mut leak) }, JchsimStatus::Ok, "{}", last_error());
    assert!(f > 0.95 && f <= 1.0 && leak >= 0.0);
    let key = CString::new("dissipation.preparation.fidelity_floor").unwrap();
    let v = CString::new("0.9999999").unwrap();
    assert_eq!(unsafe { jchsim_config_set(cfg, key.as_ptr(), v.as_ptr()) }, JchsimStatus::Ok);
    assert_eq!(unsafe { jchsim_init_protocol(cfg, &mut f, &mut leak) }, JchsimStatus::LowFidelity);
    unsafe { jchsim_config_free(cfg) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(jchsim_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/jchsim.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["jchsim_sweep_run", "jchsim_detect", "jchsim_last_error", "JCHSIM_STATUS_LOW_FIDELITY"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(status.success());
}
