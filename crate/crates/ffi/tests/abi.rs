use std::ffi::{CStr, CString};
use std::ptr;

use prodtail_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pt_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn tail_values_cross_the_boundary() {
    let mut p = PtLogProb { p: 0.0, ln_p: 0.0 };
    unsafe {
        assert_eq!(pt_tail_exact(0.01, 1.0, &mut p), PtStatus::Ok);
        assert!((p.p - 0.0308961353514575).abs() < 1e-12);
        assert_eq!(pt_tail_bound_optimal(1e-4, 1.0, &mut p), PtStatus::Ok);
        assert!((p.p - 0.0159127937580).abs() < 1e-12);
        assert_eq!(pt_poisson_ge_exact(1.0, 1.0, false, &mut p), PtStatus::Ok);
        assert!((p.p - 0.65425416127684).abs() < 1e-12);
        let mut a = 0.0;
        assert_eq!(pt_optimal_alpha((-4.0f64).exp(), 1.0, &mut a), PtStatus::Ok);
        assert!((a - 0.5).abs() < 1e-12);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut p = PtLogProb { p: 0.0, ln_p: 0.0 };
    unsafe {
        assert_eq!(pt_tail_bound_moment(0.1, 1.0, 1.5, &mut p), PtStatus::InvalidParameter);
        assert!(last_error().contains("alpha"), "{}", last_error());
        assert_eq!(pt_tail_exact(0.1, 1.0, ptr::null_mut()), PtStatus::NullPointer);
        assert_eq!(pt_tail_exact(0.1, 1.0, &mut p), PtStatus::Ok);
    }
}

#[test]
fn optional_fields_use_flags() {
    let mut b = PtPoissonTailBounds {
        lower: 0.0,
        ln_lower: 0.0,
        upper: 0.0,
        ln_upper: 0.0,
        has_upper: true,
    };
    unsafe {
        assert_eq!(pt_poisson_tail_bounds(1, 2.0, &mut b), PtStatus::Ok);
        assert!(!b.has_upper);
        assert_eq!(pt_poisson_tail_bounds(2, 1.0, &mut b), PtStatus::Ok);
        assert!(b.has_upper && b.lower <= b.upper);
    }
}

#[test]
fn streams_are_deterministic() {
    unsafe {
        let label = CString::new("x").unwrap();
        let base = pt_stream_new(11);
        let a = pt_stream_derive(base, label.as_ptr(), 3);
        let b = pt_stream_derive(base, label.as_ptr(), 3);
        let mut xa = [PtXSample { value: 0.0, log_value: 0.0, factor_count: 0 }; 8];
        let mut xb = xa;
        assert_eq!(pt_sample_many(a, PtMethod::Direct, 2.0, 0.0, 8, xa.as_mut_ptr()), PtStatus::Ok);
        assert_eq!(pt_sample_many(b, PtMethod::Direct, 2.0, 0.0, 8, xb.as_mut_ptr()), PtStatus::Ok);
        for (x, y) in xa.iter().zip(&xb) {
            assert_eq!(x.value, y.value);
        }
        let mut x = xa[0];
        assert_eq!(pt_sample_x(a, PtMethod::Beta, 1.0, 0.0, &mut x), PtStatus::InvalidParameter);
        assert_eq!(pt_sample_x(ptr::null_mut(), PtMethod::Direct, 1.0, 0.0, &mut x), PtStatus::NullPointer);
        pt_stream_free(a);
        pt_stream_free(b);
        pt_stream_free(base);
        pt_stream_free(ptr::null_mut());
    }
}

#[test]
fn tree_handles() {
    unsafe {
        let parents = [1usize, 2];
        let mut tree = ptr::null_mut();
        assert_eq!(pt_tree_from_parents(parents.as_ptr(), 2, &mut tree), PtStatus::Ok);
        assert_eq!(pt_tree_vertex_count(tree), 3);
        let mut phi = [0.0; 3];
        assert_eq!(pt_tree_log_phi_all(tree, phi.as_mut_ptr(), 2), PtStatus::InvalidParameter);
        assert_eq!(pt_tree_log_phi_all(tree, phi.as_mut_ptr(), 3), PtStatus::Ok);
        let ln2 = 2f64.ln();
        assert!((phi[0] - ln2).abs() < 1e-12 && phi[1].abs() < 1e-12 && (phi[2] - ln2).abs() < 1e-12);
        let mut v = 0.0;
        assert_eq!(pt_tree_log_phi_direct(tree, 4, &mut v), PtStatus::InvalidVertex);
        let mut top = [0usize; 1];
        assert_eq!(pt_tree_top_k(tree, 1, top.as_mut_ptr()), PtStatus::Ok);
        assert_eq!(top[0], 2);
        pt_tree_free(tree);

        let bad = [2usize];
        assert_eq!(pt_tree_from_parents(bad.as_ptr(), 1, &mut tree), PtStatus::InvalidParameter);
        assert_eq!(pt_tree_vertex_count(ptr::null()), 0);
    }
}

#[test]
fn root_finding_single_trial_has_no_se() {
    unsafe {
        let s = pt_stream_new(5);
        let mut r = std::mem::zeroed::<PtTrialRecord>();
        assert_eq!(pt_root_finding_trial(20, 20, 1, s, &mut r), PtStatus::Ok);
        assert_eq!(r.success_rate, 1.0);
        assert!(!r.has_std_error);
        assert_eq!(pt_root_finding_trial(20, 21, 1, s, &mut r), PtStatus::InvalidParameter);
        pt_stream_free(s);
    }
}

// Compiles tests/c/smoke.c against the generated header and static library.
#[test]
fn c_smoke_program() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libprodtail_ffi.a");
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    assert!(lib.exists(), "missing {}", lib.display());
    let dir = tempfile_dir();
    let bin = dir.join("smoke");
    let status = std::process::Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
    std::fs::remove_dir_all(&dir).ok();
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("prodtail-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
