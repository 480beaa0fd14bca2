use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use momip_ffi::*;

fn last_error() -> String {
    let p = momip_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn example2() -> *mut MomipProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { momip_problem_new(MomipProblemKind::Example2, &mut p) }, MomipStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn problem_shape_and_bounds() {
    let p = example2();
    unsafe {
        assert_eq!(momip_problem_alpha_dim(p), 2);
        assert_eq!(momip_problem_objectives(p), 2);
        let (mut lo, mut hi) = ([0.0; 2], [0.0; 2]);
        assert_eq!(momip_problem_bounds(p, lo.as_mut_ptr(), hi.as_mut_ptr(), 2), MomipStatus::Ok);
        assert_eq!((lo, hi), ([0.5, 0.5], [8.0, 8.0]));
        assert_eq!(momip_problem_bounds(p, lo.as_mut_ptr(), hi.as_mut_ptr(), 1), MomipStatus::BufferTooSmall);
        momip_problem_free(p);
    }
}

#[test]
fn evaluates_feasible_anchor() {
    let p = example2();
    let alpha = [2.1412, 2.0705];
    let mut eval = MomipEvaluation { feasible: false, lambda_star: 0.0 };
    let mut f = [0.0; 2];
    let status = unsafe { momip_evaluate(p, alpha.as_ptr(), 2, 1e-7, &mut eval, f.as_mut_ptr(), 2) };
    assert_eq!(status, MomipStatus::Ok);
    assert!(eval.feasible);
    assert!(eval.lambda_star < -1e-7);
    assert_eq!(f, alpha);
    unsafe { momip_problem_free(p) };
}

#[test]
fn rejects_out_of_box_and_bad_lengths() {
    let p = example2();
    let mut eval = MomipEvaluation { feasible: false, lambda_star: 0.0 };
    let outside = [0.1, 2.0];
    let status = unsafe { momip_evaluate(p, outside.as_ptr(), 2, 1e-7, &mut eval, ptr::null_mut(), 0) };
    assert_eq!(status, MomipStatus::InvalidArgument);
    assert!(last_error().contains("outside the search box"));
    let status = unsafe { momip_evaluate(p, outside.as_ptr(), 1, 1e-7, &mut eval, ptr::null_mut(), 0) };
    assert_eq!(status, MomipStatus::InvalidArgument);
    unsafe { momip_problem_free(p) };
}

#[test]
fn null_pointers_are_reported() {
    let mut eval = MomipEvaluation { feasible: false, lambda_star: 0.0 };
    let alpha = [1.0, 1.0];
    let status = unsafe { momip_evaluate(ptr::null(), alpha.as_ptr(), 2, 1e-7, &mut eval, ptr::null_mut(), 0) };
    assert_eq!(status, MomipStatus::NullPointer);
    assert!(last_error().contains("problem is null"));
    assert_eq!(unsafe { momip_problem_new(MomipProblemKind::Example2, ptr::null_mut()) }, MomipStatus::NullPointer);
    unsafe {
        momip_problem_free(ptr::null_mut());
        momip_run_free(ptr::null_mut());
        assert_eq!(momip_problem_alpha_dim(ptr::null()), 0);
        assert_eq!(momip_run_len(ptr::null()), 0);
    }
}

#[test]
fn plant_json_round_trip_and_errors() {
    let json = CString::new(
        r#"{"type":"bibo","a":[[-10,-5],[-4,-1.2]],"b":[[3,1],[0,2]],"c":[[1,0.7]],"x0":[3,-4]}"#,
    )
    .unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { momip_problem_from_plant_json(json.as_ptr(), false, &mut p) }, MomipStatus::Ok);
    assert_eq!(unsafe { momip_problem_alpha_dim(p) }, 2);
    unsafe { momip_problem_free(p) };

    let bad = CString::new(r#"{"type":"bibo","a":[[1]]}"#).unwrap();
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { momip_problem_from_plant_json(bad.as_ptr(), false, &mut q) }, MomipStatus::InvalidArgument);
    assert!(q.is_null());
    assert_eq!(unsafe { momip_problem_from_plant_json(ptr::null(), false, &mut q) }, MomipStatus::NullPointer);
}

#[test]
fn set_bounds_validates() {
    let p = example2();
    unsafe {
        let (lo, hi) = ([1.0, 1.0], [3.0, 3.0]);
        assert_eq!(momip_problem_set_bounds(p, lo.as_ptr(), hi.as_ptr(), 2), MomipStatus::Ok);
        let (lo, hi) = ([3.0, 1.0], [1.0, 3.0]);
        assert_ne!(momip_problem_set_bounds(p, lo.as_ptr(), hi.as_ptr(), 2), MomipStatus::Ok);
        momip_problem_free(p);
    }
}

#[test]
fn small_hmode_run_and_gains() {
    let p = example2();
    let mut cfg = momip_hmode_config_default();
    assert_eq!(cfg.population, 100);
    cfg.population = 8;
    cfg.iterations = 3;
    cfg.seed = 7;
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { momip_hmode_run(p, &cfg, &mut run) }, MomipStatus::Ok);
    unsafe {
        let n = momip_run_len(run);
        assert!(n > 0);
        assert_eq!(momip_run_evaluations(run), 8 * 4);
        let (mut idx, mut score) = (usize::MAX, f64::NAN);
        assert_eq!(momip_run_knee(run, &mut idx, &mut score), MomipStatus::Ok);
        assert!(idx < n);
        assert!(score.is_finite());

        let (mut f, mut alpha, mut lambda) = ([0.0; 2], [0.0; 2], 0.0);
        assert_eq!(
            momip_run_entry(run, idx, f.as_mut_ptr(), 2, alpha.as_mut_ptr(), 2, &mut lambda),
            MomipStatus::Ok
        );
        assert!(lambda < 0.0);
        assert_eq!(momip_run_entry(run, n, ptr::null_mut(), 0, ptr::null_mut(), 0, ptr::null_mut()), MomipStatus::InvalidArgument);

        let (mut written, mut count, mut rows, mut cols) = (0, 0, 0, 0);
        let st = momip_run_entry_gains(run, p, idx, ptr::null_mut(), 0, &mut written, &mut count, &mut rows, &mut cols);
        assert_eq!(st, MomipStatus::BufferTooSmall);
        assert_eq!((written, count, rows, cols), (4, 1, 2, 2));
        let mut k = [0.0; 4];
        let st = momip_run_entry_gains(run, p, idx, k.as_mut_ptr(), 4, &mut written, ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(st, MomipStatus::Ok);

        let opts = momip_sim_options_default();
        let mut m = MomipSimMetrics { max_u_norm: 0.0, max_y_norm: 0.0, l2_ratio: 0.0, diverged: true };
        assert_eq!(momip_simulate(p, k.as_ptr(), 1, 2, 2, &opts, &mut m), MomipStatus::Ok);
        assert!(!m.diverged);
        assert!(m.max_u_norm < alpha[0], "{} vs {}", m.max_u_norm, alpha[0]);
        assert!(m.max_y_norm < alpha[1], "{} vs {}", m.max_y_norm, alpha[1]);

        momip_run_free(run);
        momip_problem_free(p);
    }
}

#[test]
fn empty_archive_has_no_knee() {
    let p = example2();
    let mut cfg = momip_hmode_config_default();
    cfg.population = 4;
    cfg.iterations = 1;
    // ū = ȳ = 0.05 leaves no feasible design.
    unsafe {
        let (lo, hi) = ([0.04, 0.04], [0.05, 0.05]);
        assert_eq!(momip_problem_set_bounds(p, lo.as_ptr(), hi.as_ptr(), 2), MomipStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(momip_hmode_run(p, &cfg, &mut run), MomipStatus::Ok);
        assert_eq!(momip_run_len(run), 0);
        let mut idx = 0;
        assert_eq!(momip_run_knee(run, &mut idx, ptr::null_mut()), MomipStatus::EmptyArchive);
        momip_run_free(run);
        momip_problem_free(p);
    }
}

#[test]
fn simulation_reports_shape_errors_and_divergence() {
    let p = example2();
    let opts = momip_sim_options_default();
    let mut m = MomipSimMetrics { max_u_norm: 0.0, max_y_norm: 0.0, l2_ratio: 0.0, diverged: false };
    unsafe {
        assert_eq!(momip_simulate(p, ptr::null(), 0, 0, 0, &opts, &mut m), MomipStatus::Ok);
        assert_eq!(m.max_u_norm, 0.0);
        let k = [1.0; 3];
        assert_ne!(momip_simulate(p, k.as_ptr(), 1, 1, 3, &opts, &mut m), MomipStatus::Ok);
        // u = +1e3·x destabilizes the plant.
        let k = [1e3, 0.0, 0.0, 1e3];
        assert_eq!(momip_simulate(p, k.as_ptr(), 1, 2, 2, &opts, &mut m), MomipStatus::Ok);
        assert!(m.diverged);
        let bad = MomipSimOptions { dt: 0.0, ..opts };
        assert_eq!(momip_simulate(p, ptr::null(), 0, 0, 0, &bad, &mut m), MomipStatus::Config);
        momip_problem_free(p);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(momip_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_declares_the_api_and_parses_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("momip.h");
    let text = std::fs::read_to_string(&header).expect("build.rs writes include/momip.h");
    for name in [
        "momip_problem_new",
        "momip_problem_free",
        "momip_evaluate",
        "momip_hmode_run",
        "momip_run_knee",
        "momip_run_free",
        "momip_simulate",
        "momip_last_error",
        "MOMIP_STATUS_EMPTY_ARCHIVE",
        "typedef struct MomipProblem MomipProblem;",
    ] {
        assert!(text.contains(name), "header is missing `{name}`");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    match Command::new(&cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).status() {
        Ok(status) => assert!(status.success(), "{cc} rejected the header"),
        Err(_) => eprintln!("no C compiler found; skipped syntax check"),
    }
}
