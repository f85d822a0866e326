use std::ffi::{c_char, CStr, CString};
use std::ptr;

use oprenewal_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe {
        opr_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn scalar_renewal_round_trip() {
    unsafe {
        let mut op = ptr::null_mut();
        assert_eq!(opr_operator_power_law(3.0, 2000, &mut op), OprStatus::Ok);
        assert_eq!(opr_operator_dim(op), 1);

        let mut t = vec![0.0; 2001];
        assert_eq!(opr_renewal_solve(op, 2000, t.as_mut_ptr(), t.len()), OprStatus::Ok);
        assert_eq!(t[0], 1.0);

        let mut spec = ptr::null_mut();
        assert_eq!(opr_spectral_new(op, &mut spec), OprStatus::Ok);
        let mut mu = 0.0;
        assert_eq!(opr_spectral_mu(spec, &mut mu), OprStatus::Ok);
        assert!((t[2000] - 1.0 / mu).abs() < 1e-6, "{} vs {}", t[2000], 1.0 / mu);

        let mut p = [0.0];
        assert_eq!(opr_spectral_projection(spec, p.as_mut_ptr(), 1), OprStatus::Ok);
        assert!((p[0] - 1.0).abs() < 1e-12);

        let mut exp = ptr::null_mut();
        assert_eq!(opr_expansion_new(op, spec, 2000, 1, &mut exp), OprStatus::Ok);
        let mut res = vec![0.0; 2001];
        assert_eq!(opr_expansion_residuals(exp, res.as_mut_ptr(), res.len()), OprStatus::Ok);
        let (mut fitted, mut predicted) = (0.0, 0.0);
        assert_eq!(opr_expansion_exponents(exp, &mut fitted, &mut predicted), OprStatus::Ok);
        assert_eq!(predicted, 2.0);
        assert!((fitted - 2.0).abs() < 0.2, "{fitted}");

        let (mut sv, mut angle) = (0.0, 0.0);
        assert_eq!(opr_aperiodicity(op, 256, &mut sv, &mut angle), OprStatus::Ok);
        assert!(sv > 0.0);

        opr_expansion_free(exp);
        opr_spectral_free(spec);
        opr_operator_free(op);
    }
}

#[test]
fn matrix_input_is_row_major() {
    // R_1 = [[0, 1], [1, 0]] / 2, R_2 = I / 2, R(1) stochastic
    let terms = [0.0, 0.5, 0.5, 0.0, 0.5, 0.0, 0.0, 0.5];
    unsafe {
        let mut op = ptr::null_mut();
        assert_eq!(opr_operator_new(2, terms.as_ptr(), 2, 1.5, false, &mut op), OprStatus::Ok);
        let mut t = vec![0.0; 3 * 4];
        assert_eq!(opr_renewal_solve(op, 2, t.as_mut_ptr(), t.len()), OprStatus::Ok);
        assert_eq!(&t[0..4], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(&t[4..8], &terms[0..4]);
        // T_2 = R_1² + R_2 = I/4 + I/2
        assert_eq!(&t[8..12], &[0.75, 0.0, 0.0, 0.75]);
        opr_operator_free(op);
    }
}

#[test]
fn null_and_buffer_errors_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(opr_spectral_new(ptr::null(), &mut out), OprStatus::NullPointer);
        assert!(out.is_null());
        assert!(last_error().contains("op"), "{}", last_error());

        assert_eq!(opr_operator_power_law(1.5, 100, ptr::null_mut()), OprStatus::NullPointer);

        let mut op = ptr::null_mut();
        assert_eq!(opr_operator_power_law(1.5, 100, &mut op), OprStatus::Ok);
        let mut small = [0.0; 4];
        assert_eq!(opr_renewal_solve(op, 10, small.as_mut_ptr(), small.len()), OprStatus::BufferTooSmall);
        assert!(last_error().contains("11 needed"), "{}", last_error());

        // a successful call clears the message
        let mut big = [0.0; 11];
        assert_eq!(opr_renewal_solve(op, 10, big.as_mut_ptr(), big.len()), OprStatus::Ok);
        assert_eq!(last_error(), "");
        opr_operator_free(op);

        opr_operator_free(ptr::null_mut());
        opr_spectral_free(ptr::null_mut());
        assert_eq!(opr_operator_dim(ptr::null()), 0);
    }
}

#[test]
fn library_errors_map_to_codes() {
    unsafe {
        let mut op = ptr::null_mut();
        assert_eq!(opr_operator_power_law(-1.0, 100, &mut op), OprStatus::InvalidInput);
        assert!(op.is_null());
        assert!(last_error().contains("beta"), "{}", last_error());

        // mass 0.5 in total: no eigenvalue 1
        let terms = [0.25, 0.25];
        assert_eq!(opr_operator_new(1, terms.as_ptr(), 2, 1.5, false, &mut op), OprStatus::Ok);
        let mut spec = ptr::null_mut();
        assert_eq!(opr_spectral_new(op, &mut spec), OprStatus::NoUnitEigenvalue);
        opr_operator_free(op);

        assert_eq!(opr_operator_power_law(2.0, 500, &mut op), OprStatus::Ok);
        assert_eq!(opr_spectral_new(op, &mut spec), OprStatus::Ok);
        let mut exp = ptr::null_mut();
        assert_eq!(opr_expansion_new(op, spec, 100, 9, &mut exp), OprStatus::OrderUnsupported);
        opr_spectral_free(spec);
        opr_operator_free(op);

        // all return times even
        let mut tower = ptr::null_mut();
        let times = [2u64, 4];
        let probs = [0.5, 0.5];
        assert_eq!(
            opr_tower_from_returns(times.as_ptr(), probs.as_ptr(), 2, &mut tower),
            OprStatus::PeriodicReturns
        );
        assert!(!last_error().is_empty());
    }
}

#[test]
fn sequences() {
    let a = [1.0, 2.0, 3.0];
    let b = [1.0, 1.0, 0.0];
    let mut c = [0.0; 3];
    unsafe {
        assert_eq!(opr_convolve(a.as_ptr(), b.as_ptr(), 3, c.as_mut_ptr()), OprStatus::Ok);
    }
    for (x, y) in c.iter().zip([1.0, 3.0, 5.0]) {
        assert!((x - y).abs() < 1e-12, "{c:?}");
    }

    let values: Vec<f64> = (0..2000).map(|n| (n as f64 + 1.0).powf(-1.7)).collect();
    let (mut gamma, mut log_power) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            opr_rate_fit(values.as_ptr(), values.len(), 100, 1999, &mut gamma, &mut log_power),
            OprStatus::Ok
        );
    }
    assert!((gamma - 1.7).abs() < 1e-2, "{gamma}");
}

#[test]
fn lsv_model_and_observables() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(opr_lsv_new(0.5, 2000, 0.01, 400, &mut model), OprStatus::Ok);
        let mut c = 0.0;
        assert_eq!(opr_lsv_leading_constant(model, &mut c), OprStatus::Ok);
        assert!(c > 0.0);

        let spec = CString::new(r#"{"type":"bump","lo":0.6,"hi":0.9,"ramp":0.05}"#).unwrap();
        let mut f = ptr::null_mut();
        assert_eq!(opr_observable_new(model, spec.as_ptr(), &mut f), OprStatus::Ok);
        let mut mean = 0.0;
        assert_eq!(opr_observable_mean(f, &mut mean), OprStatus::Ok);
        assert!(mean > 0.0 && mean < 0.3, "{mean}");

        let mut cor = vec![0.0; 51];
        assert_eq!(opr_lsv_correlations(model, f, f, 50, cor.as_mut_ptr(), cor.len()), OprStatus::Ok);
        assert!(cor[0] > 0.0);
        assert!(cor[50].abs() < cor[0]);

        let bad = CString::new("{not json").unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(opr_observable_new(model, bad.as_ptr(), &mut g), OprStatus::Config);
        assert!(last_error().contains("observable spec"), "{}", last_error());

        opr_observable_free(f);
        opr_lsv_free(model);
    }
}

#[test]
fn tower_correlations_match_level_masses() {
    unsafe {
        let mut tower = ptr::null_mut();
        assert_eq!(opr_tower_power_law(1.3, 5000, &mut tower), OprStatus::Ok);
        let (mut m0, mut m1) = (0.0, 0.0);
        assert_eq!(opr_tower_level_mass(tower, 0, &mut m0), OprStatus::Ok);
        assert_eq!(opr_tower_level_mass(tower, 1, &mut m1), OprStatus::Ok);
        assert!(m0 > m1 && m1 > 0.0);

        let base = [1.0];
        let mut cor = vec![0.0; 21];
        assert_eq!(
            opr_tower_correlations(tower, base.as_ptr(), 1, base.as_ptr(), 1, 20, cor.as_mut_ptr(), cor.len()),
            OprStatus::Ok
        );
        // Cor(1_base, 1_base) = m0 (1 - m0)
        assert!((cor[0] - m0 * (1.0 - m0)).abs() < 1e-12);
        opr_tower_free(tower);
    }
}

#[test]
fn experiment_by_id() {
    let dir = std::env::temp_dir().join(format!("opr-ffi-{}", std::process::id()));
    let dir_c = CString::new(dir.to_str().unwrap()).unwrap();
    let id = CString::new("aperiodicity").unwrap();
    let mut passed = false;
    unsafe {
        assert_eq!(opr_experiment_run(id.as_ptr(), 1, dir_c.as_ptr(), &mut passed), OprStatus::Ok);
    }
    assert!(passed);
    assert!(dir.join("aperiodicity.csv").exists());
    assert!(dir.join("aperiodicity.json").exists());

    let unknown = CString::new("no-such-thing").unwrap();
    unsafe {
        assert_eq!(opr_experiment_run(unknown.as_ptr(), 1, dir_c.as_ptr(), &mut passed), OprStatus::Config);
    }
    assert!(last_error().contains("aperiodicity"), "{}", last_error());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(opr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/oprenewal.h");
    let src = include_str!("../src/lib.rs");
    for line in src.lines() {
        if let Some(rest) = line.strip_prefix("pub unsafe extern \"C\" fn ").or_else(|| line.strip_prefix("pub extern \"C\" fn ")) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
        }
    }
    assert!(header.contains("OPR_STATUS_BUFFER_TOO_SMALL = 14"));
    assert!(header.contains("typedef struct OprTower OprTower;"));
}

#[test]
fn c_program_links_against_header() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // the test binary lives in target/<profile>/deps, next to which cargo put the cdylib
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    if !lib_dir.join("liboprenewal_ffi.so").exists() {
        eprintln!("shared library not built in {}, skipping", lib_dir.display());
        return;
    }
    let bin = std::env::temp_dir().join(format!("opr-smoke-{}", std::process::id()));
    let status = std::process::Command::new(cc)
        .arg(manifest.join("examples/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(lib_dir)
        .arg("-loprenewal_ffi")
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = std::process::Command::new(&bin)
        .env("LD_LIBRARY_PATH", lib_dir)
        .output()
        .unwrap();
    std::fs::remove_file(&bin).ok();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "exit {:?}: {stdout}", out.status);
    assert!(stdout.contains("expected error: buffer holds 10 values, 1001 needed"), "{stdout}");
}
