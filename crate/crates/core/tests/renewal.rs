use nalgebra::DVector;

use oprenewal::renewal::{
    expansion_orders, renewal_solve, renewal_solve_accurate, spectral_data, write_expansion_csv,
    zero_projection_decay, Matrix, OperatorSeq, SolveOptions, SpectralOptions, TailMode,
};
use oprenewal::tower::scalar_renewal_oracle;
use oprenewal::Error;

#[test]
fn scalar_recursion_matches_oracle_to_ten_thousand() {
    let horizon = 10_000;
    let r = OperatorSeq::scalar_power_law(1.5, horizon).unwrap();
    let mut p = vec![0.0];
    p.extend((1..=horizon).map(|n| r.term(n)[(0, 0)]));
    let oracle = scalar_renewal_oracle(&p, horizon);
    let sol = renewal_solve_accurate(&r, horizon, SolveOptions::default()).unwrap();
    let worst = (0..=horizon)
        .map(|n| (sol.matrix(n)[(0, 0)] - oracle[n]).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn rank_one_lift_is_the_scalar_solution_times_pi() {
    let horizon = 10_000;
    let scalar = OperatorSeq::scalar_power_law(2.0, horizon).unwrap();
    let pi = Matrix::from_row_slice(2, 2, &[0.25, 0.75, 0.25, 0.75]);
    let lifted = OperatorSeq::lift(&scalar, &pi).unwrap();
    let ts = renewal_solve(&scalar, horizon).unwrap();
    let tl = renewal_solve(&lifted, horizon).unwrap();
    assert_eq!(tl[0], Matrix::identity(2, 2));
    for n in 1..=horizon {
        let expect = &pi * ts[n][(0, 0)];
        assert!((&tl[n] - &expect).amax() < 1e-12, "n = {n}");
    }
}

fn mixed() -> OperatorSeq {
    let a = Matrix::from_row_slice(2, 2, &[0.7, 0.3, 0.4, 0.6]);
    let b = Matrix::from_row_slice(2, 2, &[0.2, 0.8, 0.5, 0.5]);
    let scalar = OperatorSeq::scalar_power_law(1.7, 3000).unwrap();
    let short = [0.2, 0.15, 0.05];
    let terms = (1..=3000)
        .map(|n| {
            let mut m = &a * (0.6 * scalar.term(n)[(0, 0)]);
            if n <= 3 {
                m += &b * short[n - 1];
            }
            m
        })
        .collect();
    let amp = &a * (0.6 * scalar.tail_amplitude().unwrap()[(0, 0)]);
    OperatorSeq::with_tail_amplitude(terms, 1.7, amp).unwrap()
}

#[test]
fn spectral_projection_invariants() {
    let r = mixed();
    let s = spectral_data(&r, SpectralOptions::default()).unwrap();
    let p = &s.projection;
    let total = r.total();
    assert!((p * p - p).amax() < 1e-12);
    assert!((&total * p - p).amax() < 1e-12);
    assert!((p * &total - p).amax() < 1e-12);
    let mu_trace = (p * r.derivative_at_one() * p).trace() / p.trace();
    assert!((s.mu - mu_trace).abs() < 1e-10 * s.mu);
    assert!(s.second_modulus < 1.0);
}

#[test]
fn renewal_theorem_limit_is_approached() {
    let r = mixed();
    let s = spectral_data(&r, SpectralOptions::default()).unwrap();
    let reports = expansion_orders(&r, &s, 3000, &[1, 2]).unwrap();
    let d = &reports[0].limit_distance;
    assert!(d[3000] < 1e-2 && d[3000] < d[300]);
    // the second order is the better approximation at large n
    assert!(reports[1].residual_norms[3000] < 0.2 * reports[0].residual_norms[3000]);

    let mut buf = Vec::new();
    write_expansion_csv(&reports, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "n,limit_distance,residual_order1,residual_order2,prediction_00,prediction_01,prediction_10,prediction_11"
    );
    assert_eq!(text.lines().count(), 3002);
}

#[test]
fn error_paths() {
    let sub = OperatorSeq::scalar(&[0.3, 0.2], 2.0).unwrap();
    assert!(matches!(
        spectral_data(&sub, SpectralOptions::default()),
        Err(Error::NoUnitEigenvalue { .. })
    ));
    let id = OperatorSeq::new(vec![Matrix::identity(2, 2)], 2.0, TailMode::ExactFinite).unwrap();
    assert!(matches!(spectral_data(&id, SpectralOptions::default()), Err(Error::NotSimple(_))));

    let r = mixed();
    let s = spectral_data(&r, SpectralOptions::default()).unwrap();
    let generic = DVector::from_vec(vec![1.0, 0.0]);
    assert!(matches!(
        zero_projection_decay(&r, &s, &generic, 10),
        Err(Error::ProjectionNotZero { .. })
    ));

    let big = OperatorSeq::scalar(&[1.5], 2.0).unwrap();
    assert!(matches!(
        renewal_solve_accurate(&big, 200, SolveOptions::default()),
        Err(Error::Divergent { .. })
    ));
}
