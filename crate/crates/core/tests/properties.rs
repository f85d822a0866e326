use nalgebra::DVector;
use proptest::prelude::*;

use oprenewal::renewal::{oracle, renewal_apply, renewal_solve, Matrix, OperatorSeq, SolveOptions, TailMode};
use oprenewal::seq::{convolve, DecaySeq};
use oprenewal::tower::{tower_correlations, LevelObservable, TowerModel};

fn seq(values: Vec<f64>) -> DecaySeq {
    DecaySeq::measured(values)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

fn operator(dim: usize, entries: &[f64]) -> OperatorSeq {
    let block = dim * dim;
    let terms = entries
        .chunks(block)
        .filter(|c| c.len() == block)
        .map(|c| Matrix::from_row_slice(dim, dim, c))
        .collect();
    OperatorSeq::new(terms, 2.0, TailMode::ExactFinite).unwrap()
}

fn input() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(dim, support)| {
        let bound = 0.9 / (dim * support) as f64;
        (Just(dim), prop::collection::vec(0.0..bound, dim * dim * support))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_commutes(a in prop::collection::vec(-1.0..1.0f64, 1..400),
                            b in prop::collection::vec(-1.0..1.0f64, 1..400)) {
        let n = a.len().min(b.len());
        let (a, b) = (seq(a[..n].to_vec()), seq(b[..n].to_vec()));
        prop_assert!(close(&convolve(&a, &b).values, &convolve(&b, &a).values, 1e-11));
    }

    #[test]
    fn convolution_associates(v in prop::collection::vec(-1.0..1.0f64, 3..600)) {
        let n = v.len() / 3;
        let a = seq(v[..n].to_vec());
        let b = seq(v[n..2 * n].to_vec());
        let c = seq(v[2 * n..3 * n].to_vec());
        let left = convolve(&convolve(&a, &b), &c);
        let right = convolve(&a, &convolve(&b, &c));
        prop_assert!(close(&left.values, &right.values, 1e-10));
    }

    #[test]
    fn recursion_matches_compositions((dim, entries) in input()) {
        let r = operator(dim, &entries);
        let n_max = 12;
        let t = renewal_solve(&r, n_max).unwrap();
        let terms: Vec<Matrix> = r.stored_terms().to_vec();
        for (n, tn) in t.iter().enumerate() {
            let brute = oracle::composition_sum(&terms, dim, n);
            prop_assert!((tn - &brute).amax() < 1e-12, "n = {}", n);
        }
    }

    #[test]
    fn apply_is_linear((dim, entries) in input(), a in -2.0..2.0f64, b in -2.0..2.0f64, seed in 0u64..1000) {
        let r = operator(dim, &entries);
        let f = DVector::from_fn(dim, |i, _| ((seed + i as u64) % 7) as f64 - 3.0);
        let g = DVector::from_fn(dim, |i, _| ((seed * 3 + i as u64) % 5) as f64 - 2.0);
        let opts = SolveOptions::default();
        let lhs = renewal_apply(&r, &(&f * a + &g * b), 30, opts).unwrap();
        let yf = renewal_apply(&r, &f, 30, opts).unwrap();
        let yg = renewal_apply(&r, &g, 30, opts).unwrap();
        for n in 0..=30 {
            let rhs = &yf[n] * a + &yg[n] * b;
            prop_assert!((&lhs[n] - &rhs).amax() <= 1e-12 * (1.0 + rhs.amax()));
        }
    }

    #[test]
    fn text_format_round_trips((dim, entries) in input()) {
        let r = operator(dim, &entries);
        let back = OperatorSeq::from_text(&r.to_text()).unwrap();
        prop_assert_eq!(back.stored_terms(), r.stored_terms());
    }

    #[test]
    fn tower_correlation_is_bilinear(f1 in prop::collection::vec(-1.0..1.0f64, 1..4),
                                     f2 in prop::collection::vec(-1.0..1.0f64, 1..4),
                                     g in prop::collection::vec(-1.0..1.0f64, 1..4),
                                     a in -2.0..2.0f64) {
        let tower = TowerModel::from_returns(&[(1, 0.3), (2, 0.3), (3, 0.2), (5, 0.2)]).unwrap();
        let len = f1.len().max(f2.len());
        let pad = |v: &[f64]| { let mut v = v.to_vec(); v.resize(len, 0.0); v };
        let combo: Vec<f64> = pad(&f1).iter().zip(pad(&f2)).map(|(x, y)| a * x + y).collect();
        let g = LevelObservable::levels(g);
        let n = 25;
        let c1 = tower_correlations(&tower, &LevelObservable::levels(f1), &g, n).unwrap();
        let c2 = tower_correlations(&tower, &LevelObservable::levels(f2), &g, n).unwrap();
        let cc = tower_correlations(&tower, &LevelObservable::levels(combo), &g, n).unwrap();
        for k in 0..=n {
            prop_assert!((cc[k] - (a * c1[k] + c2[k])).abs() < 1e-13);
        }
    }
}
