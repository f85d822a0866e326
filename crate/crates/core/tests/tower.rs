use oprenewal::seq::synth_tail;
use oprenewal::tower::{
    scalar_renewal_oracle, tower_correlation_monte_carlo, tower_correlations, zero_mean_tower_decay,
    LevelObservable, TowerModel,
};
use oprenewal::Error;

fn power_tower(beta: f64) -> TowerModel {
    TowerModel::build(&synth_tail(1.0, beta, 0.0, 5000, None).unwrap(), 5000).unwrap()
}

#[test]
fn level_masses_sum_to_one() {
    let t = power_tower(1.5);
    let stored: f64 = (0..=5000).map(|l| t.level_mass(l)).sum();
    assert!((stored + t.level_tail_sum(5000) - 1.0).abs() < 1e-10);
}

#[test]
fn base_correlation_is_the_renewal_deviation() {
    let t = power_tower(1.3);
    let u = t.renewal_sequence(300);
    let p = t.return_probabilities(300);
    assert_eq!(u, scalar_renewal_oracle(&p, 300));
    let g = LevelObservable::indicator(0);
    let cor = tower_correlations(&t, &g, &g, 300).unwrap();
    let m0 = t.level_mass(0);
    for n in 1..=300 {
        assert!((cor[n] - m0 * (u[n] - m0)).abs() < 1e-14, "n = {n}");
    }
}

#[test]
fn exact_and_simulated_correlations_agree() {
    let t = power_tower(1.5);
    let f = LevelObservable::levels(vec![1.0, 0.5, -0.25]);
    let g = LevelObservable::indicator(1);
    let exact = tower_correlations(&t, &f, &g, 40).unwrap();
    for n in [0, 3, 17, 40] {
        let mc = tower_correlation_monte_carlo(&t, &f, &g, n, 200_000, 5).unwrap();
        // at n = 0 every sample lands on its start level, so the estimate is exact
        let tol = (4.0 * mc.std_error).max(1e-12);
        assert!((mc.value - exact[n]).abs() < tol, "n = {n}: {} vs {}", mc.value, exact[n]);
    }
}

#[test]
fn zero_mean_guard_and_periodicity() {
    let t = power_tower(1.3);
    let f = LevelObservable::indicator(0);
    assert!(matches!(
        zero_mean_tower_decay(&t, &f, &f, 50),
        Err(Error::NonZeroMean(_))
    ));
    assert!(matches!(
        TowerModel::from_returns(&[(3, 0.5), (6, 0.5)]),
        Err(Error::PeriodicReturns(3))
    ));
    assert!(TowerModel::from_returns(&[(2, 0.5), (3, 0.5)]).is_ok());
}
