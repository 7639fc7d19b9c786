use proptest::prelude::*;

use fracbvp::fbvp::{solve, Route, SolveRequest};
use fracbvp::par::{monte_carlo, sample, Exec};
use fracbvp::randomtimes::{k_alpha, sample_inverse_stable, sample_stable};
use fracbvp::specfun::{dirichlet_survival, mittag_leffler, MLSeriesBudget};
use fracbvp::Params;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mittag_leffler_decreases_on_the_negative_axis(a in 0.1f64..=1.0, z in -40.0f64..-0.01, dz in 0.01f64..2.0) {
        let b = MLSeriesBudget::default();
        let hi = mittag_leffler(a, z, &b).unwrap();
        let lo = mittag_leffler(a, z - dz, &b).unwrap();
        prop_assert!(hi > 0.0 && hi <= 1.0);
        prop_assert!(lo < hi, "E({}) = {lo} >= E({z}) = {hi}", z - dz);
    }

    #[test]
    fn k_alpha_is_a_laplace_transform_value(a in 0.2f64..0.95, sigma in 0.0f64..3.0, kappa in 0.0f64..5.0, s in 0.01f64..5.0) {
        let p = Params::new(a, 1.0, sigma, 1.0).unwrap();
        let v = k_alpha(&p, kappa, s).unwrap();
        prop_assert!(v > 0.0 && v <= 1.0 + 1e-12, "{v}");
    }

    #[test]
    fn samplers_stay_in_their_support(a in 0.1f64..0.99, t in 0.01f64..10.0, seed in any::<u64>()) {
        let h = sample(64, seed, Exec::Sequential, |rng| sample_stable(a, t, rng).unwrap());
        prop_assert!(h.iter().all(|v| *v >= 0.0 && v.is_finite()));
        let l = sample(64, seed, Exec::Sequential, |rng| sample_inverse_stable(a, t, rng).unwrap());
        prop_assert!(l.iter().all(|v| *v >= 0.0 && v.is_finite()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn survival_lies_between_the_atom_and_one(
        a in 0.3f64..0.95, sigma in 0.0f64..2.0, c in 0.0f64..3.0, t in 0.1f64..3.0, x in 0.0f64..2.0,
    ) {
        let p = Params::new(a, 1.0, sigma, c).unwrap();
        let u = solve(&SolveRequest::new(p, t, x, Route::Laplace)).unwrap().value;
        let atom = dirichlet_survival(t, x).unwrap();
        prop_assert!(u >= atom - 1e-8 && u <= 1.0 + 1e-8, "u = {u}, atom = {atom}");
    }
}

#[test]
fn monte_carlo_is_independent_of_execution_mode() {
    let draw = |rng: &mut fracbvp::RngStream| rng.normal().powi(2);
    let a = monte_carlo(50_000, 9, Exec::Sequential, draw);
    let b = monte_carlo(50_000, 9, Exec::Parallel, draw);
    assert_eq!(a, b);
}
