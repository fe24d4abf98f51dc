use infogeo::belief::{
    chain_cost, chain_lossless_modify, info_cost, is_lossless, lossless_project, prior_covariance, steering_cost,
    Belief, BeliefChain, ProcessNoise,
};
use infogeo::linalg::{min_eigenvalue, Matrix, Vector};
use infogeo::sensing::{constrained_posterior, synthesize_sensor};
use infogeo_testkit::{info_oracle, maxdet_oracle};
use proptest::prelude::*;

fn spd(d: usize, floor: f64) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, d * d).prop_map(move |v| {
        let a = Matrix::from_vec(d, d, v);
        &a * a.transpose() + Matrix::identity(d, d) * floor
    })
}

fn belief(d: usize, floor: f64) -> impl Strategy<Value = Belief<f64>> {
    (prop::collection::vec(-2.0f64..2.0, d), spd(d, floor))
        .prop_map(|(m, p)| Belief::new(Vector::from_vec(m), p).unwrap())
}

fn noise(d: usize) -> ProcessNoise<f64> {
    ProcessNoise::new(Matrix::from_fn(d, d, |i, j| if i == j { 0.05 } else { 0.01 })).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_matches_barrier_oracle(
        (a, b) in (1usize..=3).prop_flat_map(|d| (spd(d, 0.05), spd(d, 0.05)))
    ) {
        let q = lossless_project(&a, &b).unwrap();
        let oracle = maxdet_oracle(&a, &b);
        prop_assert!((q.determinant().ln() - oracle.determinant().ln()).abs() < 1e-6);
        prop_assert!((info_cost(&a, &b).unwrap() - info_oracle(&a, &b)).abs() < 1e-6);
    }

    #[test]
    fn projection_is_below_both(a in spd(3, 0.01), b in spd(3, 0.01)) {
        let q = lossless_project(&a, &b).unwrap();
        prop_assert!(min_eigenvalue(&(&a - &q)).unwrap() > -1e-9);
        prop_assert!(min_eigenvalue(&(&b - &q)).unwrap() > -1e-9);
    }

    #[test]
    fn projection_beats_feasible_samples(a in spd(2, 0.01), b in spd(2, 0.01), trial in spd(2, 0.001)) {
        let q = lossless_project(&a, &b).unwrap();
        // shrink the trial until it sits below both caps
        let mut t = trial;
        while min_eigenvalue(&(&a - &t)).unwrap() < 0.0 || min_eigenvalue(&(&b - &t)).unwrap() < 0.0 {
            t *= 0.5;
        }
        prop_assert!(q.determinant().ln() >= t.determinant().ln() - 1e-9);
    }

    #[test]
    fn info_is_nonnegative_and_zero_when_ordered(a in spd(2, 0.01), b in spd(2, 0.01)) {
        prop_assert!(info_cost(&a, &b).unwrap() >= 0.0);
        let bigger = &a + &b;
        prop_assert!(info_cost(&a, &bigger).unwrap().abs() < 1e-12);
    }

    #[test]
    fn info_monotone_in_prior(a in spd(2, 0.01), b in spd(2, 0.01), c in spd(2, 0.01)) {
        let grown = &a + &c;
        prop_assert!(info_cost(&grown, &b).unwrap() >= info_cost(&a, &b).unwrap() - 1e-9);
    }

    #[test]
    fn triangle_inequality(
        x in belief(2, 0.01),
        y in belief(2, 0.01),
        z in belief(2, 0.01),
        alpha in 0.0f64..3.0,
    ) {
        let w = noise(2);
        let xz = steering_cost(&x, &z, alpha, &w).unwrap().total;
        let xy = steering_cost(&x, &y, alpha, &w).unwrap().total;
        let yz = steering_cost(&y, &z, alpha, &w).unwrap().total;
        prop_assert!(xz <= xy + yz + 1e-9);
    }

    #[test]
    fn identical_beliefs_cost_nothing(x in belief(3, 0.01), alpha in 0.0f64..3.0) {
        prop_assert_eq!(steering_cost(&x, &x, alpha, &noise(3)).unwrap().total, 0.0);
    }

    #[test]
    fn lossless_modification_never_costs_more(
        nodes in prop::collection::vec(belief(2, 0.01), 2..10),
        alpha in 0.0f64..2.0,
    ) {
        let w = noise(2);
        let chain = BeliefChain::new(nodes).unwrap();
        let modified = chain_lossless_modify(&chain, &w).unwrap();
        let before = chain_cost(&chain, alpha, &w).unwrap().total;
        let after = chain_cost(&modified, alpha, &w).unwrap().total;
        prop_assert!(after <= before + 1e-9);
        for (orig, m) in chain.nodes().iter().zip(modified.nodes()) {
            prop_assert_eq!(orig.mean(), m.mean());
            prop_assert!(min_eigenvalue(&(orig.cov() - m.cov())).unwrap() > -1e-9);
        }
        for pair in modified.nodes().windows(2) {
            prop_assert!(is_lossless(&pair[0], &pair[1], &w, 1e-9).unwrap());
        }
    }

    #[test]
    fn synthesized_sensor_reproduces_posterior(from in belief(3, 0.01), to_mean in prop::collection::vec(-2.0f64..2.0, 3), shrink in 0.05f64..1.0) {
        let w = noise(3);
        let dist = (Vector::from_vec(to_mean) - from.mean()).norm();
        let prior = prior_covariance(from.cov(), dist, &w).unwrap();
        let post = &prior * shrink;
        let sensor = synthesize_sensor(&prior, &post).unwrap();
        let got = constrained_posterior(&prior, &sensor.model).unwrap();
        prop_assert!((got - post).abs().max() < 1e-9);
    }
}

#[test]
fn scalar_examples() {
    let four = Matrix::from_element(1, 1, 4.0);
    let one = Matrix::from_element(1, 1, 1.0);
    assert!((info_cost(&four, &one).unwrap() - 0.5 * 4f64.ln()).abs() < 1e-15);
    assert_eq!(info_cost(&one, &four).unwrap(), 0.0);
}

#[test]
fn f32_agrees_with_f64() {
    let a = Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
    let b = Matrix::from_row_slice(2, 2, &[0.5, -0.1, -0.1, 1.5]);
    let wide = info_cost(&a, &b).unwrap();
    let narrow = info_cost(&a.map(|x| x as f32), &b.map(|x| x as f32)).unwrap();
    assert!((wide - narrow as f64).abs() < 1e-4);
}
