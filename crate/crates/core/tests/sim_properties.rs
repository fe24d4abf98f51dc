use infogeo::belief::{Belief, BeliefChain, ProcessNoise};
use infogeo::linalg::{Matrix, Vector};
use infogeo::sim::{discretize_reference, event_trigger, monte_carlo, simulate, ReferenceTrajectory, VehicleModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn v2(x: f64, y: f64) -> Vector<f64> {
    Vector::from_vec(vec![x, y])
}

fn iso(s: f64) -> Matrix<f64> {
    Matrix::identity(2, 2) * s
}

fn reference(final_cov: f64) -> ReferenceTrajectory<f64> {
    let chain = BeliefChain::new(vec![
        Belief::new(v2(0.0, 0.0), iso(1e-4)).unwrap(),
        Belief::new(v2(0.2, 0.1), iso(1e-4)).unwrap(),
        Belief::new(v2(0.4, 0.4), iso(final_cov)).unwrap(),
    ])
    .unwrap();
    discretize_reference(&chain, 0.1, 0.01, &ProcessNoise::isotropic(2, 1e-3).unwrap()).unwrap()
}

fn single(v: f64) -> VehicleModel<f64> {
    VehicleModel::single_integrator(0.01, ProcessNoise::isotropic(2, 1e-4).unwrap(), iso(v)).unwrap()
}

fn double(v: f64) -> VehicleModel<f64> {
    let w = Matrix::from_diagonal(&Vector::from_vec(vec![1e-5, 1e-5, 1e-4, 1e-4]));
    VehicleModel::double_integrator(0.01, ProcessNoise::new(w).unwrap(), iso(v)).unwrap()
}

#[test]
fn reference_covariance_follows_open_loop_prior() {
    let r = reference(5e-5);
    let s = r.samples();
    assert_eq!(s[0].cov, iso(1e-4));
    // first edge is √0.05 long, sampled every 1e-3
    let k = 100;
    assert!((&s[k].cov - iso(1e-4 + 0.1 * 1e-3)).abs().max() < 1e-15);
    assert_eq!(s.last().unwrap().cov, iso(5e-5));
    assert_eq!(s.last().unwrap().mean, v2(0.4, 0.4));
}

#[test]
fn covariance_obeys_riccati_recursion() {
    let r = reference(5e-5);
    let model = single(1e-4);
    let trace = simulate(&r, &model, 4.605, &[], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let step = model.process_noise().matrix() * model.dt();
    let v_inv = model.measurement_noise().clone().try_inverse().unwrap();
    let mut p = r.samples()[0].cov.clone();
    for st in &trace.steps[1..] {
        p += &step;
        if st.measured {
            p = (p.try_inverse().unwrap() + &v_inv).try_inverse().unwrap();
        }
        assert!((&p - &st.estimate_cov).abs().max() < 1e-15);
    }
    assert_eq!(trace.measurement_count, trace.steps.iter().filter(|s| s.measured).count());
}

#[test]
fn measurements_happen_only_when_triggered() {
    let r = reference(5e-5);
    let model = single(1e-4);
    let trace = simulate(&r, &model, 4.605, &[], &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    assert!(trace.measurement_count > 0);
    let step = model.process_noise().matrix() * model.dt();
    for pair in trace.steps.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let predicted = Belief::new(cur.reference_mean.clone(), &prev.estimate_cov + &step).unwrap();
        let reference = Belief::new(cur.reference_mean.clone(), cur.reference_cov.clone()).unwrap();
        assert_eq!(cur.measured, event_trigger(&predicted, &reference, 4.605));
    }
}

#[test]
fn double_integrator_tracks_the_reference() {
    let r = reference(5e-5);
    let trace = simulate(&r, &double(1e-5), 4.605, &[], &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let worst = trace
        .steps
        .iter()
        .map(|s| (s.truth.rows(0, 2) - &s.reference_mean).norm())
        .fold(0.0, f64::max);
    assert!(worst < 0.05, "tracking error {worst}");
    assert!(trace.measurement_count > 0);
}

#[test]
fn single_run_statistics_equal_the_trace() {
    let r = reference(5e-5);
    for model in [single(1e-4), double(1e-4)] {
        let stats = monte_carlo(&r, &model, 1, 4.605, &[], 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        rng.set_stream(0);
        let trace = simulate(&r, &model, 4.605, &[], &mut rng).unwrap();
        assert_eq!(stats.counts, vec![trace.measurement_count]);
        assert_eq!(stats.mean, trace.measurement_count as f64);
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.collision_rate, if trace.collided { 1.0 } else { 0.0 });
    }
}

#[test]
fn monte_carlo_ignores_thread_count() {
    let r = reference(5e-5);
    let model = double(1e-4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo(&r, &model, 40, 4.605, &[], 5).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(3));
    assert_ne!(one.counts, monte_carlo(&r, &model, 40, 4.605, &[], 6).unwrap().counts);
    assert_eq!(one.histogram.values().sum::<usize>(), 40);
}

#[test]
fn dead_beat_counts_do_not_depend_on_noise() {
    // the estimate mean sits on the reference whenever the trigger is evaluated
    let stats = monte_carlo(&reference(5e-5), &single(1e-4), 20, 4.605, &[], 3).unwrap();
    assert_eq!(stats.histogram.len(), 1);
    assert_eq!(stats.std, 0.0);
}

#[test]
fn better_sensor_needs_fewer_measurements() {
    let r = reference(5e-5);
    let coarse = monte_carlo(&r, &single(1e-4), 100, 4.605, &[], 1).unwrap();
    let fine = monte_carlo(&r, &single(1e-6), 100, 4.605, &[], 1).unwrap();
    assert!(fine.mean <= coarse.mean, "{} vs {}", fine.mean, coarse.mean);
}
