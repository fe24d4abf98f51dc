use infogeo::belief::{chain_cost, is_lossless, steering_cost, Belief, ProcessNoise};
use infogeo::geometry::{segment_collision_free, AaBox, ConvexObstacle, CovSampleBounds, Environment};
use infogeo::linalg::{Matrix, Vector};
use infogeo::planner::{
    best_goal_node, branch_and_bound, dhat, extract_path, goal_lower_bound, nearest, neighbors, plan, start_cost_to_go,
    Algorithm, BeliefTree, Orientation, Planner, PlannerConfig,
};
use proptest::prelude::*;

fn v2(x: f64, y: f64) -> Vector<f64> {
    Vector::from_vec(vec![x, y])
}

fn iso(s: f64) -> Matrix<f64> {
    Matrix::identity(2, 2) * s
}

fn block_env() -> Environment<f64> {
    let block = ConvexObstacle::new(vec![v2(0.4, 0.3), v2(0.6, 0.3), v2(0.6, 0.7), v2(0.4, 0.7)]).unwrap();
    Environment::new(
        vec![block],
        AaBox::new(v2(0.0, 0.0), v2(1.0, 1.0)).unwrap(),
        Belief::new(v2(0.1, 0.5), iso(1e-5)).unwrap(),
        AaBox::new(v2(0.85, 0.45), v2(0.95, 0.55)).unwrap(),
        iso(1e-5),
        4.605,
    )
    .unwrap()
}

fn config(alpha: f64, n: usize, seed: u64) -> PlannerConfig<f64> {
    PlannerConfig::new(
        alpha,
        ProcessNoise::isotropic(2, 1e-3).unwrap(),
        n,
        0.1,
        1.5,
        CovSampleBounds::new(1e-6, 2e-5).unwrap(),
        seed,
    )
    .unwrap()
}

const ALGORITHMS: [Algorithm; 3] = [Algorithm::Basic, Algorithm::Improved, Algorithm::Backward];

#[test]
fn trees_are_consistent() {
    let env = block_env();
    for alg in ALGORITHMS {
        let cfg = config(0.3, 800, 5);
        let tree = plan(&cfg, &env, alg).unwrap();
        assert!(tree.is_well_formed(), "{alg:?}");
        assert!(tree.len() > 50, "{alg:?} grew only {} nodes", tree.len());
        let err = tree.max_cost_error(cfg.alpha(), cfg.process_noise()).unwrap();
        assert!(err < 1e-9, "{alg:?} cost drift {err}");
        let w = cfg.process_noise();
        for i in 1..tree.len() {
            let p = tree.parent(i).unwrap();
            let (from, to) = match alg {
                Algorithm::Backward => (tree.node(i), tree.node(p)),
                _ => (tree.node(p), tree.node(i)),
            };
            assert!(is_lossless(from, to, w, 1e-9).unwrap(), "{alg:?} edge {p}-{i}");
            assert!(segment_collision_free(from, to.mean(), w, &env), "{alg:?} edge {p}-{i}");
        }
    }
}

#[test]
fn same_seed_same_tree() {
    let env = block_env();
    for alg in ALGORITHMS {
        let a = plan(&config(0.5, 400, 9), &env, alg).unwrap();
        let b = plan(&config(0.5, 400, 9), &env, alg).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.costs(), b.costs());
        assert_eq!((0..a.len()).map(|i| a.parent(i)).collect::<Vec<_>>(), (0..b.len()).map(|i| b.parent(i)).collect::<Vec<_>>());
        let c = plan(&config(0.5, 400, 10), &env, alg).unwrap();
        assert_ne!(a.nodes(), c.nodes());
    }
}

#[test]
fn best_cost_never_increases() {
    let env = block_env();
    for alg in ALGORITHMS {
        let cfg = config(0.2, 3000, 2);
        let mut planner = Planner::new(&cfg, &env, alg).unwrap();
        let mut last = f64::INFINITY;
        let mut found = false;
        while !planner.finished() {
            planner.step().unwrap();
            if let Some(c) = planner.best_cost() {
                assert!(c <= last + 1e-12, "{alg:?}: {c} after {last}");
                last = c;
                found = true;
            }
        }
        assert!(found, "{alg:?} never reached the goal");
    }
}

#[test]
fn extracted_path_cost_matches_tree() {
    let env = block_env();
    let cfg = config(0.4, 3000, 4);
    for alg in ALGORITHMS {
        let tree = plan(&cfg, &env, alg).unwrap();
        let path = extract_path(&tree, &env, &cfg).unwrap();
        let cost = chain_cost(&path, cfg.alpha(), cfg.process_noise()).unwrap().total;
        let expected = match alg {
            Algorithm::Backward => start_cost_to_go(&tree, &env, &cfg).unwrap().0,
            _ => tree.cost(best_goal_node(&tree, &env).unwrap()),
        };
        assert!((cost - expected).abs() < 1e-9, "{alg:?}: {cost} vs {expected}");
        assert_eq!(path.first(), env.start());
        assert!(env.in_goal(path.last()));
    }
}

#[test]
fn goal_bound_is_a_lower_bound() {
    let env = block_env();
    let cfg = config(0.5, 3000, 6);
    let tree = plan(&cfg, &env, Algorithm::Improved).unwrap();
    let (alpha, w) = (cfg.alpha(), cfg.process_noise());
    let mut checked = 0;
    for g in (0..tree.len()).filter(|&g| env.in_goal(tree.node(g))) {
        for n in tree.path_from_root(g) {
            let lb = goal_lower_bound(tree.node(n), &env, alpha, w).unwrap();
            assert!(tree.cost(g) - tree.cost(n) >= lb - 1e-9);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn pruning_keeps_best_path_and_drops_hopeless_nodes() {
    let env = block_env();
    let cfg = config(0.5, 1500, 8).with_bnb_period(usize::MAX).unwrap();
    let mut tree = plan(&cfg, &env, Algorithm::Improved).unwrap();
    let best = tree.cost(best_goal_node(&tree, &env).unwrap());
    let before = tree.len();
    branch_and_bound(&mut tree, &env, cfg.alpha(), cfg.process_noise());
    assert!(tree.is_well_formed());
    assert!(tree.len() <= before);
    assert_eq!(tree.cost(best_goal_node(&tree, &env).unwrap()), best);
    let (alpha, w) = (cfg.alpha(), cfg.process_noise());
    let on_path = tree.path_from_root(best_goal_node(&tree, &env).unwrap());
    for i in (0..tree.len()).filter(|i| !on_path.contains(i)) {
        let lb = goal_lower_bound(tree.node(i), &env, alpha, w).unwrap();
        assert!(tree.cost(i) + lb < best);
    }
}

#[test]
fn backward_tree_stores_cost_to_go() {
    let env = block_env();
    let cfg = config(0.3, 1000, 1);
    let tree = plan(&cfg, &env, Algorithm::Backward).unwrap();
    assert_eq!(tree.orientation(), Orientation::Backward);
    assert_eq!(tree.node(0), &env.goal_belief());
    for i in 1..tree.len() {
        let p = tree.parent(i).unwrap();
        let d = steering_cost(tree.node(i), tree.node(p), cfg.alpha(), cfg.process_noise()).unwrap().total;
        assert!((tree.cost(i) - tree.cost(p) - d).abs() < 1e-9);
    }
}

fn random_tree(points: &[(f64, f64, f64)]) -> BeliefTree<f64> {
    let mut t = BeliefTree::new(Belief::new(v2(0.0, 0.0), iso(1.0)).unwrap(), Orientation::Forward);
    for &(x, y, p) in points {
        t.push(Belief::new(v2(x, y), iso(p)).unwrap(), 0, 1.0);
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nearest_and_radius_match_linear_scan(
        points in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0), 1..60),
        q in (-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0),
        radius in 0.0f64..2.0,
    ) {
        let tree = random_tree(&points);
        let query = Belief::new(v2(q.0, q.1), iso(q.2)).unwrap();
        let dists: Vec<f64> = tree.nodes().iter().map(|n| dhat(n, &query)).collect();
        let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
        let first = dists.iter().position(|&d| d == min).unwrap();
        prop_assert_eq!(nearest(&tree, &query).unwrap(), first);
        let within: Vec<usize> = (0..dists.len()).filter(|&i| dists[i] <= radius).collect();
        prop_assert_eq!(neighbors(&tree, &query, radius), within);
    }

    #[test]
    fn dhat_is_a_metric(
        a in (-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0),
        b in (-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0),
        c in (-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0),
    ) {
        let mk = |t: (f64, f64, f64)| Belief::new(v2(t.0, t.1), iso(t.2)).unwrap();
        let (a, b, c) = (mk(a), mk(b), mk(c));
        prop_assert_eq!(dhat(&a, &a), 0.0);
        prop_assert!((dhat(&a, &b) - dhat(&b, &a)).abs() < 1e-15);
        prop_assert!(dhat(&a, &c) <= dhat(&a, &b) + dhat(&b, &c) + 1e-12);
    }
}
