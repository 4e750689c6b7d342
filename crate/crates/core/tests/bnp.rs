use std::time::Duration;

use qbpp::bnp::{
    apply_branch, initial_incumbent, root_lower_bound, select_branch_pair, solve, solve_node, trivial_lower_bound,
    BnPNode, BranchSide, SolveParams, SolveStatus,
};
use qbpp::generator::{generate_instance, GeneratorConfig};
use qbpp::oracle::{solve_exact, OracleConstraints};
use qbpp::{validate_solution, Instance, SignRegime};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn generated(seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(4..=9);
    let sigma = SignRegime::ALL[rng.gen_range(0..3)];
    let mu = [0.6, 1.0, 2.0][rng.gen_range(0..3)];
    let delta = [0.25, 0.5, 0.75][rng.gen_range(0..3)];
    generate_instance(&GeneratorConfig::new(n, mu, delta, sigma, seed), 1).unwrap()
}

#[test]
fn matches_oracle_on_generated_instances() {
    for seed in 0..120 {
        let inst = generated(seed);
        let exact = solve_exact(&inst, None).unwrap().objective;
        for (h, c) in [(1, 1), (5, 10)] {
            let r = solve(&inst, &SolveParams::with_config(h, c)).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}");
            assert_eq!(r.upper_bound, exact, "seed {seed} config {h}x{c}");
            assert_eq!(r.lower_bound, exact as f64);
            assert_eq!(r.gap_percent, 0.0);
            let sol = r.best_solution.unwrap();
            assert!(validate_solution(&inst, &sol).is_valid());
            assert!(r.stats.root_lower_bound.unwrap() <= exact as f64 + 1e-6);
        }
    }
}

#[test]
fn node_bounds_never_exceed_the_constrained_optimum() {
    let mut rng = StdRng::seed_from_u64(9);
    let params = SolveParams::default();
    let mut nodes = 0;
    for seed in 0..60 {
        let inst = generated(1000 + seed);
        let mut node = BnPNode::root(&inst).unwrap();
        let mut id = 1;
        loop {
            assert!(solve_node(&inst, &mut node, &params).unwrap());
            nodes += 1;
            let constraints = OracleConstraints {
                conflicts: node.conflicts().to_vec(),
                groups: node.groups().to_vec(),
            };
            let opt = solve_exact(&inst, Some(&constraints)).unwrap().objective;
            assert!(
                node.lower_bound() <= opt as f64 + 1e-6,
                "seed {seed}: {} > {opt}",
                node.lower_bound()
            );
            if node.is_integral() {
                let sol = node.integral_solution(&inst).unwrap().unwrap();
                assert!(sol.objective >= opt);
                break;
            }
            let pair = select_branch_pair(&node).unwrap();
            assert!(node.undecided(pair.0, pair.1));
            let side = if rng.gen_bool(0.5) {
                BranchSide::Zero
            } else {
                BranchSide::One
            };
            let child = apply_branch(&inst, &node, pair, side, id).unwrap();
            id += 1;
            assert!(!child.undecided(pair.0, pair.1));
            assert_eq!(child.lower_bound(), node.lower_bound());
            let together = |s: &[usize]| s.contains(&pair.0) && s.contains(&pair.1);
            for col in child.master().columns() {
                match side {
                    BranchSide::Zero => assert!(!together(&col.support)),
                    BranchSide::One => assert_eq!(col.support.contains(&pair.0), col.support.contains(&pair.1)),
                }
            }
            node = child;
        }
    }
    assert!(nodes >= 60);
}

#[test]
fn root_bound_does_not_depend_on_the_pricer_configuration() {
    for seed in 0..40 {
        let inst = generated(500 + seed);
        let a = root_lower_bound(&inst, &SolveParams::with_config(1, 1))
            .unwrap()
            .unwrap();
        let b = root_lower_bound(&inst, &SolveParams::with_config(5, 10))
            .unwrap()
            .unwrap();
        assert!((a - b).abs() <= 1e-6, "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn incumbent_and_trivial_bound_bracket_the_optimum() {
    for seed in 0..100 {
        let inst = generated(seed);
        let sol = initial_incumbent(&inst).unwrap();
        assert!(validate_solution(&inst, &sol).is_valid());
        let exact = solve_exact(&inst, None).unwrap().objective;
        assert!(trivial_lower_bound(&inst) <= exact as f64);
        assert!(sol.objective >= exact);
    }
}

#[test]
fn limits_report_consistent_bounds() {
    let inst = generate_instance(&GeneratorConfig::new(25, 0.6, 0.5, SignRegime::Minus, 3), 1).unwrap();
    let params = SolveParams {
        time_limit: Some(Duration::from_millis(1)),
        ..SolveParams::default()
    };
    let r = solve(&inst, &params).unwrap();
    let sol = r.best_solution.as_ref().unwrap();
    assert!(validate_solution(&inst, sol).is_valid());
    assert_eq!(sol.objective, r.upper_bound);
    assert!(r.lower_bound <= r.upper_bound as f64);
    assert!(r.lower_bound >= trivial_lower_bound(&inst));
    assert!(r.gap_percent.is_finite());

    let params = SolveParams {
        node_limit: Some(1),
        ..SolveParams::default()
    };
    let r = solve(&generated(7), &params).unwrap();
    assert!(r.stats.nodes <= 1);
    assert!(matches!(r.status, SolveStatus::Optimal | SolveStatus::NodeLimit));
}

#[test]
fn trace_records_column_generation() {
    let inst = generated(42);
    let params = SolveParams {
        trace: true,
        ..SolveParams::default()
    };
    let r = solve(&inst, &params).unwrap();
    assert_eq!(r.trace.iter().map(|t| t.columns_added).sum::<usize>(), r.stats.columns);
    assert!(r.trace.iter().all(|t| t.pricer == "mch" || t.pricer == "exact"));
    let quiet = solve(&inst, &SolveParams::default()).unwrap();
    assert!(quiet.trace.is_empty());
    assert_eq!(quiet.upper_bound, r.upper_bound);
}
