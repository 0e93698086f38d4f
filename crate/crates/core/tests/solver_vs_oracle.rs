//! End-to-end agreement between the elimination solver and the dense
//! reference solvers on randomized instances.

mod common;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{random_convex_quadratic, random_feasible_min_time, random_feasible_nonuniform};
use retiming::elimination::{forward_pass, solve, ObjectiveKind, SolveError};
use retiming::generators::simple_benchmark;
use retiming::oracle::{qopp_oracle, reach_bounds, topp_oracle};

#[test]
fn min_time_profiles_match_greedy_reference() {
    let mut rng = StdRng::seed_from_u64(0x70c1);
    for trial in 0..120 {
        let p = random_feasible_min_time(&mut rng, 12, 4);
        let sol = solve(&p).unwrap_or_else(|e| panic!("trial {trial}: solver failed: {e}"));
        let reference = topp_oracle(&p).unwrap_or_else(|e| panic!("trial {trial}: oracle: {e}"));
        for (k, (a, b)) in sol.x.iter().zip(&reference.x).enumerate() {
            assert!(
                (a - b).abs() <= 1e-7,
                "trial {trial} step {k}: solver {a} vs oracle {b}"
            );
        }
        assert!(sol.max_constraint_violation(&p) <= 1e-9);
        assert!(sol.max_dynamics_residual(&p) <= 1e-12);
    }
}

#[test]
fn quadratic_profiles_match_certified_reference() {
    let mut rng = StdRng::seed_from_u64(0x9072);
    for trial in 0..60 {
        let p = random_convex_quadratic(&mut rng, 10);
        let sol = solve(&p).unwrap_or_else(|e| panic!("trial {trial}: solver failed: {e}"));
        let reference = qopp_oracle(&p).unwrap_or_else(|e| panic!("trial {trial}: oracle: {e}"));
        let (v_sol, v_ref) = (
            sol.objective_value.unwrap(),
            reference.objective_value.unwrap(),
        );
        assert!(
            v_sol <= v_ref + 1e-8 + 1e-8 * v_ref.abs(),
            "trial {trial}: solver objective {v_sol} worse than oracle {v_ref}"
        );
        for (k, (a, b)) in sol.x.iter().zip(&reference.x).enumerate() {
            assert!(
                (a - b).abs() <= 2e-5,
                "trial {trial} step {k}: solver {a} vs oracle {b}"
            );
        }
    }
}

#[test]
fn reach_intervals_are_sound_and_complete() {
    let mut rng = StdRng::seed_from_u64(0x5eac);
    for trial in 0..60 {
        let p = random_feasible_min_time(&mut rng, 8, 3);
        let (_, diagnostics) = forward_pass(&p, ObjectiveKind::MinimumTime)
            .unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        for (k, interval) in diagnostics.reach.iter().enumerate() {
            let dense = reach_bounds(&p, k).unwrap();
            for (ours, theirs) in [(interval.lo, dense.lo), (interval.hi, dense.hi)] {
                if ours.is_finite() || theirs.is_finite() {
                    assert!(
                        (ours - theirs).abs() <= 1e-8,
                        "trial {trial} step {k}: reach {interval:?} vs dense {dense:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn greedy_is_lexicographic_on_small_instances() {
    // Maximizing later states first: fixing the solver's tail and densely
    // maximizing any single x_k cannot improve it.
    let mut rng = StdRng::seed_from_u64(0x1e);
    for _ in 0..40 {
        let p = random_feasible_min_time(&mut rng, 6, 3);
        let sol = solve(&p).unwrap();
        let reference = topp_oracle(&p).unwrap();
        for k in 0..sol.x.len() {
            assert!((sol.x[k] - reference.x[k]).abs() <= 1e-7);
        }
    }
}

#[test]
fn nonuniform_spacing_and_floors_match_the_references() {
    let mut rng = StdRng::seed_from_u64(0xd5);
    for trial in 0..60 {
        let mut p = random_feasible_nonuniform(&mut rng, 10);
        let sol = solve(&p).unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        let reference = topp_oracle(&p).unwrap_or_else(|e| panic!("trial {trial}: {e}"));
        for (k, (a, b)) in sol.x.iter().zip(&reference.x).enumerate() {
            assert!(
                (a - b).abs() <= 1e-7,
                "trial {trial} step {k}: solver {a} vs oracle {b}"
            );
        }
        assert!(sol.x.iter().all(|&x| x >= p.x_floor - 1e-12));

        // The same constraints with strictly convex costs.
        let n = p.num_intervals();
        p.costs = Some(
            (0..=n)
                .map(|_| {
                    retiming::QuadraticStepCost::from_targets(
                        rng.gen_range(0.1..1.0),
                        rng.gen_range(0.1..1.0),
                        0.0,
                        rng.gen_range(0.0..1.0),
                        0.0,
                    )
                })
                .collect(),
        );
        let sol = solve(&p).unwrap_or_else(|e| panic!("trial {trial} quadratic: {e}"));
        let reference = qopp_oracle(&p).unwrap_or_else(|e| panic!("trial {trial} quadratic oracle: {e}"));
        for (k, (a, b)) in sol.x.iter().zip(&reference.x).enumerate() {
            assert!(
                (a - b).abs() <= 2e-5,
                "trial {trial} quadratic step {k}: solver {a} vs oracle {b}"
            );
        }
    }
}

#[test]
fn infeasible_instances_report_a_step() {
    let mut p = simple_benchmark(6, false);
    p.steps[4].push_row(0.0, 1.0, 0.0, 0.4, 1.0); // unreachable lower bound
    match solve(&p) {
        Err(SolveError::Infeasible { step, .. }) => assert_eq!(step, 4),
        other => panic!("expected infeasibility, got {other:?}"),
    }
    match topp_oracle(&p) {
        Err(retiming::oracle::OracleError::Infeasible) => {}
        other => panic!("oracle should agree, got {other:?}"),
    }
}

#[test]
fn quadratic_benchmark_matches_reference_at_n30() {
    let p = simple_benchmark(30, true);
    let sol = solve(&p).unwrap();
    let reference = qopp_oracle(&p).unwrap();
    for (a, b) in sol.x.iter().zip(&reference.x) {
        assert!((a - b).abs() <= 1e-5);
    }
    let (v_sol, v_ref) = (
        sol.objective_value.unwrap(),
        reference.objective_value.unwrap(),
    );
    assert!((v_sol - v_ref).abs() <= 1e-8 + 1e-8 * v_ref.abs());
}
