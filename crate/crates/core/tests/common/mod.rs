//! Shared instance builders for the integration and acceptance suites.
//! Every random instance is constructed around a known-feasible witness
//! profile, so feasibility is guaranteed while constraints still bind.

use rand::rngs::StdRng;
use rand::Rng;

use retiming::lp2d::Interval;
use retiming::problem::{
    BoundaryConditions, DeltaS, DiscretizedProblem, DiscretizedStep, QuadraticStepCost,
};

/// Random minimum-time instance: `rows_max` coupled rows per step plus one
/// direct bound on `x` that keeps every reach interval finite.
pub fn random_feasible_min_time(rng: &mut StdRng, n_max: usize, rows_max: usize) -> DiscretizedProblem {
    let n = rng.gen_range(2..=n_max.max(2));
    let ds = rng.gen_range(0.1..0.5);
    let witness: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..2.0)).collect();
    let mut steps = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut step = DiscretizedStep::default();
        let u_w = if k < n {
            (witness[k + 1] - witness[k]) / (2.0 * ds)
        } else {
            0.0
        };
        let n_rows = rng.gen_range(1..=rows_max.max(1));
        for _ in 0..n_rows.saturating_sub(1) {
            let a = rng.gen_range(-1.5..1.5);
            let b = rng.gen_range(-1.5..1.5);
            let c = rng.gen_range(-0.5..0.5);
            let v = a * u_w + b * witness[k] + c;
            let lo = if rng.gen_bool(0.3) {
                f64::NEG_INFINITY
            } else {
                v - rng.gen_range(0.05..2.0)
            };
            let hi = v + rng.gen_range(0.05..2.0);
            step.push_row(a, b, c, lo, hi);
        }
        // Direct cap on x so the greedy profile stays bounded.
        step.push_row(0.0, 1.0, 0.0, 0.0, witness[k] + rng.gen_range(0.05..1.0));
        steps.push(step);
    }
    DiscretizedProblem {
        steps,
        delta_s: DeltaS::Uniform(ds),
        boundary: BoundaryConditions {
            x0: Interval::point(witness[0]),
            x_n: Interval::new(0.0, f64::INFINITY),
        },
        costs: None,
        x_floor: 0.0,
    }
}

/// Random strictly convex quadratic-objective instance (unique optimum, so
/// profiles are comparable, not just objective values).
pub fn random_convex_quadratic(rng: &mut StdRng, n_max: usize) -> DiscretizedProblem {
    let n = rng.gen_range(2..=n_max.max(2));
    let mut p = random_feasible_min_time(rng, n, 3);
    let n = p.num_intervals();
    p.costs = Some(
        (0..=n)
            .map(|_| {
                let q: f64 = rng.gen_range(0.1..2.0);
                let r: f64 = rng.gen_range(0.1..2.0);
                // Keep the 2x2 block strictly positive definite.
                let ncross = rng.gen_range(-0.9..0.9) * 2.0 * (q * r).sqrt();
                QuadraticStepCost::from_targets(
                    q,
                    r,
                    ncross,
                    rng.gen_range(-0.5..1.5),
                    rng.gen_range(-0.5..0.5),
                )
            })
            .collect(),
    );
    p
}

/// Like [`random_feasible_min_time`] but with jittered per-interval spacings
/// and a positive squared-velocity floor; the witness is lifted above the
/// floor so the instance stays feasible.
#[allow(dead_code)] // each test binary compiles this module separately
pub fn random_feasible_nonuniform(rng: &mut StdRng, n_max: usize) -> DiscretizedProblem {
    let n = rng.gen_range(2..=n_max.max(2));
    let floor = rng.gen_range(0.0..0.1);
    let spacings: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..0.6)).collect();
    let witness: Vec<f64> = (0..=n).map(|_| floor + rng.gen_range(0.0..2.0)).collect();
    let mut steps = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut step = DiscretizedStep::default();
        let u_w = if k < n {
            (witness[k + 1] - witness[k]) / (2.0 * spacings[k])
        } else {
            0.0
        };
        for _ in 0..2 {
            let a = rng.gen_range(-1.5..1.5);
            let b = rng.gen_range(-1.5..1.5);
            let c = rng.gen_range(-0.5..0.5);
            let v = a * u_w + b * witness[k] + c;
            step.push_row(a, b, c, v - rng.gen_range(0.05..2.0), v + rng.gen_range(0.05..2.0));
        }
        step.push_row(0.0, 1.0, 0.0, floor, witness[k] + rng.gen_range(0.05..1.0));
        steps.push(step);
    }
    DiscretizedProblem {
        steps,
        delta_s: DeltaS::PerInterval(spacings),
        boundary: BoundaryConditions {
            x0: Interval::point(witness[0]),
            x_n: Interval::new(floor, f64::INFINITY),
        },
        costs: None,
        x_floor: floor,
    }
}

/// Andrew monotone chain, strict turns (collinear boundary points dropped).
#[allow(dead_code)] // each test binary compiles this module separately
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-12
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-12
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
