//! Built-in problem generators: the scaling benchmark, joint-space kinematic
//! limits, and a planar cable-driven robot whose admissible wrench set is
//! the projection of the tension box through the wrench matrix (a zonogon).

use thiserror::Error;

use crate::lp2d::{Halfplane2, Interval};
use crate::problem::{
    reparameterize, BoundaryConditions, DeltaS, DiscretizedProblem, DiscretizedStep,
    FirstOrderRow, PathSamples, ProblemError, QuadraticStepCost, SecondOrderRow,
    TaskConstraintSet,
};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("degenerate path: {0}")]
    DegeneratePath(String),
    #[error("only planar (d = 2) wrench spaces are supported, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("wrench matrix is rank deficient at sample {sample}")]
    RankDeficient { sample: usize },
    #[error("no admissible wrench at sample {sample}")]
    EmptyFeasible { sample: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// The scaling benchmark: dynamics `x_{k+1} = x_k + 0.5·u_k` with the single
/// row `x_k + u_k ≤ 0.1` per step, starting from rest with a free end. With
/// `quadratic` set, unit state/control costs plus a terminal state cost are
/// attached (targets all zero).
pub fn simple_benchmark(n: usize, quadratic: bool) -> DiscretizedProblem {
    assert!(n >= 1);
    let mut step = DiscretizedStep::default();
    step.push_row(1.0, 1.0, 0.0, f64::NEG_INFINITY, 0.1);
    let costs = quadratic.then(|| {
        (0..=n)
            .map(|k| {
                let q = if k == n { 2.0 } else { 1.0 };
                QuadraticStepCost::from_targets(q, 1.0, 0.0, 0.0, 0.0)
            })
            .collect()
    });
    DiscretizedProblem {
        steps: vec![step; n + 1],
        delta_s: DeltaS::Uniform(0.25),
        boundary: BoundaryConditions {
            x0: Interval::point(0.0),
            x_n: Interval::new(0.0, f64::INFINITY),
        },
        costs,
        x_floor: 0.0,
    }
}

/// Joint-space box limits: `|q̇_i| ≤ vmax_i` and `|q̈_i| ≤ amax_i`.
pub fn kinematic_limits(
    path: &PathSamples,
    vmax: &[f64],
    amax: &[f64],
) -> Result<DiscretizedProblem, GeneratorError> {
    let n_dof = path.dof();
    if vmax.len() != n_dof || amax.len() != n_dof {
        return Err(GeneratorError::Problem(ProblemError::DimensionMismatch(
            "limit vectors must match the path dimension".into(),
        )));
    }
    let moving = (0..n_dof)
        .any(|j| path.dq_ds.iter().any(|dq| dq[j] != 0.0));
    if !moving {
        return Err(GeneratorError::DegeneratePath(
            "dq/ds vanishes for every joint at every sample".into(),
        ));
    }

    let m = path.num_samples();
    let mut task = TaskConstraintSet::default();
    for _ in 0..m {
        let accel_rows = (0..n_dof)
            .map(|j| SecondOrderRow {
                a: unit_vec(n_dof, j),
                b: Vec::new(),
                f: 0.0,
                lo: -amax[j],
                hi: amax[j],
            })
            .collect();
        let vel_rows = (0..n_dof)
            .map(|j| FirstOrderRow {
                a: unit_vec(n_dof, j),
                f: 0.0,
                lo: -vmax[j],
                hi: vmax[j],
            })
            .collect();
        task.second_order.push(accel_rows);
        task.first_order.push(vel_rows);
    }
    let steps = reparameterize(path, &task)?;
    Ok(DiscretizedProblem {
        steps,
        delta_s: DeltaS::PerInterval(path.grid.windows(2).map(|w| w[1] - w[0]).collect()),
        boundary: BoundaryConditions::default(),
        costs: None,
        x_floor: 0.0,
    })
}

fn unit_vec(n: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[j] = 1.0;
    v
}

/// The admissible planar wrench set for box-bounded tensions: the image of
/// `[t⁻, t⁺]` under `F = W t`, an exact convex polygon.
#[derive(Debug, Clone)]
pub struct Zonogon {
    pub center: [f64; 2],
    /// Counter-clockwise boundary.
    pub vertices: Vec<[f64; 2]>,
    /// Supporting halfplanes `a·F_x + b·F_y ≤ c`, one per edge.
    pub halfplanes: Vec<Halfplane2>,
}

impl Zonogon {
    pub fn contains(&self, f: [f64; 2], tol: f64) -> bool {
        self.halfplanes.iter().all(|h| h.satisfied(f[0], f[1], tol))
    }

    /// Smallest slack to any supporting halfplane, normalized by the normal
    /// length; negative outside.
    pub fn margin(&self, f: [f64; 2]) -> f64 {
        self.halfplanes
            .iter()
            .map(|h| {
                let norm = (h.a * h.a + h.b * h.b).sqrt();
                (h.c - h.a * f[0] - h.b * f[1]) / norm
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Project the tension box through the wrench matrix, given as columns of
/// length `d`. Exact: generators are sorted by angle and the boundary walked
/// once in each direction.
pub fn tension_polytope(
    columns: &[Vec<f64>],
    t_lo: &[f64],
    t_hi: &[f64],
) -> Result<Zonogon, GeneratorError> {
    let m = columns.len();
    assert!(t_lo.len() == m && t_hi.len() == m, "tension bounds per cable");
    let d = columns.first().map_or(2, |c| c.len());
    if d != 2 || columns.iter().any(|c| c.len() != 2) {
        return Err(GeneratorError::UnsupportedDimension(d));
    }
    let scale = columns
        .iter()
        .flat_map(|c| c.iter())
        .fold(1.0f64, |a, v| a.max(v.abs()));
    let full_rank = (0..m).any(|i| {
        ((i + 1)..m).any(|j| {
            (columns[i][0] * columns[j][1] - columns[i][1] * columns[j][0]).abs()
                > 1e-12 * scale * scale
        })
    });
    if !full_rank {
        return Err(GeneratorError::RankDeficient { sample: 0 });
    }

    let mut center = [0.0f64; 2];
    let mut gens: Vec<[f64; 2]> = Vec::new();
    for j in 0..m {
        let mid = 0.5 * (t_lo[j] + t_hi[j]);
        let half = 0.5 * (t_hi[j] - t_lo[j]);
        center[0] += columns[j][0] * mid;
        center[1] += columns[j][1] * mid;
        let mut g = [columns[j][0] * half, columns[j][1] * half];
        if g[0].abs() + g[1].abs() <= 1e-15 * scale {
            continue;
        }
        // Point every generator into the upper halfplane.
        if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) {
            g = [-g[0], -g[1]];
        }
        gens.push(g);
    }
    gens.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    // Combine parallel generators so each polygon edge appears once.
    let mut merged: Vec<[f64; 2]> = Vec::with_capacity(gens.len());
    for g in gens {
        match merged.last_mut() {
            Some(last) if (last[0] * g[1] - last[1] * g[0]).abs() <= 1e-12 * scale * scale => {
                last[0] += g[0];
                last[1] += g[1];
            }
            _ => merged.push(g),
        }
    }

    let vertices = if merged.is_empty() {
        vec![center]
    } else {
        let mut start = center;
        for g in &merged {
            start[0] -= g[0];
            start[1] -= g[1];
        }
        let mut verts = vec![start];
        let mut cur = start;
        for g in &merged {
            cur = [cur[0] + 2.0 * g[0], cur[1] + 2.0 * g[1]];
            verts.push(cur);
        }
        for g in &merged {
            cur = [cur[0] - 2.0 * g[0], cur[1] - 2.0 * g[1]];
            verts.push(cur);
        }
        verts.pop(); // the walk closes back on the start vertex
        verts
    };

    let halfplanes = if vertices.len() == 1 {
        let [cx, cy] = vertices[0];
        vec![
            Halfplane2::new(1.0, 0.0, cx),
            Halfplane2::new(-1.0, 0.0, -cx),
            Halfplane2::new(0.0, 1.0, cy),
            Halfplane2::new(0.0, -1.0, -cy),
        ]
    } else {
        (0..vertices.len())
            .map(|i| {
                let p = vertices[i];
                let q = vertices[(i + 1) % vertices.len()];
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                // Outward normal of a counter-clockwise edge.
                Halfplane2::new(dy, -dx, dy * p[0] - dx * p[1])
            })
            .collect()
    };

    Ok(Zonogon { center, vertices, halfplanes })
}

/// A planar cable-driven robot tracking a task-space path: per-sample wrench
/// matrix columns, box-bounded tensions, point-mass dynamics, a setpoint
/// speed to match, and a tension-margin objective pulling the wrench toward
/// the mid-tension load.
#[derive(Debug, Clone)]
pub struct CableRobotSpec {
    pub path: PathSamples,
    /// Wrench matrix columns per sample (`wrench[k][j]` is cable `j`).
    pub wrench: Vec<Vec<Vec<f64>>>,
    pub t_lo: Vec<f64>,
    pub t_hi: Vec<f64>,
    pub mass: f64,
    pub gravity: [f64; 2],
    pub v_desired: f64,
    /// Speed-matching weight (applied as `q'·‖x′‖⁴`).
    pub speed_weight: f64,
    /// Tension-margin weight on `‖F − W t_m‖²`.
    pub margin_weight: f64,
    /// Optional per-axis task velocity cap.
    pub speed_limit: Option<f64>,
}

impl CableRobotSpec {
    pub fn num_cables(&self) -> usize {
        self.t_lo.len()
    }

    pub fn mean_tension(&self) -> Vec<f64> {
        self.t_lo
            .iter()
            .zip(&self.t_hi)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// Build a spec from fixed anchor points: cable `j` pulls the effector
    /// toward `anchors[j]`, so column `j` is the unit vector from the
    /// effector position to the anchor.
    #[allow(clippy::too_many_arguments)]
    pub fn from_anchors(
        path: PathSamples,
        anchors: &[[f64; 2]],
        t_lo: Vec<f64>,
        t_hi: Vec<f64>,
        mass: f64,
        v_desired: f64,
        speed_weight: f64,
        margin_weight: f64,
    ) -> Result<CableRobotSpec, GeneratorError> {
        if path.dof() != 2 {
            return Err(GeneratorError::UnsupportedDimension(path.dof()));
        }
        let mut wrench = Vec::with_capacity(path.num_samples());
        for q in &path.q {
            let cols = anchors
                .iter()
                .map(|a| {
                    let dx = a[0] - q[0];
                    let dy = a[1] - q[1];
                    let len = (dx * dx + dy * dy).sqrt();
                    vec![dx / len, dy / len]
                })
                .collect();
            wrench.push(cols);
        }
        Ok(CableRobotSpec {
            path,
            wrench,
            t_lo,
            t_hi,
            mass,
            gravity: [0.0, -9.81],
            v_desired,
            speed_weight,
            margin_weight,
            speed_limit: Some(3.0),
        })
    }

    /// The demo setup: four cables anchored at the corners of a 4 m square,
    /// a smooth five-lobed closed path around the center, 2 m/s setpoint.
    /// Weights and tension bounds are placeholders for a real robot.
    pub fn star_demo(n: usize) -> CableRobotSpec {
        let path = star_path(n);
        let anchors = [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]];
        CableRobotSpec::from_anchors(
            path,
            &anchors,
            vec![1.0; 4],
            vec![60.0; 4],
            1.0,
            2.0,
            1.0,
            1e-2,
        )
        .expect("demo spec is planar")
    }
}

/// Five-lobed smooth closed curve around (2, 2), sampled uniformly.
fn star_path(n: usize) -> PathSamples {
    assert!(n >= 8);
    let m = n + 1;
    let tau = std::f64::consts::TAU;
    let mut grid = Vec::with_capacity(m);
    let mut q = Vec::with_capacity(m);
    let mut dq = Vec::with_capacity(m);
    let mut ddq = Vec::with_capacity(m);
    for k in 0..m {
        let s = k as f64 / n as f64;
        let phi = tau * s;
        let (sin5, cos5) = (5.0 * phi).sin_cos();
        let (sin1, cos1) = phi.sin_cos();
        let rho = 0.9 + 0.35 * cos5;
        let rho_d = -1.75 * sin5;
        let rho_dd = -8.75 * cos5;
        let p = [2.0 + rho * cos1, 2.0 + rho * sin1];
        let dphi = [
            rho_d * cos1 - rho * sin1,
            rho_d * sin1 + rho * cos1,
        ];
        let ddphi = [
            rho_dd * cos1 - 2.0 * rho_d * sin1 - rho * cos1,
            rho_dd * sin1 + 2.0 * rho_d * cos1 - rho * sin1,
        ];
        grid.push(if k == n { 1.0 } else { s });
        q.push(p.to_vec());
        dq.push(vec![tau * dphi[0], tau * dphi[1]]);
        ddq.push(vec![tau * tau * ddphi[0], tau * tau * ddphi[1]]);
    }
    PathSamples::new(grid, q, dq, ddq).expect("star path is well formed")
}

/// Per-sample force map: `F(x, u) = a_f·u + b_f·x + c_f` in the wrench plane.
pub struct ForceMap {
    pub a_f: [f64; 2],
    pub b_f: [f64; 2],
    pub c_f: [f64; 2],
}

/// The wrench produced along the path as a function of `(x, u)` at sample `k`.
pub fn force_map(spec: &CableRobotSpec, k: usize) -> ForceMap {
    let dq = &spec.path.dq_ds[k];
    let ddq = &spec.path.d2q_ds2[k];
    ForceMap {
        a_f: [spec.mass * dq[0], spec.mass * dq[1]],
        b_f: [spec.mass * ddq[0], spec.mass * ddq[1]],
        c_f: [-spec.mass * spec.gravity[0], -spec.mass * spec.gravity[1]],
    }
}

/// Assemble the discretized problem: zonogon halfplanes become second-order
/// rows (kept alongside the objectives for safety), the optional speed cap
/// becomes first-order rows, and the two objectives combine into one
/// quadratic cost per step in normalized form.
#[allow(clippy::needless_range_loop)]
pub fn cable_robot_problem(spec: &CableRobotSpec) -> Result<DiscretizedProblem, GeneratorError> {
    let m = spec.path.num_samples();
    if spec.path.dof() != 2 {
        return Err(GeneratorError::UnsupportedDimension(spec.path.dof()));
    }
    let t_m = spec.mean_tension();

    let mut task = TaskConstraintSet::default();
    let mut costs = Vec::with_capacity(m);
    for k in 0..m {
        let dq = &spec.path.dq_ds[k];
        let speed2 = dq[0] * dq[0] + dq[1] * dq[1];
        if speed2 <= 1e-18 {
            return Err(GeneratorError::DegeneratePath(format!(
                "path velocity vanishes at sample {k}"
            )));
        }

        let zonogon = tension_polytope(&spec.wrench[k], &spec.t_lo, &spec.t_hi)
            .map_err(|e| match e {
                GeneratorError::RankDeficient { .. } => {
                    GeneratorError::RankDeficient { sample: k }
                }
                other => other,
            })?;
        let fm = force_map(spec, k);
        if !zonogon.contains(fm.c_f, 1e-9) {
            // The gravity load must be producible; otherwise even rest fails.
            return Err(GeneratorError::EmptyFeasible { sample: k });
        }
        let rows = zonogon
            .halfplanes
            .iter()
            .map(|h| SecondOrderRow {
                a: vec![spec.mass * h.a, spec.mass * h.b],
                b: Vec::new(),
                f: h.a * fm.c_f[0] + h.b * fm.c_f[1],
                lo: f64::NEG_INFINITY,
                hi: h.c,
            })
            .collect();
        task.second_order.push(rows);
        if let Some(v) = spec.speed_limit {
            task.first_order.push(
                (0..2)
                    .map(|axis| FirstOrderRow {
                        a: unit_vec(2, axis),
                        f: 0.0,
                        lo: -v,
                        hi: v,
                    })
                    .collect(),
            );
        }

        // Speed matching: q·(x − x_d)² with q = q'·‖x′‖⁴, x_d = v_d²/‖x′‖².
        let q_w = spec.speed_weight * speed2 * speed2;
        let x_d = spec.v_desired * spec.v_desired / speed2;
        // Tension margin: r·‖F(x, u) − W t_m‖², with the load shift carried
        // exactly in the linear and constant terms.
        let r_w = spec.margin_weight;
        let mut shift = fm.c_f;
        for (j, col) in spec.wrench[k].iter().enumerate() {
            shift[0] -= col[0] * t_m[j];
            shift[1] -= col[1] * t_m[j];
        }
        let aa = dot2(fm.a_f, fm.a_f);
        let bb = dot2(fm.b_f, fm.b_f);
        let ab = dot2(fm.a_f, fm.b_f);
        let ac = dot2(fm.a_f, shift);
        let bc = dot2(fm.b_f, shift);
        let cc = dot2(shift, shift);
        costs.push(QuadraticStepCost {
            p: 2.0 * q_w + 2.0 * r_w * bb,
            r: 2.0 * r_w * aa,
            n: 2.0 * r_w * ab,
            g: -2.0 * q_w * x_d + 2.0 * r_w * bc,
            h: 2.0 * r_w * ac,
            k: q_w * x_d * x_d + r_w * cc,
        });
    }

    let steps = reparameterize(&spec.path, &task)?;
    Ok(DiscretizedProblem {
        steps,
        delta_s: DeltaS::PerInterval(spec.path.grid.windows(2).map(|w| w[1] - w[0]).collect()),
        boundary: BoundaryConditions::default(),
        costs: Some(costs),
        x_floor: 0.0,
    })
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
