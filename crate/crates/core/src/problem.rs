//! The retiming problem data model: path samples, task-space constraints,
//! and their reduction to scalar per-step rows in `(x, u)`.
//!
//! A second-order constraint row `A q̈ + q̇ᵀB q̇ + f ∈ [lo, hi]` becomes, via
//! `q̇ = (dq/ds)·ṡ` and `q̈ = (d²q/ds²)·ṡ² + (dq/ds)·s̈`,
//! the scalar row `a·u + b·x + c ∈ [lo, hi]` with
//! `a = A·(dq/ds)`, `b = A·(d²q/ds²) + (dq/ds)ᵀB(dq/ds)`, `c = f`.
//! First-order rows bound `ṡ` directly and are squared into bounds on `x`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp2d::Interval;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite coefficient: {0}")]
    NonFiniteCoefficient(String),
    #[error("no positive path velocity is feasible at sample {sample}")]
    EmptyVelocityInterval { sample: usize },
    #[error("invalid problem file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A geometric path sampled on a strictly increasing grid over `[0, 1]`,
/// with first and second derivatives with respect to the path coordinate.
#[derive(Debug, Clone)]
pub struct PathSamples {
    pub grid: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub dq_ds: Vec<Vec<f64>>,
    pub d2q_ds2: Vec<Vec<f64>>,
}

impl PathSamples {
    pub fn new(
        grid: Vec<f64>,
        q: Vec<Vec<f64>>,
        dq_ds: Vec<Vec<f64>>,
        d2q_ds2: Vec<Vec<f64>>,
    ) -> Result<PathSamples, ProblemError> {
        if grid.len() < 2 {
            return Err(ProblemError::DimensionMismatch(
                "need at least two path samples".into(),
            ));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(ProblemError::DimensionMismatch(
                "grid must start at 0 and end at 1".into(),
            ));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ProblemError::DimensionMismatch(
                "grid must be strictly increasing".into(),
            ));
        }
        let m = grid.len();
        if q.len() != m || dq_ds.len() != m || d2q_ds2.len() != m {
            return Err(ProblemError::DimensionMismatch(
                "per-sample arrays must match the grid length".into(),
            ));
        }
        let n = q[0].len();
        for k in 0..m {
            if q[k].len() != n || dq_ds[k].len() != n || d2q_ds2[k].len() != n {
                return Err(ProblemError::DimensionMismatch(format!(
                    "inconsistent joint count at sample {k}"
                )));
            }
            for v in q[k].iter().chain(&dq_ds[k]).chain(&d2q_ds2[k]) {
                if !v.is_finite() {
                    return Err(ProblemError::NonFiniteCoefficient(format!(
                        "path sample {k}"
                    )));
                }
            }
        }
        Ok(PathSamples { grid, q, dq_ds, d2q_ds2 })
    }

    pub fn num_samples(&self) -> usize {
        self.grid.len()
    }

    pub fn dof(&self) -> usize {
        self.q[0].len()
    }
}

/// One second-order constraint row at one sample:
/// `a·q̈ + q̇ᵀ b q̇ + f ∈ [lo, hi]` with `a` a length-`n` vector and `b` an
/// `n×n` matrix (empty means zero).
#[derive(Debug, Clone)]
pub struct SecondOrderRow {
    pub a: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub f: f64,
    pub lo: f64,
    pub hi: f64,
}

/// One first-order constraint row at one sample: `a·q̇ + f ∈ [lo, hi]`.
#[derive(Debug, Clone)]
pub struct FirstOrderRow {
    pub a: Vec<f64>,
    pub f: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Per-sample task constraints; outer index is the sample.
#[derive(Debug, Clone, Default)]
pub struct TaskConstraintSet {
    pub second_order: Vec<Vec<SecondOrderRow>>,
    pub first_order: Vec<Vec<FirstOrderRow>>,
}

/// A scalar velocity row after projection on the path: `coef·ṡ + offset ∈ [lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct VelocityRow {
    pub coef: f64,
    pub offset: f64,
    pub lo: f64,
    pub hi: f64,
}

/// The constraint rows of one grid point: `a_i·u + b_i·x + c_i ∈ [lo_i, hi_i]`.
#[derive(Debug, Clone, Default)]
pub struct DiscretizedStep {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DiscretizedStep {
    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    pub fn push_row(&mut self, a: f64, b: f64, c: f64, lo: f64, hi: f64) {
        self.a.push(a);
        self.b.push(b);
        self.c.push(c);
        self.lo.push(lo);
        self.hi.push(hi);
    }
}

/// Grid spacing: one scalar for uniform grids or one value per interval.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaS {
    Uniform(f64),
    PerInterval(Vec<f64>),
}

impl DeltaS {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            DeltaS::Uniform(d) => *d,
            DeltaS::PerInterval(v) => v[k],
        }
    }
}

/// Closed intervals for the squared path velocity at both ends of the path.
/// The defaults pin both ends to zero (rest-to-rest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub x0: Interval,
    pub x_n: Interval,
}

impl Default for BoundaryConditions {
    fn default() -> BoundaryConditions {
        BoundaryConditions {
            x0: Interval::point(0.0),
            x_n: Interval::point(0.0),
        }
    }
}

/// A per-step quadratic cost in normalized form
/// `½p·x² + ½r·u² + n·x·u + g·x + h·u + k`.
///
/// [`QuadraticStepCost::from_targets`] builds the common
/// `Q(x−x_des)² + R(u−u_des)² + N(x−x_des)(u−u_des)` shape; the normalized
/// form additionally carries exact linear and constant terms that target
/// shifting cannot express (needed by the cable-robot objectives).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticStepCost {
    pub p: f64,
    pub r: f64,
    pub n: f64,
    pub g: f64,
    pub h: f64,
    pub k: f64,
}

impl QuadraticStepCost {
    pub fn zero() -> QuadraticStepCost {
        QuadraticStepCost { p: 0.0, r: 0.0, n: 0.0, g: 0.0, h: 0.0, k: 0.0 }
    }

    pub fn from_targets(q: f64, r: f64, ncross: f64, x_des: f64, u_des: f64) -> QuadraticStepCost {
        QuadraticStepCost {
            p: 2.0 * q,
            r: 2.0 * r,
            n: ncross,
            g: -2.0 * q * x_des - ncross * u_des,
            h: -2.0 * r * u_des - ncross * x_des,
            k: q * x_des * x_des + r * u_des * u_des + ncross * x_des * u_des,
        }
    }

    /// Recover `(Q, R, N, x_des, u_des)` when the linear part is expressible
    /// by target shifting. The constant offset is not preserved.
    pub fn targets(&self) -> Option<(f64, f64, f64, f64, f64)> {
        let det = self.p * self.r - self.n * self.n;
        let scale = 1.0f64.max(self.p.abs()).max(self.r.abs()).max(self.n.abs());
        let (x_des, u_des) = if det.abs() > 1e-12 * scale * scale {
            (
                (-self.g * self.r + self.n * self.h) / det,
                (-self.p * self.h + self.n * self.g) / det,
            )
        } else if self.g.abs() <= 1e-12 * scale && self.h.abs() <= 1e-12 * scale {
            (0.0, 0.0)
        } else {
            return None;
        };
        Some((0.5 * self.p, 0.5 * self.r, self.n, x_des, u_des))
    }

    pub fn eval(&self, x: f64, u: f64) -> f64 {
        0.5 * self.p * x * x + 0.5 * self.r * u * u + self.n * x * u + self.g * x + self.h * u
            + self.k
    }

    /// PSD check of the quadratic block `[[p, n], [n, r]]`.
    pub fn is_convex(&self) -> bool {
        let scale = 1.0f64.max(self.p.abs()).max(self.r.abs()).max(self.n.abs());
        let tol = 1e-12 * scale;
        self.p >= -tol && self.r >= -tol && self.p * self.r - self.n * self.n >= -tol * scale
    }
}

/// The solver's sole input: `N+1` steps of constraint rows, the grid
/// spacing, boundary conditions, optional per-step quadratic costs, and the
/// lower bound standing in for the strict constraint `x > 0`. The final
/// step's rows are evaluated with `u_N := 0`.
#[derive(Debug, Clone)]
pub struct DiscretizedProblem {
    pub steps: Vec<DiscretizedStep>,
    pub delta_s: DeltaS,
    pub boundary: BoundaryConditions,
    pub costs: Option<Vec<QuadraticStepCost>>,
    pub x_floor: f64,
}

impl DiscretizedProblem {
    /// Number of intervals `N` (steps are `N+1`).
    pub fn num_intervals(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn delta_s_at(&self, k: usize) -> f64 {
        self.delta_s.at(k)
    }

    pub fn has_costs(&self) -> bool {
        self.costs.is_some()
    }

    pub fn cost_at(&self, k: usize) -> QuadraticStepCost {
        match &self.costs {
            Some(c) => c[k],
            None => QuadraticStepCost::zero(),
        }
    }
}

/// Reduce task-space constraints at every path sample to scalar rows in
/// `(x, u)`. First-order rows are squared into a single `x`-bound row
/// (`a = 0, b = 1, c = 0`) per sample.
pub fn reparameterize(
    path: &PathSamples,
    task: &TaskConstraintSet,
) -> Result<Vec<DiscretizedStep>, ProblemError> {
    let m = path.num_samples();
    let n = path.dof();
    if !task.second_order.is_empty() && task.second_order.len() != m {
        return Err(ProblemError::DimensionMismatch(
            "second-order constraints must cover every sample".into(),
        ));
    }
    if !task.first_order.is_empty() && task.first_order.len() != m {
        return Err(ProblemError::DimensionMismatch(
            "first-order constraints must cover every sample".into(),
        ));
    }

    let mut steps = Vec::with_capacity(m);
    for k in 0..m {
        let dq = &path.dq_ds[k];
        let ddq = &path.d2q_ds2[k];
        let mut step = DiscretizedStep::default();

        if let Some(rows) = task.second_order.get(k) {
            for (i, row) in rows.iter().enumerate() {
                if row.a.len() != n {
                    return Err(ProblemError::DimensionMismatch(format!(
                        "second-order row {i} at sample {k}"
                    )));
                }
                let a = dot(&row.a, dq);
                let mut b = dot(&row.a, ddq);
                if !row.b.is_empty() {
                    if row.b.len() != n || row.b.iter().any(|r| r.len() != n) {
                        return Err(ProblemError::DimensionMismatch(format!(
                            "curvature matrix of row {i} at sample {k}"
                        )));
                    }
                    b += quad_form(&row.b, dq);
                }
                let c = row.f;
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return Err(ProblemError::NonFiniteCoefficient(format!(
                        "row {i} at sample {k}"
                    )));
                }
                step.push_row(a, b, c, row.lo, row.hi);
            }
        }

        if let Some(rows) = task.first_order.get(k) {
            if !rows.is_empty() {
                let vrows: Vec<VelocityRow> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        if row.a.len() != n {
                            return Err(ProblemError::DimensionMismatch(format!(
                                "first-order row {i} at sample {k}"
                            )));
                        }
                        Ok(VelocityRow {
                            coef: dot(&row.a, dq),
                            offset: row.f,
                            lo: row.lo,
                            hi: row.hi,
                        })
                    })
                    .collect::<Result<_, _>>()?;
                let x_bounds = square_velocity_limits(&vrows)
                    .map_err(|_| ProblemError::EmptyVelocityInterval { sample: k })?;
                step.push_row(0.0, 1.0, 0.0, x_bounds.lo, x_bounds.hi);
            }
        }

        steps.push(step);
    }
    Ok(steps)
}

/// Intersect scalar velocity rows into a single interval for `ṡ ≥ 0`, then
/// square it into bounds on `x = ṡ²`.
pub fn square_velocity_limits(rows: &[VelocityRow]) -> Result<Interval, ProblemError> {
    let mut lo = 0.0f64;
    let mut hi = f64::INFINITY;
    for row in rows {
        let rlo = row.lo - row.offset;
        let rhi = row.hi - row.offset;
        let eps = 1e-12 * 1.0f64.max(row.coef.abs()).max(row.offset.abs());
        if row.coef.abs() <= eps {
            if row.offset < row.lo - eps || row.offset > row.hi + eps {
                return Err(ProblemError::EmptyVelocityInterval { sample: 0 });
            }
        } else if row.coef > 0.0 {
            lo = lo.max(rlo / row.coef);
            hi = hi.min(rhi / row.coef);
        } else {
            lo = lo.max(rhi / row.coef);
            hi = hi.min(rlo / row.coef);
        }
    }
    if lo > hi {
        return Err(ProblemError::EmptyVelocityInterval { sample: 0 });
    }
    let lo = lo.max(0.0);
    Ok(Interval::new(lo * lo, if hi.is_finite() { hi * hi } else { hi }))
}

/// Check every structural invariant; returns one message per violation.
/// Pure: identical input yields identical diagnostics.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negations double as NaN checks
pub fn validate(p: &DiscretizedProblem) -> Vec<String> {
    let mut issues = Vec::new();
    let n = p.num_intervals();
    if p.steps.len() < 2 {
        issues.push("need at least two steps (N >= 1)".to_string());
        return issues;
    }
    match &p.delta_s {
        DeltaS::Uniform(d) => {
            if !(*d > 0.0) || !d.is_finite() {
                issues.push(format!("delta_s must be positive and finite, got {d}"));
            }
        }
        DeltaS::PerInterval(v) => {
            if v.len() != n {
                issues.push(format!(
                    "per-interval delta_s must have {n} entries, got {}",
                    v.len()
                ));
            }
            for (k, d) in v.iter().enumerate() {
                if !(*d > 0.0) || !d.is_finite() {
                    issues.push(format!("delta_s[{k}] must be positive and finite"));
                }
            }
        }
    }
    if !(p.x_floor >= 0.0) || !p.x_floor.is_finite() {
        issues.push(format!("x_floor must be finite and >= 0, got {}", p.x_floor));
    }
    for (k, step) in p.steps.iter().enumerate() {
        let m = step.a.len();
        if step.b.len() != m || step.c.len() != m || step.lo.len() != m || step.hi.len() != m {
            issues.push(format!("step {k}: row arrays have mismatched lengths"));
            continue;
        }
        for i in 0..m {
            if !(step.a[i].is_finite() && step.b[i].is_finite() && step.c[i].is_finite()) {
                issues.push(format!("step {k} row {i}: non-finite coefficient"));
            }
            if step.lo[i] > step.hi[i] {
                issues.push(format!("step {k} row {i}: lo > hi"));
            }
            if step.lo[i].is_nan() || step.hi[i].is_nan() {
                issues.push(format!("step {k} row {i}: NaN bound"));
            }
        }
    }
    if let Some(costs) = &p.costs {
        if costs.len() != p.steps.len() {
            issues.push(format!(
                "costs must have one entry per step ({}), got {}",
                p.steps.len(),
                costs.len()
            ));
        }
        for (k, c) in costs.iter().enumerate() {
            if !c.is_convex() {
                issues.push(format!("step {k}: cost block is not positive semidefinite"));
            }
            for v in [c.p, c.r, c.n, c.g, c.h, c.k] {
                if !v.is_finite() {
                    issues.push(format!("step {k}: non-finite cost coefficient"));
                    break;
                }
            }
        }
    }
    for (name, b) in [("x0", p.boundary.x0), ("xN", p.boundary.x_n)] {
        if b.is_empty() {
            issues.push(format!("boundary {name} is empty"));
        } else if b.hi < p.x_floor {
            issues.push(format!("boundary {name} lies entirely below x_floor"));
        }
    }
    issues
}

// ---------------------------------------------------------------------------
// Problem file format (JSON). Unknown fields are rejected; `lo`/`hi` entries
// use `null` for an unbounded side.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
enum DeltaSRepr {
    Uniform(f64),
    PerInterval(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRepr {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    lo: Vec<Option<f64>>,
    hi: Vec<Option<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryRepr {
    x0: [Option<f64>; 2],
    #[serde(rename = "xN")]
    x_n: [Option<f64>; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostRepr {
    #[serde(rename = "Q")]
    q: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "N")]
    n: f64,
    x_des: f64,
    u_des: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemRepr {
    delta_s: DeltaSRepr,
    steps: Vec<StepRepr>,
    boundary: BoundaryRepr,
    #[serde(skip_serializing_if = "Option::is_none")]
    costs: Option<Vec<CostRepr>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_floor: Option<f64>,
}

fn de_lo(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NEG_INFINITY)
}

fn de_hi(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::INFINITY)
}

fn ser_bound(v: f64) -> Option<f64> {
    if v.is_finite() {
        Some(v)
    } else {
        None
    }
}

impl DiscretizedProblem {
    pub fn from_json(text: &str) -> Result<DiscretizedProblem, ProblemError> {
        let repr: ProblemRepr =
            serde_json::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))?;
        let steps = repr
            .steps
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                let m = s.a.len();
                if s.b.len() != m || s.c.len() != m || s.lo.len() != m || s.hi.len() != m {
                    return Err(ProblemError::Parse(format!(
                        "step {k}: row arrays have mismatched lengths"
                    )));
                }
                Ok(DiscretizedStep {
                    a: s.a,
                    b: s.b,
                    c: s.c,
                    lo: s.lo.into_iter().map(de_lo).collect(),
                    hi: s.hi.into_iter().map(de_hi).collect(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let costs = repr.costs.map(|cs| {
            cs.into_iter()
                .map(|c| QuadraticStepCost::from_targets(c.q, c.r, c.n, c.x_des, c.u_des))
                .collect()
        });
        Ok(DiscretizedProblem {
            steps,
            delta_s: match repr.delta_s {
                DeltaSRepr::Uniform(d) => DeltaS::Uniform(d),
                DeltaSRepr::PerInterval(v) => DeltaS::PerInterval(v),
            },
            boundary: BoundaryConditions {
                x0: Interval::new(de_lo(repr.boundary.x0[0]), de_hi(repr.boundary.x0[1])),
                x_n: Interval::new(de_lo(repr.boundary.x_n[0]), de_hi(repr.boundary.x_n[1])),
            },
            costs,
            x_floor: repr.x_floor.unwrap_or(0.0),
        })
    }

    /// Serialize to the interchange format. Costs are written in target form
    /// `{Q, R, N, x_des, u_des}`; a cost whose linear terms cannot be
    /// expressed by target shifting is rejected, and constant offsets are
    /// dropped (they do not affect the minimizer).
    pub fn to_json(&self) -> Result<String, ProblemError> {
        let steps = self
            .steps
            .iter()
            .map(|s| StepRepr {
                a: s.a.clone(),
                b: s.b.clone(),
                c: s.c.clone(),
                lo: s.lo.iter().copied().map(ser_bound).collect(),
                hi: s.hi.iter().copied().map(ser_bound).collect(),
            })
            .collect();
        let costs = match &self.costs {
            None => None,
            Some(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                for (k, c) in cs.iter().enumerate() {
                    let (q, r, n, x_des, u_des) = c.targets().ok_or_else(|| {
                        ProblemError::Parse(format!(
                            "step {k}: cost has a linear part outside the target form"
                        ))
                    })?;
                    out.push(CostRepr { q, r, n, x_des, u_des });
                }
                Some(out)
            }
        };
        let repr = ProblemRepr {
            delta_s: match &self.delta_s {
                DeltaS::Uniform(d) => DeltaSRepr::Uniform(*d),
                DeltaS::PerInterval(v) => DeltaSRepr::PerInterval(v.clone()),
            },
            steps,
            boundary: BoundaryRepr {
                x0: [ser_bound(self.boundary.x0.lo), ser_bound(self.boundary.x0.hi)],
                x_n: [
                    ser_bound(self.boundary.x_n.lo),
                    ser_bound(self.boundary.x_n.hi),
                ],
            },
            costs,
            x_floor: if self.x_floor == 0.0 { None } else { Some(self.x_floor) },
        };
        serde_json::to_string_pretty(&repr).map_err(|e| ProblemError::Parse(e.to_string()))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<DiscretizedProblem, ProblemError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<(), ProblemError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad_form(m: &[Vec<f64>], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (row, vi) in m.iter().zip(v) {
        acc += vi * dot(row, v);
    }
    acc
}
