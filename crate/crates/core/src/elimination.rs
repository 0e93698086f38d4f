//! Forward variable elimination in the order `u_0, x_0, u_1, x_1, …, x_N`,
//! producing one conditional per eliminated variable, followed by
//! back-substitution.
//!
//! Eliminating `u_k` is pure algebra: the dynamics pin
//! `u_k = (x_{k+1} − x_k)/(2Δs_k)`, so the step rows become rows in
//! `(x_k, x_{k+1})` and a quadratic step cost becomes a bivariate quadratic
//! on the same pair. Eliminating `x_k` projects the feasible set onto
//! `x_{k+1}` (two tiny LPs); with quadratic objectives it additionally
//! minimizes the accumulated cost-to-go over `x_k`, parametrically in
//! `x_{k+1}`. Inequalities never depend on the objective, so both strategies
//! propagate identical reach intervals.

use thiserror::Error;

use crate::lp2d::{self, Halfplane2, Interval};
use crate::problem::{validate, DiscretizedProblem, DiscretizedStep, QuadraticStepCost};
use crate::pwq::{self, BivariateQuadratic, PiecewiseLinear, PiecewiseQuadratic, PwqError};

/// Dynamics residual bound for returned profiles (relative).
pub const DYNAMICS_TOL: f64 = 1e-12;
/// Constraint-row slack bound for returned profiles (absolute).
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("infeasible at step {step} (offending rows {rows:?})")]
    Infeasible { step: usize, rows: Vec<usize> },
    #[error("objective is not convex at step {step}")]
    NonConvex { step: usize },
    #[error("speed profile is unbounded at step {step}")]
    Unbounded { step: usize },
    #[error("invalid problem: {}", issues.join("; "))]
    InvalidProblem { issues: Vec<String> },
    #[error("internal inconsistency during back-substitution at step {step}: {message}")]
    Internal { step: usize, message: String },
}

/// Which objective the solver should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Quadratic when the problem carries costs, minimum-time otherwise.
    Auto,
    MinimumTime,
    Quadratic,
}

/// The dynamics conditional `u_k*(x_k, x_{k+1}) = (x_{k+1} − x_k)/(2Δs_k)`.
#[derive(Debug, Clone, Copy)]
pub struct UConditional {
    pub step: usize,
    pub inv_two_ds: f64,
}

impl UConditional {
    pub fn eval(&self, x_k: f64, x_next: f64) -> f64 {
        (x_next - x_k) * self.inv_two_ds
    }
}

/// A step row after `u`-elimination: `px·x_k + py·x_{k+1} + c ∈ [lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedRow {
    pub px: f64,
    pub py: f64,
    pub c: f64,
    pub lo: f64,
    pub hi: f64,
}

/// The stored conditional for `x_k`. The minimum-time variant keeps the
/// one-variable LP unsolved (rows plus the reach interval); the quadratic
/// variant stores the explicit piecewise-linear minimizer.
#[derive(Debug, Clone)]
pub enum XConditional {
    MinTime {
        step: usize,
        rows: Vec<ReducedRow>,
        reach: Interval,
    },
    Quadratic {
        step: usize,
        conditional: PiecewiseLinear,
        rows: Vec<ReducedRow>,
        reach: Interval,
    },
}

/// Terminal marginal on `x_N` after the last elimination.
#[derive(Debug, Clone)]
pub enum TerminalMarginal {
    MinTime(Interval),
    Quadratic(PiecewiseQuadratic),
}

/// The ordered conditionals of a completed forward pass.
#[derive(Debug, Clone)]
pub struct BayesNet {
    pub u_conditionals: Vec<UConditional>,
    pub x_conditionals: Vec<XConditional>,
    pub terminal: TerminalMarginal,
}

/// Per-solve diagnostics: propagated reach intervals (before the terminal
/// marginal) and, for quadratic runs, the cost-to-go segment count per step.
#[derive(Debug, Clone, Default)]
pub struct SolveDiagnostics {
    pub reach: Vec<Interval>,
    pub segment_counts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SolutionProfile {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub objective_value: Option<f64>,
    pub diagnostics: SolveDiagnostics,
}

impl SolutionProfile {
    /// Worst absolute slack violation over every constraint row.
    pub fn max_constraint_violation(&self, p: &DiscretizedProblem) -> f64 {
        let n = p.num_intervals();
        let mut worst = 0.0f64;
        for (k, step) in p.steps.iter().enumerate() {
            let u = if k < n { self.u[k] } else { 0.0 };
            for i in 0..step.num_rows() {
                let v = step.a[i] * u + step.b[i] * self.x[k] + step.c[i];
                worst = worst.max(step.lo[i] - v).max(v - step.hi[i]);
            }
            worst = worst.max(p.x_floor - self.x[k]);
        }
        worst = worst.max(p.boundary.x0.lo - self.x[0]);
        worst = worst.max(self.x[0] - p.boundary.x0.hi);
        worst = worst.max(p.boundary.x_n.lo - self.x[n]);
        worst = worst.max(self.x[n] - p.boundary.x_n.hi);
        worst
    }

    /// Worst dynamics residual `|x_{k+1} − x_k − 2u_kΔs_k|`, relative.
    pub fn max_dynamics_residual(&self, p: &DiscretizedProblem) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..p.num_intervals() {
            let r = self.x[k + 1] - self.x[k] - 2.0 * self.u[k] * p.delta_s_at(k);
            worst = worst.max(r.abs() / self.x[k].abs().max(1.0));
        }
        worst
    }
}

/// Result of eliminating `u_k` from one step.
#[derive(Debug)]
pub struct UElimination {
    pub conditional: UConditional,
    pub rows: Vec<ReducedRow>,
    pub cost: Option<BivariateQuadratic>,
}

/// Substitute the dynamics into the step rows (and cost, when present).
pub fn eliminate_u(
    step_index: usize,
    step: &DiscretizedStep,
    delta_s: f64,
    cost: Option<&QuadraticStepCost>,
) -> UElimination {
    let d = 2.0 * delta_s;
    let rows = (0..step.num_rows())
        .map(|i| ReducedRow {
            px: step.b[i] - step.a[i] / d,
            py: step.a[i] / d,
            c: step.c[i],
            lo: step.lo[i],
            hi: step.hi[i],
        })
        .collect();
    let cost = cost.map(|c| BivariateQuadratic {
        p: c.p + c.r / (d * d) - 2.0 * c.n / d,
        r: c.r / (d * d),
        n: -c.r / (d * d) + c.n / d,
        g: c.g - c.h / d,
        h: c.h / d,
        k: c.k,
    });
    UElimination {
        conditional: UConditional { step: step_index, inv_two_ds: 1.0 / d },
        rows,
        cost,
    }
}

fn halfplanes_of(rows: &[ReducedRow]) -> Vec<Halfplane2> {
    let mut out = Vec::with_capacity(2 * rows.len());
    for r in rows {
        if r.hi.is_finite() {
            out.push(Halfplane2::new(r.px, r.py, r.hi - r.c));
        }
        if r.lo.is_finite() {
            out.push(Halfplane2::new(-r.px, -r.py, r.c - r.lo));
        }
    }
    out
}

/// Propagate the reach interval of `x_{k+1}` and store the minimum-time
/// conditional (the rows, unsolved).
pub fn eliminate_x_topp(
    step_index: usize,
    rows: Vec<ReducedRow>,
    reach: Interval,
    x_floor: f64,
) -> Result<(XConditional, Interval), SolveError> {
    let next = project_next(step_index, &rows, reach, x_floor)?;
    Ok((XConditional::MinTime { step: step_index, rows, reach }, next))
}

/// Propagate the reach interval of `x_{k+1}` and additionally eliminate the
/// accumulated cost-to-go, yielding the explicit conditional and the new
/// cost-to-go on `x_{k+1}`.
pub fn eliminate_x_qopp(
    step_index: usize,
    rows: Vec<ReducedRow>,
    cost: BivariateQuadratic,
    cost_to_go: &PiecewiseQuadratic,
    reach: Interval,
    x_floor: f64,
) -> Result<(XConditional, PiecewiseQuadratic, Interval), SolveError> {
    let next = project_next(step_index, &rows, reach, x_floor)?;
    let hp = halfplanes_of(&rows);
    let elim = pwq::eliminate_min(&cost, &hp, reach, cost_to_go).map_err(|e| match e {
        PwqError::NonConvex => SolveError::NonConvex { step: step_index },
        PwqError::Unbounded => SolveError::Unbounded { step: step_index },
        _ => SolveError::Infeasible { step: step_index, rows: Vec::new() },
    })?;
    // The projection is the single source of truth for feasibility; pin the
    // quadratic pass to exactly the same interval.
    let value = elim.value.restrict(next).prune();
    let conditional = elim.conditional.restrict(next);
    if value.is_empty() || conditional.is_empty() {
        return Err(SolveError::Internal {
            step: step_index,
            message: "cost-to-go domain disagrees with the projected reach interval".into(),
        });
    }
    Ok((
        XConditional::Quadratic { step: step_index, conditional, rows, reach },
        value,
        next,
    ))
}

fn project_next(
    step_index: usize,
    rows: &[ReducedRow],
    reach: Interval,
    x_floor: f64,
) -> Result<Interval, SolveError> {
    let hp = halfplanes_of(rows);
    let next = lp2d::extremize_y(&hp, reach, Interval::new(x_floor, f64::INFINITY));
    if next.is_empty() {
        return Err(SolveError::Infeasible {
            step: step_index,
            rows: offending_rows(rows, reach, x_floor),
        });
    }
    Ok(next)
}

/// Identify rows whose removal restores feasibility of the projection.
fn offending_rows(rows: &[ReducedRow], reach: Interval, x_floor: f64) -> Vec<usize> {
    let y_box = Interval::new(x_floor, f64::INFINITY);
    let mut out = Vec::new();
    for skip in 0..rows.len() {
        let hp: Vec<Halfplane2> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .flat_map(|(_, r)| {
                let mut v = Vec::new();
                if r.hi.is_finite() {
                    v.push(Halfplane2::new(r.px, r.py, r.hi - r.c));
                }
                if r.lo.is_finite() {
                    v.push(Halfplane2::new(-r.px, -r.py, r.c - r.lo));
                }
                v
            })
            .collect();
        if !lp2d::extremize_y(&hp, reach, y_box).is_empty() {
            out.push(skip);
        }
    }
    if out.is_empty() {
        out.extend(0..rows.len());
    }
    out
}

/// Run the full forward pass. Returns the net plus diagnostics.
pub fn forward_pass(
    p: &DiscretizedProblem,
    objective: ObjectiveKind,
) -> Result<(BayesNet, SolveDiagnostics), SolveError> {
    let n = p.num_intervals();
    let quadratic = match objective {
        ObjectiveKind::Auto => p.has_costs(),
        ObjectiveKind::MinimumTime => false,
        ObjectiveKind::Quadratic => true,
    };

    let mut reach = Interval::new(p.boundary.x0.lo.max(p.x_floor), p.boundary.x0.hi);
    if reach.is_empty() {
        return Err(SolveError::Infeasible { step: 0, rows: Vec::new() });
    }
    let mut diagnostics = SolveDiagnostics::default();
    diagnostics.reach.push(reach);

    let mut u_conditionals = Vec::with_capacity(n);
    let mut x_conditionals = Vec::with_capacity(n);
    let mut cost_to_go = PiecewiseQuadratic::zero(reach);

    for k in 0..n {
        let cost = if quadratic { Some(p.cost_at(k)) } else { None };
        let elim_u = eliminate_u(k, &p.steps[k], p.delta_s_at(k), cost.as_ref());
        u_conditionals.push(elim_u.conditional);

        if quadratic {
            let (xc, value, next) = eliminate_x_qopp(
                k,
                elim_u.rows,
                elim_u.cost.expect("cost present in quadratic mode"),
                &cost_to_go,
                reach,
                p.x_floor,
            )?;
            diagnostics.segment_counts.push(value.num_segments());
            x_conditionals.push(xc);
            cost_to_go = value;
            reach = next;
        } else {
            let (xc, next) = eliminate_x_topp(k, elim_u.rows, reach, p.x_floor)?;
            x_conditionals.push(xc);
            reach = next;
        }
        diagnostics.reach.push(reach);
    }

    // Terminal marginal: the final step rows (with u_N := 0), the end
    // boundary, and the floor, intersected with the propagated reach.
    let sn = &p.steps[n];
    let mut one_d: Vec<(f64, f64)> = Vec::with_capacity(2 * sn.num_rows());
    for i in 0..sn.num_rows() {
        if sn.hi[i].is_finite() {
            one_d.push((sn.b[i], sn.hi[i] - sn.c[i]));
        }
        if sn.lo[i].is_finite() {
            one_d.push((-sn.b[i], sn.c[i] - sn.lo[i]));
        }
    }
    let bound = reach
        .intersect(Interval::new(p.boundary.x_n.lo.max(p.x_floor), p.boundary.x_n.hi));
    let terminal_interval = lp2d::clamp_1d(&one_d, bound);
    if terminal_interval.is_empty() {
        return Err(SolveError::Infeasible { step: n, rows: (0..sn.num_rows()).collect() });
    }

    let terminal = if quadratic {
        // Fold in the terminal cost, evaluated at u_N = 0.
        let c = p.cost_at(n);
        let with_cost = cost_to_go.add_quadratic(0.5 * c.p, c.g, c.k);
        let restricted = with_cost.restrict(terminal_interval).prune();
        if restricted.is_empty() {
            return Err(SolveError::Internal {
                step: n,
                message: "terminal marginal emptied by restriction".into(),
            });
        }
        TerminalMarginal::Quadratic(restricted)
    } else {
        TerminalMarginal::MinTime(terminal_interval)
    };

    Ok((
        BayesNet { u_conditionals, x_conditionals, terminal },
        diagnostics,
    ))
}

/// Solve the net by back-substitution, from `x_N` down to `x_0`, then read
/// every `u_k` off the dynamics conditionals.
pub fn backsubstitute(
    net: &BayesNet,
    diagnostics: SolveDiagnostics,
) -> Result<SolutionProfile, SolveError> {
    let n = net.x_conditionals.len();
    let mut x = vec![0.0; n + 1];
    let mut objective_value = None;

    match &net.terminal {
        TerminalMarginal::MinTime(interval) => {
            if !interval.hi.is_finite() {
                return Err(SolveError::Unbounded { step: n });
            }
            x[n] = interval.hi;
        }
        TerminalMarginal::Quadratic(f) => {
            let (z, v) = f.minimize().map_err(|e| SolveError::Internal {
                step: n,
                message: format!("terminal marginal: {e}"),
            })?;
            x[n] = z;
            objective_value = Some(v);
        }
    }

    for k in (0..n).rev() {
        match &net.x_conditionals[k] {
            XConditional::MinTime { rows, reach, .. } => {
                let mut one_d = Vec::with_capacity(2 * rows.len());
                for r in rows {
                    let shifted = r.c + r.py * x[k + 1];
                    if r.hi.is_finite() {
                        one_d.push((r.px, r.hi - shifted));
                    }
                    if r.lo.is_finite() {
                        one_d.push((-r.px, shifted - r.lo));
                    }
                }
                let feasible = lp2d::clamp_1d(&one_d, *reach);
                if feasible.is_empty() {
                    return Err(SolveError::Internal {
                        step: k,
                        message: "empty interval during back-substitution".into(),
                    });
                }
                if !feasible.hi.is_finite() {
                    return Err(SolveError::Unbounded { step: k });
                }
                x[k] = feasible.hi;
            }
            XConditional::Quadratic { conditional, reach, .. } => {
                x[k] = reach.clamp(conditional.eval_clamped(x[k + 1]));
            }
        }
    }

    let u = (0..n)
        .map(|k| net.u_conditionals[k].eval(x[k], x[k + 1]))
        .collect();
    Ok(SolutionProfile { x, u, objective_value, diagnostics })
}

/// Validate, run the forward pass, and back-substitute.
pub fn solve_with_objective(
    p: &DiscretizedProblem,
    objective: ObjectiveKind,
) -> Result<SolutionProfile, SolveError> {
    let issues = validate(p);
    if !issues.is_empty() {
        return Err(SolveError::InvalidProblem { issues });
    }
    let (net, diagnostics) = forward_pass(p, objective)?;
    backsubstitute(&net, diagnostics)
}

/// Solve with the objective implied by the problem (quadratic when costs are
/// present, minimum-time otherwise).
pub fn solve(p: &DiscretizedProblem) -> Result<SolutionProfile, SolveError> {
    solve_with_objective(p, ObjectiveKind::Auto)
}
