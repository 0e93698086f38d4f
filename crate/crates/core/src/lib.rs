//! Trajectory retiming: compute a time parameterization of a geometric path
//! under first- and second-order constraints.
//!
//! The path is described by samples along a scalar coordinate `s ∈ [0, 1]`.
//! After the standard change of variables `x := ṡ²`, `u := s̈`, every
//! constraint becomes a linear row `a·u + b·x + c ∈ [lo, hi]` per grid point,
//! and the zero-order hold on `u` makes the dynamics `x_{k+1} = x_k + 2uΔs`
//! exact. The solver eliminates variables in the order
//! `u_0, x_0, u_1, x_1, …, x_N`, storing one conditional per variable, and
//! recovers the optimal profile by back-substitution:
//!
//! * minimum-time objective: reach intervals are propagated with tiny
//!   two-variable LPs and each `x_k` is maximized on the way back;
//! * quadratic objectives: a piecewise-quadratic cost-to-go is propagated
//!   instead, and each conditional is a piecewise-linear minimizer.
//!
//! Both passes are a single forward-backward sweep, linear in the number of
//! grid points. Dense reference solvers for small instances live in
//! [`oracle`]; built-in problems (including a planar cable robot) in
//! [`generators`].
//!
//! ```
//! use retiming::generators::simple_benchmark;
//! use retiming::retime::duration;
//!
//! let problem = simple_benchmark(100, false);
//! let profile = retiming::solve(&problem).unwrap();
//! let timing = duration(&profile.x, &problem.delta_s).unwrap();
//! assert!(timing.duration > 0.0);
//! assert!(profile.max_constraint_violation(&problem) <= 1e-9);
//! ```

pub mod elimination;
pub mod generators;
pub mod lp2d;
pub mod oracle;
pub mod problem;
pub mod pwq;
pub mod retime;

pub use elimination::{solve, solve_with_objective, ObjectiveKind, SolutionProfile, SolveError};
pub use lp2d::{Halfplane2, Interval};
pub use problem::{
    BoundaryConditions, DeltaS, DiscretizedProblem, DiscretizedStep, PathSamples,
    QuadraticStepCost, TaskConstraintSet,
};
pub use pwq::{BivariateQuadratic, PiecewiseLinear, PiecewiseQuadratic};
