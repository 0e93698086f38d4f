//! `retime` — solve retiming problems from files, generate built-in
//! problems, and run scaling benchmarks.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible problem.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use retiming::elimination::{solve_with_objective, ObjectiveKind, SolutionProfile, SolveError};
use retiming::generators::{cable_robot_problem, kinematic_limits, simple_benchmark, CableRobotSpec};
use retiming::oracle;
use retiming::problem::{DiscretizedProblem, PathSamples};
use retiming::retime::{duration, write_trajectory_csv, RetimeError, TimedTrajectory};

#[derive(Parser)]
#[command(name = "retime", about = "Trajectory retiming solver", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write the solution document.
    Solve(SolveArgs),
    /// Generate a built-in problem file.
    Gen(GenArgs),
    /// Run a scaling sweep on the built-in benchmark.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file (JSON).
    #[arg(short, long)]
    input: PathBuf,
    /// Solution document destination (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Objective selection.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Auto)]
    objective: ObjectiveArg,
    /// Cross-check against the dense reference (refused for N > 30).
    #[arg(long)]
    verify: bool,
    /// Include per-step reach intervals in the diagnostics.
    #[arg(long)]
    emit_diagnostics: bool,
    /// Trajectory sampling step in seconds (used with --csv).
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Export the timed profile as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// One of: simple, simple-quadratic, kinematic, cable.
    preset: String,
    /// Number of grid intervals.
    n: usize,
    /// Destination problem file.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Smallest problem size.
    #[arg(long, default_value_t = 1000)]
    min: usize,
    /// Largest problem size.
    #[arg(long, default_value_t = 100_000)]
    max: usize,
    /// Multiplicative size step.
    #[arg(long, default_value_t = 3.0)]
    growth: f64,
    /// Timing repetitions per size (median is reported).
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Objective kind for the sweep.
    #[arg(long, value_enum, default_value_t = BenchObjective::Topp)]
    objective: BenchObjective,
    /// CSV destination (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Auto,
    Topp,
    Quadratic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchObjective {
    Topp,
    Quadratic,
}

#[derive(Serialize)]
struct SolutionDocument {
    status: &'static str,
    objective: &'static str,
    x: Vec<f64>,
    u: Vec<f64>,
    t: Option<Vec<f64>>,
    duration: Option<f64>,
    objective_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify_max_deviation: Option<f64>,
    diagnostics: DiagnosticsDocument,
}

#[derive(Serialize)]
struct DiagnosticsDocument {
    max_constraint_violation: f64,
    max_dynamics_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    segment_counts: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reach: Option<Vec<[Option<f64>; 2]>>,
}

#[derive(Serialize)]
struct InfeasibleDocument {
    status: &'static str,
    error: String,
    infeasible_step: usize,
    offending_rows: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn input_error(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn cmd_solve(args: SolveArgs) -> ExitCode {
    let problem = match DiscretizedProblem::read_file(&args.input) {
        Ok(p) => p,
        Err(e) => return input_error(e),
    };
    let objective = match args.objective {
        ObjectiveArg::Auto => ObjectiveKind::Auto,
        ObjectiveArg::Topp => ObjectiveKind::MinimumTime,
        ObjectiveArg::Quadratic => ObjectiveKind::Quadratic,
    };
    let quadratic = match args.objective {
        ObjectiveArg::Auto => problem.has_costs(),
        ObjectiveArg::Topp => false,
        ObjectiveArg::Quadratic => true,
    };

    let profile = match solve_with_objective(&problem, objective) {
        Ok(profile) => profile,
        Err(SolveError::Infeasible { step, rows }) => {
            let doc = InfeasibleDocument {
                status: "infeasible",
                error: format!("no feasible profile at step {step}"),
                infeasible_step: step,
                offending_rows: rows,
            };
            let text = serde_json::to_string_pretty(&doc).expect("document serializes");
            if write_output(args.output.as_deref(), &text).is_err() {
                return ExitCode::from(1);
            }
            return ExitCode::from(2);
        }
        Err(e) => return input_error(e),
    };

    let verify_max_deviation = if args.verify {
        match verify_against_reference(&problem, &profile, quadratic) {
            Ok(dev) => Some(dev),
            Err(e) => return input_error(e),
        }
    } else {
        None
    };

    let timing = duration(&profile.x, &problem.delta_s);
    let (t, total) = match &timing {
        Ok(tr) => (Some(tr.t.clone()), Some(tr.duration)),
        Err(_) => (None, None),
    };

    if let Some(csv_path) = &args.csv {
        match export_profile_csv(&profile, &problem, args.dt) {
            Ok(text) => {
                if let Err(e) = fs::write(csv_path, text) {
                    return input_error(e);
                }
            }
            Err(e) => return input_error(format!("cannot export trajectory: {e}")),
        }
    }

    let doc = SolutionDocument {
        status: "ok",
        objective: if quadratic { "quadratic" } else { "minimum_time" },
        t,
        duration: total,
        objective_value: profile.objective_value,
        verify_max_deviation,
        diagnostics: DiagnosticsDocument {
            max_constraint_violation: profile.max_constraint_violation(&problem),
            max_dynamics_residual: profile.max_dynamics_residual(&problem),
            segment_counts: if quadratic {
                Some(profile.diagnostics.segment_counts.clone())
            } else {
                None
            },
            reach: args.emit_diagnostics.then(|| {
                profile
                    .diagnostics
                    .reach
                    .iter()
                    .map(|iv| [finite(iv.lo), finite(iv.hi)])
                    .collect()
            }),
        },
        x: profile.x,
        u: profile.u,
    };
    let text = serde_json::to_string_pretty(&doc).expect("document serializes");
    match write_output(args.output.as_deref(), &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(_) => ExitCode::from(1),
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> Result<(), ()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn verify_against_reference(
    problem: &DiscretizedProblem,
    profile: &SolutionProfile,
    quadratic: bool,
) -> Result<f64, String> {
    let n = problem.num_intervals();
    if n > 30 {
        return Err(format!(
            "--verify is limited to N <= 30 (the dense reference scales superlinearly); got N = {n}"
        ));
    }
    let reference = if quadratic {
        oracle::qopp_oracle(problem).map_err(|e| e.to_string())?
    } else {
        oracle::topp_oracle(problem).map_err(|e| e.to_string())?
    };
    Ok(profile
        .x
        .iter()
        .zip(&reference.x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Trajectory export for a bare problem file: the path coordinate itself is
/// the exported (one-dimensional) configuration, `q_0 = s`, `qd_0 = ṡ`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN sampling steps too
fn export_profile_csv(
    profile: &SolutionProfile,
    problem: &DiscretizedProblem,
    dt: f64,
) -> Result<String, RetimeError> {
    if !(dt > 0.0) {
        return Err(RetimeError::BadSamplingStep(dt));
    }
    let timing = duration(&profile.x, &problem.delta_s)?;
    let mut traj = TimedTrajectory {
        t: Vec::new(),
        s: Vec::new(),
        sdot: Vec::new(),
        u: Vec::new(),
        q: Vec::new(),
        qd: Vec::new(),
        qdd: Vec::new(),
    };
    let mut t = 0.0f64;
    loop {
        let clamped = t.min(timing.duration);
        let (s, sdot, u) = timing.state_at(clamped);
        traj.t.push(clamped);
        traj.s.push(s);
        traj.sdot.push(sdot);
        traj.u.push(u);
        traj.q.push(vec![s]);
        traj.qd.push(vec![sdot]);
        traj.qdd.push(vec![u]);
        if clamped >= timing.duration {
            break;
        }
        t += dt;
    }
    let mut out = Vec::new();
    write_trajectory_csv(&traj, &mut out)?;
    Ok(String::from_utf8(out).expect("csv is utf-8"))
}

fn cmd_gen(args: GenArgs) -> ExitCode {
    if args.n < 1 {
        return input_error("N must be at least 1");
    }
    let problem = match args.preset.as_str() {
        "simple" => simple_benchmark(args.n, false),
        "simple-quadratic" => simple_benchmark(args.n, true),
        "kinematic" => {
            if args.n < 2 {
                return input_error("kinematic preset needs N >= 2");
            }
            match kinematic_limits(&sine_path(args.n), &[1.5, 1.0], &[8.0, 6.0]) {
                Ok(p) => p,
                Err(e) => return input_error(e),
            }
        }
        "cable" => {
            if args.n < 8 {
                return input_error("cable preset needs N >= 8");
            }
            match cable_robot_problem(&CableRobotSpec::star_demo(args.n)) {
                Ok(p) => p,
                Err(e) => return input_error(e),
            }
        }
        other => return input_error(format!("unknown preset '{other}'")),
    };
    match problem.write_file(&args.output) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => input_error(e),
    }
}

/// Two-joint sine sweep used by the kinematic preset.
fn sine_path(n: usize) -> PathSamples {
    let m = n + 1;
    let tau = std::f64::consts::TAU;
    let grid: Vec<f64> = (0..m).map(|k| k as f64 / n as f64).collect();
    let q = grid
        .iter()
        .map(|&s| vec![(tau * s).sin(), 0.5 * (2.0 * tau * s).cos()])
        .collect();
    let dq = grid
        .iter()
        .map(|&s| vec![tau * (tau * s).cos(), -tau * (2.0 * tau * s).sin()])
        .collect();
    let ddq = grid
        .iter()
        .map(|&s| {
            vec![
                -tau * tau * (tau * s).sin(),
                -2.0 * tau * tau * (2.0 * tau * s).cos(),
            ]
        })
        .collect();
    PathSamples::new(grid, q, dq, ddq).expect("sine path is well formed")
}

fn cmd_bench(args: BenchArgs) -> ExitCode {
    if args.reps == 0 {
        return input_error("need at least one repetition");
    }
    if args.min < 2 || args.max < args.min || args.growth <= 1.0 {
        return input_error("need min >= 2, max >= min, growth > 1");
    }
    let quadratic = args.objective == BenchObjective::Quadratic;
    let mut rows = String::from("n,objective,time_ns,max_segments,mean_segments\n");
    let mut n = args.min;
    loop {
        let problem = simple_benchmark(n, quadratic);
        let mut times = Vec::with_capacity(args.reps);
        let mut max_segments = 0usize;
        let mut mean_segments = 0.0f64;
        for _ in 0..args.reps {
            let t0 = Instant::now();
            let profile = match solve_with_objective(&problem, ObjectiveKind::Auto) {
                Ok(p) => p,
                Err(e) => return input_error(format!("benchmark solve failed at N={n}: {e}")),
            };
            times.push(t0.elapsed().as_nanos());
            if profile.max_constraint_violation(&problem) > 1e-9 {
                return input_error(format!("residual check failed at N={n}"));
            }
            let counts = &profile.diagnostics.segment_counts;
            if !counts.is_empty() {
                max_segments = counts.iter().copied().max().unwrap();
                mean_segments = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
            }
        }
        times.sort_unstable();
        let median = times[times.len() / 2];
        let kind = if quadratic { "quadratic" } else { "topp" };
        rows.push_str(&format!(
            "{n},{kind},{median},{max_segments},{mean_segments}\n"
        ));
        if n >= args.max {
            break;
        }
        n = ((n as f64 * args.growth).round() as usize).min(args.max).max(n + 1);
    }
    match args.output {
        Some(path) => match fs::write(&path, rows) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => input_error(e),
        },
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(rows.as_bytes()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => input_error(e),
            }
        }
    }
}
