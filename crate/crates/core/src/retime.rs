//! Convert an optimal squared-velocity profile into timestamps and a timed
//! trajectory.
//!
//! Under the zero-order hold each interval has constant `u`, so
//! `ṡ(τ) = ṡ_k + u_k·(τ − t_k)` and the interval time
//! `2Δs_k/(√x_k + √x_{k+1})` is exact. A single zero endpoint keeps the
//! interval time finite; two consecutive zeros do not, and are rejected.

use std::io::Write;

use thiserror::Error;

use crate::problem::{DeltaS, PathSamples};

#[derive(Debug, Error)]
pub enum RetimeError {
    #[error("interval {interval} cannot be traversed (zero velocity at both ends)")]
    Untraversable { interval: usize },
    #[error("negative squared velocity {value} at sample {sample}")]
    NegativeVelocity { sample: usize, value: f64 },
    #[error("sampling step must be positive, got {0}")]
    BadSamplingStep(f64),
    #[error("profile has {profile} samples but the path has {path}")]
    LengthMismatch { profile: usize, path: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Timestamps for every grid point plus the per-interval hold data needed to
/// evaluate `s(t)` in closed form (piecewise quadratic in `t`).
#[derive(Debug, Clone)]
pub struct TimingResult {
    pub t: Vec<f64>,
    pub duration: f64,
    intervals: Vec<Hold>,
}

#[derive(Debug, Clone, Copy)]
struct Hold {
    s0: f64,
    sdot0: f64,
    u: f64,
}

impl TimingResult {
    /// `(s, ṡ, u)` at time `t`, clamped to `[0, duration]`.
    pub fn state_at(&self, t: f64) -> (f64, f64, f64) {
        let t = t.max(0.0).min(self.duration);
        // Locate the interval: last k with t_k <= t.
        let k = match self.t.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(self.intervals.len().saturating_sub(1)),
            Err(i) => i.saturating_sub(1).min(self.intervals.len() - 1),
        };
        let h = self.intervals[k];
        let tau = t - self.t[k];
        let s = h.s0 + h.sdot0 * tau + 0.5 * h.u * tau * tau;
        let sdot = h.sdot0 + h.u * tau;
        (s, sdot.max(0.0), h.u)
    }
}

/// Total traversal time `Σ 2Δs_k/(√x_k + √x_{k+1})` with per-interval
/// timestamps; exact under the zero-order hold.
///
/// Grid positions are reconstructed from the spacings starting at 0; pass the
/// same `delta_s` the profile was solved with.
pub fn duration(x: &[f64], delta_s: &DeltaS) -> Result<TimingResult, RetimeError> {
    assert!(x.len() >= 2, "need at least one interval");
    let mut xs = Vec::with_capacity(x.len());
    for (k, &v) in x.iter().enumerate() {
        if v < -1e-12 {
            return Err(RetimeError::NegativeVelocity { sample: k, value: v });
        }
        xs.push(v.max(0.0));
    }
    let n = x.len() - 1;
    let mut t = Vec::with_capacity(x.len());
    let mut intervals = Vec::with_capacity(n);
    t.push(0.0);
    let mut s = 0.0;
    for k in 0..n {
        let ds = delta_s.at(k);
        let (sd0, sd1) = (xs[k].sqrt(), xs[k + 1].sqrt());
        if sd0 == 0.0 && sd1 == 0.0 {
            return Err(RetimeError::Untraversable { interval: k });
        }
        let dt = 2.0 * ds / (sd0 + sd1);
        let u = (xs[k + 1] - xs[k]) / (2.0 * ds);
        intervals.push(Hold { s0: s, sdot0: sd0, u });
        s += ds;
        t.push(t[k] + dt);
    }
    Ok(TimingResult { duration: *t.last().unwrap(), t, intervals })
}

/// A trajectory sampled at a uniform time step; arrays are time-major.
#[derive(Debug, Clone)]
pub struct TimedTrajectory {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub sdot: Vec<f64>,
    pub u: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub qd: Vec<Vec<f64>>,
    pub qdd: Vec<Vec<f64>>,
}

/// Sample the timed trajectory every `dt` seconds (the final sample lands on
/// the total duration exactly). Path values between knots come from monotone
/// piecewise-cubic interpolation of the given `q` samples, so knot values are
/// reproduced exactly; derivatives follow the chain rule
/// `q̇ = (dq/ds)·ṡ`, `q̈ = (d²q/ds²)·ṡ² + (dq/ds)·u`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN sampling steps too
pub fn sample_trajectory(
    path: &PathSamples,
    x: &[f64],
    dt: f64,
) -> Result<TimedTrajectory, RetimeError> {
    if !(dt > 0.0) {
        return Err(RetimeError::BadSamplingStep(dt));
    }
    if x.len() != path.num_samples() {
        return Err(RetimeError::LengthMismatch { profile: x.len(), path: path.num_samples() });
    }
    let spacings: Vec<f64> = path.grid.windows(2).map(|w| w[1] - w[0]).collect();
    let timing = duration(x, &DeltaS::PerInterval(spacings))?;
    let interp = PathInterpolant::new(path);

    let mut out = TimedTrajectory {
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
        let (q, dq, ddq) = interp.eval(s);
        let x_here = sdot * sdot;
        out.t.push(clamped);
        out.s.push(s);
        out.sdot.push(sdot);
        out.u.push(u);
        out.qd.push(dq.iter().map(|d| d * sdot).collect());
        out.qdd
            .push(ddq.iter().zip(&dq).map(|(dd, d)| dd * x_here + d * u).collect());
        out.q.push(q);
        if clamped >= timing.duration {
            break;
        }
        t += dt;
    }
    Ok(out)
}

/// Write the CSV interchange format:
/// `t,s,sdot,x,u,q_0..q_{n-1},qd_0..qd_{n-1}`, one row per sample.
pub fn write_trajectory_csv(traj: &TimedTrajectory, mut w: impl Write) -> Result<(), RetimeError> {
    let dof = traj.q.first().map_or(0, |q| q.len());
    let mut header = String::from("t,s,sdot,x,u");
    for i in 0..dof {
        header.push_str(&format!(",q_{i}"));
    }
    for i in 0..dof {
        header.push_str(&format!(",qd_{i}"));
    }
    writeln!(w, "{header}")?;
    for i in 0..traj.t.len() {
        let mut line = format!(
            "{},{},{},{},{}",
            traj.t[i],
            traj.s[i],
            traj.sdot[i],
            traj.sdot[i] * traj.sdot[i],
            traj.u[i]
        );
        for v in &traj.q[i] {
            line.push_str(&format!(",{v}"));
        }
        for v in &traj.qd[i] {
            line.push_str(&format!(",{v}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Monotone piecewise-cubic Hermite interpolation of the path samples, one
/// polynomial per joint per interval; C¹ overall.
pub struct PathInterpolant {
    grid: Vec<f64>,
    q: Vec<Vec<f64>>,
    slopes: Vec<Vec<f64>>,
}

impl PathInterpolant {
    pub fn new(path: &PathSamples) -> PathInterpolant {
        let m = path.num_samples();
        let dof = path.dof();
        let mut slopes = vec![vec![0.0; dof]; m];
        for j in 0..dof {
            let vals: Vec<f64> = path.q.iter().map(|q| q[j]).collect();
            let col = monotone_slopes(&path.grid, &vals);
            for (k, s) in col.into_iter().enumerate() {
                slopes[k][j] = s;
            }
        }
        PathInterpolant { grid: path.grid.clone(), q: path.q.clone(), slopes }
    }

    /// `(q, dq/ds, d²q/ds²)` at `s`, clamped to `[0, 1]`.
    pub fn eval(&self, s: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let s = s.max(self.grid[0]).min(*self.grid.last().unwrap());
        let k = match self.grid.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(i) => i.min(self.grid.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.grid.len() - 2),
        };
        let h = self.grid[k + 1] - self.grid[k];
        let t = (s - self.grid[k]) / h;
        let dof = self.q[0].len();
        let mut q = Vec::with_capacity(dof);
        let mut dq = Vec::with_capacity(dof);
        let mut ddq = Vec::with_capacity(dof);
        let (h00, h10, h01, h11) = hermite_basis(t);
        let (d00, d10, d01, d11) = hermite_basis_d(t);
        let (s00, s10, s01, s11) = hermite_basis_dd(t);
        for j in 0..dof {
            let (y0, y1) = (self.q[k][j], self.q[k + 1][j]);
            let (m0, m1) = (self.slopes[k][j], self.slopes[k + 1][j]);
            q.push(y0 * h00 + h * m0 * h10 + y1 * h01 + h * m1 * h11);
            dq.push((y0 * d00 + h * m0 * d10 + y1 * d01 + h * m1 * d11) / h);
            ddq.push((y0 * s00 + h * m0 * s10 + y1 * s01 + h * m1 * s11) / (h * h));
        }
        (q, dq, ddq)
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

fn hermite_basis_d(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    (
        6.0 * t2 - 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        -6.0 * t2 + 6.0 * t,
        3.0 * t2 - 2.0 * t,
    )
}

fn hermite_basis_dd(t: f64) -> (f64, f64, f64, f64) {
    (12.0 * t - 6.0, 6.0 * t - 4.0, -12.0 * t + 6.0, 6.0 * t - 2.0)
}

/// Shape-preserving slope selection (harmonic weighting on the interior,
/// clamped three-point estimates at the ends).
fn monotone_slopes(grid: &[f64], vals: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let h: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..m - 1).map(|k| (vals[k + 1] - vals[k]) / h[k]).collect();
    let mut slopes = vec![0.0; m];
    if m == 2 {
        slopes[0] = delta[0];
        slopes[1] = delta[0];
        return slopes;
    }
    for k in 1..m - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            slopes[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            slopes[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    slopes[0] = endpoint_slope(h[0], h[1], delta[0], delta[1]);
    slopes[m - 1] = endpoint_slope(h[m - 2], h[m - 3], delta[m - 2], delta[m - 3]);
    slopes
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn unit_profile_has_unit_duration() {
        let n = 10;
        let x = vec![1.0; n + 1];
        let timing = duration(&x, &DeltaS::Uniform(1.0 / n as f64)).unwrap();
        assert!((timing.duration - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_derived_three_step_duration() {
        let x = [0.0, 0.05, 0.075];
        let timing = duration(&x, &DeltaS::Uniform(0.25)).unwrap();
        let expected = 0.5 / 0.05f64.sqrt() + 0.5 / (0.05f64.sqrt() + 0.075f64.sqrt());
        assert!((timing.duration - expected).abs() < 1e-15);
        assert!((timing.duration - 3.2412).abs() < 1e-4);
    }

    #[test]
    fn double_zero_is_untraversable() {
        let x = [0.0, 0.0, 1.0];
        match duration(&x, &DeltaS::Uniform(0.5)) {
            Err(RetimeError::Untraversable { interval: 0 }) => {}
            other => panic!("expected untraversable interval 0, got {other:?}"),
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        // Integrate ds/ṡ(s) with the midpoint rule on a 100x refined grid.
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..50 {
            let n = rng.gen_range(2..40);
            let x: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.01..4.0)).collect();
            let ds = 1.0 / n as f64;
            let timing = duration(&x, &DeltaS::Uniform(ds)).unwrap();
            let mut quad = 0.0;
            for k in 0..n {
                let u = (x[k + 1] - x[k]) / (2.0 * ds);
                for j in 0..100 {
                    let sm = (j as f64 + 0.5) / 100.0 * ds;
                    let sd = (x[k] + 2.0 * u * sm).max(0.0).sqrt();
                    quad += ds / 100.0 / sd;
                }
            }
            assert!(
                (timing.duration - quad).abs() <= 1e-3 * quad,
                "closed form {} vs quadrature {}",
                timing.duration,
                quad
            );
        }
    }

    fn line_path(m: usize) -> PathSamples {
        let grid: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
        PathSamples::new(
            grid.clone(),
            grid.iter().map(|&s| vec![s]).collect(),
            vec![vec![1.0]; m],
            vec![vec![0.0]; m],
        )
        .unwrap()
    }

    #[test]
    fn constant_speed_on_a_line() {
        let path = line_path(11);
        let v = 0.8f64;
        let x = vec![v * v; 11];
        let traj = sample_trajectory(&path, &x, 0.01).unwrap();
        for (qd, s) in traj.qd.iter().zip(&traj.s) {
            assert!((qd[0] - v).abs() < 1e-12, "q̇ at s={s}");
        }
        let t_last = *traj.t.last().unwrap();
        assert!((t_last - 1.0 / v).abs() < 1e-12);
    }

    #[test]
    fn final_sample_lands_on_duration() {
        let path = line_path(5);
        let x = vec![1.0; 5];
        let traj = sample_trajectory(&path, &x, 0.3).unwrap();
        assert_eq!(*traj.t.last().unwrap(), 1.0);
        assert!((traj.s.last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn knot_values_are_exact() {
        // A curved 2-dof path: interpolation must reproduce the samples at
        // the knots exactly.
        let m = 9;
        let grid: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
        let q: Vec<Vec<f64>> = grid
            .iter()
            .map(|&s| vec![(2.0 * s).sin(), s * s])
            .collect();
        let dq: Vec<Vec<f64>> = grid
            .iter()
            .map(|&s| vec![2.0 * (2.0 * s).cos(), 2.0 * s])
            .collect();
        let ddq: Vec<Vec<f64>> = grid
            .iter()
            .map(|&s| vec![-4.0 * (2.0 * s).sin(), 2.0])
            .collect();
        let path = PathSamples::new(grid.clone(), q.clone(), dq, ddq).unwrap();
        let x = vec![0.5; m];
        let timing = duration(&x, &DeltaS::Uniform(1.0 / (m - 1) as f64)).unwrap();
        let interp = PathInterpolant::new(&path);
        for k in 0..m {
            let (s, _, _) = timing.state_at(timing.t[k]);
            assert!((s - grid[k]).abs() < 1e-12);
            let (qq, _, _) = interp.eval(grid[k]);
            assert_eq!(qq, q[k]);
        }
    }

    #[test]
    fn chain_rule_matches_finite_differences() {
        let m = 21;
        let grid: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
        let q: Vec<Vec<f64>> = grid.iter().map(|&s| vec![(1.5 * s).sin()]).collect();
        let dq: Vec<Vec<f64>> = grid.iter().map(|&s| vec![1.5 * (1.5 * s).cos()]).collect();
        let ddq: Vec<Vec<f64>> = grid.iter().map(|&s| vec![-2.25 * (1.5 * s).sin()]).collect();
        let path = PathSamples::new(grid, q, dq, ddq).unwrap();
        let x: Vec<f64> = (0..m).map(|k| 0.3 + 0.2 * (k as f64 / m as f64)).collect();
        let dt = 1e-3;
        let traj = sample_trajectory(&path, &x, dt).unwrap();
        for i in 1..traj.t.len() - 1 {
            let fd = (traj.q[i + 1][0] - traj.q[i - 1][0]) / (traj.t[i + 1] - traj.t[i - 1]);
            assert!(
                (fd - traj.qd[i][0]).abs() < 20.0 * dt,
                "finite difference {fd} vs chain rule {}",
                traj.qd[i][0]
            );
        }
    }

    #[test]
    fn s_is_monotone() {
        let x = [0.0, 0.3, 0.1, 0.4, 0.0];
        let timing = duration(&x, &DeltaS::Uniform(0.25)).unwrap();
        let mut prev = -1.0;
        let mut t = 0.0;
        while t <= timing.duration {
            let (s, _, _) = timing.state_at(t);
            assert!(s >= prev - 1e-12);
            prev = s;
            t += timing.duration / 500.0;
        }
    }

    #[test]
    fn csv_has_expected_header() {
        let path = line_path(3);
        let x = vec![1.0; 3];
        let traj = sample_trajectory(&path, &x, 0.5).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, "t,s,sdot,x,u,q_0,qd_0");
        assert_eq!(text.lines().count(), traj.t.len() + 1);
    }
}
