//! Dense reference solvers for small instances — ground truth for tests and
//! acceptance checks. Deliberately independent of the elimination pass: the
//! greedy minimum-time reference maximizes each `x_k` with a full dense LP
//! (two-phase simplex), and the quadratic reference solves one dense convex
//! QP over the flattened `(x, u)` variables with an infeasible-start
//! primal-dual interior point method, certified by an explicit KKT check.

// Dense matrix code reads clearest with explicit indices.
#![allow(clippy::needless_range_loop)]

use thiserror::Error;

use crate::lp2d::Interval;
use crate::problem::DiscretizedProblem;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("objective is unbounded")]
    Unbounded,
    #[error("solver did not converge (KKT residual {residual:.3e})")]
    NotConverged { residual: f64 },
    #[error("unsupported instance: {0}")]
    Unsupported(String),
}

/// A reference solution; `kkt_residual` is populated by the QP path.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub objective_value: Option<f64>,
    pub kkt_residual: Option<f64>,
}

// ---------------------------------------------------------------------------
// Dense LU with partial pivoting.

pub(crate) fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    // Row equilibration keeps the singularity test meaningful when rows have
    // wildly different magnitudes (interior-point weights can reach 1e12).
    for i in 0..n {
        let r = a[i].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if r > 0.0 {
            for v in a[i].iter_mut() {
                *v /= r;
            }
            b[i] /= r;
        }
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for j in (col + 1)..n {
            acc -= a[col][j] * b[j];
        }
        b[col] = acc / a[col][col];
    }
    if b.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(b)
}

// ---------------------------------------------------------------------------
// Two-phase tableau simplex: maximize c·z subject to G z ≤ h, z ≥ 0.

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

pub(crate) enum LpOutcome {
    Optimal {
        #[allow(dead_code)]
        z: Vec<f64>,
        value: f64,
    },
    Unbounded,
    Infeasible,
}

pub(crate) fn simplex_max(c: &[f64], rows: &[(Vec<f64>, f64)]) -> Result<LpOutcome, OracleError> {
    let n = c.len();
    let m = rows.len();

    // Columns: structural | slacks | artificials; rhs kept separately.
    let mut n_art = 0;
    for &(_, h) in rows {
        if h < 0.0 {
            n_art += 1;
        }
    }
    let ncols = n + m + n_art;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut art_idx = n + m;
    for (i, (g, h)) in rows.iter().enumerate() {
        let mut row = vec![0.0; ncols];
        let neg = *h < 0.0;
        let sgn = if neg { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = sgn * g[j];
        }
        row[n + i] = sgn; // slack
        if neg {
            row[art_idx] = 1.0;
            basis.push(art_idx);
            art_idx += 1;
        } else {
            basis.push(n + i);
        }
        t.push(row);
        rhs.push(sgn * h);
    }

    let mut active = vec![true; ncols];

    if n_art > 0 {
        let mut obj = vec![0.0; ncols];
        for j in (n + m)..ncols {
            obj[j] = -1.0;
        }
        let mut obj_val = 0.0;
        price_out(&mut obj, &mut obj_val, &t, &rhs, &basis);
        run_simplex(&mut t, &mut rhs, &mut basis, &mut obj, &mut obj_val, &active)?;
        if obj_val < -FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive leftover artificials out of the basis; drop redundant rows.
        let mut row = 0;
        while row < t.len() {
            if basis[row] >= n + m {
                let piv_col = (0..n + m).find(|&j| active[j] && t[row][j].abs() > PIVOT_TOL);
                match piv_col {
                    Some(j) => pivot(&mut t, &mut rhs, &mut basis, row, j),
                    None => {
                        t.remove(row);
                        rhs.remove(row);
                        basis.remove(row);
                        continue;
                    }
                }
            }
            row += 1;
        }
        for j in (n + m)..ncols {
            active[j] = false;
        }
    }

    let mut obj = vec![0.0; ncols];
    obj[..n].copy_from_slice(c);
    let mut obj_val = 0.0;
    price_out(&mut obj, &mut obj_val, &t, &rhs, &basis);
    if !run_simplex(&mut t, &mut rhs, &mut basis, &mut obj, &mut obj_val, &active)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut z = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            z[bv] = rhs[i];
        }
    }
    Ok(LpOutcome::Optimal { z, value: obj_val })
}

fn price_out(obj: &mut [f64], obj_val: &mut f64, t: &[Vec<f64>], rhs: &[f64], basis: &[usize]) {
    for (i, &bv) in basis.iter().enumerate() {
        let cb = obj[bv];
        if cb != 0.0 {
            for (o, v) in obj.iter_mut().zip(&t[i]) {
                *o -= cb * v;
            }
            *obj_val += cb * rhs[i];
        }
    }
}

/// Bland's rule; returns `false` when the objective is unbounded.
fn run_simplex(
    t: &mut [Vec<f64>],
    rhs: &mut [f64],
    basis: &mut [usize],
    obj: &mut [f64],
    obj_val: &mut f64,
    active: &[bool],
) -> Result<bool, OracleError> {
    let max_iters = 200 * (t.len() + obj.len()) + 1000;
    for _ in 0..max_iters {
        let entering = (0..obj.len()).find(|&j| active[j] && obj[j] > PIVOT_TOL);
        let Some(col) = entering else {
            return Ok(true);
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..t.len() {
            if t[i][col] > PIVOT_TOL {
                let ratio = rhs[i] / t[i][col];
                if ratio < best - 1e-12 || (ratio < best + 1e-12 && {
                    match leave {
                        Some(l) => basis[i] < basis[l],
                        None => true,
                    }
                }) {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Ok(false);
        };
        pivot(t, rhs, basis, row, col);
        let cb = obj[col];
        if cb != 0.0 {
            for (o, v) in obj.iter_mut().zip(&t[row]) {
                *o -= cb * v;
            }
            *obj_val += cb * rhs[row];
        }
    }
    Err(OracleError::NotConverged { residual: f64::NAN })
}

fn pivot(t: &mut [Vec<f64>], rhs: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let piv = t[row][col];
    for v in t[row].iter_mut() {
        *v /= piv;
    }
    rhs[row] /= piv;
    for i in 0..t.len() {
        if i == row {
            continue;
        }
        let factor = t[i][col];
        if factor == 0.0 {
            continue;
        }
        // Split borrow: copy the pivot row values on the fly.
        for j in 0..t[i].len() {
            let pv = t[row][j];
            t[i][j] -= factor * pv;
        }
        rhs[i] -= factor * rhs[row];
    }
    basis[row] = col;
}

// ---------------------------------------------------------------------------
// The greedy minimum-time reference: maximize x_N over the full feasible
// set, fix it, then x_{N-1}, and so on. This realizes the infinite-priority
// weighting without ever materializing a weight.

pub fn topp_oracle(p: &DiscretizedProblem) -> Result<OracleSolution, OracleError> {
    let n = p.num_intervals();
    if n == 0 {
        return Err(OracleError::Unsupported("need at least one interval".into()));
    }
    let mut rows = build_x_rows(p, n + 1);

    let nv = n + 1;
    let floor = p.x_floor;
    let mut x = vec![0.0; nv];
    for k in (0..nv).rev() {
        let mut c = vec![0.0; nv];
        c[k] = 1.0;
        match simplex_max(&c, &rows)? {
            LpOutcome::Optimal { value, .. } => {
                x[k] = value + floor;
                for (g, h) in rows.iter_mut() {
                    *h -= g[k] * value;
                    g[k] = 0.0;
                }
            }
            LpOutcome::Unbounded => return Err(OracleError::Unbounded),
            LpOutcome::Infeasible => return Err(OracleError::Infeasible),
        }
    }
    let u = (0..n)
        .map(|k| (x[k + 1] - x[k]) / (2.0 * p.delta_s_at(k)))
        .collect();
    Ok(OracleSolution { x, u, objective_value: None, kkt_residual: None })
}

/// Min/max of `x_k` subject to the constraints on earlier variables only
/// (steps `0..k`, the floor, and the start boundary): the reach interval a
/// forward pass should produce, computed densely.
pub fn reach_bounds(p: &DiscretizedProblem, k: usize) -> Result<Interval, OracleError> {
    let rows = build_x_rows_prefix(p, k + 1);
    let nv = k + 1;
    let floor = p.x_floor;
    let mut c = vec![0.0; nv];
    c[k] = 1.0;
    let hi = match simplex_max(&c, &rows)? {
        LpOutcome::Optimal { value, .. } => value + floor,
        LpOutcome::Unbounded => f64::INFINITY,
        LpOutcome::Infeasible => return Err(OracleError::Infeasible),
    };
    c[k] = -1.0;
    let lo = match simplex_max(&c, &rows)? {
        LpOutcome::Optimal { value, .. } => -value + floor,
        LpOutcome::Unbounded => f64::NEG_INFINITY,
        LpOutcome::Infeasible => return Err(OracleError::Infeasible),
    };
    Ok(Interval::new(lo, hi))
}

/// Inequality rows over `z_k = x_k - x_floor ≥ 0` for the first `nv`
/// variables, including every step whose rows close within that range, the
/// start boundary, and (when `nv` covers the whole problem) the final step
/// rows and end boundary.
fn build_x_rows(p: &DiscretizedProblem, nv: usize) -> Vec<(Vec<f64>, f64)> {
    let mut rows = build_x_rows_prefix(p, nv);
    let n = p.num_intervals();
    if nv == n + 1 {
        let sn = &p.steps[n];
        for i in 0..sn.num_rows() {
            push_row_pair(&mut rows, nv, p.x_floor, &[(n, sn.b[i])], sn.c[i], sn.lo[i], sn.hi[i]);
        }
        push_row_pair(
            &mut rows,
            nv,
            p.x_floor,
            &[(n, 1.0)],
            0.0,
            p.boundary.x_n.lo,
            p.boundary.x_n.hi,
        );
    }
    rows
}

fn build_x_rows_prefix(p: &DiscretizedProblem, nv: usize) -> Vec<(Vec<f64>, f64)> {
    let mut rows = Vec::new();
    let floor = p.x_floor;
    for k in 0..nv.saturating_sub(1) {
        let d = 2.0 * p.delta_s_at(k);
        let s = &p.steps[k];
        for i in 0..s.num_rows() {
            let px = s.b[i] - s.a[i] / d;
            let py = s.a[i] / d;
            push_row_pair(
                &mut rows,
                nv,
                floor,
                &[(k, px), (k + 1, py)],
                s.c[i],
                s.lo[i],
                s.hi[i],
            );
        }
    }
    push_row_pair(
        &mut rows,
        nv,
        floor,
        &[(0, 1.0)],
        0.0,
        p.boundary.x0.lo,
        p.boundary.x0.hi,
    );
    rows
}

fn push_row_pair(
    rows: &mut Vec<(Vec<f64>, f64)>,
    nv: usize,
    floor: f64,
    terms: &[(usize, f64)],
    c: f64,
    lo: f64,
    hi: f64,
) {
    let base: f64 = terms.iter().map(|&(_, co)| co * floor).sum::<f64>() + c;
    if hi.is_finite() {
        let mut g = vec![0.0; nv];
        for &(i, co) in terms {
            g[i] += co;
        }
        rows.push((g, hi - base));
    }
    if lo.is_finite() {
        let mut g = vec![0.0; nv];
        for &(i, co) in terms {
            g[i] -= co;
        }
        rows.push((g, base - lo));
    }
}

// ---------------------------------------------------------------------------
// Dense convex QP over the flattened (x, u) variables.

pub(crate) struct DenseQp {
    pub nv: usize,
    pub hess: Vec<Vec<f64>>,
    pub lin: Vec<f64>,
    pub constant: f64,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub g_in: Vec<Vec<f64>>,
    pub h_in: Vec<f64>,
}

impl DenseQp {
    pub fn objective(&self, z: &[f64]) -> f64 {
        let mut acc = self.constant;
        for i in 0..self.nv {
            acc += self.lin[i] * z[i];
            for j in 0..self.nv {
                acc += 0.5 * z[i] * self.hess[i][j] * z[j];
            }
        }
        acc
    }
}

pub(crate) fn build_dense_qp(p: &DiscretizedProblem) -> DenseQp {
    let n = p.num_intervals();
    let nv = 2 * n + 1;
    let xi = |k: usize| k;
    let ui = |k: usize| n + 1 + k;

    let mut hess = vec![vec![0.0; nv]; nv];
    let mut lin = vec![0.0; nv];
    let mut constant = 0.0;
    for k in 0..=n {
        let c = p.cost_at(k);
        hess[xi(k)][xi(k)] += c.p;
        lin[xi(k)] += c.g;
        constant += c.k;
        if k < n {
            hess[ui(k)][ui(k)] += c.r;
            hess[xi(k)][ui(k)] += c.n;
            hess[ui(k)][xi(k)] += c.n;
            lin[ui(k)] += c.h;
        }
    }

    let mut a_eq = Vec::new();
    let mut b_eq = Vec::new();
    for k in 0..n {
        let mut row = vec![0.0; nv];
        row[xi(k + 1)] = 1.0;
        row[xi(k)] = -1.0;
        row[ui(k)] = -2.0 * p.delta_s_at(k);
        a_eq.push(row);
        b_eq.push(0.0);
    }

    let mut g_in = Vec::new();
    let mut h_in = Vec::new();
    let mut push = |terms: &[(usize, f64)], c: f64, lo: f64, hi: f64| {
        if lo == hi && lo.is_finite() {
            // Degenerate interval: emit as an equality.
            let mut row = vec![0.0; nv];
            for &(i, co) in terms {
                row[i] += co;
            }
            a_eq.push(row);
            b_eq.push(lo - c);
            return;
        }
        if hi.is_finite() {
            let mut row = vec![0.0; nv];
            for &(i, co) in terms {
                row[i] += co;
            }
            g_in.push(row);
            h_in.push(hi - c);
        }
        if lo.is_finite() {
            let mut row = vec![0.0; nv];
            for &(i, co) in terms {
                row[i] -= co;
            }
            g_in.push(row);
            h_in.push(c - lo);
        }
    };

    for k in 0..=n {
        let s = &p.steps[k];
        for i in 0..s.num_rows() {
            if k < n {
                push(&[(xi(k), s.b[i]), (ui(k), s.a[i])], s.c[i], s.lo[i], s.hi[i]);
            } else {
                push(&[(xi(k), s.b[i])], s.c[i], s.lo[i], s.hi[i]);
            }
        }
        push(&[(xi(k), 1.0)], 0.0, p.x_floor, f64::INFINITY);
    }
    push(&[(xi(0), 1.0)], 0.0, p.boundary.x0.lo, p.boundary.x0.hi);
    push(&[(xi(n), 1.0)], 0.0, p.boundary.x_n.lo, p.boundary.x_n.hi);

    DenseQp { nv, hess, lin, constant, a_eq, b_eq, g_in, h_in }
}

/// Worst violation of the KKT conditions at `(z, nu, lam)`.
pub(crate) fn kkt_residual(qp: &DenseQp, z: &[f64], nu: &[f64], lam: &[f64]) -> f64 {
    let nv = qp.nv;
    let mut worst = 0.0f64;
    for i in 0..nv {
        let mut st = qp.lin[i];
        for j in 0..nv {
            st += qp.hess[i][j] * z[j];
        }
        for (r, row) in qp.a_eq.iter().enumerate() {
            st += row[i] * nu[r];
        }
        for (r, row) in qp.g_in.iter().enumerate() {
            st += row[i] * lam[r];
        }
        worst = worst.max(st.abs());
    }
    for (row, b) in qp.a_eq.iter().zip(&qp.b_eq) {
        let v: f64 = row.iter().zip(z).map(|(a, x)| a * x).sum();
        worst = worst.max((v - b).abs());
    }
    for (r, (row, h)) in qp.g_in.iter().zip(&qp.h_in).enumerate() {
        let v: f64 = row.iter().zip(z).map(|(a, x)| a * x).sum();
        worst = worst.max(v - h).max(-lam[r]).max((lam[r] * (v - h)).abs());
    }
    worst
}

/// Primal point, equality duals, inequality duals.
type KktPoint = (Vec<f64>, Vec<f64>, Vec<f64>);

fn ipm_solve(qp: &DenseQp) -> Result<KktPoint, OracleError> {
    let nv = qp.nv;
    let ne = qp.a_eq.len();
    let mi = qp.g_in.len();

    let mut z = vec![0.0; nv];
    let mut nu = vec![0.0; ne];
    let mut lam = vec![1.0; mi];
    let mut s: Vec<f64> = (0..mi)
        .map(|i| {
            let gz: f64 = qp.g_in[i].iter().zip(&z).map(|(a, x)| a * x).sum();
            (qp.h_in[i] - gz).max(1.0)
        })
        .collect();

    let mut sigma = 0.1;
    for _ in 0..150 {
        // Residuals.
        let mut rd = qp.lin.clone();
        for i in 0..nv {
            for j in 0..nv {
                rd[i] += qp.hess[i][j] * z[j];
            }
            for (r, row) in qp.a_eq.iter().enumerate() {
                rd[i] += row[i] * nu[r];
            }
            for (r, row) in qp.g_in.iter().enumerate() {
                rd[i] += row[i] * lam[r];
            }
        }
        let re: Vec<f64> = qp
            .a_eq
            .iter()
            .zip(&qp.b_eq)
            .map(|(row, b)| row.iter().zip(&z).map(|(a, x)| a * x).sum::<f64>() - b)
            .collect();
        let ri: Vec<f64> = qp
            .g_in
            .iter()
            .zip(&qp.h_in)
            .enumerate()
            .map(|(r, (row, h))| {
                row.iter().zip(&z).map(|(a, x)| a * x).sum::<f64>() + s[r] - h
            })
            .collect();
        let mu = if mi > 0 {
            lam.iter().zip(&s).map(|(l, si)| l * si).sum::<f64>() / mi as f64
        } else {
            0.0
        };
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if inf(&rd) <= 1e-10 && inf(&re) <= 1e-10 && inf(&ri) <= 1e-10 && mu <= 1e-11 {
            // The slacks are consistent, so the full KKT residual is cheap.
            if kkt_residual(qp, &z, &nu, &lam) <= 1e-9 {
                return Ok((z, nu, lam));
            }
        }

        // Reduced KKT system in (dz, dnu).
        let dim = nv + ne;
        let mut mat = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for i in 0..nv {
            for j in 0..nv {
                mat[i][j] = qp.hess[i][j];
            }
            rhs[i] = -rd[i];
        }
        for r in 0..mi {
            let w = (lam[r] / s[r]).min(1e12);
            for i in 0..nv {
                if qp.g_in[r][i] == 0.0 {
                    continue;
                }
                for j in 0..nv {
                    mat[i][j] += w * qp.g_in[r][i] * qp.g_in[r][j];
                }
            }
            let wr = sigma * mu / s[r] - lam[r] + lam[r] * ri[r] / s[r];
            for i in 0..nv {
                rhs[i] -= qp.g_in[r][i] * wr;
            }
        }
        for (r, row) in qp.a_eq.iter().enumerate() {
            for i in 0..nv {
                mat[nv + r][i] = row[i];
                mat[i][nv + r] = row[i];
            }
            rhs[nv + r] = -re[r];
        }
        let sol = lu_solve(mat, rhs).ok_or(OracleError::NotConverged { residual: f64::NAN })?;
        let dz = &sol[..nv];
        let dnu = &sol[nv..];

        let mut dlam = vec![0.0; mi];
        let mut ds = vec![0.0; mi];
        for r in 0..mi {
            let gdz: f64 = qp.g_in[r].iter().zip(dz).map(|(a, x)| a * x).sum();
            dlam[r] = sigma * mu / s[r] - lam[r] + lam[r] * (ri[r] + gdz) / s[r];
            ds[r] = -ri[r] - gdz;
        }
        let mut alpha = 1.0f64;
        for r in 0..mi {
            if dlam[r] < 0.0 {
                alpha = alpha.min(-0.99 * lam[r] / dlam[r]);
            }
            if ds[r] < 0.0 {
                alpha = alpha.min(-0.99 * s[r] / ds[r]);
            }
        }
        // The weight cap makes late steps slightly inconsistent; backtrack
        // when a step would blow up the stationarity residual.
        let rd_now = inf(&rd);
        let dual_res = |z: &[f64], nu: &[f64], lam: &[f64]| -> f64 {
            let mut worst = 0.0f64;
            for i in 0..nv {
                let mut st = qp.lin[i];
                for j in 0..nv {
                    st += qp.hess[i][j] * z[j];
                }
                for (r, row) in qp.a_eq.iter().enumerate() {
                    st += row[i] * nu[r];
                }
                for (r, row) in qp.g_in.iter().enumerate() {
                    st += row[i] * lam[r];
                }
                worst = worst.max(st.abs());
            }
            worst
        };
        let mut accepted = false;
        for _ in 0..30 {
            let zt: Vec<f64> = z.iter().zip(dz).map(|(v, d)| v + alpha * d).collect();
            let nut: Vec<f64> = nu.iter().zip(dnu).map(|(v, d)| v + alpha * d).collect();
            let lamt: Vec<f64> = lam.iter().zip(&dlam).map(|(v, d)| v + alpha * d).collect();
            if dual_res(&zt, &nut, &lamt) <= (10.0 * rd_now).max(1e-10) {
                z = zt;
                nu = nut;
                lam = lamt;
                for r in 0..mi {
                    s[r] += alpha * ds[r];
                }
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        sigma = if alpha < 0.2 { 0.5 } else { 0.1 };
    }
    // Progress stalled; the point may nevertheless be good enough.
    let res = kkt_residual(qp, &z, &nu, &lam);
    if res <= 1e-8 {
        Ok((z, nu, lam))
    } else {
        Err(OracleError::NotConverged { residual: res })
    }
}

/// Dense convex-QP reference. Requires convex per-step costs; instances whose
/// per-step Hessians are singular in a constrained direction may fail to
/// converge and are reported as such rather than answered approximately.
pub fn qopp_oracle(p: &DiscretizedProblem) -> Result<OracleSolution, OracleError> {
    let qp = build_dense_qp(p);
    let (z, nu, lam) = ipm_solve(&qp)?;
    let res = kkt_residual(&qp, &z, &nu, &lam);
    if res > 1e-8 {
        return Err(OracleError::NotConverged { residual: res });
    }
    Ok(solution_from_dense(p, &qp, &z, res))
}

/// Independent tiny-instance route: enumerate active sets of inequality
/// constraints and solve the equality-constrained QP for each. Exponential;
/// refuses instances with more than 20 inequality rows.
pub fn qopp_oracle_enumerated(p: &DiscretizedProblem) -> Result<OracleSolution, OracleError> {
    let qp = build_dense_qp(p);
    let mi = qp.g_in.len();
    if mi > 20 {
        return Err(OracleError::Unsupported(format!(
            "{mi} inequality rows is too many to enumerate"
        )));
    }
    let mut best: Option<(f64, KktPoint)> = None;
    for mask in 0u32..(1u32 << mi) {
        if (mask.count_ones() as usize) > qp.nv {
            continue;
        }
        let active: Vec<usize> = (0..mi).filter(|i| mask & (1 << i) != 0).collect();
        let ne = qp.a_eq.len() + active.len();
        let dim = qp.nv + ne;
        let mut mat = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for i in 0..qp.nv {
            for j in 0..qp.nv {
                mat[i][j] = qp.hess[i][j];
            }
            rhs[i] = -qp.lin[i];
        }
        let mut fill = |r: usize, row: &[f64], b: f64| {
            for i in 0..qp.nv {
                mat[qp.nv + r][i] = row[i];
                mat[i][qp.nv + r] = row[i];
            }
            rhs[qp.nv + r] = b;
        };
        for (r, (row, b)) in qp.a_eq.iter().zip(&qp.b_eq).enumerate() {
            fill(r, row, *b);
        }
        for (idx, &gi) in active.iter().enumerate() {
            fill(qp.a_eq.len() + idx, &qp.g_in[gi], qp.h_in[gi]);
        }
        let Some(sol) = lu_solve(mat, rhs) else { continue };
        let z = &sol[..qp.nv];
        let nu = sol[qp.nv..qp.nv + qp.a_eq.len()].to_vec();
        let mut lam = vec![0.0; mi];
        for (idx, &gi) in active.iter().enumerate() {
            lam[gi] = sol[qp.nv + qp.a_eq.len() + idx];
        }
        let primal_ok = qp.g_in.iter().zip(&qp.h_in).all(|(row, h)| {
            row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>() <= h + 1e-8
        });
        let dual_ok = lam.iter().all(|&l| l >= -1e-8);
        if primal_ok && dual_ok {
            let val = qp.objective(z);
            if best.as_ref().is_none_or(|(bv, _)| val < *bv) {
                best = Some((val, (z.to_vec(), nu, lam)));
            }
        }
    }
    let (_, (z, nu, lam)) = best.ok_or(OracleError::Infeasible)?;
    let res = kkt_residual(&qp, &z, &nu, &lam);
    Ok(solution_from_dense(p, &qp, &z, res))
}

fn solution_from_dense(
    p: &DiscretizedProblem,
    qp: &DenseQp,
    z: &[f64],
    res: f64,
) -> OracleSolution {
    let n = p.num_intervals();
    OracleSolution {
        x: z[..=n].to_vec(),
        u: z[n + 1..].to_vec(),
        objective_value: Some(qp.objective(z)),
        kkt_residual: Some(res),
    }
}
