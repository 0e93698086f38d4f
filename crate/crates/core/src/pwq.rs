//! Scalar piecewise-quadratic functions and parametric elimination of one
//! variable from a constrained bivariate quadratic.
//!
//! [`eliminate_min`] is the algebra behind each quadratic-objective
//! elimination step: given a convex bivariate quadratic in `(x, y)`, linear
//! constraints, and a convex piecewise-quadratic prior on `x`, it returns
//! the parametric minimizer `x*(y)` (piecewise linear) and the value
//! function `min_x f(x, y)` (piecewise quadratic), both with domain equal to
//! the set of `y` that admit a feasible `x`.

use thiserror::Error;

use crate::lp2d::{Halfplane2, Interval};

/// Tolerance for merging equal coefficients in [`PiecewiseQuadratic::prune`].
const MERGE_REL_TOL: f64 = 1e-10;
/// Breakpoints closer than this (scaled by domain width) are collapsed.
const BREAK_ABS_TOL: f64 = 1e-12;
/// Runs of segments narrower than this (scaled by domain width) are replaced
/// by their chord during pruning.
const NARROW_REL_TOL: f64 = 1e-5;
/// Threshold below which a quadratic coefficient counts as zero.
const CONVEXITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PwqError {
    #[error("domains do not intersect")]
    EmptyDomain,
    #[error("no y admits a feasible x")]
    Infeasible,
    #[error("objective is not convex in the eliminated variable")]
    NonConvex,
    #[error("minimum is unbounded")]
    Unbounded,
}

/// One quadratic piece `a·z² + b·z + c` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSegment {
    pub lo: f64,
    pub hi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadSegment {
    pub fn new(lo: f64, hi: f64, a: f64, b: f64, c: f64) -> QuadSegment {
        QuadSegment { lo, hi, a, b, c }
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.a * z + self.b) * z + self.c
    }

    pub fn deriv(&self, z: f64) -> f64 {
        2.0 * self.a * z + self.b
    }
}

/// A scalar piecewise-quadratic function over contiguous closed segments.
/// Outside its domain the function is `+∞`; no segments at all encodes the
/// empty domain (an infeasible value function).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseQuadratic {
    segments: Vec<QuadSegment>,
}

impl PiecewiseQuadratic {
    /// Build from ordered, contiguous segments.
    ///
    /// Panics if segments overlap, leave gaps, or are out of order.
    pub fn new(segments: Vec<QuadSegment>) -> PiecewiseQuadratic {
        for w in segments.windows(2) {
            assert!(
                w[0].hi == w[1].lo,
                "segments must be contiguous: {} vs {}",
                w[0].hi,
                w[1].lo
            );
        }
        for s in &segments {
            assert!(s.lo <= s.hi, "segment bounds out of order");
        }
        PiecewiseQuadratic { segments }
    }

    pub fn empty() -> PiecewiseQuadratic {
        PiecewiseQuadratic { segments: Vec::new() }
    }

    pub fn from_quadratic(a: f64, b: f64, c: f64, domain: Interval) -> PiecewiseQuadratic {
        if domain.is_empty() {
            return Self::empty();
        }
        PiecewiseQuadratic {
            segments: vec![QuadSegment::new(domain.lo, domain.hi, a, b, c)],
        }
    }

    pub fn zero(domain: Interval) -> PiecewiseQuadratic {
        Self::from_quadratic(0.0, 0.0, 0.0, domain)
    }

    pub fn constant(value: f64, domain: Interval) -> PiecewiseQuadratic {
        Self::from_quadratic(0.0, 0.0, value, domain)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[QuadSegment] {
        &self.segments
    }

    pub fn domain(&self) -> Interval {
        if self.segments.is_empty() {
            Interval::EMPTY
        } else {
            Interval::new(self.segments[0].lo, self.segments[self.segments.len() - 1].hi)
        }
    }

    /// `+∞` outside the domain.
    pub fn eval(&self, z: f64) -> f64 {
        match self.segment_at(z) {
            Some(s) => s.eval(z),
            None => f64::INFINITY,
        }
    }

    fn segment_at(&self, z: f64) -> Option<&QuadSegment> {
        if self.segments.is_empty() || !self.domain().contains(z) {
            return None;
        }
        // Few segments in practice; linear scan is fine and exact.
        self.segments.iter().find(|s| s.lo <= z && z <= s.hi)
    }

    /// Pointwise sum on the intersected domain.
    pub fn add(&self, other: &PiecewiseQuadratic) -> Result<PiecewiseQuadratic, PwqError> {
        let dom = self.domain().intersect(other.domain());
        if dom.is_empty() {
            return Err(PwqError::EmptyDomain);
        }
        let mut breaks: Vec<f64> = Vec::new();
        breaks.push(dom.lo);
        for s in self.segments.iter().chain(other.segments.iter()) {
            for v in [s.lo, s.hi] {
                if v > dom.lo && v < dom.hi {
                    breaks.push(v);
                }
            }
        }
        breaks.push(dom.hi);
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup();

        let mut segs = Vec::with_capacity(breaks.len().saturating_sub(1).max(1));
        if dom.is_point() {
            let f = self.segment_at(dom.lo).unwrap();
            let g = other.segment_at(dom.lo).unwrap();
            segs.push(QuadSegment::new(
                dom.lo,
                dom.lo,
                f.a + g.a,
                f.b + g.b,
                f.c + g.c,
            ));
        } else {
            for w in breaks.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                if lo == hi {
                    continue;
                }
                let mid = midpoint(lo, hi);
                let f = self.segment_at(mid).expect("mid inside self domain");
                let g = other.segment_at(mid).expect("mid inside other domain");
                segs.push(QuadSegment::new(lo, hi, f.a + g.a, f.b + g.b, f.c + g.c));
            }
        }
        Ok(PiecewiseQuadratic { segments: segs })
    }

    /// Add a plain quadratic `a·z² + b·z + c` to every segment.
    pub fn add_quadratic(&self, a: f64, b: f64, c: f64) -> PiecewiseQuadratic {
        let segments = self
            .segments
            .iter()
            .map(|s| QuadSegment::new(s.lo, s.hi, s.a + a, s.b + b, s.c + c))
            .collect();
        PiecewiseQuadratic { segments }
    }

    /// Clip to `window`; empty if there is no overlap.
    pub fn restrict(&self, window: Interval) -> PiecewiseQuadratic {
        let dom = self.domain().intersect(window);
        if dom.is_empty() {
            return Self::empty();
        }
        let mut segs = Vec::new();
        for s in &self.segments {
            let lo = s.lo.max(dom.lo);
            let hi = s.hi.min(dom.hi);
            if lo <= hi && !(lo == hi && !segs.is_empty()) {
                segs.push(QuadSegment::new(lo, hi, s.a, s.b, s.c));
            }
        }
        // A point window landing exactly on a shared breakpoint keeps one segment.
        if segs.len() > 1 {
            segs.retain(|s| s.lo < s.hi);
        }
        PiecewiseQuadratic { segments: segs }
    }

    /// Merge segments with equal coefficients and drop roundoff-thin ones.
    /// Idempotent; function values are unchanged up to the thin segments
    /// removed.
    pub fn prune(&self) -> PiecewiseQuadratic {
        if self.segments.is_empty() {
            return self.clone();
        }
        let dom = self.domain();
        let span = if dom.width().is_finite() {
            dom.width().max(1.0)
        } else {
            1.0
        };
        let wtol = BREAK_ABS_TOL * span;

        // Drop thin segments by extending the following segment leftward.
        let mut kept: Vec<QuadSegment> = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            if s.hi - s.lo <= wtol && self.segments.len() > 1 {
                continue;
            }
            kept.push(*s);
        }
        if kept.is_empty() {
            // Everything was thin: collapse to a single point segment.
            let s = self.segments[0];
            kept.push(QuadSegment::new(dom.lo, dom.lo, s.a, s.b, s.c));
        }
        // Restore contiguity after removals.
        kept[0].lo = dom.lo;
        let n = kept.len();
        kept[n - 1].hi = dom.hi;
        for i in 1..n {
            let prev_hi = kept[i - 1].hi;
            kept[i].lo = prev_hi;
        }

        // Merge adjacent segments with matching coefficients.
        let near = |u: f64, v: f64| (u - v).abs() <= MERGE_REL_TOL * 1.0f64.max(u.abs()).max(v.abs());
        let mut merged: Vec<QuadSegment> = Vec::with_capacity(kept.len());
        for s in kept {
            match merged.last_mut() {
                Some(last) if near(last.a, s.a) && near(last.b, s.b) && near(last.c, s.c) => {
                    last.hi = s.hi;
                }
                _ => merged.push(s),
            }
        }

        // Collapse runs of two or more narrow segments into their chord.
        // Constraint cascades otherwise accrete one exponentially thinner
        // segment per step; the chord keeps continuity and convexity, and the
        // replaced region is thinner than any practical query resolution.
        let narrow = NARROW_REL_TOL * span;
        let mut out: Vec<QuadSegment> = Vec::with_capacity(merged.len());
        let mut i = 0;
        while i < merged.len() {
            let mut j = i;
            while j < merged.len() && merged[j].hi - merged[j].lo < narrow {
                j += 1;
            }
            if j - i >= 2 {
                let (lo, hi) = (merged[i].lo, merged[j - 1].hi);
                let (f_lo, f_hi) = (merged[i].eval(lo), merged[j - 1].eval(hi));
                let slope = if hi > lo { (f_hi - f_lo) / (hi - lo) } else { 0.0 };
                out.push(QuadSegment::new(lo, hi, 0.0, slope, f_lo - slope * lo));
                i = j;
            } else {
                out.push(merged[i]);
                i += 1;
            }
        }
        PiecewiseQuadratic { segments: out }
    }

    /// Global minimizer and value; ties broken toward the smallest argument.
    pub fn minimize(&self) -> Result<(f64, f64), PwqError> {
        if self.segments.is_empty() {
            return Err(PwqError::EmptyDomain);
        }
        let mut best: Option<(f64, f64)> = None;
        let mut consider = |z: f64, v: f64| {
            if !v.is_finite() && v == f64::NEG_INFINITY {
                return;
            }
            match best {
                None => best = Some((z, v)),
                Some((bz, bv)) => {
                    if v < bv - 0.0 || (v == bv && z < bz) {
                        best = Some((z, v));
                    }
                }
            }
        };
        for s in &self.segments {
            if s.a > CONVEXITY_EPS {
                let vtx = -s.b / (2.0 * s.a);
                let z = vtx.max(s.lo).min(s.hi);
                if z.is_finite() {
                    consider(z, s.eval(z));
                } else {
                    return Err(PwqError::Unbounded);
                }
            } else {
                // Linear (or slightly concave) piece: minimum at an endpoint.
                let slope_lo = s.deriv(if s.lo.is_finite() { s.lo } else { s.hi.min(0.0) });
                let candidates = if slope_lo >= 0.0 { [s.lo, s.hi] } else { [s.hi, s.lo] };
                let z = candidates[0];
                if z.is_finite() {
                    consider(z, s.eval(z));
                } else if s.b.abs() <= CONVEXITY_EPS && s.a.abs() <= CONVEXITY_EPS {
                    // Flat to infinity: every point ties; smallest finite end.
                    let z = if s.lo.is_finite() { s.lo } else { s.hi };
                    if z.is_finite() {
                        consider(z, s.c);
                    } else {
                        consider(0.0, s.c);
                    }
                } else {
                    return Err(PwqError::Unbounded);
                }
            }
        }
        best.ok_or(PwqError::Unbounded)
    }

    /// Convexity check: non-negative curvature on every segment and
    /// non-decreasing one-sided derivatives across breakpoints.
    pub fn is_convex(&self, tol: f64) -> bool {
        for s in &self.segments {
            if s.a < -CONVEXITY_EPS {
                return false;
            }
        }
        for w in self.segments.windows(2) {
            let t = w[0].hi;
            if !t.is_finite() {
                continue;
            }
            let dl = w[0].deriv(t);
            let dr = w[1].deriv(t);
            let scale = 1.0f64.max(dl.abs()).max(dr.abs());
            if dl > dr + tol * scale {
                return false;
            }
        }
        true
    }
}

/// One linear piece `m·y + q` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinSegment {
    pub lo: f64,
    pub hi: f64,
    pub m: f64,
    pub q: f64,
}

impl LinSegment {
    pub fn eval(&self, y: f64) -> f64 {
        self.m * y + self.q
    }
}

/// A scalar piecewise-linear function over contiguous closed segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    segments: Vec<LinSegment>,
}

impl PiecewiseLinear {
    pub fn new(segments: Vec<LinSegment>) -> PiecewiseLinear {
        for w in segments.windows(2) {
            assert!(w[0].hi == w[1].lo, "segments must be contiguous");
        }
        PiecewiseLinear { segments }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[LinSegment] {
        &self.segments
    }

    pub fn domain(&self) -> Interval {
        if self.segments.is_empty() {
            Interval::EMPTY
        } else {
            Interval::new(self.segments[0].lo, self.segments[self.segments.len() - 1].hi)
        }
    }

    /// Evaluate, clamping the argument into the domain first (guards against
    /// arguments that drifted out by roundoff).
    pub fn eval_clamped(&self, y: f64) -> f64 {
        assert!(!self.segments.is_empty(), "empty conditional");
        let y = self.domain().clamp(y);
        let seg = self
            .segments
            .iter()
            .find(|s| s.lo <= y && y <= s.hi)
            .expect("clamped argument inside domain");
        seg.eval(y)
    }

    pub fn restrict(&self, window: Interval) -> PiecewiseLinear {
        let dom = self.domain().intersect(window);
        if dom.is_empty() {
            return PiecewiseLinear { segments: Vec::new() };
        }
        let mut segs = Vec::new();
        for s in &self.segments {
            let lo = s.lo.max(dom.lo);
            let hi = s.hi.min(dom.hi);
            if lo <= hi && !(lo == hi && !segs.is_empty()) {
                segs.push(LinSegment { lo, hi, m: s.m, q: s.q });
            }
        }
        if segs.len() > 1 {
            segs.retain(|s| s.lo < s.hi);
        }
        PiecewiseLinear { segments: segs }
    }
}

/// The bivariate quadratic `½p·x² + ½r·y² + n·x·y + g·x + h·y + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateQuadratic {
    pub p: f64,
    pub r: f64,
    pub n: f64,
    pub g: f64,
    pub h: f64,
    pub k: f64,
}

impl BivariateQuadratic {
    pub fn zero() -> BivariateQuadratic {
        BivariateQuadratic { p: 0.0, r: 0.0, n: 0.0, g: 0.0, h: 0.0, k: 0.0 }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        0.5 * self.p * x * x
            + 0.5 * self.r * y * y
            + self.n * x * y
            + self.g * x
            + self.h * y
            + self.k
    }

    /// PSD check of the Hessian `[[p, n], [n, r]]`.
    pub fn is_convex(&self, tol: f64) -> bool {
        let scale = 1.0f64.max(self.p.abs()).max(self.r.abs()).max(self.n.abs());
        self.p >= -tol * scale
            && self.r >= -tol * scale
            && self.p * self.r - self.n * self.n >= -tol * scale * scale
    }
}

/// Result of eliminating `x`: the parametric minimizer and the value function.
#[derive(Debug, Clone)]
pub struct Elimination {
    pub conditional: PiecewiseLinear,
    pub value: PiecewiseQuadratic,
}

/// Minimize `q(x, y) + prior(x)` over feasible `x`, parametrically in `y`.
///
/// Feasible `x` means: every halfplane `a·x + b·y ≤ c` in `x_constraints`
/// holds, `x ∈ x_box`, and `x` lies in `prior`'s domain. The minimizer is the
/// stationary point of the (convex) total objective clamped to the
/// `y`-dependent feasible interval of `x`; where the stationary line meets a
/// constraint boundary, the constraint-clamped branch is used.
pub fn eliminate_min(
    q: &BivariateQuadratic,
    x_constraints: &[Halfplane2],
    x_box: Interval,
    prior: &PiecewiseQuadratic,
) -> Result<Elimination, PwqError> {
    let xd = x_box.intersect(prior.domain());
    if xd.is_empty() {
        return Err(PwqError::Infeasible);
    }
    let prior = prior.restrict(xd);
    debug_assert!(!prior.is_empty());

    // Feasible-interval structure: x >= m·y + q (lower) / x <= m·y + q (upper).
    let mut lower: Vec<(f64, f64)> = Vec::new();
    let mut upper: Vec<(f64, f64)> = Vec::new();
    let mut ydom = Interval::UNBOUNDED;
    if xd.lo.is_finite() {
        lower.push((0.0, xd.lo));
    }
    if xd.hi.is_finite() {
        upper.push((0.0, xd.hi));
    }
    for row in x_constraints {
        let eps = 1e-12 * 1.0f64.max(row.a.abs()).max(row.b.abs()).max(row.c.abs());
        if row.a.abs() <= eps {
            if row.b.abs() <= eps {
                if row.c < -eps {
                    return Err(PwqError::Infeasible);
                }
            } else if row.b > 0.0 {
                ydom.hi = ydom.hi.min(row.c / row.b);
            } else {
                ydom.lo = ydom.lo.max(row.c / row.b);
            }
        } else {
            let line = (-row.b / row.a, row.c / row.a);
            if row.a > 0.0 {
                upper.push(line);
            } else {
                lower.push(line);
            }
        }
    }

    // y values for which some feasible x exists: every lower line must sit
    // below every upper line.
    for &(ml, ql) in &lower {
        for &(mu, qu) in &upper {
            let slope = ml - mu;
            let rhs = qu - ql;
            let eps = 1e-12 * 1.0f64.max(ml.abs()).max(mu.abs()).max(ql.abs()).max(qu.abs());
            if slope.abs() <= eps {
                if rhs < -eps {
                    return Err(PwqError::Infeasible);
                }
            } else if slope > 0.0 {
                ydom.hi = ydom.hi.min(rhs / slope);
            } else {
                ydom.lo = ydom.lo.max(rhs / slope);
            }
        }
    }
    if ydom.lo > ydom.hi {
        let eps = 1e-12 * 1.0f64.max(ydom.lo.abs()).max(ydom.hi.abs());
        if ydom.lo - ydom.hi <= eps {
            ydom = Interval::point(0.5 * (ydom.lo + ydom.hi));
        } else {
            return Err(PwqError::Infeasible);
        }
    }

    // Fully pinned x: the conditional is constant regardless of the objective.
    if xd.is_point() {
        let x0 = xd.lo;
        let fseg = prior.segments()[0];
        let px = fseg.eval(x0) + 0.5 * q.p * x0 * x0 + q.g * x0 + q.k;
        let value = PiecewiseQuadratic::from_quadratic(0.5 * q.r, q.n * x0 + q.h, px, ydom);
        let conditional = PiecewiseLinear::new(vec![LinSegment {
            lo: ydom.lo,
            hi: ydom.hi,
            m: 0.0,
            q: x0,
        }]);
        return Ok(Elimination { conditional, value });
    }

    // Convexity of the total objective in x on every segment.
    let coeff_scale = 1.0f64.max(q.p.abs()).max(q.n.abs());
    for s in prior.segments() {
        let p_tot = q.p + 2.0 * s.a;
        let scale = coeff_scale.max(s.a.abs());
        if p_tot < -CONVEXITY_EPS * scale {
            return Err(PwqError::NonConvex);
        }
        if p_tot <= CONVEXITY_EPS * scale && q.n.abs() > 1e-12 * coeff_scale {
            // A flat-in-x piece whose slope depends on y would make the
            // minimizer jump discontinuously.
            return Err(PwqError::NonConvex);
        }
    }
    if !prior.is_convex(1e-9) {
        return Err(PwqError::NonConvex);
    }

    // Candidate y values where the active configuration can change.
    let mut cands: Vec<f64> = Vec::new();
    let mut push = |y: f64| {
        if y.is_finite() && y > ydom.lo && y < ydom.hi {
            cands.push(y);
        }
    };
    let all_lines: Vec<(f64, f64)> = lower.iter().chain(upper.iter()).copied().collect();
    for i in 0..all_lines.len() {
        for j in (i + 1)..all_lines.len() {
            let (m1, q1) = all_lines[i];
            let (m2, q2) = all_lines[j];
            if (m1 - m2).abs() > 1e-14 {
                push((q2 - q1) / (m1 - m2));
            }
        }
    }
    let interior_breaks: Vec<f64> = prior
        .segments()
        .windows(2)
        .map(|w| w[0].hi)
        .filter(|t| t.is_finite())
        .collect();
    for &t in &interior_breaks {
        for &(m, qq) in &all_lines {
            if m.abs() > 1e-14 {
                push((t - qq) / m);
            }
        }
    }
    for s in prior.segments() {
        let p_tot = q.p + 2.0 * s.a;
        if p_tot <= CONVEXITY_EPS * coeff_scale.max(s.a.abs()) {
            continue;
        }
        // Stationary line of this segment: x = sm·y + sq.
        let sm = -q.n / p_tot;
        let sq = -(q.g + s.b) / p_tot;
        for &(m, qq) in &all_lines {
            if (sm - m).abs() > 1e-14 {
                push((qq - sq) / (sm - m));
            }
        }
        for t in [s.lo, s.hi] {
            if t.is_finite() && sm.abs() > 1e-14 {
                push((t - sq) / sm);
            }
        }
    }
    cands.sort_by(|a, b| a.total_cmp(b));
    cands.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * 1.0f64.max(a.abs()).max(b.abs()));

    let mut bounds = Vec::with_capacity(cands.len() + 2);
    bounds.push(ydom.lo);
    bounds.extend(cands);
    bounds.push(ydom.hi);
    bounds.dedup_by(|a, b| a == b);

    let mut cond_segs: Vec<LinSegment> = Vec::new();
    let mut val_segs: Vec<QuadSegment> = Vec::new();

    let pieces = if bounds.len() == 1 { 1 } else { bounds.len() - 1 };
    for i in 0..pieces {
        let (ya, yb) = if bounds.len() == 1 {
            (bounds[0], bounds[0])
        } else {
            (bounds[i], bounds[i + 1])
        };
        let ym = midpoint(ya, yb);

        let lam = lower
            .iter()
            .map(|&(m, qq)| m * ym + qq)
            .fold(f64::NEG_INFINITY, f64::max);
        let mu = upper
            .iter()
            .map(|&(m, qq)| m * ym + qq)
            .fold(f64::INFINITY, f64::min);

        let xu = unconstrained_argmin(&prior, q, ym);
        let xs = xu.max(lam).min(mu);
        if !xs.is_finite() {
            return Err(PwqError::Unbounded);
        }

        // Which affine function tracks x*(y) on this piece? Constraint
        // branches take precedence over the stationary line on ties.
        let xtol = 1e-9 * 1.0f64.max(xs.abs());
        let line: (f64, f64) = if xu <= lam + xtol && lam.is_finite() {
            *argmax_line(&lower, ym)
        } else if xu >= mu - xtol && mu.is_finite() {
            *argmin_line(&upper, ym)
        } else {
            let seg = segment_containing(&prior, xs);
            let p_tot = q.p + 2.0 * seg.a;
            if p_tot > CONVEXITY_EPS * coeff_scale.max(seg.a.abs()) {
                let sm = -q.n / p_tot;
                let sq = -(q.g + seg.b) / p_tot;
                if (sm * ym + sq - xs).abs() <= xtol.max(1e-12) {
                    (sm, sq)
                } else {
                    (0.0, xs) // pinned at a breakpoint of the prior
                }
            } else {
                (0.0, xs) // flat piece; smallest minimizer is constant here
            }
        };

        let seg = segment_containing(&prior, line.0 * ym + line.1);
        let aa = 0.5 * q.p + seg.a;
        let bb = q.g + seg.b;
        let kk = seg.c + q.k;
        let (m, qq) = line;
        // Substitute x = m·y + qq into  aa·x² + bb·x + n·x·y + ½r·y² + h·y + kk.
        let va = aa * m * m + q.n * m + 0.5 * q.r;
        let vb = 2.0 * aa * m * qq + bb * m + q.n * qq + q.h;
        let vc = aa * qq * qq + bb * qq + kk;

        cond_segs.push(LinSegment { lo: ya, hi: yb, m, q: qq });
        val_segs.push(QuadSegment::new(ya, yb, va, vb, vc));
    }

    // Merge exact duplicates produced by adjacent pieces with the same branch.
    let conditional = PiecewiseLinear::new(merge_lin(cond_segs));
    let value = PiecewiseQuadratic::new(merge_quad(val_segs));
    Ok(Elimination { conditional, value })
}

/// Smallest unconstrained minimizer of `prior(x) + q(x, y)` at fixed `y`:
/// the first point where the (non-decreasing) derivative reaches zero.
fn unconstrained_argmin(prior: &PiecewiseQuadratic, q: &BivariateQuadratic, y: f64) -> f64 {
    for s in prior.segments() {
        let p_tot = q.p + 2.0 * s.a;
        let lin = s.b + q.g + q.n * y;
        let d_lo = if s.lo.is_finite() {
            p_tot * s.lo + lin
        } else if p_tot > 0.0 {
            f64::NEG_INFINITY
        } else {
            lin
        };
        if d_lo >= 0.0 {
            return s.lo;
        }
        if p_tot > CONVEXITY_EPS {
            let xst = -lin / p_tot;
            if xst <= s.hi {
                return xst;
            }
        }
    }
    prior.domain().hi
}

fn segment_containing(prior: &PiecewiseQuadratic, x: f64) -> &QuadSegment {
    let segs = prior.segments();
    for s in segs {
        if s.lo <= x && x <= s.hi {
            return s;
        }
    }
    // Roundoff pushed x just outside; take the nearest end segment.
    if x < segs[0].lo {
        &segs[0]
    } else {
        &segs[segs.len() - 1]
    }
}

fn argmax_line(lines: &[(f64, f64)], y: f64) -> &(f64, f64) {
    lines
        .iter()
        .max_by(|l1, l2| {
            (l1.0 * y + l1.1)
                .total_cmp(&(l2.0 * y + l2.1))
                .then(l1.0.total_cmp(&l2.0))
        })
        .expect("nonempty line set")
}

fn argmin_line(lines: &[(f64, f64)], y: f64) -> &(f64, f64) {
    lines
        .iter()
        .min_by(|l1, l2| {
            (l1.0 * y + l1.1)
                .total_cmp(&(l2.0 * y + l2.1))
                .then(l1.0.total_cmp(&l2.0))
        })
        .expect("nonempty line set")
}

fn merge_lin(segs: Vec<LinSegment>) -> Vec<LinSegment> {
    let mut out: Vec<LinSegment> = Vec::with_capacity(segs.len());
    for s in segs {
        if s.lo == s.hi && !out.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.m == s.m && last.q == s.q => last.hi = s.hi,
            Some(last) if last.lo == last.hi => *last = s,
            _ => out.push(s),
        }
    }
    out
}

fn merge_quad(segs: Vec<QuadSegment>) -> Vec<QuadSegment> {
    let mut out: Vec<QuadSegment> = Vec::with_capacity(segs.len());
    for s in segs {
        if s.lo == s.hi && !out.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.a == s.a && last.b == s.b && last.c == s.c => last.hi = s.hi,
            Some(last) if last.lo == last.hi => *last = s,
            _ => out.push(s),
        }
    }
    out
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}
