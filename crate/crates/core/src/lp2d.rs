//! Exact one- and two-variable linear programs over halfplanes and interval
//! boxes — the kernel behind reach-interval propagation.
//!
//! Problem sizes here are tiny (a handful of rows per call), so the solver
//! favors exactness over asymptotics: [`extremize_y`] projects the feasible
//! polygon onto the `y` axis by pairwise elimination of `x`, which also
//! reports unbounded directions correctly, something vertex enumeration
//! would need special cases for.

/// Feasibility slack, scaled by row magnitude before use.
pub const FEAS_EPS: f64 = 1e-12;

/// A closed interval of extended reals. `lo > hi` encodes the empty interval;
/// [`Interval::EMPTY`] is the canonical empty value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    pub const UNBOUNDED: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    /// NaN endpoints also count as empty.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn intersect(&self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_approx(&self, v: f64, tol: f64) -> bool {
        self.lo - tol <= v && v <= self.hi + tol
    }

    /// Clamp a value into a non-empty interval.
    pub fn clamp(&self, v: f64) -> f64 {
        debug_assert!(!self.is_empty());
        v.max(self.lo).min(self.hi)
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }
}

/// The halfplane `a·x + b·y ≤ c`. A row with `a = b = 0` acts as a constant
/// feasibility check (`c < 0` means infeasible).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfplane2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Halfplane2 {
    pub fn new(a: f64, b: f64, c: f64) -> Halfplane2 {
        Halfplane2 { a, b, c }
    }

    pub fn satisfied(&self, x: f64, y: f64, tol: f64) -> bool {
        self.a * x + self.b * y <= self.c + tol * self.scale()
    }

    fn scale(&self) -> f64 {
        1.0f64.max(self.a.abs()).max(self.b.abs()).max(self.c.abs())
    }
}

/// Exact projection of `{(x, y) : rows, x ∈ x_box, y ∈ y_box}` onto the `y`
/// axis. Returns the (possibly unbounded) interval of feasible `y`, or
/// [`Interval::EMPTY`] when the feasible set is empty.
///
/// Each row with a nonzero `x` coefficient bounds `x` by a line in `y`;
/// combining every lower line with every upper line eliminates `x` and leaves
/// a one-dimensional system in `y`.
pub fn extremize_y(rows: &[Halfplane2], x_box: Interval, y_box: Interval) -> Interval {
    if x_box.is_empty() || y_box.is_empty() {
        return Interval::EMPTY;
    }
    let mut y_lo = y_box.lo;
    let mut y_hi = y_box.hi;

    // x >= m*y + q (lower) and x <= m*y + q (upper), as (m, q) pairs.
    let mut lower: Vec<(f64, f64)> = Vec::new();
    let mut upper: Vec<(f64, f64)> = Vec::new();
    if x_box.lo.is_finite() {
        lower.push((0.0, x_box.lo));
    }
    if x_box.hi.is_finite() {
        upper.push((0.0, x_box.hi));
    }

    for row in rows {
        let eps = FEAS_EPS * row.scale();
        if row.a.abs() <= eps {
            if row.b.abs() <= eps {
                // Constant row.
                if row.c < -eps {
                    return Interval::EMPTY;
                }
            } else if row.b > 0.0 {
                y_hi = y_hi.min(row.c / row.b);
            } else {
                y_lo = y_lo.max(row.c / row.b);
            }
        } else {
            // a*x <= c - b*y  =>  x  <=/>=  (-b/a)*y + c/a
            let line = (-row.b / row.a, row.c / row.a);
            if row.a > 0.0 {
                upper.push(line);
            } else {
                lower.push(line);
            }
        }
    }

    for &(ml, ql) in &lower {
        for &(mu, qu) in &upper {
            // Need  ml*y + ql <= mu*y + qu  for some feasible x to exist.
            let slope = ml - mu;
            let rhs = qu - ql;
            let eps = FEAS_EPS
                * 1.0f64
                    .max(ml.abs())
                    .max(mu.abs())
                    .max(ql.abs())
                    .max(qu.abs());
            if slope.abs() <= eps {
                if rhs < -eps {
                    return Interval::EMPTY;
                }
            } else if slope > 0.0 {
                y_hi = y_hi.min(rhs / slope);
            } else {
                y_lo = y_lo.max(rhs / slope);
            }
        }
    }

    finish_interval(y_lo, y_hi)
}

/// Intersect rows `a·x ≤ c` with `bx`. Rows with `a = 0` are constant checks.
pub fn clamp_1d(rows: &[(f64, f64)], bx: Interval) -> Interval {
    if bx.is_empty() {
        return Interval::EMPTY;
    }
    let mut lo = bx.lo;
    let mut hi = bx.hi;
    for &(a, c) in rows {
        let eps = FEAS_EPS * 1.0f64.max(a.abs()).max(c.abs());
        if a.abs() <= eps {
            if c < -eps {
                return Interval::EMPTY;
            }
        } else if a > 0.0 {
            hi = hi.min(c / a);
        } else {
            lo = lo.max(c / a);
        }
    }
    finish_interval(lo, hi)
}

/// Collapse a roundoff-thin inversion to a point instead of reporting empty.
fn finish_interval(lo: f64, hi: f64) -> Interval {
    if lo <= hi {
        Interval::new(lo, hi)
    } else {
        let eps = FEAS_EPS * 1.0f64.max(lo.abs()).max(hi.abs());
        if lo - hi <= eps {
            Interval::point(0.5 * (lo + hi))
        } else {
            Interval::EMPTY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Vertex-enumeration reference: intersect every pair of constraint
    /// lines (including box edges), keep feasible points, take y extremes.
    /// Only valid when the boxes are finite.
    fn oracle_extremes(rows: &[Halfplane2], x_box: Interval, y_box: Interval) -> Interval {
        let mut lines: Vec<(f64, f64, f64)> = rows.iter().map(|h| (h.a, h.b, h.c)).collect();
        lines.push((1.0, 0.0, x_box.hi));
        lines.push((-1.0, 0.0, -x_box.lo));
        lines.push((0.0, 1.0, y_box.hi));
        lines.push((0.0, -1.0, -y_box.lo));

        let feasible = |x: f64, y: f64| -> bool {
            x_box.contains_approx(x, 1e-9)
                && y_box.contains_approx(y, 1e-9)
                && rows.iter().all(|h| h.satisfied(x, y, 1e-9))
        };

        let mut out = Interval::EMPTY;
        for i in 0..lines.len() {
            for j in (i + 1)..lines.len() {
                let (a1, b1, c1) = lines[i];
                let (a2, b2, c2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-14 {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / det;
                let y = (a1 * c2 - a2 * c1) / det;
                if feasible(x, y) {
                    out.lo = out.lo.min(y);
                    out.hi = out.hi.max(y);
                }
            }
        }
        out
    }

    #[test]
    fn projects_single_row() {
        // 2y - x <= 0.1 with x in [0, 0.05]: max y at x = 0.05.
        let rows = [Halfplane2::new(-1.0, 2.0, 0.1)];
        let out = extremize_y(
            &rows,
            Interval::new(0.0, 0.05),
            Interval::new(0.0, f64::INFINITY),
        );
        assert!((out.lo - 0.0).abs() < 1e-15);
        assert!((out.hi - 0.075).abs() < 1e-15);
    }

    #[test]
    fn box_only() {
        let out = extremize_y(&[], Interval::new(0.0, 1.0), Interval::new(0.0, 1.0));
        assert_eq!(out, Interval::new(0.0, 1.0));
    }

    #[test]
    fn contradictory_rows_are_empty() {
        let rows = [Halfplane2::new(0.0, 1.0, 1.0), Halfplane2::new(0.0, -1.0, -2.0)];
        let out = extremize_y(&rows, Interval::UNBOUNDED, Interval::UNBOUNDED);
        assert!(out.is_empty());
    }

    #[test]
    fn unbounded_direction_is_reported() {
        // Only a lower bound on y.
        let rows = [Halfplane2::new(0.0, -1.0, -1.0)];
        let out = extremize_y(&rows, Interval::new(0.0, 1.0), Interval::UNBOUNDED);
        assert_eq!(out.lo, 1.0);
        assert_eq!(out.hi, f64::INFINITY);
    }

    #[test]
    fn clamp_1d_examples() {
        let out = clamp_1d(
            &[(1.0, 0.1), (-1.0, -0.05)],
            Interval::new(0.0, f64::INFINITY),
        );
        assert!((out.lo - 0.05).abs() < 1e-15);
        assert!((out.hi - 0.1).abs() < 1e-15);

        assert!(clamp_1d(&[(0.0, -1.0)], Interval::UNBOUNDED).is_empty());
    }

    #[test]
    fn degenerate_constant_row() {
        let rows = [Halfplane2::new(0.0, 0.0, -1.0)];
        assert!(extremize_y(&rows, Interval::UNBOUNDED, Interval::UNBOUNDED).is_empty());
        let rows = [Halfplane2::new(0.0, 0.0, 1.0)];
        assert!(!extremize_y(&rows, Interval::new(0.0, 1.0), Interval::new(0.0, 1.0)).is_empty());
    }

    #[test]
    fn matches_vertex_enumeration_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(0x1f2d);
        for _ in 0..1000 {
            let n_rows = rng.gen_range(0..=20);
            let rows: Vec<Halfplane2> = (0..n_rows)
                .map(|_| {
                    Halfplane2::new(
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                    )
                })
                .collect();
            let x_box = Interval::new(rng.gen_range(-3.0..0.0), rng.gen_range(0.0..3.0));
            let y_box = Interval::new(rng.gen_range(-3.0..0.0), rng.gen_range(0.0..3.0));

            let got = extremize_y(&rows, x_box, y_box);
            let want = oracle_extremes(&rows, x_box, y_box);

            if want.is_empty() {
                // The reference uses a loose feasibility slack; accept thin
                // slivers it may have missed, but verify they are real.
                if !got.is_empty() {
                    let y = 0.5 * (got.lo + got.hi);
                    let x_at_y = |h: &Halfplane2| (h.c - h.b * y) / h.a;
                    let mut xl = x_box.lo;
                    let mut xh = x_box.hi;
                    for h in &rows {
                        if h.a > 1e-12 {
                            xh = xh.min(x_at_y(h));
                        } else if h.a < -1e-12 {
                            xl = xl.max(x_at_y(h));
                        }
                    }
                    assert!(
                        xl <= xh + 1e-7,
                        "solver returned nonempty but no feasible x at y={y}"
                    );
                }
            } else {
                assert!(!got.is_empty(), "solver empty, oracle found {want:?}");
                assert!((got.lo - want.lo).abs() <= 1e-10, "{got:?} vs {want:?}");
                assert!((got.hi - want.hi).abs() <= 1e-10, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn swapping_roles_extremizes_x() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..200 {
            let rows: Vec<Halfplane2> = (0..rng.gen_range(1..=8))
                .map(|_| {
                    Halfplane2::new(
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                    )
                })
                .collect();
            let x_box = Interval::new(-2.0, 2.0);
            let y_box = Interval::new(-2.0, 2.0);
            let swapped: Vec<Halfplane2> =
                rows.iter().map(|h| Halfplane2::new(h.b, h.a, h.c)).collect();

            // y-extremes of the transposed system == x-extremes of the original,
            // measured against the vertex oracle with coordinates flipped.
            let got = extremize_y(&swapped, y_box, x_box);
            let want = oracle_extremes(&swapped, y_box, x_box);
            if !want.is_empty() && !got.is_empty() {
                assert!((got.lo - want.lo).abs() <= 1e-10);
                assert!((got.hi - want.hi).abs() <= 1e-10);
            } else {
                assert_eq!(want.is_empty(), got.is_empty());
            }
        }
    }

    #[test]
    fn adding_a_halfplane_never_widens() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..500 {
            let mut rows: Vec<Halfplane2> = (0..rng.gen_range(0..=10))
                .map(|_| {
                    Halfplane2::new(
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                    )
                })
                .collect();
            let x_box = Interval::new(-3.0, 3.0);
            let y_box = Interval::new(-3.0, 3.0);
            let before = extremize_y(&rows, x_box, y_box);
            rows.push(Halfplane2::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ));
            let after = extremize_y(&rows, x_box, y_box);
            if before.is_empty() {
                assert!(after.is_empty());
            } else if !after.is_empty() {
                assert!(after.lo >= before.lo - 1e-9);
                assert!(after.hi <= before.hi + 1e-9);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn every_returned_y_admits_a_feasible_x(
            rows in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64), 0..8),
            frac in 0.0..1.0f64,
        ) {
            let rows: Vec<Halfplane2> = rows.iter().map(|&(a, b, c)| Halfplane2::new(a, b, c)).collect();
            let x_box = Interval::new(-4.0, 4.0);
            let y_box = Interval::new(-4.0, 4.0);
            let out = extremize_y(&rows, x_box, y_box);
            if !out.is_empty() {
                let y = out.lo + frac * (out.hi - out.lo);
                let one_d: Vec<(f64, f64)> = rows.iter().map(|h| (h.a, h.c - h.b * y)).collect();
                let feas = clamp_1d(&one_d, x_box);
                proptest::prop_assert!(
                    !feas.is_empty() || out.width() < 1e-9,
                    "y = {y} in {out:?} admits no x"
                );
            }
        }

        #[test]
        fn clamp_stays_inside_box(
            rows in proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 0..8),
            lo in -3.0..0.0f64,
            width in 0.0..4.0f64,
        ) {
            let bx = Interval::new(lo, lo + width);
            let out = clamp_1d(&rows, bx);
            if !out.is_empty() {
                proptest::prop_assert!(out.lo >= bx.lo - 1e-12 && out.hi <= bx.hi + 1e-12);
            }
        }
    }
}
