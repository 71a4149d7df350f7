//! Slice representation of planar regions.
//!
//! A band is `{(t, x) : t ∈ (t₀, t₁), max_i L_i(t) < x < min_j R_j(t)}` with
//! affine edges. Double cones, rectangles, light-cone pasts and wedges are
//! all bands, and intersections of bands are bands. Inclusion and
//! disjointness reduce to finitely many slice checks because the ordering of
//! the edges only changes where two edge lines cross.

use serde::Serialize;

use super::{Interval, Point};

/// The line `x = slope · t + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Line {
    pub slope: f64,
    pub offset: f64,
}

impl Line {
    pub fn at(&self, t: f64) -> f64 {
        self.slope * t + self.offset
    }

    fn crossing(&self, other: &Line) -> Option<f64> {
        let ds = self.slope - other.slope;
        if ds == 0.0 {
            None
        } else {
            Some((other.offset - self.offset) / ds)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band {
    pub t: Interval,
    /// Left edges; the slice starts at their maximum. Empty means unbounded.
    pub lower: Vec<Line>,
    /// Right edges; the slice ends at their minimum. Empty means unbounded.
    pub upper: Vec<Line>,
}

impl Band {
    pub fn rect(t: Interval, x: Interval) -> Band {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        if x.lo.is_finite() {
            lower.push(Line { slope: 0.0, offset: x.lo });
        }
        if x.hi.is_finite() {
            upper.push(Line { slope: 0.0, offset: x.hi });
        }
        Band { t, lower, upper }
    }

    /// `{u ∈ (u₀, u₁), v ∈ (v₀, v₁)}` with `x = t − u = v − t`.
    pub fn null_box(u: Interval, v: Interval) -> Band {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        // u < u₁  ⇔  x > t − u₁;   u > u₀  ⇔  x < t − u₀
        if u.hi.is_finite() {
            lower.push(Line { slope: 1.0, offset: -u.hi });
        }
        if u.lo.is_finite() {
            upper.push(Line { slope: 1.0, offset: -u.lo });
        }
        // v > v₀  ⇔  x > v₀ − t;   v < v₁  ⇔  x < v₁ − t
        if v.lo.is_finite() {
            lower.push(Line { slope: -1.0, offset: v.lo });
        }
        if v.hi.is_finite() {
            upper.push(Line { slope: -1.0, offset: v.hi });
        }
        let t = Interval::new(0.5 * (u.lo + v.lo), 0.5 * (u.hi + v.hi));
        // −∞ + ∞ is NaN; such a box is unbounded in time on that side.
        let t = Interval::new(
            if t.lo.is_nan() { f64::NEG_INFINITY } else { t.lo },
            if t.hi.is_nan() { f64::INFINITY } else { t.hi },
        );
        Band { t, lower, upper }
    }

    pub fn intersect(&self, other: &Band) -> Band {
        Band {
            t: self.t.intersect(&other.t),
            lower: self.lower.iter().chain(&other.lower).copied().collect(),
            upper: self.upper.iter().chain(&other.upper).copied().collect(),
        }
    }

    /// Open slice interval at time `t`, ignoring the time range.
    pub fn slice_unchecked(&self, t: f64) -> Interval {
        let lo = self.lower.iter().map(|l| l.at(t)).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.upper.iter().map(|l| l.at(t)).fold(f64::INFINITY, f64::min);
        Interval::new(lo, hi)
    }

    /// Slice at time `t`, empty outside the time range.
    pub fn slice(&self, t: f64) -> Interval {
        if self.t.contains(t) {
            self.slice_unchecked(t)
        } else {
            Interval::EMPTY
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.slice(p.t).contains(p.x)
    }

    fn lines(&self) -> impl Iterator<Item = &Line> {
        self.lower.iter().chain(&self.upper)
    }

    /// Width of the slice; concave in `t`, `+∞` if either side is open.
    fn gap(&self, t: f64) -> f64 {
        let s = self.slice_unchecked(t);
        s.hi - s.lo
    }

    pub fn is_empty(&self) -> bool {
        if self.t.is_empty() {
            return true;
        }
        if self.lower.is_empty() || self.upper.is_empty() {
            return false;
        }
        let mut ts = breakpoints(std::slice::from_ref(self), self.t);
        let finite_ends: Vec<f64> = [self.t.lo, self.t.hi].into_iter().filter(|t| t.is_finite()).collect();
        ts.extend(finite_ends);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        if ts.is_empty() {
            ts.push(0.0);
        }
        if ts.iter().any(|&t| self.gap(t) > 0.0) {
            return false;
        }
        // Outside the breakpoints the gap is affine; it grows without bound
        // towards an open end iff it increases there.
        let first = ts[0];
        let last = *ts.last().unwrap();
        let grows_down = self.t.lo == f64::NEG_INFINITY && self.gap(first - 1.0) > self.gap(first);
        let grows_up = self.t.hi == f64::INFINITY && self.gap(last + 1.0) > self.gap(last);
        !(grows_down || grows_up)
    }

    pub fn is_disjoint_from(&self, other: &Band) -> bool {
        self.intersect(other).is_empty()
    }

    /// Exact inclusion in a finite union of bands.
    pub fn is_covered_by(&self, cover: &[Band]) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut all: Vec<Band> = cover.to_vec();
        all.push(self.clone());
        let mut ts = breakpoints(&all, self.t);
        for b in &all {
            for e in [b.t.lo, b.t.hi] {
                if self.t.contains(e) {
                    ts.push(e);
                }
            }
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut probes: Vec<f64> = Vec::new();
        if ts.is_empty() {
            probes.push(self.t.interior_point());
        } else {
            probes.push(if self.t.lo.is_finite() { 0.5 * (self.t.lo + ts[0]) } else { ts[0] - 1.0 });
            for w in ts.windows(2) {
                probes.push(0.5 * (w[0] + w[1]));
            }
            let last = *ts.last().unwrap();
            probes.push(if self.t.hi.is_finite() { 0.5 * (last + self.t.hi) } else { last + 1.0 });
            probes.extend(&ts);
        }
        probes.into_iter().filter(|t| self.t.contains(*t)).all(|t| {
            let target = self.slice_unchecked(t);
            let pieces: Vec<Interval> = cover.iter().map(|b| b.slice(t)).collect();
            target.is_empty() || target.is_covered_by(&pieces)
        })
    }
}

/// Crossing times of every pair of edge lines, restricted to `range`.
fn breakpoints(bands: &[Band], range: Interval) -> Vec<f64> {
    let lines: Vec<&Line> = bands.iter().flat_map(|b| b.lines()).collect();
    let mut out = Vec::new();
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if let Some(t) = a.crossing(b) {
                if range.contains(t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

pub fn union_is_covered_by(bands: &[Band], cover: &[Band]) -> bool {
    bands.iter().all(|b| b.is_covered_by(cover))
}
