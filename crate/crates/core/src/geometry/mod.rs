//! Exact causal-region calculus on 1+1 Minkowski space.
//!
//! Points carry null coordinates `u = t − x`, `v = t + x`, in which the
//! causal order splits into two total orders: `q ≤ p` iff `u_q ≤ u_p` and
//! `v_q ≤ v_p`. Double cones are open `(u, v)` boxes, causal completion is
//! the null bounding box, and the complement of a box is a pair of wedges.
//! All regions are open. Infinite interval bounds are allowed for pasts and
//! wedges.

mod band;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tol::Tolerances;

pub use band::{Band, Line};

/// Open interval `(lo, hi)`; empty when `lo ≥ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ALL: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Open intervals share a point.
    pub fn overlaps(&self, other: &Interval) -> bool {
        !self.intersect(other).is_empty()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    /// Some point of a nonempty interval.
    pub fn interior_point(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }

    /// Inclusion in a finite union of open intervals.
    pub fn is_covered_by(&self, pieces: &[Interval]) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut pieces: Vec<Interval> = pieces.iter().copied().filter(|p| !p.is_empty()).collect();
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        // The left end itself is excluded, every later point is not.
        let mut reach = self.lo;
        let mut first = true;
        loop {
            if reach >= self.hi {
                return true;
            }
            let next = pieces
                .iter()
                .filter(|p| if first { p.lo <= reach } else { p.lo < reach })
                .map(|p| p.hi)
                .fold(f64::NEG_INFINITY, f64::max);
            if next <= reach {
                return false;
            }
            reach = next;
            first = false;
        }
    }
}

fn encode_bound(x: f64) -> Bound {
    if x.is_finite() {
        Bound::Number(x)
    } else if x > 0.0 {
        Bound::Text("inf".into())
    } else if x < 0.0 {
        Bound::Text("-inf".into())
    } else {
        Bound::Text("nan".into())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Bound {
    Number(f64),
    Text(String),
}

impl Bound {
    fn decode(self) -> std::result::Result<f64, String> {
        match self {
            Bound::Number(x) => Ok(x),
            Bound::Text(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(format!("invalid interval bound `{other}`")),
            },
        }
    }
}

/// Serialized as `[lo, hi]`; infinite bounds as the strings `"-inf"`/`"inf"`.
impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (encode_bound(self.lo), encode_bound(self.hi)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (lo, hi) = <(Bound, Bound)>::deserialize(d)?;
        let lo = lo.decode().map_err(serde::de::Error::custom)?;
        let hi = hi.decode().map_err(serde::de::Error::custom)?;
        Ok(Interval { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    pub x: f64,
}

impl Point {
    pub fn new(t: f64, x: f64) -> Point {
        Point { t, x }
    }

    pub fn from_null(u: f64, v: f64) -> Point {
        Point { t: 0.5 * (u + v), x: 0.5 * (v - u) }
    }

    pub fn u(&self) -> f64 {
        self.t - self.x
    }

    pub fn v(&self) -> f64 {
        self.t + self.x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalRelation {
    Timelike,
    Null,
    Spacelike,
}

/// Classifies the separation of two points by the sign of `Δu · Δv`.
pub fn causal_relation(p: Point, q: Point, geo_tol: f64) -> CausalRelation {
    let s = (p.u() - q.u()) * (p.v() - q.v());
    if s.abs() <= geo_tol {
        CausalRelation::Null
    } else if s > 0.0 {
        CausalRelation::Timelike
    } else {
        CausalRelation::Spacelike
    }
}

/// Rounding error of `a + b` by TwoSum: the exact sum is `s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, 0.0);
    }
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `a + b` rounded towards `+∞`.
fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e > 0.0 { s.next_up() } else { s }
}

/// `a + b` rounded towards `−∞`.
fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if e < 0.0 { s.next_down() } else { s }
}

/// An open region of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Region {
    /// `{u ∈ u, v ∈ v}`; bounded boxes are double cones, boxes with infinite
    /// bounds are pasts, futures or wedges.
    DoubleCone { u: Interval, v: Interval },
    /// `{t ∈ t, x ∈ x}`.
    Rect { t: Interval, x: Interval },
    Union { members: Vec<Region> },
}

impl Region {
    pub fn double_cone(u: (f64, f64), v: (f64, f64)) -> Result<Region> {
        let r = Region::DoubleCone { u: Interval::new(u.0, u.1), v: Interval::new(v.0, v.1) };
        r.validate()?;
        Ok(r)
    }

    /// Double cone of null radius `radius` around `(t, x)`.
    pub fn cone_at(t: f64, x: f64, radius: f64) -> Result<Region> {
        let (u, v) = (t - x, t + x);
        Region::double_cone((u - radius, u + radius), (v - radius, v + radius))
    }

    pub fn rect(t: (f64, f64), x: (f64, f64)) -> Result<Region> {
        let r = Region::Rect { t: Interval::new(t.0, t.1), x: Interval::new(x.0, x.1) };
        r.validate()?;
        Ok(r)
    }

    pub fn union(members: Vec<Region>) -> Result<Region> {
        let r = Region::Union { members };
        r.validate()?;
        Ok(r)
    }

    /// Checks that every interval is nonempty and every union has members.
    pub fn validate(&self) -> Result<()> {
        let check = |i: &Interval, name: &str| {
            if i.lo.is_nan() || i.hi.is_nan() || i.is_empty() {
                Err(Error::Precondition(format!("empty or malformed {name}-interval ({}, {})", i.lo, i.hi)))
            } else {
                Ok(())
            }
        };
        match self {
            Region::DoubleCone { u, v } => {
                check(u, "u")?;
                check(v, "v")
            }
            Region::Rect { t, x } => {
                check(t, "t")?;
                check(x, "x")
            }
            Region::Union { members } => {
                if members.is_empty() {
                    return Err(Error::EmptyRegion);
                }
                members.iter().try_for_each(Region::validate)
            }
        }
    }

    /// Connected pieces: the non-union members, flattened.
    pub fn members(&self) -> Vec<&Region> {
        match self {
            Region::Union { members } => members.iter().flat_map(|m| m.members()).collect(),
            other => vec![other],
        }
    }

    /// Null bounding box `(u-hull, v-hull)`.
    pub fn null_hull(&self) -> (Interval, Interval) {
        match self {
            Region::DoubleCone { u, v } => (*u, *v),
            // Rounded outward so the box always contains the rectangle.
            Region::Rect { t, x } => (
                Interval::new(add_down(t.lo, -x.hi), add_up(t.hi, -x.lo)),
                Interval::new(add_down(t.lo, x.lo), add_up(t.hi, x.hi)),
            ),
            Region::Union { members } => {
                let empty = (
                    Interval::new(f64::INFINITY, f64::NEG_INFINITY),
                    Interval::new(f64::INFINITY, f64::NEG_INFINITY),
                );
                members.iter().map(Region::null_hull).fold(empty, |(u, v), (mu, mv)| (u.hull(&mu), v.hull(&mv)))
            }
        }
    }

    /// `(t, x)` bounding box.
    pub fn tx_hull(&self) -> (Interval, Interval) {
        match self {
            Region::Rect { t, x } => (*t, *x),
            Region::DoubleCone { u, v } => (
                Interval::new(0.5 * (u.lo + v.lo), 0.5 * (u.hi + v.hi)),
                Interval::new(0.5 * (v.lo - u.hi), 0.5 * (v.hi - u.lo)),
            ),
            Region::Union { members } => {
                let empty = (
                    Interval::new(f64::INFINITY, f64::NEG_INFINITY),
                    Interval::new(f64::INFINITY, f64::NEG_INFINITY),
                );
                members.iter().map(Region::tx_hull).fold(empty, |(t, x), (mt, mx)| (t.hull(&mt), x.hull(&mx)))
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        let (u, v) = self.null_hull();
        u.is_bounded() && v.is_bounded()
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::DoubleCone { u, v } => u.contains(p.u()) && v.contains(p.v()),
            Region::Rect { t, x } => t.contains(p.t) && x.contains(p.x),
            Region::Union { members } => members.iter().any(|m| m.contains(p)),
        }
    }

    pub fn bands(&self) -> Vec<Band> {
        match self {
            Region::DoubleCone { u, v } => vec![Band::null_box(*u, *v)],
            Region::Rect { t, x } => vec![Band::rect(*t, *x)],
            Region::Union { members } => members.iter().flat_map(Region::bands).collect(),
        }
    }

    /// Exact inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Region) -> bool {
        band::union_is_covered_by(&self.bands(), &other.bands())
    }

    /// Exact disjointness of the open sets.
    pub fn is_disjoint_from(&self, other: &Region) -> bool {
        let theirs = other.bands();
        self.bands().iter().all(|a| theirs.iter().all(|b| a.is_disjoint_from(b)))
    }

    /// Groups of members whose union is connected.
    pub fn components(&self) -> Vec<Vec<&Region>> {
        let members = self.members();
        let n = members.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while parent[r] != r {
                r = parent[r];
            }
            parent[i] = r;
            r
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !members[i].is_disjoint_from(members[j]) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut groups: Vec<(usize, Vec<&Region>)> = Vec::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, g)) => g.push(members[i]),
                None => groups.push((root, vec![members[i]])),
            }
        }
        groups.into_iter().map(|(_, g)| g).collect()
    }
}

fn hull_of(members: &[&Region]) -> (Interval, Interval) {
    let owned = Region::Union { members: members.iter().map(|m| (*m).clone()).collect() };
    owned.null_hull()
}

fn require_nonempty(r: &Region) -> Result<()> {
    r.validate().map_err(|_| Error::EmptyRegion)
}

/// Causal past `J⁻(V)`: `{u < sup u, v < sup v}` per connected component.
pub fn blc(v: &Region) -> Result<Region> {
    require_nonempty(v)?;
    let pasts: Vec<Region> = v
        .components()
        .iter()
        .map(|c| {
            let (u, w) = hull_of(c);
            Region::DoubleCone {
                u: Interval::new(f64::NEG_INFINITY, u.hi),
                v: Interval::new(f64::NEG_INFINITY, w.hi),
            }
        })
        .collect();
    Ok(if pasts.len() == 1 { pasts.into_iter().next().unwrap() } else { Region::Union { members: pasts } })
}

/// Past of a single point, the degenerate limit of shrinking double cones.
pub fn blc_of_point(p: Point) -> Region {
    Region::DoubleCone {
        u: Interval::new(f64::NEG_INFINITY, p.u()),
        v: Interval::new(f64::NEG_INFINITY, p.v()),
    }
}

/// Spacelike complement of one null box: the two wedges beside it.
fn box_complement(u: Interval, v: Interval) -> Vec<(Interval, Interval)> {
    [
        (Interval::new(u.hi, f64::INFINITY), Interval::new(f64::NEG_INFINITY, v.lo)),
        (Interval::new(f64::NEG_INFINITY, u.lo), Interval::new(v.hi, f64::INFINITY)),
    ]
    .into_iter()
    .filter(|(a, b)| !a.is_empty() && !b.is_empty())
    .collect()
}

/// `V′`: points spacelike to every point of `V`.
pub fn causal_complement(v: &Region) -> Result<Region> {
    require_nonempty(v)?;
    let mut acc: Vec<(Interval, Interval)> = vec![(Interval::ALL, Interval::ALL)];
    for m in v.members() {
        let (u, w) = m.null_hull();
        let parts = box_complement(u, w);
        let mut next = Vec::new();
        for (au, av) in &acc {
            for (pu, pv) in &parts {
                let (iu, iv) = (au.intersect(pu), av.intersect(pv));
                if !iu.is_empty() && !iv.is_empty() {
                    next.push((iu, iv));
                }
            }
        }
        acc = next;
    }
    let mut members: Vec<Region> = acc.into_iter().map(|(u, v)| Region::DoubleCone { u, v }).collect();
    match members.len() {
        0 => Err(Error::EmptyRegion),
        1 => Ok(members.pop().unwrap()),
        _ => Ok(Region::Union { members }),
    }
}

/// `V″`, the null bounding box of a connected region.
///
/// For disconnected input the error carries the completion of every
/// component.
pub fn causal_completion(v: &Region) -> Result<Region> {
    require_nonempty(v)?;
    let comps = v.components();
    let completions: Vec<Region> = comps
        .iter()
        .map(|c| {
            let (u, w) = hull_of(c);
            Region::DoubleCone { u, v: w }
        })
        .collect();
    if completions.len() == 1 {
        Ok(completions.into_iter().next().unwrap())
    } else {
        Err(Error::Disconnected(completions))
    }
}

fn hulls_spacelike(a: (Interval, Interval), b: (Interval, Interval)) -> bool {
    let ((u1, v1), (u2, v2)) = (a, b);
    (u1.hi <= u2.lo && v2.hi <= v1.lo) || (u2.hi <= u1.lo && v1.hi <= v2.lo)
}

pub fn spacelike_separated(a: &Region, b: &Region) -> bool {
    a.members().iter().all(|x| b.members().iter().all(|y| hulls_spacelike(x.null_hull(), y.null_hull())))
}

/// `V1 ⊆ V2″`, with `V2″` taken componentwise for disconnected `V2`.
pub fn causal_shadow_check(v1: &Region, v2: &Region) -> bool {
    let completions: Vec<Region> = v2
        .components()
        .iter()
        .map(|c| {
            let (u, w) = hull_of(c);
            Region::DoubleCone { u, v: w }
        })
        .collect();
    v1.is_subset_of(&Region::Union { members: completions })
}

/// Outcome of the postcondition checks of [`weak_cc_region`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeakCcChecks {
    /// `V ⊆ BLC(V1) ∪ BLC(V2)`.
    pub inside_pasts: bool,
    /// `V1 ∪ V2 ⊆ V″`.
    pub completion_contains_sources: bool,
    /// `V ∩ (V1 ∪ V2) = ∅`.
    pub disjoint_from_sources: bool,
}

impl WeakCcChecks {
    pub fn all(&self) -> bool {
        self.inside_pasts && self.completion_contains_sources && self.disjoint_from_sources
    }
}

/// A slab in the common past of two spacelike regions whose causal
/// completion contains both.
#[derive(Debug, Clone, Serialize)]
pub struct WeakCcRegion {
    pub region: Region,
    pub completion: Region,
    /// The slab occupies `t ∈ (−depth − margin, −depth)`.
    pub depth: f64,
    pub margin: f64,
    pub checks: WeakCcChecks,
}

struct PastPair {
    u_sup: [f64; 2],
    v_sup: [f64; 2],
    /// The two past slices overlap for every `t` below this time.
    overlap_time: f64,
    min_time: f64,
}

fn past_pair(v1: &Region, v2: &Region) -> Result<PastPair> {
    require_nonempty(v1)?;
    require_nonempty(v2)?;
    for v in [v1, v2] {
        if !v.is_bounded() {
            return Err(Error::Precondition("unbounded regions are not supported".into()));
        }
        if v.components().len() != 1 {
            return Err(Error::Precondition("weak common-cause regions need connected inputs".into()));
        }
    }
    if !spacelike_separated(v1, v2) {
        return Err(Error::NotSpacelike);
    }
    let (h1, h2) = (v1.null_hull(), v2.null_hull());
    let (u, w) = ([h1.0.hi, h2.0.hi], [h1.1.hi, h2.1.hi]);
    // Slice of {u < U, v < W} at time t is (t − U, W − t); two slices
    // overlap while each left end lies below the other right end.
    let overlap_time = [0.5 * (u[0] + w[0]), 0.5 * (u[1] + w[1]), 0.5 * (u[0] + w[1]), 0.5 * (u[1] + w[0])]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let min_time = 0.5 * (h1.0.lo + h1.1.lo).min(h2.0.lo + h2.1.lo);
    Ok(PastPair { u_sup: u, v_sup: w, overlap_time, min_time })
}

/// Depth used by [`weak_cc_region`]: one unit below the point where the two
/// past slices start to overlap and below both regions.
pub fn default_weak_cc_depth(v1: &Region, v2: &Region) -> Result<f64> {
    let pp = past_pair(v1, v2)?;
    Ok((-pp.overlap_time).max(-pp.min_time) + 1.0)
}

/// `(overlap_time, min_time)`: the past slices of the two regions overlap
/// strictly below the first, and both regions lie above the second.
pub fn past_times(v1: &Region, v2: &Region) -> Result<(f64, f64)> {
    let pp = past_pair(v1, v2)?;
    Ok((pp.overlap_time, pp.min_time))
}

pub fn weak_cc_region(v1: &Region, v2: &Region, margin: f64) -> Result<WeakCcRegion> {
    let depth = default_weak_cc_depth(v1, v2)?;
    weak_cc_region_at(v1, v2, depth, margin)
}

/// Slab `t ∈ (−depth − margin, −depth)` spanning the union of the two past
/// slices at its top edge.
///
/// The slab is not shrunk: its top corners sit on the past boundaries,
/// which is exactly what puts the tops of `V1` and `V2` on the boundary of
/// `V″` rather than outside it. The corner `x = top − sup u` does not round
/// trip through `top − x` in floating point, so `V1 ∪ V2 ⊆ V″` is checked
/// with the default `geo_tol` of slack on the null bounds of `V″`.
pub fn weak_cc_region_at(v1: &Region, v2: &Region, depth: f64, margin: f64) -> Result<WeakCcRegion> {
    if !(margin > 0.0) || !depth.is_finite() {
        return Err(Error::Precondition(format!("need margin > 0 and finite depth, got {margin}, {depth}")));
    }
    let pp = past_pair(v1, v2)?;
    let top = -depth;
    if !(top < pp.overlap_time) {
        return Err(Error::Precondition(format!(
            "depth {depth}: the past slices only overlap below t = {}",
            pp.overlap_time
        )));
    }
    if top > pp.min_time {
        return Err(Error::Precondition(format!("depth {depth}: slab would reach into the regions")));
    }
    let x_lo = top - pp.u_sup[0].max(pp.u_sup[1]);
    let x_hi = pp.v_sup[0].max(pp.v_sup[1]) - top;
    let region = Region::rect((top - margin, top), (x_lo, x_hi))?;
    let completion = causal_completion(&region)?;
    let pasts = Region::Union { members: vec![blc(v1)?, blc(v2)?] };
    let checks = WeakCcChecks {
        inside_pasts: region.is_subset_of(&pasts),
        completion_contains_sources: {
            let slack = Tolerances::default().geo_tol;
            let (cu, cv) = completion.null_hull();
            let widened = Region::DoubleCone {
                u: Interval::new(cu.lo - slack, cu.hi + slack),
                v: Interval::new(cv.lo - slack, cv.hi + slack),
            };
            v1.is_subset_of(&widened) && v2.is_subset_of(&widened)
        },
        disjoint_from_sources: region.is_disjoint_from(v1) && region.is_disjoint_from(v2),
    };
    if !checks.all() {
        return Err(Error::Inconsistent(format!("weak common-cause region failed its checks: {checks:?}")));
    }
    Ok(WeakCcRegion { region, completion, depth, margin, checks })
}

/// Parts of `V` in the past of exactly one of `V1`, `V2`, and the common part.
#[derive(Debug, Clone, Serialize)]
pub struct TildeRegions {
    /// `(BLC(V1) ∩ V) ∖ BLC(V2)`, up to boundary.
    pub tilde1: Vec<Band>,
    pub tilde2: Vec<Band>,
    /// `V ∩ BLC(V1) ∩ BLC(V2)`.
    pub common: Vec<Band>,
}

impl TildeRegions {
    fn pieces(bands: &[Band], p: Point) -> bool {
        bands.iter().any(|b| b.contains(p))
    }

    pub fn in_tilde1(&self, p: Point) -> bool {
        Self::pieces(&self.tilde1, p)
    }

    pub fn in_tilde2(&self, p: Point) -> bool {
        Self::pieces(&self.tilde2, p)
    }

    pub fn in_common(&self, p: Point) -> bool {
        Self::pieces(&self.common, p)
    }

    /// Open slice intervals of each part at time `t`.
    pub fn slices(&self, t: f64) -> [Vec<Interval>; 3] {
        let at = |bands: &[Band]| bands.iter().map(|b| b.slice(t)).filter(|i| !i.is_empty()).collect();
        [at(&self.tilde1), at(&self.tilde2), at(&self.common)]
    }
}

/// `{u > U} ∪ {v > W}`, the open part of the complement of `{u < U, v < W}`.
fn outside_past(u_sup: f64, v_sup: f64) -> [Band; 2] {
    [
        Band::null_box(Interval::new(u_sup, f64::INFINITY), Interval::ALL),
        Band::null_box(Interval::ALL, Interval::new(v_sup, f64::INFINITY)),
    ]
}

pub fn tilde_regions(v1: &Region, v2: &Region, v: &Region) -> Result<TildeRegions> {
    require_nonempty(v)?;
    let pasts: Vec<(f64, f64)> = [v1, v2]
        .iter()
        .map(|r| -> Result<(f64, f64)> {
            require_nonempty(r)?;
            if r.components().len() != 1 {
                return Err(Error::Precondition("tilde regions need connected inputs".into()));
            }
            let (u, w) = r.null_hull();
            Ok((u.hi, w.hi))
        })
        .collect::<Result<_>>()?;
    let past = |i: usize| Band::null_box(Interval::new(f64::NEG_INFINITY, pasts[i].0), Interval::new(f64::NEG_INFINITY, pasts[i].1));
    let keep = |bands: Vec<Band>| -> Vec<Band> { bands.into_iter().filter(|b| !b.is_empty()).collect() };
    let mut tilde = [Vec::new(), Vec::new()];
    let mut common = Vec::new();
    for part in v.bands() {
        for i in 0..2 {
            let j = 1 - i;
            let own = part.intersect(&past(i));
            for out in outside_past(pasts[j].0, pasts[j].1) {
                tilde[i].push(own.intersect(&out));
            }
        }
        common.push(part.intersect(&past(0)).intersect(&past(1)));
    }
    let [t1, t2] = tilde;
    Ok(TildeRegions { tilde1: keep(t1), tilde2: keep(t2), common: keep(common) })
}
