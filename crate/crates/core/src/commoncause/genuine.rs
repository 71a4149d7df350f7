//! Best-effort search for genuinely probabilistic common causes.
//!
//! Every projection commuting with `A` and `B` splits as `C = Σ C_i` with
//! `C_i ≤ Q_i` for the four cells `Q = AB, AB⊥, A⊥B, A⊥B⊥`. The defining
//! conditions only see the cell weights `x_i = φ(C_i)`:
//!
//! ```text
//! x1 x4 = x2 x3,    (q1 − x1)(q4 − x4) = (q2 − x2)(q3 − x3)
//! ```
//!
//! with `q_i = φ(Q_i)`. The search samples `(x2, x3)`, solves the two
//! equations for `(x1, x4)`, nudges the sample until both are achievable as
//! subprojection weights inside their cells, and then realises each `C_i`
//! by the rotation construction. A miss is not evidence of nonexistence.

use rand::Rng;

use super::quantum::quantum_verify_cc;
use super::synth::{self, Compression};
use super::CommonCauseCertificate;
use crate::error::{Error, Result};
use crate::linalg;
use crate::qprob::{commuting_meet, weight, DensityState, Projection};
use crate::tol::Tolerances;

/// Pattern-search steps per restart.
const REFINE_STEPS: usize = 400;

/// The weights achievable by subprojections of one cell: a union of closed
/// rank intervals, `{0}` and `{q}` included.
struct Cell {
    comp: Compression,
    intervals: Vec<(f64, f64)>,
    q: f64,
}

impl Cell {
    fn new(phi: &DensityState, q: &Projection) -> Cell {
        let comp = Compression::new(phi.matrix(), q);
        let intervals = (0..=comp.size())
            .map(|k| if k == 0 { (0.0, 0.0) } else { comp.interval(k) })
            .collect();
        Cell { comp, intervals, q: weight(phi, q) }
    }

    fn project(&self, x: f64) -> f64 {
        let mut best = 0.0;
        let mut dist = f64::INFINITY;
        for &(lo, hi) in &self.intervals {
            let y = x.clamp(lo, hi);
            if (y - x).abs() < dist {
                dist = (y - x).abs();
                best = y;
            }
        }
        best
    }

    fn distance(&self, x: f64) -> f64 {
        (self.project(x) - x).abs()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (lo, hi) = self.intervals[rng.random_range(0..self.intervals.len())];
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    }

    fn realize(&self, x: f64, slack: f64) -> Projection {
        let k = (0..self.intervals.len())
            .find(|&k| {
                let (lo, hi) = self.intervals[k];
                x >= lo - slack && x <= hi + slack
            })
            .unwrap_or(0);
        let (lo, hi) = self.intervals[k];
        self.comp.walk(x.clamp(lo, hi), k, 0.0, synth::last_movable)
    }
}

/// Solutions `(x1, x4)` in the cell boxes for given `(x2, x3)`.
fn solve(q: [f64; 4], x2: f64, x3: f64) -> Vec<(f64, f64)> {
    let k = (q[1] - x2) * (q[2] - x3);
    let p = x2 * x3;
    // −q4 x1² + (q1 q4 + p − K) x1 − q1 p = 0
    let (qa, qb, qc) = (-q[3], q[0] * q[3] + p - k, -q[0] * p);
    let mut roots = Vec::new();
    if qa.abs() < 1e-300 {
        if qb.abs() > 1e-300 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let s = disc.sqrt();
            // Cancellation-free pair of roots.
            let t = -0.5 * (qb + qb.signum() * s);
            if t != 0.0 {
                roots.push(t / qa);
                roots.push(qc / t);
            } else {
                roots.push(0.0);
            }
        }
    }
    roots
        .into_iter()
        .filter(|x1| *x1 > 0.0 && *x1 <= q[0])
        .map(|x1| (x1, p / x1))
        .filter(|(_, x4)| *x4 >= 0.0 && *x4 <= q[3])
        .collect()
}

struct Candidate {
    x: [f64; 4],
    defect: f64,
}

fn evaluate(cells: &[Cell; 4], q: [f64; 4], x2: f64, x3: f64) -> Option<Candidate> {
    solve(q, x2, x3)
        .into_iter()
        .map(|(x1, x4)| Candidate {
            x: [x1, x2, x3, x4],
            defect: cells[0].distance(x1) + cells[3].distance(x4),
        })
        .min_by(|a, b| a.defect.total_cmp(&b.defect))
}

/// Cell weights give a genuine cause with positive margins.
fn admissible(x: [f64; 4], q: [f64; 4], tol: &Tolerances) -> bool {
    let total: f64 = x.iter().sum();
    if total <= tol.cc_tol || total >= 1.0 - tol.cc_tol {
        return false;
    }
    // Genuine: C has weight outside A and outside B.
    if x[2] + x[3] <= tol.cc_tol || x[1] + x[3] <= tol.cc_tol {
        return false;
    }
    let rest = 1.0 - total;
    let margin_a = (x[0] + x[1]) / total - (q[0] + q[1] - x[0] - x[1]) / rest;
    let margin_b = (x[0] + x[2]) / total - (q[0] + q[2] - x[0] - x[2]) / rest;
    margin_a > 10.0 * tol.cc_tol && margin_b > 10.0 * tol.cc_tol
}

/// Searches the commutant of `{A, B}` for a verified genuine common cause.
///
/// Returns `Ok(None)` when `budget` restarts do not produce one.
pub fn search_genuine_cc(
    phi: &DensityState,
    a: &Projection,
    b: &Projection,
    budget: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Option<CommonCauseCertificate>> {
    for p in [a, b] {
        if p.dim() != phi.dim() {
            return Err(Error::DimensionMismatch(phi.dim(), p.dim()));
        }
    }
    if !phi.is_faithful() {
        return Err(Error::NotFaithful(phi.min_eigenvalue()));
    }
    let ab = commuting_meet(a, b, tol)?;
    let corr = weight(phi, &ab) - weight(phi, a) * weight(phi, b);
    if corr <= tol.cc_tol {
        return Err(Error::Uncorrelated(corr));
    }
    if budget == 0 {
        return Ok(None);
    }
    let (na, nb) = (a.complement(), b.complement());
    let cells = [
        Cell::new(phi, &ab),
        Cell::new(phi, &commuting_meet(a, &nb, tol)?),
        Cell::new(phi, &commuting_meet(&na, b, tol)?),
        Cell::new(phi, &commuting_meet(&na, &nb, tol)?),
    ];
    let q = [cells[0].q, cells[1].q, cells[2].q, cells[3].q];
    let accept = 1e-13;

    for restart in 0..budget {
        let mut rng = linalg::rng_from_seed(linalg::derive_seed(seed, restart as u64));
        let mut x2 = cells[1].sample(&mut rng);
        let mut x3 = cells[2].sample(&mut rng);
        let Some(mut best) = evaluate(&cells, q, x2, x3) else { continue };
        let mut step = 0.1 * q[1].max(q[2]);
        for _ in 0..REFINE_STEPS {
            if best.defect <= accept || step < 1e-16 {
                break;
            }
            let mut improved = false;
            for (d2, d3) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let (t2, t3) = (cells[1].project(x2 + d2), cells[2].project(x3 + d3));
                if let Some(c) = evaluate(&cells, q, t2, t3) {
                    if c.defect < best.defect {
                        best = c;
                        x2 = t2;
                        x3 = t3;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if best.defect > accept || !admissible(best.x, q, tol) {
            continue;
        }
        let mut m = linalg::zeros(phi.dim());
        let mut rank = 0;
        for (cell, x) in cells.iter().zip(best.x) {
            let part = cell.realize(x, accept);
            m += part.matrix();
            rank += part.rank();
        }
        let c = Projection::from_parts(m, rank);
        let cert = quantum_verify_cc(phi, a, b, &c, tol)?;
        if cert.verified && cert.is_genuine {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}
