//! Sampled checks of isotony, Einstein causality and primitive causality.

use rand::Rng;
use serde::Serialize;

use super::{pauli_generators, region_algebra, LatticeCone, NetModel};
use crate::geometry::{causal_completion, spacelike_separated};
use crate::linalg;

/// Bound on the Frobenius norm (an upper bound on the operator norm) of
/// commutators between spacelike generators.
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Relative distance of a transported generator from the larger algebra.
pub const ISOTONY_TOL: f64 = 1e-9;
/// Latest slice used when sampling cones.
const MAX_SLICE: usize = 3;
const MAX_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomKind {
    Isotony,
    EinsteinCausality,
    PrimitiveCausality,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomViolation {
    pub kind: AxiomKind,
    pub first: LatticeCone,
    pub second: LatticeCone,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub isotony_pairs: usize,
    pub causality_pairs: usize,
    pub primitive_pairs: usize,
    pub max_isotony_residual: f64,
    pub max_commutator: f64,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn sampled(&self) -> usize {
        self.isotony_pairs + self.causality_pairs + self.primitive_pairs
    }

    pub fn count(&self, kind: AxiomKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

fn random_cone<R: Rng + ?Sized>(n: usize, rng: &mut R) -> LatticeCone {
    let w = rng.random_range(1..=MAX_WIDTH.min(n)) as i64;
    let a = rng.random_range(0..=n as i64 - w);
    LatticeCone { k: rng.random_range(0..=MAX_SLICE), a, b: a + w - 1 }
}

/// Largest distance of a slice-`small.k` generator of `small`, moved to
/// slice `big.k`, from the on-chain factors of `big`.
fn isotony_residual(net: &NetModel, small: &LatticeCone, big: &LatticeCone) -> f64 {
    let n = net.n_sites();
    let dims = vec![2; n];
    let keep = big.sites(n);
    let rest = (1usize << n) as f64 / (1usize << keep.len()) as f64;
    let mut worst: f64 = 0.0;
    for s in small.sites(n) {
        for p in pauli_generators() {
            let e = net.site_operator(s, &p);
            let o = net.transport(&e, small.k, big.k);
            let local = linalg::partial_trace_keep(&o, &dims, &keep).unscale(rest);
            let back = linalg::embed_factors(&local, &dims, &keep);
            worst = worst.max((&o - back).norm() / e.norm());
        }
    }
    worst
}

/// Largest commutator between Pauli generators of two cones.
fn max_commutator(net: &NetModel, first: &LatticeCone, second: &LatticeCone) -> f64 {
    let n = net.n_sites();
    let mut worst: f64 = 0.0;
    for s in first.sites(n) {
        for p in pauli_generators() {
            let o = net.transport(&net.site_operator(s, &p), first.k, second.k);
            for t in second.sites(n) {
                for q in pauli_generators() {
                    worst = worst.max(net.commutator_with_site(&o, t, &q).norm());
                }
            }
        }
    }
    worst
}

/// `max ‖[U(k) P_i U(k)†, Q_j]‖` over Pauli generators and `|i − j| > k`.
pub fn light_cone_violation(net: &NetModel, k: usize) -> f64 {
    let n = net.n_sites();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for p in pauli_generators() {
            let o = net.heisenberg(&net.site_operator(i, &p), k);
            for j in (0..n).filter(|&j| j.abs_diff(i) > k) {
                for q in pauli_generators() {
                    worst = worst.max(net.commutator_with_site(&o, j, &q).norm());
                }
            }
        }
    }
    worst
}

fn sample_nested<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (LatticeCone, LatticeCone) {
    let small = random_cone(n, rng);
    let k = rng.random_range(0..=MAX_SLICE);
    let d = (k as i64 - small.k as i64).abs();
    let big = LatticeCone {
        k,
        a: small.a - d - rng.random_range(0..=1),
        b: small.b + d + rng.random_range(0..=1),
    };
    (small, big)
}

fn sample_spacelike<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<(LatticeCone, LatticeCone)> {
    for _ in 0..200 {
        let first = random_cone(n, rng);
        let k = rng.random_range(0..=MAX_SLICE);
        let d = (k as i64 - first.k as i64).abs();
        let w = rng.random_range(1..=MAX_WIDTH) as i64;
        let gap = 1 + d + rng.random_range(0..=1);
        let second = if rng.random::<bool>() {
            let a = first.b + gap;
            LatticeCone { k, a, b: a + w - 1 }
        } else {
            let b = first.a - gap;
            LatticeCone { k, a: b - w + 1, b }
        };
        if second.a >= 0 && second.b < n as i64 {
            return Some((first, second));
        }
    }
    None
}

/// Cycles through isotony, Einstein-causality and primitive-causality pairs,
/// `sample_pairs` in total.
///
/// Isotony pairs are nested lattice cones; the smaller cone's Pauli
/// generators must lie in the larger algebra. Causality pairs are spacelike
/// cones; their Pauli generators must commute. Primitive-causality pairs
/// are a cone and a slab inside its base, whose algebras must have identical
/// generator lists.
pub fn check_axioms(net: &NetModel, sample_pairs: usize, seed: u64) -> AxiomReport {
    let n = net.n_sites();
    let mut report = AxiomReport {
        isotony_pairs: 0,
        causality_pairs: 0,
        primitive_pairs: 0,
        max_isotony_residual: 0.0,
        max_commutator: 0.0,
        violations: Vec::new(),
    };
    for i in 0..sample_pairs {
        let mut rng = linalg::rng_from_seed(linalg::derive_seed(seed, i as u64));
        match i % 3 {
            0 => {
                let (small, big) = sample_nested(n, &mut rng);
                report.isotony_pairs += 1;
                let nested = small.region().is_subset_of(&big.region());
                let residual = if nested { isotony_residual(net, &small, &big) } else { f64::INFINITY };
                report.max_isotony_residual = report.max_isotony_residual.max(residual);
                if residual > ISOTONY_TOL {
                    report.violations.push(AxiomViolation { kind: AxiomKind::Isotony, first: small, second: big, residual });
                }
            }
            1 => {
                let Some((first, second)) = sample_spacelike(n, &mut rng) else { continue };
                report.causality_pairs += 1;
                let residual = if spacelike_separated(&first.region(), &second.region()) {
                    max_commutator(net, &first, &second)
                } else {
                    f64::INFINITY
                };
                report.max_commutator = report.max_commutator.max(residual);
                if residual > COMMUTATOR_TOL {
                    report.violations.push(AxiomViolation {
                        kind: AxiomKind::EinsteinCausality,
                        first,
                        second,
                        residual,
                    });
                }
            }
            _ => {
                let cone = random_cone(n, &mut rng);
                report.primitive_pairs += 1;
                let h = rng.random_range(0.05..=0.5);
                let same = cone
                    .inscribed_rect(h)
                    .and_then(|rect| {
                        let fixed = causal_completion(&cone.region())? == cone.region();
                        let direct = net.cone_algebra(cone)?;
                        let completed = region_algebra(net, &rect)?;
                        Ok(fixed
                            && completed.cone == cone
                            && direct.algebra.generators() == completed.algebra.generators()
                            && direct.algebra.same_frame(&completed.algebra))
                    })
                    .unwrap_or(false);
                if !same {
                    report.violations.push(AxiomViolation {
                        kind: AxiomKind::PrimitiveCausality,
                        first: cone,
                        second: cone,
                        residual: 1.0,
                    });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toynet::{build_net, GateSpec};

    #[test]
    fn swap_net_has_no_violations() {
        let net = build_net(8, GateSpec::Swap, 0).unwrap();
        let report = check_axioms(&net, 30, 1);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
        assert_eq!(report.sampled(), 30);
    }

    #[test]
    fn random_net_respects_light_cone() {
        let net = build_net(6, GateSpec::Random, 4).unwrap();
        for k in 0..3 {
            assert!(light_cone_violation(&net, k) <= COMMUTATOR_TOL);
        }
        let report = check_axioms(&net, 30, 2);
        assert!(report.violations.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn nested_cones_on_one_slice() {
        let net = build_net(6, GateSpec::Random, 9).unwrap();
        let small = LatticeCone::new(2, 2, 3).unwrap();
        let big = LatticeCone::new(2, 1, 4).unwrap();
        assert!(isotony_residual(&net, &small, &big) < 1e-12);
        // Not nested: generators leak out of the smaller base.
        assert!(isotony_residual(&net, &big, &small) > 0.1);
    }

    #[test]
    fn oversized_gate_is_detected() {
        let net = build_net(6, GateSpec::Swap, 0).unwrap().corrupted(1);
        assert!(light_cone_violation(&net, 1) > 0.1);
        let report = check_axioms(&net, 30, 1);
        assert!(report.count(AxiomKind::EinsteinCausality) + report.count(AxiomKind::Isotony) > 0);
    }
}
