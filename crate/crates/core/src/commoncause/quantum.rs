//! Quantum common causes: verification, the Reichenbach value `r` and
//! strong causes below `A ∧ B`.

use rand::Rng;
use serde::Serialize;

use super::synth::{self, Compression};
use super::{Cause, CommonCauseCertificate, ConditionValues};
use crate::error::{Error, Result};
use crate::linalg;
use crate::qprob::{commutator_norm, commuting_meet, lattice_join, lattice_meet, weight};
use crate::qprob::{DensityState, MatrixAlgebra, Projection};
use crate::tol::Tolerances;

fn require_commuting(x: &Projection, y: &Projection, tol: &Tolerances) -> Result<()> {
    let norm = commutator_norm(x.matrix(), y.matrix());
    if norm > tol.comm_tol {
        return Err(Error::NotCommuting { norm, tol: tol.comm_tol });
    }
    Ok(())
}

fn require_dims(phi: &DensityState, ps: &[&Projection]) -> Result<()> {
    for p in ps {
        if p.dim() != phi.dim() {
            return Err(Error::DimensionMismatch(phi.dim(), p.dim()));
        }
    }
    Ok(())
}

pub fn quantum_verify_cc(
    phi: &DensityState,
    a: &Projection,
    b: &Projection,
    c: &Projection,
    tol: &Tolerances,
) -> Result<CommonCauseCertificate> {
    require_dims(phi, &[a, b, c])?;
    require_commuting(a, b, tol)?;
    require_commuting(c, a, tol)?;
    require_commuting(c, b, tol)?;
    let p_c = weight(phi, c);
    let p_cp = weight(phi, &c.complement());
    if p_c <= tol.tol_state {
        return Err(Error::ZeroWeight(format!("φ(C) = {p_c:.3e}")));
    }
    if p_cp <= tol.tol_state {
        return Err(Error::ZeroWeight(format!("φ(C⊥) = {p_cp:.3e}")));
    }
    let ab = lattice_meet(a, b, tol)?;
    let values = ConditionValues::from_weights(
        p_c,
        weight(phi, &lattice_meet(&ab, c, tol)?),
        weight(phi, &lattice_meet(a, c, tol)?),
        weight(phi, &lattice_meet(b, c, tol)?),
        weight(phi, &ab),
        weight(phi, a),
        weight(phi, b),
    );
    let is_strong = c.leq(&ab, tol.meet_tol);
    let is_genuine = !c.leq(a, tol.meet_tol) && !c.leq(b, tol.meet_tol);
    Ok(CommonCauseCertificate::assemble(
        Cause::Quantum(c.clone()),
        values,
        is_strong,
        is_genuine,
        tol.cc_tol,
    ))
}

/// `r = (φ(A∧B) − φ(A)φ(B)) / (1 − φ(A∨B))`, the weight a strong cause
/// below `A ∧ B` must carry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RValue {
    pub r: f64,
    pub phi_ab: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_a_or_b: f64,
}

impl RValue {
    pub fn from_weights(phi_a: f64, phi_b: f64, phi_ab: f64, phi_a_or_b: f64, tol: &Tolerances) -> Result<RValue> {
        let corr = phi_ab - phi_a * phi_b;
        if corr <= tol.cc_tol {
            return Err(Error::Uncorrelated(corr));
        }
        // r = φ(A∧B) exactly when φ(A∧B) = φ(A) or φ(B): a nested pair.
        if phi_ab >= phi_a.min(phi_b) - tol.cc_tol {
            return Err(Error::Precondition(format!(
                "φ(A∧B) = {phi_ab} is not below min(φ(A), φ(B)); the pair is not logically independent"
            )));
        }
        let denom = 1.0 - phi_a_or_b;
        if denom <= tol.tol_state {
            return Err(Error::Inconsistent(format!(
                "correlated pair with φ(A∨B) = {phi_a_or_b}; expected φ(A∨B) < 1"
            )));
        }
        let r = corr / denom;
        if !(r > 0.0 && r < phi_ab) {
            return Err(Error::Inconsistent(format!("r = {r} outside (0, φ(A∧B) = {phi_ab})")));
        }
        Ok(RValue { r, phi_ab, phi_a, phi_b, phi_a_or_b })
    }
}

pub fn reichenbach_r(phi: &DensityState, a: &Projection, b: &Projection, tol: &Tolerances) -> Result<RValue> {
    require_dims(phi, &[a, b])?;
    let ab = commuting_meet(a, b, tol)?;
    let join = lattice_join(a, b, tol)?;
    RValue::from_weights(weight(phi, a), weight(phi, b), weight(phi, &ab), weight(phi, &join), tol)
}

struct StrongSetup {
    r: f64,
    meet: Projection,
}

fn strong_setup(phi: &DensityState, a: &Projection, b: &Projection, tol: &Tolerances) -> Result<StrongSetup> {
    require_dims(phi, &[a, b])?;
    if !phi.is_faithful() {
        return Err(Error::NotFaithful(phi.min_eigenvalue()));
    }
    let rv = reichenbach_r(phi, a, b, tol)?;
    Ok(StrongSetup { r: rv.r, meet: commuting_meet(a, b, tol)? })
}

fn certify(
    phi: &DensityState,
    a: &Projection,
    b: &Projection,
    c: &Projection,
    tol: &Tolerances,
) -> Result<CommonCauseCertificate> {
    let cert = quantum_verify_cc(phi, a, b, c, tol)?;
    if !cert.verified || !cert.is_strong {
        return Err(Error::Inconsistent(format!(
            "synthesised cause failed verification (residuals {:.3e}, {:.3e}; margins {:.3e}, {:.3e})",
            cert.residual_screen_c, cert.residual_screen_cperp, cert.margin_a, cert.margin_b
        )));
    }
    Ok(cert)
}

/// A strong common cause `C < A ∧ B` with `φ(C) = r`.
pub fn find_strong_cc(
    phi: &DensityState,
    a: &Projection,
    b: &Projection,
    tol: &Tolerances,
) -> Result<CommonCauseCertificate> {
    let s = strong_setup(phi, a, b, tol)?;
    let c = synth::synthesize_subprojection(phi, &s.meet, s.r, true, tol)?;
    certify(phi, a, b, &c, tol)
}

/// As [`find_strong_cc`], with the cause taken from a structured algebra
/// containing `A` and `B`.
pub fn find_strong_cc_in(
    phi: &DensityState,
    a: &Projection,
    b: &Projection,
    algebra: &MatrixAlgebra,
    tol: &Tolerances,
) -> Result<CommonCauseCertificate> {
    let s = strong_setup(phi, a, b, tol)?;
    let c = synth::synthesize_subprojection_in(phi, &s.meet, s.r, true, algebra, tol)?;
    certify(phi, a, b, &c, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct MultipleCauses {
    pub causes: Vec<CommonCauseCertificate>,
    pub requested: usize,
    /// No rank admits a strict subprojection of weight `r`.
    pub infeasible: bool,
    /// Fewer than `requested` distinct causes were constructed.
    pub short: bool,
}

/// Minimum operator-norm distance for two causes to count as distinct.
pub const DISTINCT_CAUSES: f64 = 1e-6;

/// Up to `count` pairwise distinct strong causes, varying the rank, the
/// swap path and the rotation phase.
pub fn find_multiple_strong_cc(
    phi: &DensityState,
    a: &Projection,
    b: &Projection,
    count: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<MultipleCauses> {
    let s = strong_setup(phi, a, b, tol)?;
    let comp = Compression::new(phi.matrix(), &s.meet);
    let ranks = comp.ranks_for(s.r, comp.size().saturating_sub(1), tol.synth_tol);
    let mut causes: Vec<CommonCauseCertificate> = Vec::new();
    if ranks.is_empty() || count == 0 {
        return Ok(MultipleCauses { causes, requested: count, infeasible: ranks.is_empty(), short: count > 0 });
    }
    let first = comp.walk(s.r, ranks[0], 0.0, synth::last_movable);
    synth::check_weight(phi, &first, s.r, tol)?;
    causes.push(certify(phi, a, b, &first, tol)?);

    let mut rng = linalg::rng_from_seed(seed);
    let attempts = 50 * count;
    for _ in 0..attempts {
        if causes.len() >= count {
            break;
        }
        let k = ranks[rng.random_range(0..ranks.len())];
        let c = match comp.random_rotation(s.r, k, &mut rng) {
            Some(c) => c,
            None => {
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let mut path_rng = linalg::rng_from_seed(rng.random());
                comp.walk(s.r, k, phase, synth::random_movable(&mut path_rng))
            }
        };
        let distinct = causes
            .iter()
            .all(|cert| cert.projection().is_some_and(|p| p.distance(&c) > DISTINCT_CAUSES));
        if !distinct {
            continue;
        }
        synth::check_weight(phi, &c, s.r, tol)?;
        causes.push(certify(phi, a, b, &c, tol)?);
    }
    let short = causes.len() < count;
    Ok(MultipleCauses { causes, requested: count, infeasible: false, short })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::commoncause::classical::{classical_verify_cc, ClassicalSpace, Event};
    use crate::linalg::CMat;
    use crate::states;

    /// Seeded dimension-9 instance: a random basis, `A` and `B` diagonal in
    /// it with ranks 6, 6 and meet rank 4, and a state tilted towards the
    /// meet so that the pair is positively correlated.
    pub(crate) fn dim9_instance(seed: u64) -> (DensityState, Projection, Projection) {
        let mut rng = linalg::rng_from_seed(seed);
        let u = linalg::haar_unitary(9, &mut rng);
        let a = Projection::diagonal(9, &[0, 1, 2, 3, 4, 5]).conjugate(&u);
        let b = Projection::diagonal(9, &[0, 1, 2, 3, 6, 7]).conjugate(&u);
        let noise = states::random_faithful(9, 0.2, &mut rng);
        let bias = Projection::diagonal(9, &[0, 1, 2, 3]).conjugate(&u);
        let rho: CMat = noise.matrix() * linalg::c(0.5, 0.0) + bias.matrix() * linalg::c(0.125, 0.0);
        let phi = DensityState::new(rho, &Tolerances::default()).unwrap();
        (phi, a, b)
    }

    #[test]
    fn r_value_examples() {
        let tol = Tolerances::default();
        let r = RValue::from_weights(0.5, 0.5, 0.4, 0.6, &tol).unwrap();
        assert!((r.r - 0.375).abs() < 1e-15);
        let r = RValue::from_weights(0.6, 0.7, 0.5, 0.8, &tol).unwrap();
        assert!((r.r - 0.4).abs() < 1e-12);
        assert!(matches!(RValue::from_weights(0.5, 0.5, 0.25, 0.75, &tol), Err(Error::Uncorrelated(_))));
        // A ≤ B: correlated but nested.
        assert!(matches!(RValue::from_weights(0.4, 0.6, 0.4, 0.6, &tol), Err(Error::Precondition(_))));
    }

    #[test]
    fn diagonal_embedding_matches_classical() {
        let tol = Tolerances::default();
        let w = [0.32, 0.08, 0.08, 0.02, 0.02, 0.08, 0.08, 0.32];
        let space = ClassicalSpace::new(w.to_vec()).unwrap();
        let (ea, eb, ec) = (Event::from_atoms(&[0, 1, 4, 5]), Event::from_atoms(&[0, 2, 4, 6]), Event::from_atoms(&[0, 1, 2, 3]));
        let classical = classical_verify_cc(&space, ea, eb, ec, &tol).unwrap();
        let phi = states::diagonal(&w);
        let lift = |e: Event| Projection::diagonal(8, &e.atoms());
        let quantum = quantum_verify_cc(&phi, &lift(ea), &lift(eb), &lift(ec), &tol).unwrap();
        assert!(quantum.verified && classical.verified);
        assert_eq!(quantum.conditions, classical.conditions);
        assert!(!quantum.is_strong && classical.is_genuine == quantum.is_genuine);
    }

    #[test]
    fn noncommuting_cause_rejected() {
        let tol = Tolerances::default();
        let phi = DensityState::maximally_mixed(2);
        let a = Projection::diagonal(2, &[0]);
        let plus = Projection::onto(&[crate::linalg::CVec::from_element(2, linalg::ONE)]);
        assert!(matches!(quantum_verify_cc(&phi, &a, &a, &plus, &tol), Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn strong_cause_in_dimension_nine() {
        let tol = Tolerances::default();
        let (phi, a, b) = dim9_instance(2024);
        assert!(crate::qprob::correlation(&phi, &a, &b, &tol).unwrap() > 0.0);
        let cert = find_strong_cc(&phi, &a, &b, &tol).unwrap();
        assert!(cert.verified && cert.is_strong && !cert.is_genuine);
        assert!(cert.residual_screen_c <= 1e-9 && cert.residual_screen_cperp <= 1e-9);

        let many = find_multiple_strong_cc(&phi, &a, &b, 3, 7, &tol).unwrap();
        assert_eq!(many.causes.len(), 3);
        assert!(!many.short);
        let one = find_multiple_strong_cc(&phi, &a, &b, 1, 7, &tol).unwrap();
        assert!(one.causes[0].projection().unwrap().distance(cert.projection().unwrap()) < 1e-12);
    }

    #[test]
    fn minimal_meet_is_infeasible() {
        let tol = Tolerances::default();
        let phi = states::werner(0.9);
        // A = |0⟩⟨0| ⊗ 1 and B = 1 ⊗ |1⟩⟨1|; the meet has rank 1.
        let a = Projection::diagonal(4, &[0, 1]);
        let b = Projection::diagonal(4, &[1, 3]);
        assert!(crate::qprob::correlation(&phi, &a, &b, &tol).unwrap() > 0.0);
        match find_strong_cc(&phi, &a, &b, &tol) {
            Err(Error::Infeasible(_)) => {}
            other => panic!("expected Infeasible, got {other:?}"),
        }
        let many = find_multiple_strong_cc(&phi, &a, &b, 3, 1, &tol).unwrap();
        assert!(many.causes.is_empty() && many.infeasible);
    }
}
