use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tol::Tolerances;

use super::algebra::{algebras_commute, JointFactors, MatrixAlgebra};
use super::operators::{commutator_norm, weight, DensityState, HermitianOperator, Projection};

fn check_pair(a: &Projection, b: &Projection) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// `A ∧ B`: projection onto `range(A) ∩ range(B)`, read off as the spectral
/// projection of `A + B` at eigenvalue 2.
pub fn lattice_meet(a: &Projection, b: &Projection, tol: &Tolerances) -> Result<Projection> {
    check_pair(a, b)?;
    let (values, vectors) = linalg::eigh(&(a.matrix() + b.matrix()));
    let cols: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= 2.0 - tol.meet_tol)
        .map(|(i, _)| i)
        .collect();
    Ok(Projection::from_eigvecs(&vectors, cols))
}

/// `A ∨ B = I − ((I − A) ∧ (I − B))`.
pub fn lattice_join(a: &Projection, b: &Projection, tol: &Tolerances) -> Result<Projection> {
    Ok(lattice_meet(&a.complement(), &b.complement(), tol)?.complement())
}

/// `A ∧ B` for commuting projections, computed as the product `AB`.
pub fn commuting_meet(a: &Projection, b: &Projection, tol: &Tolerances) -> Result<Projection> {
    check_pair(a, b)?;
    let norm = commutator_norm(a.matrix(), b.matrix());
    if norm > tol.comm_tol {
        return Err(Error::NotCommuting {
            norm,
            tol: tol.comm_tol,
        });
    }
    let ab = linalg::hermitian_part(&(a.matrix() * b.matrix()));
    let rank = linalg::trace(&ab).re.round().max(0.0) as usize;
    Ok(Projection::from_parts(ab, rank))
}

/// `φ(A ∧ B) − φ(A) φ(B)` for commuting `A`, `B`.
pub fn correlation(
    phi: &DensityState,
    a: &Projection,
    b: &Projection,
    tol: &Tolerances,
) -> Result<f64> {
    if phi.dim() != a.dim() {
        return Err(Error::DimensionMismatch(phi.dim(), a.dim()));
    }
    let meet = commuting_meet(a, b, tol)?;
    Ok(weight(phi, &meet) - weight(phi, a) * weight(phi, b))
}

/// Trace-preserving conditional expectation of a self-adjoint operator onto
/// an algebra.
pub fn conditional_expectation(
    m: &HermitianOperator,
    n: &MatrixAlgebra,
) -> Result<HermitianOperator> {
    let e = n.conditional_expectation(m.matrix())?;
    Ok(HermitianOperator::from_hermitian_part(&e))
}

/// Commutant of an algebra.
pub fn commutant(n: &MatrixAlgebra, tol: &Tolerances) -> Result<MatrixAlgebra> {
    n.commutant(tol)
}

fn require_commuting(n1: &MatrixAlgebra, n2: &MatrixAlgebra, tol: &Tolerances) -> Result<()> {
    if n1.dim() != n2.dim() {
        return Err(Error::DimensionMismatch(n1.dim(), n2.dim()));
    }
    if !algebras_commute(n1, n2, tol.comm_tol) {
        return Err(Error::Precondition(
            "the two algebras do not commute elementwise".into(),
        ));
    }
    Ok(())
}

/// Largest `|φ(XY) − φ(X)φ(Y)|` over basis pairs of the two algebras.
pub fn product_defect(
    phi: &DensityState,
    n1: &MatrixAlgebra,
    n2: &MatrixAlgebra,
    tol: &Tolerances,
) -> Result<f64> {
    require_commuting(n1, n2, tol)?;
    if let Some(joint) = JointFactors::of(n1, n2) {
        let reduced = joint.reduced_state(n1, phi);
        let (l, r) = joint.local_algebras();
        return Ok(basis_defect(&reduced, &l, &r));
    }
    Ok(basis_defect(phi, n1, n2))
}

fn basis_defect(phi: &DensityState, n1: &MatrixAlgebra, n2: &MatrixAlgebra) -> f64 {
    let e1: Vec<_> = n1.basis().iter().map(|x| phi.expect(x)).collect();
    let e2: Vec<_> = n2.basis().iter().map(|y| phi.expect(y)).collect();
    let mut worst: f64 = 0.0;
    for (x, ex) in n1.basis().iter().zip(&e1) {
        for (y, ey) in n2.basis().iter().zip(&e2) {
            let joint = linalg::trace_product(&(phi.matrix() * x), y);
            worst = worst.max((joint - ex * ey).norm());
        }
    }
    worst
}

/// Whether `φ(XY) = φ(X)φ(Y)` for all `X ∈ N1`, `Y ∈ N2` (checked on bases).
pub fn is_product_state(
    phi: &DensityState,
    n1: &MatrixAlgebra,
    n2: &MatrixAlgebra,
    tol: &Tolerances,
) -> Result<bool> {
    Ok(product_defect(phi, n1, n2, tol)? <= tol.tol_state.max(1e-9))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndependenceMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IndependenceVerdict {
    /// Proven: full factor algebras of disjoint tensor factors.
    Independent,
    /// Sampled mode found no pair with `A ∧ B = 0`; not a proof.
    NoCounterexample { samples: usize },
    /// A pair of nonzero projections with trivial meet.
    Counterexample { a: Projection, b: Projection },
}

/// Logical independence: `A ∧ B ≠ 0` for all nonzero projections `A ∈ N1`, `B ∈ N2`.
pub fn logical_independence_check(
    n1: &MatrixAlgebra,
    n2: &MatrixAlgebra,
    mode: IndependenceMode,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<IndependenceVerdict> {
    require_commuting(n1, n2, tol)?;
    match mode {
        IndependenceMode::Exact => match JointFactors::of(n1, n2) {
            Some(_) => Ok(IndependenceVerdict::Independent),
            None => Err(Error::NoTensorSplit),
        },
        IndependenceMode::Sampled => {
            let mut rng = linalg::rng_from_seed(seed);
            // On disjoint factors of a common frame, meets can be taken on the
            // joint factor space: (P ⊗ 1)(1 ⊗ Q) has rank rank(P)·rank(Q)·d_rest.
            let joint = JointFactors::of(n1, n2);
            let local = joint.as_ref().map(|j| j.local_algebras());
            for _ in 0..samples {
                let (a, b, meet_rank) = match (&joint, &local) {
                    (Some(j), Some((l, r))) => {
                        let a = l.random_projection(&mut rng);
                        let b = r.random_projection(&mut rng);
                        let meet = lattice_meet(&a, &b, tol)?;
                        let lift = |p: &Projection| {
                            Projection::from_parts(j.lift(n1, p.matrix()), p.rank())
                        };
                        (lift(&a), lift(&b), meet.rank())
                    }
                    _ => {
                        let a = n1.random_projection(&mut rng);
                        let b = n2.random_projection(&mut rng);
                        let meet = lattice_meet(&a, &b, tol)?;
                        let r = meet.rank();
                        (a, b, r)
                    }
                };
                if meet_rank == 0 {
                    return Ok(IndependenceVerdict::Counterexample { a, b });
                }
            }
            Ok(IndependenceVerdict::NoCounterexample { samples })
        }
    }
}

/// `(ABA)^(2^k)` by repeated squaring: converges to `A ∧ B`.
pub fn meet_power_limit(a: &CMat, b: &CMat, squarings: usize) -> CMat {
    let mut m = a * b * a;
    for _ in 0..squarings {
        m = &m * &m;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, max_abs, random_unit_vector, rng_from_seed};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn meet_of_commuting_diagonals() {
        let a = Projection::diagonal(4, &[0, 1]);
        let b = Projection::diagonal(4, &[1, 2]);
        let m = lattice_meet(&a, &b, &tol()).unwrap();
        assert!(max_abs(&(m.matrix() - diag_real(&[0.0, 1.0, 0.0, 0.0]))) < 1e-12);
        let ab = commuting_meet(&a, &b, &tol()).unwrap();
        assert!(max_abs(&(m.matrix() - ab.matrix())) < 1e-9);
    }

    #[test]
    fn meet_idempotent() {
        let mut rng = rng_from_seed(1);
        let a = Projection::onto(&[random_unit_vector(3, &mut rng), random_unit_vector(3, &mut rng)]);
        let m = lattice_meet(&a, &a, &tol()).unwrap();
        assert!(max_abs(&(m.matrix() - a.matrix())) < 1e-9);
    }

    #[test]
    fn distinct_lines_meet_trivially() {
        let mut rng = rng_from_seed(2);
        let a = Projection::onto(&[random_unit_vector(2, &mut rng)]);
        let b = Projection::onto(&[random_unit_vector(2, &mut rng)]);
        assert!(lattice_meet(&a, &b, &tol()).unwrap().is_zero());
    }

    #[test]
    fn join_examples() {
        let a = Projection::diagonal(2, &[0]);
        let b = Projection::diagonal(2, &[1]);
        let j = lattice_join(&a, &b, &tol()).unwrap();
        assert!(max_abs(&(j.matrix() - linalg::identity(2))) < 1e-12);
        let z = Projection::zero(2);
        let j = lattice_join(&a, &z, &tol()).unwrap();
        assert!(max_abs(&(j.matrix() - a.matrix())) < 1e-12);
    }

    #[test]
    fn meet_dimension_mismatch() {
        let a = Projection::diagonal(2, &[0]);
        let b = Projection::diagonal(3, &[0]);
        assert!(matches!(
            lattice_meet(&a, &b, &tol()),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn correlation_rejects_non_commuting() {
        let mut rng = rng_from_seed(3);
        let a = Projection::onto(&[random_unit_vector(2, &mut rng)]);
        let b = Projection::diagonal(2, &[0]);
        let phi = DensityState::maximally_mixed(2);
        assert!(matches!(
            correlation(&phi, &a, &b, &tol()),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn abelian_pair_is_not_independent() {
        let d = MatrixAlgebra::diagonal(2, &tol()).unwrap();
        let v = logical_independence_check(&d, &d, IndependenceMode::Sampled, 50, 9, &tol()).unwrap();
        match v {
            IndependenceVerdict::Counterexample { a, b } => {
                assert!(lattice_meet(&a, &b, &tol()).unwrap().is_zero());
                assert_eq!(a.rank(), 1);
                assert_eq!(b.rank(), 1);
            }
            other => panic!("expected counterexample, got {other:?}"),
        }
        assert!(matches!(
            logical_independence_check(&d, &d, IndependenceMode::Exact, 0, 0, &tol()),
            Err(Error::NoTensorSplit)
        ));
    }

    #[test]
    fn tensor_factors_are_independent() {
        let l = MatrixAlgebra::tensor_factors(&[2, 2], &[0]).unwrap();
        let r = MatrixAlgebra::tensor_factors(&[2, 2], &[1]).unwrap();
        assert!(matches!(
            logical_independence_check(&l, &r, IndependenceMode::Exact, 0, 0, &tol()).unwrap(),
            IndependenceVerdict::Independent
        ));
        assert!(matches!(
            logical_independence_check(&l, &r, IndependenceMode::Sampled, 100, 4, &tol()).unwrap(),
            IndependenceVerdict::NoCounterexample { samples: 100 }
        ));
    }

    #[test]
    fn product_state_detection() {
        let tol = tol();
        let l = MatrixAlgebra::tensor_factors(&[2, 2], &[0]).unwrap();
        let r = MatrixAlgebra::tensor_factors(&[2, 2], &[1]).unwrap();
        let prod = DensityState::new(
            linalg::kron(&diag_real(&[0.3, 0.7]), &diag_real(&[0.6, 0.4])),
            &tol,
        )
        .unwrap();
        assert!(is_product_state(&prod, &l, &r, &tol).unwrap());
        let singlet = crate::states::singlet();
        assert!(!is_product_state(&singlet, &l, &r, &tol).unwrap());
        let scalars = MatrixAlgebra::scalars(4);
        assert!(is_product_state(&singlet, &scalars, &r, &tol).unwrap());
        // The generic basis path agrees with the joint-factor path.
        let gl = MatrixAlgebra::from_generators(4, l.generators(), &tol).unwrap();
        let gr = MatrixAlgebra::from_generators(4, r.generators(), &tol).unwrap();
        assert!(!is_product_state(&singlet, &gl, &gr, &tol).unwrap());
        assert!(is_product_state(&prod, &gl, &gr, &tol).unwrap());
    }
}
