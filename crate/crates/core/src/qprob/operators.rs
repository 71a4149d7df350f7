use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tol::Tolerances;

fn check_square(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(())
}

/// A self-adjoint matrix. The stored matrix is exactly Hermitian (symmetrized
/// on construction after the tolerance check).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "crate::report::MatrixRecord")]
pub struct HermitianOperator {
    m: CMat,
}

impl HermitianOperator {
    pub fn new(m: CMat, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        let deviation = linalg::hermitian_deviation(&m);
        if deviation > tol.tol_herm {
            return Err(Error::NotHermitian {
                deviation,
                tol: tol.tol_herm,
            });
        }
        Ok(HermitianOperator {
            m: linalg::hermitian_part(&m),
        })
    }

    /// Takes the Hermitian part without checking.
    pub fn from_hermitian_part(m: &CMat) -> Self {
        HermitianOperator {
            m: linalg::hermitian_part(m),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator {
            m: linalg::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn norm(&self) -> f64 {
        linalg::hermitian_norm(&self.m)
    }
}

impl From<HermitianOperator> for crate::report::MatrixRecord {
    fn from(h: HermitianOperator) -> Self {
        crate::report::MatrixRecord::from(&h.m)
    }
}

/// An orthogonal projection `P = P† = P²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "crate::report::MatrixRecord")]
pub struct Projection {
    op: HermitianOperator,
    rank: usize,
}

impl From<Projection> for crate::report::MatrixRecord {
    fn from(p: Projection) -> Self {
        crate::report::MatrixRecord::from(&p.op.m)
    }
}

impl Projection {
    /// Validates idempotence and a `{0, 1}` spectrum within `tol_proj`.
    pub fn new(m: CMat, tol: &Tolerances) -> Result<Self> {
        check_square(&m)?;
        let herm_dev = linalg::hermitian_deviation(&m);
        if herm_dev > tol.tol_proj {
            return Err(Error::NotProjection {
                deviation: herm_dev,
                tol: tol.tol_proj,
            });
        }
        let h = linalg::hermitian_part(&m);
        let idem = linalg::max_abs(&(&h * &h - &h));
        let values = linalg::eigvalsh(&h);
        let spec = values
            .iter()
            .map(|v| v.abs().min((v - 1.0).abs()))
            .fold(0.0, f64::max);
        let deviation = idem.max(spec);
        if deviation > tol.tol_proj {
            return Err(Error::NotProjection {
                deviation,
                tol: tol.tol_proj,
            });
        }
        let rank = values.iter().filter(|v| **v > 0.5).count();
        Ok(Projection {
            op: HermitianOperator { m: h },
            rank,
        })
    }

    /// Builds the projection from a matrix known to be a projection up to
    /// rounding; the spectrum is re-snapped to `{0, 1}`.
    pub fn from_matrix_unchecked(m: &CMat) -> Self {
        let (values, vectors) = linalg::eigh(m);
        let keep: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.5)
            .map(|(i, _)| i)
            .collect();
        Self::from_eigvecs(&vectors, keep)
    }

    pub fn from_eigvecs(vectors: &CMat, columns: Vec<usize>) -> Self {
        let rank = columns.len();
        let m = linalg::hermitian_part(&linalg::span_projection(vectors, columns));
        Projection {
            op: HermitianOperator { m },
            rank,
        }
    }

    /// Projection onto the span of the given vectors.
    pub fn onto(vectors: &[CVec]) -> Self {
        let m = linalg::projection_onto(vectors);
        let rank = linalg::orthonormalize(vectors, 1e-12).len();
        Projection {
            op: HermitianOperator {
                m: linalg::hermitian_part(&m),
            },
            rank,
        }
    }

    /// Wraps a matrix already known to be a projection of the given rank.
    pub(crate) fn from_parts(m: CMat, rank: usize) -> Self {
        Projection {
            op: HermitianOperator::from_hermitian_part(&m),
            rank,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Projection {
            op: HermitianOperator {
                m: linalg::zeros(dim),
            },
            rank: 0,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Projection {
            op: HermitianOperator::identity(dim),
            rank: dim,
        }
    }

    /// Diagonal projection with ones at the listed indices.
    pub fn diagonal(dim: usize, ones: &[usize]) -> Self {
        let mut m = linalg::zeros(dim);
        for &i in ones {
            m[(i, i)] = linalg::ONE;
        }
        let rank = (0..dim).filter(|i| ones.contains(i)).count();
        Projection {
            op: HermitianOperator { m },
            rank,
        }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    pub fn matrix(&self) -> &CMat {
        &self.op.m
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.op
    }

    /// `I − P`.
    pub fn complement(&self) -> Projection {
        let d = self.dim();
        Projection {
            op: HermitianOperator {
                m: linalg::identity(d) - &self.op.m,
            },
            rank: d - self.rank,
        }
    }

    /// Range inclusion `self ≤ other`, i.e. `other · self = self`.
    pub fn leq(&self, other: &Projection, tol: f64) -> bool {
        linalg::max_abs(&(other.matrix() * self.matrix() - self.matrix())) <= tol
    }

    pub fn commutes_with(&self, other: &Projection, tol: f64) -> bool {
        commutator_norm(self.matrix(), other.matrix()) <= tol
    }

    /// Operator-norm distance to another projection.
    pub fn distance(&self, other: &Projection) -> f64 {
        linalg::hermitian_norm(&(self.matrix() - other.matrix()))
    }

    /// Conjugation `U P U†`.
    pub fn conjugate(&self, u: &CMat) -> Projection {
        Projection {
            op: HermitianOperator::from_hermitian_part(&(u * self.matrix() * u.adjoint())),
            rank: self.rank,
        }
    }
}

pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    linalg::max_abs(&linalg::commutator(a, b))
}

/// A density matrix: self-adjoint, positive, unit trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityState {
    #[serde(serialize_with = "crate::report::serialize_matrix")]
    rho: CMat,
    min_eigenvalue: f64,
    faithful: bool,
}

impl DensityState {
    pub fn new(rho: CMat, tol: &Tolerances) -> Result<Self> {
        check_square(&rho)?;
        let deviation = linalg::hermitian_deviation(&rho);
        if deviation > tol.tol_herm {
            return Err(Error::NotHermitian { deviation, tol: tol.tol_herm });
        }
        let rho = linalg::hermitian_part(&rho);
        let tr = linalg::trace(&rho).re;
        if (tr - 1.0).abs() > tol.tol_state {
            return Err(Error::NotState {
                reason: format!("trace {tr}"),
                tol: tol.tol_state,
            });
        }
        let min_eigenvalue = linalg::eigvalsh(&rho).last().copied().unwrap_or(0.0);
        if min_eigenvalue < -tol.tol_state {
            return Err(Error::NotState {
                reason: format!("negative eigenvalue {min_eigenvalue:.3e}"),
                tol: tol.tol_state,
            });
        }
        Ok(DensityState {
            rho,
            min_eigenvalue,
            faithful: min_eigenvalue > tol.faithful_eps,
        })
    }

    /// Normalizes an arbitrary positive matrix to unit trace.
    pub fn from_positive(m: &CMat, tol: &Tolerances) -> Result<Self> {
        let tr = linalg::trace(m).re;
        Self::new(m.unscale(tr), tol)
    }

    pub fn pure(psi: &CVec, tol: &Tolerances) -> Result<Self> {
        let n = psi.norm();
        let v = psi.unscale(n);
        Self::new(&v * v.adjoint(), tol)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityState {
            rho: linalg::identity(dim).unscale(dim as f64),
            min_eigenvalue: 1.0 / dim as f64,
            faithful: true,
        }
    }

    /// `(1 − eps)·self + eps·I/d`; full rank for `eps > 0`.
    pub fn depolarize(&self, eps: f64, tol: &Tolerances) -> Result<Self> {
        let d = self.dim();
        let m = self.rho.scale(1.0 - eps) + linalg::identity(d).scale(eps / d as f64);
        Self::new(m, tol)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.rho
    }

    pub fn is_faithful(&self) -> bool {
        self.faithful
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `tr(ρ X)` for an arbitrary matrix.
    pub fn expect(&self, x: &CMat) -> linalg::C64 {
        linalg::trace_product(&self.rho, x)
    }

    /// Conjugated state `U ρ U†`.
    pub fn conjugate(&self, u: &CMat) -> DensityState {
        DensityState {
            rho: linalg::hermitian_part(&(u * &self.rho * u.adjoint())),
            min_eigenvalue: self.min_eigenvalue,
            faithful: self.faithful,
        }
    }

    /// Reduced state on the listed tensor factors.
    pub fn reduce(&self, dims: &[usize], keep: &[usize]) -> DensityState {
        let r = linalg::partial_trace_keep(&self.rho, dims, keep);
        let min_eigenvalue = linalg::eigvalsh(&r).last().copied().unwrap_or(0.0);
        DensityState {
            rho: linalg::hermitian_part(&r),
            min_eigenvalue,
            faithful: min_eigenvalue > Tolerances::default().faithful_eps,
        }
    }
}

/// `φ(X) = tr(ρ X)` for a self-adjoint `X`.
pub fn state_eval(phi: &DensityState, x: &HermitianOperator, tol: &Tolerances) -> Result<f64> {
    if phi.dim() != x.dim() {
        return Err(Error::DimensionMismatch(phi.dim(), x.dim()));
    }
    let v = phi.expect(x.matrix());
    if v.im.abs() > tol.tol_herm.max(1e-12 * v.re.abs()) {
        return Err(Error::Inconsistent(format!(
            "expectation of a self-adjoint operator has imaginary part {:.3e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Weight of a projection, `φ(P)`.
pub fn weight(phi: &DensityState, p: &Projection) -> f64 {
    phi.expect(p.matrix()).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag_real;

    #[test]
    fn state_eval_examples() {
        let tol = Tolerances::default();
        let phi = DensityState::maximally_mixed(4);
        let x = HermitianOperator::new(diag_real(&[1.0, 1.0, 0.0, 0.0]), &tol).unwrap();
        assert!((state_eval(&phi, &x, &tol).unwrap() - 0.5).abs() < 1e-15);
        let one = HermitianOperator::identity(4);
        assert!((state_eval(&phi, &one, &tol).unwrap() - 1.0).abs() < 1e-15);
        let zero = HermitianOperator::new(linalg::zeros(4), &tol).unwrap();
        assert_eq!(state_eval(&phi, &zero, &tol).unwrap(), 0.0);
    }

    #[test]
    fn state_eval_dimension_mismatch() {
        let tol = Tolerances::default();
        let phi = DensityState::maximally_mixed(4);
        let x = HermitianOperator::identity(2);
        assert!(matches!(
            state_eval(&phi, &x, &tol),
            Err(Error::DimensionMismatch(4, 2))
        ));
    }

    #[test]
    fn rejects_non_hermitian() {
        let tol = Tolerances::default();
        let mut m = linalg::zeros(2);
        m[(0, 1)] = linalg::ONE;
        assert!(matches!(
            HermitianOperator::new(m, &tol),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_non_projection() {
        let tol = Tolerances::default();
        assert!(matches!(
            Projection::new(diag_real(&[1.0, 0.5]), &tol),
            Err(Error::NotProjection { .. })
        ));
        let p = Projection::new(diag_real(&[1.0, 0.0, 1.0]), &tol).unwrap();
        assert_eq!(p.rank(), 2);
    }

    #[test]
    fn state_invariants() {
        let tol = Tolerances::default();
        assert!(DensityState::new(diag_real(&[0.5, 0.6]), &tol).is_err());
        assert!(DensityState::new(diag_real(&[1.2, -0.2]), &tol).is_err());
        let s = DensityState::new(diag_real(&[1.0, 0.0]), &tol).unwrap();
        assert!(!s.is_faithful());
        let f = DensityState::new(diag_real(&[0.9, 0.1]), &tol).unwrap();
        assert!(f.is_faithful());
    }

    #[test]
    fn leq_and_complement() {
        let tol = Tolerances::default();
        let a = Projection::diagonal(3, &[0]);
        let b = Projection::diagonal(3, &[0, 1]);
        assert!(a.leq(&b, tol.tol_proj));
        assert!(!b.leq(&a, tol.tol_proj));
        assert_eq!(b.complement().rank(), 1);
    }
}
