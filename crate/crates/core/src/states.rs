//! Named and randomly drawn states used by tests, examples and the CLI.

use rand::Rng;

use crate::linalg::{self, c, CMat, CVec};
use crate::qprob::DensityState;
use crate::tol::Tolerances;

fn build(m: CMat) -> DensityState {
    DensityState::new(m, &Tolerances::default()).expect("constructed state is valid")
}

/// `(|01⟩ − |10⟩)/√2` on `C² ⊗ C²`.
pub fn singlet_vector() -> CVec {
    let s = 1.0 / 2f64.sqrt();
    CVec::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)])
}

pub fn singlet() -> DensityState {
    let v = singlet_vector();
    build(&v * v.adjoint())
}

/// `w·singlet + (1 − w)·I/4`.
pub fn werner(w: f64) -> DensityState {
    let s = singlet();
    build(s.matrix().scale(w) + linalg::identity(4).scale((1.0 - w) / 4.0))
}

/// `|ψ⟩⟨ψ|` for a Haar-random unit vector.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityState {
    let v = linalg::random_unit_vector(dim, rng);
    build(&v * v.adjoint())
}

/// Hilbert–Schmidt random mixed state `G G† / tr(G G†)`.
pub fn random_mixed<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityState {
    let g = linalg::random_gaussian_matrix(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    build(m.unscale(tr))
}

/// A full-rank state: a random mixed state blended with `I/d` at weight `eps`.
pub fn random_faithful<R: Rng + ?Sized>(dim: usize, eps: f64, rng: &mut R) -> DensityState {
    random_mixed(dim, rng)
        .depolarize(eps, &Tolerances::default())
        .expect("valid mixture")
}

/// `ρ₁ ⊗ ρ₂ ⊗ …` with independently drawn mixed factors.
pub fn random_product<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityState {
    let mut m = CMat::identity(1, 1);
    for &d in dims {
        let f = random_mixed(d, rng);
        m = linalg::kron(&m, f.matrix());
    }
    build(m)
}

/// Product of pure factors.
pub fn random_pure_product<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityState {
    let mut m = CMat::identity(1, 1);
    for &d in dims {
        let f = random_pure(d, rng);
        m = linalg::kron(&m, f.matrix());
    }
    build(m)
}

/// Diagonal state from probability weights.
pub fn diagonal(weights: &[f64]) -> DensityState {
    build(linalg::diag_real(weights))
}
