//! Subprojections of prescribed weight.
//!
//! Inside a finite-dimensional range the weights `φ(C)` of subprojections
//! `C ≤ P` of rank `k` fill exactly the interval between the sums of the `k`
//! smallest and `k` largest eigenvalues of the compressed density matrix.
//! Unlike the type III setting, the union over `k` can have gaps, so a
//! target weight can be infeasible.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::qprob::{weight, DensityState, MatrixAlgebra, Projection};
use crate::tol::Tolerances;

/// Weight change below which a partial rotation is snapped to an endpoint.
const SNAP: f64 = 1e-14;

/// `ρ` compressed to the range of a projection, diagonalised.
#[derive(Debug, Clone)]
pub(crate) struct Compression {
    /// Eigenvalues `μ₁ ≥ … ≥ μ_m`.
    pub mu: Vec<f64>,
    /// Matching eigenvectors, expressed in the full space.
    pub vecs: Vec<CVec>,
}

impl Compression {
    pub fn new(rho: &CMat, p: &Projection) -> Compression {
        let (pv, pvecs) = linalg::eigh(p.matrix());
        let m = pv.iter().filter(|v| **v > 0.5).count();
        let v = pvecs.columns(0, m).into_owned();
        let compressed = v.adjoint() * rho * &v;
        let (mu, w) = linalg::eigh(&compressed);
        let vecs = (0..m).map(|i| &v * w.column(i)).collect();
        Compression { mu, vecs }
    }

    pub fn size(&self) -> usize {
        self.mu.len()
    }

    /// Range of weights of rank-`k` subprojections.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        let m = self.mu.len();
        let high = self.mu[..k].iter().sum();
        let low = self.mu[m - k..].iter().sum();
        (low, high)
    }

    /// Ranks in `1..=max_rank` whose interval contains `r` up to `slack`.
    pub fn ranks_for(&self, r: f64, max_rank: usize, slack: f64) -> Vec<usize> {
        (1..=max_rank.min(self.size()))
            .filter(|&k| {
                let (lo, hi) = self.interval(k);
                r >= lo - slack && r <= hi + slack
            })
            .collect()
    }

    /// Rank-`k` subprojection of weight `r`, assuming `r` lies in the rank
    /// interval.
    ///
    /// Starts from the top-`k` eigenvectors and repeatedly moves one selected
    /// index `i` to an unselected `i + 1`, the mover picked by `choose` from
    /// the movable candidates. The step that crosses `r` is performed as a
    /// partial rotation in the plane of `e_i, e_{i+1}`; `phase` is the
    /// relative phase of the second vector and does not affect the weight.
    pub fn walk(
        &self,
        r: f64,
        k: usize,
        phase: f64,
        mut choose: impl FnMut(&[usize]) -> usize,
    ) -> Projection {
        let m = self.size();
        let d = self.vecs.first().map_or(0, |v| v.len());
        if k == 0 {
            return Projection::zero(d);
        }
        let mut selected: Vec<bool> = (0..m).map(|i| i < k).collect();
        let mut value: f64 = self.mu[..k].iter().sum();
        let mut rotated: Option<(usize, CVec)> = None;
        if r < value {
            loop {
                let movable: Vec<usize> =
                    (0..m.saturating_sub(1)).filter(|&i| selected[i] && !selected[i + 1]).collect();
                if movable.is_empty() {
                    break;
                }
                let i = choose(&movable);
                let next = value - self.mu[i] + self.mu[i + 1];
                if r >= next {
                    let gap = self.mu[i] - self.mu[i + 1];
                    let mut cos2 = if gap > 0.0 {
                        ((r - (value - self.mu[i]) - self.mu[i + 1]) / gap).clamp(0.0, 1.0)
                    } else {
                        1.0
                    };
                    // A rounding-level angle would enter the projection at
                    // its square root; snap it when the weight cannot tell.
                    if cos2 * gap <= SNAP {
                        cos2 = 0.0;
                    } else if (1.0 - cos2) * gap <= SNAP {
                        cos2 = 1.0;
                    }
                    let v = &self.vecs[i] * linalg::c(cos2.sqrt(), 0.0)
                        + &self.vecs[i + 1] * linalg::C64::from_polar((1.0 - cos2).sqrt(), phase);
                    rotated = Some((i, v));
                    break;
                }
                selected[i] = false;
                selected[i + 1] = true;
                value = next;
            }
        }
        let mut mat = linalg::zeros(d);
        for (i, e) in self.vecs.iter().enumerate() {
            if !selected[i] {
                continue;
            }
            match &rotated {
                Some((j, v)) if *j == i => mat += v * v.adjoint(),
                _ => mat += e * e.adjoint(),
            }
        }
        Projection::from_parts(mat, k)
    }

    /// Rank-`k` subprojection of weight `r` spanned by `k − 1` randomly chosen
    /// eigenvectors and one unit vector in the plane of two further
    /// eigenvectors whose eigenvalues bracket the remaining weight. Returns
    /// `None` when the sampled eigenvectors leave no bracketing pair.
    pub fn random_rotation<R: Rng + ?Sized>(&self, r: f64, k: usize, rng: &mut R) -> Option<Projection> {
        let m = self.size();
        if k == 0 || k >= m {
            return None;
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let (fixed, rest) = order.split_at(k - 1);
        let need = r - fixed.iter().map(|&i| self.mu[i]).sum::<f64>();
        let slack = 1e-12;
        let pairs: Vec<(usize, usize)> = rest
            .iter()
            .flat_map(|&i| rest.iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| i < j && self.mu[i] + slack >= need && need >= self.mu[j] - slack)
            .collect();
        let &(i, j) = pairs.get(rng.random_range(0..pairs.len().max(1)))?;
        let gap = self.mu[i] - self.mu[j];
        let cos2 = if gap > SNAP { ((need - self.mu[j]) / gap).clamp(0.0, 1.0) } else { rng.random_range(0.0..1.0) };
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let v = &self.vecs[i] * linalg::c(cos2.sqrt(), 0.0)
            + &self.vecs[j] * linalg::C64::from_polar((1.0 - cos2).sqrt(), phase);
        let mut mat = &v * v.adjoint();
        for &f in fixed {
            mat += &self.vecs[f] * self.vecs[f].adjoint();
        }
        Some(Projection::from_parts(mat, k))
    }
}

/// Deterministic path: always move the largest movable index.
pub(crate) fn last_movable(candidates: &[usize]) -> usize {
    *candidates.last().expect("nonempty candidates")
}

pub(crate) fn random_movable<R: Rng + ?Sized>(rng: &mut R) -> impl FnMut(&[usize]) -> usize + '_ {
    move |candidates: &[usize]| candidates[rng.random_range(0..candidates.len())]
}

fn check_target(phi: &DensityState, p: &Projection, r: f64) -> Result<()> {
    if p.dim() != phi.dim() {
        return Err(Error::DimensionMismatch(phi.dim(), p.dim()));
    }
    if !phi.is_faithful() {
        return Err(Error::NotFaithful(phi.min_eigenvalue()));
    }
    let upper = weight(phi, p);
    if !(r > 0.0 && r < upper) {
        return Err(Error::Range { r, upper });
    }
    Ok(())
}

fn max_rank(comp: &Compression, strict: bool) -> usize {
    if strict {
        comp.size().saturating_sub(1)
    } else {
        comp.size()
    }
}

/// Ranks `k` for which a subprojection of `P` with weight `r` exists.
pub fn feasible_ranks(
    phi: &DensityState,
    p: &Projection,
    r: f64,
    strict: bool,
    tol: &Tolerances,
) -> Result<Vec<usize>> {
    check_target(phi, p, r)?;
    let comp = Compression::new(phi.matrix(), p);
    Ok(comp.ranks_for(r, max_rank(&comp, strict), tol.synth_tol))
}

pub(crate) fn infeasible(comp: &Compression, r: f64, strict: bool) -> Error {
    let intervals: Vec<String> = (1..=max_rank(comp, strict))
        .map(|k| {
            let (lo, hi) = comp.interval(k);
            format!("rank {k}: [{lo:.6}, {hi:.6}]")
        })
        .collect();
    Error::Infeasible(format!(
        "no {}subprojection has weight {r}; achievable {}",
        if strict { "strict " } else { "" },
        if intervals.is_empty() { "none".to_string() } else { intervals.join(", ") }
    ))
}

pub(crate) fn check_weight(phi: &DensityState, c: &Projection, r: f64, tol: &Tolerances) -> Result<()> {
    let got = weight(phi, c);
    if (got - r).abs() > tol.synth_tol {
        return Err(Error::Inconsistent(format!(
            "synthesised weight {got} misses target {r} by more than synth_tol"
        )));
    }
    Ok(())
}

/// A subprojection `C ≤ P` (strictly below `P` when `strict`) with
/// `φ(C) = r`, of the smallest feasible rank.
pub fn synthesize_subprojection(
    phi: &DensityState,
    p: &Projection,
    r: f64,
    strict: bool,
    tol: &Tolerances,
) -> Result<Projection> {
    check_target(phi, p, r)?;
    let comp = Compression::new(phi.matrix(), p);
    let k = *comp
        .ranks_for(r, max_rank(&comp, strict), tol.synth_tol)
        .first()
        .ok_or_else(|| infeasible(&comp, r, strict))?;
    let c = comp.walk(r, k, 0.0, last_movable);
    check_weight(phi, &c, r, tol)?;
    Ok(c)
}

/// As [`synthesize_subprojection`], with `C` required to lie in a
/// structured algebra that contains `P`.
///
/// The construction runs on the local factor space with the restricted state
/// and is embedded back; the weight is unchanged because
/// `φ(F(c ⊗ 1)F†) = φ|_local(c)`.
pub fn synthesize_subprojection_in(
    phi: &DensityState,
    p: &Projection,
    r: f64,
    strict: bool,
    algebra: &MatrixAlgebra,
    tol: &Tolerances,
) -> Result<Projection> {
    let Some(split) = algebra.structure() else {
        if algebra.algebra_dim() == algebra.dim() * algebra.dim() {
            return synthesize_subprojection(phi, p, r, strict, tol);
        }
        return Err(Error::Precondition(
            "synthesis inside an algebra requires a tensor-split structure".into(),
        ));
    };
    check_target(phi, p, r)?;
    if !algebra.contains(p.matrix(), tol.tol_alg) {
        return Err(Error::Precondition("P does not belong to the algebra".into()));
    }
    let local_state = algebra.restrict_state(phi);
    let local_p = Projection::from_matrix_unchecked(&algebra.extract_local(p.matrix()));
    let local_c = synthesize_subprojection(&local_state, &local_p, r, strict, tol)?;
    let multiplicity = split.total_dim() / split.local_dim();
    let c = Projection::from_parts(algebra.embed_local(local_c.matrix()), local_c.rank() * multiplicity);
    check_weight(phi, &c, r, tol)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;

    fn setup() -> (DensityState, Projection, Tolerances) {
        (states::diagonal(&[0.4, 0.3, 0.2, 0.1]), Projection::diagonal(4, &[0, 1, 2]), Tolerances::default())
    }

    #[test]
    fn walks_to_lower_subset() {
        let (phi, p, tol) = setup();
        let c = synthesize_subprojection(&phi, &p, 0.5, true, &tol).unwrap();
        let expected = Projection::diagonal(4, &[1, 2]);
        assert!(c.distance(&expected) < 1e-12);
    }

    #[test]
    fn stops_mid_rotation() {
        let (phi, p, tol) = setup();
        let c = synthesize_subprojection(&phi, &p, 0.65, true, &tol).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVec::zeros(4);
        v[1] = linalg::c(h, 0.0);
        v[2] = linalg::c(h, 0.0);
        let mut e1 = CVec::zeros(4);
        e1[0] = linalg::ONE;
        let expected = Projection::onto(&[e1, v]);
        assert!(c.distance(&expected) < 1e-12);
        assert!((weight(&phi, &c) - 0.65).abs() < 1e-15);
        assert!(c.leq(&p, 1e-12));
    }

    #[test]
    fn infeasible_and_range() {
        let (phi, p, tol) = setup();
        assert!(matches!(synthesize_subprojection(&phi, &p, 0.75, true, &tol), Err(Error::Infeasible(_))));
        assert!(matches!(synthesize_subprojection(&phi, &p, 0.9, true, &tol), Err(Error::Range { .. })));
        assert!(matches!(synthesize_subprojection(&phi, &p, 0.0, true, &tol), Err(Error::Range { .. })));
        let rank_one = Projection::diagonal(4, &[1]);
        assert!(matches!(
            synthesize_subprojection(&phi, &rank_one, 0.1, true, &tol),
            Err(Error::Infeasible(_))
        ));
        let pure = states::diagonal(&[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(synthesize_subprojection(&pure, &p, 0.5, true, &tol), Err(Error::NotFaithful(_))));
    }

    #[test]
    fn random_paths_hit_target() {
        let tol = Tolerances::default();
        let mut rng = linalg::rng_from_seed(5);
        let phi = states::random_faithful(7, 0.05, &mut rng);
        let p = Projection::identity(7);
        let comp = Compression::new(phi.matrix(), &p);
        for k in comp.ranks_for(0.5, 6, 0.0) {
            let c = comp.walk(0.5, k, 0.3, random_movable(&mut rng));
            assert_eq!(c.rank(), k);
            check_weight(&phi, &c, 0.5, &tol).unwrap();
            let m = c.matrix();
            assert!(linalg::max_abs(&(m * m - m)) < 1e-12);
        }
    }

    #[test]
    fn structured_synthesis_stays_local() {
        let tol = Tolerances::default();
        let mut rng = linalg::rng_from_seed(9);
        let phi = states::random_faithful(8, 0.05, &mut rng);
        let alg = MatrixAlgebra::tensor_factors(&[2, 4], &[1]).unwrap();
        let p = Projection::from_parts(alg.embed_local(&linalg::diag_real(&[1.0, 1.0, 1.0, 0.0])), 6);
        let r = 0.5 * weight(&phi, &p);
        match synthesize_subprojection_in(&phi, &p, r, true, &alg, &tol) {
            Ok(c) => {
                assert!(alg.contains(c.matrix(), 1e-9));
                assert!(c.leq(&p, 1e-9));
                assert!((weight(&phi, &c) - r).abs() <= tol.synth_tol);
            }
            Err(Error::Infeasible(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
}
