//! Bell correlation between commuting algebras.
//!
//! `β(φ, N1, N2) = sup ½ φ(X1(Y1 + Y2) + X2(Y1 − Y2))` over self-adjoint
//! contractions `X_i ∈ N1`, `Y_j ∈ N2`. Always `1 ≤ β ≤ √2`; the state is
//! Bell correlated when `β > 1`.
//!
//! The supremum is approached by see-saw ascent: with the `Y`s fixed the
//! objective is linear in each `X_i`, and the best contraction is the sign
//! of the conditional expectation onto `N1` of the Hermitian part of
//! `M ρ`, with `M` the `Y` combination paired with `X_i`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::qprob::{algebras_commute, weight, DensityState, HermitianOperator, JointFactors, MatrixAlgebra, Projection};
use crate::states;
use crate::tol::Tolerances;

pub const DEFAULT_RESTARTS: usize = 20;
pub const MAX_ITERATIONS: usize = 500;
pub const CONVERGENCE_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BellReport {
    pub beta: f64,
    pub x1: HermitianOperator,
    pub x2: HermitianOperator,
    pub y1: HermitianOperator,
    pub y2: HermitianOperator,
    /// Half-step pairs used by the winning restart.
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
}

/// The optimisation problem, possibly reduced to the joint factor space.
struct Problem {
    rho: CMat,
    n1: MatrixAlgebra,
    n2: MatrixAlgebra,
    lift: Option<(JointFactors, MatrixAlgebra)>,
}

impl Problem {
    fn new(phi: &DensityState, n1: &MatrixAlgebra, n2: &MatrixAlgebra, tol: &Tolerances) -> Result<Problem> {
        if n1.dim() != phi.dim() || n2.dim() != phi.dim() {
            return Err(Error::DimensionMismatch(phi.dim(), n1.dim().max(n2.dim())));
        }
        if !algebras_commute(n1, n2, tol.comm_tol) {
            return Err(Error::Precondition("the two algebras do not commute elementwise".into()));
        }
        Ok(match JointFactors::of(n1, n2) {
            Some(joint) => {
                let rho = joint.reduced_state(n1, phi).matrix().clone();
                let (l, r) = joint.local_algebras();
                Problem { rho, n1: l, n2: r, lift: Some((joint, n1.clone())) }
            }
            None => Problem { rho: phi.matrix().clone(), n1: n1.clone(), n2: n2.clone(), lift: None },
        })
    }

    fn dim(&self) -> usize {
        self.rho.nrows()
    }

    fn objective(&self, o: &Observables) -> f64 {
        let e = |x: &CMat, y: &CMat| linalg::trace_product(&self.rho, &(x * y)).re;
        0.5 * (e(&o.x1, &o.y1) + e(&o.x1, &o.y2) + e(&o.x2, &o.y1) - e(&o.x2, &o.y2))
    }

    /// `argmax_{X ∈ alg, ‖X‖ ≤ 1} Re tr(ρ X M)`.
    fn best_response(&self, alg: &MatrixAlgebra, m: &CMat) -> Result<CMat> {
        let z = linalg::hermitian_part(&(m * &self.rho));
        let h = alg.conditional_expectation(&z)?;
        Ok(linalg::sign_matrix(&linalg::hermitian_part(&h)))
    }

    fn lift(&self, x: &CMat) -> CMat {
        match &self.lift {
            Some((joint, n1)) => joint.lift(n1, x),
            None => x.clone(),
        }
    }
}

#[derive(Debug, Clone)]
struct Observables {
    x1: CMat,
    x2: CMat,
    y1: CMat,
    y2: CMat,
}

struct Ascent {
    obs: Observables,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// See-saw from the given `Y`s; `trace` receives the objective after every
/// half-step.
fn ascend(p: &Problem, y1: CMat, y2: CMat, mut trace: Option<&mut Vec<f64>>) -> Result<Ascent> {
    let d = p.dim();
    let mut obs = Observables { x1: linalg::identity(d), x2: linalg::identity(d), y1, y2 };
    let mut value = f64::NEG_INFINITY;
    for it in 1..=MAX_ITERATIONS {
        obs.x1 = p.best_response(&p.n1, &(&obs.y1 + &obs.y2))?;
        obs.x2 = p.best_response(&p.n1, &(&obs.y1 - &obs.y2))?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(p.objective(&obs));
        }
        obs.y1 = p.best_response(&p.n2, &(&obs.x1 + &obs.x2))?;
        obs.y2 = p.best_response(&p.n2, &(&obs.x1 - &obs.x2))?;
        let next = p.objective(&obs);
        if let Some(t) = trace.as_deref_mut() {
            t.push(next);
        }
        let gain = next - value;
        value = next;
        if gain < CONVERGENCE_GAIN {
            return Ok(Ascent { obs, value, iterations: it, converged: true });
        }
    }
    Ok(Ascent { obs, value, iterations: MAX_ITERATIONS, converged: false })
}

/// Lower bound on `β` by see-saw ascent from `restarts` random starts plus
/// one start at the identity, which guarantees `β ≥ 1`.
pub fn bell_correlation(
    phi: &DensityState,
    n1: &MatrixAlgebra,
    n2: &MatrixAlgebra,
    restarts: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<BellReport> {
    let p = Problem::new(phi, n1, n2, tol)?;
    let d = p.dim();
    let mut best = ascend(&p, linalg::identity(d), linalg::identity(d), None)?;
    for r in 0..restarts {
        let mut rng = linalg::rng_from_seed(linalg::derive_seed(seed, r as u64));
        let y1 = p.n2.random_observable(&mut rng);
        let y2 = p.n2.random_observable(&mut rng);
        let run = ascend(&p, y1, y2, None)?;
        if run.value > best.value {
            best = run;
        }
    }
    if best.value > std::f64::consts::SQRT_2 + tol.bell_tol {
        return Err(Error::Inconsistent(format!("Bell value {} exceeds √2", best.value)));
    }
    let op = |m: &CMat| HermitianOperator::from_hermitian_part(&p.lift(m));
    Ok(BellReport {
        beta: best.value,
        x1: op(&best.obs.x1),
        x2: op(&best.obs.x2),
        y1: op(&best.obs.y1),
        y2: op(&best.obs.y2),
        iterations: best.iterations,
        converged: best.converged,
        restarts,
    })
}

/// `½ φ(X1(Y1 + Y2) + X2(Y1 − Y2))` for explicit observables.
pub fn bell_objective(phi: &DensityState, x1: &CMat, x2: &CMat, y1: &CMat, y2: &CMat) -> f64 {
    let e = |x: &CMat, y: &CMat| phi.expect(&(x * y)).re;
    0.5 * (e(x1, y1) + e(x1, y2) + e(x2, y1) - e(x2, y2))
}

fn pauli() -> [CMat; 3] {
    let z = linalg::ZERO;
    let o = linalg::ONE;
    let i = c(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[z, o, o, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

/// Closed-form two-qubit value: `max(1, √(λ₁ + λ₂))` with `λ₁ ≥ λ₂` the top
/// eigenvalues of `TᵀT`, `T_ij = φ(σ_i ⊗ σ_j)`.
pub fn two_qubit_chsh_oracle(phi: &DensityState) -> Result<f64> {
    if phi.dim() != 4 {
        return Err(Error::DimensionMismatch(4, phi.dim()));
    }
    let s = pauli();
    let mut t = nalgebra::DMatrix::<f64>::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            t[(i, j)] = phi.expect(&linalg::kron(&s[i], &s[j])).re;
        }
    }
    let mut ev: Vec<f64> = (t.transpose() * &t).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok((ev[0] + ev[1]).max(0.0).sqrt().max(1.0))
}

pub fn is_bell_correlated(phi: &DensityState, n1: &MatrixAlgebra, n2: &MatrixAlgebra, tol: &Tolerances) -> Result<bool> {
    Ok(bell_correlation(phi, n1, n2, DEFAULT_RESTARTS, 0, tol)?.beta > 1.0 + tol.bell_tol)
}

/// A positively correlated pair `A ∈ N1`, `B ∈ N2`.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelatedPair {
    pub a: Projection,
    pub b: Projection,
    pub correlation: f64,
    /// A complement was taken to turn a negative correlation positive.
    pub complemented: bool,
}

/// Sweeps spectral projections of both algebras for the pair with the
/// largest `|φ(AB) − φ(A)φ(B)|`; a negative winner `(A, B)` is returned as
/// `(A, B⊥)`. `None` when every pair is uncorrelated within `cc_tol`.
pub fn find_correlated_pair(
    phi: &DensityState,
    n1: &MatrixAlgebra,
    n2: &MatrixAlgebra,
    tol: &Tolerances,
) -> Result<Option<CorrelatedPair>> {
    Ok(correlated_pairs(phi, n1, n2, 1, tol)?.into_iter().next())
}

/// Up to `limit` correlated pairs from the same sweep, strongest first.
pub fn correlated_pairs(
    phi: &DensityState,
    n1: &MatrixAlgebra,
    n2: &MatrixAlgebra,
    limit: usize,
    tol: &Tolerances,
) -> Result<Vec<CorrelatedPair>> {
    let p = Problem::new(phi, n1, n2, tol)?;
    let reduced = DensityState::from_positive(&p.rho, tol)?;
    let left = p.n1.spectral_projections();
    let right = p.n2.spectral_projections();
    let wl: Vec<f64> = left.iter().map(|a| weight(&reduced, a)).collect();
    let wr: Vec<f64> = right.iter().map(|b| weight(&reduced, b)).collect();
    let mut found: Vec<(usize, usize, f64)> = Vec::new();
    for (i, a) in left.iter().enumerate() {
        let ra = &p.rho * a.matrix();
        for (j, b) in right.iter().enumerate() {
            let corr = linalg::trace_product(&ra, b.matrix()).re - wl[i] * wr[j];
            if corr.abs() > tol.cc_tol {
                found.push((i, j, corr));
            }
        }
    }
    // Stable sort keeps the sweep order among ties.
    found.sort_by(|x, y| y.2.abs().total_cmp(&x.2.abs()));
    let lift = |q: &Projection| Projection::from_parts(p.lift(q.matrix()), q.rank() * phi.dim() / p.dim());
    Ok(found
        .into_iter()
        .take(limit)
        .map(|(i, j, corr)| {
            let b = if corr < 0.0 { right[j].complement() } else { right[j].clone() };
            CorrelatedPair { a: lift(&left[i]), b: lift(&b), correlation: corr.abs(), complemented: corr < 0.0 }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Pure,
    Mixed,
    Product,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ensemble> {
        match s {
            "pure" => Ok(Ensemble::Pure),
            "mixed" => Ok(Ensemble::Mixed),
            "product" => Ok(Ensemble::Product),
            other => Err(Error::UnknownEnsemble(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BellSample {
    pub dims: [usize; 2],
    pub betas: Vec<f64>,
    /// Share of samples with `β > 1 + bell_tol`.
    pub fraction: f64,
    pub max_beta: f64,
}

/// `β` for each state on `C^{d1} ⊗ C^{d2}`: closed form on two qubits,
/// see-saw otherwise.
pub fn bell_fraction_of(states: &[DensityState], dims: [usize; 2], seed: u64, tol: &Tolerances) -> Result<BellSample> {
    if states.is_empty() {
        return Err(Error::SizeOutOfRange("need at least one sample".into()));
    }
    let n1 = MatrixAlgebra::tensor_factors(&dims, &[0])?;
    let n2 = MatrixAlgebra::tensor_factors(&dims, &[1])?;
    let mut betas = Vec::with_capacity(states.len());
    for (k, phi) in states.iter().enumerate() {
        let beta = if dims == [2, 2] {
            two_qubit_chsh_oracle(phi)?
        } else {
            bell_correlation(phi, &n1, &n2, DEFAULT_RESTARTS, linalg::derive_seed(seed, k as u64), tol)?.beta
        };
        betas.push(beta);
    }
    let max_beta = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max_beta > std::f64::consts::SQRT_2 + tol.bell_tol {
        return Err(Error::Inconsistent(format!("sampled Bell value {max_beta} exceeds √2")));
    }
    let hits = betas.iter().filter(|b| **b > 1.0 + tol.bell_tol).count();
    Ok(BellSample { dims, fraction: hits as f64 / betas.len() as f64, max_beta, betas })
}

/// Draws `n` states from the named ensemble and reports the Bell-correlated
/// fraction.
pub fn sample_bell_fraction(
    dims: [usize; 2],
    ensemble: &str,
    n: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<BellSample> {
    let ensemble: Ensemble = ensemble.parse()?;
    if n == 0 {
        return Err(Error::SizeOutOfRange("n must be at least 1".into()));
    }
    let mut rng = linalg::rng_from_seed(seed);
    let d = dims[0] * dims[1];
    let drawn: Vec<DensityState> = (0..n)
        .map(|_| match ensemble {
            Ensemble::Pure => states::random_pure(d, &mut rng),
            Ensemble::Mixed => states::random_mixed(d, &mut rng),
            Ensemble::Product => states::random_product(&dims, &mut rng),
        })
        .collect();
    bell_fraction_of(&drawn, dims, rng.random(), tol)
}
