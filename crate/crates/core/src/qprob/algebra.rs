//! Finite-dimensional *-subalgebras of `M_d(C)`.
//!
//! Two representations coexist:
//!
//! * **structured**: the algebra is `F · (M(factors) ⊗ 1) · F†` for a tensor
//!   split of `C^d`, an optional unitary frame `F`, and a subset of factors.
//!   Conditional expectations, commutants and sampling reduce to partial
//!   traces on the factor space, so these stay cheap up to `d = 1024`.
//! * **generated**: an explicit orthonormal basis (trace inner product)
//!   obtained by breadth-first word closure over generators, or by solving
//!   the linear commutation system for a commutant.

use std::collections::VecDeque;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::tol::Tolerances;

use super::operators::{DensityState, Projection};

/// Ordered factor dimensions plus the (sorted) factors an algebra acts on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TensorSplit {
    pub dims: Vec<usize>,
    pub factors: Vec<usize>,
}

impl TensorSplit {
    pub fn new(dims: Vec<usize>, mut factors: Vec<usize>) -> Self {
        factors.sort_unstable();
        factors.dedup();
        TensorSplit { dims, factors }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn local_dim(&self) -> usize {
        self.factors.iter().map(|&f| self.dims[f]).product()
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.dims.len())
            .filter(|f| !self.factors.contains(f))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    dim: usize,
    generators: Vec<CMat>,
    structure: Option<TensorSplit>,
    frame: Option<Arc<CMat>>,
    basis: OnceLock<Vec<CMat>>,
}

impl MatrixAlgebra {
    /// Algebra acting as `M(factors) ⊗ 1` on the given tensor split.
    pub fn tensor_factors(dims: &[usize], factors: &[usize]) -> Result<Self> {
        let split = TensorSplit::new(dims.to_vec(), factors.to_vec());
        if split.factors.iter().any(|&f| f >= dims.len()) || dims.iter().any(|&d| d == 0) {
            return Err(Error::Precondition(format!(
                "factors {factors:?} invalid for split {dims:?}"
            )));
        }
        let dim = split.total_dim();
        let mut generators = vec![linalg::identity(dim)];
        for &f in &split.factors {
            let df = dims[f];
            for a in 0..df {
                for b in 0..df {
                    let mut unit = linalg::zeros(df);
                    unit[(a, b)] = linalg::ONE;
                    generators.push(linalg::embed_factors(&unit, dims, &[f]));
                }
            }
        }
        Ok(MatrixAlgebra {
            dim,
            generators,
            structure: Some(split),
            frame: None,
            basis: OnceLock::new(),
        })
    }

    /// The full matrix algebra `M_d`.
    pub fn full(dim: usize) -> Self {
        Self::tensor_factors(&[dim], &[0]).expect("valid split")
    }

    /// Scalars `C·1`.
    pub fn scalars(dim: usize) -> Self {
        Self::tensor_factors(&[dim], &[]).expect("valid split")
    }

    /// The maximal abelian algebra of diagonal matrices.
    pub fn diagonal(dim: usize, tol: &Tolerances) -> Result<Self> {
        let gens = (0..dim)
            .map(|i| Projection::diagonal(dim, &[i]).matrix().clone())
            .collect::<Vec<_>>();
        Self::from_generators(dim, &gens, tol)
    }

    /// Smallest unital *-algebra containing the generators (word closure).
    pub fn from_generators(dim: usize, generators: &[CMat], tol: &Tolerances) -> Result<Self> {
        for g in generators {
            if g.nrows() != dim || g.ncols() != dim {
                return Err(Error::DimensionMismatch(dim, g.nrows()));
            }
        }
        let mut letters: Vec<CMat> = Vec::new();
        for g in generators {
            letters.push(g.clone());
            if linalg::hermitian_deviation(g) > tol.tol_herm {
                letters.push(g.adjoint());
            }
        }
        let mut basis: Vec<CMat> = Vec::new();
        let mut queue: VecDeque<CMat> = VecDeque::new();
        let id = linalg::identity(dim);
        if let Some(b) = push_if_new(&mut basis, &id, tol.tol_alg) {
            queue.push_back(b);
        }
        for l in &letters {
            if let Some(b) = push_if_new(&mut basis, l, tol.tol_alg) {
                queue.push_back(b);
            }
        }
        let max = dim * dim;
        while let Some(word) = queue.pop_front() {
            if basis.len() == max {
                break;
            }
            for l in &letters {
                let w = l * &word;
                if let Some(b) = push_if_new(&mut basis, &w, tol.tol_alg) {
                    queue.push_back(b);
                }
            }
        }
        // Closure audit: products with generators and adjoints stay in the span.
        let mut worst: f64 = 0.0;
        for b in &basis {
            worst = worst.max(span_residual(&basis, &b.adjoint()));
            for l in &letters {
                worst = worst.max(span_residual(&basis, &(b * l)));
            }
        }
        if worst > tol.tol_alg {
            return Err(Error::ClosureFailure(worst));
        }
        Ok(MatrixAlgebra {
            dim,
            generators: generators.to_vec(),
            structure: None,
            frame: None,
            basis: OnceLock::from(basis),
        })
    }

    fn from_basis(dim: usize, basis: Vec<CMat>) -> Self {
        MatrixAlgebra {
            dim,
            generators: basis.clone(),
            structure: None,
            frame: None,
            basis: OnceLock::from(basis),
        }
    }

    /// `frame · (M(factors) ⊗ 1) · frame†` with generators already expressed in
    /// the frame, for callers that can conjugate more cheaply than by dense
    /// products.
    pub(crate) fn structured_in_frame(split: TensorSplit, frame: Arc<CMat>, generators: Vec<CMat>) -> Self {
        MatrixAlgebra {
            dim: split.total_dim(),
            generators,
            structure: Some(split),
            frame: Some(frame),
            basis: OnceLock::new(),
        }
    }

    /// Returns `U · self · U†`.
    pub fn conjugated(&self, u: Arc<CMat>) -> Self {
        let generators = self
            .generators
            .iter()
            .map(|g| u.as_ref() * g * u.adjoint())
            .collect();
        let basis = match (&self.structure, self.basis.get()) {
            (None, Some(b)) => OnceLock::from(
                b.iter()
                    .map(|x| u.as_ref() * x * u.adjoint())
                    .collect::<Vec<_>>(),
            ),
            _ => OnceLock::new(),
        };
        let frame = match &self.frame {
            Some(f) => Arc::new(u.as_ref() * f.as_ref()),
            None => u,
        };
        MatrixAlgebra {
            dim: self.dim,
            generators,
            structure: self.structure.clone(),
            frame: Some(frame),
            basis,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    pub fn structure(&self) -> Option<&TensorSplit> {
        self.structure.as_ref()
    }

    pub fn frame(&self) -> Option<&Arc<CMat>> {
        self.frame.as_ref()
    }

    /// Whether two algebras live in the same unitary frame.
    pub fn same_frame(&self, other: &MatrixAlgebra) -> bool {
        match (&self.frame, &other.frame) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }

    /// Orthonormal basis under the trace inner product.
    pub fn basis(&self) -> &[CMat] {
        self.basis.get_or_init(|| {
            let split = self
                .structure
                .as_ref()
                .expect("unstructured algebras carry an explicit basis");
            let dl = split.local_dim();
            let dc = (split.total_dim() / dl) as f64;
            let norm = c(1.0 / dc.sqrt(), 0.0);
            let mut out = Vec::with_capacity(dl * dl);
            for a in 0..dl {
                for b in 0..dl {
                    let mut unit = linalg::zeros(dl);
                    unit[(a, b)] = norm;
                    let big = linalg::embed_factors(&unit, &split.dims, &split.factors);
                    out.push(self.to_frame(big));
                }
            }
            out
        })
    }

    /// Dimension of the algebra as a vector space.
    pub fn algebra_dim(&self) -> usize {
        match &self.structure {
            Some(s) => s.local_dim().pow(2),
            None => self.basis().len(),
        }
    }

    pub fn is_abelian(&self, tol: f64) -> bool {
        match &self.structure {
            Some(s) => s.local_dim() == 1,
            None => {
                let b = self.basis();
                b.iter()
                    .all(|x| b.iter().all(|y| linalg::max_abs(&linalg::commutator(x, y)) <= tol))
            }
        }
    }

    fn to_frame(&self, m: CMat) -> CMat {
        match &self.frame {
            Some(f) => f.as_ref() * m * f.adjoint(),
            None => m,
        }
    }

    fn from_frame(&self, m: &CMat) -> CMat {
        match &self.frame {
            Some(f) => f.adjoint() * m * f.as_ref(),
            None => m.clone(),
        }
    }

    /// Trace-preserving conditional expectation: orthogonal projection onto
    /// the algebra under the trace inner product.
    pub fn conditional_expectation(&self, m: &CMat) -> Result<CMat> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, m.nrows()));
        }
        Ok(match &self.structure {
            Some(split) => {
                let local = self.local_part(m);
                let dc = (split.total_dim() / split.local_dim()) as f64;
                let big = linalg::embed_factors(&local.unscale(dc), &split.dims, &split.factors);
                self.to_frame(big)
            }
            None => {
                let mut out = linalg::zeros(self.dim);
                for b in self.basis() {
                    out += b * linalg::hs_inner(b, m);
                }
                out
            }
        })
    }

    /// For structured algebras: the partial trace of `F† m F` onto the factors.
    pub fn local_part(&self, m: &CMat) -> CMat {
        let split = self.structure.as_ref().expect("structured algebra");
        linalg::partial_trace_keep(&self.from_frame(m), &split.dims, &split.factors)
    }

    /// For structured algebras: `F (x ⊗ 1) F†`.
    pub fn embed_local(&self, x: &CMat) -> CMat {
        let split = self.structure.as_ref().expect("structured algebra");
        self.to_frame(linalg::embed_factors(x, &split.dims, &split.factors))
    }

    /// For structured algebras: recovers `x` from an element `F (x ⊗ 1) F†`.
    pub fn extract_local(&self, m: &CMat) -> CMat {
        let split = self.structure.as_ref().expect("structured algebra");
        let dc = (split.total_dim() / split.local_dim()) as f64;
        self.local_part(m).unscale(dc)
    }

    pub fn membership_residual(&self, m: &CMat) -> Result<f64> {
        let e = self.conditional_expectation(m)?;
        Ok(linalg::max_abs(&(e - m)))
    }

    pub fn contains(&self, m: &CMat, tol: f64) -> bool {
        self.membership_residual(m)
            .map(|r| r <= tol * m.norm().max(1.0))
            .unwrap_or(false)
    }

    /// `{X : X G = G X for all generators G}`.
    pub fn commutant(&self, tol: &Tolerances) -> Result<MatrixAlgebra> {
        if let Some(split) = &self.structure {
            let mut out = MatrixAlgebra::tensor_factors(&split.dims, &split.complement())?;
            if let Some(f) = &self.frame {
                out = out.conjugated(f.clone());
            }
            return Ok(out);
        }
        let d = self.dim;
        let n = d * d;
        let id = linalg::identity(d);
        let mut gram = CMat::zeros(n, n);
        for g in &self.generators {
            for h in [g.clone(), g.adjoint()] {
                // vec(G X − X G) = (1 ⊗ G − Gᵀ ⊗ 1) vec(X) for column-major vec.
                let k = linalg::kron(&id, &h) - linalg::kron(&h.transpose(), &id);
                gram += k.adjoint() * k;
            }
        }
        let (values, vectors) = linalg::eigh(&gram);
        let scale = values.first().copied().unwrap_or(1.0).max(1.0);
        let mut basis = Vec::new();
        for (k, v) in values.iter().enumerate() {
            if *v <= tol.tol_alg * scale {
                let col = vectors.column(k);
                basis.push(CMat::from_column_slice(d, d, col.as_slice()));
            }
        }
        Ok(MatrixAlgebra::from_basis(d, basis))
    }

    /// A random self-adjoint element with Gaussian coordinates.
    pub fn random_hermitian<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        match &self.structure {
            Some(split) => {
                let dl = split.local_dim();
                let g = linalg::random_gaussian_matrix(dl, dl, rng);
                self.embed_local(&linalg::hermitian_part(&g))
            }
            None => {
                let mut out = linalg::zeros(self.dim);
                for b in self.basis() {
                    let x: f64 = rng.sample(rand_distr::StandardNormal);
                    let y: f64 = rng.sample(rand_distr::StandardNormal);
                    out += b * c(x, y);
                }
                linalg::hermitian_part(&out)
            }
        }
    }

    /// A random nonzero projection of the algebra.
    ///
    /// Structured algebras draw a Haar-random column span of uniformly random
    /// rank in `1..local_dim`; generated algebras take a random nonempty
    /// proper union of spectral projections of a random self-adjoint element.
    /// When the algebra has no nontrivial projections the identity is returned.
    pub fn random_projection<R: Rng + ?Sized>(&self, rng: &mut R) -> Projection {
        match &self.structure {
            Some(split) => {
                let dl = split.local_dim();
                if dl < 2 {
                    return Projection::identity(self.dim);
                }
                let u = linalg::haar_unitary(dl, rng);
                let rank = rng.random_range(1..dl);
                let local = linalg::span_projection(&u, 0..rank);
                Projection::from_parts(self.embed_local(&local), rank * self.dim / dl)
            }
            None => {
                let h = self.random_hermitian(rng);
                let (values, vectors) = linalg::eigh(&h);
                let clusters = linalg::eigen_clusters(&values, 1e-6);
                if clusters.len() < 2 {
                    return Projection::identity(self.dim);
                }
                let mut chosen: Vec<usize> = Vec::new();
                while chosen.is_empty() || chosen.len() == clusters.len() {
                    chosen = (0..clusters.len()).filter(|_| rng.random::<bool>()).collect();
                }
                let cols: Vec<usize> = chosen
                    .iter()
                    .flat_map(|&k| clusters[k].iter().copied())
                    .collect();
                Projection::from_eigvecs(&vectors, cols)
            }
        }
    }

    /// A random self-adjoint unitary (±1 spectrum) of the algebra.
    pub fn random_observable<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        linalg::sign_matrix(&self.random_hermitian(rng))
    }

    /// Spectral projections of the Hermitian parts of every basis element.
    ///
    /// Their span contains every self-adjoint element of the algebra.
    pub fn spectral_projections(&self) -> Vec<Projection> {
        let (elements, local) = match &self.structure {
            Some(split) => {
                let dl = split.local_dim();
                let mut out = Vec::new();
                for a in 0..dl {
                    for b in a..dl {
                        let mut re = linalg::zeros(dl);
                        re[(a, b)] += linalg::ONE;
                        re[(b, a)] += linalg::ONE;
                        out.push(re);
                        if a != b {
                            let mut im = linalg::zeros(dl);
                            im[(a, b)] = c(0.0, 1.0);
                            im[(b, a)] = c(0.0, -1.0);
                            out.push(im);
                        }
                    }
                }
                (out, true)
            }
            None => {
                let mut out = Vec::new();
                for b in self.basis() {
                    out.push(linalg::hermitian_part(b));
                    out.push(linalg::hermitian_part(&(b * c(0.0, 1.0))));
                }
                (out, false)
            }
        };
        let mut projections = Vec::new();
        for h in elements {
            if linalg::max_abs(&h) < 1e-12 {
                continue;
            }
            let (values, vectors) = linalg::eigh(&h);
            let clusters = linalg::eigen_clusters(&values, 1e-9);
            if clusters.len() < 2 {
                continue;
            }
            for cl in clusters {
                let p = linalg::span_projection(&vectors, cl.iter().copied());
                let p = if local { self.embed_local(&p) } else { p };
                projections.push(Projection::from_matrix_unchecked(&p));
            }
        }
        projections
    }

    /// Restriction of a state to a structured algebra, as a density matrix on
    /// the local factor space.
    pub fn restrict_state(&self, phi: &DensityState) -> DensityState {
        let split = self.structure.as_ref().expect("structured algebra");
        let rotated = match &self.frame {
            Some(f) => phi.conjugate(&f.adjoint()),
            None => phi.clone(),
        };
        rotated.reduce(&split.dims, &split.factors)
    }
}

fn span_residual(basis: &[CMat], m: &CMat) -> f64 {
    let mut r = m.clone();
    for b in basis {
        let coeff = linalg::hs_inner(b, &r);
        r -= b * coeff;
    }
    r.norm() / m.norm().max(1.0)
}

fn push_if_new(basis: &mut Vec<CMat>, m: &CMat, tol: f64) -> Option<CMat> {
    let scale = m.norm();
    if scale == 0.0 {
        return None;
    }
    let mut r = m.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let coeff = linalg::hs_inner(b, &r);
            r -= b * coeff;
        }
    }
    let norm = r.norm();
    if norm > tol * scale.max(1.0) {
        let b = r.unscale(norm);
        basis.push(b.clone());
        Some(b)
    } else {
        None
    }
}

/// Whether two algebras commute elementwise (generator check).
pub fn algebras_commute(n1: &MatrixAlgebra, n2: &MatrixAlgebra, tol: f64) -> bool {
    if let (Some(s1), Some(s2)) = (n1.structure(), n2.structure()) {
        if n1.same_frame(n2) && s1.dims == s2.dims {
            return s1.factors.iter().all(|f| !s2.factors.contains(f));
        }
    }
    n1.generators().iter().all(|a| {
        n2.generators()
            .iter()
            .all(|b| linalg::max_abs(&linalg::commutator(a, b)) <= tol)
    })
}

/// Joint view of two structured algebras on disjoint factors of a common
/// frame: everything can be evaluated on the union of their factors.
#[derive(Debug, Clone)]
pub struct JointFactors {
    /// Dimensions of the union factors, in ascending full-factor order.
    pub dims: Vec<usize>,
    /// Full-factor indices of the union.
    pub union: Vec<usize>,
    /// Positions of the left algebra's factors within `union`.
    pub left: Vec<usize>,
    /// Positions of the right algebra's factors within `union`.
    pub right: Vec<usize>,
}

impl JointFactors {
    pub fn of(n1: &MatrixAlgebra, n2: &MatrixAlgebra) -> Option<JointFactors> {
        let (s1, s2) = (n1.structure()?, n2.structure()?);
        if !n1.same_frame(n2) || s1.dims != s2.dims {
            return None;
        }
        if s1.factors.iter().any(|f| s2.factors.contains(f)) {
            return None;
        }
        let mut union: Vec<usize> = s1.factors.iter().chain(&s2.factors).copied().collect();
        union.sort_unstable();
        let dims: Vec<usize> = union.iter().map(|&f| s1.dims[f]).collect();
        let pos = |f: &usize| union.iter().position(|g| g == f).unwrap();
        let left = s1.factors.iter().map(pos).collect();
        let right = s2.factors.iter().map(pos).collect();
        Some(JointFactors {
            dims,
            union,
            left,
            right,
        })
    }

    pub fn joint_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Reduced state on the union of factors, in the common frame.
    pub fn reduced_state(&self, n1: &MatrixAlgebra, phi: &DensityState) -> DensityState {
        let full = &n1.structure().expect("structured algebra").dims;
        let rotated = match n1.frame() {
            Some(f) => phi.conjugate(&f.adjoint()),
            None => phi.clone(),
        };
        rotated.reduce(full, &self.union)
    }

    /// Local algebras on the joint space.
    pub fn local_algebras(&self) -> (MatrixAlgebra, MatrixAlgebra) {
        (
            MatrixAlgebra::tensor_factors(&self.dims, &self.left).expect("valid split"),
            MatrixAlgebra::tensor_factors(&self.dims, &self.right).expect("valid split"),
        )
    }

    /// Lifts an element of the joint space back to the full space of `n1`.
    pub fn lift(&self, n1: &MatrixAlgebra, x: &CMat) -> CMat {
        let full = &n1.structure().expect("structured algebra").dims;
        let big = linalg::embed_factors(x, full, &self.union);
        match n1.frame() {
            Some(f) => f.as_ref() * big * f.adjoint(),
            None => big,
        }
    }
}
