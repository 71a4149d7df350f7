//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Everything here works on `DMatrix<Complex64>`; dimensions stay small
//! (at most a few hundred), so plain dense routines are adequate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Seeded generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn zeros(d: usize) -> CMat {
    CMat::zeros(d, d)
}

pub fn diag_real(values: &[f64]) -> CMat {
    let d = values.len();
    let mut m = zeros(d);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c(*v, 0.0);
    }
    m
}

/// Largest entrywise deviation from self-adjointness.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in descending order; exact ties keep the solver's
/// original index order. Columns of the returned matrix are the matching
/// orthonormal eigenvectors.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// Projection onto the span of the selected eigenvector columns.
pub fn span_projection(vectors: &CMat, columns: impl IntoIterator<Item = usize>) -> CMat {
    let n = vectors.nrows();
    let mut p = zeros(n);
    for col in columns {
        let v = vectors.column(col);
        p += &v * v.adjoint();
    }
    p
}

/// Projection onto the span of arbitrary (not necessarily orthonormal) vectors.
pub fn projection_onto(vectors: &[CVec]) -> CMat {
    let basis = orthonormalize(vectors, 1e-12);
    let n = vectors.first().map_or(0, |v| v.len());
    let mut p = zeros(n);
    for v in &basis {
        p += v * v.adjoint();
    }
    p
}

/// Modified Gram–Schmidt; vectors whose residual falls below `tol` are dropped.
pub fn orthonormalize(vectors: &[CVec], tol: f64) -> Vec<CVec> {
    let mut out: Vec<CVec> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let coeff = b.dotc(&w);
                w -= b * coeff;
            }
        }
        let norm = w.norm();
        if norm > tol {
            out.push(w / c(norm, 0.0));
        }
    }
    out
}

/// Spectral operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMat) -> f64 {
    eigvalsh(m).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Spectral operator norm of an arbitrary matrix.
pub fn op_norm(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    eigvalsh(&g).first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `sign(H)` with zero eigenvalues mapped to `+1`.
pub fn sign_matrix(h: &CMat) -> CMat {
    let (values, vectors) = eigh(h);
    let n = values.len();
    let mut s = zeros(n);
    for (k, v) in values.iter().enumerate() {
        let col = vectors.column(k);
        let sign = if *v < 0.0 { -1.0 } else { 1.0 };
        s += (&col * col.adjoint()).scale(sign);
    }
    hermitian_part(&s)
}

/// Groups descending eigenvalues into clusters separated by more than `gap`.
pub fn eigen_clusters(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(last) if (values[*last.last().unwrap()] - v).abs() <= gap => last.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let m = random_gaussian_matrix(d, 1, rng);
    let v = CVec::from_column_slice(m.as_slice());
    let n = v.norm();
    v / c(n, 0.0)
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = random_gaussian_matrix(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn unitarity_deviation(u: &CMat) -> f64 {
    let d = u.nrows();
    max_abs(&(u.adjoint() * u - identity(d)))
}

/// Row-major multi-index bookkeeping for a tensor product of factors.
#[derive(Debug, Clone)]
pub struct TensorIndex {
    pub dims: Vec<usize>,
    strides: Vec<usize>,
}

impl TensorIndex {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = vec![1; dims.len()];
        for f in (0..dims.len().saturating_sub(1)).rev() {
            strides[f] = strides[f + 1] * dims[f + 1];
        }
        TensorIndex {
            dims: dims.to_vec(),
            strides,
        }
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn digit(&self, index: usize, factor: usize) -> usize {
        (index / self.strides[factor]) % self.dims[factor]
    }

    /// Splits every full index into (index within `keep`, index within the complement).
    pub fn split(&self, keep: &[usize]) -> Vec<(usize, usize)> {
        let comp: Vec<usize> = (0..self.dims.len()).filter(|f| !keep.contains(f)).collect();
        (0..self.total())
            .map(|i| {
                let k = keep
                    .iter()
                    .fold(0, |acc, &f| acc * self.dims[f] + self.digit(i, f));
                let c = comp
                    .iter()
                    .fold(0, |acc, &f| acc * self.dims[f] + self.digit(i, f));
                (k, c)
            })
            .collect()
    }

    pub fn sub_dim(&self, factors: &[usize]) -> usize {
        factors.iter().map(|&f| self.dims[f]).product()
    }
}

/// Partial trace keeping the listed factors (in the listed order).
pub fn partial_trace_keep(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let idx = TensorIndex::new(dims);
    let dk = idx.sub_dim(keep);
    let dc = idx.total() / dk;
    let split = idx.split(keep);
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dc];
    for (full, &(k, c)) in split.iter().enumerate() {
        groups[c].push((k, full));
    }
    let mut out = zeros(dk);
    for group in &groups {
        for &(ki, fi) in group {
            for &(kj, fj) in group {
                out[(ki, kj)] += m[(fi, fj)];
            }
        }
    }
    out
}

/// Inverse of [`partial_trace_keep`] up to normalization: `small ⊗ 1` on the complement.
pub fn embed_factors(small: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let idx = TensorIndex::new(dims);
    let d = idx.total();
    let split = idx.split(keep);
    let mut out = zeros(d);
    for i in 0..d {
        for j in 0..d {
            if split[i].1 == split[j].1 {
                out[(i, j)] = small[(split[i].0, split[j].0)];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_descending_and_reconstructs() {
        let mut rng = rng_from_seed(3);
        let g = random_gaussian_matrix(5, 5, &mut rng);
        let h = hermitian_part(&g);
        let (vals, vecs) = eigh(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let rebuilt = &vecs * diag_real(&vals).map(|z| z) * vecs.adjoint();
        assert!(max_abs(&(rebuilt - &h)) < 1e-10);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(11);
        let u = haar_unitary(6, &mut rng);
        assert!(unitarity_deviation(&u) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = diag_real(&[0.7, 0.3]);
        let b = diag_real(&[0.1, 0.2, 0.7]);
        let ab = kron(&a, &b);
        let ra = partial_trace_keep(&ab, &[2, 3], &[0]);
        let rb = partial_trace_keep(&ab, &[2, 3], &[1]);
        assert!(max_abs(&(ra - &a)) < 1e-14);
        assert!(max_abs(&(rb - &b)) < 1e-14);
    }

    #[test]
    fn embed_matches_kron() {
        let mut rng = rng_from_seed(5);
        let x = random_gaussian_matrix(2, 2, &mut rng);
        let left = embed_factors(&x, &[2, 3], &[0]);
        assert!(max_abs(&(left - kron(&x, &identity(3)))) < 1e-14);
        let right = embed_factors(&x, &[3, 2], &[1]);
        assert!(max_abs(&(right - kron(&identity(3), &x))) < 1e-14);
    }

    #[test]
    fn sign_of_zero_is_identity() {
        let s = sign_matrix(&zeros(3));
        assert!(max_abs(&(s - identity(3))) < 1e-14);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(9, 4), derive_seed(9, 4));
    }
}
