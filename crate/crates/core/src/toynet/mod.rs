//! A qubit chain with brickwork dynamics as a discrete net of local algebras.
//!
//! Site `i` at time step `k` is the cell centred at `(t, x) = (k, i)`. Layer
//! `k ≥ 1` applies two-site gates on the bonds `(0,1), (2,3), …` for odd `k`
//! and `(1,2), (3,4), …` for even `k`; unpaired edge sites idle. With
//! `L_k` the layer unitary, the Heisenberg frame after `k` steps is
//! `U(k) = L₁† ⋯ L_k†`, and the algebra of the lattice double cone with base
//! sites `[a, b]` on slice `k` is `U(k) (M_2^{⊗[a,b]} ⊗ 1) U(k)†`.
//!
//! Operators are moved between time slices gate by gate, which keeps every
//! step at `O(4^n)` work per gate instead of dense `O(8^n)` products.
//!
//! Site 0 is the most significant tensor factor.

mod axioms;
mod demo;

use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{causal_completion, Interval, Region};
use crate::linalg::{self, c, CMat};
use crate::qprob::{MatrixAlgebra, TensorSplit};

pub use axioms::{check_axioms, light_cone_violation, AxiomKind, AxiomReport, AxiomViolation, COMMUTATOR_TOL, ISOTONY_TOL};
pub use demo::{demo_state, weak_rccp_demo, DemoReport, DEMO_EPSILON, PAIR_BUDGET};

pub const MIN_SITES: usize = 4;
pub const MAX_SITES: usize = 10;

/// Slack when reading integers off a completed region.
const LATTICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    /// Every bond swaps its two qubits: free streaming.
    Swap,
    /// Independent Haar gates per layer and bond, drawn from the net seed.
    Random,
    /// Gates used in turn, one per layer: layer `k` uses `gates[(k − 1) % len]`.
    Given(Vec<CMat>),
}

impl std::fmt::Display for GateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GateSpec::Swap => write!(f, "swap"),
            GateSpec::Random => write!(f, "random"),
            GateSpec::Given(g) => write!(f, "given({})", g.len()),
        }
    }
}

/// A gate on the contiguous sites `start .. start + width`.
#[derive(Debug, Clone)]
pub struct Gate {
    pub start: usize,
    pub width: usize,
    pub matrix: CMat,
}

#[derive(Debug)]
pub struct NetModel {
    n_sites: usize,
    spec: GateSpec,
    seed: u64,
    cell_size: f64,
    /// Layer replaced by one gate acting on the whole chain.
    corrupted: Option<usize>,
    /// `frames[k] = U(k)`, filled on demand.
    frames: Mutex<Vec<Arc<CMat>>>,
}

pub fn swap_gate() -> CMat {
    let mut s = linalg::zeros(4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(i, j)] = linalg::ONE;
    }
    s
}

pub fn build_net(n_sites: usize, spec: GateSpec, seed: u64) -> Result<NetModel> {
    if !(MIN_SITES..=MAX_SITES).contains(&n_sites) {
        return Err(Error::SizeOutOfRange(format!(
            "{n_sites} sites; supported range is {MIN_SITES}..={MAX_SITES}"
        )));
    }
    if let GateSpec::Given(gates) = &spec {
        if gates.is_empty() {
            return Err(Error::Precondition("given gate list is empty".into()));
        }
        for g in gates {
            if g.nrows() != 4 || g.ncols() != 4 {
                return Err(Error::DimensionMismatch(4, g.nrows()));
            }
            let dev = linalg::unitarity_deviation(g);
            if dev > 1e-10 {
                return Err(Error::NotUnitary(dev));
            }
        }
    }
    let dim = 1usize << n_sites;
    Ok(NetModel {
        n_sites,
        spec,
        seed,
        cell_size: 1.0,
        corrupted: None,
        frames: Mutex::new(vec![Arc::new(linalg::identity(dim))]),
    })
}

impl NetModel {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> &GateSpec {
        &self.spec
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Centre of the cell of site `i` at step `k`, as `(t, x)`.
    pub fn cell_centre(&self, k: i64, i: i64) -> (f64, f64) {
        (k as f64 * self.cell_size, i as f64 * self.cell_size)
    }

    /// A copy whose layer `layer` is a single Haar gate on the whole chain,
    /// which breaks the light cone. Used as a negative control.
    pub fn corrupted(&self, layer: usize) -> NetModel {
        assert!(layer >= 1, "layers start at 1");
        NetModel {
            n_sites: self.n_sites,
            spec: self.spec.clone(),
            seed: self.seed,
            cell_size: self.cell_size,
            corrupted: Some(layer),
            frames: Mutex::new(vec![Arc::new(linalg::identity(self.dim()))]),
        }
    }

    fn bond_gate(&self, k: usize, start: usize) -> CMat {
        match &self.spec {
            GateSpec::Swap => swap_gate(),
            GateSpec::Random => {
                let seed = linalg::derive_seed(linalg::derive_seed(self.seed, k as u64), start as u64);
                linalg::haar_unitary(4, &mut linalg::rng_from_seed(seed))
            }
            GateSpec::Given(gates) => gates[(k - 1) % gates.len()].clone(),
        }
    }

    /// Gates of layer `k ≥ 1`.
    pub fn layer(&self, k: usize) -> Vec<Gate> {
        assert!(k >= 1, "layers start at 1");
        let n = self.n_sites;
        if self.corrupted == Some(k) {
            let seed = linalg::derive_seed(self.seed ^ 0xc0ff_ee00, k as u64);
            let matrix = linalg::haar_unitary(1 << n, &mut linalg::rng_from_seed(seed));
            return vec![Gate { start: 0, width: n, matrix }];
        }
        let first = if k % 2 == 1 { 0 } else { 1 };
        (first..n - 1)
            .step_by(2)
            .map(|s| Gate { start: s, width: 2, matrix: self.bond_gate(k, s) })
            .collect()
    }

    /// Dense `L_k`.
    pub fn layer_unitary(&self, k: usize) -> CMat {
        let mut m = linalg::identity(self.dim());
        for g in self.layer(k) {
            apply_left(self.n_sites, &mut m, &g, &g.matrix);
        }
        m
    }

    /// `U(k) = L₁† ⋯ L_k†`, shared between all algebras on slice `k`.
    pub fn frame(&self, k: usize) -> Arc<CMat> {
        let mut frames = self.frames.lock().expect("frame cache poisoned");
        while frames.len() <= k {
            let j = frames.len();
            let mut next = frames[j - 1].as_ref().clone();
            for g in self.layer(j) {
                apply_right(self.n_sites, &mut next, &g, &g.matrix.adjoint());
            }
            frames.push(Arc::new(next));
        }
        Arc::clone(&frames[k])
    }

    /// Re-expresses an operator given in the picture of slice `from` in the
    /// picture of slice `to`: returns `U(to)† U(from) · op · U(from)† U(to)`.
    pub fn transport(&self, op: &CMat, from: usize, to: usize) -> CMat {
        let mut o = op.clone();
        if from >= to {
            for j in (to + 1..=from).rev() {
                for g in self.layer(j) {
                    apply_left(self.n_sites, &mut o, &g, &g.matrix.adjoint());
                    apply_right(self.n_sites, &mut o, &g, &g.matrix);
                }
            }
        } else {
            for j in from + 1..=to {
                for g in self.layer(j) {
                    apply_left(self.n_sites, &mut o, &g, &g.matrix);
                    apply_right(self.n_sites, &mut o, &g, &g.matrix.adjoint());
                }
            }
        }
        o
    }

    /// Heisenberg image `U(k) · op · U(k)†` of a slice-`k` operator.
    pub fn heisenberg(&self, op: &CMat, k: usize) -> CMat {
        self.transport(op, k, 0)
    }

    /// Single-site operator embedded in the chain.
    pub fn site_operator(&self, site: usize, op: &CMat) -> CMat {
        linalg::embed_factors(op, &vec![2; self.n_sites], &[site])
    }

    /// `[op, q_site]` for a single-site `q`, without forming `q_site`.
    pub fn commutator_with_site(&self, op: &CMat, site: usize, q: &CMat) -> CMat {
        let g = Gate { start: site, width: 1, matrix: q.clone() };
        let mut left = op.clone();
        apply_left(self.n_sites, &mut left, &g, q);
        let mut right = op.clone();
        apply_right(self.n_sites, &mut right, &g, q);
        right - left
    }

    /// `𝒜(D)` for a lattice double cone.
    pub fn cone_algebra(&self, cone: LatticeCone) -> Result<LocalAlgebra> {
        let sites = cone.sites(self.n_sites);
        if sites.is_empty() {
            return Err(Error::OffLattice(format!(
                "base [{}, {}] does not meet the chain 0..{}",
                cone.a, cone.b, self.n_sites
            )));
        }
        let clipped = sites.len() as i64 != cone.b - cone.a + 1;
        let dims = vec![2; self.n_sites];
        let algebra = if cone.k == 0 {
            MatrixAlgebra::tensor_factors(&dims, &sites)?
        } else {
            let mut generators = vec![linalg::identity(self.dim())];
            for &s in &sites {
                for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let mut unit = linalg::zeros(2);
                    unit[(x, y)] = linalg::ONE;
                    generators.push(self.heisenberg(&self.site_operator(s, &unit), cone.k));
                }
            }
            MatrixAlgebra::structured_in_frame(TensorSplit::new(dims, sites.clone()), self.frame(cone.k), generators)
        };
        Ok(LocalAlgebra { cone, sites, clipped, algebra })
    }
}

/// Pauli `X` and `Z`, which generate `M_2`.
pub fn pauli_generators() -> [CMat; 2] {
    let mut x = linalg::zeros(2);
    x[(0, 1)] = linalg::ONE;
    x[(1, 0)] = linalg::ONE;
    let mut z = linalg::zeros(2);
    z[(0, 0)] = linalg::ONE;
    z[(1, 1)] = c(-1.0, 0.0);
    [x, z]
}

/// Base indices (block bits zero) and the stride of the block's lowest bit.
fn block_layout(n: usize, gate: &Gate) -> (Vec<usize>, usize) {
    assert!(gate.start + gate.width <= n, "gate outside the chain");
    let low = n - gate.start - gate.width;
    let stride = 1usize << low;
    let mut bases = Vec::with_capacity(1 << (n - gate.width));
    for hi in 0..(1usize << gate.start) {
        for lo in 0..stride {
            bases.push((hi << (n - gate.start)) | lo);
        }
    }
    (bases, stride)
}

/// `o ← (g on the gate's sites) · o`.
fn apply_left(n: usize, o: &mut CMat, gate: &Gate, g: &CMat) {
    let (bases, stride) = block_layout(n, gate);
    let block = 1usize << gate.width;
    let mut v = vec![linalg::ZERO; block];
    for col in 0..o.ncols() {
        for &base in &bases {
            for (j, slot) in v.iter_mut().enumerate() {
                *slot = o[(base + j * stride, col)];
            }
            for i in 0..block {
                let mut acc = linalg::ZERO;
                for (j, x) in v.iter().enumerate() {
                    acc += g[(i, j)] * x;
                }
                o[(base + i * stride, col)] = acc;
            }
        }
    }
}

/// `o ← o · (g on the gate's sites)`.
fn apply_right(n: usize, o: &mut CMat, gate: &Gate, g: &CMat) {
    let (bases, stride) = block_layout(n, gate);
    let block = 1usize << gate.width;
    let mut v = vec![linalg::ZERO; block];
    for row in 0..o.nrows() {
        for &base in &bases {
            for (j, slot) in v.iter_mut().enumerate() {
                *slot = o[(row, base + j * stride)];
            }
            for m in 0..block {
                let mut acc = linalg::ZERO;
                for (l, x) in v.iter().enumerate() {
                    acc += x * g[(l, m)];
                }
                o[(row, base + m * stride)] = acc;
            }
        }
    }
}

/// The double cone whose base is the cells of sites `[a, b]` on slice `k`:
/// `u ∈ (k − b − ½, k − a + ½)`, `v ∈ (k + a − ½, k + b + ½)` in units of
/// the cell size. The base may stick out of the chain; only on-chain sites
/// carry algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeCone {
    pub k: usize,
    pub a: i64,
    pub b: i64,
}

impl LatticeCone {
    pub fn new(k: usize, a: i64, b: i64) -> Result<LatticeCone> {
        if a > b {
            return Err(Error::OffLattice(format!("empty base [{a}, {b}]")));
        }
        Ok(LatticeCone { k, a, b })
    }

    pub fn null_intervals(&self) -> (Interval, Interval) {
        let (k, a, b) = (self.k as f64, self.a as f64, self.b as f64);
        (Interval::new(k - b - 0.5, k - a + 0.5), Interval::new(k + a - 0.5, k + b + 0.5))
    }

    pub fn region(&self) -> Region {
        let (u, v) = self.null_intervals();
        Region::DoubleCone { u, v }
    }

    /// The slab `t ∈ (k − h, k + h)` inside the base cells; its causal
    /// completion is this cone.
    pub fn inscribed_rect(&self, h: f64) -> Result<Region> {
        if !(h > 0.0 && h <= 0.5) {
            return Err(Error::Precondition(format!("half-height {h} outside (0, 1/2]")));
        }
        let k = self.k as f64;
        Region::rect((k - h, k + h), (self.a as f64 - 0.5 + h, self.b as f64 + 0.5 - h))
    }

    /// Reads the lattice cone off the causal completion of `region`.
    pub fn from_region(region: &Region) -> Result<LatticeCone> {
        let completion = match causal_completion(region) {
            Ok(c) => c,
            Err(Error::Disconnected(_)) => {
                return Err(Error::OffLattice("disconnected regions have no single lattice cone".into()))
            }
            Err(e) => return Err(e),
        };
        let Region::DoubleCone { u, v } = completion else {
            return Err(Error::Inconsistent("causal completion is not a double cone".into()));
        };
        if !u.is_bounded() || !v.is_bounded() {
            return Err(Error::OffLattice("unbounded region".into()));
        }
        let snap = |x: f64, what: &str| -> Result<i64> {
            let r = x.round();
            if (x - r).abs() > LATTICE_TOL {
                return Err(Error::OffLattice(format!("{what} = {x} is not an integer")));
            }
            Ok(r as i64)
        };
        let k = snap(0.5 * (u.hi + v.lo), "slice")?;
        let a = snap(0.5 * (v.lo - u.hi) + 0.5, "left site")?;
        let b = snap(0.5 * (v.hi - u.lo) - 0.5, "right site")?;
        let width = (b - a + 1) as f64;
        if (u.length() - width).abs() > LATTICE_TOL || (v.length() - width).abs() > LATTICE_TOL {
            return Err(Error::OffLattice(format!(
                "null extents {} x {} do not match a base of {width} cells",
                u.length(),
                v.length()
            )));
        }
        if k < 0 {
            return Err(Error::OffLattice(format!("slice {k} precedes the first step")));
        }
        LatticeCone::new(k as usize, a, b)
    }

    /// On-chain base sites.
    pub fn sites(&self, n_sites: usize) -> Vec<usize> {
        let lo = self.a.max(0);
        let hi = self.b.min(n_sites as i64 - 1);
        (lo..=hi).map(|s| s as usize).collect()
    }

    /// Exact inclusion of lattice cones.
    pub fn is_inside(&self, other: &LatticeCone) -> bool {
        let d = (self.k as i64 - other.k as i64).abs();
        other.a <= self.a - d && other.b >= self.b + d
    }
}

/// A lattice cone with its algebra.
#[derive(Debug, Clone)]
pub struct LocalAlgebra {
    pub cone: LatticeCone,
    pub sites: Vec<usize>,
    /// The base was cut down to the chain.
    pub clipped: bool,
    pub algebra: MatrixAlgebra,
}

/// `𝒜(V)` for a region whose causal completion is a lattice cone.
pub fn region_algebra(net: &NetModel, region: &Region) -> Result<LocalAlgebra> {
    net.cone_algebra(LatticeCone::from_region(region)?)
}
