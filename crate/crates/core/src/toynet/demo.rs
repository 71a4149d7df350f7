//! End-to-end weak common-cause construction on the chain.

use serde::Serialize;

use super::{LatticeCone, NetModel};
use crate::bell::{correlated_pairs, CorrelatedPair};
use crate::commoncause::{find_strong_cc_in, quantum_verify_cc, CommonCauseCertificate};
use crate::error::{Error, Result};
use crate::geometry::{past_times, spacelike_separated, tilde_regions, weak_cc_region, weak_cc_region_at, Region, TildeRegions, WeakCcRegion};
use crate::linalg;
use crate::qprob::{commuting_meet, DensityState};
use crate::states;
use crate::tol::Tolerances;

/// White-noise weight of [`demo_state`].
pub const DEMO_EPSILON: f64 = 0.05;
/// Correlated pairs tried before giving up.
pub const PAIR_BUDGET: usize = 20;
/// Half-height of the snapped slab.
const SLAB_HALF_HEIGHT: f64 = 0.25;
/// Height of the unsnapped slab reported next to the lattice one.
const CONTINUUM_MARGIN: f64 = 1.0;

/// `(1 − ε)|ψ⟩⟨ψ| + ε·1/2ⁿ` for a seeded Haar vector `ψ`.
pub fn demo_state(n_sites: usize, seed: u64, tol: &Tolerances) -> Result<DensityState> {
    let mut rng = linalg::rng_from_seed(seed);
    states::random_pure(1 << n_sites, &mut rng).depolarize(DEMO_EPSILON, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub d1: LatticeCone,
    pub d2: LatticeCone,
    pub d1_region: Region,
    pub d2_region: Region,
    /// The pair that produced the certificate.
    pub pair: CorrelatedPair,
    /// Rank of `A ∧ B`.
    pub meet_rank: usize,
    pub pairs_tried: usize,
    /// Pairs rejected because no strong cause exists in finite dimension
    /// (rank obstruction) or the pair is not logically independent.
    pub pairs_rejected: Vec<String>,
    /// The slab of the continuum construction, before snapping.
    pub continuum: Option<WeakCcRegion>,
    /// The slab snapped to a lattice slice.
    pub v: WeakCcRegion,
    pub v_cone: LatticeCone,
    pub v_sites: Vec<usize>,
    pub v_clipped: bool,
    /// `A`, `B` and `A ∧ B` lie in `𝒜(V)`.
    pub localized_in_v: bool,
    pub certificate: CommonCauseCertificate,
    /// An independent `quantum_verify_cc` call on the returned cause.
    pub reverified: bool,
    pub tilde: TildeRegions,
}

/// The latest slice `k ≥ 0` with a slab `t ∈ (k − h, k + h)` strictly below
/// where the two pasts start to overlap and not above either region.
fn snap_slice(overlap: f64, lowest: f64) -> Option<(usize, f64)> {
    let bound = overlap.min(lowest);
    let k = (bound - 1e-12).floor();
    if k < 0.0 {
        return None;
    }
    let h = SLAB_HALF_HEIGHT.min(0.5 * (overlap - k)).min(lowest - k);
    (h > 0.0).then_some((k as usize, h))
}

/// Localizes a strong common cause of a correlated pair from `𝒜(D1)`,
/// `𝒜(D2)` inside `𝒜(V)` for a lattice slab `V` in the common past.
///
/// Steps: correlated pairs from the spectral sweep, the continuum slab,
/// its lattice snap `V` with the region postconditions rechecked, `𝒜(V)`
/// via the causal completion of `V`, and strong-cause synthesis inside it.
/// Pairs whose meet is too small are skipped, up to [`PAIR_BUDGET`]. Every
/// step is deterministic, so the seed does not change the outcome.
pub fn weak_rccp_demo(
    net: &NetModel,
    state: &DensityState,
    d1: &Region,
    d2: &Region,
    _seed: u64,
    tol: &Tolerances,
) -> Result<DemoReport> {
    if state.dim() != net.dim() {
        return Err(Error::DimensionMismatch(net.dim(), state.dim()));
    }
    let (c1, c2) = (LatticeCone::from_region(d1)?, LatticeCone::from_region(d2)?);
    let (r1, r2) = (c1.region(), c2.region());
    if !spacelike_separated(&r1, &r2) {
        return Err(Error::NotSpacelike);
    }
    if !state.is_faithful() {
        return Err(Error::NotFaithful(state.min_eigenvalue()));
    }
    let (alg1, alg2) = (net.cone_algebra(c1)?, net.cone_algebra(c2)?);
    let pairs = correlated_pairs(state, &alg1.algebra, &alg2.algebra, PAIR_BUDGET, tol)?;
    if pairs.is_empty() {
        return Err(Error::NoCorrelatedPair);
    }

    let continuum = weak_cc_region(&r1, &r2, CONTINUUM_MARGIN).ok();
    let (overlap, lowest) = past_times(&r1, &r2)?;
    let (k, h) = snap_slice(overlap, lowest).ok_or_else(|| {
        Error::Precondition(format!("the common past starts at t = {overlap}, before the first slice"))
    })?;
    let v = weak_cc_region_at(&r1, &r2, -(k as f64 + h), 2.0 * h)?;
    let v_cone = LatticeCone::from_region(&v.region)?;
    if v_cone.k != k {
        return Err(Error::Inconsistent(format!("snapped slab completes to slice {}, expected {k}", v_cone.k)));
    }
    let alg_v = net.cone_algebra(v_cone)?;

    let mut rejected = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        let meet = commuting_meet(&pair.a, &pair.b, tol)?;
        let localized_in_v = [&pair.a, &pair.b, &meet]
            .iter()
            .all(|p| alg_v.algebra.contains(p.matrix(), tol.tol_alg));
        if !localized_in_v {
            return Err(Error::Inconsistent("A, B or A ∧ B falls outside 𝒜(V)".into()));
        }
        let cert = match find_strong_cc_in(state, &pair.a, &pair.b, &alg_v.algebra, tol) {
            Ok(cert) => cert,
            Err(e @ (Error::Infeasible(_) | Error::Precondition(_))) => {
                rejected.push(format!("pair {i}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let c = cert.projection().expect("quantum certificate").clone();
        let check = quantum_verify_cc(state, &pair.a, &pair.b, &c, tol)?;
        let reverified = check.verified && check.is_strong;
        if !reverified {
            return Err(Error::Inconsistent("certificate failed independent verification".into()));
        }
        let tilde = tilde_regions(&r1, &r2, &v.region)?;
        return Ok(DemoReport {
            d1: c1,
            d2: c2,
            d1_region: r1,
            d2_region: r2,
            pair: pair.clone(),
            meet_rank: meet.rank(),
            pairs_tried: i + 1,
            pairs_rejected: rejected,
            continuum,
            certificate: cert.with_localization(v.region.clone()),
            v,
            v_cone,
            v_sites: alg_v.sites.clone(),
            v_clipped: alg_v.clipped,
            localized_in_v,
            reverified,
            tilde,
        });
    }
    Err(Error::Infeasible(format!(
        "none of the {} correlated pairs admits a strong common cause: {}",
        pairs.len(),
        rejected.join("; ")
    )))
}
