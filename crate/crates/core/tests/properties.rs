//! Property tests for the library invariants. Every case draws its inputs
//! from a proptest-chosen seed so failures shrink to a reproducible seed.

use ccwb_core::bell::{bell_correlation, is_bell_correlated, two_qubit_chsh_oracle};
use ccwb_core::commoncause::{
    classical_verify_cc, quantum_verify_cc, reichenbach_r, synthesize_subprojection, ClassicalSpace, Event,
};
use ccwb_core::geometry::{
    blc, causal_completion, causal_complement, spacelike_separated, weak_cc_region, Point, Region,
};
use ccwb_core::linalg::{self, CMat};
use ccwb_core::qprob::{
    commuting_meet, correlation, is_product_state, lattice_join, lattice_meet, meet_power_limit, weight,
    DensityState, MatrixAlgebra, Projection,
};
use ccwb_core::toynet::{build_net, light_cone_violation, GateSpec, LatticeCone};
use ccwb_core::{states, Error, Tolerances};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn close(a: &CMat, b: &CMat, eps: f64) -> bool {
    linalg::max_abs(&(a - b)) <= eps
}

/// A random subset of `0..d` with size in `lo..=hi`.
fn subset(rng: &mut ChaCha8Rng, d: usize, lo: usize, hi: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d).collect();
    idx.shuffle(rng);
    let k = rng.random_range(lo..=hi);
    let mut s = idx[..k].to_vec();
    s.sort_unstable();
    s
}

/// Two projections diagonal in a common random basis, hence commuting.
fn commuting_pair(rng: &mut ChaCha8Rng, d: usize) -> (Projection, Projection, CMat) {
    let u = linalg::haar_unitary(d, rng);
    let a = Projection::diagonal(d, &subset(rng, d, 1, d - 1)).conjugate(&u);
    let b = Projection::diagonal(d, &subset(rng, d, 1, d - 1)).conjugate(&u);
    (a, b, u)
}

fn random_projection(rng: &mut ChaCha8Rng, d: usize) -> Projection {
    let u = linalg::haar_unitary(d, rng);
    Projection::diagonal(d, &subset(rng, d, 0, d)).conjugate(&u)
}

fn in_box(p: Point, u: (f64, f64), v: (f64, f64)) -> bool {
    let (pu, pv) = (p.t - p.x, p.t + p.x);
    u.0 < pu && pu < u.1 && v.0 < pv && pv < v.1
}

fn random_cone(rng: &mut ChaCha8Rng) -> Region {
    let u0 = rng.random_range(-10.0..10.0);
    let v0 = rng.random_range(-10.0..10.0);
    let (du, dv) = (rng.random_range(0.1..5.0), rng.random_range(0.1..5.0));
    Region::double_cone((u0, u0 + du), (v0, v0 + dv)).unwrap()
}

fn random_region(rng: &mut ChaCha8Rng) -> Region {
    match rng.random_range(0..3) {
        0 => random_cone(rng),
        1 => {
            let (t0, x0) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
            Region::rect((t0, t0 + rng.random_range(0.1..4.0)), (x0, x0 + rng.random_range(0.1..4.0))).unwrap()
        }
        _ => Region::union(vec![random_cone(rng), random_cone(rng)]).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn de_morgan(seed in any::<u64>(), d in 2usize..6) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let (a, b) = (random_projection(&mut rng, d), random_projection(&mut rng, d));
        let meet = lattice_meet(&a, &b, &t).unwrap();
        let dual = lattice_join(&a.complement(), &b.complement(), &t).unwrap().complement();
        prop_assert!(close(meet.matrix(), dual.matrix(), t.tol_proj));
    }

    #[test]
    fn meet_matches_power_limit(seed in any::<u64>()) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        // A shared vector keeps the meet nonzero for a generic pair.
        let shared = linalg::random_unit_vector(4, &mut rng);
        let extra = |rng: &mut ChaCha8Rng| linalg::random_unit_vector(4, rng);
        let a = Projection::onto(&[shared.clone(), extra(&mut rng)]);
        let b = Projection::onto(&[shared, extra(&mut rng)]);
        let meet = lattice_meet(&a, &b, &t).unwrap();
        let limit = meet_power_limit(a.matrix(), b.matrix(), 12);
        prop_assert_eq!(meet.rank(), 1);
        prop_assert!(close(meet.matrix(), &limit, 1e-8));
    }

    #[test]
    fn commuting_lattice_identities(seed in any::<u64>(), d in 2usize..7) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let (a, b, _) = commuting_pair(&mut rng, d);
        let meet = lattice_meet(&a, &b, &t).unwrap();
        prop_assert!(close(meet.matrix(), &(a.matrix() * b.matrix()), t.tol_proj));
        let join = lattice_join(&a, &b, &t).unwrap();
        let perp = commuting_meet(&a.complement(), &b.complement(), &t).unwrap();
        prop_assert!(close(&(join.matrix() + perp.matrix()), &linalg::identity(d), t.tol_proj));
    }

    #[test]
    fn weights_add_over_a_commuting_cause(seed in any::<u64>(), d in 3usize..8) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let u = linalg::haar_unitary(d, &mut rng);
        let diag = |s: &[usize]| Projection::diagonal(d, s).conjugate(&u);
        let (a, b, c) = (diag(&subset(&mut rng, d, 1, d - 1)), diag(&subset(&mut rng, d, 1, d - 1)), diag(&subset(&mut rng, d, 1, d - 1)));
        let phi = states::random_faithful(d, 0.1, &mut rng);
        let ab = commuting_meet(&a, &b, &t).unwrap();
        for x in [&a, &b, &ab] {
            let split = weight(&phi, &commuting_meet(x, &c, &t).unwrap())
                + weight(&phi, &commuting_meet(x, &c.complement(), &t).unwrap());
            prop_assert!((weight(&phi, x) - split).abs() <= t.tol_state);
        }
    }

    #[test]
    fn positive_correlation_passes_to_complements(seed in any::<u64>(), d in 3usize..8) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let (a, b, _) = commuting_pair(&mut rng, d);
        let phi = states::random_faithful(d, 0.05, &mut rng);
        let corr = correlation(&phi, &a, &b, &t).unwrap();
        prop_assume!(corr > t.cc_tol);
        prop_assert!(weight(&phi, &lattice_join(&a, &b, &t).unwrap()) < 1.0);
        prop_assert!(correlation(&phi, &a.complement(), &b.complement(), &t).unwrap() > 0.0);
    }

    #[test]
    fn faithful_states_weigh_every_projection(seed in any::<u64>(), d in 2usize..8) {
        let mut rng = linalg::rng_from_seed(seed);
        let phi = states::random_faithful(d, 0.01, &mut rng);
        let p = random_projection(&mut rng, d);
        prop_assume!(!p.is_zero());
        prop_assert!(weight(&phi, &p) > 0.0);
    }

    #[test]
    fn bicommutant_of_tensor_factors(left in 1usize..3, right in 1usize..3) {
        let t = tol();
        let dims = [left + 1, right + 1];
        for f in [0, 1] {
            let n = MatrixAlgebra::tensor_factors(&dims, &[f]).unwrap();
            let nn = n.commutant(&t).unwrap().commutant(&t).unwrap();
            prop_assert_eq!(nn.algebra_dim(), n.algebra_dim());
            prop_assert!(n.basis().iter().all(|x| nn.contains(x, t.tol_alg)));
        }
    }

    #[test]
    fn reichenbach_conditions_imply_correlation(
        pc in 0.05f64..0.95,
        hi_a in 0.5f64..0.95, lo_a in 0.05f64..0.5,
        hi_b in 0.5f64..0.95, lo_b in 0.05f64..0.5,
    ) {
        // Atoms indexed by (C, A, B) bits with A and B independent inside
        // C and inside C⊥: both screening conditions hold by construction.
        let t = tol();
        let mut w = vec![0.0; 8];
        for (atom, wt) in w.iter_mut().enumerate() {
            let (c, a, b) = (atom & 4 != 0, atom & 2 != 0, atom & 1 != 0);
            let (pa, pb, base) = if c { (hi_a, hi_b, pc) } else { (lo_a, lo_b, 1.0 - pc) };
            *wt = base * if a { pa } else { 1.0 - pa } * if b { pb } else { 1.0 - pb };
        }
        let space = ClassicalSpace::new(w).unwrap();
        let ev = |bit: usize| Event::from_atoms(&(0..8).filter(|i| i & bit != 0).collect::<Vec<_>>());
        let (a, b, c) = (ev(2), ev(1), ev(4));
        let cert = classical_verify_cc(&space, a, b, c, &t).unwrap();
        prop_assume!(cert.margin_a > t.cc_tol && cert.margin_b > t.cc_tol);
        prop_assert!(cert.verified);
        prop_assert!(space.correlation(a, b) > 0.0);
    }

    #[test]
    fn classical_and_quantum_verification_agree(seed in any::<u64>(), n in 3usize..9) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let space = ClassicalSpace::new(w.clone()).unwrap();
        let (sa, sb, sc) = (subset(&mut rng, n, 1, n - 1), subset(&mut rng, n, 1, n - 1), subset(&mut rng, n, 1, n - 1));
        let classical = classical_verify_cc(&space, Event::from_atoms(&sa), Event::from_atoms(&sb), Event::from_atoms(&sc), &t).unwrap();
        let phi = states::diagonal(&w);
        let quantum = quantum_verify_cc(&phi, &Projection::diagonal(n, &sa), &Projection::diagonal(n, &sb), &Projection::diagonal(n, &sc), &t).unwrap();
        prop_assert_eq!(classical.verified, quantum.verified);
        prop_assert_eq!(classical.is_strong, quantum.is_strong);
        prop_assert_eq!(classical.is_genuine, quantum.is_genuine);
        prop_assert!((classical.margin_a - quantum.margin_a).abs() < 1e-12);
        prop_assert!((classical.residual_screen_c - quantum.residual_screen_c).abs() < 1e-12);
    }

    #[test]
    fn r_bounds_and_strong_cause_soundness(seed in any::<u64>(), d in prop::sample::select(vec![6usize, 8, 9])) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        // Meet of rank m, one private dimension each for A and B, the rest
        // outside A ∨ B; the state leans towards the meet.
        let m = rng.random_range(2..=d - 3);
        let u = linalg::haar_unitary(d, &mut rng);
        let meet_idx: Vec<usize> = (0..m).collect();
        let a = Projection::diagonal(d, &[meet_idx.clone(), vec![m]].concat()).conjugate(&u);
        let b = Projection::diagonal(d, &[meet_idx.clone(), vec![m + 1]].concat()).conjugate(&u);
        let bias = Projection::diagonal(d, &meet_idx).conjugate(&u);
        let noise = states::random_faithful(d, 0.05, &mut rng);
        let rho = noise.matrix() * linalg::c(0.5, 0.0) + bias.matrix() * linalg::c(0.5 / m as f64, 0.0);
        let phi = DensityState::new(rho, &t).unwrap();
        let meet = commuting_meet(&a, &b, &t).unwrap();
        prop_assert_eq!(meet.rank(), m);
        prop_assume!(correlation(&phi, &a, &b, &t).unwrap() > t.cc_tol);
        let r = reichenbach_r(&phi, &a, &b, &t).unwrap();
        prop_assert!(1.0 - r.phi_a_or_b > 0.0);
        prop_assert!(r.r > 0.0 && r.r < r.phi_ab);
        if let Ok(c) = synthesize_subprojection(&phi, &meet, r.r, true, &t) {
            let cert = quantum_verify_cc(&phi, &a, &b, &c, &t).unwrap();
            prop_assert!(cert.residual_screen_c <= 10.0 * t.synth_tol);
            prop_assert!(cert.residual_screen_cperp <= 10.0 * t.synth_tol);
            prop_assert!(cert.is_strong);
        }
    }

    #[test]
    fn synthesized_subprojections_are_valid(seed in any::<u64>(), d in 3usize..9, frac in 0.05f64..0.95) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let phi = states::random_faithful(d, 0.05, &mut rng);
        let p = random_projection(&mut rng, d);
        prop_assume!(p.rank() >= 2);
        let r = frac * weight(&phi, &p);
        if let Ok(c) = synthesize_subprojection(&phi, &p, r, true, &t) {
            let m = c.matrix();
            prop_assert!(close(m, &m.adjoint(), t.tol_proj));
            prop_assert!(close(&(m * m), m, t.tol_proj));
            prop_assert!(close(&(m * p.matrix()), m, t.tol_proj));
            prop_assert!(close(&(p.matrix() * m), m, t.tol_proj));
            prop_assert!(!c.is_zero() && c.rank() < p.rank());
            prop_assert!((weight(&phi, &c) - r).abs() <= t.synth_tol);
        }
    }

    #[test]
    fn feasibility_matches_subset_enumeration(seed in any::<u64>(), d in 3usize..11, frac in 0.02f64..0.98) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let phi = states::diagonal(&w);
        let support = subset(&mut rng, d, 2, d);
        let p = Projection::diagonal(d, &support);
        let upper: f64 = support.iter().map(|&i| w[i]).sum();
        let r = frac * upper;
        // Rank-k weights fill [min, max] over k-subsets of the support.
        let m = support.len();
        let mut lo = vec![f64::INFINITY; m + 1];
        let mut hi = vec![f64::NEG_INFINITY; m + 1];
        for mask in 1u32..(1 << m) {
            let k = mask.count_ones() as usize;
            let s: f64 = (0..m).filter(|j| mask & (1 << j) != 0).map(|j| w[support[j]]).sum();
            lo[k] = lo[k].min(s);
            hi[k] = hi[k].max(s);
        }
        let near_edge = (1..m).any(|k| (r - lo[k]).abs() < 1e-9 || (r - hi[k]).abs() < 1e-9);
        prop_assume!(!near_edge);
        let feasible = (1..m).any(|k| lo[k] < r && r < hi[k]);
        match synthesize_subprojection(&phi, &p, r, true, &t) {
            Ok(c) => prop_assert!(feasible && (weight(&phi, &c) - r).abs() <= t.synth_tol),
            Err(Error::Infeasible(_)) => prop_assert!(!feasible),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn bell_value_bounds(seed in any::<u64>(), dims in prop::sample::select(vec![[2usize, 2], [2, 3]])) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let phi = states::random_mixed(dims[0] * dims[1], &mut rng);
        let n1 = MatrixAlgebra::tensor_factors(&dims, &[0]).unwrap();
        let n2 = MatrixAlgebra::tensor_factors(&dims, &[1]).unwrap();
        let rep = bell_correlation(&phi, &n1, &n2, 5, seed, &t).unwrap();
        prop_assert!(rep.beta >= 1.0 - 1e-12);
        prop_assert!(rep.beta <= std::f64::consts::SQRT_2 + t.bell_tol);
        if dims == [2, 2] {
            prop_assert!(rep.beta <= two_qubit_chsh_oracle(&phi).unwrap() + 1e-9);
        }
    }

    #[test]
    fn bell_correlated_states_are_not_products(seed in any::<u64>(), product in any::<bool>()) {
        let t = tol();
        let mut rng = linalg::rng_from_seed(seed);
        let phi = if product { states::random_product(&[2, 2], &mut rng) } else { states::random_pure(4, &mut rng) };
        let n1 = MatrixAlgebra::tensor_factors(&[2, 2], &[0]).unwrap();
        let n2 = MatrixAlgebra::tensor_factors(&[2, 2], &[1]).unwrap();
        if is_bell_correlated(&phi, &n1, &n2, &t).unwrap() {
            prop_assert!(!is_product_state(&phi, &n1, &n2, &t).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn completion_is_idempotent_and_monotone(seed in any::<u64>()) {
        let mut rng = linalg::rng_from_seed(seed);
        let v = random_region(&mut rng);
        if let Ok(c) = causal_completion(&v) {
            prop_assert_eq!(causal_completion(&c).unwrap(), c.clone());
            prop_assert!(v.is_subset_of(&c));
            let w = Region::union(vec![v.clone(), random_cone(&mut rng)]).unwrap();
            if let Ok(cw) = causal_completion(&w) {
                prop_assert!(c.is_subset_of(&cw));
            }
            prop_assert!(blc(&v).unwrap().is_subset_of(&blc(&c).unwrap()));
        }
    }

    #[test]
    fn double_cones_are_fixed_points(seed in any::<u64>()) {
        let mut rng = linalg::rng_from_seed(seed);
        let v = random_cone(&mut rng);
        prop_assert_eq!(causal_completion(&v).unwrap(), v.clone());
        prop_assert_eq!(causal_complement(&causal_complement(&v).unwrap()).unwrap(), v);
    }

    #[test]
    fn spacelike_separation_is_symmetric_and_sound(seed in any::<u64>()) {
        let mut rng = linalg::rng_from_seed(seed);
        let (a, b) = (random_region(&mut rng), random_region(&mut rng));
        let sep = spacelike_separated(&a, &b);
        prop_assert_eq!(sep, spacelike_separated(&b, &a));
        if sep {
            let pa = sample_points(&a, 50, &mut rng);
            let pb = sample_points(&b, 50, &mut rng);
            for p in &pa {
                for q in &pb {
                    let (dt, dx) = (p.t - q.t, p.x - q.x);
                    prop_assert!(dt.abs() < dx.abs());
                }
            }
        }
    }

    #[test]
    fn weak_cc_region_postconditions(seed in any::<u64>()) {
        let mut rng = linalg::rng_from_seed(seed);
        let (x0, gap) = (rng.random_range(-5.0..5.0), rng.random_range(0.0..12.0));
        let (r1, r2) = (rng.random_range(0.2..2.0), rng.random_range(0.2..2.0));
        let v1 = Region::cone_at(rng.random_range(-2.0..2.0), x0, r1).unwrap();
        let v2 = Region::cone_at(rng.random_range(-2.0..2.0), x0 + r1 + r2 + gap, r2).unwrap();
        prop_assume!(spacelike_separated(&v1, &v2));
        let w = weak_cc_region(&v1, &v2, 0.5).unwrap();
        prop_assert!(w.checks.all());
        let (h1, h2) = (v1.null_hull(), v2.null_hull());
        let past = |p: Point, h: &(ccwb_core::geometry::Interval, ccwb_core::geometry::Interval)| {
            let (pu, pv) = (p.t - p.x, p.t + p.x);
            pu < h.0.hi && pv < h.1.hi
        };
        for p in sample_points(&w.region, 200, &mut rng) {
            prop_assert!(past(p, &h1) || past(p, &h2));
            prop_assert!(!in_box(p, (h1.0.lo, h1.0.hi), (h1.1.lo, h1.1.hi)));
            prop_assert!(!in_box(p, (h2.0.lo, h2.0.hi), (h2.1.lo, h2.1.hi)));
        }
        let (cu, cv) = w.completion.null_hull();
        for p in sample_points(&v1, 100, &mut rng).into_iter().chain(sample_points(&v2, 100, &mut rng)) {
            prop_assert!(in_box(p, (cu.lo, cu.hi), (cv.lo, cv.hi)));
        }
    }
}

/// Uniform points of a bounded region by rejection from its (t, x) hull.
fn sample_points(r: &Region, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let (t, x) = r.tx_hull();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Point::new(rng.random_range(t.lo..t.hi), rng.random_range(x.lo..x.hi));
        if r.contains(p) {
            out.push(p);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn random_nets_respect_the_light_cone(seed in any::<u64>(), n in 4usize..7, k in 1usize..4) {
        let net = build_net(n, GateSpec::Random, seed).unwrap();
        prop_assert!(light_cone_violation(&net, k) <= 1e-10);
    }

    #[test]
    fn cones_and_their_rects_share_generators(seed in any::<u64>(), k in 0usize..4, a in 0i64..5, w in 0i64..3) {
        let net = build_net(6, GateSpec::Random, seed).unwrap();
        let cone = LatticeCone::new(k, a, (a + w).min(5)).unwrap();
        let from_cone = net.cone_algebra(cone).unwrap();
        let rect = cone.inscribed_rect(0.25).unwrap();
        let from_rect = ccwb_core::toynet::region_algebra(&net, &rect).unwrap();
        prop_assert_eq!(from_cone.cone, from_rect.cone);
        prop_assert!(from_cone.algebra.generators() == from_rect.algebra.generators());
        prop_assert!(from_cone.algebra.same_frame(&from_rect.algebra));
    }
}

#[test]
fn density_state_rejects_bad_input() {
    let t = tol();
    let m = linalg::diag_real(&[0.7, 0.5]);
    assert!(matches!(DensityState::new(m, &t), Err(Error::NotState { .. })));
}
