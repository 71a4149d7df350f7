//! Finite classical probability spaces with events as atom bitmasks.

use serde::{Deserialize, Serialize};

use super::{Cause, CommonCauseCertificate, ConditionValues};
use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// Largest atom count accepted by [`classical_closedness_audit`].
pub const AUDIT_CAP: usize = 12;

/// Hard limit imposed by the `u64` event representation.
pub const MAX_ATOMS: usize = 63;

/// An event: bit `i` set means atom `i` (0-based) belongs to the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Event(pub u64);

impl Event {
    pub fn from_atoms(atoms: &[usize]) -> Event {
        Event(atoms.iter().fold(0, |acc, &i| acc | (1u64 << i)))
    }

    pub fn atoms(self) -> Vec<usize> {
        (0..64).filter(|&i| self.0 >> i & 1 == 1).collect()
    }

    pub fn and(self, other: Event) -> Event {
        Event(self.0 & other.0)
    }

    pub fn or(self, other: Event) -> Event {
        Event(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Event) -> bool {
        self.0 & !other.0 == 0
    }
}

/// A probability measure on `n` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSpace {
    weights: Vec<f64>,
}

impl ClassicalSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() > MAX_ATOMS {
            return Err(Error::SizeOutOfRange(format!(
                "{} atoms; supported range is 1..={MAX_ATOMS}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::NotState { reason: format!("atom weight {w} is negative"), tol: 0.0 });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::NotState {
                reason: format!("atom weights sum to {total}"),
                tol: 1e-12,
            });
        }
        Ok(ClassicalSpace { weights })
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn full(&self) -> Event {
        Event(if self.weights.len() == 64 { u64::MAX } else { (1u64 << self.weights.len()) - 1 })
    }

    pub fn complement(&self, e: Event) -> Event {
        Event(!e.0 & self.full().0)
    }

    pub fn p(&self, e: Event) -> f64 {
        let mut bits = e.0 & self.full().0;
        let mut total = 0.0;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            total += self.weights[i];
            bits &= bits - 1;
        }
        total
    }

    pub fn correlation(&self, a: Event, b: Event) -> f64 {
        self.p(a.and(b)) - self.p(a) * self.p(b)
    }

    fn check_event(&self, e: Event) -> Result<()> {
        if e.0 & !self.full().0 != 0 {
            return Err(Error::Precondition(format!(
                "event {:#b} refers to atoms beyond {}",
                e.0,
                self.weights.len()
            )));
        }
        Ok(())
    }

    /// `A ∧ B`, `A ∧ B⊥`, `A⊥ ∧ B`, `A⊥ ∧ B⊥`.
    fn cells(&self, a: Event, b: Event) -> [Event; 4] {
        let na = self.complement(a);
        let nb = self.complement(b);
        [a.and(b), a.and(nb), na.and(b), na.and(nb)]
    }

    /// Every cell of the pair is a nonempty set of atoms.
    pub fn logically_independent(&self, a: Event, b: Event) -> bool {
        self.cells(a, b).iter().all(|c| c.0 != 0)
    }
}

pub fn classical_verify_cc(
    space: &ClassicalSpace,
    a: Event,
    b: Event,
    c: Event,
    tol: &Tolerances,
) -> Result<CommonCauseCertificate> {
    for e in [a, b, c] {
        space.check_event(e)?;
    }
    let p_c = space.p(c);
    // Computed from the complement's atoms rather than 1 − p(C).
    let p_cp = space.p(space.complement(c));
    for (name, w) in [("A", space.p(a)), ("B", space.p(b)), ("C", p_c), ("C⊥", p_cp)] {
        if w <= 0.0 {
            return Err(Error::ZeroWeight(format!("p({name}) = 0")));
        }
    }
    let ab = a.and(b);
    let values = ConditionValues::from_weights(
        p_c,
        space.p(ab.and(c)),
        space.p(a.and(c)),
        space.p(b.and(c)),
        space.p(ab),
        space.p(a),
        space.p(b),
    );
    let is_strong = c.is_subset_of(ab);
    let is_genuine = !c.is_subset_of(a) && !c.is_subset_of(b);
    Ok(CommonCauseCertificate::assemble(Cause::Classical(c), values, is_strong, is_genuine, tol.cc_tol))
}

fn trivial_causes(space: &ClassicalSpace, a: Event, b: Event) -> [Event; 8] {
    let base = [a, b, a.and(b), a.or(b)];
    let mut out = [Event(0); 8];
    for (i, e) in base.iter().enumerate() {
        out[2 * i] = *e;
        out[2 * i + 1] = space.complement(*e);
    }
    out
}

fn require_correlated(space: &ClassicalSpace, a: Event, b: Event, tol: &Tolerances) -> Result<()> {
    space.check_event(a)?;
    space.check_event(b)?;
    let corr = space.correlation(a, b);
    if corr <= tol.cc_tol {
        return Err(Error::Uncorrelated(corr));
    }
    Ok(())
}

/// Exhaustive search over all `2^n` events for verified common causes.
pub fn classical_find_cc(
    space: &ClassicalSpace,
    a: Event,
    b: Event,
    exclude_trivial: bool,
    tol: &Tolerances,
) -> Result<Vec<CommonCauseCertificate>> {
    require_correlated(space, a, b, tol)?;
    if space.atom_count() > 30 {
        return Err(Error::SizeOutOfRange(format!(
            "exhaustive search over {} atoms",
            space.atom_count()
        )));
    }
    let trivial = trivial_causes(space, a, b);
    let mut found = Vec::new();
    for bits in 0..=space.full().0 {
        let c = Event(bits);
        if exclude_trivial && trivial.contains(&c) {
            continue;
        }
        if space.p(c) <= 0.0 || space.p(space.complement(c)) <= 0.0 {
            continue;
        }
        let cert = classical_verify_cc(space, a, b, c, tol)?;
        if cert.verified {
            found.push(cert);
        }
    }
    Ok(found)
}

/// Result of [`classical_closedness_audit`].
#[derive(Debug, Clone, Serialize)]
pub struct ClosednessReport {
    pub atoms: usize,
    /// Correlated, logically independent unordered pairs examined.
    pub correlated_pairs: usize,
    pub covered: usize,
    pub uncovered: Vec<(Event, Event)>,
}

impl ClosednessReport {
    pub fn is_closed(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Checks every correlated pair for a nontrivial common cause.
///
/// A pair is audited when it is positively correlated and logically
/// independent (all four cells nonempty); other pairs are implications or
/// exclusions and have no room for a cause distinct from the trivial ones.
/// The existence test is a meet-in-the-middle version of
/// [`classical_find_cc`] and agrees with it (see the tests).
pub fn classical_closedness_audit(space: &ClassicalSpace, tol: &Tolerances) -> Result<ClosednessReport> {
    let n = space.atom_count();
    if n > AUDIT_CAP {
        return Err(Error::SizeOutOfRange(format!("{n} atoms exceeds audit cap {AUDIT_CAP}")));
    }
    let full = space.full().0;
    let mut correlated_pairs = 0;
    let mut covered = 0;
    let mut uncovered = Vec::new();
    for a_bits in 1..full {
        for b_bits in (a_bits + 1)..full {
            let (a, b) = (Event(a_bits), Event(b_bits));
            if !space.logically_independent(a, b) || space.correlation(a, b) <= tol.cc_tol {
                continue;
            }
            correlated_pairs += 1;
            if has_nontrivial_cause(space, a, b, tol)? {
                covered += 1;
            } else {
                uncovered.push((a, b));
            }
        }
    }
    Ok(ClosednessReport { atoms: n, correlated_pairs, covered, uncovered })
}

/// All sub-events of `cell` paired with their weights.
fn subset_sums(space: &ClassicalSpace, cell: Event) -> Vec<(f64, u64)> {
    let atoms = cell.atoms();
    let mut out = vec![(0.0, 0u64)];
    for i in atoms {
        let w = space.weights[i];
        let bit = 1u64 << i;
        let len = out.len();
        for j in 0..len {
            let (s, m) = out[j];
            out.push((s + w, m | bit));
        }
    }
    out
}

/// Existence of a verified, nontrivial cause for a correlated pair.
///
/// Writing `x_i = p(C ∧ cell_i)`, screening off on `C` is `x1 x4 = x2 x3`,
/// so the sub-event inside the larger of cells 1 and 4 is looked up by
/// weight instead of enumerated. Every candidate is confirmed by the
/// verifier.
fn has_nontrivial_cause(space: &ClassicalSpace, a: Event, b: Event, tol: &Tolerances) -> Result<bool> {
    let cells = space.cells(a, b);
    let trivial = trivial_causes(space, a, b);
    // Index of the looked-up cell and its partner in the product x1 x4.
    let (look, partner) = if cells[3].atoms().len() >= cells[0].atoms().len() { (3, 0) } else { (0, 3) };
    let mut table = subset_sums(space, cells[look]);
    table.sort_by(|x, y| x.0.total_cmp(&y.0));
    let lists: Vec<Vec<(f64, u64)>> = (0..4).map(|i| subset_sums(space, cells[i])).collect();

    let try_candidate = |bits: u64| -> Result<bool> {
        let c = Event(bits);
        if trivial.contains(&c) || space.p(c) <= 0.0 || space.p(space.complement(c)) <= 0.0 {
            return Ok(false);
        }
        Ok(classical_verify_cc(space, a, b, c, tol)?.verified)
    };

    for &(xp, mp) in &lists[partner] {
        for &(x2, m2) in &lists[1] {
            for &(x3, m3) in &lists[2] {
                let base = mp | m2 | m3;
                if xp > 0.0 {
                    let target = x2 * x3 / xp;
                    let window = (tol.cc_tol + 1e-15) / xp;
                    let lo = table.partition_point(|e| e.0 < target - window);
                    for &(xl, ml) in &table[lo..] {
                        if xl > target + window {
                            break;
                        }
                        if try_candidate(base | ml)? {
                            return Ok(true);
                        }
                    }
                } else {
                    for &(_, ml) in &table {
                        if try_candidate(base | ml)? {
                            return Ok(true);
                        }
                    }
                }
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// Eight atoms: C × {AB, AB⊥, A⊥B, A⊥B⊥}, then C⊥ × the same cells.
    pub(crate) fn eight_atom() -> (ClassicalSpace, Event, Event, Event) {
        let s = ClassicalSpace::new(vec![0.32, 0.08, 0.08, 0.02, 0.02, 0.08, 0.08, 0.32]).unwrap();
        let a = Event::from_atoms(&[0, 1, 4, 5]);
        let b = Event::from_atoms(&[0, 2, 4, 6]);
        let c = Event::from_atoms(&[0, 1, 2, 3]);
        (s, a, b, c)
    }

    #[test]
    fn designed_cause_verifies() {
        let (s, a, b, c) = eight_atom();
        assert!((s.correlation(a, b) - 0.09).abs() < 1e-12);
        let cert = classical_verify_cc(&s, a, b, c, &tol()).unwrap();
        assert!(cert.verified);
        assert!((cert.margin_a - 0.6).abs() < 1e-12);
        assert!(cert.residual_screen_c < 1e-15 && cert.residual_screen_cperp < 1e-15);
        let found = classical_find_cc(&s, a, b, true, &tol()).unwrap();
        assert!(found.iter().any(|f| matches!(f.cause, Cause::Classical(e) if e == c)));
    }

    #[test]
    fn degenerate_and_independent_causes() {
        let (s, a, b, _) = eight_atom();
        assert!(classical_verify_cc(&s, a, b, a, &tol()).unwrap().verified);
        // Uniform 4-atom space: C = {0, 1} is independent of A = {0, 2} ∧ B.
        let u = ClassicalSpace::new(vec![0.25; 4]).unwrap();
        let cert =
            classical_verify_cc(&u, Event::from_atoms(&[0, 2]), Event::from_atoms(&[0, 2]), Event::from_atoms(&[0, 1]), &tol())
                .unwrap();
        assert!(cert.margin_a.abs() < 1e-15 && !cert.verified);
    }

    #[test]
    fn incomplete_pair_has_no_nontrivial_cause() {
        let s = ClassicalSpace::new(vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let a = Event::from_atoms(&[0, 1]);
        let b = Event::from_atoms(&[0, 2]);
        assert!((s.correlation(a, b) - 0.15).abs() < 1e-12);
        assert!(classical_find_cc(&s, a, b, true, &tol()).unwrap().is_empty());
        assert!(!classical_find_cc(&s, a, b, false, &tol()).unwrap().is_empty());
        let report = classical_closedness_audit(&s, &tol()).unwrap();
        assert!(report.uncovered.contains(&(a, b)));
    }

    #[test]
    fn errors() {
        let s = ClassicalSpace::new(vec![0.25; 4]).unwrap();
        let a = Event::from_atoms(&[0, 1]);
        let b = Event::from_atoms(&[0, 2]);
        assert!(matches!(classical_find_cc(&s, a, b, true, &tol()), Err(Error::Uncorrelated(_))));
        assert!(matches!(
            classical_verify_cc(&s, a, b, s.full(), &tol()),
            Err(Error::ZeroWeight(_))
        ));
        assert!(ClassicalSpace::new(vec![0.5, 0.4]).is_err());
        let big = ClassicalSpace::new(vec![1.0 / 13.0; 13]).unwrap();
        assert!(matches!(classical_closedness_audit(&big, &tol()), Err(Error::SizeOutOfRange(_))));
    }

    #[test]
    fn two_atom_space_is_vacuously_closed() {
        let s = ClassicalSpace::new(vec![0.3, 0.7]).unwrap();
        let r = classical_closedness_audit(&s, &tol()).unwrap();
        assert_eq!(r.correlated_pairs, 0);
        assert!(r.is_closed());
    }

    #[test]
    fn audit_matches_exhaustive_search() {
        let mut rng = crate::linalg::rng_from_seed(11);
        let uniform = vec![0.25; 4];
        let mut spaces = vec![uniform, vec![0.4, 0.1, 0.1, 0.4]];
        for n in [5, 6] {
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let t: f64 = w.iter().sum();
            spaces.push(w.iter().map(|x| x / t).collect());
        }
        // Weights with many coincidences exercise the tolerance window.
        spaces.push(vec![0.125; 8]);
        for w in spaces {
            let s = ClassicalSpace::new(w).unwrap();
            let full = s.full().0;
            for a in 1..full {
                for b in (a + 1)..full {
                    let (a, b) = (Event(a), Event(b));
                    if !s.logically_independent(a, b) || s.correlation(a, b) <= 1e-9 {
                        continue;
                    }
                    let brute = !classical_find_cc(&s, a, b, true, &tol()).unwrap().is_empty();
                    assert_eq!(has_nontrivial_cause(&s, a, b, &tol()).unwrap(), brute, "{a:?} {b:?}");
                }
            }
        }
    }
}
