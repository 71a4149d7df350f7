//! Reichenbachian common causes: verification and synthesis, classical and
//! quantum.
//!
//! A common cause `C` of a positive correlation between `A` and `B` screens
//! off the correlation on both `C` and `C⊥` and raises the conditional
//! probability of each event:
//!
//! ```text
//! p(A∧B | C)  = p(A | C)  p(B | C)
//! p(A∧B | C⊥) = p(A | C⊥) p(B | C⊥)
//! p(A | C) > p(A | C⊥),   p(B | C) > p(B | C⊥)
//! ```
//!
//! Quantum events are projections; conditional probabilities are always
//! ratios of meets with commuting `C`, never a noncommutative conditioning.

pub mod classical;
pub mod genuine;
pub mod quantum;
pub mod synth;

use serde::Serialize;

use crate::geometry::Region;
use crate::qprob::Projection;

pub use classical::{
    classical_closedness_audit, classical_find_cc, classical_verify_cc, ClassicalSpace,
    ClosednessReport, Event,
};
pub use genuine::search_genuine_cc;
pub use quantum::{
    find_multiple_strong_cc, find_strong_cc, find_strong_cc_in, quantum_verify_cc,
    reichenbach_r, MultipleCauses, RValue,
};
pub use synth::{feasible_ranks, synthesize_subprojection, synthesize_subprojection_in};

/// The event playing the role of the cause.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Cause {
    Quantum(Projection),
    Classical(Event),
}

/// Conditional probabilities entering the four defining conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionValues {
    pub p_c: f64,
    pub p_ab_given_c: f64,
    pub p_a_given_c: f64,
    pub p_b_given_c: f64,
    pub p_ab_given_cperp: f64,
    pub p_a_given_cperp: f64,
    pub p_b_given_cperp: f64,
}

impl ConditionValues {
    /// Builds the conditional probabilities from joint weights.
    pub(crate) fn from_weights(
        p_c: f64,
        p_abc: f64,
        p_ac: f64,
        p_bc: f64,
        p_ab: f64,
        p_a: f64,
        p_b: f64,
    ) -> Self {
        let p_cp = 1.0 - p_c;
        ConditionValues {
            p_c,
            p_ab_given_c: p_abc / p_c,
            p_a_given_c: p_ac / p_c,
            p_b_given_c: p_bc / p_c,
            p_ab_given_cperp: (p_ab - p_abc) / p_cp,
            p_a_given_cperp: (p_a - p_ac) / p_cp,
            p_b_given_cperp: (p_b - p_bc) / p_cp,
        }
    }
}

/// Outcome of checking a candidate cause against the four conditions.
#[derive(Debug, Clone, Serialize)]
pub struct CommonCauseCertificate {
    pub cause: Cause,
    pub conditions: ConditionValues,
    /// `|p(A∧B|C) − p(A|C) p(B|C)|`.
    pub residual_screen_c: f64,
    /// `|p(A∧B|C⊥) − p(A|C⊥) p(B|C⊥)|`.
    pub residual_screen_cperp: f64,
    /// `p(A|C) − p(A|C⊥)`.
    pub margin_a: f64,
    /// `p(B|C) − p(B|C⊥)`.
    pub margin_b: f64,
    /// `C ≤ A ∧ B`.
    pub is_strong: bool,
    /// Neither `C ≤ A` nor `C ≤ B`.
    pub is_genuine: bool,
    pub localization: Option<Region>,
    /// Residuals within `cc_tol` and both margins above `cc_tol`.
    pub verified: bool,
}

impl CommonCauseCertificate {
    pub(crate) fn assemble(
        cause: Cause,
        conditions: ConditionValues,
        is_strong: bool,
        is_genuine: bool,
        cc_tol: f64,
    ) -> Self {
        let v = &conditions;
        let residual_screen_c = (v.p_ab_given_c - v.p_a_given_c * v.p_b_given_c).abs();
        let residual_screen_cperp =
            (v.p_ab_given_cperp - v.p_a_given_cperp * v.p_b_given_cperp).abs();
        let margin_a = v.p_a_given_c - v.p_a_given_cperp;
        let margin_b = v.p_b_given_c - v.p_b_given_cperp;
        let verified = residual_screen_c <= cc_tol
            && residual_screen_cperp <= cc_tol
            && margin_a > cc_tol
            && margin_b > cc_tol;
        CommonCauseCertificate {
            cause,
            conditions,
            residual_screen_c,
            residual_screen_cperp,
            margin_a,
            margin_b,
            is_strong,
            is_genuine,
            localization: None,
            verified,
        }
    }

    pub fn with_localization(mut self, region: Region) -> Self {
        self.localization = Some(region);
        self
    }

    pub fn projection(&self) -> Option<&Projection> {
        match &self.cause {
            Cause::Quantum(p) => Some(p),
            Cause::Classical(_) => None,
        }
    }
}
