use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every module.
///
/// The defaults are tuned for double-precision eigensolvers on dimensions up
/// to a few hundred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub tol_herm: f64,
    pub tol_state: f64,
    pub tol_proj: f64,
    pub meet_tol: f64,
    pub comm_tol: f64,
    pub faithful_eps: f64,
    pub tol_alg: f64,
    pub cc_tol: f64,
    pub synth_tol: f64,
    pub bell_tol: f64,
    pub geo_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_herm: 1e-10,
            tol_state: 1e-10,
            tol_proj: 1e-9,
            meet_tol: 1e-8,
            comm_tol: 1e-9,
            faithful_eps: 1e-10,
            tol_alg: 1e-8,
            cc_tol: 1e-9,
            synth_tol: 1e-10,
            bell_tol: 1e-9,
            geo_tol: 1e-9,
        }
    }
}

impl Tolerances {
    /// Overrides a single tolerance by name. Returns `false` for unknown keys.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "tol_herm" => &mut self.tol_herm,
            "tol_state" => &mut self.tol_state,
            "tol_proj" => &mut self.tol_proj,
            "meet_tol" => &mut self.meet_tol,
            "comm_tol" => &mut self.comm_tol,
            "faithful_eps" => &mut self.faithful_eps,
            "tol_alg" => &mut self.tol_alg,
            "cc_tol" => &mut self.cc_tol,
            "synth_tol" => &mut self.synth_tol,
            "bell_tol" => &mut self.bell_tol,
            "geo_tol" => &mut self.geo_tol,
            _ => return false,
        };
        *slot = value;
        true
    }
}
