use serde::{Deserialize, Serialize};

/// Fraction of photons carrying the message: one of four sequences'
/// worth of a round trip.
pub const DUTY_FACTOR: f64 = 0.25;

/// Maximal distance quoted for the device-independent comparison protocol.
/// Echoed in reports only; that model is not computed here.
pub const DI_REFERENCE_DISTANCE_KM: f64 = 0.561;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyParams {
    /// Source repetition rate in Hz.
    pub r_rep: f64,
    pub p_s: f64,
    /// Entanglement-source efficiency of the comparison protocol.
    pub p_e: f64,
}

impl Default for EfficiencyParams {
    fn default() -> Self {
        Self { r_rep: 1e7, p_s: 1.0, p_e: 1e-3 }
    }
}

/// Secure bits per second. Negative capacity counts as zero throughput.
pub fn practical_efficiency(c_s: f64, eff: &EfficiencyParams) -> f64 {
    DUTY_FACTOR * eff.r_rep * eff.p_s * c_s.max(0.0)
}
