use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ChannelNoiseModel;
use crate::error::{invalid, Result};
use crate::photon::{LossSite, PhotonRecord};
use crate::quantum::{apply_rotation, ChannelRotation};

/// Standard telecom fiber loss.
pub const DEFAULT_ALPHA_DB_PER_KM: f64 = 0.2;
pub const DEFAULT_ETA_C: f64 = 0.95;

/// Efficiencies along one Alice–Bob link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// One-way distance in km.
    pub distance_km: f64,
    /// Fiber attenuation in dB/km.
    pub alpha: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub eta_d: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            distance_km: 0.0,
            alpha: DEFAULT_ALPHA_DB_PER_KM,
            eta_c: DEFAULT_ETA_C,
            eta_m: 1.0,
            eta_d: 1.0,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

impl LinkBudget {
    pub fn new(distance_km: f64, alpha: f64, eta_c: f64, eta_m: f64, eta_d: f64) -> Result<Self> {
        if !(distance_km >= 0.0 && distance_km.is_finite()) {
            return Err(invalid(format!("distance must be a finite nonnegative km value, got {distance_km}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be nonnegative, got {alpha}")));
        }
        unit("eta_c", eta_c)?;
        unit("eta_m", eta_m)?;
        unit("eta_d", eta_d)?;
        Ok(Self { distance_km, alpha, eta_c, eta_m, eta_d })
    }

    /// Zero-length link whose one-way gain is `eta`; coupling carries the
    /// whole loss, so the round-trip gain is `eta²`.
    pub fn from_total_efficiency(eta: f64) -> Result<Self> {
        Self::new(0.0, DEFAULT_ALPHA_DB_PER_KM, eta, 1.0, 1.0)
    }

    /// Fiber transmittance `10^(−αL/10)`.
    pub fn transmittance(&self) -> f64 {
        10f64.powf(-self.alpha * self.distance_km / 10.0)
    }

    /// One-way detection gain `η_t η_c η_m η_d`.
    pub fn q_ab(&self) -> f64 {
        self.transmittance() * self.eta_c * self.eta_m * self.eta_d
    }

    /// Round-trip gain `η_t² η_c² η_m² η_d`: two fiber passes and two
    /// memories, one detection.
    pub fn q_aba(&self) -> f64 {
        let t = self.transmittance() * self.eta_c * self.eta_m;
        t * t * self.eta_d
    }
}

/// One fiber pass. The photon's rotation is applied first, then fiber and
/// coupling losses are drawn in that order.
pub fn transmit<R: Rng + ?Sized>(
    mut photon: PhotonRecord,
    link: &LinkBudget,
    noise: &ChannelNoiseModel,
    rng: &mut R,
) -> PhotonRecord {
    if !photon.in_flight() {
        return photon;
    }
    let delta = *photon.channel_delta.get_or_insert_with(|| noise.sample_delta(rng));
    photon.state = apply_rotation(&photon.state, ChannelRotation::new(delta));
    photon.transits = photon.transits.saturating_add(1);

    let eta_t = link.transmittance();
    if eta_t < 1.0 && !rng.random_bool(eta_t) {
        photon.mark_lost(LossSite::Fiber);
    } else if link.eta_c < 1.0 && !rng.random_bool(link.eta_c) {
        photon.mark_lost(LossSite::Coupling);
    }
    photon
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::SequenceTag;
    use crate::quantum::PureState;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn photon() -> PhotonRecord {
        PhotonRecord::new(0, SequenceTag::S1, 0, 1, PureState::from_angles(FRAC_PI_4, 0.5))
    }

    #[test]
    fn fifty_km_is_ten_db() {
        let link = LinkBudget::new(50.0, 0.2, 1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(link.transmittance(), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn gains_follow_product_form() {
        let link = LinkBudget::new(14.71, 0.2, 0.95, 1.0, 1.0).unwrap();
        // 10^(-0.2942) · 0.95
        assert_abs_diff_eq!(link.q_ab(), 0.482_532, epsilon = 1e-5);
        let link = LinkBudget::new(3.0, 0.2, 0.9, 0.8, 0.7).unwrap();
        let t = link.transmittance();
        assert_abs_diff_eq!(link.q_ab(), t * 0.9 * 0.8 * 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(link.q_aba(), t * t * 0.81 * 0.64 * 0.7, epsilon = 1e-15);
        assert!(link.q_aba() <= link.q_ab());
    }

    #[test]
    fn rejects_out_of_range_efficiencies() {
        assert!(LinkBudget::new(1.0, 0.2, 1.1, 1.0, 1.0).is_err());
        assert!(LinkBudget::new(-1.0, 0.2, 1.0, 1.0, 1.0).is_err());
        assert!(LinkBudget::new(1.0, 0.2, 1.0, -0.1, 1.0).is_err());
    }

    #[test]
    fn zero_length_perfect_coupling_never_loses() {
        let link = LinkBudget::new(0.0, 0.2, 1.0, 1.0, 1.0).unwrap();
        let noise = ChannelNoiseModel::Uniform { delta_theta: 0.1 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = transmit(photon(), &link, &noise, &mut rng);
            assert!(!p.is_lost());
            assert_abs_diff_eq!(p.state.amplitude_angle(), FRAC_PI_4 + 0.1, epsilon = 1e-14);
        }
    }

    #[test]
    fn survival_frequency_matches_gain() {
        let link = LinkBudget::new(14.71, 0.2, 0.95, 1.0, 1.0).unwrap();
        let noise = ChannelNoiseModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let survived = (0..n).filter(|_| !transmit(photon(), &link, &noise, &mut rng).is_lost()).count();
        let q = link.q_ab();
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((survived as f64 / n as f64 - q).abs() < 5.0 * sigma);
    }
}
