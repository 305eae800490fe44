use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::photon::{DetectionOutcome, LossSite, PhotonRecord};
use crate::quantum::{sample_outcome, Measurement, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eta_d: f64,
    /// Probability of a spurious click in an empty slot. Zero by default.
    pub dark_count: f64,
    /// A blinded detector runs in linear mode and ignores single photons;
    /// its clicks come from the eavesdropper's pulses instead.
    pub blinded: bool,
}

impl DetectorModel {
    pub fn new(eta_d: f64) -> Self {
        Self { eta_d, dark_count: 0.0, blinded: false }
    }
}

/// Measures `photon` with `m`. Detector inefficiency is recorded on the
/// photon as a loss at the detector.
pub fn detect<R: Rng + ?Sized>(
    photon: &mut PhotonRecord,
    m: &Measurement,
    det: &DetectorModel,
    rng: &mut R,
) -> DetectionOutcome {
    let arrived = photon.in_flight() && !det.blinded;
    if arrived {
        if det.eta_d >= 1.0 || rng.random_bool(det.eta_d) {
            return DetectionOutcome::Click(sample_outcome(&photon.state, m, rng));
        }
        photon.mark_lost(LossSite::Detector);
    }
    if det.dark_count > 0.0 && rng.random_bool(det.dark_count) {
        let g = if rng.random_bool(0.5) { Outcome::Zero } else { Outcome::One };
        return DetectionOutcome::Click(g);
    }
    DetectionOutcome::NoClick
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::SequenceTag;
    use crate::quantum::{prepare, BasisConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(a: u32, n: u32) -> (PhotonRecord, BasisConfig) {
        let cfg = BasisConfig::with_n(n).unwrap();
        (PhotonRecord::new(0, SequenceTag::S1, 0, a, prepare(a, cfg).unwrap()), cfg)
    }

    #[test]
    fn perfect_detector_on_eigenstate_clicks_zero() {
        let (p, cfg) = setup(2, 5);
        let m = Measurement::new(2, cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let mut q = p.clone();
            assert_eq!(detect(&mut q, &m, &DetectorModel::new(1.0), &mut rng), DetectionOutcome::Click(Outcome::Zero));
        }
    }

    #[test]
    fn dead_detector_never_clicks() {
        let (p, cfg) = setup(2, 5);
        let m = Measurement::new(2, cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let mut q = p.clone();
            assert_eq!(detect(&mut q, &m, &DetectorModel::new(0.0), &mut rng), DetectionOutcome::NoClick);
            assert_eq!(q.loss, Some(LossSite::Detector));
        }
    }

    #[test]
    fn blinded_detector_ignores_single_photons() {
        let (p, cfg) = setup(1, 5);
        let m = Measurement::new(1, cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let det = DetectorModel { blinded: true, ..DetectorModel::new(1.0) };
        let mut q = p.clone();
        assert_eq!(detect(&mut q, &m, &det, &mut rng), DetectionOutcome::NoClick);
    }

    #[test]
    fn born_frequency_quarter() {
        // n = 3, a − w = 1: cos²(π/3) = 0.25
        let (p, cfg) = setup(2, 3);
        let m = Measurement::new(1, cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let trials = 1_000_000;
        let zeros = (0..trials)
            .filter(|_| {
                let mut q = p.clone();
                detect(&mut q, &m, &DetectorModel::new(1.0), &mut rng) == DetectionOutcome::Click(Outcome::Zero)
            })
            .count();
        let f = zeros as f64 / trials as f64;
        assert!((f - 0.25).abs() <= 5.0 * (0.25f64 * 0.75 / trials as f64).sqrt(), "{f}");
    }
}
