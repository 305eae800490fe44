//! Detector blinding combined with a fake-state attack.
//!
//! Eve blinds the receiving detectors of a slot with probability `p1`.
//! A blinded detector ignores single photons and clicks deterministically
//! on Eve's trigger pulse: `g = 0` when Eve's basis is close to the
//! measurement basis, `g = 1` otherwise. Eve's basis is close with
//! probability `p2`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{invalid, Result};
use crate::photon::{DetectionOutcome, PhotonRecord};
use crate::quantum::{apply_encode, prepare, sample_outcome, BasisConfig, Measurement, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlindingAttackParams {
    /// Probability a slot is attacked.
    pub p1: f64,
    /// Probability Eve's basis is close to the measuring party's.
    pub p2: f64,
    /// Largest phase separation, in radians, that still counts as close.
    pub closeness: f64,
}

impl BlindingAttackParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let p = Self { p1, p2, closeness: FRAC_PI_2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p1) || !(0.0..=1.0).contains(&self.p2) {
            return Err(invalid(format!("attack probabilities must lie in [0, 1]: p1={}, p2={}", self.p1, self.p2)));
        }
        if !(self.closeness >= 0.0) {
            return Err(invalid("closeness threshold must be nonnegative"));
        }
        Ok(())
    }
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Whether two phase angles are within `threshold` of each other.
pub fn phases_close(a: f64, b: f64, threshold: f64) -> bool {
    circular_distance(a, b) <= threshold + 1e-12
}

/// Eve's basis relative to the basis that will measure the slot: drawn
/// from the close set with probability `p2`, otherwise from the far set,
/// uniformly within each.
pub fn draw_eve_basis<R: Rng + ?Sized>(
    target: u32,
    config: &BasisConfig,
    params: &BlindingAttackParams,
    rng: &mut R,
) -> u32 {
    let t = config.phase(target);
    let (close, far): (Vec<u32>, Vec<u32>) =
        (1..=config.n()).partition(|&e| phases_close(config.phase(e), t, params.closeness));
    let pick_close = far.is_empty() || rng.random_bool(params.p2);
    let pool = if pick_close { &close } else { &far };
    *pool.choose(rng).expect("close set contains the target")
}

/// Deterministic click of a blinded detector measuring with `m` when
/// Eve's trigger pulse carries basis `eve_basis`, after any encoding Bob
/// applied to the pulse.
pub fn blinded_click(eve_basis: u32, pulse_op: Option<crate::quantum::EncodeOp>, m: &Measurement, params: &BlindingAttackParams) -> Outcome {
    let config = m.config();
    let pulse = config.phase(eve_basis) + if pulse_op.is_some_and(|o| o.bit()) { PI } else { 0.0 };
    let target = config.phase(m.basis_index()) + if m.flip().bit() { PI } else { 0.0 };
    if phases_close(pulse, target, params.closeness) {
        Outcome::Zero
    } else {
        Outcome::One
    }
}

/// Outcome of an attacked slot. Returns the click and Eve's basis, which
/// is drawn here unless the photon already carries one.
pub fn blind_and_fake<R: Rng + ?Sized>(
    photon: &PhotonRecord,
    m: &Measurement,
    params: &BlindingAttackParams,
    rng: &mut R,
) -> (DetectionOutcome, u32) {
    let eve = photon
        .eve_basis
        .unwrap_or_else(|| draw_eve_basis(m.basis_index(), &m.config(), params, rng));
    let g = blinded_click(eve, photon.message_op, m, params);
    (DetectionOutcome::Click(g), eve)
}

/// What Eve remembers from the first pass: the basis of the pulse she
/// re-sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EveKnowledge {
    pub resent_basis: u32,
}

/// Eve intercepts the encoded pulse on its way back and projects it onto
/// the state she re-sent. `g = 1` reads as message bit 1.
pub fn second_pass_intercept<R: Rng + ?Sized>(
    encoded_photon: &PhotonRecord,
    knowledge: EveKnowledge,
    config: &BasisConfig,
    rng: &mut R,
) -> Result<bool> {
    let resent = prepare(knowledge.resent_basis, *config)?;
    let returned = match encoded_photon.message_op {
        Some(op) => apply_encode(&resent, op),
        None => resent,
    };
    let m = Measurement::new(knowledge.resent_basis, *config)?;
    Ok(sample_outcome(&returned, &m, rng) == Outcome::One)
}

/// `P(g=0)` the attacked check converges to: `(1 − p1)·P1 + p1·p2`.
pub fn predict_attacked_distribution(p1_target: f64, params: &BlindingAttackParams) -> f64 {
    (1.0 - params.p1) * p1_target + params.p1 * params.p2
}

/// The attacked `P(g=0)` with the `1/(2r)` normalization taken literally:
/// `(1 − p1)·P1/2 + p1·p2/2`. Reported for comparison only.
pub fn literal_attacked_distribution(p1_target: f64, params: &BlindingAttackParams) -> f64 {
    0.5 * (1.0 - params.p1) * p1_target + 0.5 * params.p1 * params.p2
}

/// Probability that a check over `m` photons aborts, i.e. that the observed
/// frequency lands more than `tolerance` away from `p1_target`, when each
/// outcome is `g = 0` with the attacked probability.
pub fn detection_power(p1_target: f64, params: &BlindingAttackParams, m: usize, tolerance: f64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("detection power needs at least one checked photon"));
    }
    let q = predict_attacked_distribution(p1_target, params).clamp(0.0, 1.0);
    let mf = m as f64;
    // Counts k with |k/m − P1| ≤ τ pass.
    let lo = (mf * (p1_target - tolerance) - 1e-9).ceil().max(0.0);
    let hi = (mf * (p1_target + tolerance) + 1e-9).floor().min(mf);
    if lo > hi {
        return Ok(1.0);
    }
    let bin = Binomial::new(q, m as u64).map_err(|e| invalid(e.to_string()))?;
    let below = if lo >= 1.0 { bin.cdf(lo as u64 - 1) } else { 0.0 };
    let above = bin.sf(hi as u64);
    Ok((below + above).clamp(0.0, 1.0))
}

/// Summary of an attacked run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcomeStats {
    pub predicted_p0: f64,
    pub literal_p0: f64,
    pub empirical_p0: f64,
    /// Fraction of intercepted message photons whose bit Eve read correctly.
    pub eve_information: f64,
    pub intercepted_bits: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::SequenceTag;
    use crate::quantum::EncodeOp;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn predictor_examples() {
        let p = |p1, p2| BlindingAttackParams::new(p1, p2).unwrap();
        assert_abs_diff_eq!(predict_attacked_distribution(0.3, &p(0.0, 0.7)), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(predict_attacked_distribution(0.3, &p(1.0, 0.0)), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(predict_attacked_distribution(0.2, &p(0.4, 0.25)), 0.22, epsilon = 1e-15);
        assert_abs_diff_eq!(predict_attacked_distribution(0.1, &p(0.5, 0.5)), 0.30, epsilon = 1e-15);
        // Literal form halves the honest part: at p1 = 0 it returns P1/2.
        assert_abs_diff_eq!(literal_attacked_distribution(0.3, &p(0.0, 0.5)), 0.15, epsilon = 1e-15);
    }

    #[test]
    fn half_target_with_half_closeness_is_invisible() {
        for p1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let params = BlindingAttackParams::new(p1, 0.5).unwrap();
            assert_abs_diff_eq!(predict_attacked_distribution(0.5, &params), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn eve_draw_hits_close_set_with_p2() {
        let cfg = BasisConfig::with_n(16).unwrap();
        let params = BlindingAttackParams::new(1.0, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let close = (0..n)
            .filter(|_| {
                let e = draw_eve_basis(5, &cfg, &params, &mut rng);
                phases_close(cfg.phase(e), cfg.phase(5), params.closeness)
            })
            .count();
        let f = close as f64 / n as f64;
        assert!((f - 0.3).abs() < 5.0 * (0.3f64 * 0.7 / n as f64).sqrt());
    }

    #[test]
    fn blinded_clicks_are_deterministic() {
        let cfg = BasisConfig::with_n(8).unwrap();
        let params = BlindingAttackParams::new(1.0, 1.0).unwrap();
        let m = Measurement::new(3, cfg).unwrap();
        assert_eq!(blinded_click(3, None, &m, &params), Outcome::Zero);
        assert_eq!(blinded_click(7, None, &m, &params), Outcome::One);
        // A phase-flipped pulse lands opposite.
        assert_eq!(blinded_click(3, Some(EncodeOp::U1), &m, &params), Outcome::One);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let ph = PhotonRecord::new(0, SequenceTag::S1, 0, 2, prepare(2, cfg).unwrap());
        for _ in 0..200 {
            let (o, e) = blind_and_fake(&ph, &m, &params, &mut rng);
            assert_eq!(o, DetectionOutcome::Click(Outcome::Zero));
            assert!(phases_close(cfg.phase(e), cfg.phase(3), FRAC_PI_2));
        }
    }

    #[test]
    fn eve_reads_phase_flip_exactly() {
        let cfg = BasisConfig::with_n(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for bit in [false, true] {
            let mut ph = PhotonRecord::new(0, SequenceTag::S3, 0, 2, prepare(2, cfg).unwrap());
            ph.message_op = Some(EncodeOp::from_bit(bit));
            for e in 1..=5 {
                let got = second_pass_intercept(&ph, EveKnowledge { resent_basis: e }, &cfg, &mut rng).unwrap();
                assert_eq!(got, bit);
            }
        }
    }

    #[test]
    fn detection_power_bounds() {
        let honest = BlindingAttackParams::new(0.0, 0.5).unwrap();
        let tau = crate::protocol::ToleranceRule::default().tolerance(10_000);
        let p = detection_power(0.5, &honest, 10_000, tau).unwrap();
        assert!(p <= 1e-6, "false positive {p}");
        let attack = BlindingAttackParams::new(0.5, 0.5).unwrap();
        let p = detection_power(0.1, &attack, 10_000, tau).unwrap();
        assert!(p > 0.999_999);
    }
}
