//! All-optical storage-loop memory.
//!
//! A photon enters with the EOM off, the EOM then switches on and the
//! photon circulates. Switching the EOM off again releases it with its
//! polarization flipped (`H ↔ V`), which a half-wave plate after the
//! loop undoes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::photon::{LossSite, PhotonRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EomState {
    On,
    Off,
}

/// Memory parameters used by the protocol runner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    pub per_trip_efficiency: f64,
    /// Lifetime expressed in round trips.
    pub max_round_trips: u32,
    /// Round trips spent in memory per protocol stage.
    pub trips_per_stage: u32,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self { per_trip_efficiency: 1.0, max_round_trips: 11, trips_per_stage: 0 }
    }
}

impl MemoryConfig {
    /// Per-trip efficiency chosen so that `trips` round trips retain
    /// `total_efficiency` overall.
    pub fn from_total(total_efficiency: f64, trips: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&total_efficiency) || trips == 0 {
            return Err(invalid("memory efficiency must lie in [0, 1] with at least one trip"));
        }
        Ok(Self {
            per_trip_efficiency: total_efficiency.powf(1.0 / f64::from(trips)),
            max_round_trips: trips,
            trips_per_stage: trips,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.per_trip_efficiency) {
            return Err(invalid(format!("per-trip efficiency {} outside [0, 1]", self.per_trip_efficiency)));
        }
        if self.max_round_trips == 0 {
            return Err(invalid("memory lifetime must be at least one round trip"));
        }
        Ok(())
    }

    /// Memory efficiency `η_m` seen by one storage stage.
    pub fn stage_efficiency(&self) -> f64 {
        if self.trips_per_stage > self.max_round_trips {
            0.0
        } else {
            self.per_trip_efficiency.powi(self.trips_per_stage as i32)
        }
    }

    pub fn new_loop(&self) -> StorageLoop {
        StorageLoop::new(self.per_trip_efficiency, self.max_round_trips)
    }

    /// Store, circulate for `trips_per_stage` trips, read out.
    pub fn hold<R: Rng + ?Sized>(&self, photon: PhotonRecord, rng: &mut R) -> Result<PhotonRecord> {
        if !photon.in_flight() {
            return Ok(photon);
        }
        let mut slot = self.new_loop();
        slot.store(photon)?;
        for _ in 0..self.trips_per_stage {
            slot.advance_trip(rng);
        }
        match slot.read_out() {
            Readout::Photon(p) => Ok(p),
            Readout::Lost(p) => Ok(p),
            Readout::Empty => unreachable!("slot was just filled"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Occupant {
    photon: PhotonRecord,
    trips: u32,
}

/// Result of switching the EOM off.
#[derive(Debug, Clone, PartialEq)]
pub enum Readout {
    Photon(PhotonRecord),
    /// The photon did not survive; its record carries the loss site.
    Lost(PhotonRecord),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageLoop {
    eom: EomState,
    per_trip_efficiency: f64,
    max_round_trips: u32,
    occupant: Option<Occupant>,
}

impl StorageLoop {
    pub fn new(per_trip_efficiency: f64, max_round_trips: u32) -> Self {
        Self { eom: EomState::Off, per_trip_efficiency, max_round_trips, occupant: None }
    }

    pub fn eom_state(&self) -> EomState {
        self.eom
    }

    pub fn is_occupied(&self) -> bool {
        self.occupant.is_some()
    }

    pub fn round_trips(&self) -> Option<u32> {
        self.occupant.as_ref().map(|o| o.trips)
    }

    pub fn store(&mut self, photon: PhotonRecord) -> Result<()> {
        if self.occupant.is_some() {
            return Err(Error::MemoryUsage("storage loop already holds a photon".into()));
        }
        self.occupant = Some(Occupant { photon, trips: 0 });
        self.eom = EomState::On;
        Ok(())
    }

    /// One more circulation. Loss and lifetime overrun both mark the photon
    /// lost in memory; the record stays in the loop until read out.
    pub fn advance_trip<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let Some(occ) = self.occupant.as_mut() else { return };
        if occ.photon.is_lost() {
            return;
        }
        occ.trips += 1;
        let overrun = occ.trips > self.max_round_trips;
        if overrun || (self.per_trip_efficiency < 1.0 && !rng.random_bool(self.per_trip_efficiency)) {
            occ.photon.mark_lost(LossSite::Memory);
        }
    }

    /// Releases the photon as it leaves the loop, before the corrector:
    /// its polarization is flipped.
    pub fn read_out_raw(&mut self) -> Readout {
        self.eom = EomState::Off;
        match self.occupant.take() {
            None => Readout::Empty,
            Some(Occupant { photon, .. }) if photon.is_lost() => Readout::Lost(photon),
            Some(Occupant { mut photon, .. }) => {
                photon.state = photon.state.flipped();
                Readout::Photon(photon)
            }
        }
    }

    /// Releases the photon and passes it through the corrector wave plate,
    /// restoring the stored state.
    pub fn read_out(&mut self) -> Readout {
        match self.read_out_raw() {
            Readout::Photon(mut p) => {
                p.state = p.state.flipped();
                Readout::Photon(p)
            }
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::SequenceTag;
    use crate::quantum::PureState;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn photon(angle: f64, phase: f64) -> PhotonRecord {
        PhotonRecord::new(3, SequenceTag::S2, 0, 1, PureState::from_angles(angle, phase))
    }

    #[test]
    fn horizontal_exits_vertical_before_correction() {
        let mut qm = StorageLoop::new(1.0, 11);
        qm.store(photon(0.0, 0.0)).unwrap();
        assert_eq!(qm.eom_state(), EomState::On);
        let Readout::Photon(p) = qm.read_out_raw() else { panic!() };
        assert_abs_diff_eq!(p.state.amplitude_angle(), FRAC_PI_2, epsilon = 1e-15);

        let mut qm = StorageLoop::new(1.0, 11);
        qm.store(photon(FRAC_PI_2, 0.0)).unwrap();
        let Readout::Photon(p) = qm.read_out_raw() else { panic!() };
        assert_abs_diff_eq!(p.state.amplitude_angle(), 0.0, epsilon = 1e-15);
        assert_eq!(qm.eom_state(), EomState::Off);
    }

    #[test]
    fn store_then_read_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=11 {
            let input = photon(0.6, 1.3);
            let mut qm = StorageLoop::new(1.0, 11);
            qm.store(input.clone()).unwrap();
            for _ in 0..k {
                qm.advance_trip(&mut rng);
            }
            let Readout::Photon(out) = qm.read_out() else { panic!("lost at k={k}") };
            assert!(out.state.approx_eq(&input.state, 1e-14));
        }
    }

    #[test]
    fn double_store_is_a_usage_error() {
        let mut qm = StorageLoop::new(1.0, 11);
        qm.store(photon(0.1, 0.0)).unwrap();
        assert!(matches!(qm.store(photon(0.1, 0.0)), Err(Error::MemoryUsage(_))));
    }

    #[test]
    fn lifetime_overrun_loses_photon() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut qm = StorageLoop::new(1.0, 11);
        qm.store(photon(0.1, 0.0)).unwrap();
        for _ in 0..12 {
            qm.advance_trip(&mut rng);
        }
        let Readout::Lost(p) = qm.read_out() else { panic!() };
        assert_eq!(p.loss, Some(LossSite::Memory));
    }

    #[test]
    fn empty_readout() {
        let mut qm = StorageLoop::new(1.0, 11);
        assert_eq!(qm.read_out(), Readout::Empty);
    }

    #[test]
    fn eleven_trips_retain_ninety_one_percent() {
        let cfg = MemoryConfig::from_total(0.91, 11).unwrap();
        assert_abs_diff_eq!(cfg.stage_efficiency(), 0.91, epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 200_000;
        let kept = (0..n)
            .filter(|_| !cfg.hold(photon(0.4, 0.0), &mut rng).unwrap().is_lost())
            .count();
        let sigma = (0.91 * 0.09 / n as f64).sqrt();
        assert!((kept as f64 / n as f64 - 0.91).abs() < 5.0 * sigma);
    }
}
