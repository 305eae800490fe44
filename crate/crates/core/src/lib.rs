//! Receiver-device-independent quantum secure direct communication:
//! a photon-level protocol simulator and a closed-form secrecy-capacity
//! engine that cross-check each other.
//!
//! The simulator ([`protocol`]) prepares, transmits, stores, encodes and
//! measures individual photons through lossy, noisy [`devices`], optionally
//! under a detector-blinding [`adversary`]. The [`analysis`] module computes
//! capacities, thresholds and throughput from the closed-form error model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod analysis;
pub mod devices;
mod error;
pub mod photon;
pub mod protocol;
pub mod quantum;
pub mod seed;
pub mod tolerance;
pub mod verify;

pub use adversary::BlindingAttackParams;
pub use analysis::{CapacityParams, CapacityPoint, EfficiencyParams, ErrorBudget, GainModel};
pub use devices::{ChannelNoiseModel, LinkBudget, MemoryConfig};
pub use error::{Error, Result};
pub use photon::PhotonRecord;
pub use protocol::{BasisPolicy, ProtocolParams, SecurityCheckReport, ToleranceRule, Transcript};
pub use quantum::{BasisConfig, EncodeOp, Measurement, Outcome, PureState};
pub use seed::SeedTree;
