//! Physical devices between preparation and detection: the fiber link, the
//! storage-loop memory and the single-photon detectors.

mod detector;
mod link;
mod memory;
mod noise;

pub use detector::{detect, DetectorModel};
pub use link::{transmit, LinkBudget, DEFAULT_ALPHA_DB_PER_KM, DEFAULT_ETA_C};
pub use memory::{EomState, MemoryConfig, Readout, StorageLoop};
pub use noise::{ChannelNoiseModel, NoiseFamily};
