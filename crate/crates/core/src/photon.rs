//! Per-photon life history shared by the device models and the protocol.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{EncodeOp, Outcome, PureState};

/// Which of Alice's three sequences a photon was assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SequenceTag {
    S1,
    S2,
    S3,
}

/// Where a lost photon disappeared. Exactly one site per lost photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossSite {
    Fiber,
    Coupling,
    Memory,
    Detector,
}

impl LossSite {
    pub const ALL: [LossSite; 4] = [LossSite::Fiber, LossSite::Coupling, LossSite::Memory, LossSite::Detector];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectionOutcome {
    Click(Outcome),
    NoClick,
}

impl DetectionOutcome {
    pub fn clicked(self) -> bool {
        matches!(self, DetectionOutcome::Click(_))
    }
}

/// The single measurement a photon undergoes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub party: Party,
    pub basis_index: u32,
    pub outcome: DetectionOutcome,
    /// Outcome forced by a blinded detector rather than a Born draw.
    pub blinded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonRecord {
    /// Emission order, which is also the position Alice announces.
    pub id: u32,
    pub sequence: SequenceTag,
    /// Index within its sequence.
    pub position: u32,
    pub prep_index: u32,
    /// Alice's masking operation (S3 only).
    pub secret_op: Option<EncodeOp>,
    /// Bob's message operation (S3 only).
    pub message_op: Option<EncodeOp>,
    /// State as it left Alice's source, masking included.
    pub sent_state: PureState,
    /// Current state.
    pub state: PureState,
    /// Per-photon channel rotation, drawn on the first transit.
    pub channel_delta: Option<f64>,
    pub transits: u8,
    pub loss: Option<LossSite>,
    pub attacked: bool,
    pub eve_basis: Option<u32>,
    pub eve_bit: Option<bool>,
    pub detection: Option<Detection>,
}

impl PhotonRecord {
    pub fn new(id: u32, sequence: SequenceTag, position: u32, prep_index: u32, state: PureState) -> Self {
        Self {
            id,
            sequence,
            position,
            prep_index,
            secret_op: None,
            message_op: None,
            sent_state: state,
            state,
            channel_delta: None,
            transits: 0,
            loss: None,
            attacked: false,
            eve_basis: None,
            eve_bit: None,
            detection: None,
        }
    }

    pub fn is_lost(&self) -> bool {
        self.loss.is_some()
    }

    /// Still travelling as a single photon: neither lost nor replaced by
    /// an eavesdropper's pulse.
    pub fn in_flight(&self) -> bool {
        self.loss.is_none() && !self.attacked
    }

    pub fn mark_lost(&mut self, site: LossSite) {
        if self.loss.is_none() {
            self.loss = Some(site);
        }
    }

    pub fn record_detection(&mut self, detection: Detection) -> Result<()> {
        if self.detection.is_some() {
            return Err(Error::ProtocolViolation(format!("photon {} measured twice", self.id)));
        }
        self.detection = Some(detection);
        Ok(())
    }
}
