//! JSON-lines export. One `photon` record per prepared photon, in id
//! order, followed by one `summary` record.

use std::io::Write;

use serde::Serialize;

use super::run::{Transcript, TranscriptSummary};
use crate::photon::{DetectionOutcome, LossSite, Party, PhotonRecord, SequenceTag};

#[derive(Debug, Serialize)]
pub struct PhotonLine {
    pub id: u32,
    pub sequence: SequenceTag,
    pub position: u32,
    pub prep_index: u32,
    pub secret_op: Option<u8>,
    pub message_op: Option<u8>,
    pub delta_theta: Option<f64>,
    pub transits: u8,
    pub loss: Option<LossSite>,
    pub attacked: bool,
    pub eve_basis: Option<u32>,
    pub eve_bit: Option<bool>,
    pub measured_by: Option<Party>,
    pub basis_index: Option<u32>,
    /// `0`, `1`, or `null` for no click or unmeasured.
    pub outcome: Option<u8>,
    pub blinded: bool,
}

impl From<&PhotonRecord> for PhotonLine {
    fn from(p: &PhotonRecord) -> Self {
        Self {
            id: p.id,
            sequence: p.sequence,
            position: p.position,
            prep_index: p.prep_index,
            secret_op: p.secret_op.map(|o| u8::from(o.bit())),
            message_op: p.message_op.map(|o| u8::from(o.bit())),
            delta_theta: p.channel_delta,
            transits: p.transits,
            loss: p.loss,
            attacked: p.attacked,
            eve_basis: p.eve_basis,
            eve_bit: p.eve_bit,
            measured_by: p.detection.map(|d| d.party),
            basis_index: p.detection.map(|d| d.basis_index),
            outcome: match p.detection.map(|d| d.outcome) {
                Some(DetectionOutcome::Click(g)) => Some(g.as_u8()),
                _ => None,
            },
            blinded: p.detection.is_some_and(|d| d.blinded),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line<'a> {
    Photon(PhotonLine),
    Summary(&'a TranscriptSummary),
}

/// Writes the transcript as JSON lines.
pub fn write_jsonl<W: Write>(transcript: &Transcript, mut out: W) -> std::io::Result<()> {
    for p in &transcript.photons {
        serde_json::to_writer(&mut out, &Line::Photon(PhotonLine::from(p)))?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut out, &Line::Summary(&transcript.summary))?;
    out.write_all(b"\n")?;
    Ok(())
}
