use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitStatus {
    Ok,
    Lost,
    Flipped,
}

/// Bob's payload next to what Alice decoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageFrame {
    pub payload: Vec<bool>,
    /// `None` where the carrying photon produced no click.
    pub decoded: Vec<Option<bool>>,
    pub status: Vec<BitStatus>,
}

impl MessageFrame {
    pub fn new(payload: Vec<bool>, decoded: Vec<Option<bool>>) -> Self {
        let status = payload
            .iter()
            .zip(&decoded)
            .map(|(p, d)| match d {
                None => BitStatus::Lost,
                Some(b) if b == p => BitStatus::Ok,
                Some(_) => BitStatus::Flipped,
            })
            .collect();
        Self { payload, decoded, status }
    }

    /// Bits Alice actually received, in order.
    pub fn received_bits(&self) -> Vec<bool> {
        self.decoded.iter().flatten().copied().collect()
    }

    pub fn count(&self, s: BitStatus) -> usize {
        self.status.iter().filter(|x| **x == s).count()
    }

    /// Flipped fraction among received bits.
    pub fn bit_error_rate(&self) -> f64 {
        let received = self.payload.len() - self.count(BitStatus::Lost);
        if received == 0 {
            0.0
        } else {
            self.count(BitStatus::Flipped) as f64 / received as f64
        }
    }
}

/// Where the payload comes from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageSource {
    #[default]
    Random,
    Zeros,
    Ones,
    Bits(Vec<bool>),
}
