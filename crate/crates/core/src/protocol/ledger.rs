use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A bijection on `0..len`: output slot `j` takes input element `map[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self { map: (0..len).collect() }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..len).collect();
        map.shuffle(rng);
        Self { map }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || std::mem::replace(&mut seen[i], true) {
                return Err(invalid("not a permutation"));
            }
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn source(&self, slot: usize) -> usize {
        self.map[slot]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.map.len(), "permutation length mismatch");
        self.map.iter().map(|&i| items[i].clone()).collect()
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (slot, &src) in self.map.iter().enumerate() {
            inv[src] = slot;
        }
        Permutation { map: inv }
    }
}

/// Which round-two measurement index Alice pairs with each returned
/// check photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondRoundBasis {
    /// Drawn by the basis policy against the photon's own preparation
    /// index, read through Bob's announced permutation.
    #[default]
    Policy,
    /// Slot `j` of `S2'` measured with `b_j`, the `j`-th entry of `X2` in
    /// original order.
    Positional,
}

/// Index bookkeeping for one run. Photon ids double as transmission
/// positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceLedger {
    pub r: usize,
    pub n: u32,
    /// Preparation index of every photon, by id.
    pub x: Vec<u32>,
    /// Photon ids of S1, S2, S3 in sequence order.
    pub s1: Vec<u32>,
    pub s2: Vec<u32>,
    pub s3: Vec<u32>,
    /// `a_i`, `b_i`, `c_i`.
    pub x1: Vec<u32>,
    pub x2: Vec<u32>,
    pub x3: Vec<u32>,
    /// Bob's round-one measurement indices `w_m`.
    pub y1: Vec<u32>,
    /// Policy-drawn round-two measurement index for each S2 photon, in S2 order.
    pub s2_planned: Vec<u32>,
    pub second_round: SecondRoundBasis,
    /// Joint shuffle of `S2 ++ S3` into the return stream.
    pub shuffle: Option<Permutation>,
    /// Return stream: photon ids in the order Bob sends them back.
    pub returned: Vec<u32>,
    /// Slots of `S2'` within the return stream.
    pub s2_prime_slots: Vec<usize>,
    /// Slots of `S3'` within the return stream.
    pub s3_prime_slots: Vec<usize>,
    /// `d_i`: preparation indices of `S2'` in return order.
    pub x4: Vec<u32>,
    /// For each `S2'` photon, its position in the original S2.
    pub s2_prime_origin: Vec<usize>,
    /// For each `S3'` photon, its position in the original S3.
    pub s3_prime_origin: Vec<usize>,
    /// Alice's round-two measurement index for each `S2'` photon.
    pub round_two_indices: Vec<u32>,
}

impl SequenceLedger {
    pub fn round_one_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.x1.iter().copied().zip(self.y1.iter().copied())
    }

    /// `(d_i, measurement index)` pairs in return order.
    pub fn round_two_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.x4.iter().copied().zip(self.round_two_indices.iter().copied())
    }

    /// Restores the original `S2 ++ S3` order from the return stream.
    pub fn restore_order(&self) -> Option<Vec<u32>> {
        self.shuffle.as_ref().map(|p| p.inverse().apply(&self.returned))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_undoes_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let items: Vec<u32> = (100..164).collect();
        let p = Permutation::random(items.len(), &mut rng);
        assert_eq!(p.inverse().apply(&p.apply(&items)), items);
        assert_eq!(p.apply(&p.inverse().apply(&items)), items);
    }

    #[test]
    fn from_map_rejects_non_bijections() {
        assert!(Permutation::from_map(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_map(vec![0, 3, 1]).is_err());
        assert!(Permutation::from_map(vec![2, 0, 1]).is_ok());
    }
}
