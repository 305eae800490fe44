use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Distribution of the per-photon rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NoiseFamily {
    Constant { delta_theta: f64 },
    /// `δθ` uniform on `[mean − half_width, mean + half_width]`.
    UniformInterval { mean: f64, half_width: f64 },
}

/// How the channel rotates photons. A photon keeps the same `δθ` on both
/// passes, so a round trip rotates it by `2δθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ChannelNoiseModel {
    /// The same `δθ` for every photon.
    Uniform { delta_theta: f64 },
    PerPhoton(NoiseFamily),
}

impl Default for ChannelNoiseModel {
    fn default() -> Self {
        ChannelNoiseModel::Uniform { delta_theta: 0.0 }
    }
}

impl ChannelNoiseModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ChannelNoiseModel::Uniform { delta_theta } => delta_theta.is_finite(),
            ChannelNoiseModel::PerPhoton(NoiseFamily::Constant { delta_theta }) => delta_theta.is_finite(),
            ChannelNoiseModel::PerPhoton(NoiseFamily::UniformInterval { mean, half_width }) => {
                mean.is_finite() && half_width.is_finite() && half_width >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("malformed noise model {self:?}")))
        }
    }

    /// Mean rotation.
    pub fn nominal(&self) -> f64 {
        match *self {
            ChannelNoiseModel::Uniform { delta_theta } => delta_theta,
            ChannelNoiseModel::PerPhoton(NoiseFamily::Constant { delta_theta }) => delta_theta,
            ChannelNoiseModel::PerPhoton(NoiseFamily::UniformInterval { mean, .. }) => mean,
        }
    }

    pub fn sample_delta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ChannelNoiseModel::Uniform { delta_theta } => delta_theta,
            ChannelNoiseModel::PerPhoton(NoiseFamily::Constant { delta_theta }) => delta_theta,
            ChannelNoiseModel::PerPhoton(NoiseFamily::UniformInterval { mean, half_width }) => {
                if half_width == 0.0 {
                    mean
                } else {
                    rng.random_range(mean - half_width..=mean + half_width)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_families_do_not_vary() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = ChannelNoiseModel::Uniform { delta_theta: 0.03 };
        let c = ChannelNoiseModel::PerPhoton(NoiseFamily::Constant { delta_theta: 0.03 });
        for _ in 0..100 {
            assert_eq!(u.sample_delta(&mut rng), 0.03);
            assert_eq!(c.sample_delta(&mut rng), 0.03);
        }
    }

    #[test]
    fn interval_family_stays_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = ChannelNoiseModel::PerPhoton(NoiseFamily::UniformInterval { mean: 0.1, half_width: 0.05 });
        let draws: Vec<f64> = (0..10_000).map(|_| m.sample_delta(&mut rng)).collect();
        assert!(draws.iter().all(|d| (0.05..=0.15).contains(d)));
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.1).abs() < 0.002);
        assert!(ChannelNoiseModel::PerPhoton(NoiseFamily::UniformInterval { mean: 0.0, half_width: -1.0 })
            .validate()
            .is_err());
    }
}
