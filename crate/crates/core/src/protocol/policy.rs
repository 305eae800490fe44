//! How Bob's (and, in round two, Alice's) measurement indices relate to
//! the preparation indices they are checked against.
//!
//! The check statistic is driven entirely by the offset `Δ = (a − w) mod n`.
//! A policy fixes the distribution of `Δ`, which in turn fixes the
//! theoretical `P(g=0)`.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quantum::BasisConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BasisPolicy {
    /// Independent uniform choice; `P(g=0) = 1/2`.
    Uniform,
    /// Offsets mixed so that the expected `P(g=0)` equals `target`.
    TargetP1 { target: f64 },
}

/// Per-photon `P(g=0)` for offset `Δ`:
/// `|cos²θ + e^{i2πΔ/n} sin²θ|²`.
pub fn offset_probability(config: &BasisConfig, delta: u32) -> f64 {
    let (s, c) = config.theta().sin_cos();
    let (c2, s2) = (c * c, s * s);
    let phi = config.phase(delta);
    (c2 * c2 + s2 * s2 + 2.0 * c2 * s2 * phi.cos()).clamp(0.0, 1.0)
}

/// Distribution over `Δ ∈ [0, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetDistribution {
    weights: Vec<f64>,
}

impl OffsetDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(invalid("offset weights must be nonnegative and sum to 1"));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: u32) -> Self {
        Self { weights: vec![1.0 / f64::from(n); n as usize] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n(&self) -> u32 {
        self.weights.len() as u32
    }

    /// Theoretical `P(g=0)` averaged over offsets.
    pub fn expected_p0(&self, config: &BasisConfig) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(d, w)| w * offset_probability(config, d as u32))
            .sum()
    }

    /// Mean of `cos(2πΔ/n)`.
    pub fn mean_cos(&self) -> f64 {
        let n = self.weights.len() as f64;
        self.weights
            .iter()
            .enumerate()
            .map(|(d, w)| w * (2.0 * std::f64::consts::PI * d as f64 / n).cos())
            .sum()
    }

    pub fn sampler(&self) -> OffsetSampler {
        OffsetSampler { index: WeightedIndex::new(&self.weights).expect("weights validated") }
    }
}

/// Reusable sampler for an [`OffsetDistribution`].
#[derive(Debug, Clone)]
pub struct OffsetSampler {
    index: WeightedIndex<f64>,
}

impl OffsetSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.index.sample(rng) as u32
    }
}

impl BasisPolicy {
    pub fn offset_distribution(&self, config: &BasisConfig) -> Result<OffsetDistribution> {
        match *self {
            BasisPolicy::Uniform => Ok(OffsetDistribution::uniform(config.n())),
            BasisPolicy::TargetP1 { target } => target_distribution(config, target),
        }
    }
}

/// Offsets `Δ` and `n − Δ` give the same probability, so levels are indexed
/// by `k = 0..=⌊n/2⌋` and decrease in `k`. The target is hit by mixing the
/// two adjacent levels that bracket it, each level split evenly over its
/// offsets.
fn target_distribution(config: &BasisConfig, target: f64) -> Result<OffsetDistribution> {
    let n = config.n();
    let half = n / 2;
    let levels: Vec<f64> = (0..=half).map(|k| offset_probability(config, k)).collect();
    let lowest = levels[half as usize];
    if !(target >= lowest - 1e-12 && target <= 1.0 + 1e-12) {
        return Err(invalid(format!(
            "target P(g=0) = {target} unreachable with n = {n}: attainable range is [{lowest:.6}, 1]"
        )));
    }
    let target = target.clamp(lowest, 1.0);

    let mut weights = vec![0.0; n as usize];
    let mut put = |k: u32, w: f64| {
        if w == 0.0 {
            return;
        }
        let mirror = (n - k) % n;
        if mirror == k {
            weights[k as usize] += w;
        } else {
            weights[k as usize] += w / 2.0;
            weights[mirror as usize] += w / 2.0;
        }
    };

    if half == 0 || target >= levels[0] {
        put(0, 1.0);
    } else {
        let k = (0..half as usize)
            .find(|&k| levels[k] >= target && target >= levels[k + 1])
            .expect("target lies within the level range");
        let (hi, lo) = (levels[k], levels[k + 1]);
        let lambda = if hi > lo { (target - lo) / (hi - lo) } else { 1.0 };
        put(k as u32, lambda);
        put(k as u32 + 1, 1.0 - lambda);
    }
    OffsetDistribution::new(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn level_formula_matches_cos_squared_at_quarter_pi() {
        let cfg = BasisConfig::with_n(7).unwrap();
        for d in 0..7 {
            let expect = (PI * d as f64 / 7.0).cos().powi(2);
            assert_abs_diff_eq!(offset_probability(&cfg, d), expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn uniform_policy_gives_one_half() {
        for n in [3, 5, 6, 7, 8, 16, 31] {
            let cfg = BasisConfig::with_n(n).unwrap();
            let d = BasisPolicy::Uniform.offset_distribution(&cfg).unwrap();
            assert_abs_diff_eq!(d.expected_p0(&cfg), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn half_target_with_three_settings_is_uniform() {
        let cfg = BasisConfig::with_n(3).unwrap();
        let d = BasisPolicy::TargetP1 { target: 0.5 }.offset_distribution(&cfg).unwrap();
        for w in d.weights() {
            assert_abs_diff_eq!(*w, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn target_is_hit_exactly() {
        let cfg = BasisConfig::with_n(16).unwrap();
        for t in [0.0, 0.001, 0.1, 0.25, 0.4, 0.5, 0.6, 0.9, 1.0] {
            let d = BasisPolicy::TargetP1 { target: t }.offset_distribution(&cfg).unwrap();
            assert_abs_diff_eq!(d.expected_p0(&cfg), t, epsilon = 1e-9);
            assert_abs_diff_eq!(d.mean_cos(), 2.0 * t - 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn unreachable_target_is_rejected() {
        // n = 3 cannot go below cos²(π/3) = 0.25
        let cfg = BasisConfig::with_n(3).unwrap();
        assert!(BasisPolicy::TargetP1 { target: 0.1 }.offset_distribution(&cfg).is_err());
        assert!(BasisPolicy::TargetP1 { target: 1.2 }.offset_distribution(&cfg).is_err());
    }
}
