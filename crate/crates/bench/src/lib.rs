//! Shared fixtures for the benchmarks.

use qsdc_core::{BasisPolicy, LinkBudget, ProtocolParams};

/// The operating points plotted against efficiency.
pub const P1_VALUES: [f64; 6] = [0.001, 0.1, 0.2, 0.3, 0.4, 0.5];

/// A 10 km link at the default coupling efficiency, checking at `P1 = 0.1`.
pub fn protocol_fixture(r: usize, seed: u64) -> ProtocolParams {
    ProtocolParams {
        r,
        seed,
        policy: BasisPolicy::TargetP1 { target: 0.1 },
        link: LinkBudget { distance_km: 10.0, ..LinkBudget::default() },
        continue_after_abort: true,
        ..ProtocolParams::default()
    }
}

/// Evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let step = (hi - lo) / (points.max(2) - 1) as f64;
    (0..points).map(|k| lo + k as f64 * step).collect()
}
