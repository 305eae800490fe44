use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::entropy::entropy_unchecked;
use crate::devices::LinkBudget;
use crate::error::{invalid, Result};
use crate::protocol::{BasisPolicy, OffsetDistribution};
use crate::quantum::{apply_rotation, outcome_probability, prepare, BasisConfig, ChannelRotation, Measurement};
use crate::tolerance::ALGEBRAIC;

/// Where the detection gains come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GainModel {
    /// Bare total efficiency: `Q_AB = η`, `Q_ABA = η²`.
    Total { eta: f64 },
    Link(LinkBudget),
}

impl GainModel {
    pub fn q_ab(&self) -> f64 {
        match self {
            GainModel::Total { eta } => *eta,
            GainModel::Link(l) => l.q_ab(),
        }
    }

    pub fn q_aba(&self) -> f64 {
        match self {
            GainModel::Total { eta } => eta * eta,
            GainModel::Link(l) => l.q_aba(),
        }
    }
}

/// One operating point. Both check rounds share `p1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    pub p1: f64,
    pub theta: f64,
    /// Rotation per one-way trip, identical for every photon.
    pub delta_theta: f64,
    pub gain: GainModel,
}

impl CapacityParams {
    pub fn new(p1: f64, delta_theta: f64, gain: GainModel) -> Self {
        Self { p1, theta: FRAC_PI_4, delta_theta, gain }
    }

    pub fn with_eta(p1: f64, delta_theta: f64, eta: f64) -> Self {
        Self::new(p1, delta_theta, GainModel::Total { eta })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p1) {
            return Err(invalid(format!("P1 = {} outside [0, 1]", self.p1)));
        }
        if !self.delta_theta.is_finite() {
            return Err(invalid("delta_theta must be finite"));
        }
        if !(self.theta > 0.0 && self.theta < std::f64::consts::FRAC_PI_2) {
            return Err(invalid(format!("theta = {} outside (0, π/2)", self.theta)));
        }
        match self.gain {
            GainModel::Total { eta } if !(0.0..=1.0).contains(&eta) => {
                Err(invalid(format!("eta = {eta} outside [0, 1]")))
            }
            GainModel::Link(l) => LinkBudget::new(l.distance_km, l.alpha, l.eta_c, l.eta_m, l.eta_d).map(|_| ()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// State error after one trip.
    pub e_ab: f64,
    /// Loss-assignment error after one trip.
    pub e_ab_loss: f64,
    pub e_aba: f64,
    pub e_aba_loss: f64,
    pub total_ab: f64,
    pub total_aba: f64,
}

impl ErrorBudget {
    fn new(e_ab: f64, e_ab_loss: f64, e_aba: f64, e_aba_loss: f64) -> Self {
        Self { e_ab, e_ab_loss, e_aba, e_aba_loss, total_ab: e_ab + e_ab_loss, total_aba: e_aba + e_aba_loss }
    }
}

fn closed_form(p1: f64, delta: f64, q_ab: f64, q_aba: f64) -> ErrorBudget {
    let bias = (2.0 * p1 - 1.0).abs();
    let minority = p1.min(1.0 - p1);
    ErrorBudget::new(
        q_ab * bias * (1.0 - (2.0 * delta).cos()) / 2.0,
        (1.0 - q_ab) * minority,
        q_aba * bias * (1.0 - (4.0 * delta).cos()) / 2.0,
        (1.0 - q_aba) * minority,
    )
}

/// Error budget for `params`. At `θ = π/4` this is the closed form in
/// `P1`; other angles go through [`error_budget_from_offsets`] with the
/// `n = 16` target-P1 mixture.
pub fn error_budget(params: &CapacityParams) -> Result<ErrorBudget> {
    params.validate()?;
    if (params.theta - FRAC_PI_4).abs() <= ALGEBRAIC {
        return Ok(closed_form(params.p1, params.delta_theta, params.gain.q_ab(), params.gain.q_aba()));
    }
    let config = BasisConfig::new(16, params.theta)?;
    let offsets = BasisPolicy::TargetP1 { target: params.p1 }.offset_distribution(&config)?;
    error_budget_from_offsets(&offsets, &config, params.delta_theta, params.gain)
}

/// Per-photon evaluation over an offset distribution: every probability
/// comes from preparing and measuring states with the quantum core.
pub fn error_budget_from_offsets(
    offsets: &OffsetDistribution,
    config: &BasisConfig,
    delta_theta: f64,
    gain: GainModel,
) -> Result<ErrorBudget> {
    if offsets.n() != config.n() {
        return Err(invalid("offset distribution and basis configuration disagree on n"));
    }
    let m = Measurement::new(config.n(), *config)?;
    let mut shift = [0.0f64; 2];
    let mut minority = 0.0;
    for (delta, &w) in offsets.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let state = prepare(config.wrap_index(delta as i64), *config)?;
        let p = outcome_probability(&state, &m);
        minority += w * p.min(1.0 - p);
        for (round, s) in shift.iter_mut().enumerate() {
            let rotated = apply_rotation(&state, ChannelRotation::new(delta_theta * (round + 1) as f64));
            *s += w * (p - outcome_probability(&rotated, &m));
        }
    }
    let (q_ab, q_aba) = (gain.q_ab(), gain.q_aba());
    Ok(ErrorBudget::new(q_ab * shift[0].abs(), (1.0 - q_ab) * minority, q_aba * shift[1].abs(), (1.0 - q_aba) * minority))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPoint {
    pub params: CapacityParams,
    pub q_ab: f64,
    pub q_aba: f64,
    pub errors: ErrorBudget,
    pub i_ab: f64,
    /// Upper bound on what Eve learns.
    pub i_be: f64,
    /// May be negative; the point is secure only when positive.
    pub c_s: f64,
    pub e_s: Option<f64>,
}

/// `C_S = Q_ABA·(1 − h(E_ABA)) − Q_AB·h(E_AB)`.
pub fn secrecy_capacity(params: &CapacityParams) -> Result<CapacityPoint> {
    let errors = error_budget(params)?;
    let (q_ab, q_aba) = (params.gain.q_ab(), params.gain.q_aba());
    let i_ab = q_aba * (1.0 - entropy_unchecked(errors.total_aba.clamp(0.0, 1.0)));
    let i_be = q_ab * entropy_unchecked(errors.total_ab.clamp(0.0, 1.0));
    Ok(CapacityPoint { params: *params, q_ab, q_aba, errors, i_ab, i_be, c_s: i_ab - i_be, e_s: None })
}

/// Observed `P(g=0)` of a check round with no-clicks assigned, for
/// `round` trips of rotation `δθ` each. The loss term uses the side of
/// 0.5 that `P1` lies on, which is exact when every mixed offset level
/// lies on that side too.
pub fn expected_observed_p0(p1: f64, delta_theta: f64, gain: f64, round: u32) -> f64 {
    let clicked = (1.0 + (2.0 * p1 - 1.0) * (2.0 * delta_theta * f64::from(round)).cos()) / 2.0;
    let lost_zero = if p1 > 0.5 { 1.0 } else { 0.0 };
    gain * clicked + (1.0 - gain) * lost_zero
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn lossless_noiseless_is_error_free() {
        let e = error_budget(&CapacityParams::with_eta(0.3, 0.0, 1.0)).unwrap();
        assert_eq!(e, ErrorBudget::new(0.0, 0.0, 0.0, 0.0));
        assert_abs_diff_eq!(secrecy_capacity(&CapacityParams::with_eta(0.3, 0.0, 1.0)).unwrap().c_s, 1.0);
    }

    #[test]
    fn threshold_point_errors() {
        let e = error_budget(&CapacityParams::with_eta(0.1, 0.0, 0.4823)).unwrap();
        assert_abs_diff_eq!(e.total_ab, 0.05177, epsilon = 1e-12);
        assert_abs_diff_eq!(e.total_aba, 0.1 * (1.0 - 0.4823f64.powi(2)), epsilon = 1e-12);
        assert!(secrecy_capacity(&CapacityParams::with_eta(0.1, 0.0, 0.4823)).unwrap().c_s.abs() < 1e-3);
    }

    #[test]
    fn offsets_path_matches_closed_form() {
        let config = BasisConfig::with_n(16).unwrap();
        for p1 in [0.05, 0.1, 0.4, 0.5, 0.7, 0.93] {
            let offsets = BasisPolicy::TargetP1 { target: p1 }.offset_distribution(&config).unwrap();
            for delta in [0.0, PI / 40.0, 0.3, 1.1] {
                let gain = GainModel::Total { eta: 0.8 };
                let a = error_budget_from_offsets(&offsets, &config, delta, gain).unwrap();
                let b = error_budget(&CapacityParams::new(p1, delta, gain)).unwrap();
                assert_abs_diff_eq!(a.total_ab, b.total_ab, epsilon = 1e-12);
                assert_abs_diff_eq!(a.total_aba, b.total_aba, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn generic_theta_runs_through_offsets() {
        let mut params = CapacityParams::with_eta(0.2, 0.1, 0.9);
        params.theta = 0.6;
        let e = error_budget(&params).unwrap();
        assert!(e.total_ab > 0.0 && e.total_aba > 0.0);
    }

    #[test]
    fn link_gain_uses_round_trip() {
        let link = LinkBudget::new(0.5, 0.2, 0.95, 1.0, 1.0).unwrap();
        let p = secrecy_capacity(&CapacityParams::new(0.1, PI / 400.0, GainModel::Link(link))).unwrap();
        assert_abs_diff_eq!(p.q_aba, p.q_ab * p.q_ab, epsilon = 1e-15);
        assert!((p.c_s - 0.71314).abs() < 1e-4);
    }
}
