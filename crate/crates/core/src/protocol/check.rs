use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::photon::DetectionOutcome;
use crate::quantum::Outcome;
use crate::tolerance::{ALGEBRAIC, CHECK_EPSILON};

/// How far the observed `P(g=0)` may stray from theory before the
/// parties abort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ToleranceRule {
    /// `τ = sqrt(ln(2/ε) / 2m)`; an honest run aborts with probability at most `ε`.
    Hoeffding { epsilon: f64 },
    Fixed { tolerance: f64 },
}

impl Default for ToleranceRule {
    fn default() -> Self {
        ToleranceRule::Hoeffding { epsilon: CHECK_EPSILON }
    }
}

impl ToleranceRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ToleranceRule::Hoeffding { epsilon } if epsilon > 0.0 && epsilon < 1.0 => Ok(()),
            ToleranceRule::Fixed { tolerance } if tolerance >= 0.0 => Ok(()),
            other => Err(invalid(format!("invalid tolerance rule {other:?}"))),
        }
    }

    pub fn tolerance(&self, m: usize) -> f64 {
        match *self {
            ToleranceRule::Hoeffding { epsilon } => ((2.0 / epsilon).ln() / (2.0 * m.max(1) as f64)).sqrt(),
            ToleranceRule::Fixed { tolerance } => tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Abort,
}

/// Outcome recorded for a photon that produced no click: `g = 1` when
/// its theoretical `P(g=0)` is at most one half, `g = 0` otherwise.
/// Probabilities within rounding of one half count as one half.
pub fn assign_no_click(p_zero: f64) -> Outcome {
    if p_zero <= 0.5 + ALGEBRAIC {
        Outcome::One
    } else {
        Outcome::Zero
    }
}

/// One checked photon: its theoretical `P(g=0)` and what was observed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSample {
    pub p_zero: f64,
    pub outcome: DetectionOutcome,
}

impl CheckSample {
    /// The outcome that enters the statistics.
    pub fn effective(&self) -> Outcome {
        match self.outcome {
            DetectionOutcome::Click(g) => g,
            DetectionOutcome::NoClick => assign_no_click(self.p_zero),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityCheckReport {
    pub round: u8,
    pub m: usize,
    pub clicks: usize,
    pub theoretical_p0: f64,
    pub empirical_p0: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl SecurityCheckReport {
    pub fn from_samples(round: u8, samples: &[CheckSample], rule: &ToleranceRule) -> Result<Self> {
        let m = samples.len();
        if m == 0 {
            return Err(Error::ProtocolViolation(format!("round {round} check has no photons")));
        }
        let theoretical_p0 = samples.iter().map(|s| s.p_zero).sum::<f64>() / m as f64;
        let zeros = samples.iter().filter(|s| s.effective().is_zero()).count();
        let clicks = samples.iter().filter(|s| s.outcome.clicked()).count();
        let empirical_p0 = zeros as f64 / m as f64;
        let deviation = (empirical_p0 - theoretical_p0).abs();
        let tolerance = rule.tolerance(m);
        let verdict = if deviation <= tolerance { Verdict::Pass } else { Verdict::Abort };
        Ok(Self { round, m, clicks, theoretical_p0, empirical_p0, deviation, tolerance, verdict })
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hoeffding_tolerance_at_ten_thousand() {
        let t = ToleranceRule::default().tolerance(10_000);
        assert_abs_diff_eq!(t, ((2e6f64).ln() / 2e4).sqrt(), epsilon = 1e-15);
        assert!((t - 0.02693).abs() < 1e-4);
    }

    #[test]
    fn no_click_rule_boundaries() {
        assert_eq!(assign_no_click(0.0), Outcome::One);
        assert_eq!(assign_no_click(0.3), Outcome::One);
        assert_eq!(assign_no_click(0.5 + 1e-15), Outcome::One);
        assert_eq!(assign_no_click(0.5), Outcome::One);
        assert_eq!(assign_no_click(0.5000001), Outcome::Zero);
        assert_eq!(assign_no_click(1.0), Outcome::Zero);
    }

    #[test]
    fn all_lost_aborts() {
        let samples = vec![CheckSample { p_zero: 0.25, outcome: DetectionOutcome::NoClick }; 1000];
        let r = SecurityCheckReport::from_samples(1, &samples, &ToleranceRule::Fixed { tolerance: 0.01 }).unwrap();
        assert_eq!(r.empirical_p0, 0.0);
        assert_abs_diff_eq!(r.deviation, 0.25, epsilon = 1e-15);
        assert_eq!(r.verdict, Verdict::Abort);
        assert_eq!(r.clicks, 0);
    }

    #[test]
    fn empty_check_is_a_violation() {
        assert!(SecurityCheckReport::from_samples(1, &[], &ToleranceRule::default()).is_err());
    }
}
