use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::capacity::{secrecy_capacity, CapacityParams};
use crate::devices::LinkBudget;
use crate::error::{invalid, Error, Result};
use crate::tolerance::BRACKET_SCAN_STEP;

/// Upper end of the noise-threshold search at unit efficiency.
pub const DELTA_THETA_SEARCH_MAX: f64 = 0.3 * PI;

fn capacity_at_eta(p1: f64, delta_theta: f64, eta: f64) -> f64 {
    secrecy_capacity(&CapacityParams::with_eta(p1, delta_theta, eta)).map_or(f64::NAN, |p| p.c_s)
}

/// Bisection on a bracket whose endpoints differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("solver tolerance must be positive"));
    }
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoThreshold(format!("no sign change on [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_p1(p1: f64) -> Result<()> {
    if p1 > 0.0 && p1 < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("P1 = {p1} outside (0, 1)")))
    }
}

/// Smallest total efficiency with positive capacity: the largest root of
/// `C_S(η)`, found by scanning down from `η = 1`.
pub fn eta_threshold(p1: f64, delta_theta: f64, tol: f64) -> Result<f64> {
    check_p1(p1)?;
    let f = |eta: f64| capacity_at_eta(p1, delta_theta, eta);
    if f(1.0) <= 0.0 {
        return Err(Error::NoThreshold(format!("C_S ≤ 0 at η = 1 for P1 = {p1}, δθ = {delta_theta}")));
    }
    let steps = (1.0 / BRACKET_SCAN_STEP).round() as usize;
    let mut upper = 1.0;
    for k in 1..steps {
        let eta = 1.0 - k as f64 * BRACKET_SCAN_STEP;
        if f(eta) < 0.0 {
            return bisect(f, eta, upper, tol);
        }
        upper = eta;
    }
    Err(Error::NoThreshold(format!("C_S > 0 for every η ≥ {BRACKET_SCAN_STEP}")))
}

/// Longest fiber with positive capacity, inverting the link budget at the
/// efficiency threshold. Distance and α are taken from `link` except the
/// distance, which is solved for.
pub fn max_distance(p1: f64, delta_theta: f64, link: &LinkBudget, tol: f64) -> Result<f64> {
    let eta_star = eta_threshold(p1, delta_theta, tol)?;
    let required = eta_star / (link.eta_c * link.eta_m * link.eta_d);
    if required > 1.0 {
        return Err(Error::Unreachable { required });
    }
    Ok(-(10.0 / link.alpha) * required.log10())
}

/// Noise threshold at `η = 1` on `(0, 0.3π)`.
pub fn delta_theta_threshold(p1: f64, tol: f64) -> Result<f64> {
    delta_theta_threshold_in(p1, 0.0, DELTA_THETA_SEARCH_MAX, tol)
}

/// First root of `C_S(δθ)` at `η = 1` scanning up from `lo`.
pub fn delta_theta_threshold_in(p1: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    check_p1(p1)?;
    if !(hi > lo) {
        return Err(invalid("empty δθ range"));
    }
    let f = |d: f64| capacity_at_eta(p1, d, 1.0);
    let steps = ((hi - lo) / BRACKET_SCAN_STEP).ceil() as usize;
    let mut prev = lo;
    for k in 1..=steps {
        let d = (lo + k as f64 * BRACKET_SCAN_STEP).min(hi);
        if f(d) < 0.0 {
            return bisect(f, prev, d, tol);
        }
        prev = d;
    }
    Err(Error::NoThreshold(format!("C_S > 0 on the whole range for P1 = {p1}: noise-robust")))
}

/// Smallest `C_S(δθ)` at `η = 1` on `[lo, hi]`, refined around the best
/// grid point by golden-section search. Returns `(δθ, C_S)`.
pub fn minimum_capacity(p1: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    check_p1(p1)?;
    let f = |d: f64| capacity_at_eta(p1, d, 1.0);
    let steps = ((hi - lo) / BRACKET_SCAN_STEP).ceil() as usize;
    let grid = (0..=steps).map(|k| (lo + k as f64 * BRACKET_SCAN_STEP).min(hi));
    let best = grid.min_by(|a, b| f(*a).total_cmp(&f(*b))).expect("non-empty grid");
    let (mut a, mut b) = ((best - BRACKET_SCAN_STEP).max(lo), (best + BRACKET_SCAN_STEP).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)))
}

/// Fidelity at a noise threshold, for a single trip and for the round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityThreshold {
    /// `cos²(δθ*)`.
    pub per_trip: f64,
    /// `cos²(2δθ*)`.
    pub round_trip: f64,
}

pub fn fidelity_threshold(delta_theta_star: f64) -> FidelityThreshold {
    FidelityThreshold {
        per_trip: delta_theta_star.cos().powi(2),
        round_trip: (2.0 * delta_theta_star).cos().powi(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerance::SOLVER;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 1.0, 2.0, 1e-10).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-9);
        assert!(matches!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-6), Err(Error::NoThreshold(_))));
    }

    #[test]
    fn noiseless_eta_threshold() {
        assert!((eta_threshold(0.1, 0.0, SOLVER).unwrap() - 0.482255).abs() < 1e-5);
    }

    // Five values quoted for six settings; they line up once P1 = 0.2 is dropped.
    #[test]
    fn slight_noise_eta_thresholds() {
        let delta = std::f64::consts::PI / 400.0;
        for (p1, quoted) in [(0.001, 0.0120), (0.1, 0.4825), (0.3, 0.7728), (0.4, 0.8238), (0.5, 0.8569)] {
            let eta = eta_threshold(p1, delta, SOLVER).unwrap();
            assert!((eta - quoted).abs() < 2e-3, "P1={p1}: {eta} vs {quoted}");
        }
    }

    #[test]
    fn unreachable_distance() {
        let link = LinkBudget { eta_c: 0.3, ..LinkBudget::default() };
        assert!(matches!(max_distance(0.4, 0.0, &link, SOLVER), Err(Error::Unreachable { .. })));
    }

    #[test]
    fn fidelity_zero_noise() {
        assert_eq!(fidelity_threshold(0.0), FidelityThreshold { per_trip: 1.0, round_trip: 1.0 });
    }

    #[test]
    fn invalid_p1() {
        assert!(eta_threshold(0.0, 0.0, SOLVER).is_err());
        assert!(delta_theta_threshold(1.0, SOLVER).is_err());
    }
}
