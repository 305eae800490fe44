//! Acceptance battery. Each criterion returns a list of checks comparing an
//! obtained value with an expected one under a pinned tolerance.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{detection_power, predict_attacked_distribution, BlindingAttackParams};
use crate::analysis::{
    binary_entropy, delta_theta_threshold, delta_theta_threshold_in, error_budget, eta_threshold, expected_observed_p0,
    fidelity_threshold, max_distance, minimum_capacity, practical_efficiency, secrecy_capacity, CapacityParams,
    EfficiencyParams, GainModel, DI_REFERENCE_DISTANCE_KM,
};
use crate::devices::{ChannelNoiseModel, LinkBudget};
use crate::error::{Error, Result};
use crate::protocol::{
    run_full_protocol, step1_prepare, step2_distribute, step3_first_check, BitStatus, MessageSource, ProtocolParams,
    RunStatus,
};
use crate::quantum::{apply_encode, apply_rotation, prepare, BasisConfig, ChannelRotation, EncodeOp, PureState};
use crate::tolerance::{CHECK_EPSILON, MONTE_CARLO_SIGMAS, SOLVER};

pub const ETA_TOLERANCE_NOISELESS: f64 = 0.002;
pub const ETA_TOLERANCE_NOISY: f64 = 0.003;
pub const DISTANCE_TOLERANCE_SHORT_KM: f64 = 0.2;
pub const DISTANCE_TOLERANCE_LONG_KM: f64 = 0.5;
pub const NOISE_THRESHOLD_RELATIVE: f64 = 0.02;
pub const FIDELITY_TOLERANCE: f64 = 5e-4;
pub const EFFICIENCY_RELATIVE: f64 = 0.02;
pub const ABORT_FREQUENCY_MIN: f64 = 0.999;
pub const PROPERTY_TOLERANCE: f64 = 1e-9;

/// `E_s` at `L = 0.5 km`, `P1 = 0.1`, `δθ = π/400`, `η_c = 0.95`, from an
/// independent 50-digit evaluation.
pub const ORACLE_EFFICIENCY: f64 = 1.782_85e6;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// Quoted in the publication.
    Quoted,
    /// Computed by an independent high-precision script.
    Oracle,
    /// Holds exactly by construction.
    Exact,
    /// Closed form compared with a Monte Carlo estimate.
    Statistical,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Quoted => "quoted",
            Origin::Oracle => "oracle",
            Origin::Exact => "exact",
            Origin::Statistical => "5-sigma",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub expected: f64,
    pub obtained: f64,
    pub tolerance: f64,
    pub origin: Origin,
    pub passed: bool,
    pub note: Option<String>,
}

impl Check {
    fn near(criterion: u8, name: impl Into<String>, expected: f64, obtained: f64, tolerance: f64, origin: Origin) -> Self {
        let passed = (obtained - expected).abs() <= tolerance;
        Self { criterion, name: name.into(), expected, obtained, tolerance, origin, passed, note: None }
    }

    fn holds(criterion: u8, name: impl Into<String>, ok: bool, origin: Origin) -> Self {
        let v = f64::from(u8::from(ok));
        Self::near(criterion, name, 1.0, v, 0.0, origin)
    }

    fn at_least(criterion: u8, name: impl Into<String>, bound: f64, obtained: f64, origin: Origin) -> Self {
        Self { passed: obtained >= bound, ..Self::near(criterion, name, bound, obtained, 0.0, origin) }
    }

    fn at_most(criterion: u8, name: impl Into<String>, bound: f64, obtained: f64, origin: Origin) -> Self {
        Self { passed: obtained <= bound, ..Self::near(criterion, name, bound, obtained, 0.0, origin) }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn failed(criterion: u8, name: impl Into<String>, err: &Error) -> Self {
        Self { passed: false, ..Self::near(criterion, name, f64::NAN, f64::NAN, 0.0, Origin::Exact) }
            .with_note(format!("error: {err}"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {:>2} | {} | expected {:.6} | obtained {:.6} | tolerance {:.3e} | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.expected,
            self.obtained,
            self.tolerance,
            self.origin
        )?;
        if let Some(n) = &self.note {
            write!(f, " | {n}")?;
        }
        Ok(())
    }
}

/// Sample sizes for the Monte Carlo criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Photons per sequence for each oracle-equivalence point.
    pub oracle_r: usize,
    /// Photons per sequence for each attack grid point.
    pub attack_r: usize,
    /// Check size for the abort-frequency trials.
    pub abort_m: usize,
    pub abort_trials: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { oracle_r: 1_000_000, attack_r: 100_000, abort_m: 10_000, abort_trials: 1000, seed: 20_240_601 }
    }
}

impl VerifyOptions {
    /// Small samples for smoke runs. Statistical checks stay meaningful,
    /// only less sharp.
    pub fn quick() -> Self {
        Self { oracle_r: 20_000, attack_r: 5_000, abort_m: 10_000, abort_trials: 50, ..Self::default() }
    }
}

const P1_GRID: [f64; 6] = [0.001, 0.1, 0.2, 0.3, 0.4, 0.5];

fn eta_checks(criterion: u8, delta: f64, label: &str, quoted: [f64; 6], tol: f64) -> Vec<Check> {
    P1_GRID
        .iter()
        .zip(quoted)
        .map(|(&p1, q)| {
            let name = format!("eta threshold P1={p1} dtheta={label}");
            match eta_threshold(p1, delta, SOLVER) {
                Ok(eta) => Check::near(criterion, name, q, eta, tol, Origin::Quoted),
                Err(e) => Check::failed(criterion, name, &e),
            }
        })
        .collect()
}

pub fn criterion_1() -> Vec<Check> {
    eta_checks(1, 0.0, "0", [0.0115, 0.4823, 0.6790, 0.7718, 0.8238, 0.8568], ETA_TOLERANCE_NOISELESS)
}

pub fn criterion_2() -> Vec<Check> {
    eta_checks(2, PI / 40.0, "pi/40", [0.0130, 0.4985, 0.6927, 0.7798, 0.8278, 0.8569], ETA_TOLERANCE_NOISY)
}

pub fn criterion_3() -> Vec<Check> {
    let link = LinkBudget::default();
    let mut out = Vec::new();
    let name = "max distance P1=0.1 dtheta=pi/400";
    out.push(match max_distance(0.1, PI / 400.0, &link, SOLVER) {
        Ok(l) => Check::near(3, name, 14.72, l, DISTANCE_TOLERANCE_SHORT_KM, Origin::Quoted),
        Err(e) => Check::failed(3, name, &e),
    });
    let name = "max distance P1=0.001 dtheta=0";
    let noisy = max_distance(0.001, PI / 400.0, &link, SOLVER)
        .map_or_else(|e| format!("error: {e}"), |l| format!("{l:.3} km"));
    out.push(match max_distance(0.001, 0.0, &link, SOLVER) {
        Ok(l) => Check::near(3, name, 95.8, l, DISTANCE_TOLERANCE_LONG_KM, Origin::Oracle)
            .with_note(format!("quoted 95.81 km matches dtheta=0; dtheta=pi/400 gives {noisy}")),
        Err(e) => Check::failed(3, name, &e),
    });
    out.push(Check::holds(
        3,
        "threshold above coupling efficiency is unreachable",
        matches!(max_distance(0.4, 0.0, &LinkBudget { eta_c: 0.5, ..link }, SOLVER), Err(Error::Unreachable { .. })),
        Origin::Exact,
    ));
    out
}

/// Noise thresholds quoted for `P1 = 0.1, 0.2, 0.3, 0.4`.
pub const QUOTED_NOISE_THRESHOLDS: [(f64, f64); 4] = [(0.1, 0.2547), (0.2, 0.2988), (0.3, 0.3742), (0.4, 0.5912)];

pub fn criterion_4() -> Vec<Check> {
    let mut out: Vec<Check> = QUOTED_NOISE_THRESHOLDS
        .iter()
        .map(|&(p1, q)| {
            let name = format!("noise threshold P1={p1}");
            match delta_theta_threshold(p1, SOLVER) {
                Ok(d) => Check::near(4, name, q, d, NOISE_THRESHOLD_RELATIVE * q, Origin::Quoted),
                Err(e) => Check::failed(4, name, &e),
            }
        })
        .collect();
    let none = matches!(delta_theta_threshold_in(0.429, 0.0, PI, SOLVER), Err(Error::NoThreshold(_)));
    out.push(Check::holds(4, "P1=0.429 has no noise threshold on (0, pi)", none, Origin::Quoted));
    match minimum_capacity(0.429, 0.0, PI) {
        Ok((at, c)) => out.push(
            Check::at_least(4, "P1=0.429 minimum C_S over (0, pi) is positive", 0.0, c, Origin::Quoted)
                .with_note(format!("minimum at dtheta={at:.6}")),
        ),
        Err(e) => out.push(Check::failed(4, "P1=0.429 minimum C_S", &e)),
    }
    let half = CapacityParams::with_eta(0.429, FRAC_PI_2, 1.0);
    match (secrecy_capacity(&half), error_budget(&half)) {
        (Ok(p), Ok(e)) => {
            out.push(Check::at_least(4, "C_S at dtheta=pi/2, P1=0.429 exceeds 0.4", 0.4, p.c_s, Origin::Quoted));
            out.push(Check::near(4, "E_ABA vanishes at dtheta=pi/2", 0.0, e.e_aba, PROPERTY_TOLERANCE, Origin::Exact));
        }
        (Err(e), _) | (_, Err(e)) => out.push(Check::failed(4, "dtheta=pi/2 point", &e)),
    }
    out
}

pub fn criterion_5() -> Vec<Check> {
    let quoted_f = [0.9365, 0.9133, 0.8664, 0.6894];
    QUOTED_NOISE_THRESHOLDS
        .iter()
        .zip(quoted_f)
        .map(|(&(p1, d), f)| {
            let fid = fidelity_threshold(d);
            let computed = delta_theta_threshold(p1, SOLVER)
                .map_or_else(|e| format!("error: {e}"), |x| format!("{:.5}", fidelity_threshold(x).per_trip));
            Check::near(5, format!("fidelity cos^2({d})"), f, fid.per_trip, FIDELITY_TOLERANCE, Origin::Quoted).with_note(
                format!("round trip cos^2(2x) = {:.5}; cos^2 of computed threshold = {computed}", fid.round_trip),
            )
        })
        .collect()
}

pub fn criterion_6() -> Vec<Check> {
    let name = "E_s at L=0.5 km, P1=0.1, dtheta=pi/400";
    let link = LinkBudget { distance_km: 0.5, ..LinkBudget::default() };
    match secrecy_capacity(&CapacityParams::new(0.1, PI / 400.0, GainModel::Link(link))) {
        Ok(p) => {
            let e_s = practical_efficiency(p.c_s, &EfficiencyParams::default());
            vec![Check::near(6, name, ORACLE_EFFICIENCY, e_s, EFFICIENCY_RELATIVE * ORACLE_EFFICIENCY, Origin::Oracle)
                .with_note(format!(
                    "C_S = {:.5}; comparison protocol quoted at {DI_REFERENCE_DISTANCE_KM} km, not modelled",
                    p.c_s
                ))]
        }
        Err(e) => vec![Check::failed(6, name, &e)],
    }
}

fn sigma_check(criterion: u8, name: String, expected: f64, obtained: f64, se: f64, r: usize) -> Check {
    let sigma = se.max(1.0 / r as f64);
    Check::near(criterion, name, expected, obtained, MONTE_CARLO_SIGMAS * sigma, Origin::Statistical)
}

pub fn criterion_7(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let mut idx = 0u64;
    for eta in [0.3, 0.7, 1.0] {
        for (delta, dl) in [(0.0, "0"), (PI / 40.0, "pi/40")] {
            for p1 in [0.1, 0.4] {
                idx += 1;
                let tag = format!("eta={eta} dtheta={dl} P1={p1}");
                let params = ProtocolParams {
                    r: opts.oracle_r,
                    policy: crate::protocol::BasisPolicy::TargetP1 { target: p1 },
                    link: LinkBudget::from_total_efficiency(eta).expect("valid efficiency"),
                    noise: ChannelNoiseModel::Uniform { delta_theta: delta },
                    continue_after_abort: true,
                    seed: opts.seed.wrapping_add(idx),
                    ..ProtocolParams::default()
                };
                let run = run_full_protocol(&params);
                let closed = error_budget(&CapacityParams::with_eta(p1, delta, eta));
                let (t, e) = match (run, closed) {
                    (Ok(t), Ok(e)) => (t, e),
                    (Err(err), _) | (_, Err(err)) => {
                        out.push(Check::failed(7, tag, &err));
                        continue;
                    }
                };
                let r = opts.oracle_r;
                let ab = t.summary.stats.ab;
                let Some(aba) = t.summary.stats.aba else {
                    out.push(Check::holds(7, format!("{tag} second round ran"), false, Origin::Exact));
                    continue;
                };
                let (q_ab, q_aba) = (eta, eta * eta);
                out.push(sigma_check(7, format!("{tag} Q_AB"), q_ab, ab.gain, ab.gain_se, r));
                out.push(sigma_check(7, format!("{tag} Q_ABA"), q_aba, aba.gain, aba.gain_se, r));
                out.push(sigma_check(7, format!("{tag} E_AB"), e.total_ab, ab.total_error, ab.total_error_se, r));
                out.push(sigma_check(7, format!("{tag} E_ABA"), e.total_aba, aba.total_error, aba.total_error_se, r));
                out.push(sigma_check(7, format!("{tag} P(g=0) round 1"), expected_observed_p0(p1, delta, q_ab, 1), ab.p0, ab.p0_se, r));
                out.push(sigma_check(7, format!("{tag} P(g=0) round 2"), expected_observed_p0(p1, delta, q_aba, 2), aba.p0, aba.p0_se, r));
            }
        }
    }
    out
}

pub fn criterion_8() -> Vec<Check> {
    let mut out = Vec::new();
    let ideal = |r: usize, seed: u64| ProtocolParams {
        r,
        seed,
        link: LinkBudget::from_total_efficiency(1.0).expect("unit efficiency"),
        message: MessageSource::Random,
        ..ProtocolParams::default()
    };
    match run_full_protocol(&ideal(1000, 1)) {
        Ok(t) => {
            let ok = t.frame.as_ref().map_or(0, |f| f.count(BitStatus::Ok));
            out.push(Check::holds(8, "noiseless lossless run completes", t.summary.status == RunStatus::Completed, Origin::Exact));
            out.push(Check::near(8, "bits decoded correctly out of 1000", 1000.0, ok as f64, 0.0, Origin::Exact));
        }
        Err(e) => out.push(Check::failed(8, "noiseless lossless run", &e)),
    }
    let restored = (0..100u64)
        .filter(|&seed| {
            run_full_protocol(&ideal(64, 1000 + seed)).is_ok_and(|t| {
                let l = &t.ledger;
                let original: Vec<u32> = l.s2.iter().chain(&l.s3).copied().collect();
                l.restore_order().as_deref() == Some(&original[..])
                    && l.s3_prime_slots.iter().zip(&l.s3_prime_origin).all(|(&slot, &o)| l.s3[o] == l.returned[slot])
                    && l.s2_prime_slots.iter().zip(&l.s2_prime_origin).all(|(&slot, &o)| l.s2[o] == l.returned[slot])
            })
        })
        .count();
    out.push(Check::near(8, "seeds whose shuffle restores order", 100.0, restored as f64, 0.0, Origin::Exact));
    out
}

/// Runs steps 1 to 3 `trials` times and returns the fraction that abort.
pub fn round_one_abort_rate(base: &ProtocolParams, trials: u64) -> Result<f64> {
    let mut aborts = 0u64;
    for t in 0..trials {
        let params = ProtocolParams { seed: base.seed.wrapping_add(t), ..base.clone() };
        let env = params.environment()?;
        let (ledger, mut photons) = step1_prepare(params.r, &env, &params.policy, params.second_round)?;
        step2_distribute(&mut photons, &env)?;
        if !step3_first_check(&ledger, &mut photons, &env, &params.tolerance)?.passed() {
            aborts += 1;
        }
    }
    Ok(aborts as f64 / trials as f64)
}

fn attacked(r: usize, p1_target: f64, attack: BlindingAttackParams, seed: u64) -> ProtocolParams {
    ProtocolParams {
        r,
        seed,
        policy: crate::protocol::BasisPolicy::TargetP1 { target: p1_target },
        link: LinkBudget::from_total_efficiency(1.0).expect("unit efficiency"),
        attack: Some(attack),
        continue_after_abort: true,
        ..ProtocolParams::default()
    }
}

pub fn criterion_9(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut idx = 0u64;
    for p1 in levels {
        for p2 in levels {
            idx += 1;
            let name = format!("attacked P(g=0) p1={p1} p2={p2}");
            let attack = BlindingAttackParams::new(p1, p2).expect("grid values are valid");
            let base = attacked(opts.attack_r, 0.1, attack, opts.seed.wrapping_add(100 + idx));
            let result = base.environment().and_then(|env| {
                let (ledger, mut photons) = step1_prepare(base.r, &env, &base.policy, base.second_round)?;
                step2_distribute(&mut photons, &env)?;
                step3_first_check(&ledger, &mut photons, &env, &base.tolerance)
            });
            match result {
                Ok(rep) => {
                    let predicted = predict_attacked_distribution(rep.theoretical_p0, &attack);
                    let se = (predicted * (1.0 - predicted) / rep.m as f64).sqrt();
                    out.push(sigma_check(9, name, predicted, rep.empirical_p0, se, rep.m));
                }
                Err(e) => out.push(Check::failed(9, name, &e)),
            }
        }
    }

    let half = BlindingAttackParams::new(0.5, 0.5).expect("valid");
    let base = attacked(opts.abort_m, 0.1, half, opts.seed.wrapping_add(1000));
    let tol = base.tolerance.tolerance(opts.abort_m);
    match (round_one_abort_rate(&base, opts.abort_trials), detection_power(0.1, &half, opts.abort_m, tol)) {
        (Ok(rate), Ok(power)) => out.push(
            Check::at_least(9, "abort frequency P1=0.1 p1=p2=0.5 m=1e4", ABORT_FREQUENCY_MIN, rate, Origin::Quoted)
                .with_note(format!("{} trials; binomial detection power {power:.6}", opts.abort_trials)),
        ),
        (Err(e), _) | (_, Err(e)) => out.push(Check::failed(9, "abort frequency P1=0.1", &e)),
    }

    let base = attacked(opts.abort_m, 0.5, half, opts.seed.wrapping_add(2000));
    match (round_one_abort_rate(&base, opts.abort_trials), detection_power(0.5, &half, opts.abort_m, tol)) {
        (Ok(rate), Ok(power)) => {
            out.push(
                Check::at_most(9, "abort frequency P1=0.5 p1=p2=0.5 m=1e4", CHECK_EPSILON, rate, Origin::Quoted)
                    .with_note(format!("{} trials", opts.abort_trials)),
            );
            out.push(Check::at_most(9, "binomial detection power P1=0.5", CHECK_EPSILON, power, Origin::Exact));
        }
        (Err(e), _) | (_, Err(e)) => out.push(Check::failed(9, "abort frequency P1=0.5", &e)),
    }
    out
}

fn max_over<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

pub fn criterion_10(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let cs = |p1: f64, d: f64, eta: f64| secrecy_capacity(&CapacityParams::with_eta(p1, d, eta)).map_or(f64::NAN, |p| p.c_s);
    let budget = |p1: f64, d: f64, eta: f64| error_budget(&CapacityParams::with_eta(p1, d, eta)).expect("valid grid");

    let mut sym = Vec::new();
    let mut period = Vec::new();
    let mut axis = Vec::new();
    for eta in [0.3, 0.7, 1.0] {
        for d in [0.0, PI / 400.0, PI / 40.0, 0.3, 1.0, 2.0] {
            for p1 in [0.001, 0.05, 0.1, 0.2, 0.3, 0.4, 0.429, 0.5] {
                sym.push((cs(p1, d, eta) - cs(1.0 - p1, d, eta)).abs());
                period.push((budget(p1, d, eta).e_ab - budget(p1, d + PI, eta).e_ab).abs());
                period.push((budget(p1, d, eta).e_aba - budget(p1, d + FRAC_PI_2, eta).e_aba).abs());
                if eta == 1.0 {
                    axis.push((cs(p1, d, 1.0) - cs(p1, PI - d, 1.0)).abs());
                }
            }
        }
    }
    out.push(Check::near(10, "C_S(P1) = C_S(1-P1) on the grid", 0.0, max_over(sym), PROPERTY_TOLERANCE, Origin::Exact));
    out.push(Check::near(10, "e_AB period pi, e_ABA period pi/2", 0.0, max_over(period), PROPERTY_TOLERANCE, Origin::Exact));
    out.push(Check::near(10, "C_S(dtheta) = C_S(pi - dtheta) at eta=1", 0.0, max_over(axis), PROPERTY_TOLERANCE, Origin::Exact));

    let h = |x: f64| binary_entropy(x).unwrap_or(f64::NAN);
    out.push(Check::near(10, "h(0)", 0.0, h(0.0), PROPERTY_TOLERANCE, Origin::Exact));
    out.push(Check::near(10, "h(1)", 0.0, h(1.0), PROPERTY_TOLERANCE, Origin::Exact));
    out.push(Check::near(10, "h(0.5)", 1.0, h(0.5), PROPERTY_TOLERANCE, Origin::Exact));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut state: Option<PureState> = None;
    for _ in 0..100_000 {
        let s = match (state, rng.random_range(0..4u8)) {
            (None, _) | (_, 0) => {
                let n = [3u32, 5, 8, 16, 64][rng.random_range(0..5)];
                let cfg = BasisConfig::new(n, rng.random_range(0.01..1.56)).expect("valid basis");
                prepare(rng.random_range(1..=n), cfg).expect("index in range")
            }
            (Some(s), 1) => apply_encode(&s, EncodeOp::from_bit(rng.random_bool(0.5))),
            (Some(s), 2) => apply_rotation(&s, ChannelRotation::new(rng.random_range(-PI..PI))),
            (Some(s), _) => s.flipped(),
        };
        worst = worst.max((s.norm_sqr() - 1.0).abs());
        state = Some(s);
    }
    out.push(Check::near(10, "norm drift over 1e5 random operations", 0.0, worst, PROPERTY_TOLERANCE, Origin::Exact));
    out
}

/// Every criterion in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<Check> {
    let mut all = Vec::new();
    all.extend(criterion_1());
    all.extend(criterion_2());
    all.extend(criterion_3());
    all.extend(criterion_4());
    all.extend(criterion_5());
    all.extend(criterion_6());
    all.extend(criterion_7(opts));
    all.extend(criterion_8());
    all.extend(criterion_9(opts));
    all.extend(criterion_10(opts.seed));
    all
}
