use rand::Rng;
use serde::{Deserialize, Serialize};

use super::check::{CheckSample, SecurityCheckReport, ToleranceRule};
use super::ledger::{SecondRoundBasis, SequenceLedger};
use super::message::{BitStatus, MessageFrame, MessageSource};
use super::policy::BasisPolicy;
use super::steps::*;
use crate::adversary::{literal_attacked_distribution, predict_attacked_distribution, AttackOutcomeStats, BlindingAttackParams};
use crate::devices::{ChannelNoiseModel, LinkBudget, MemoryConfig};
use crate::error::{invalid, Result};
use crate::photon::{LossSite, PhotonRecord, SequenceTag};
use crate::quantum::BasisConfig;
use crate::seed::Purpose;

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Photons per sequence; `3r` are prepared.
    pub r: usize,
    pub config: BasisConfig,
    pub policy: BasisPolicy,
    pub second_round: SecondRoundBasis,
    pub link: LinkBudget,
    pub noise: ChannelNoiseModel,
    /// Explicit storage loop. `None` derives one from `link.eta_m`.
    pub memory: Option<MemoryConfig>,
    pub dark_count: f64,
    pub attack: Option<BlindingAttackParams>,
    pub tolerance: ToleranceRule,
    pub message: MessageSource,
    /// Keep going after a failed check so every step is exercised.
    pub continue_after_abort: bool,
    pub seed: u64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            r: 10_000,
            config: BasisConfig::with_n(16).expect("n = 16 is valid"),
            policy: BasisPolicy::TargetP1 { target: 0.1 },
            second_round: SecondRoundBasis::Policy,
            link: LinkBudget::default(),
            noise: ChannelNoiseModel::default(),
            memory: None,
            dark_count: 0.0,
            attack: None,
            tolerance: ToleranceRule::default(),
            message: MessageSource::Random,
            continue_after_abort: false,
            seed: 0,
        }
    }
}

impl ProtocolParams {
    pub fn environment(&self) -> Result<Environment> {
        Environment::new(self.config, self.link, self.noise, self.memory, self.dark_count, self.attack, self.seed)
    }

    /// The payload Bob encodes.
    pub fn message_bits(&self) -> Result<Vec<bool>> {
        match &self.message {
            MessageSource::Random => {
                let mut rng = crate::seed::SeedTree::new(self.seed).stream(Purpose::Message, 0);
                Ok((0..self.r).map(|_| rng.random_bool(0.5)).collect())
            }
            MessageSource::Zeros => Ok(vec![false; self.r]),
            MessageSource::Ones => Ok(vec![true; self.r]),
            MessageSource::Bits(b) if b.len() == self.r => Ok(b.clone()),
            MessageSource::Bits(b) => Err(invalid(format!("message has {} bits, expected r = {}", b.len(), self.r))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    AbortedRoundOne,
    AbortedRoundTwo,
}

/// What crossed the public channel. Contains no encoding operations, so it
/// is identical for any two messages under the same seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Announcements {
    /// Alice: ids of S1.
    pub s1_ids: Vec<u32>,
    /// Bob: round-one measurement indices.
    pub y1: Vec<u32>,
    /// Bob: round-one outcomes, `None` for no click.
    pub round_one_outcomes: Vec<Option<u8>>,
    /// Alice: ids of S3.
    pub s3_ids: Vec<u32>,
    /// Bob: slots of `S2'` and their original S2 positions.
    pub s2_prime_slots: Vec<usize>,
    pub s2_prime_origin: Vec<usize>,
    /// Bob: original S3 positions of `S3'`.
    pub s3_prime_origin: Vec<usize>,
}

/// Loss counts by site. `surviving + Σ sites = total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LossAccounting {
    pub total: usize,
    pub surviving: usize,
    pub fiber: usize,
    pub coupling: usize,
    pub memory: usize,
    pub detector: usize,
    /// Surviving photons that were intercepted.
    pub attacked: usize,
}

impl LossAccounting {
    pub fn from_photons(photons: &[PhotonRecord]) -> Self {
        let mut acc = Self { total: photons.len(), ..Self::default() };
        for p in photons {
            match p.loss {
                None => acc.surviving += 1,
                Some(LossSite::Fiber) => acc.fiber += 1,
                Some(LossSite::Coupling) => acc.coupling += 1,
                Some(LossSite::Memory) => acc.memory += 1,
                Some(LossSite::Detector) => acc.detector += 1,
            }
            if p.attacked && p.loss.is_none() {
                acc.attacked += 1;
            }
        }
        acc
    }
}

/// Gain and error rates measured on one check round, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub m: usize,
    /// Fraction of checked photons that clicked.
    pub gain: f64,
    pub gain_se: f64,
    /// State error on detected photons.
    pub e_state: f64,
    /// Error from assigning lost photons.
    pub e_loss: f64,
    pub total_error: f64,
    pub total_error_se: f64,
    /// Observed `P(g=0)` with no-clicks assigned.
    pub p0: f64,
    pub p0_se: f64,
}

fn mean_sd(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = if n > 1.0 { v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

impl RoundStats {
    pub fn from_samples(samples: &[CheckSample]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let root = (samples.len() as f64).sqrt();
        let clicked = samples.iter().map(|s| f64::from(u8::from(s.outcome.clicked())));
        let state = samples.iter().map(|s| match s.outcome {
            crate::photon::DetectionOutcome::Click(g) => s.p_zero - f64::from(u8::from(g.is_zero())),
            crate::photon::DetectionOutcome::NoClick => 0.0,
        });
        let loss = samples.iter().map(|s| if s.outcome.clicked() { 0.0 } else { s.p_zero.min(1.0 - s.p_zero) });
        let zero = samples.iter().map(|s| f64::from(u8::from(s.effective().is_zero())));
        let (gain, gain_sd) = mean_sd(clicked);
        let (e_state, state_sd) = mean_sd(state);
        let (e_loss, loss_sd) = mean_sd(loss);
        let (p0, p0_sd) = mean_sd(zero);
        let e_state = e_state.abs();
        Some(Self {
            m: samples.len(),
            gain,
            gain_se: gain_sd / root,
            e_state,
            e_loss,
            total_error: e_state + e_loss,
            total_error_se: (state_sd + loss_sd) / root,
            p0,
            p0_se: p0_sd / root,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub ab: RoundStats,
    pub aba: Option<RoundStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageStats {
    pub ok: usize,
    pub lost: usize,
    pub flipped: usize,
    pub bit_error_rate: f64,
}

impl From<&MessageFrame> for MessageStats {
    fn from(f: &MessageFrame) -> Self {
        Self {
            ok: f.count(BitStatus::Ok),
            lost: f.count(BitStatus::Lost),
            flipped: f.count(BitStatus::Flipped),
            bit_error_rate: f.bit_error_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptSummary {
    pub status: RunStatus,
    pub seed: u64,
    pub r: usize,
    pub round_one: SecurityCheckReport,
    pub round_two: Option<SecurityCheckReport>,
    pub message: Option<MessageStats>,
    pub losses: LossAccounting,
    pub stats: EmpiricalStats,
    pub attack: Option<AttackOutcomeStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub ledger: SequenceLedger,
    pub photons: Vec<PhotonRecord>,
    pub announcements: Announcements,
    pub frame: Option<MessageFrame>,
    pub summary: TranscriptSummary,
}

/// Runs steps 1 to 6. A failed check stops the run unless
/// `continue_after_abort` is set; the transcript is returned either way.
pub fn run_full_protocol(params: &ProtocolParams) -> Result<Transcript> {
    params.tolerance.validate()?;
    let env = params.environment()?;
    let message = params.message_bits()?;
    let (mut ledger, mut photons) = step1_prepare(params.r, &env, &params.policy, params.second_round)?;
    step2_distribute(&mut photons, &env)?;
    let round_one = step3_first_check(&ledger, &mut photons, &env, &params.tolerance)?;
    let round_one_samples = round_one_samples(&ledger, &photons, &env.config)?;

    let mut status = RunStatus::Completed;
    let mut round_two = None;
    let mut round_two_stats = None;
    let mut frame = None;
    let go_on = |report: &SecurityCheckReport| report.passed() || params.continue_after_abort;

    if !round_one.passed() {
        status = RunStatus::AbortedRoundOne;
    }
    if go_on(&round_one) {
        step4_encode_and_shuffle(&mut ledger, &mut photons, &message, &env)?;
        return_transit(&mut photons, &env)?;
        let report = step5_second_check(&ledger, &mut photons, &env, &params.tolerance)?;
        round_two_stats = RoundStats::from_samples(&round_two_samples(&ledger, &photons, &env.config)?);
        if !report.passed() && status == RunStatus::Completed {
            status = RunStatus::AbortedRoundTwo;
        }
        let proceed = go_on(&report);
        round_two = Some(report);
        if proceed {
            frame = Some(step6_decode(&ledger, &mut photons, &env)?);
        }
    }

    let attack = params.attack.map(|a| {
        let intercepted: Vec<&PhotonRecord> =
            photons.iter().filter(|p| p.sequence == SequenceTag::S3 && p.eve_bit.is_some()).collect();
        let correct = intercepted
            .iter()
            .filter(|p| p.eve_bit == p.message_op.map(|op| op.bit()))
            .count();
        AttackOutcomeStats {
            predicted_p0: predict_attacked_distribution(round_one.theoretical_p0, &a),
            literal_p0: literal_attacked_distribution(round_one.theoretical_p0, &a),
            empirical_p0: round_one.empirical_p0,
            eve_information: if intercepted.is_empty() { 0.0 } else { correct as f64 / intercepted.len() as f64 },
            intercepted_bits: intercepted.len(),
        }
    });

    let announcements = Announcements {
        s1_ids: ledger.s1.clone(),
        y1: ledger.y1.clone(),
        round_one_outcomes: ledger
            .s1
            .iter()
            .map(|&id| match photons[id as usize].detection.map(|d| d.outcome) {
                Some(crate::photon::DetectionOutcome::Click(g)) => Some(g.as_u8()),
                _ => None,
            })
            .collect(),
        s3_ids: if round_two.is_some() { ledger.s3.clone() } else { Vec::new() },
        s2_prime_slots: ledger.s2_prime_slots.clone(),
        s2_prime_origin: ledger.s2_prime_origin.clone(),
        s3_prime_origin: if frame.is_some() { ledger.s3_prime_origin.clone() } else { Vec::new() },
    };

    let summary = TranscriptSummary {
        status,
        seed: params.seed,
        r: params.r,
        round_one,
        round_two,
        message: frame.as_ref().map(MessageStats::from),
        losses: LossAccounting::from_photons(&photons),
        stats: EmpiricalStats {
            ab: RoundStats::from_samples(&round_one_samples).expect("r >= 1"),
            aba: round_two_stats,
        },
        attack,
    };
    Ok(Transcript { ledger, photons, announcements, frame, summary })
}
