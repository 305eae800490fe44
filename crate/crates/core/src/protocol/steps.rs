//! The six protocol steps. Each step touches photons independently, using
//! streams keyed by photon id, so steps run in parallel without affecting
//! the transcript.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check::{CheckSample, SecurityCheckReport, ToleranceRule};
use super::ledger::{Permutation, SecondRoundBasis, SequenceLedger};
use super::message::MessageFrame;
use super::policy::BasisPolicy;
use crate::adversary::{blind_and_fake, draw_eve_basis, second_pass_intercept, BlindingAttackParams, EveKnowledge};
use crate::devices::{detect, transmit, ChannelNoiseModel, DetectorModel, LinkBudget, MemoryConfig};
use crate::error::{invalid, Error, Result};
use crate::photon::{Detection, DetectionOutcome, Party, PhotonRecord, SequenceTag};
use crate::quantum::{apply_encode, outcome_probability, prepare, BasisConfig, EncodeOp, Measurement, Outcome};
use crate::seed::{Purpose, SeedTree};

/// Devices, eavesdropper and seeds shared by all steps of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub config: BasisConfig,
    /// Link as simulated; `eta_m` always equals the memory stage efficiency.
    pub link: LinkBudget,
    pub noise: ChannelNoiseModel,
    pub memory: MemoryConfig,
    pub detector: DetectorModel,
    pub attack: Option<BlindingAttackParams>,
    pub seeds: SeedTree,
}

impl Environment {
    /// Reconciles the link's `eta_m` with the storage loop. Without an
    /// explicit memory, `eta_m < 1` becomes a one-trip loop with that
    /// efficiency; with one, the loop's stage efficiency replaces `eta_m`.
    pub fn new(
        config: BasisConfig,
        link: LinkBudget,
        noise: ChannelNoiseModel,
        memory: Option<MemoryConfig>,
        dark_count: f64,
        attack: Option<BlindingAttackParams>,
        seed: u64,
    ) -> Result<Self> {
        noise.validate()?;
        if let Some(a) = &attack {
            a.validate()?;
        }
        if !(0.0..=1.0).contains(&dark_count) {
            return Err(invalid(format!("dark count probability {dark_count} outside [0, 1]")));
        }
        let memory = match memory {
            Some(m) => m,
            None if link.eta_m < 1.0 => {
                MemoryConfig { per_trip_efficiency: link.eta_m, max_round_trips: 1, trips_per_stage: 1 }
            }
            None => MemoryConfig::default(),
        };
        memory.validate()?;
        let link = LinkBudget { eta_m: memory.stage_efficiency(), ..link };
        let detector = DetectorModel { eta_d: link.eta_d, dark_count, blinded: false };
        Ok(Self { config, link, noise, memory, detector, attack, seeds: SeedTree::new(seed) })
    }

    fn attack_params(&self) -> Result<&BlindingAttackParams> {
        self.attack
            .as_ref()
            .ok_or_else(|| Error::ProtocolViolation("attacked photon without attack parameters".into()))
    }
}

/// Step 1: Alice prepares `3r` photons, splits them into S1, S2, S3 and
/// masks S3 with random `U0`/`U1`. Measurement indices for both checks are
/// drawn here from the basis policy.
pub fn step1_prepare(
    r: usize,
    env: &Environment,
    policy: &BasisPolicy,
    second_round: SecondRoundBasis,
) -> Result<(SequenceLedger, Vec<PhotonRecord>)> {
    if r == 0 {
        return Err(invalid("r must be at least 1"));
    }
    let total = r.checked_mul(3).filter(|t| *t <= u32::MAX as usize).ok_or_else(|| invalid("r too large"))?;
    let config = env.config;
    let sampler = policy.offset_distribution(&config)?.sampler();

    let mut order: Vec<u32> = (0..total as u32).collect();
    let perm = Permutation::random(total, &mut env.seeds.stream(Purpose::Partition, 0));
    order = perm.apply(&order);
    let mut split: Vec<Vec<u32>> = order.chunks(r).map(|c| c.to_vec()).collect();
    for s in &mut split {
        s.sort_unstable();
    }
    let (s1, s2, s3) = (split[0].clone(), split[1].clone(), split[2].clone());

    let mut role = vec![(SequenceTag::S1, 0u32); total];
    for (tag, seq) in [(SequenceTag::S1, &s1), (SequenceTag::S2, &s2), (SequenceTag::S3, &s3)] {
        for (pos, &id) in seq.iter().enumerate() {
            role[id as usize] = (tag, pos as u32);
        }
    }

    let photons: Vec<PhotonRecord> = (0..total as u32)
        .into_par_iter()
        .map(|id| -> Result<PhotonRecord> {
            let mut rng = env.seeds.stream(Purpose::Prepare, u64::from(id));
            let x = rng.random_range(1..=config.n());
            let (tag, pos) = role[id as usize];
            let base = prepare(x, config)?;
            let mut p = PhotonRecord::new(id, tag, pos, x, base);
            if tag == SequenceTag::S3 {
                let op = EncodeOp::from_bit(rng.random_bool(0.5));
                p.secret_op = Some(op);
                p.sent_state = apply_encode(&base, op);
                p.state = p.sent_state;
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;

    let x: Vec<u32> = photons.iter().map(|p| p.prep_index).collect();
    let pick = |ids: &[u32]| -> Vec<u32> { ids.iter().map(|&id| x[id as usize]).collect() };
    let (x1, x2, x3) = (pick(&s1), pick(&s2), pick(&s3));

    let draw_against = |ids: &[u32]| -> Vec<u32> {
        ids.par_iter()
            .map(|&id| {
                let delta = sampler.sample(&mut env.seeds.stream(Purpose::Policy, u64::from(id)));
                config.wrap_index(i64::from(x[id as usize]) - i64::from(delta))
            })
            .collect()
    };
    let y1 = draw_against(&s1);
    let s2_planned = draw_against(&s2);

    let ledger = SequenceLedger {
        r,
        n: config.n(),
        x,
        s1,
        s2,
        s3,
        x1,
        x2,
        x3,
        y1,
        s2_planned,
        second_round,
        shuffle: None,
        returned: Vec::new(),
        s2_prime_slots: Vec::new(),
        s3_prime_slots: Vec::new(),
        x4: Vec::new(),
        s2_prime_origin: Vec::new(),
        s3_prime_origin: Vec::new(),
        round_two_indices: Vec::new(),
    };
    Ok((ledger, photons))
}

/// Step 2: every photon crosses the channel to Bob, possibly intercepted,
/// and is held in Bob's memory.
pub fn step2_distribute(photons: &mut [PhotonRecord], env: &Environment) -> Result<()> {
    photons.par_iter_mut().try_for_each(|p| -> Result<()> {
        let id = u64::from(p.id);
        if let Some(attack) = &env.attack {
            let mut rng = env.seeds.stream(Purpose::Attack, id);
            if rng.random_bool(attack.p1) {
                p.attacked = true;
                if p.sequence == SequenceTag::S3 {
                    p.eve_basis = Some(draw_eve_basis(p.prep_index, &env.config, attack, &mut rng));
                }
                return Ok(());
            }
        }
        let mut rng = env.seeds.stream(Purpose::ForwardChannel, id);
        *p = transmit(p.clone(), &env.link, &env.noise, &mut rng);
        let mut rng = env.seeds.stream(Purpose::BobMemory, id);
        *p = env.memory.hold(p.clone(), &mut rng)?;
        Ok(())
    })
}

fn measure(
    p: &mut PhotonRecord,
    m: &Measurement,
    party: Party,
    env: &Environment,
    detector_purpose: Purpose,
) -> Result<DetectionOutcome> {
    let id = u64::from(p.id);
    let outcome = if p.attacked {
        let attack = env.attack_params()?;
        let (o, eve) = blind_and_fake(p, m, attack, &mut env.seeds.stream(Purpose::Eavesdrop, id));
        p.eve_basis = Some(eve);
        o
    } else {
        detect(p, m, &env.detector, &mut env.seeds.stream(detector_purpose, id))
    };
    p.record_detection(Detection { party, basis_index: m.basis_index(), outcome, blinded: p.attacked })?;
    Ok(outcome)
}

fn detection_of(p: &PhotonRecord) -> Result<DetectionOutcome> {
    p.detection
        .map(|d| d.outcome)
        .ok_or_else(|| Error::ProtocolViolation(format!("photon {} was never measured", p.id)))
}

/// Round-one samples in S1 order: theoretical `P(g=0)` of each announced
/// `(a_i, w_i)` pair and Bob's detection.
pub fn round_one_samples(ledger: &SequenceLedger, photons: &[PhotonRecord], config: &BasisConfig) -> Result<Vec<CheckSample>> {
    ledger
        .s1
        .iter()
        .zip(ledger.round_one_pairs())
        .map(|(&id, (a, w))| {
            let p_zero = outcome_probability(&prepare(a, *config)?, &Measurement::new(w, *config)?);
            Ok(CheckSample { p_zero, outcome: detection_of(&photons[id as usize])? })
        })
        .collect()
}

/// Round-two samples in `S2'` order.
pub fn round_two_samples(ledger: &SequenceLedger, photons: &[PhotonRecord], config: &BasisConfig) -> Result<Vec<CheckSample>> {
    ledger
        .s2_prime_slots
        .iter()
        .zip(ledger.round_two_pairs())
        .map(|(&slot, (d, b))| {
            let id = ledger.returned[slot];
            let p_zero = outcome_probability(&prepare(d, *config)?, &Measurement::new(b, *config)?);
            Ok(CheckSample { p_zero, outcome: detection_of(&photons[id as usize])? })
        })
        .collect()
}

/// Step 3: Bob measures S1 with `M_{w_m}` and the parties compare the
/// observed `P(g=0)` with theory.
pub fn step3_first_check(
    ledger: &SequenceLedger,
    photons: &mut [PhotonRecord],
    env: &Environment,
    rule: &ToleranceRule,
) -> Result<SecurityCheckReport> {
    if ledger.y1.len() != ledger.r || ledger.x1.len() != ledger.r || ledger.s1.len() != ledger.r {
        return Err(Error::ProtocolViolation(format!(
            "round-one announcements have lengths {}/{}/{} for r = {}",
            ledger.s1.len(),
            ledger.x1.len(),
            ledger.y1.len(),
            ledger.r
        )));
    }
    let config = env.config;
    photons
        .par_iter_mut()
        .filter(|p| p.sequence == SequenceTag::S1)
        .try_for_each(|p| -> Result<()> {
            let m = Measurement::new(ledger.y1[p.position as usize], config)?;
            measure(p, &m, Party::Bob, env, Purpose::BobDetector).map(|_| ())
        })?;
    SecurityCheckReport::from_samples(1, &round_one_samples(ledger, photons, &config)?, rule)
}

/// Step 4: Bob encodes the message on S3 and shuffles `S2 ++ S3` into
/// the return stream.
pub fn step4_encode_and_shuffle(
    ledger: &mut SequenceLedger,
    photons: &mut [PhotonRecord],
    message: &[bool],
    env: &Environment,
) -> Result<()> {
    if message.len() != ledger.r {
        return Err(invalid(format!("message has {} bits, expected r = {}", message.len(), ledger.r)));
    }
    photons
        .par_iter_mut()
        .filter(|p| p.sequence == SequenceTag::S3)
        .for_each(|p| {
            let op = EncodeOp::from_bit(message[p.position as usize]);
            p.message_op = Some(op);
            if p.in_flight() {
                p.state = apply_encode(&p.state, op);
            }
        });

    let combined: Vec<u32> = ledger.s2.iter().chain(&ledger.s3).copied().collect();
    let perm = Permutation::random(combined.len(), &mut env.seeds.stream(Purpose::Shuffle, 0));
    let returned = perm.apply(&combined);

    let (mut s2_slots, mut s3_slots, mut x4, mut s2_origin, mut s3_origin, mut indices) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (slot, &id) in returned.iter().enumerate() {
        let p = &photons[id as usize];
        match p.sequence {
            SequenceTag::S2 => {
                let k = s2_slots.len();
                s2_slots.push(slot);
                x4.push(p.prep_index);
                s2_origin.push(p.position as usize);
                indices.push(match ledger.second_round {
                    SecondRoundBasis::Policy => ledger.s2_planned[p.position as usize],
                    SecondRoundBasis::Positional => ledger.x2[k],
                });
            }
            SequenceTag::S3 => {
                s3_slots.push(slot);
                s3_origin.push(p.position as usize);
            }
            SequenceTag::S1 => return Err(Error::ProtocolViolation("S1 photon in return stream".into())),
        }
    }
    ledger.shuffle = Some(perm);
    ledger.returned = returned;
    ledger.s2_prime_slots = s2_slots;
    ledger.s3_prime_slots = s3_slots;
    ledger.x4 = x4;
    ledger.s2_prime_origin = s2_origin;
    ledger.s3_prime_origin = s3_origin;
    ledger.round_two_indices = indices;
    Ok(())
}

/// Return pass: `S2'` and `S3'` cross back to Alice and wait in her memory.
/// On attacked message slots Eve reads the encoded pulse here.
pub fn return_transit(photons: &mut [PhotonRecord], env: &Environment) -> Result<()> {
    let config = env.config;
    photons
        .par_iter_mut()
        .filter(|p| p.sequence != SequenceTag::S1)
        .try_for_each(|p| -> Result<()> {
            let id = u64::from(p.id);
            if p.attacked {
                if p.sequence == SequenceTag::S3 {
                    let resent_basis = p
                        .eve_basis
                        .ok_or_else(|| Error::ProtocolViolation("intercepted photon without Eve basis".into()))?;
                    let mut rng = env.seeds.stream(Purpose::Eavesdrop, id);
                    p.eve_bit = Some(second_pass_intercept(p, EveKnowledge { resent_basis }, &config, &mut rng)?);
                }
                return Ok(());
            }
            *p = transmit(p.clone(), &env.link, &env.noise, &mut env.seeds.stream(Purpose::ReturnChannel, id));
            *p = env.memory.hold(p.clone(), &mut env.seeds.stream(Purpose::AliceMemory, id))?;
            Ok(())
        })
}

/// Step 5: Alice measures `S2'` and runs the second check on the
/// `(d_i, b_i)` pairs.
pub fn step5_second_check(
    ledger: &SequenceLedger,
    photons: &mut [PhotonRecord],
    env: &Environment,
    rule: &ToleranceRule,
) -> Result<SecurityCheckReport> {
    let r = ledger.r;
    if ledger.x4.len() != r || ledger.round_two_indices.len() != r || ledger.s2_prime_slots.len() != r {
        return Err(Error::ProtocolViolation(format!(
            "round-two announcements have lengths {}/{}/{} for r = {r}",
            ledger.s2_prime_slots.len(),
            ledger.x4.len(),
            ledger.round_two_indices.len()
        )));
    }
    let mut index_of = vec![u32::MAX; photons.len()];
    for (k, &slot) in ledger.s2_prime_slots.iter().enumerate() {
        index_of[ledger.returned[slot] as usize] = ledger.round_two_indices[k];
    }
    let config = env.config;
    photons
        .par_iter_mut()
        .filter(|p| p.sequence == SequenceTag::S2)
        .try_for_each(|p| -> Result<()> {
            let m = Measurement::new(index_of[p.id as usize], config)?;
            measure(p, &m, Party::Alice, env, Purpose::AliceDetector).map(|_| ())
        })?;
    SecurityCheckReport::from_samples(2, &round_two_samples(ledger, photons, &config)?, rule)
}

/// Step 6: Alice restores S3 order and projects each photon onto the exact
/// state she sent. `g = 0` decodes as 0, `g = 1` as 1.
pub fn step6_decode(ledger: &SequenceLedger, photons: &mut [PhotonRecord], env: &Environment) -> Result<MessageFrame> {
    let config = env.config;
    photons
        .par_iter_mut()
        .filter(|p| p.sequence == SequenceTag::S3)
        .try_for_each(|p| -> Result<()> {
            let secret = p.secret_op.unwrap_or(EncodeOp::U0);
            let m = Measurement::with_op(p.prep_index, config, secret)?;
            measure(p, &m, Party::Alice, env, Purpose::AliceDetector).map(|_| ())
        })?;

    let mut payload = Vec::with_capacity(ledger.r);
    let mut decoded = Vec::with_capacity(ledger.r);
    for &id in &ledger.s3 {
        let p = &photons[id as usize];
        let op = p
            .message_op
            .ok_or_else(|| Error::ProtocolViolation(format!("message photon {id} was never encoded")))?;
        payload.push(op.bit());
        decoded.push(match detection_of(p)? {
            DetectionOutcome::Click(g) => Some(g == Outcome::One),
            DetectionOutcome::NoClick => None,
        });
    }
    Ok(MessageFrame::new(payload, decoded))
}
