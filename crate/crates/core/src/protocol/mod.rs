//! The six-step RDI QSDC protocol, driven photon by photon.

mod check;
mod ledger;
mod message;
mod policy;
mod run;
mod steps;
pub mod transcript;

pub use check::{assign_no_click, CheckSample, SecurityCheckReport, ToleranceRule, Verdict};
pub use ledger::{Permutation, SecondRoundBasis, SequenceLedger};
pub use message::{BitStatus, MessageFrame, MessageSource};
pub use policy::{offset_probability, BasisPolicy, OffsetDistribution, OffsetSampler};
pub use run::{
    run_full_protocol, Announcements, EmpiricalStats, LossAccounting, MessageStats, ProtocolParams, RoundStats,
    RunStatus, Transcript, TranscriptSummary,
};
pub use steps::{
    return_transit, round_one_samples, round_two_samples, step1_prepare, step2_distribute, step3_first_check,
    step4_encode_and_shuffle, step5_second_check, step6_decode, Environment,
};
