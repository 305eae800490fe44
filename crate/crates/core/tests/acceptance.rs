//! Acceptance gate: one test per criterion, one printed line per check.
//! Run with `--nocapture` to see the lines.

use qsdc_core::verify::{self, Check, VerifyOptions};

fn gate(criterion: u8, checks: Vec<Check>) {
    assert!(!checks.is_empty());
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{c}");
    }
    println!(
        "criterion {criterion}: {} ({} checks, {failed} failed)",
        if failed == 0 { "PASS" } else { "FAIL" },
        checks.len()
    );
    assert_eq!(failed, 0, "criterion {criterion} has failing checks");
}

#[test]
fn criterion_01_eta_thresholds_noiseless() {
    gate(1, verify::criterion_1());
}

#[test]
fn criterion_02_eta_thresholds_noisy() {
    gate(2, verify::criterion_2());
}

#[test]
fn criterion_03_distances() {
    gate(3, verify::criterion_3());
}

#[test]
fn criterion_04_noise_thresholds() {
    gate(4, verify::criterion_4());
}

#[test]
fn criterion_05_fidelity_mapping() {
    gate(5, verify::criterion_5());
}

#[test]
fn criterion_06_efficiency() {
    gate(6, verify::criterion_6());
}

#[test]
fn criterion_07_oracle_equivalence() {
    gate(7, verify::criterion_7(&VerifyOptions::default()));
}

#[test]
fn criterion_08_protocol_correctness() {
    gate(8, verify::criterion_8());
}

#[test]
fn criterion_09_attack_model() {
    gate(9, verify::criterion_9(&VerifyOptions::default()));
}

#[test]
fn criterion_10_properties() {
    gate(10, verify::criterion_10(VerifyOptions::default().seed));
}
