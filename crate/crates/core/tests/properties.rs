use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use qsdc_core::analysis::{binary_entropy, error_budget, eta_threshold, secrecy_capacity, CapacityParams};
use qsdc_core::protocol::{offset_probability, BasisPolicy, Permutation, ToleranceRule};
use qsdc_core::quantum::{
    apply_encode, apply_rotation, outcome_probability, prepare, state_fidelity, BasisConfig, ChannelRotation, EncodeOp,
    Measurement,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn basis() -> impl Strategy<Value = BasisConfig> {
    (prop_oneof![Just(3u32), 5u32..=64], 0.01f64..1.56).prop_map(|(n, t)| BasisConfig::new(n, t).unwrap())
}

proptest! {
    #[test]
    fn prepared_and_transformed_states_stay_normalized(
        cfg in basis(), x in 1u32..=64, bit in any::<bool>(), angle in -PI..PI,
    ) {
        let x = (x - 1) % cfg.n() + 1;
        let s = prepare(x, cfg).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() <= TOL);
        let e = apply_encode(&s, EncodeOp::from_bit(bit));
        prop_assert!((e.norm_sqr() - 1.0).abs() <= TOL);
        let r = apply_rotation(&e, ChannelRotation::new(angle));
        prop_assert!((r.norm_sqr() - 1.0).abs() <= TOL);
    }

    #[test]
    fn double_flip_is_identity(cfg in basis(), x in 1u32..=64) {
        let s = prepare((x - 1) % cfg.n() + 1, cfg).unwrap();
        let back = apply_encode(&apply_encode(&s, EncodeOp::U1), EncodeOp::U1);
        prop_assert!(back.approx_eq(&s, TOL));
    }

    #[test]
    fn rotations_compose_inside_the_first_quadrant(a in 0.0f64..0.7, b in 0.0f64..0.7) {
        let cfg = BasisConfig::with_n(16).unwrap();
        let s = prepare(3, cfg).unwrap();
        let two = apply_rotation(&apply_rotation(&s, ChannelRotation::new(a)), ChannelRotation::new(b));
        let one = apply_rotation(&s, ChannelRotation::new(a + b));
        prop_assert!(two.approx_eq(&one, TOL));
    }

    #[test]
    fn complementary_outcomes_sum_to_one(n in 5u32..=64, x in 1u32..=64, w in 1u32..=64) {
        let cfg = BasisConfig::with_n(n).unwrap();
        let s = prepare((x - 1) % cfg.n() + 1, cfg).unwrap();
        let w = (w - 1) % cfg.n() + 1;
        let p0 = outcome_probability(&s, &Measurement::new(w, cfg).unwrap());
        let p1 = outcome_probability(&s, &Measurement::with_op(w, cfg, EncodeOp::U1).unwrap());
        prop_assert!((0.0..=1.0).contains(&p0));
        prop_assert!((p0 + p1 - 1.0).abs() <= TOL);
    }

    #[test]
    fn offset_formula_matches_state_overlap(cfg in basis(), x in 1u32..=64, w in 1u32..=64) {
        let (x, w) = ((x - 1) % cfg.n() + 1, (w - 1) % cfg.n() + 1);
        let p = outcome_probability(&prepare(x, cfg).unwrap(), &Measurement::new(w, cfg).unwrap());
        prop_assert!((p - offset_probability(&cfg, cfg.offset(x, w))).abs() <= TOL);
        let f = state_fidelity(&prepare(x, cfg).unwrap(), &prepare(w, cfg).unwrap());
        prop_assert!((p - f).abs() <= TOL);
    }

    #[test]
    fn target_policy_hits_its_target(target in 0.0f64..=1.0) {
        let cfg = BasisConfig::with_n(16).unwrap();
        let d = BasisPolicy::TargetP1 { target }.offset_distribution(&cfg).unwrap();
        prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() <= TOL);
        prop_assert!((d.expected_p0(&cfg) - target).abs() <= TOL);
        prop_assert!((d.mean_cos() - (2.0 * target - 1.0)).abs() <= TOL);
    }

    #[test]
    fn permutation_inverse_restores(len in 1usize..300, seed in any::<u64>()) {
        let p = Permutation::random(len, &mut ChaCha8Rng::seed_from_u64(seed));
        let items: Vec<usize> = (0..len).collect();
        prop_assert_eq!(p.inverse().apply(&p.apply(&items)), items);
    }

    #[test]
    fn capacity_is_symmetric_in_p1(p1 in 0.0f64..=1.0, d in 0.0f64..PI, eta in 0.0f64..=1.0) {
        let a = secrecy_capacity(&CapacityParams::with_eta(p1, d, eta)).unwrap();
        let b = secrecy_capacity(&CapacityParams::with_eta(1.0 - p1, d, eta)).unwrap();
        prop_assert!((a.c_s - b.c_s).abs() <= TOL);
    }

    #[test]
    fn error_budget_has_noise_periods(p1 in 0.0f64..=1.0, d in 0.0f64..PI, eta in 0.0f64..=1.0) {
        let e = |d: f64| error_budget(&CapacityParams::with_eta(p1, d, eta)).unwrap();
        prop_assert!((e(d).e_ab - e(d + PI).e_ab).abs() <= TOL);
        prop_assert!((e(d).e_aba - e(d + FRAC_PI_2).e_aba).abs() <= TOL);
        let c = |d: f64| secrecy_capacity(&CapacityParams::with_eta(p1, d, 1.0)).unwrap().c_s;
        prop_assert!((c(d) - c(PI - d)).abs() <= TOL);
    }

    #[test]
    fn error_budget_components_add_up(p1 in 0.0f64..=1.0, d in -PI..PI, eta in 0.0f64..=1.0) {
        let e = error_budget(&CapacityParams::with_eta(p1, d, eta)).unwrap();
        for x in [e.e_ab, e.e_ab_loss, e.e_aba, e.e_aba_loss] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!((e.total_ab - e.e_ab - e.e_ab_loss).abs() <= TOL);
        prop_assert!((e.total_aba - e.e_aba - e.e_aba_loss).abs() <= TOL);
    }

    #[test]
    fn capacity_bounds(p1 in 0.0f64..=1.0, d in -PI..PI, eta in 0.0f64..=1.0) {
        let p = secrecy_capacity(&CapacityParams::with_eta(p1, d, eta)).unwrap();
        prop_assert!(p.i_ab >= -TOL && p.i_ab <= p.q_aba + TOL);
        prop_assert!(p.i_be >= -TOL && p.i_be <= p.q_ab + TOL);
        prop_assert!(p.c_s.abs() <= 1.0 + TOL);
        prop_assert!((p.c_s - (p.i_ab - p.i_be)).abs() <= TOL);
    }

    #[test]
    fn noiseless_capacity_grows_with_eta(p1 in 0.001f64..=0.999, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let at = |eta: f64| secrecy_capacity(&CapacityParams::with_eta(p1, 0.0, eta)).unwrap();
        // C_S vanishes at η = 0 and dips below zero before the threshold,
        // so it only grows from the threshold upward.
        let star = eta_threshold(p1, 0.0, 1e-9).unwrap();
        let (clo, chi) = (star + (1.0 - star) * lo, star + (1.0 - star) * hi);
        prop_assert!(at(clo).c_s <= at(chi).c_s + TOL);
        prop_assert!(at(lo).errors.total_ab + TOL >= at(hi).errors.total_ab);
        prop_assert!(at(lo).errors.total_aba + TOL >= at(hi).errors.total_aba);
    }

    #[test]
    fn entropy_is_symmetric_and_bounded(x in 0.0f64..=1.0) {
        let h = binary_entropy(x).unwrap();
        prop_assert!((0.0..=1.0 + TOL).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - x).unwrap()).abs() <= TOL);
    }

    #[test]
    fn hoeffding_tolerance_shrinks_with_m(m in 1usize..1_000_000) {
        let rule = ToleranceRule::default();
        prop_assert!(rule.tolerance(m + 1) < rule.tolerance(m));
    }
}
