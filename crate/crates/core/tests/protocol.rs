use std::f64::consts::LN_2;

use ecsim_core::purification::decoherence::{decohere, f_tau, purification_threshold, DecoherenceParams};
use ecsim_core::purification::protocol::{
    full_round, p1_round, p2_round, run_multimode, run_trials, werner_ensemble, ProtocolSampler,
};
use ecsim_core::purification::twirl::werner_twirl;
use ecsim_core::purification::{fidelity_recursion, keep_probability, run_protocol, ProtocolConfig, RunMode, Scheme};
use ecsim_core::rng::stream;
use ecsim_core::states::quasi_bell;
use ecsim_core::{MixedState, QuasiBell};
use proptest::prelude::*;

fn pair(alpha: f64, f: f64, target: QuasiBell) -> MixedState {
    let w = werner_ensemble(alpha, f, target).unwrap();
    w.tensor(&w)
}

#[test]
fn purify_sequence_from_three_quarters() {
    let cfg = ProtocolConfig {
        alpha: 2.0,
        scheme: Scheme::Full,
        target: QuasiBell::PhiMinus,
        iterations: 3,
        mode: RunMode::Exact,
    };
    let rows = run_protocol(&cfg, 0.75).unwrap();
    let want = [0.9, 0.987_804_878_048_780_5, 0.999_847_607_436_757];
    for (r, w) in rows.iter().zip(want) {
        assert!((r.fidelity_after - w).abs() < 1e-10, "{}", r.fidelity_after);
        assert!((r.fidelity_recursion - w).abs() < 1e-12);
        assert!((r.amplitude_after - 2.0).abs() < 1e-12);
    }
}

#[test]
fn half_is_a_fixed_point() {
    let cfg = ProtocolConfig {
        alpha: 1.5,
        scheme: Scheme::Full,
        target: QuasiBell::PhiMinus,
        iterations: 2,
        mode: RunMode::Exact,
    };
    for r in run_protocol(&cfg, 0.5).unwrap() {
        assert!((r.fidelity_after - 0.5).abs() < 1e-12);
    }
}

#[test]
fn simplified_scheme_three_rounds() {
    let cfg = ProtocolConfig {
        alpha: 2.0,
        scheme: Scheme::SimpleP1,
        target: QuasiBell::PhiPlus,
        iterations: 3,
        mode: RunMode::Exact,
    };
    let rows = run_protocol(&cfg, 2.0 / 3.0).unwrap();
    let last = rows.last().unwrap();
    assert!((last.amplitude_after - 2.0 * 2f64.powf(1.5)).abs() < 1e-12);
    assert!((last.fidelity_after - 0.996_108_949_416_342_3).abs() < 1e-9);
    assert!((fidelity_recursion(last.fidelity_after) - 0.999_984_741_443_764_6).abs() < 1e-9);
}

#[test]
fn parity_stage_examples() {
    let a2 = 2f64.sqrt();
    let phi = MixedState::pure(quasi_bell(a2, QuasiBell::PhiPlus).unwrap()).unwrap();
    let out = p2_round(&phi, QuasiBell::PhiMinus).unwrap().state.unwrap();
    assert!((out.fidelity(&quasi_bell(1.0, QuasiBell::PhiMinus).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    let psi = MixedState::pure(quasi_bell(a2, QuasiBell::PsiPlus).unwrap()).unwrap();
    let out = p2_round(&psi, QuasiBell::PhiMinus).unwrap().state.unwrap();
    assert!((out.fidelity(&quasi_bell(1.0, QuasiBell::PsiMinus).unwrap()).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn multimode_from_point_seven() {
    let rows = run_multimode(2.0, 0.7, 1).unwrap();
    assert!((rows[0].fidelity_after - 0.49 / 0.58).abs() < 1e-9);
    let rows = run_multimode(2.0, 1.0, 2).unwrap();
    assert!(rows.iter().all(|r| (r.fidelity_after - 1.0).abs() < 1e-12));
    assert!((rows[1].amplitude_after - 4.0).abs() < 1e-12);
}

#[test]
fn sampler_splits_merge_to_the_same_tally() {
    let p = pair(1.0, 0.8, QuasiBell::PhiMinus);
    let sampler = ProtocolSampler::full(&p, 1.0, QuasiBell::PhiMinus).unwrap();
    let whole = run_trials(&sampler, 99, 0..3000);
    let parts = run_trials(&sampler, 99, 0..1234).merge(run_trials(&sampler, 99, 1234..3000));
    assert_eq!(whole.kept, parts.kept);
    assert_eq!(whole.trials, parts.trials);
    assert!((whole.fidelity_sum - parts.fidelity_sum).abs() < 1e-9);
}

#[test]
fn threshold_and_endpoints() {
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        assert!((purification_threshold(alpha).unwrap() - LN_2).abs() < 1e-9);
        assert!((f_tau(DecoherenceParams::new(0.0, alpha).unwrap()) - 1.0).abs() < 1e-15);
        assert!(f_tau(DecoherenceParams::new(2.0 * LN_2, alpha).unwrap()) < 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn full_round_improves_fidelity(f in 0.55f64..0.98, alpha in 0.5f64..2.5) {
        let out = full_round(&pair(alpha, f, QuasiBell::PhiMinus), alpha, QuasiBell::PhiMinus).unwrap();
        let after = out.state.unwrap().fidelity(&quasi_bell(alpha, QuasiBell::PhiMinus).unwrap()).unwrap();
        prop_assert!(after > f);
        prop_assert!((after - fidelity_recursion(f)).abs() < 1e-9);
        prop_assert!((out.probability - keep_probability(f, alpha, Scheme::Full)).abs() < 1e-12);
    }

    #[test]
    fn comparison_stage_grows_amplitude(f in 0.0f64..1.0, alpha in 0.5f64..2.0) {
        let out = p1_round(&pair(alpha, f, QuasiBell::PhiPlus), alpha).unwrap();
        prop_assert!((out.state.unwrap().max_amplitude() - 2f64.sqrt() * alpha).abs() < 1e-12);
    }

    #[test]
    fn loss_preserves_trace(gt in 0.0f64..3.0, alpha in 0.1f64..3.0, f in 0.0f64..1.0) {
        let rho = werner_ensemble(alpha, f, QuasiBell::PhiMinus).unwrap();
        let out = decohere(&rho, gt).unwrap();
        prop_assert!((out.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn damped_fidelity_is_a_probability(gt in 0.0f64..5.0, alpha in 0.1f64..4.0) {
        let f = f_tau(DecoherenceParams::new(gt, alpha).unwrap());
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn twirl_keeps_phi_minus_weight(f in 0.0f64..1.0, alpha in 0.5f64..2.0, seed in 0u64..1000) {
        let rho = werner_ensemble(alpha, f, QuasiBell::PsiMinus).unwrap();
        let target = quasi_bell(alpha, QuasiBell::PhiMinus).unwrap();
        let out = werner_twirl(&rho, 40, &mut stream(seed)).unwrap();
        prop_assert!((out.fidelity(&target).unwrap() - rho.fidelity(&target).unwrap()).abs() < 1e-10);
    }
}
