mod common;

use std::f64::consts::{LN_2, PI};

use common::{dense_max_cool, ksum};
use landauer_core::bounds::{binary_kl, noninteracting_lower_bound};
use landauer_core::collisional::{make_schedule, run_chain, run_chain_steps, Schedule, ScheduleFamily};
use landauer_core::engine::binary_entropy;
use landauer_core::thermo::SystemDiag;
use landauer_core::{max_cool, Policy};
use proptest::prelude::*;

#[test]
fn schedules_end_on_target() {
    for family in ScheduleFamily::GENERATED {
        for n in [1usize, 2, 17, 1024] {
            let s = make_schedule(family, n, 1e-3).unwrap();
            assert_eq!(s.len(), n);
            assert_eq!(s.final_population(), 1e-3);
            assert!(s.populations().windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(s.family(), family);
        }
    }
}

#[test]
fn geodesic_constant_at_large_n() {
    let q = 1e-4;
    let n = 1024;
    let o = run_chain(&make_schedule(ScheduleFamily::Geodesic, n, q).unwrap(), 1.0).unwrap();
    let ratio = n as f64 * o.sigma / (PI * PI / 8.0);
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
}

#[test]
fn chain_bookkeeping() {
    let s = make_schedule(ScheduleFamily::Geometric, 12, 0.02).unwrap();
    let (o, steps) = run_chain_steps(&s, 2.0).unwrap();
    assert_eq!(steps.len(), 12);
    let sum = ksum(steps.iter().map(|r| r.step_sigma));
    assert!((sum - o.sigma).abs() < 1e-14);
    assert_eq!(o.mutual_info, 0.0);
    assert!((o.ds_system - (binary_entropy(0.02) - LN_2)).abs() < 1e-15);
    assert!((o.q_excited - 0.02).abs() < 1e-15);
    for r in &steps {
        assert!((r.energy * 2.0 - ((1.0 - r.population) / r.population).ln()).abs() < 1e-12);
    }
}

#[test]
fn rejects_bad_beta() {
    let s = make_schedule(ScheduleFamily::Linear, 3, 0.1).unwrap();
    assert!(run_chain(&s, 0.0).is_err());
    assert!(run_chain(&s, f64::NAN).is_err());
}

/// A single sorted max-cool on the whole product bath gets the qubit at
/// least as cold as the chain; for one or two bath qubits both protocols
/// are the same permutation.
#[test]
fn joint_max_cool_against_chain() {
    for family in ScheduleFamily::GENERATED {
        for n in 1..=8 {
            let sched = make_schedule(family, n, 0.05).unwrap();
            let chain = run_chain(&sched, 1.0).unwrap();
            let bath = sched.bath_spectrum(1.0).unwrap();
            let (_, joint) = max_cool(&SystemDiag::maximally_mixed(2), &bath, 1.0, Policy::Sorted).unwrap();
            assert!(joint.q_excited <= chain.q_excited + 1e-14, "{family} n={n}");
            if n <= 2 {
                assert!((joint.sigma - chain.sigma).abs() < 1e-12, "{family} n={n}");
            }
            let dense = dense_max_cool(&[0.5, 0.5], &bath, 1.0);
            assert!((dense.outcome.sigma - joint.sigma).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floor_holds_for_every_family(n in 1usize..300, lq in -9.0f64..-0.8, fam in 0usize..3) {
        let q = lq.exp();
        let s = make_schedule(ScheduleFamily::GENERATED[fam], n, q).unwrap();
        let o = run_chain(&s, 1.0).unwrap();
        let floor = noninteracting_lower_bound(o.ds_system, 2, n);
        prop_assert!(o.sigma >= floor);
        prop_assert!(o.identity_residual <= 1e-10);
    }

    #[test]
    fn custom_schedule_sigma_is_sum_of_kls(raw in prop::collection::vec(0.001f64..0.5, 1..20)) {
        let mut pops = raw.clone();
        pops.sort_by(|a, b| b.total_cmp(a));
        let s = Schedule::custom(pops.clone()).unwrap();
        let o = run_chain(&s, 1.0).unwrap();
        let mut prev = 0.5;
        let want = ksum(pops.iter().map(|&p| {
            let k = binary_kl(prev, p);
            prev = p;
            k
        }));
        prop_assert!((o.sigma - want).abs() < 1e-12 * want.max(1.0));
    }
}
