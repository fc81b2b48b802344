//! Acceptance suite: one line per criterion, nonzero exit only on an
//! unexpected failure. Run with `cargo test -p landauer-core --test acceptance`.

mod common;

use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use common::{dense_level_shift, dense_max_cool, ksum, m_grid, outcome_deviation, report};
use landauer_core::bounds::{heat_decomposition, m_function, noninteracting_lower_bound};
use landauer_core::collisional::{make_schedule, run_chain, ScheduleFamily};
use landauer_core::experiments::{engineered_run, fig3_rows};
use landauer_core::optimizer::{anneal_energies, AnnealConfig};
use landauer_core::spectra::{
    critical_degenerate, critical_max_heat_capacity, engineered_interacting,
    engineered_partition_closed_form, non_interacting_qubits, CriticalParams, EngineeredParams,
};
use landauer_core::thermo::{heat_capacity, log_partition, SystemDiag};
use landauer_core::{max_cool, Policy, ProcessOutcome, Spectrum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose failure is documented and does not fail the suite.
const EXPECTED_FAILURES: &[u32] = &[8];

fn engineered(n: usize) -> Spectrum {
    engineered_interacting(&EngineeredParams::new(n, 3.0, 1.0).unwrap()).unwrap()
}

fn half() -> SystemDiag {
    SystemDiag::maximally_mixed(2)
}

fn run(s: &Spectrum, policy: Policy) -> ProcessOutcome {
    max_cool(&half(), s, 1.0, policy).unwrap().1
}

fn random_spectrum(rng: &mut ChaCha8Rng, max_dim: u64) -> Spectrum {
    loop {
        let levels = rng.random_range(1..=12);
        let mut budget = max_dim;
        let mut lv = Vec::new();
        for _ in 0..levels {
            if budget == 0 {
                break;
            }
            let g = rng.random_range(1..=budget.min(600));
            budget -= g;
            lv.push((rng.random_range(-3.0..3.0), g));
        }
        if let Ok(s) = Spectrum::new("random", &lv) {
            return s;
        }
    }
}

fn random_system(rng: &mut ChaCha8Rng) -> SystemDiag {
    let d = rng.random_range(2..=4);
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..1.0)).collect();
    let t: f64 = raw.iter().sum();
    SystemDiag::new(raw.iter().map(|x| x / t).collect()).unwrap()
}

fn criterion_1() -> bool {
    let mut worst: f64 = 0.0;
    let mut min_sigma = f64::INFINITY;
    let mut runs = 0;
    let mut note = |o: &ProcessOutcome| {
        worst = worst.max(o.identity_residual).max((o.sigma - o.mutual_info - o.rel_ent_bath).abs());
        min_sigma = min_sigma.min(o.sigma);
        runs += 1;
    };
    for n in [2usize, 3, 5, 8, 12, 64, 256, 1024, 4096] {
        let s = engineered(n);
        for p in [Policy::Sorted, Policy::LevelShift] {
            note(&run(&s, p));
        }
        for a in [0.3, 0.7] {
            if let Ok(c) = CriticalParams::new(n, a, 1.0) {
                note(&run(&critical_degenerate(&c).unwrap(), Policy::Sorted));
            }
        }
        note(&run(&non_interacting_qubits(n, 1.0).unwrap(), Policy::Sorted));
        for f in ScheduleFamily::GENERATED {
            note(&run_chain(&make_schedule(f, n, 1e-3).unwrap(), 1.0).unwrap());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let s = random_spectrum(&mut rng, 512);
        let sys = random_system(&mut rng);
        let beta = rng.random_range(0.05..4.0);
        note(&max_cool(&sys, &s, beta, Policy::Sorted).unwrap().1);
    }
    report(
        1,
        worst <= 1e-10 && min_sigma >= -1e-14,
        &format!("identity residual max {worst:.2e}, min sigma {min_sigma:.3e} over {runs} runs"),
    )
}

fn criterion_2() -> bool {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut check = |o: &ProcessOutcome, d: &common::DenseOutcome| {
        worst = worst.max(outcome_deviation(o, d));
        cases += 1;
    };
    for n in 2..=11 {
        let s = engineered(n);
        check(&run(&s, Policy::Sorted), &dense_max_cool(&[0.5, 0.5], &s, 1.0).outcome);
        check(&run(&s, Policy::LevelShift), &dense_level_shift(&s, 1.0).outcome);
    }
    for n in 1..=12 {
        for a in [0.3, 0.6, 0.95] {
            let Ok(c) = CriticalParams::new(n, a, 1.0) else { continue };
            let s = critical_degenerate(&c).unwrap();
            check(&run(&s, Policy::Sorted), &dense_max_cool(&[0.5, 0.5], &s, 1.0).outcome);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..60 {
        let s = random_spectrum(&mut rng, 4096);
        let sys = random_system(&mut rng);
        let beta = rng.random_range(0.05..4.0);
        let o = max_cool(&sys, &s, beta, Policy::Sorted).unwrap().1;
        check(&o, &dense_max_cool(sys.populations(), &s, beta).outcome);
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        2,
        worst <= 1e-12 && secs < 30.0,
        &format!("max field deviation {worst:.2e} over {cases} spectra, {secs:.1} s"),
    )
}

fn criterion_3() -> bool {
    let t = Instant::now();
    let sigma = |n: usize, p: Policy| run(&engineered(n), p).sigma;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [Policy::LevelShift, Policy::Sorted] {
        let ratios: Vec<f64> = [128usize, 256, 512]
            .iter()
            .map(|&n| sigma(n, p) / sigma(2 * n, p))
            .collect();
        ok &= ratios.iter().all(|r| (3.6..=4.4).contains(r));
        parts.push(format!("{p} ratios {ratios:.3?}"));
    }
    let n = 1024usize;
    let scaled = sigma(n, Policy::LevelShift) * (n * n) as f64 / (2.0 * PI * PI);
    ok &= (0.9..=1.1).contains(&scaled);
    let mut dominated = true;
    for n in [2usize, 3, 4, 8, 16, 64, 128, 256, 512, 1024, 2048] {
        let s = engineered(n);
        dominated &= run(&s, Policy::Sorted).sigma <= run(&s, Policy::LevelShift).sigma + 1e-15;
    }
    ok &= dominated;
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    report(
        3,
        ok,
        &format!(
            "{}; n^2 sigma/2pi^2 at 1024 = {scaled:.4}; sorted <= level_shift: {dominated}; {secs:.1} s",
            parts.join("; ")
        ),
    )
}

fn criterion_4() -> bool {
    let mut worst_q: f64 = 0.0;
    for n in [4usize, 8, 64, 512, 4096] {
        let p = EngineeredParams::new(n, 3.0, 1.0).unwrap();
        let t = heat_decomposition(&p).unwrap();
        let o = run(&engineered_interacting(&p).unwrap(), Policy::LevelShift);
        worst_q = worst_q.max(((t.a - t.b - t.c - t.d) / o.beta_q() - 1.0).abs());
        worst_q = worst_q.max((t.beta_q / o.beta_q() - 1.0).abs());
    }
    let mut worst_z: f64 = 0.0;
    for n in [2usize, 4, 8, 64, 512, 4096] {
        for alpha in [0.5, 3.0] {
            let s = engineered_interacting(&EngineeredParams::new(n, alpha, 1.0).unwrap()).unwrap();
            let z = log_partition(&s, 1.0).unwrap().value().exp();
            worst_z = worst_z.max((z / engineered_partition_closed_form(n, alpha) - 1.0).abs());
        }
    }
    let mut worst_trig: f64 = 0.0;
    for n in [4usize, 7, 16] {
        let nf = n as f64;
        let c = |k: usize| (2.0 * PI * k as f64 / nf).cos();
        let s1 = ksum((1..=n).map(|i| i as f64 * c(i)));
        let s2 = ksum((1..=n).map(|i| i as f64 * c(i - 1)));
        worst_trig = worst_trig.max((s1 - nf / 2.0).abs()).max((s2 + nf / 2.0).abs());
        worst_trig = worst_trig.max(ksum((1..=n).map(c)).abs());
        let pow: u64 = (1..=n as u64).map(|i| i << i).sum();
        worst_trig = worst_trig.max((pow as f64 - 2.0 * (1.0 + (nf - 1.0) * 2f64.powi(n as i32))).abs());
    }
    report(
        4,
        worst_q <= 1e-12 && worst_z <= 1e-10 && worst_trig <= 1e-12,
        &format!("A-B-C-D vs engine {worst_q:.2e}; Z closed form {worst_z:.2e}; trig sums {worst_trig:.2e}"),
    )
}

fn criterion_5() -> bool {
    let t = Instant::now();
    let mut floor_ok = true;
    let mut runs = 0;
    for f in ScheduleFamily::GENERATED {
        for k in 0..=10 {
            let n = 1usize << k;
            for q in [0.2, 1e-2, 1e-4, 1e-8] {
                let o = run_chain(&make_schedule(f, n, q).unwrap(), 1.0).unwrap();
                floor_ok &= o.sigma >= noninteracting_lower_bound(o.ds_system, 2, n);
                runs += 1;
            }
        }
    }
    let n = 1024;
    let o = run_chain(&make_schedule(ScheduleFamily::Geodesic, n, 1e-4).unwrap(), 1.0).unwrap();
    let ratio = n as f64 * o.sigma / (PI * PI / 8.0);
    let secs = t.elapsed().as_secs_f64();
    report(
        5,
        floor_ok && (ratio - 1.0).abs() <= 0.1 && secs < 5.0,
        &format!("floor holds on {runs} chains: {floor_ok}; geodesic n*sigma/(pi^2/8) = {ratio:.4}; {secs:.2} s"),
    )
}

fn criterion_6() -> bool {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [64usize, 256, 1024] {
        for p in [Policy::LevelShift, Policy::Sorted] {
            let r = engineered_run(n, 3.0, 1.0, p).unwrap();
            let (rw, hc) = (r.row.lb_rw.unwrap(), r.row.lb_heatcap.unwrap());
            let pass = rw <= hc && hc <= r.outcome.sigma;
            ok &= pass;
            if p == Policy::LevelShift {
                parts.push(format!("n={n}: {rw:.2e} <= {hc:.2e} <= {:.2e}", r.outcome.sigma));
            }
        }
    }
    report(6, ok, &parts.join("; "))
}

fn criterion_7() -> bool {
    let c_eng = |n: usize| heat_capacity(&engineered(n), 1.0).unwrap();
    let ratios: Vec<f64> = [256usize, 512, 1024].iter().map(|&n| c_eng(n) / c_eng(n / 2)).collect();
    let eng_ok = ratios.iter().all(|r| (3.5..=4.5).contains(r));
    let per: Vec<f64> = [16usize, 64, 256, 1024, 4096]
        .iter()
        .map(|&n| heat_capacity(&non_interacting_qubits(n, 1.0).unwrap(), 1.0).unwrap() / n as f64)
        .collect();
    let (lo, hi) = per.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let nonint_ok = hi / lo - 1.0 <= 0.01;
    let (_, c_max) = critical_max_heat_capacity(10, 1.0).unwrap();
    let target = 0.25 * 100.0 * LN_2 * LN_2;
    let crit_ok = (c_max / target - 1.0).abs() <= 0.15;
    report(
        7,
        eng_ok && nonint_ok && crit_ok,
        &format!(
            "engineered C ratios {ratios:.3?}; non-interacting C/n spread {:.1e}; critical max C at n=10 {c_max:.3} vs {target:.3}",
            hi / lo - 1.0
        ),
    )
}

fn criterion_8() -> bool {
    let rows = fig3_rows(&[64, 128, 256, 512], 3.0, 1.0).unwrap();
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].sigma / w[0].sigma).collect();
    let c_ratios: Vec<f64> = rows.windows(2).map(|w| w[1].heat_capacity / w[0].heat_capacity).collect();
    let ok = ratios.iter().all(|r| (0.45..=0.55).contains(r));
    report(
        8,
        ok,
        &format!(
            "critical sigma(2n)/sigma(n) for n=64,128,256: {ratios:.3?}; bath C(2n)/C(n): {c_ratios:.3?}"
        ),
    )
}

fn criterion_9() -> bool {
    let zero_ok = [2u64, 3, 5, 10].iter().all(|&d| m_function(0.0, d).unwrap() == 0.0);
    let floor_ok = (0..50).all(|k| {
        let x = -0.98 * LN_2 + 1.96 * LN_2 * k as f64 / 49.0;
        m_function(x, 2).unwrap() >= x * x / (3.0 * LN_2 * LN_2)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_convex = f64::NEG_INFINITY;
    for _ in 0..100 {
        let d = rng.random_range(2..=6u64);
        let lim = 0.95 * (d as f64).ln();
        let (x1, x2, p) = (rng.random_range(-lim..lim), rng.random_range(-lim..lim), rng.random::<f64>());
        let mid = m_function(p * x1 + (1.0 - p) * x2, d).unwrap();
        let chord = p * m_function(x1, d).unwrap() + (1.0 - p) * m_function(x2, d).unwrap();
        worst_convex = worst_convex.max(mid - chord);
    }
    let t = Instant::now();
    let instances = [
        (0.3, 2u64),
        (-0.3, 2),
        (0.6, 2),
        (-0.65, 2),
        (0.05, 2),
        (0.5, 3),
        (-0.8, 3),
        (1.0, 4),
        (-1.2, 5),
        (1.9, 8),
    ];
    let worst_grid = instances
        .iter()
        .map(|&(x, d)| (m_function(x, d).unwrap() - m_grid(x, d, 1_000_000)).abs())
        .fold(0.0f64, f64::max);
    report(
        9,
        zero_ok && floor_ok && worst_convex <= 1e-8 && worst_grid <= 1e-6,
        &format!(
            "M(0,d)=0: {zero_ok}; quadratic floor on 50 points: {floor_ok}; convexity excess {worst_convex:.1e}; grid oracle {worst_grid:.1e} ({:.1} s)",
            t.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_10() -> bool {
    let t = Instant::now();
    let n = 4;
    let ansatz = run(&engineered(n), Policy::Sorted);
    let q = ansatz.q_excited;
    let degs: Vec<BigUint> = (0..=n)
        .map(|i| BigUint::from(if i == 0 { 1u64 } else { 1 << (i - 1) }))
        .collect();
    let mut hits = 0;
    let mut sigmas = Vec::new();
    for seed in 0..10 {
        let r = anneal_energies(n, &degs, &AnnealConfig::for_target(q, 20_000, seed)).unwrap();
        let o = r.outcome;
        if o.sigma <= 1.05 * ansatz.sigma && ((o.q_excited - q) / q).abs() <= 0.05 {
            hits += 1;
        }
        sigmas.push(o.sigma);
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        10,
        hits >= 8 && secs < 120.0,
        &format!(
            "{hits}/10 seeds within 5% of ansatz sigma {:.4} at q = {q:.5}; annealed sigma {sigmas:.3?}; {secs:.1} s",
            ansatz.sigma
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> bool); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut unexpected = Vec::new();
    for (k, f) in criteria {
        let passed = f();
        let expected_fail = EXPECTED_FAILURES.contains(&k);
        if !passed && !expected_fail {
            unexpected.push(k);
        }
        if passed && expected_fail {
            println!("note: criterion {k} is listed as an expected failure but passed");
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures (expected failures: {EXPECTED_FAILURES:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
