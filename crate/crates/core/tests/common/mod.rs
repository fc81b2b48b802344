//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the compressed machinery beyond reading the
//! level list of a spectrum: every oracle expands the bath into individual
//! microstates and works in plain `f64` with compensated sums.

#![allow(dead_code)]

use landauer_core::Spectrum;
use num_traits::ToPrimitive;

/// Neumaier summation, kept separate from the crate's own.
pub fn ksum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

pub fn shannon(ps: &[f64]) -> f64 {
    ksum(ps.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()))
}

/// Per-microstate energies and level positions.
pub fn expand(spectrum: &Spectrum) -> (Vec<f64>, Vec<usize>) {
    let mut e = Vec::new();
    let mut lvl = Vec::new();
    for (i, l) in spectrum.levels().iter().enumerate() {
        let g = l.degeneracy.to_u64().expect("dense oracle needs small degeneracies");
        for _ in 0..g {
            e.push(l.energy.hi + l.energy.lo);
            lvl.push(i);
        }
    }
    (e, lvl)
}

pub fn dense_gibbs(energies: &[f64], beta: f64) -> Vec<f64> {
    let m = energies.iter().map(|e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = energies.iter().map(|e| (-beta * e - m).exp()).collect();
    let z = ksum(w.iter().copied());
    w.iter().map(|x| x / z).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct DenseOutcome {
    pub beta_q: f64,
    pub heat_q: f64,
    pub ds_system: f64,
    pub ds_bath: f64,
    pub mutual_info: f64,
    pub rel_ent_bath: f64,
    pub sigma: f64,
    pub q_excited: f64,
}

pub struct DenseRun {
    pub outcome: DenseOutcome,
    /// `sigma[s][j]`
    pub joint: Vec<Vec<f64>>,
    pub bath: Vec<f64>,
    pub system: Vec<f64>,
    pub gibbs: Vec<f64>,
    pub energies: Vec<f64>,
    pub levels: Vec<usize>,
}

/// Brute-force max-cooling: list all `d_S·d_B` joint eigenvalues, sort them
/// (descending, ties to lower bath level then lower system index), and fill
/// slots in (system, bath level, microstate) order.
pub fn dense_max_cool(pops: &[f64], spectrum: &Spectrum, beta: f64) -> DenseRun {
    let (energies, levels) = expand(spectrum);
    let g = dense_gibbs(&energies, beta);
    let db = g.len();
    let ds = pops.len();
    let mut values: Vec<(f64, usize, usize)> = Vec::with_capacity(ds * db);
    for (s, p) in pops.iter().enumerate() {
        for j in 0..db {
            values.push((p * g[j], levels[j], s));
        }
    }
    values.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut joint = vec![vec![0.0; db]; ds];
    let mut k = 0;
    for row in joint.iter_mut() {
        for slot in row.iter_mut() {
            *slot = values[k].0;
            k += 1;
        }
    }
    finish(pops, joint, g, energies, levels, beta)
}

/// Functionals of an arbitrary dense joint state reached from `pops ⊗ g`.
pub fn finish(
    pops: &[f64],
    joint: Vec<Vec<f64>>,
    g: Vec<f64>,
    energies: Vec<f64>,
    levels: Vec<usize>,
    beta: f64,
) -> DenseRun {
    let db = g.len();
    let system: Vec<f64> = joint.iter().map(|row| ksum(row.iter().copied())).collect();
    let bath: Vec<f64> = (0..db).map(|j| ksum(joint.iter().map(|row| row[j]))).collect();
    let heat_q = ksum((0..db).map(|j| energies[j] * (bath[j] - g[j])));
    let ds_system = shannon(&system) - shannon(pops);
    let ds_bath = shannon(&bath) - shannon(&g);
    let mut mi_terms = Vec::new();
    for (s, row) in joint.iter().enumerate() {
        for j in 0..db {
            let v = row[j];
            if v > 0.0 {
                mi_terms.push(v * (v.ln() - system[s].ln() - bath[j].ln()));
            }
        }
    }
    let mutual_info = ksum(mi_terms);
    let rel_ent_bath = ksum(
        (0..db)
            .filter(|&j| bath[j] > 0.0)
            .map(|j| bath[j] * (bath[j].ln() - g[j].ln())),
    );
    let outcome = DenseOutcome {
        beta_q: beta * heat_q,
        heat_q,
        ds_system,
        ds_bath,
        mutual_info,
        rel_ent_bath,
        sigma: beta * heat_q + ds_system,
        q_excited: ksum(system[1..].iter().copied()),
    };
    DenseRun {
        outcome,
        joint,
        bath,
        system,
        gibbs: g,
        energies,
        levels,
    }
}

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

fn h(a: f64) -> f64 {
    let t = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    t(a) + t(1.0 - a)
}

fn kl(a: f64, b: f64) -> f64 {
    let t = |p: f64, q: f64| {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    };
    t(a, b) + t(1.0 - a, 1.0 - b)
}

/// Brute-force `M(x, d)`: an `a`-grid of `points` values over
/// `[0, (d-1)/d]`; for each the constraint is solved for `b` by bisection.
pub fn m_grid(x: f64, d: u64, points: usize) -> f64 {
    let l = ((d - 1) as f64).ln();
    let top = (d - 1) as f64 / d as f64;
    let psi = |a: f64| h(a) + a * l;
    let ln_d = (d as f64).ln();
    let mut best = f64::INFINITY;
    for k in 0..=points {
        let a = top * k as f64 / points as f64;
        let t = psi(a) - x;
        if t < 0.0 || t > ln_d {
            continue;
        }
        let (mut lo, mut hi) = (0.0f64, top);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if psi(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = kl(a, 0.5 * (lo + hi));
        if v < best {
            best = v;
        }
    }
    best
}

/// Prints one acceptance line and returns whether it passed.
pub fn report(criterion: u32, passed: bool, detail: &str) -> bool {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion}: {detail}");
    passed
}

/// Dense version of the level-shift assignment on the engineered spectrum
/// (labels `0..=n`, degeneracies `1, 1, 2, ..., 2^(n-1)`), system `(1/2, 1/2)`.
pub fn dense_level_shift(spectrum: &Spectrum, beta: f64) -> DenseRun {
    let (energies, levels) = expand(spectrum);
    let g = dense_gibbs(&energies, beta);
    let label = |j: usize| spectrum.levels()[levels[j]].index;
    let n = spectrum.levels().iter().map(|l| l.index).max().unwrap();
    // Per-microstate Gibbs weight of each label.
    let mut by_label = vec![0.0; n + 1];
    for j in 0..g.len() {
        by_label[label(j)] = g[j];
    }
    let row0: Vec<f64> = (0..g.len())
        .map(|j| {
            let i = label(j);
            0.5 * by_label[i.saturating_sub(1)]
        })
        .collect();
    let row1 = vec![0.5 * by_label[n]; g.len()];
    finish(&[0.5, 0.5], vec![row0, row1], g, energies, levels, beta)
}

pub fn assert_close(what: &str, got: f64, want: f64, tol: f64) {
    let scale = want.abs().max(1.0);
    assert!(
        (got - want).abs() <= tol * scale,
        "{what}: got {got:e}, want {want:e}, diff {:e}",
        (got - want).abs()
    );
}

/// Largest field-wise deviation between a compressed and a dense outcome,
/// relative to `max(1, |dense|)`.
pub fn outcome_deviation(o: &landauer_core::ProcessOutcome, d: &DenseOutcome) -> f64 {
    let pairs = [
        (o.beta_q(), d.beta_q),
        (o.heat_q, d.heat_q),
        (o.ds_system, d.ds_system),
        (o.ds_bath, d.ds_bath),
        (o.mutual_info, d.mutual_info),
        (o.rel_ent_bath, d.rel_ent_bath),
        (o.sigma, d.sigma),
        (o.q_excited, d.q_excited),
    ];
    pairs
        .iter()
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max)
}
