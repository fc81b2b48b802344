//! Simulated annealing over bath spectra.
//!
//! Energies are parametrized as `βε_i = i ln 2 - ln r_i` and the walk moves
//! `ln r_i`. Entropy production does not change under a uniform energy
//! shift, so `ln r_0` is held fixed. Random numbers come from ChaCha8
//! seeded with `seed`, which makes runs reproducible across platforms.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::{max_cool, Policy, ProcessOutcome};
use crate::error::{Error, Result};
use crate::numerics::{Dd, LN_2};
use crate::spectra::engineered_r;
use crate::spectrum::{Level, Spectrum};
use crate::thermo::SystemDiag;

/// Largest bath accepted by [`anneal_full`].
pub const MAX_FULL_QUBITS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnealInit {
    /// The engineered profile `r_i = n^-α + 1 - cos(2πi/n)`.
    Ansatz { alpha: f64 },
    /// `ln r_i` uniform in `[-4, 2]`, `ln r_0 = 0`.
    Random,
    /// Explicit `ln r_i`.
    Given { ln_r: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub steps: usize,
    pub move_scale: f64,
    pub target_q: f64,
    pub q_penalty_weight: f64,
    pub seed: u64,
    pub init: AnnealInit,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Progress-log stride; `0` picks about 200 records per run.
    #[serde(default)]
    pub log_every: usize,
    /// Independent chains; the best one is returned.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Penalty weight at step 0 as a fraction of `q_penalty_weight`; the
    /// weight grows geometrically to its full value over the run.
    #[serde(default = "default_ramp")]
    pub penalty_ramp: f64,
}

fn default_beta() -> f64 {
    1.0
}

fn default_restarts() -> usize {
    1
}

fn default_ramp() -> f64 {
    1e-3
}

impl AnnealConfig {
    /// Engineering defaults for small baths; the penalty is scaled so that a
    /// relative miss of `δ` in `q` costs `10³ δ²`.
    pub fn for_target(target_q: f64, steps: usize, seed: u64) -> Self {
        AnnealConfig {
            initial_temperature: 0.3,
            cooling_rate: (1e-4f64).powf(1.0 / steps.max(1) as f64),
            steps,
            move_scale: 0.3,
            target_q,
            q_penalty_weight: 1e3 / (target_q * target_q),
            seed,
            init: AnnealInit::Random,
            beta: 1.0,
            log_every: 0,
            restarts: 4,
            penalty_ramp: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cooling_rate = {} outside (0, 1)",
                self.cooling_rate
            )));
        }
        if !(self.initial_temperature > 0.0 && self.move_scale > 0.0) {
            return Err(Error::InvalidParameter(
                "initial_temperature and move_scale must be positive".into(),
            ));
        }
        if !(self.target_q > 0.0 && self.target_q < 1.0) || !(self.q_penalty_weight >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "target_q = {}, q_penalty_weight = {}",
                self.target_q, self.q_penalty_weight
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidBeta(self.beta));
        }
        if self.restarts == 0 || !(self.penalty_ramp > 0.0 && self.penalty_ramp <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "restarts = {}, penalty_ramp = {} (need >= 1 and in (0, 1])",
                self.restarts, self.penalty_ramp
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub step: usize,
    pub temperature: f64,
    pub objective: f64,
    pub best_objective: f64,
}

#[derive(Clone, Debug)]
pub struct AnnealResult {
    pub spectrum: Spectrum,
    pub outcome: ProcessOutcome,
    pub objective: f64,
    pub initial_objective: f64,
    /// False when nothing better than the starting point was found.
    pub improved: bool,
    pub accepted: usize,
    pub ln_r: Vec<f64>,
    pub degeneracies: Vec<BigUint>,
    pub log: Vec<ProgressRecord>,
}

#[derive(Clone, Debug)]
struct State {
    ln_r: Vec<f64>,
    degeneracies: Vec<BigUint>,
}

#[derive(Clone)]
struct Evaluated {
    spectrum: Spectrum,
    outcome: ProcessOutcome,
    miss: f64,
}

impl Evaluated {
    fn objective(&self, weight: f64) -> f64 {
        self.outcome.sigma + weight * self.miss * self.miss
    }
}

fn build(state: &State, beta: f64) -> Option<Spectrum> {
    let levels = state
        .ln_r
        .iter()
        .zip(&state.degeneracies)
        .enumerate()
        .map(|(i, (lr, deg))| {
            let e = LN_2.scale_int(i as u64).add_f64(-lr).div_f64(beta);
            Level::new(e, deg.clone(), i)
        })
        .collect();
    let s = Spectrum::from_levels("annealed", levels).ok()?;
    // Colliding energies would merge levels and change the profile.
    (s.len() == state.ln_r.len()).then_some(s)
}

fn evaluate(state: &State, cfg: &AnnealConfig) -> Option<Evaluated> {
    let spectrum = build(state, cfg.beta)?;
    let (_, outcome) =
        max_cool(&SystemDiag::maximally_mixed(2), &spectrum, cfg.beta, Policy::Sorted).ok()?;
    let miss = outcome.q_excited - cfg.target_q;
    (outcome.sigma.is_finite() && miss.is_finite()).then_some(Evaluated {
        spectrum,
        outcome,
        miss,
    })
}

fn initial_ln_r(levels: usize, init: &AnnealInit, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match init {
        AnnealInit::Ansatz { alpha } => {
            if levels < 3 || !(*alpha > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "ansatz start needs n >= 2 and alpha > 0, got {} levels, alpha {alpha}",
                    levels
                )));
            }
            Ok(engineered_r(levels - 1, *alpha).iter().map(|r| r.ln()).collect())
        }
        AnnealInit::Random => Ok((0..levels)
            .map(|i| if i == 0 { 0.0 } else { rng.random_range(-4.0..2.0) })
            .collect()),
        AnnealInit::Given { ln_r } => {
            if ln_r.len() != levels || ln_r.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "given ln r has {} finite entries, need {levels}",
                    ln_r.len()
                )));
            }
            Ok(ln_r.clone())
        }
    }
}

fn check_total(degeneracies: &[BigUint], n: usize) -> Result<()> {
    let total: BigUint = degeneracies.iter().sum();
    if total != BigUint::one() << n || degeneracies.iter().any(|d| d < &BigUint::one()) {
        return Err(Error::InvalidSpectrum(format!(
            "degeneracies sum to {total}, expected 2^{n} with every entry >= 1"
        )));
    }
    Ok(())
}

/// Anneals the energies at a fixed degeneracy profile.
pub fn anneal_energies(n: usize, degeneracies: &[BigUint], cfg: &AnnealConfig) -> Result<AnnealResult> {
    check_total(degeneracies, n)?;
    anneal(&|_| degeneracies.to_vec(), cfg, false)
}

/// Anneals energies and the degeneracy profile (`n + 1` levels).
pub fn anneal_full(n: usize, cfg: &AnnealConfig) -> Result<AnnealResult> {
    if n < 1 || n > MAX_FULL_QUBITS {
        return Err(Error::CapExceeded(format!(
            "full annealing supports 1..={MAX_FULL_QUBITS} qubits, got {n}"
        )));
    }
    let init_degs = |rng: &mut ChaCha8Rng| -> Vec<BigUint> {
        let degs: Vec<u64> = match &cfg.init {
            AnnealInit::Ansatz { .. } => (0..=n)
                .map(|i| if i == 0 { 1u64 } else { 1 << (i - 1) })
                .collect(),
            _ => random_composition(1u64 << n, n + 1, rng),
        };
        degs.into_iter().map(BigUint::from).collect()
    };
    anneal(&init_degs, cfg, true)
}

/// Uniformly random composition of `total` into `parts` positive integers.
fn random_composition(total: u64, parts: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let mut cuts: Vec<u64> = Vec::with_capacity(parts - 1);
    while cuts.len() < parts - 1 {
        let c = rng.random_range(1..total);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(parts);
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push(c - prev);
        prev = c;
    }
    out
}

type DegeneracyInit<'a> = dyn Fn(&mut ChaCha8Rng) -> Vec<BigUint> + 'a;

struct Chain {
    state: State,
    best: Evaluated,
    initial_objective: f64,
    accepted: usize,
    log: Vec<ProgressRecord>,
}

fn anneal(init_degs: &DegeneracyInit<'_>, cfg: &AnnealConfig, move_degeneracy: bool) -> Result<AnnealResult> {
    cfg.validate()?;
    let mut winner: Option<Chain> = None;
    let mut initial_objective = f64::NAN;
    let mut accepted = 0;
    for r in 0..cfg.restarts {
        let seed = cfg.seed.wrapping_add((r as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let chain = run_chain(init_degs, cfg, move_degeneracy, seed)?;
        if r == 0 {
            initial_objective = chain.initial_objective;
        }
        accepted += chain.accepted;
        let full = |c: &Chain| c.best.objective(cfg.q_penalty_weight);
        if winner.as_ref().is_none_or(|w| full(&chain) < full(w)) {
            winner = Some(chain);
        }
    }
    let w = winner.expect("restarts >= 1");
    let objective = w.best.objective(cfg.q_penalty_weight);
    Ok(AnnealResult {
        spectrum: w.best.spectrum,
        outcome: w.best.outcome,
        objective,
        initial_objective,
        improved: objective < initial_objective,
        accepted,
        ln_r: w.state.ln_r,
        degeneracies: w.state.degeneracies,
        log: w.log,
    })
}

fn run_chain(
    init_degs: &DegeneracyInit<'_>,
    cfg: &AnnealConfig,
    move_degeneracy: bool,
    seed: u64,
) -> Result<Chain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degeneracies = init_degs(&mut rng);
    let levels = degeneracies.len();
    if levels < 2 {
        return Err(Error::InvalidSpectrum("need at least two levels".into()));
    }
    let mut state = State {
        ln_r: initial_ln_r(levels, &cfg.init, &mut rng)?,
        degeneracies,
    };
    let mut current = evaluate(&state, cfg).ok_or_else(|| {
        Error::InvalidSpectrum("initial spectrum is degenerate or unevaluable".into())
    })?;
    let full_weight = cfg.q_penalty_weight;
    let initial_objective = current.objective(full_weight);
    let mut best_state = state.clone();
    let mut best = current.clone();
    let normal = Normal::new(0.0, cfg.move_scale)
        .map_err(|e| Error::InvalidParameter(format!("move_scale: {e}")))?;
    let stride = if cfg.log_every > 0 {
        cfg.log_every
    } else {
        (cfg.steps / 200).max(1)
    };
    let weight_at = |step: usize| -> f64 {
        let frac = step as f64 / cfg.steps.max(1) as f64;
        full_weight * cfg.penalty_ramp.powf(1.0 - frac)
    };
    let mut log = vec![ProgressRecord {
        step: 0,
        temperature: cfg.initial_temperature,
        objective: initial_objective,
        best_objective: initial_objective,
    }];
    let mut temperature = cfg.initial_temperature;
    let mut accepted = 0;
    for step in 1..=cfg.steps {
        let weight = weight_at(step);
        let mut proposal = state.clone();
        let moved = if move_degeneracy && rng.random_bool(0.5) {
            transfer_degeneracy(&mut proposal.degeneracies, &mut rng)
        } else {
            let i = rng.random_range(1..levels);
            proposal.ln_r[i] += normal.sample(&mut rng);
            true
        };
        if moved {
            if let Some(candidate) = evaluate(&proposal, cfg) {
                let delta = candidate.objective(weight) - current.objective(weight);
                if delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp() {
                    accepted += 1;
                    state = proposal;
                    current = candidate;
                    if current.objective(full_weight) < best.objective(full_weight) {
                        best_state = state.clone();
                        best = current.clone();
                    }
                }
            }
        }
        temperature *= cfg.cooling_rate;
        if step % stride == 0 || step == cfg.steps {
            log.push(ProgressRecord {
                step,
                temperature,
                objective: current.objective(full_weight),
                best_objective: best.objective(full_weight),
            });
        }
    }
    Ok(Chain {
        state: best_state,
        best,
        initial_objective,
        accepted,
        log,
    })
}

/// Moves microstates between two neighbouring labels, keeping every
/// degeneracy at least one. Returns false when no move is possible.
fn transfer_degeneracy(degs: &mut [BigUint], rng: &mut ChaCha8Rng) -> bool {
    let i = rng.random_range(0..degs.len() - 1);
    let (from, to) = if rng.random_bool(0.5) { (i, i + 1) } else { (i + 1, i) };
    let available = degs[from].to_u64().unwrap_or(u64::MAX) - 1;
    if available == 0 {
        return false;
    }
    let amount = rng.random_range(1..=available.div_ceil(2));
    degs[from] -= amount;
    degs[to] += amount;
    true
}

/// Energies `βε_i` of a parametrization, for reporting.
pub fn beta_energies(ln_r: &[f64]) -> Vec<Dd> {
    ln_r.iter()
        .enumerate()
        .map(|(i, lr)| LN_2.scale_int(i as u64).add_f64(-lr))
        .collect()
}
