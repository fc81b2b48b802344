//! Thermodynamic primitives on compressed spectra.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::{ln_count, log_sum_exp, Dd, NeumaierSum};
use crate::spectrum::Spectrum;

/// `count` microstates of `level`, each with probability `exp(log_prob)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chunk {
    pub level: usize,
    pub count: BigUint,
    pub log_prob: Dd,
}

impl Chunk {
    pub fn new(level: usize, count: BigUint, log_prob: Dd) -> Self {
        Chunk {
            level,
            count,
            log_prob,
        }
    }

    /// `ln(count · p)`.
    pub fn log_weight(&self) -> Dd {
        if self.log_prob.hi == f64::NEG_INFINITY {
            return Dd::NEG_INFINITY;
        }
        ln_count(&self.count) + self.log_prob
    }

    /// Total probability carried by the chunk.
    pub fn weight(&self) -> f64 {
        self.log_weight().value().exp()
    }
}

/// Probability distribution over the microstates of a spectrum, constant on
/// runs of microstates. Chunks are ordered by level; within a level they
/// follow slot order and their counts sum to the level degeneracy.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelDistribution {
    chunks: Vec<Chunk>,
    degeneracies: Vec<BigUint>,
}

const NORM_TOL: f64 = 1e-12;

impl LevelDistribution {
    pub fn new(spectrum: &Spectrum, chunks: Vec<Chunk>) -> Result<Self> {
        let degeneracies: Vec<BigUint> =
            spectrum.levels().iter().map(|l| l.degeneracy.clone()).collect();
        Self::from_parts(degeneracies, chunks)
    }

    pub(crate) fn from_parts(degeneracies: Vec<BigUint>, chunks: Vec<Chunk>) -> Result<Self> {
        let mut filled = vec![BigUint::zero(); degeneracies.len()];
        let mut last_level = 0;
        let mut total = NeumaierSum::new();
        for c in &chunks {
            if c.level >= degeneracies.len() {
                return Err(Error::InvalidDistribution(format!(
                    "chunk level {} out of range",
                    c.level
                )));
            }
            if c.level < last_level {
                return Err(Error::InvalidDistribution("chunks not ordered by level".into()));
            }
            last_level = c.level;
            if c.count.is_zero() {
                return Err(Error::InvalidDistribution("empty chunk".into()));
            }
            if c.log_prob.hi.is_nan() || c.log_prob.value() > 1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "per-microstate probability outside [0, 1]: ln p = {}",
                    c.log_prob.value()
                )));
            }
            filled[c.level] += &c.count;
            total.add(c.weight());
        }
        for (i, (f, d)) in filled.iter().zip(&degeneracies).enumerate() {
            if f != d {
                return Err(Error::InvalidDistribution(format!(
                    "level {i}: chunk counts {f} do not match degeneracy {d}"
                )));
            }
        }
        let t = total.value();
        if (t - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "total probability {t} is not 1"
            )));
        }
        Ok(LevelDistribution {
            chunks,
            degeneracies,
        })
    }

    /// Builds a distribution that is uniform within each level from per-level
    /// probabilities (summing to one).
    pub fn from_level_weights(spectrum: &Spectrum, weights: &[f64]) -> Result<Self> {
        if weights.len() != spectrum.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} weights for {} levels",
                weights.len(),
                spectrum.len()
            )));
        }
        let chunks = spectrum
            .levels()
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (l, &w))| {
                if w.is_nan() || w < 0.0 {
                    return Err(Error::InvalidDistribution(format!("weight {w} at level {i}")));
                }
                let lp = Dd::new(w.ln()) - l.ln_degeneracy();
                Ok(Chunk::new(i, l.degeneracy.clone(), lp))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(spectrum, chunks)
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn num_levels(&self) -> usize {
        self.degeneracies.len()
    }

    /// Probability mass on each level.
    pub fn level_weights(&self) -> Vec<f64> {
        let mut sums = vec![NeumaierSum::new(); self.degeneracies.len()];
        for c in &self.chunks {
            sums[c.level].add(c.weight());
        }
        sums.iter().map(NeumaierSum::value).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.chunks.iter().map(Chunk::weight).collect::<NeumaierSum>().value()
    }

    fn same_layout(&self, other: &LevelDistribution) -> bool {
        self.degeneracies == other.degeneracies
    }
}

/// Diagonal system state.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDiag {
    populations: Vec<f64>,
}

impl SystemDiag {
    pub fn new(populations: Vec<f64>) -> Result<Self> {
        if populations.len() < 2 {
            return Err(Error::InvalidDistribution(
                "system needs at least two states".into(),
            ));
        }
        if populations.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite population in {populations:?}"
            )));
        }
        let total: f64 = populations.iter().copied().collect::<NeumaierSum>().value();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "system populations sum to {total}"
            )));
        }
        Ok(SystemDiag { populations })
    }

    /// Qubit with excited population `q`.
    pub fn qubit(q: f64) -> Result<Self> {
        Self::new(vec![1.0 - q, q])
    }

    pub fn maximally_mixed(d: usize) -> Self {
        SystemDiag {
            populations: vec![1.0 / d as f64; d.max(2)],
        }
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn dim(&self) -> usize {
        self.populations.len()
    }

    /// Probability outside the ground state.
    pub fn q_excited(&self) -> f64 {
        self.populations[1..].iter().copied().collect::<NeumaierSum>().value()
    }

    pub fn entropy(&self) -> f64 {
        self.populations
            .iter()
            .map(|&p| crate::numerics::xlogx_neg(p))
            .collect::<NeumaierSum>()
            .value()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

/// `ln Z(β)` in double-double.
pub fn log_partition(spectrum: &Spectrum, beta: f64) -> Result<Dd> {
    check_beta(beta)?;
    let terms: Vec<Dd> = spectrum
        .levels()
        .iter()
        .map(|l| l.ln_degeneracy() - l.energy.mul_f64(beta))
        .collect();
    Ok(log_sum_exp(&terms))
}

/// Per-microstate `ln g_i = -β ε_i - ln Z` for every level.
pub fn gibbs_log_probs(spectrum: &Spectrum, beta: f64) -> Result<Vec<Dd>> {
    let log_z = log_partition(spectrum, beta)?;
    Ok(spectrum
        .levels()
        .iter()
        .map(|l| -l.energy.mul_f64(beta) - log_z)
        .collect())
}

pub fn gibbs(spectrum: &Spectrum, beta: f64) -> Result<LevelDistribution> {
    let lp = gibbs_log_probs(spectrum, beta)?;
    let chunks = spectrum
        .levels()
        .iter()
        .zip(lp)
        .enumerate()
        .map(|(i, (l, p))| Chunk::new(i, l.degeneracy.clone(), p))
        .collect();
    LevelDistribution::new(spectrum, chunks)
}

/// Gibbs probability mass per level, `Ω_i g_i`.
pub fn gibbs_level_weights(spectrum: &Spectrum, beta: f64) -> Result<Vec<f64>> {
    let lp = gibbs_log_probs(spectrum, beta)?;
    Ok(spectrum
        .levels()
        .iter()
        .zip(lp)
        .map(|(l, p)| (l.ln_degeneracy() + p).value().exp())
        .collect())
}

/// Von Neumann entropy in nats.
pub fn entropy(dist: &LevelDistribution) -> f64 {
    dist.chunks
        .iter()
        .filter(|c| c.log_prob.hi > f64::NEG_INFINITY)
        .map(|c| -c.weight() * c.log_prob.value())
        .collect::<NeumaierSum>()
        .value()
}

/// `D(p‖q)`. The two distributions may split levels differently; chunks
/// are overlaid by slot index within each level.
pub fn relative_entropy(p: &LevelDistribution, q: &LevelDistribution) -> Result<f64> {
    if !p.same_layout(q) {
        return Err(Error::InvalidDistribution(
            "relative entropy of distributions on different spectra".into(),
        ));
    }
    let mut sum = NeumaierSum::new();
    let mut failed = false;
    overlay(&p.chunks, &q.chunks, |count, lp, lq| {
        if lp.hi == f64::NEG_INFINITY {
            return;
        }
        if lq.hi == f64::NEG_INFINITY {
            failed = true;
            return;
        }
        let w = (ln_count(count) + lp).value().exp();
        sum.add(w * (lp - lq).value());
    });
    if failed {
        return Err(Error::SupportViolation);
    }
    Ok(sum.value())
}

/// Walks two chunk lists with identical level layout, calling `f` on every
/// maximal run of slots where both are constant.
pub(crate) fn overlay<F: FnMut(&BigUint, Dd, Dd)>(a: &[Chunk], b: &[Chunk], mut f: F) {
    let (mut i, mut j) = (0, 0);
    let mut rem_a = a.first().map(|c| c.count.clone()).unwrap_or_default();
    let mut rem_b = b.first().map(|c| c.count.clone()).unwrap_or_default();
    while i < a.len() && j < b.len() {
        debug_assert_eq!(a[i].level, b[j].level);
        let take = if rem_a <= rem_b {
            rem_a.clone()
        } else {
            rem_b.clone()
        };
        f(&take, a[i].log_prob, b[j].log_prob);
        rem_a -= &take;
        rem_b -= &take;
        if rem_a.is_zero() {
            i += 1;
            if i < a.len() {
                rem_a = a[i].count.clone();
            }
        }
        if rem_b.is_zero() {
            j += 1;
            if j < b.len() {
                rem_b = b[j].count.clone();
            }
        }
    }
}

pub fn mean_energy(spectrum: &Spectrum, dist: &LevelDistribution) -> f64 {
    let levels = spectrum.levels();
    dist.chunks
        .iter()
        .map(|c| c.weight() * levels[c.level].energy.value())
        .collect::<NeumaierSum>()
        .value()
}

pub fn variance_energy(spectrum: &Spectrum, dist: &LevelDistribution) -> f64 {
    let mean = mean_energy(spectrum, dist);
    let levels = spectrum.levels();
    let v = dist
        .chunks
        .iter()
        .map(|c| {
            let d = (levels[c.level].energy.add_f64(-mean)).value();
            c.weight() * d * d
        })
        .collect::<NeumaierSum>()
        .value();
    v.max(0.0)
}

/// `γ² Var_γ(H)`.
pub fn heat_capacity(spectrum: &Spectrum, gamma: f64) -> Result<f64> {
    let g = gibbs(spectrum, gamma)?;
    Ok(gamma * gamma * variance_energy(spectrum, &g))
}

/// Mean energy of the Gibbs state at `gamma`, computed from level weights.
pub fn gibbs_mean_energy(spectrum: &Spectrum, gamma: f64) -> Result<f64> {
    let w = gibbs_level_weights(spectrum, gamma)?;
    Ok(w.iter()
        .zip(spectrum.levels())
        .map(|(w, l)| w * l.energy.value())
        .collect::<NeumaierSum>()
        .value())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaStarResult {
    /// Zero when the target is the infinite-temperature energy.
    pub beta_star: f64,
    pub matched_energy: f64,
    pub iterations: usize,
    pub infinite_temperature: bool,
}

const BETA_STAR_MAX_ITER: usize = 4000;

/// Inverse temperature `γ ≥ 0` whose Gibbs state has mean energy `target`.
pub fn solve_beta_star(spectrum: &Spectrum, target: f64) -> Result<BetaStarResult> {
    let (emin, emax) = (spectrum.min_energy(), spectrum.max_energy());
    let scale = emin.abs().max(emax.abs()).max(emax - emin).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    let e0 = gibbs_mean_energy(spectrum, 0.0)?;
    if !target.is_finite() || target <= emin || target > e0 + tol {
        return Err(Error::EnergyOutOfRange {
            target,
            min: emin,
            max: e0,
        });
    }
    if (target - e0).abs() <= tol {
        return Ok(BetaStarResult {
            beta_star: 0.0,
            matched_energy: e0,
            iterations: 0,
            infinite_temperature: true,
        });
    }
    let mut iterations = 0;
    let mut lo = 0.0;
    let mut hi = 1.0 / scale.max(1e-300);
    loop {
        iterations += 1;
        if gibbs_mean_energy(spectrum, hi)? < target {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if iterations > 2000 || !hi.is_finite() {
            return Err(Error::NoConvergence {
                what: "beta* bracket",
                iterations,
            });
        }
    }
    let mut best = (hi, gibbs_mean_energy(spectrum, hi)?);
    while iterations < BETA_STAR_MAX_ITER {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = gibbs_mean_energy(spectrum, mid)?;
        if (e - target).abs() < (best.1 - target).abs() {
            best = (mid, e);
        }
        if e > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (best.1 - target).abs() > tol {
        return Err(Error::NoConvergence {
            what: "beta*",
            iterations,
        });
    }
    Ok(BetaStarResult {
        beta_star: best.0,
        matched_energy: best.1,
        iterations,
        infinite_temperature: false,
    })
}
