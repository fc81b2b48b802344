//! Builders for the bath families: independent qubits, the engineered
//! interacting spectrum, and the two-level critical spectrum.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{golden_max, ln_count, Dd, LN_2};
use crate::spectrum::{Level, Spectrum, SpectrumDocument};
use crate::thermo::{gibbs_log_probs, heat_capacity};

/// Largest qubit count accepted by the non-interacting builder.
pub const MAX_NONINTERACTING_QUBITS: usize = 10_000_000;
/// Product baths with arbitrary per-qubit gaps are expanded by subset, so
/// they stay small.
pub const MAX_PRODUCT_QUBITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineeredParams {
    pub n: usize,
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta0: f64,
}

fn one() -> f64 {
    1.0
}

impl EngineeredParams {
    pub fn new(n: usize, alpha: f64, beta0: f64) -> Result<Self> {
        let p = EngineeredParams { n, alpha, beta0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("n = {} (need n >= 2)", self.n)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {}", self.alpha)));
        }
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(Error::InvalidBeta(self.beta0));
        }
        Ok(())
    }

    /// The quadratic decay is only derived for `alpha > 2`.
    pub fn quadratic_regime(&self) -> bool {
        self.alpha > 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalParams {
    pub n: usize,
    pub a: f64,
    #[serde(default = "one")]
    pub beta0: f64,
}

impl CriticalParams {
    pub fn new(n: usize, a: f64, beta0: f64) -> Result<Self> {
        let p = CriticalParams { n, a, beta0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("n = 0".into()));
        }
        let floor = (-(self.n as f64) * std::f64::consts::LN_2).exp();
        if !(self.a > floor && self.a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a = {} outside (2^-n, 1) for n = {}",
                self.a, self.n
            )));
        }
        if !(self.beta0 > 0.0 && self.beta0.is_finite()) {
            return Err(Error::InvalidBeta(self.beta0));
        }
        Ok(())
    }

    /// `N = 2^n - 1`, the degeneracy of the excited level.
    pub fn excited_degeneracy(&self) -> BigUint {
        (BigUint::one() << self.n) - 1u8
    }
}

/// `n` independent qubits with equal gap: level `k` has `C(n, k)` states.
pub fn non_interacting_qubits(n: usize, gap: f64) -> Result<Spectrum> {
    if n < 1 || n > MAX_NONINTERACTING_QUBITS {
        return Err(Error::CapExceeded(format!(
            "non-interacting bath with {n} qubits (allowed 1..={MAX_NONINTERACTING_QUBITS})"
        )));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::InvalidParameter(format!("gap = {gap}")));
    }
    let mut levels = Vec::with_capacity(n + 1);
    let mut binom = BigUint::one();
    for k in 0..=n {
        levels.push(Level::new(Dd::new(gap).scale_int(k as u64), binom.clone(), k));
        binom = binom * BigUint::from(n - k) / BigUint::from(k + 1);
    }
    Spectrum::from_levels(format!("noninteracting-n{n}"), levels)
}

/// Product of qubits with individual gaps; levels are subset sums.
pub fn product_qubits(gaps: &[f64]) -> Result<Spectrum> {
    if gaps.is_empty() || gaps.len() > MAX_PRODUCT_QUBITS {
        return Err(Error::CapExceeded(format!(
            "product bath with {} qubits (allowed 1..={MAX_PRODUCT_QUBITS})",
            gaps.len()
        )));
    }
    if let Some(g) = gaps.iter().find(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter(format!("gap = {g}")));
    }
    let n = gaps.len();
    let mut levels = Vec::with_capacity(1 << n);
    for mask in 0usize..(1 << n) {
        let mut e = Dd::ZERO;
        for (k, g) in gaps.iter().enumerate() {
            if mask >> k & 1 == 1 {
                e = e.add_f64(*g);
            }
        }
        levels.push(Level::new(e, BigUint::one(), mask));
    }
    Spectrum::from_levels(format!("product-n{n}"), levels)
}

/// `r_i = n^-α + 1 - cos(2πi/n)` for `i = 0..=n`, evaluated as
/// `n^-α + 2 sin²(πi/n)` to avoid cancellation near `i = 0, n`.
pub fn engineered_r(n: usize, alpha: f64) -> Vec<f64> {
    let floor = (n as f64).powf(-alpha);
    (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                return floor;
            }
            let s = (PI * i as f64 / n as f64).sin();
            floor + 2.0 * s * s
        })
        .collect()
}

/// Engineered interacting spectrum: level `i` has degeneracy `1` (i = 0) or
/// `2^(i-1)`, and `β₀ε_i = i ln 2 - ln r_i`. Levels are sorted by energy;
/// `Level::index` keeps `i`.
pub fn engineered_interacting(p: &EngineeredParams) -> Result<Spectrum> {
    p.validate()?;
    let r = engineered_r(p.n, p.alpha);
    let levels = r
        .iter()
        .enumerate()
        .map(|(i, &ri)| {
            let beta_e = LN_2.scale_int(i as u64).add_f64(-ri.ln());
            let deg = if i == 0 {
                BigUint::one()
            } else {
                BigUint::one() << (i - 1)
            };
            Level::new(beta_e.div_f64(p.beta0), deg, i)
        })
        .collect();
    let s = Spectrum::from_levels(format!("engineered-n{}-a{}", p.n, p.alpha), levels)?;
    if s.len() != p.n + 1 {
        return Err(Error::InvalidSpectrum(
            "engineered energies collided; labels lost".into(),
        ));
    }
    check_tail_ordering(&s, p.beta0)?;
    Ok(s)
}

/// Checks `g_i >= g_top` where `top` is the level labelled `n`: the smallest
/// joint eigenvalues must be copies of `g_n`.
pub fn check_tail_ordering(s: &Spectrum, beta0: f64) -> Result<()> {
    let lp = gibbs_log_probs(s, beta0)?;
    let top_label = s.levels().iter().map(|l| l.index).max().unwrap_or(0);
    let top = s.position_of_index(top_label).expect("label present");
    if let Some((i, _)) = lp
        .iter()
        .enumerate()
        .find(|(_, v)| v.total_cmp(&lp[top]) == std::cmp::Ordering::Less)
    {
        return Err(Error::InvalidSpectrum(format!(
            "Gibbs weight of level {} is below that of the top label",
            s.levels()[i].index
        )));
    }
    Ok(())
}

/// `Z = ½(n + n^(1-α) + 2n^-α)` at the design temperature.
pub fn engineered_partition_closed_form(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    0.5 * (nf + nf.powf(1.0 - alpha) + 2.0 * nf.powf(-alpha))
}

/// Ground level `(0, 1)` and excited level `(ε, 2^n - 1)` with
/// `β₀ε = ln N - ln(1/a - 1)`, so that the Gibbs ground weight at `β₀` is `a`.
pub fn critical_degenerate(p: &CriticalParams) -> Result<Spectrum> {
    p.validate()?;
    let big_n = p.excited_degeneracy();
    let log_odds = (-p.a).ln_1p() - p.a.ln();
    let eps = (ln_count(&big_n).add_f64(-log_odds)).div_f64(p.beta0);
    let levels = vec![
        Level::new(Dd::ZERO, BigUint::one(), 0),
        Level::new(eps, big_n, 1),
    ];
    Spectrum::from_levels(format!("critical-n{}-a{}", p.n, p.a), levels)
}

/// Gap of the critical spectrum.
pub fn critical_gap(p: &CriticalParams) -> Result<f64> {
    Ok(critical_degenerate(p)?.max_energy())
}

/// Ground weight `a` maximizing the heat capacity at `β₀`, and that maximum.
pub fn critical_max_heat_capacity(n: usize, beta0: f64) -> Result<(f64, f64)> {
    // Parametrize a by its log-odds; C is smooth and unimodal in it.
    let lo_odds = -(n as f64) * std::f64::consts::LN_2 + 1e-9;
    let hi_odds = 40.0f64.max(n as f64);
    let c_at = |t: f64| -> f64 {
        let a = 1.0 / (1.0 + (-t).exp());
        CriticalParams::new(n, a, beta0)
            .and_then(|p| critical_degenerate(&p))
            .and_then(|s| heat_capacity(&s, beta0))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let grid = 400;
    let mut best = (lo_odds, f64::NEG_INFINITY);
    for k in 0..=grid {
        let t = lo_odds + (hi_odds - lo_odds) * k as f64 / grid as f64;
        let c = c_at(t);
        if c > best.1 {
            best = (t, c);
        }
    }
    let step = (hi_odds - lo_odds) / grid as f64;
    let (t, c) = golden_max(
        c_at,
        (best.0 - step).max(lo_odds),
        (best.0 + step).min(hi_odds),
        1e-12,
    );
    if !c.is_finite() {
        return Err(Error::NoConvergence {
            what: "critical heat-capacity maximum",
            iterations: grid,
        });
    }
    Ok((1.0 / (1.0 + (-t).exp()), c))
}

/// JSON parameter block selecting a bath family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpectrumParams {
    Engineered(EngineeredParams),
    Critical(CriticalParams),
    NonInteracting { n: usize, gap: f64 },
    Custom(SpectrumDocument),
}

impl SpectrumParams {
    pub fn build(&self) -> Result<Spectrum> {
        match self {
            SpectrumParams::Engineered(p) => engineered_interacting(p),
            SpectrumParams::Critical(p) => critical_degenerate(p),
            SpectrumParams::NonInteracting { n, gap } => non_interacting_qubits(*n, *gap),
            SpectrumParams::Custom(doc) => doc.clone().into_spectrum(),
        }
    }
}
