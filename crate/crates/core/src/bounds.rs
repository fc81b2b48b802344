//! Analytic and variational bounds on entropy production.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{golden_max, golden_min, NeumaierSum};
use crate::spectra::{engineered_r, EngineeredParams};
use crate::spectrum::Spectrum;
use crate::thermo::heat_capacity;

fn h(a: f64) -> f64 {
    crate::numerics::xlogx_neg(a) + crate::numerics::xlogx_neg(1.0 - a)
}

/// Binary relative entropy `s(a, b)`, `+inf` off the support.
pub fn binary_kl(a: f64, b: f64) -> f64 {
    let term = |p: f64, q: f64| -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p.ln() - q.ln())
        }
    };
    term(a, b) + term(1.0 - a, 1.0 - b)
}

/// `h(a) + a ln(d - 1)`: entropy of `(1 - a, a/(d-1), ..., a/(d-1))`,
/// increasing on `[0, (d-1)/d]` from `0` to `ln d`.
fn psi(a: f64, ln_dm1: f64) -> f64 {
    h(a) + a * ln_dm1
}

fn psi_inverse(t: f64, ln_dm1: f64, top: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi(mid, ln_dm1) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `M(x, d) = min s(a, b)` over `0 <= a, b <= (d-1)/d` subject to
/// `h(a) - h(b) + (a - b) ln(d - 1) = x`.
///
/// The constraint fixes `a` as a monotone function of `b`, so this is an
/// outer search over the feasible `b` interval (scan plus golden section)
/// around an inner bisection for `a`.
pub fn m_function(x: f64, d: u64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d = {d} (need d >= 2)")));
    }
    let ln_d = (d as f64).ln();
    if !x.is_finite() || x.abs() > ln_d {
        return Err(Error::Infeasible(format!("x = {x} outside [-ln {d}, ln {d}]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_dm1 = ((d - 1) as f64).ln();
    let top = (d - 1) as f64 / d as f64;
    let b_lo = psi_inverse((-x).max(0.0), ln_dm1, top);
    let b_hi = psi_inverse((ln_d - x).min(ln_d), ln_dm1, top);
    if b_lo > b_hi {
        return Err(Error::Infeasible(format!("no feasible b for x = {x}")));
    }
    let objective = |b: f64| -> f64 {
        let t = (psi(b, ln_dm1) + x).clamp(0.0, ln_d);
        let a = psi_inverse(t, ln_dm1, top);
        binary_kl(a, b)
    };
    // Scan: a uniform grid plus points clustered at both ends, where the
    // minimizer sits when |x| approaches ln d.
    let width = b_hi - b_lo;
    let mut probes: Vec<f64> = (0..=256).map(|k| b_lo + width * k as f64 / 256.0).collect();
    for k in 1..=40 {
        let f = 10f64.powf(-(k as f64) * 0.3);
        probes.push(b_lo + width * f);
        probes.push(b_hi - width * f);
    }
    probes.sort_by(f64::total_cmp);
    let values: Vec<f64> = probes.iter().map(|&b| objective(b)).collect();
    let (k_best, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("probes");
    let lo = probes[k_best.saturating_sub(1)];
    let hi = probes[(k_best + 1).min(probes.len() - 1)];
    let (_, v) = golden_min(objective, lo, hi, 1e-15);
    let best = v.min(values[k_best]);
    if !best.is_finite() {
        return Err(Error::Infeasible(format!("constraint unattainable for x = {x}")));
    }
    Ok(best.max(0.0))
}

/// `(ΔS_S / ln d)² / (3n)`.
pub fn noninteracting_lower_bound(ds_system: f64, d: u64, n: usize) -> f64 {
    let r = ds_system / (d as f64).ln();
    r * r / (3.0 * n as f64)
}

/// `2 ΔS_S² / (ln²(d_B - 1) + 4)` with `env_dim_log = ln d_B`.
pub fn rw_lower_bound(ds_system: f64, env_dim_log: f64) -> Result<f64> {
    if !(env_dim_log >= LN_2 * (1.0 - 1e-15)) {
        return Err(Error::InvalidParameter(format!(
            "environment log-dimension {env_dim_log} below ln 2"
        )));
    }
    let l = env_dim_log + (-(-env_dim_log).exp()).ln_1p();
    Ok(2.0 * ds_system * ds_system / (l * l + 4.0))
}

/// Largest heat capacity on the inverse-temperature interval between
/// `beta` and `beta_star`, and where it occurs.
pub fn max_heat_capacity(spectrum: &Spectrum, beta: f64, beta_star: f64) -> Result<(f64, f64)> {
    for b in [beta, beta_star] {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidBeta(b));
        }
    }
    let (lo, hi) = if beta <= beta_star {
        (beta, beta_star)
    } else {
        (beta_star, beta)
    };
    let c = |g: f64| heat_capacity(spectrum, g).unwrap_or(f64::NEG_INFINITY);
    if hi - lo <= f64::EPSILON * hi.max(1.0) {
        return Ok((lo, c(lo)));
    }
    const GRID: usize = 512;
    let mut best = (lo, c(lo));
    for k in 1..=GRID {
        let g = lo + (hi - lo) * k as f64 / GRID as f64;
        let v = c(g);
        if v > best.1 {
            best = (g, v);
        }
    }
    let step = (hi - lo) / GRID as f64;
    let (g, v) = golden_max(c, (best.0 - step).max(lo), (best.0 + step).min(hi), 1e-12);
    Ok(if v > best.1 { (g, v) } else { best })
}

/// `(βQ)² / (2 max C)` over the interval between `beta` and `beta_star`;
/// `0` when `βQ = 0` and `+inf` when the heat capacity vanishes there.
pub fn heat_capacity_lower_bound(
    beta_q: f64,
    spectrum: &Spectrum,
    beta: f64,
    beta_star: f64,
) -> Result<f64> {
    if beta_q == 0.0 {
        return Ok(0.0);
    }
    let (_, c) = max_heat_capacity(spectrum, beta, beta_star)?;
    if c <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(beta_q * beta_q / (2.0 * c))
}

/// Antiderivative of `cos(ax) ln(b - cos(ax))` for `b > 1`, continuous in
/// `x` and zero at `x = 0`:
///
/// `F = (2√(b²-1)/a) θ(x) + (sin(ax)/a)(ln(b - cos ax) - 1) - b x`,
/// where `θ` is the continuous branch of `atan(√((b+1)/(b-1)) tan(ax/2))`.
pub fn integral_f(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("b = {b} (need b > 1)")));
    }
    if a == 0.0 || !a.is_finite() || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("a = {a}, x = {x}")));
    }
    let u = 0.5 * a * x;
    let wind = ((u + 0.5 * PI) / PI).floor();
    let v = u - wind * PI;
    let k = ((b + 1.0) / (b - 1.0)).sqrt();
    let theta = (k * v.tan()).atan() + wind * PI;
    let root = ((b - 1.0) * (b + 1.0)).sqrt();
    let ax = a * x;
    Ok(2.0 * root / a * theta + ax.sin() / a * ((b - ax.cos()).ln() - 1.0) - b * x)
}

/// Exact finite sums of the heat decomposition `βQ = A - B - C - D` for the
/// level-shift protocol on the engineered spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatTerms {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub beta_q: f64,
}

pub fn heat_decomposition(p: &EngineeredParams) -> Result<HeatTerms> {
    p.validate()?;
    let n = p.n;
    let r = engineered_r(n, p.alpha);
    let z = {
        let mut s = NeumaierSum::new();
        s.add(r[0]);
        for ri in &r[1..] {
            s.add(0.5 * ri);
        }
        s.value()
    };
    let step = (PI / n as f64).sin();
    // r_{i-1} - r_i without cancellation.
    let dr = |i: usize| -2.0 * (PI * (2 * i - 1) as f64 / n as f64).sin() * step;
    let tail = |i: usize| 2f64.powi(i as i32 - n as i32 - 1) * r[n];
    let (mut a, mut b, mut c) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
    for i in 1..=n {
        let ln_omega = crate::numerics::LN_2.scale_int(i as u64);
        let coef = dr(i) + tail(i);
        a.add(ln_omega.hi * coef);
        a.add(ln_omega.lo * coef);
        b.add(dr(i) * r[i].ln());
        c.add(tail(i) * r[i].ln());
    }
    let scale = 1.0 / (2.0 * z);
    let d = scale * (2f64.powi(-(n as i32)) * r[n] - r[0]) * r[0].ln();
    let (a, b, c) = (scale * a.value(), scale * b.value(), scale * c.value());
    let beta_q = [a, -b, -c, -d].into_iter().collect::<NeumaierSum>().value();
    Ok(HeatTerms { a, b, c, d, beta_q })
}

/// Exact closed form of the `A` term.
pub fn a_closed_form(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    let denom = nf.powf(alpha + 1.0) + nf + 2.0;
    (1.0 - (3.0 - 2f64.powi(-(n as i32))) / denom) * LN_2
}

/// The `A` closed form with the `2^-n` correction dropped, as usually
/// quoted; it differs from the exact sum by `O(2^-n / n^(α+1))`.
pub fn a_closed_form_asymptotic(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    (1.0 - 3.0 / (nf.powf(alpha + 1.0) + nf + 2.0)) * LN_2
}

/// Leading quadratic term `2π²/n²`; only derived for `α > 2`.
pub fn sigma_quadratic_bound(n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::InvalidParameter(format!(
            "quadratic bound needs alpha > 2, got {alpha}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n = 0".into()));
    }
    Ok(2.0 * PI * PI / (n as f64 * n as f64))
}

/// Inputs shared by the bound functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub ds_system: f64,
    pub n: usize,
    pub local_dim: u64,
    /// `ln d_B`.
    pub env_dim_log: f64,
    pub beta: f64,
    pub beta_star: f64,
    pub beta_q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValues {
    pub lb_nonint: f64,
    pub lb_rw: f64,
    pub lb_heatcap: f64,
}

pub fn evaluate_bounds(inputs: &BoundInputs, spectrum: &Spectrum) -> Result<BoundValues> {
    if inputs.local_dim < 2 || inputs.n < 1 {
        return Err(Error::InvalidParameter(format!(
            "d = {}, n = {}",
            inputs.local_dim, inputs.n
        )));
    }
    Ok(BoundValues {
        lb_nonint: noninteracting_lower_bound(inputs.ds_system, inputs.local_dim, inputs.n),
        lb_rw: rw_lower_bound(inputs.ds_system, inputs.env_dim_log)?,
        lb_heatcap: heat_capacity_lower_bound(
            inputs.beta_q,
            spectrum,
            inputs.beta,
            inputs.beta_star,
        )?,
    })
}
