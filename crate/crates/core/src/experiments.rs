//! Sweep drivers producing rows for the erasure, heat-capacity and
//! criticality experiments.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    heat_capacity_lower_bound, noninteracting_lower_bound, rw_lower_bound, sigma_quadratic_bound,
};
use crate::collisional::{make_schedule, run_chain, ScheduleFamily};
use crate::engine::{binary_entropy, engineered_q, run_protocol, Policy, ProcessOutcome};
use crate::error::{Error, Result};
use crate::spectra::{
    critical_degenerate, engineered_interacting, non_interacting_qubits, CriticalParams,
    EngineeredParams,
};
use crate::thermo::{heat_capacity, mean_energy, solve_beta_star, SystemDiag};

/// Which excited occupation the engineered family is said to reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QConvention {
    /// `Ω_n g_n = n^-α / (2Z)`, what the protocol actually reaches.
    #[default]
    Exact,
    /// `n^-α / 2`.
    Half,
    /// `n^-α`.
    Caption,
}

impl QConvention {
    pub fn name(self) -> &'static str {
        match self {
            QConvention::Exact => "exact",
            QConvention::Half => "half",
            QConvention::Caption => "caption",
        }
    }

    pub fn target(self, n: usize, alpha: f64, beta: f64) -> Result<f64> {
        let base = (n as f64).powf(-alpha);
        let q = match self {
            QConvention::Exact => engineered_q(&EngineeredParams::new(n, alpha, beta)?)?,
            QConvention::Half => 0.5 * base,
            QConvention::Caption => base,
        };
        if !(q > 0.0 && q < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "{} convention gives q = {q} at n = {n}, alpha = {alpha}",
                self.name()
            )));
        }
        Ok(q)
    }
}

impl fmt::Display for QConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for QConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(QConvention::Exact),
            "half" => Ok(QConvention::Half),
            "caption" => Ok(QConvention::Caption),
            other => Err(Error::InvalidParameter(format!("unknown q convention {other:?}"))),
        }
    }
}

/// One CSV row. Fields that do not apply to a curve are left empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub policy: String,
    pub q: Option<f64>,
    #[serde(rename = "betaQ")]
    pub beta_q: Option<f64>,
    #[serde(rename = "dS_system")]
    pub ds_system: Option<f64>,
    pub mutual_info: Option<f64>,
    pub rel_ent_bath: Option<f64>,
    pub sigma: Option<f64>,
    pub residual: Option<f64>,
    pub lb_nonint: Option<f64>,
    pub lb_rw: Option<f64>,
    pub lb_heatcap: Option<f64>,
    pub ub_quadratic: Option<f64>,
}

pub const SWEEP_COLUMNS: [&str; 15] = [
    "n",
    "alpha",
    "beta",
    "policy",
    "q",
    "betaQ",
    "dS_system",
    "mutual_info",
    "rel_ent_bath",
    "sigma",
    "residual",
    "lb_nonint",
    "lb_rw",
    "lb_heatcap",
    "ub_quadratic",
];

impl SweepRow {
    fn from_outcome(n: usize, alpha: f64, policy: String, o: &ProcessOutcome) -> Self {
        SweepRow {
            n,
            alpha,
            beta: o.beta,
            policy,
            q: Some(o.q_excited),
            beta_q: Some(o.beta_q()),
            ds_system: Some(o.ds_system),
            mutual_info: Some(o.mutual_info),
            rel_ent_bath: Some(o.rel_ent_bath),
            sigma: Some(o.sigma),
            residual: Some(o.identity_residual),
            lb_nonint: None,
            lb_rw: None,
            lb_heatcap: None,
            ub_quadratic: None,
        }
    }

    fn reference(n: usize, alpha: f64, beta: f64, name: &str, q: f64, value: f64) -> Self {
        SweepRow {
            n,
            alpha,
            beta,
            policy: name.to_string(),
            q: Some(q),
            beta_q: None,
            ds_system: None,
            mutual_info: None,
            rel_ent_bath: None,
            sigma: Some(value),
            residual: None,
            lb_nonint: None,
            lb_rw: None,
            lb_heatcap: None,
            ub_quadratic: None,
        }
    }
}

/// Detailed result of one engineered run, with the matched temperature.
#[derive(Clone, Debug)]
pub struct EngineeredRun {
    pub outcome: ProcessOutcome,
    pub beta_star: f64,
    pub row: SweepRow,
}

/// Erasure of a maximally mixed qubit with the engineered bath designed at
/// `beta`, plus every bound evaluated on that run.
pub fn engineered_run(n: usize, alpha: f64, beta: f64, policy: Policy) -> Result<EngineeredRun> {
    let params = EngineeredParams::new(n, alpha, beta)?;
    let spectrum = engineered_interacting(&params)?;
    let run = run_protocol(&SystemDiag::maximally_mixed(2), &spectrum, beta, policy)?;
    let o = run.outcome;
    let e_final = mean_energy(&spectrum, &run.bath);
    let star = solve_beta_star(&spectrum, e_final)?;
    let mut row = SweepRow::from_outcome(n, alpha, policy.name().to_string(), &o);
    row.lb_nonint = Some(noninteracting_lower_bound(o.ds_system, 2, n));
    row.lb_rw = Some(rw_lower_bound(o.ds_system, n as f64 * LN_2)?);
    row.lb_heatcap = Some(heat_capacity_lower_bound(
        o.beta_q(),
        &spectrum,
        beta,
        star.beta_star,
    )?);
    row.ub_quadratic = params
        .quadratic_regime()
        .then(|| sigma_quadratic_bound(n, alpha))
        .transpose()?;
    Ok(EngineeredRun {
        outcome: o,
        beta_star: star.beta_star,
        row,
    })
}

pub fn engineered_row(n: usize, alpha: f64, beta: f64, policy: Policy) -> Result<SweepRow> {
    Ok(engineered_run(n, alpha, beta, policy)?.row)
}

/// Swap chain reaching excited occupation `q` with `n` qubits.
pub fn collisional_row(family: ScheduleFamily, n: usize, alpha: f64, beta: f64, q: f64) -> Result<SweepRow> {
    let schedule = make_schedule(family, n, q)?;
    let o = run_chain(&schedule, beta)?;
    let mut row = SweepRow::from_outcome(n, alpha, format!("collisional_{}", family.name()), &o);
    row.lb_nonint = Some(noninteracting_lower_bound(o.ds_system, 2, n));
    row.lb_rw = Some(rw_lower_bound(o.ds_system, n as f64 * LN_2)?);
    Ok(row)
}

/// Curves requested for the erasure figure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Curves {
    pub policies: Vec<Policy>,
    pub families: Vec<ScheduleFamily>,
    pub references: bool,
}

impl Default for Fig1Curves {
    fn default() -> Self {
        Fig1Curves {
            policies: vec![Policy::Sorted, Policy::LevelShift],
            families: ScheduleFamily::GENERATED.to_vec(),
            references: true,
        }
    }
}

impl Fig1Curves {
    pub fn is_empty(&self) -> bool {
        self.policies.is_empty() && self.families.is_empty() && !self.references
    }
}

/// Rows of the erasure figure for one `n`.
pub fn fig1_rows(n: usize, alpha: f64, beta: f64, convention: QConvention, curves: &Fig1Curves) -> Result<Vec<SweepRow>> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no curves selected".into()));
    }
    let q = convention.target(n, alpha, beta)?;
    let mut rows = Vec::new();
    for &p in &curves.policies {
        rows.push(engineered_row(n, alpha, beta, p)?);
    }
    for &f in &curves.families {
        rows.push(collisional_row(f, n, alpha, beta, q)?);
    }
    if curves.references {
        let ds = binary_entropy(q) - LN_2;
        rows.push(SweepRow::reference(n, alpha, beta, "ref_nonint", q, noninteracting_lower_bound(ds, 2, n)));
        rows.push(SweepRow::reference(n, alpha, beta, "ref_rw", q, rw_lower_bound(ds, n as f64 * LN_2)?));
        if alpha > 2.0 {
            rows.push(SweepRow::reference(n, alpha, beta, "ref_quadratic", q, sigma_quadratic_bound(n, alpha)?));
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathFamily {
    Engineered,
    NonInteracting,
}

impl BathFamily {
    pub fn name(self) -> &'static str {
        match self {
            BathFamily::Engineered => "engineered",
            BathFamily::NonInteracting => "noninteracting",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatCapacityPoint {
    pub family: BathFamily,
    pub n: usize,
    pub gamma: f64,
    pub c: f64,
    pub c_per_n: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatCapacityScaling {
    pub family: BathFamily,
    pub n: usize,
    pub c: f64,
    pub c_per_n: f64,
    pub c_per_n2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Data {
    pub curves: Vec<HeatCapacityPoint>,
    pub scaling: Vec<HeatCapacityScaling>,
}

/// `points` inverse temperatures on `[lo, hi]`, endpoints exact.
pub fn gamma_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == points - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn bath(family: BathFamily, n: usize, alpha: f64, beta0: f64) -> Result<crate::Spectrum> {
    match family {
        BathFamily::Engineered => engineered_interacting(&EngineeredParams::new(n, alpha, beta0)?),
        BathFamily::NonInteracting => non_interacting_qubits(n, 1.0 / beta0),
    }
}

/// Heat capacity per bath qubit around `beta0` and its size scaling at
/// `beta0`. The non-interacting bath uses gap `1/β₀`.
pub fn fig2_data(n_list: &[usize], alpha: f64, beta0: f64, grid_points: usize) -> Result<Fig2Data> {
    let grid = gamma_grid(0.5 * beta0, 1.5 * beta0, grid_points);
    let mut curves = Vec::new();
    let mut scaling = Vec::new();
    for &n in n_list {
        for family in [BathFamily::Engineered, BathFamily::NonInteracting] {
            let s = bath(family, n, alpha, beta0)?;
            for &g in &grid {
                let c = heat_capacity(&s, g)?;
                curves.push(HeatCapacityPoint {
                    family,
                    n,
                    gamma: g,
                    c,
                    c_per_n: c / n as f64,
                });
            }
            let c = heat_capacity(&s, beta0)?;
            let nf = n as f64;
            scaling.push(HeatCapacityScaling {
                family,
                n,
                c,
                c_per_n: c / nf,
                c_per_n2: c / (nf * nf),
            });
        }
    }
    Ok(Fig2Data { curves, scaling })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub n: usize,
    pub a: f64,
    pub gap: f64,
    pub q: f64,
    /// `(1 - x)/2` with `x = a - (1 - a)/N`.
    pub q_formula: f64,
    #[serde(rename = "betaQ")]
    pub beta_q: f64,
    #[serde(rename = "dS_system")]
    pub ds_system: f64,
    pub sigma: f64,
    pub residual: f64,
    pub heat_capacity: f64,
    pub guide_linear: Option<f64>,
    pub guide_quadratic: Option<f64>,
}

fn critical_q_formula(n: usize, a: f64) -> f64 {
    // (1-a)(N+1)/(2N) with N = 2^n - 1, evaluated without forming 2^n.
    let inv_n = 1.0 / (2f64.powi(n.min(2000) as i32) - 1.0);
    0.5 * (1.0 - a) * (1.0 + inv_n)
}

/// Ground weight `a` for which the critical protocol ends at `q_target`.
/// The protocol's `q` decreases in `a`; bisection on the engine result.
pub fn critical_a_for_q(n: usize, beta0: f64, q_target: f64) -> Result<f64> {
    let q_of = |a: f64| -> Result<f64> {
        let s = critical_degenerate(&CriticalParams::new(n, a, beta0)?)?;
        Ok(run_protocol(&SystemDiag::maximally_mixed(2), &s, beta0, Policy::Sorted)?
            .outcome
            .q_excited)
    };
    let floor = (-(n as f64) * LN_2).exp();
    let mut lo = floor.max(f64::MIN_POSITIVE) * (1.0 + 1e-9);
    let mut hi = 1.0 - 1e-16;
    if q_of(lo)? < q_target || q_of(hi)? > q_target {
        return Err(Error::Infeasible(format!(
            "q = {q_target} not reachable by the critical bath at n = {n}"
        )));
    }
    // Start from the closed form, then refine on the engine.
    let guess = 1.0 - 2.0 * q_target / (1.0 + 1.0 / (2f64.powi(n.min(2000) as i32) - 1.0));
    if guess > lo && guess < hi {
        let qg = q_of(guess)?;
        if qg > q_target {
            lo = guess;
        } else {
            hi = guess;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q_of(mid)? > q_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (ql, qh) = (q_of(lo)?, q_of(hi)?);
    Ok(if (ql - q_target).abs() <= (qh - q_target).abs() {
        lo
    } else {
        hi
    })
}

/// Critical-bath erasure of a maximally mixed qubit at `beta0` with ground
/// weight `a`. Guides are left empty.
pub fn critical_row(n: usize, a: f64, beta0: f64) -> Result<CriticalRow> {
    let s = critical_degenerate(&CriticalParams::new(n, a, beta0)?)?;
    let o = run_protocol(&SystemDiag::maximally_mixed(2), &s, beta0, Policy::Sorted)?.outcome;
    Ok(CriticalRow {
        n,
        a,
        gap: s.max_energy(),
        q: o.q_excited,
        q_formula: critical_q_formula(n, a),
        beta_q: o.beta_q(),
        ds_system: o.ds_system,
        sigma: o.sigma,
        residual: o.identity_residual,
        heat_capacity: heat_capacity(&s, beta0)?,
        guide_linear: None,
        guide_quadratic: None,
    })
}

/// `1/n` and `1/n²` guides through the first row.
pub fn add_guides(rows: &mut [CriticalRow]) {
    let Some((n0, s0)) = rows.first().map(|r| (r.n as f64, r.sigma)) else {
        return;
    };
    for r in rows {
        let ratio = n0 / r.n as f64;
        r.guide_linear = Some(s0 * ratio);
        r.guide_quadratic = Some(s0 * ratio * ratio);
    }
}

/// Critical-bath erasure at `beta0`, with `a` chosen so that `q` matches the
/// engineered protocol's exact occupation for the same `n` and `alpha`.
pub fn fig3_rows(n_list: &[usize], alpha: f64, beta0: f64) -> Result<Vec<CriticalRow>> {
    let mut rows = n_list
        .iter()
        .map(|&n| {
            let q_target = QConvention::Exact.target(n, alpha, beta0)?;
            critical_row(n, critical_a_for_q(n, beta0, q_target)?, beta0)
        })
        .collect::<Result<Vec<_>>>()?;
    add_guides(&mut rows);
    Ok(rows)
}
