//! Sequential full-swap protocols: the system is swapped with one fresh
//! thermal qubit after another.

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::binary_kl;
use crate::engine::{binary_entropy, ProcessOutcome};
use crate::error::{Error, Result};
use crate::numerics::NeumaierSum;
use crate::spectra::product_qubits;
use crate::spectrum::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleFamily {
    /// Excited populations on an arithmetic grid from 1/2 to q.
    Linear,
    /// Equal steps in the angle `θ` with `p = sin²θ`, i.e. equal
    /// Fisher-Rao length per collision.
    Geodesic,
    /// Log-odds on an arithmetic grid.
    Geometric,
    Custom,
}

impl ScheduleFamily {
    pub const GENERATED: [ScheduleFamily; 3] = [
        ScheduleFamily::Linear,
        ScheduleFamily::Geodesic,
        ScheduleFamily::Geometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleFamily::Linear => "linear",
            ScheduleFamily::Geodesic => "geodesic",
            ScheduleFamily::Geometric => "geometric",
            ScheduleFamily::Custom => "custom",
        }
    }
}

impl fmt::Display for ScheduleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScheduleFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ScheduleFamily::Linear),
            "geodesic" => Ok(ScheduleFamily::Geodesic),
            "geometric" => Ok(ScheduleFamily::Geometric),
            "custom" => Ok(ScheduleFamily::Custom),
            other => Err(Error::InvalidParameter(format!("unknown schedule family {other:?}"))),
        }
    }
}

/// Excited populations `p_1 >= ... >= p_n` of the bath qubits, all in
/// `(0, 1/2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    populations: Vec<f64>,
    family: ScheduleFamily,
}

impl Schedule {
    pub fn custom(populations: Vec<f64>) -> Result<Self> {
        Self::checked(populations, ScheduleFamily::Custom)
    }

    fn checked(populations: Vec<f64>, family: ScheduleFamily) -> Result<Self> {
        if populations.is_empty() {
            return Err(Error::InvalidParameter("empty schedule".into()));
        }
        if let Some(p) = populations.iter().find(|p| !(**p > 0.0 && **p <= 0.5)) {
            return Err(Error::InvalidParameter(format!(
                "schedule population {p} outside (0, 1/2]"
            )));
        }
        if populations.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("schedule is not non-increasing".into()));
        }
        Ok(Schedule {
            populations,
            family,
        })
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn family(&self) -> ScheduleFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn final_population(&self) -> f64 {
        *self.populations.last().expect("non-empty")
    }

    /// Qubit gaps `E_k = ln((1 - p_k)/p_k) / β`.
    pub fn energies(&self, beta: f64) -> Vec<f64> {
        self.populations
            .iter()
            .map(|&p| ((1.0 - p) / p).ln() / beta)
            .collect()
    }

    /// The whole bath as one spectrum (small schedules only).
    pub fn bath_spectrum(&self, beta: f64) -> Result<Spectrum> {
        product_qubits(&self.energies(beta))
    }
}

pub fn make_schedule(family: ScheduleFamily, n: usize, q_target: f64) -> Result<Schedule> {
    if n < 1 {
        return Err(Error::InvalidParameter("schedule needs n >= 1".into()));
    }
    if !(q_target > 0.0 && q_target < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "target occupation {q_target} outside (0, 1/2)"
        )));
    }
    let frac = |k: usize| k as f64 / n as f64;
    let mut pops: Vec<f64> = match family {
        ScheduleFamily::Linear => (1..=n).map(|k| 0.5 + (q_target - 0.5) * frac(k)).collect(),
        ScheduleFamily::Geodesic => {
            let end = q_target.sqrt().asin();
            (1..=n)
                .map(|k| {
                    let s = (FRAC_PI_4 + (end - FRAC_PI_4) * frac(k)).sin();
                    s * s
                })
                .collect()
        }
        ScheduleFamily::Geometric => {
            let end = (q_target / (1.0 - q_target)).ln();
            (1..=n)
                .map(|k| 1.0 / (1.0 + (-end * frac(k)).exp()))
                .collect()
        }
        ScheduleFamily::Custom => {
            return Err(Error::InvalidParameter(
                "custom schedules are built from explicit populations".into(),
            ))
        }
    };
    // The last population is the target by definition, not up to rounding.
    *pops.last_mut().expect("n >= 1") = q_target;
    Schedule::checked(pops, family)
}

/// Per-collision bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub population: f64,
    pub energy: f64,
    pub step_sigma: f64,
}

/// Runs the swap chain from the maximally mixed system.
pub fn run_chain(schedule: &Schedule, beta: f64) -> Result<ProcessOutcome> {
    Ok(run_chain_steps(schedule, beta)?.0)
}

pub fn run_chain_steps(schedule: &Schedule, beta: f64) -> Result<(ProcessOutcome, Vec<StepRecord>)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta(beta));
    }
    let energies = schedule.energies(beta);
    let mut prev = 0.5;
    let mut beta_q = NeumaierSum::new();
    let mut ds_bath = NeumaierSum::new();
    let mut sigma = NeumaierSum::new();
    let mut steps = Vec::with_capacity(schedule.len());
    for (k, (&p, &e)) in schedule.populations.iter().zip(&energies).enumerate() {
        // The bath qubit leaves with the system's old population.
        let bq = beta * e * (prev - p);
        let kl = binary_kl(prev, p);
        beta_q.add(bq);
        ds_bath.add(binary_entropy(prev) - binary_entropy(p));
        sigma.add(kl);
        steps.push(StepRecord {
            step: k + 1,
            population: p,
            energy: e,
            step_sigma: kl,
        });
        prev = p;
    }
    let ds_system = binary_entropy(prev) - binary_entropy(0.5);
    let heat_q = beta_q.value() / beta;
    let total = beta_q.value() + ds_system;
    let d = sigma.value();
    Ok((
        ProcessOutcome {
            beta,
            heat_q,
            ds_system,
            ds_bath: ds_bath.value(),
            mutual_info: 0.0,
            rel_ent_bath: d,
            sigma: total,
            q_excited: prev,
            identity_residual: (total - d).abs(),
        },
        steps,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid() {
        let s = make_schedule(ScheduleFamily::Linear, 4, 0.1).unwrap();
        for (a, b) in s.populations().iter().zip([0.4, 0.3, 0.2, 0.1]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn geodesic_spacing() {
        let s = make_schedule(ScheduleFamily::Geodesic, 2, 0.01).unwrap();
        let th: Vec<f64> = s.populations().iter().map(|p| p.sqrt().asin()).collect();
        let step = (FRAC_PI_4 - 0.1f64.asin()) / 2.0;
        assert!((FRAC_PI_4 - th[0] - step).abs() < 1e-15);
        assert!((th[0] - th[1] - step).abs() < 1e-15);
    }

    #[test]
    fn single_swap() {
        let s = make_schedule(ScheduleFamily::Geodesic, 1, 0.25).unwrap();
        assert_eq!(s.populations(), &[0.25]);
        let o = run_chain(&s, 1.0).unwrap();
        let kl = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((o.sigma - kl).abs() < 1e-15);
        assert!(o.identity_residual < 1e-15);
    }

    #[test]
    fn idle_schedule() {
        let s = Schedule::custom(vec![0.5; 5]).unwrap();
        let o = run_chain(&s, 1.0).unwrap();
        assert_eq!(o.sigma, 0.0);
        assert_eq!(o.q_excited, 0.5);
    }

    #[test]
    fn rejects_bad_schedules() {
        assert!(make_schedule(ScheduleFamily::Linear, 3, 0.5).is_err());
        assert!(make_schedule(ScheduleFamily::Linear, 0, 0.1).is_err());
        assert!(make_schedule(ScheduleFamily::Custom, 3, 0.1).is_err());
        assert!(Schedule::custom(vec![0.2, 0.3]).is_err());
        assert!(Schedule::custom(vec![0.0]).is_err());
    }
}
