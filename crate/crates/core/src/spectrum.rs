//! Compressed bath Hamiltonians: energy levels with exact degeneracies.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{count_from_log2, ln_count, log2_count, Dd};

/// One energy level. `index` is the label the level had at construction
/// time (builders number levels by their own convention, not by energy).
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub energy: Dd,
    pub degeneracy: BigUint,
    pub index: usize,
    ln_degeneracy: Dd,
}

impl Level {
    pub fn new(energy: impl Into<Dd>, degeneracy: BigUint, index: usize) -> Self {
        let ln_degeneracy = ln_count(&degeneracy);
        Level {
            energy: energy.into(),
            degeneracy,
            index,
            ln_degeneracy,
        }
    }

    pub fn ln_degeneracy(&self) -> Dd {
        self.ln_degeneracy
    }

    pub fn degeneracy_log2(&self) -> f64 {
        log2_count(&self.degeneracy)
    }
}

/// Levels sorted by strictly increasing energy.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    levels: Vec<Level>,
    label: String,
}

impl Spectrum {
    /// Sorts levels by energy and merges exactly equal energies (the merged
    /// level keeps the smallest construction index).
    pub fn from_levels(label: impl Into<String>, mut levels: Vec<Level>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidSpectrum("no levels".into()));
        }
        for l in &levels {
            if !l.energy.is_finite() || l.energy.lo.is_nan() {
                return Err(Error::InvalidSpectrum(format!(
                    "non-finite energy {:?} at index {}",
                    l.energy, l.index
                )));
            }
            if l.degeneracy.is_zero() {
                return Err(Error::InvalidSpectrum(format!(
                    "zero degeneracy at index {}",
                    l.index
                )));
            }
        }
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.index.cmp(&b.index)));
        let mut merged: Vec<Level> = Vec::with_capacity(levels.len());
        for l in levels {
            match merged.last_mut() {
                Some(prev) if prev.energy == l.energy => {
                    let deg = &prev.degeneracy + &l.degeneracy;
                    *prev = Level::new(prev.energy, deg, prev.index.min(l.index));
                }
                _ => merged.push(l),
            }
        }
        Ok(Spectrum {
            levels: merged,
            label: label.into(),
        })
    }

    /// Levels given as `(energy, degeneracy)`; indices follow input order.
    pub fn new(label: impl Into<String>, levels: &[(f64, u64)]) -> Result<Self> {
        let levels = levels
            .iter()
            .enumerate()
            .map(|(i, &(e, g))| Level::new(e, BigUint::from(g), i))
            .collect();
        Self::from_levels(label, levels)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Total number of microstates.
    pub fn dimension(&self) -> BigUint {
        self.levels.iter().map(|l| &l.degeneracy).sum()
    }

    pub fn check_dimension(&self, declared: &BigUint) -> Result<()> {
        let d = self.dimension();
        if &d != declared {
            return Err(Error::InvalidSpectrum(format!(
                "microstate count {d} differs from declared dimension {declared}"
            )));
        }
        Ok(())
    }

    /// `ln d_B`.
    pub fn ln_dimension(&self) -> f64 {
        ln_count(&self.dimension()).value()
    }

    pub fn min_energy(&self) -> f64 {
        self.levels[0].energy.value()
    }

    pub fn max_energy(&self) -> f64 {
        self.levels[self.levels.len() - 1].energy.value()
    }

    /// Position of the level carrying construction index `index`.
    pub fn position_of_index(&self, index: usize) -> Option<usize> {
        self.levels.iter().position(|l| l.index == index)
    }

    /// Checks the ordering and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        for w in self.levels.windows(2) {
            if w[0].energy.total_cmp(&w[1].energy) != Ordering::Less {
                return Err(Error::InvalidSpectrum("energies not strictly increasing".into()));
            }
        }
        if self.levels.iter().any(|l| l.degeneracy < BigUint::one()) {
            return Err(Error::InvalidSpectrum("degeneracy below one".into()));
        }
        Ok(())
    }

    pub fn to_document(&self, beta: Option<f64>) -> SpectrumDocument {
        SpectrumDocument {
            label: self.label.clone(),
            beta,
            levels: self
                .levels
                .iter()
                .map(|l| LevelRecord {
                    energy: l.energy.hi,
                    energy_lo: l.energy.lo,
                    degeneracy_log2: l.degeneracy_log2(),
                    degeneracy: Some(l.degeneracy.to_str_radix(10)),
                    index: Some(l.index),
                })
                .collect(),
        }
    }

    pub fn to_json(&self, beta: Option<f64>) -> String {
        serde_json::to_string_pretty(&self.to_document(beta)).expect("spectrum serializes")
    }

    pub fn from_json(text: &str) -> Result<(Spectrum, Option<f64>)> {
        let doc: SpectrumDocument =
            serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        let beta = doc.beta;
        Ok((doc.into_spectrum()?, beta))
    }
}

/// Serialized spectrum. `degeneracy` (decimal string) is authoritative when
/// present; otherwise the count is recovered from `degeneracy_log2`, which
/// is only accepted when unambiguous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub levels: Vec<LevelRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub energy: f64,
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    pub energy_lo: f64,
    pub degeneracy_log2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

fn is_zero_f64(x: &f64) -> bool {
    *x == 0.0
}

impl SpectrumDocument {
    pub fn into_spectrum(self) -> Result<Spectrum> {
        let mut levels = Vec::with_capacity(self.levels.len());
        for (pos, rec) in self.levels.into_iter().enumerate() {
            let degeneracy = match &rec.degeneracy {
                Some(s) => {
                    let d = s
                        .parse::<BigUint>()
                        .map_err(|e| Error::Json(format!("degeneracy {s:?}: {e}")))?;
                    let l2 = log2_count(&d);
                    if (l2 - rec.degeneracy_log2).abs() > 1e-9 * (1.0 + l2) {
                        return Err(Error::Json(format!(
                            "degeneracy {s} inconsistent with degeneracy_log2 {}",
                            rec.degeneracy_log2
                        )));
                    }
                    d
                }
                None => count_from_log2(rec.degeneracy_log2).ok_or_else(|| {
                    Error::Json(format!(
                        "degeneracy_log2 {} does not identify an integer count",
                        rec.degeneracy_log2
                    ))
                })?,
            };
            let energy = Dd::from_parts(rec.energy, rec.energy_lo);
            levels.push(Level::new(energy, degeneracy, rec.index.unwrap_or(pos)));
        }
        Spectrum::from_levels(self.label, levels)
    }
}
