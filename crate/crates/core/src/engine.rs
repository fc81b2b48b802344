//! Permutation protocols on the compressed joint state.
//!
//! A joint diagonal state `p_S ⊗ g_B` has eigenvalue `p_s g_i` with
//! multiplicity `Ω_i` for every pair `(s, i)`. A permutation unitary only
//! rearranges these eigenvalues over the slots `(s, i, k)`, so it is stored
//! as runs of equal values ("chunks") per slot group `(s, i)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_count, log_sum_exp, xlogx_neg, Dd, NeumaierSum};
use crate::spectra::{engineered_interacting, EngineeredParams};
use crate::spectrum::Spectrum;
use crate::thermo::{entropy, gibbs, gibbs_log_probs, Chunk, LevelDistribution, SystemDiag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Largest eigenvalues into the ground sector, lowest bath energy first.
    Sorted,
    /// The structured assignment for the engineered family: ground-sector
    /// level `i` takes the weight of level `i - 1`, the excited sector takes
    /// the top level.
    LevelShift,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Sorted => "sorted",
            Policy::LevelShift => "level_shift",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sorted" => Ok(Policy::Sorted),
            "level_shift" | "level-shift" => Ok(Policy::LevelShift),
            other => Err(Error::InvalidParameter(format!("unknown policy {other:?}"))),
        }
    }
}

/// `count` slots of group `(sector, level)` holding the eigenvalue
/// `exp(log_prob)` that originally sat in group `source`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointChunk {
    pub sector: usize,
    pub level: usize,
    pub count: BigUint,
    pub log_prob: Dd,
    pub source: (usize, usize),
}

impl JointChunk {
    pub fn weight(&self) -> f64 {
        if self.log_prob.hi == f64::NEG_INFINITY {
            return 0.0;
        }
        (ln_count(&self.count) + self.log_prob).value().exp()
    }
}

/// Post-permutation joint state. Chunks are grouped by `(sector, level)` in
/// ascending order, and listed in slot order inside each group.
#[derive(Clone, Debug, PartialEq)]
pub struct ChunkedJoint {
    chunks: Vec<JointChunk>,
    dim_system: usize,
    degeneracies: Vec<BigUint>,
    /// `groups[level][sector]` indexes into `chunks`.
    groups: Vec<Vec<Range<usize>>>,
}

impl ChunkedJoint {
    pub fn new(dim_system: usize, degeneracies: Vec<BigUint>, chunks: Vec<JointChunk>) -> Result<Self> {
        let levels = degeneracies.len();
        let mut groups = vec![vec![0..0; dim_system]; levels];
        let mut filled = vec![vec![BigUint::zero(); dim_system]; levels];
        let mut prev: Option<(usize, usize)> = None;
        let mut total = NeumaierSum::new();
        for (k, c) in chunks.iter().enumerate() {
            if c.sector >= dim_system || c.level >= levels {
                return Err(Error::InvalidDistribution(format!(
                    "joint chunk ({}, {}) out of range",
                    c.sector, c.level
                )));
            }
            if c.count.is_zero() {
                return Err(Error::InvalidDistribution("empty joint chunk".into()));
            }
            let key = (c.sector, c.level);
            match prev {
                Some(p) if p > key => {
                    return Err(Error::InvalidDistribution("joint chunks out of order".into()))
                }
                Some(p) if p == key => groups[c.level][c.sector].end = k + 1,
                _ => groups[c.level][c.sector] = k..k + 1,
            }
            prev = Some(key);
            filled[c.level][c.sector] += &c.count;
            total.add(c.weight());
        }
        for (i, row) in filled.iter().enumerate() {
            for (s, f) in row.iter().enumerate() {
                if f != &degeneracies[i] {
                    return Err(Error::InvalidDistribution(format!(
                        "slot group ({s}, {i}) holds {f} states, expected {}",
                        degeneracies[i]
                    )));
                }
            }
        }
        if (total.value() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "joint probability {} is not 1",
                total.value()
            )));
        }
        Ok(ChunkedJoint {
            chunks,
            dim_system,
            degeneracies,
            groups,
        })
    }

    pub fn chunks(&self) -> &[JointChunk] {
        &self.chunks
    }

    pub fn dim_system(&self) -> usize {
        self.dim_system
    }

    pub fn num_levels(&self) -> usize {
        self.degeneracies.len()
    }

    /// Calls `f(level, count, values)` for every maximal run of bath slots in
    /// which all sectors are constant; `values[s]` is the log-probability of
    /// sector `s` on that run.
    pub fn for_each_overlay<F: FnMut(usize, &BigUint, &[Dd])>(&self, mut f: F) {
        let ds = self.dim_system;
        let mut cursor = vec![0usize; ds];
        let mut remaining = vec![BigUint::zero(); ds];
        let mut values = vec![Dd::ZERO; ds];
        for (level, row) in self.groups.iter().enumerate() {
            for s in 0..ds {
                cursor[s] = row[s].start;
                remaining[s] = self.chunks[cursor[s]].count.clone();
                values[s] = self.chunks[cursor[s]].log_prob;
            }
            loop {
                let take = remaining.iter().min().expect("at least one sector").clone();
                f(level, &take, &values);
                let mut done = false;
                for s in 0..ds {
                    remaining[s] -= &take;
                    if remaining[s].is_zero() {
                        cursor[s] += 1;
                        if cursor[s] >= row[s].end {
                            done = true;
                        } else {
                            remaining[s] = self.chunks[cursor[s]].count.clone();
                            values[s] = self.chunks[cursor[s]].log_prob;
                        }
                    }
                }
                if done {
                    // All sectors cover exactly Ω_i slots, so they end together.
                    debug_assert!(remaining.iter().all(Zero::is_zero));
                    break;
                }
            }
        }
    }

    /// Checks that the joint state is a rearrangement of `p_S ⊗ g_B`: every
    /// source group is used exactly `Ω_i` times with its original value.
    pub fn check_spectrum_preserved(&self, system: &SystemDiag, log_g: &[Dd]) -> Result<()> {
        let mut used: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
        for c in &self.chunks {
            let (s, i) = c.source;
            if s >= self.dim_system || i >= log_g.len() {
                return Err(Error::InvalidDistribution("unknown chunk source".into()));
            }
            let expect = ln_p(system.populations()[s]) + log_g[i];
            if expect != c.log_prob {
                return Err(Error::InvalidDistribution(format!(
                    "chunk value differs from its source ({s}, {i})"
                )));
            }
            *used.entry((s, i)).or_default() += &c.count;
        }
        for s in 0..self.dim_system {
            for (i, d) in self.degeneracies.iter().enumerate() {
                let u = used.get(&(s, i)).cloned().unwrap_or_default();
                if &u != d {
                    return Err(Error::InvalidDistribution(format!(
                        "source ({s}, {i}) used {u} times, multiplicity {d}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sorted multiset of `(value, total count)` pairs.
    pub fn value_multiset(&self) -> Vec<(Dd, BigUint)> {
        let mut items: Vec<(Dd, BigUint)> =
            self.chunks.iter().map(|c| (c.log_prob, c.count.clone())).collect();
        merge_multiset(&mut items)
    }
}

/// Sorts `(value, count)` pairs by value and merges equal values.
pub fn merge_multiset(items: &mut [(Dd, BigUint)]) -> Vec<(Dd, BigUint)> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(Dd, BigUint)> = Vec::new();
    for (v, c) in items.iter() {
        match out.last_mut() {
            Some((lv, lc)) if lv == v => *lc += c,
            _ => out.push((*v, c.clone())),
        }
    }
    out
}

fn ln_p(p: f64) -> Dd {
    if p > 0.0 {
        Dd::new(p.ln())
    } else {
        Dd::NEG_INFINITY
    }
}

/// Functionals of a process; every entropy is in nats and `heat_q` in the
/// spectrum's energy units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessOutcome {
    pub beta: f64,
    #[serde(rename = "heat_Q")]
    pub heat_q: f64,
    #[serde(rename = "dS_system")]
    pub ds_system: f64,
    #[serde(rename = "dS_bath")]
    pub ds_bath: f64,
    pub mutual_info: f64,
    pub rel_ent_bath: f64,
    /// `βQ + ΔS_S`.
    pub sigma: f64,
    pub q_excited: f64,
    /// `|βQ + ΔS_S - (I + D)|`.
    pub identity_residual: f64,
}

impl ProcessOutcome {
    pub fn beta_q(&self) -> f64 {
        self.beta * self.heat_q
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outcome serializes")
    }
}

/// Everything a protocol run produces.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub joint: ChunkedJoint,
    pub outcome: ProcessOutcome,
    pub bath: LevelDistribution,
    pub system: SystemDiag,
}

pub fn max_cool(
    system: &SystemDiag,
    spectrum: &Spectrum,
    beta: f64,
    policy: Policy,
) -> Result<(ChunkedJoint, ProcessOutcome)> {
    let run = run_protocol(system, spectrum, beta, policy)?;
    Ok((run.joint, run.outcome))
}

pub fn run_protocol(
    system: &SystemDiag,
    spectrum: &Spectrum,
    beta: f64,
    policy: Policy,
) -> Result<ProtocolRun> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta(beta));
    }
    let log_g = gibbs_log_probs(spectrum, beta)?;
    let joint = match policy {
        Policy::Sorted => sorted_fill(system, spectrum, &log_g)?,
        Policy::LevelShift => level_shift_fill(system, spectrum, &log_g)?,
    };
    joint.check_spectrum_preserved(system, &log_g)?;
    analyze(&joint, system, spectrum, beta, &log_g)
}

fn sorted_fill(system: &SystemDiag, spectrum: &Spectrum, log_g: &[Dd]) -> Result<ChunkedJoint> {
    let ds = system.dim();
    let levels = spectrum.levels();
    let mut values: Vec<(Dd, usize, usize)> = Vec::with_capacity(ds * levels.len());
    for (s, &p) in system.populations().iter().enumerate() {
        for (i, lg) in log_g.iter().enumerate() {
            values.push((ln_p(p) + *lg, i, s));
        }
    }
    // Descending value; ties go to lower bath energy, then lower sector.
    values.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut chunks = Vec::with_capacity(2 * values.len());
    let mut src = values.iter();
    let mut current = src.next().expect("non-empty");
    let mut left = levels[current.1].degeneracy.clone();
    for s in 0..ds {
        for (i, level) in levels.iter().enumerate() {
            let mut cap = level.degeneracy.clone();
            while !cap.is_zero() {
                if left.is_zero() {
                    current = src.next().expect("slot and value counts agree");
                    left = levels[current.1].degeneracy.clone();
                }
                let take = if left <= cap { left.clone() } else { cap.clone() };
                cap -= &take;
                left -= &take;
                chunks.push(JointChunk {
                    sector: s,
                    level: i,
                    count: take,
                    log_prob: current.0,
                    source: (current.2, current.1),
                });
            }
        }
    }
    let degs = levels.iter().map(|l| l.degeneracy.clone()).collect();
    ChunkedJoint::new(ds, degs, chunks)
}

/// Tolerance on the half-half system required by the level-shift policy.
const HALF_TOL: f64 = 1e-12;

fn level_shift_fill(system: &SystemDiag, spectrum: &Spectrum, log_g: &[Dd]) -> Result<ChunkedJoint> {
    let pops = system.populations();
    if pops.len() != 2 || (pops[0] - 0.5).abs() > HALF_TOL {
        return Err(Error::IncompatiblePolicy(format!(
            "level_shift needs the system (1/2, 1/2), got {pops:?}"
        )));
    }
    let levels = spectrum.levels();
    let n = levels.len() - 1;
    if n < 1 {
        return Err(Error::IncompatiblePolicy("level_shift needs at least two levels".into()));
    }
    // pos[label] = energy-sorted position of the ansatz level `label`.
    let mut pos = vec![usize::MAX; n + 1];
    for (p, l) in levels.iter().enumerate() {
        if l.index > n || pos[l.index] != usize::MAX {
            return Err(Error::IncompatiblePolicy(format!(
                "level labels are not 0..={n}"
            )));
        }
        pos[l.index] = p;
        let expect = if l.index == 0 {
            BigUint::one()
        } else {
            BigUint::one() << (l.index - 1)
        };
        if l.degeneracy != expect {
            return Err(Error::IncompatiblePolicy(format!(
                "level {} has degeneracy {}, the ansatz needs {expect}",
                l.index, l.degeneracy
            )));
        }
    }
    let lp = [ln_p(pops[0]), ln_p(pops[1])];
    let value = |s: usize, label: usize| lp[s] + log_g[pos[label]];
    let mut chunks = Vec::new();
    // Ground sector, in energy order.
    for (p, l) in levels.iter().enumerate() {
        let label = l.index;
        let mut push = |src_sector: usize, src_label: usize, count: BigUint| {
            chunks.push(JointChunk {
                sector: 0,
                level: p,
                count,
                log_prob: value(src_sector, src_label),
                source: (src_sector, pos[src_label]),
            })
        };
        match label {
            0 => push(0, 0, BigUint::one()),
            1 => push(1, 0, BigUint::one()),
            _ => {
                let half = BigUint::one() << (label - 2);
                push(0, label - 1, half.clone());
                push(1, label - 1, half);
            }
        }
    }
    // Excited sector: both copies of the top level, in slot order.
    let top = pos[n];
    let mut queue = [(0usize, levels[top].degeneracy.clone()), (1, levels[top].degeneracy.clone())];
    let mut q = 0;
    for (p, l) in levels.iter().enumerate() {
        let mut cap = l.degeneracy.clone();
        while !cap.is_zero() {
            let (s, left) = &mut queue[q];
            let take = if *left <= cap { left.clone() } else { cap.clone() };
            cap -= &take;
            *left -= &take;
            chunks.push(JointChunk {
                sector: 1,
                level: p,
                count: take,
                log_prob: value(*s, n),
                source: (*s, top),
            });
            if left.is_zero() {
                q += 1;
            }
        }
    }
    let degs = levels.iter().map(|l| l.degeneracy.clone()).collect();
    ChunkedJoint::new(2, degs, chunks)
}

/// Per-sector probability totals.
pub fn marginal_system(joint: &ChunkedJoint) -> SystemDiag {
    let mut sums = vec![NeumaierSum::new(); joint.dim_system];
    for c in &joint.chunks {
        sums[c.sector].add(c.weight());
    }
    let pops: Vec<f64> = sums.iter().map(NeumaierSum::value).collect();
    SystemDiag::new(pops).expect("joint state is normalized")
}

/// Bath marginal, split at every slot where any sector changes value.
pub fn marginal_bath(joint: &ChunkedJoint) -> LevelDistribution {
    let mut chunks: Vec<Chunk> = Vec::new();
    joint.for_each_overlay(|level, count, values| {
        let lp = log_sum_exp(values);
        match chunks.last_mut() {
            Some(c) if c.level == level && c.log_prob == lp => c.count += count,
            _ => chunks.push(Chunk::new(level, count.clone(), lp)),
        }
    });
    LevelDistribution::from_parts(joint.degeneracies.clone(), chunks)
        .expect("joint state is normalized")
}

/// Computes every functional in one overlay pass.
fn analyze(
    joint: &ChunkedJoint,
    system: &SystemDiag,
    spectrum: &Spectrum,
    beta: f64,
    log_g: &[Dd],
) -> Result<ProtocolRun> {
    let sys_final = marginal_system(joint);
    let ln_sigma_s: Vec<f64> = sys_final
        .populations()
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect();
    let levels = spectrum.levels();
    let mut dw = vec![NeumaierSum::new(); levels.len()];
    let mut s_bath = NeumaierSum::new();
    let mut d_bath = NeumaierSum::new();
    let mut mi = NeumaierSum::new();
    let mut bath_chunks: Vec<Chunk> = Vec::new();
    joint.for_each_overlay(|i, count, values| {
        let ln_c = ln_count(count);
        let lpb = log_sum_exp(values);
        let lg = log_g[i];
        // Change of level weight on this run: c (p_B - g_i).
        let excess = (ln_c + lg).value().exp() * (lpb - lg).value().exp_m1();
        dw[i].add(excess);
        if lpb.hi > f64::NEG_INFINITY {
            let w = (ln_c + lpb).value().exp();
            s_bath.add(-w * lpb.value());
            d_bath.add(w * (lpb - lg).value());
            for (s, v) in values.iter().enumerate() {
                if v.hi == f64::NEG_INFINITY {
                    continue;
                }
                let wj = (ln_c + *v).value().exp();
                mi.add(wj * ((*v - lpb).value() - ln_sigma_s[s]));
            }
        }
        match bath_chunks.last_mut() {
            Some(c) if c.level == i && c.log_prob == lpb => c.count += count,
            _ => bath_chunks.push(Chunk::new(i, count.clone(), lpb)),
        }
    });
    let mut heat = NeumaierSum::new();
    for (l, d) in levels.iter().zip(&dw) {
        let d = d.value();
        heat.add(l.energy.hi * d);
        heat.add(l.energy.lo * d);
    }
    let heat_q = heat.value();
    let ds_system = sys_final.entropy() - system.entropy();
    let tau = gibbs(spectrum, beta)?;
    let ds_bath = s_bath.value() - entropy(&tau);
    let mutual_info = mi.value();
    let rel_ent_bath = d_bath.value();
    let sigma = beta * heat_q + ds_system;
    let outcome = ProcessOutcome {
        beta,
        heat_q,
        ds_system,
        ds_bath,
        mutual_info,
        rel_ent_bath,
        sigma,
        q_excited: sys_final.q_excited(),
        identity_residual: (sigma - (mutual_info + rel_ent_bath)).abs(),
    };
    let bath = LevelDistribution::from_parts(joint.degeneracies.clone(), bath_chunks)?;
    Ok(ProtocolRun {
        joint: joint.clone(),
        outcome,
        bath,
        system: sys_final,
    })
}

/// Excited occupation `Ω_n g_n` reached by both policies on the engineered
/// spectrum at its design temperature.
pub fn engineered_q(p: &EngineeredParams) -> Result<f64> {
    let s = engineered_interacting(p)?;
    let lp = gibbs_log_probs(&s, p.beta0)?;
    let top = s.position_of_index(p.n).expect("top label");
    Ok((s.levels()[top].ln_degeneracy() + lp[top]).value().exp())
}

/// Sum of `-p ln p` over the system, exposed for callers that only hold
/// populations.
pub fn binary_entropy(q: f64) -> f64 {
    xlogx_neg(q) + xlogx_neg(1.0 - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{critical_degenerate, CriticalParams};

    fn half() -> SystemDiag {
        SystemDiag::maximally_mixed(2)
    }

    #[test]
    fn one_qubit_bath_swap() {
        let s = Spectrum::new("q", &[(0.0, 1), (3f64.ln(), 1)]).unwrap();
        let (joint, o) = max_cool(&half(), &s, 1.0, Policy::Sorted).unwrap();
        assert!((o.q_excited - 0.25).abs() < 1e-15);
        assert!((o.beta_q() - 0.25 * 3f64.ln()).abs() < 1e-15);
        assert!((o.ds_system - (binary_entropy(0.25) - 2f64.ln())).abs() < 1e-15);
        let kl = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((o.sigma - kl).abs() < 1e-15);
        assert!(o.mutual_info.abs() < 1e-16);
        assert!((o.rel_ent_bath - kl).abs() < 1e-15);
        let b = marginal_bath(&joint).level_weights();
        assert!((b[0] - 0.5).abs() < 1e-15 && (b[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pure_ground_system_is_untouched() {
        let s = Spectrum::new("s", &[(0.0, 1), (0.4, 3), (1.1, 4)]).unwrap();
        let sys = SystemDiag::new(vec![1.0, 0.0]).unwrap();
        let (_, o) = max_cool(&sys, &s, 1.0, Policy::Sorted).unwrap();
        assert_eq!(o.heat_q, 0.0);
        assert_eq!(o.sigma, 0.0);
        assert_eq!(o.q_excited, 0.0);
    }

    #[test]
    fn critical_small_case() {
        let p = CriticalParams::new(3, 0.5, 1.0).unwrap();
        let s = critical_degenerate(&p).unwrap();
        let (joint, o) = max_cool(&half(), &s, 1.0, Policy::Sorted).unwrap();
        assert!((o.q_excited - 2.0 / 7.0).abs() < 1e-15);
        let bath = marginal_bath(&joint);
        let c = &bath.chunks()[0];
        assert!((c.log_prob.value().exp() - 8.0 / 28.0).abs() < 1e-15);
        let first_excited = &bath.chunks()[1];
        assert!((first_excited.log_prob.value().exp() - 8.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn policies_share_q_and_are_ordered() {
        let p = EngineeredParams::new(4, 3.0, 1.0).unwrap();
        let s = engineered_interacting(&p).unwrap();
        let (_, a) = max_cool(&half(), &s, 1.0, Policy::Sorted).unwrap();
        let (_, b) = max_cool(&half(), &s, 1.0, Policy::LevelShift).unwrap();
        let q = engineered_q(&p).unwrap();
        assert!((q - 0.0038168).abs() < 1e-7);
        assert!((a.q_excited - q).abs() < 1e-15 && (b.q_excited - q).abs() < 1e-15);
        assert!(a.sigma <= b.sigma);
        assert!(a.identity_residual < 1e-13 && b.identity_residual < 1e-13);
    }

    #[test]
    fn level_shift_rejects_other_inputs() {
        let s = Spectrum::new("s", &[(0.0, 1), (1.0, 3)]).unwrap();
        assert!(max_cool(&half(), &s, 1.0, Policy::LevelShift).is_err());
        let p = EngineeredParams::new(4, 3.0, 1.0).unwrap();
        let e = engineered_interacting(&p).unwrap();
        let skew = SystemDiag::qubit(0.3).unwrap();
        assert!(matches!(
            max_cool(&skew, &e, 1.0, Policy::LevelShift),
            Err(Error::IncompatiblePolicy(_))
        ));
    }

    #[test]
    fn outcome_json_is_flat() {
        let s = Spectrum::new("q", &[(0.0, 1), (1.0, 1)]).unwrap();
        let (_, o) = max_cool(&half(), &s, 1.0, Policy::Sorted).unwrap();
        let v: serde_json::Value = serde_json::from_str(&o.to_json()).unwrap();
        for key in ["heat_Q", "dS_system", "dS_bath", "mutual_info", "rel_ent_bath", "sigma", "q_excited", "identity_residual"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
