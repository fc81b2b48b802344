//! Floating-point building blocks: double-double values, compensated sums,
//! log-domain helpers and the 1-D searches used across the crate.
//!
//! Bath energies of an `n`-qubit engineered spectrum reach `n ln 2`, while
//! the entropy production we want is `O(1/n^2)`. A plain `f64` energy of
//! magnitude ~3000 carries ~4e-13 absolute error, which is already larger
//! than the tolerances on heat. Energies and log-probabilities are therefore
//! carried as [`Dd`] (an unevaluated sum `hi + lo` of two doubles).

use std::cmp::Ordering;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// `ln 2` to ~32 significant digits.
pub const LN_2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const NEG_INFINITY: Dd = Dd {
        hi: f64::NEG_INFINITY,
        lo: 0.0,
    };

    pub const fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_parts(hi: f64, lo: f64) -> Self {
        if !hi.is_finite() {
            return Dd { hi, lo: 0.0 };
        }
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Rounded value.
    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn add_f64(self, b: f64) -> Dd {
        let (s, e) = two_sum(self.hi, b);
        if !s.is_finite() {
            return Dd::new(s);
        }
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        if !p.is_finite() {
            return Dd::new(p);
        }
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        if !q1.is_finite() {
            return Dd::new(q1);
        }
        let rem = self - Dd::new(b).mul_f64(q1);
        let q2 = rem.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }

    /// Exact product of an integer and `self`, rounded to double-double.
    pub fn scale_int(self, k: u64) -> Dd {
        self.mul_f64(k as f64)
    }

    /// Lexicographic comparison on `(hi, lo)`; `-inf` sorts first.
    pub fn total_cmp(&self, other: &Dd) -> Ordering {
        self.hi
            .total_cmp(&other.hi)
            .then_with(|| self.lo.total_cmp(&other.lo))
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        if !s.is_finite() {
            return Dd::new(s);
        }
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.comp += e;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// `ln(e^a + e^b)` in double-double.
pub fn log_add_exp(a: Dd, b: Dd) -> Dd {
    let (big, small) = if a.total_cmp(&b) == Ordering::Less {
        (b, a)
    } else {
        (a, b)
    };
    if big.hi == f64::NEG_INFINITY {
        return Dd::NEG_INFINITY;
    }
    if small.hi == f64::NEG_INFINITY {
        return big;
    }
    big.add_f64((small - big).value().exp().ln_1p())
}

/// `ln Σ e^{x_i}`; the result keeps the double-double precision of the
/// largest term.
pub fn log_sum_exp(terms: &[Dd]) -> Dd {
    let Some(max) = terms.iter().copied().max_by(|a, b| a.total_cmp(b)) else {
        return Dd::NEG_INFINITY;
    };
    if max.hi == f64::NEG_INFINITY {
        return Dd::NEG_INFINITY;
    }
    let rest = compensated_sum(terms.iter().map(|t| (*t - max).value().exp()));
    // rest >= 1 because the maximum contributes exactly 1.
    max.add_f64(rest.ln())
}

/// `-x ln x` with the `0 ln 0 = 0` convention.
#[inline]
pub fn xlogx_neg(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Natural log of an exact count, as a double-double.
///
/// Powers of two are exact; otherwise the count is rounded to 53
/// significant bits first (relative error below 2^-53).
pub fn ln_count(count: &BigUint) -> Dd {
    let bits = count.bits();
    if bits == 0 {
        return Dd::NEG_INFINITY;
    }
    if bits <= 53 {
        let c = count.to_u64().expect("fits in 53 bits");
        if c.is_power_of_two() {
            return LN_2.scale_int(u64::from(c.trailing_zeros()));
        }
        return mantissa_ln(c as f64, 0);
    }
    let shift = bits.saturating_sub(64);
    let top = (count >> shift).to_u64().expect("top 64 bits");
    if top.is_power_of_two() && count.trailing_zeros() == Some(bits - 1) {
        return LN_2.scale_int(bits - 1);
    }
    mantissa_ln(top as f64, shift)
}

fn mantissa_ln(m: f64, shift: u64) -> Dd {
    // m = f * 2^e with f in [1, 2)
    let e = m.log2().floor() as i64;
    let f = m / 2f64.powi(e as i32);
    let k = e + shift as i64;
    let base = if k >= 0 {
        LN_2.scale_int(k as u64)
    } else {
        -LN_2.scale_int((-k) as u64)
    };
    base.add_f64(f.ln())
}

/// Base-2 log of an exact count.
pub fn log2_count(count: &BigUint) -> f64 {
    let bits = count.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        let c = count.to_u64().expect("fits in 53 bits");
        return if c.is_power_of_two() {
            f64::from(c.trailing_zeros())
        } else {
            (c as f64).log2()
        };
    }
    let shift = bits.saturating_sub(64);
    let top = (count >> shift).to_u64().expect("top 64 bits") as f64;
    top.log2() + shift as f64
}

/// Recover an exact count from its base-2 log.
///
/// Only unambiguous cases are accepted: integral exponents (powers of two)
/// and values below 2^53 that round to an integer.
pub fn count_from_log2(log2: f64) -> Option<BigUint> {
    if !log2.is_finite() || log2 < 0.0 {
        return None;
    }
    if log2.fract() == 0.0 {
        return Some(BigUint::from(1u8) << (log2 as u64));
    }
    if log2 < 53.0 {
        let v = log2.exp2().round();
        if v >= 1.0 {
            return Some(BigUint::from(v as u64));
        }
    }
    None
}

/// Count as `f64`, `inf` if it overflows.
pub fn count_to_f64(count: &BigUint) -> f64 {
    if count.is_zero() {
        0.0
    } else {
        count.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (hi - lo).abs() <= tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

/// Bisection for an increasing function: returns `x` in `[lo, hi]` with
/// `f(x) ~ target`, iterating until the bracket stops shrinking.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
