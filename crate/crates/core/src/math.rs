//! Float helpers over `libm` and a small exact rational.

use core::fmt;

use serde::{Deserialize, Serialize};

pub const PI: f64 = core::f64::consts::PI;
pub const TAU: f64 = core::f64::consts::TAU;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// `(cos 2πt, sin 2πt)` for `t` in turns, reduced to `[0, 1)` first so large
/// arguments keep full precision.
#[inline]
pub fn cis_turns(t: f64) -> (f64, f64) {
    let r = t - libm::floor(t);
    let a = TAU * r;
    (libm::cos(a), libm::sin(a))
}

pub fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Nonnegative rational `num/den` kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    /// Panics if `den == 0`.
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd_u128(num, den);
        Ratio {
            num: num / g,
            den: den / g,
        }
    }

    pub fn one() -> Self {
        Ratio { num: 1, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Mean of a slice with pairwise summation (deterministic, low drift on
/// million-point grids).
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum(values) / values.len() as f64
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 128;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Pairwise sum of `f(x)` over a slice.
pub fn pairwise_sum_by(values: &[f64], f: &impl Fn(f64) -> f64) -> f64 {
    const BLOCK: usize = 128;
    if values.len() <= BLOCK {
        values.iter().map(|&x| f(x)).sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum_by(&values[..mid], f) + pairwise_sum_by(&values[mid..], f)
    }
}

pub fn mean_by(values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum_by(values, &f) / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_reduces() {
        let r = Ratio::new(121, 81);
        assert_eq!((r.num, r.den), (121, 81));
        let r = Ratio::new(8, 8);
        assert_eq!(r, Ratio::one());
        assert_eq!(Ratio::new(6, 4), Ratio { num: 3, den: 2 });
    }

    #[test]
    fn cis_reduces_large_turns() {
        let (c, s) = cis_turns(1e6 + 0.25);
        assert!(c.abs() < 1e-9 && (s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_mean_matches_naive() {
        let v: alloc::vec::Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert!((mean(&v) - 249.75).abs() < 1e-12);
    }
}
