//! Exact thresholds.
//!
//! Tables produced by the lower-bound construction take values in `(1/s) Z`,
//! so every coefficient over a coset of dimension `k` lies in
//! `(1 / (s * 2^k)) Z`. Comparisons against a rational threshold are done on
//! integers whenever that grid is known.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Slack allowed when snapping a float onto its dyadic grid.
const SNAP_TOLERANCE: f64 = 1e-6;

/// A positive rational threshold such as `epsilon` or `tau`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Epsilon(Ratio<i64>);

impl Epsilon {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let r = Ratio::new(num, den);
        if r <= Ratio::zero() {
            return Err(Error::InvalidParameter(format!(
                "threshold must be positive, got {r}"
            )));
        }
        Ok(Epsilon(r))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn value(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `1 / (16 s)`, the largest threshold the `s`-block construction defeats.
    pub fn for_blocks(s: usize) -> Result<Self> {
        Self::new(1, 16 * s as i64)
    }

    /// `s = floor(1 / (16 eps))`.
    pub fn block_count(&self) -> usize {
        (self.denom() / (16 * self.numer())) as usize
    }

    /// `ceil(1 / eps^3)`, the iteration budget of energy increment.
    pub fn increment_budget(&self) -> u64 {
        let num = self.numer() as i128;
        let den = self.denom() as i128;
        let cube = |x: i128| x.checked_mul(x).and_then(|y| y.checked_mul(x));
        match (cube(den), cube(num)) {
            (Some(d), Some(n)) => Integer::div_ceil(&d, &n).min(u64::MAX as i128) as u64,
            _ => u64::MAX,
        }
    }

    /// Whether `value > eps`, decided on integers when `value * scale` is integral.
    pub fn exceeded_by(&self, value: f64, scale: Option<u64>) -> bool {
        if let Some(grid) = snap(value, scale) {
            let scale = scale.unwrap() as i128;
            grid * self.denom() as i128 > self.numer() as i128 * scale
        } else {
            value > self.value()
        }
    }

    /// Whether `count >= (1 - eps) * total`.
    pub fn majority(&self, count: u64, total: u64) -> bool {
        let num = self.numer() as i128;
        let den = self.denom() as i128;
        count as i128 * den >= (den - num) * total as i128
    }

    /// Whether `count / total > eps`.
    pub fn fraction_exceeds(&self, count: u64, total: u64) -> bool {
        count as i128 * self.denom() as i128 > self.numer() as i128 * total as i128
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Accepts `"1/48"`, `"0.03125"`, or an integer.
impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse threshold {s:?}"));
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            return Epsilon::new(a, b);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 17 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let int: i64 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = 10i64.pow(frac.len() as u32);
        let frac_val: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let num = int
            .checked_mul(den)
            .and_then(|x| x.checked_add(frac_val))
            .ok_or_else(bad)?;
        Epsilon::new(num, den)
    }
}

/// A counted proportion `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "fraction with zero denominator");
        Fraction { num, den }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `self > p / q`, exactly.
    pub fn exceeds(&self, p: u64, q: u64) -> bool {
        self.num as u128 * q as u128 > p as u128 * self.den as u128
    }

    /// `self <= p / q`, exactly.
    pub fn at_most(&self, p: u64, q: u64) -> bool {
        !self.exceeds(p, q)
    }

    pub fn max(self, other: Fraction) -> Fraction {
        if other.num as u128 * self.den as u128 > self.num as u128 * other.den as u128 {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Fraction) -> Fraction {
        if (other.num as u128) * (self.den as u128) < (self.num as u128) * (other.den as u128) {
            other
        } else {
            self
        }
    }
}

/// Lowest terms, e.g. `"1/4"`, `"0"`, `"1"`.
impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&ratio_string(self.num, self.den))
    }
}

/// `round(value * scale)` when that product is within tolerance of an integer.
pub fn snap(value: f64, scale: Option<u64>) -> Option<i128> {
    let scale = scale?;
    let scaled = value * scale as f64;
    let rounded = scaled.round();
    ((scaled - rounded).abs() <= SNAP_TOLERANCE).then_some(rounded as i128)
}

/// Exact rational for `value` on the grid `(1/scale) Z`, if it lies on it.
pub fn to_ratio(value: f64, scale: Option<u64>) -> Option<Ratio<i128>> {
    snap(value, scale).map(|n| Ratio::new(n, scale.unwrap() as i128))
}

/// Renders `num/den` in lowest terms, `"0"` and integers without a slash.
pub fn ratio_string(num: u64, den: u64) -> String {
    Ratio::new(num as i128, den as i128).to_string()
}

/// `value` as a float, for reports.
pub fn ratio_f64(r: &Ratio<i128>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("1/48".parse::<Epsilon>().unwrap(), Epsilon::new(1, 48).unwrap());
        assert_eq!(
            "0.03125".parse::<Epsilon>().unwrap(),
            Epsilon::new(1, 32).unwrap()
        );
        assert_eq!(".5".parse::<Epsilon>().unwrap(), Epsilon::new(1, 2).unwrap());
        assert_eq!("0.1".parse::<Epsilon>().unwrap(), Epsilon::new(1, 10).unwrap());
        assert!("0".parse::<Epsilon>().is_err());
        assert!("-1/3".parse::<Epsilon>().is_err());
        assert!("abc".parse::<Epsilon>().is_err());
    }

    #[test]
    fn block_count_and_budget() {
        assert_eq!(Epsilon::new(1, 48).unwrap().block_count(), 3);
        assert_eq!(Epsilon::new(1, 32).unwrap().block_count(), 2);
        assert_eq!(Epsilon::new(1, 10).unwrap().increment_budget(), 1000);
        assert_eq!(Epsilon::new(1, 48).unwrap().increment_budget(), 110_592);
        assert_eq!(Epsilon::new(3, 10).unwrap().increment_budget(), 38);
    }

    #[test]
    fn exact_comparison_on_grid() {
        let eps = Epsilon::new(1, 48).unwrap();
        // 1/48 on the grid 1/(3 * 16): equal, so not exceeded
        assert!(!eps.exceeded_by(1.0 / 48.0, Some(48)));
        assert!(eps.exceeded_by(2.0 / 96.0 + 1.0 / 96.0, Some(96)));
        assert!(eps.majority(47, 48));
        assert!(!eps.majority(46, 48));
        assert!(eps.fraction_exceeds(2, 48));
        assert!(!eps.fraction_exceeds(1, 48));
    }

    #[test]
    fn fractions() {
        let a = Fraction::new(3, 4);
        assert!(a.at_most(3, 4));
        assert!(a.exceeds(1, 2));
        assert_eq!(a.max(Fraction::new(7, 8)), Fraction::new(7, 8));
        assert_eq!(a.min(Fraction::new(7, 8)), a);
        assert_eq!(Fraction::new(6, 8).to_string(), "3/4");
    }

    #[test]
    fn ratio_strings() {
        assert_eq!(ratio_string(2, 8), "1/4");
        assert_eq!(ratio_string(0, 8), "0");
        assert_eq!(ratio_string(8, 8), "1");
        assert_eq!(to_ratio(0.25, Some(8)).unwrap().to_string(), "1/4");
        assert_eq!(to_ratio(0.3, Some(8)), None);
    }
}
