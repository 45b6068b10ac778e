//! Exact δ-grid arithmetic.
//!
//! Every value and aspiration is an integer count of δ-steps. The step δ is
//! kept once per game as an exact rational, so converting to and from real
//! numbers never drifts.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer multiple of the game's grid step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridValue(pub i64);

impl GridValue {
    pub const ZERO: GridValue = GridValue(0);
    /// One grid step (δ).
    pub const STEP: GridValue = GridValue(1);

    #[inline]
    pub fn steps(self) -> i64 {
        self.0
    }

    #[inline]
    pub fn abs(self) -> GridValue {
        GridValue(self.0.abs())
    }
}

impl Add for GridValue {
    type Output = GridValue;
    #[inline]
    fn add(self, rhs: GridValue) -> GridValue {
        GridValue(self.0 + rhs.0)
    }
}

impl Sub for GridValue {
    type Output = GridValue;
    #[inline]
    fn sub(self, rhs: GridValue) -> GridValue {
        GridValue(self.0 - rhs.0)
    }
}

impl Neg for GridValue {
    type Output = GridValue;
    fn neg(self) -> GridValue {
        GridValue(-self.0)
    }
}

impl AddAssign for GridValue {
    #[inline]
    fn add_assign(&mut self, rhs: GridValue) {
        self.0 += rhs.0;
    }
}

impl SubAssign for GridValue {
    #[inline]
    fn sub_assign(&mut self, rhs: GridValue) {
        self.0 -= rhs.0;
    }
}

impl Sum for GridValue {
    fn sum<I: Iterator<Item = GridValue>>(iter: I) -> GridValue {
        GridValue(iter.map(|v| v.0).sum())
    }
}

impl<'a> Sum<&'a GridValue> for GridValue {
    fn sum<I: Iterator<Item = &'a GridValue>>(iter: I) -> GridValue {
        GridValue(iter.map(|v| v.0).sum())
    }
}

impl fmt::Display for GridValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}δ", self.0)
    }
}

/// The grid step δ, a strictly positive rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Delta(Ratio<i64>);

impl Delta {
    pub const ONE: Delta = Delta(Ratio::new_raw(1, 1));

    pub fn new(step: Ratio<i64>) -> Result<Delta> {
        if step <= Ratio::zero() {
            return Err(Error::validation(format!("grid step must be positive, got {step}")));
        }
        Ok(Delta(step))
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    /// Exact real value of `v` grid steps.
    pub fn value_of(self, v: GridValue) -> Ratio<i64> {
        self.0 * v.0
    }

    /// Grid count of `x`, or `None` when `x` is not an integer multiple of δ.
    pub fn to_grid(self, x: Ratio<i64>) -> Option<GridValue> {
        let q = x / self.0;
        q.is_integer().then(|| GridValue(q.to_integer()))
    }

    pub fn to_f64(self, v: GridValue) -> f64 {
        self.value_of(v).to_f64().unwrap_or(f64::NAN)
    }

    /// The grid refined by an integer factor (δ / factor).
    pub fn refined(self, factor: i64) -> Delta {
        Delta(self.0 / factor)
    }

    /// JSON number for a grid value: an integer when the real value is
    /// integral, a float otherwise.
    pub fn to_json(self, v: GridValue) -> serde_json::Value {
        let r = self.value_of(v);
        if r.is_integer() {
            serde_json::Value::from(r.to_integer())
        } else {
            serde_json::Value::from(r.to_f64().unwrap_or(f64::NAN))
        }
    }

    /// Same rule as [`Delta::to_json`], rendered as text.
    pub fn format(self, v: GridValue) -> String {
        let r = self.value_of(v);
        if r.is_integer() {
            r.to_integer().to_string()
        } else {
            format!("{}", r.to_f64().unwrap_or(f64::NAN))
        }
    }
}

impl Default for Delta {
    fn default() -> Self {
        Delta::ONE
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Delta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Delta> {
        Delta::new(parse_rational(s)?)
    }
}

/// Parses `"3"`, `"-1/4"`, `"0.25"` or `"1e-2"` exactly.
pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let bad = || Error::validation(format!("not a rational number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| bad())?;
        let d: i64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut numer: i64 = if all.is_empty() {
        0
    } else {
        all.parse().map_err(|_| bad())?
    };
    let mut scale = exp - frac_part.len() as i32;
    let mut denom: i64 = 1;
    let pow10 = |k: i32| 10i64.checked_pow(k as u32).ok_or_else(bad);
    if scale > 0 {
        numer = numer.checked_mul(pow10(scale)?).ok_or_else(bad)?;
        scale = 0;
    }
    if scale < 0 {
        denom = pow10(-scale)?;
    }
    if neg {
        numer = -numer;
    }
    Ok(Ratio::new(numer, denom))
}
