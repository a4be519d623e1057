//! Real numbers stored as a sign and a natural-log magnitude.

use core::cmp::Ordering;
use core::iter::Sum;
use core::ops::{Add, Mul, Neg, Sub};

use crate::math::{exp, exp_m1, ln, ln_1p};

/// `sign * exp(log_mag)`; `log_mag` is ignored when `sign == 0`.
#[derive(Clone, Copy, Debug)]
pub struct SignedLogValue {
    pub sign: i8,
    pub log_mag: f64,
}

impl SignedLogValue {
    pub const ZERO: Self = Self { sign: 0, log_mag: f64::NEG_INFINITY };
    pub const ONE: Self = Self { sign: 1, log_mag: 0.0 };

    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), log_mag }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, ln(x.abs()))
        }
    }

    /// Positive value with the given log magnitude.
    pub fn from_ln(log_mag: f64) -> Self {
        Self::new(1, log_mag)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Converts back to `f64`; overflows to `±inf` and underflows to zero.
    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * exp(self.log_mag),
        }
    }

    /// Whether `to_f64` is finite and, for nonzero values, not flushed to 0.
    pub fn fits_f64(&self) -> bool {
        self.sign == 0 || (self.log_mag < 709.0 && self.log_mag > -708.0)
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.log_mag)
    }

    /// Ratio `self / other`; `other` must be nonzero.
    pub fn div(&self, other: &Self) -> Self {
        debug_assert!(other.sign != 0);
        if self.sign == 0 {
            return Self::ZERO;
        }
        Self::new(self.sign * other.sign, self.log_mag - other.log_mag)
    }

    /// Relative difference `|a - b| / max(|a|, |b|)` evaluated in log space.
    pub fn rel_diff(&self, other: &Self) -> f64 {
        if self.sign == 0 && other.sign == 0 {
            return 0.0;
        }
        let big = self.log_mag.max(other.log_mag);
        let diff = *self - *other;
        if diff.sign == 0 {
            0.0
        } else {
            exp(diff.log_mag - big)
        }
    }
}

impl PartialEq for SignedLogValue {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.log_mag == other.log_mag)
    }
}

impl PartialOrd for SignedLogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_mag.partial_cmp(&other.log_mag),
                _ => other.log_mag.partial_cmp(&self.log_mag),
            },
            o => Some(o),
        }
    }
}

impl Neg for SignedLogValue {
    type Output = Self;
    fn neg(self) -> Self {
        Self { sign: -self.sign, log_mag: self.log_mag }
    }
}

impl Mul for SignedLogValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            Self::ZERO
        } else {
            Self::new(self.sign * rhs.sign, self.log_mag + rhs.log_mag)
        }
    }
}

impl Add for SignedLogValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_mag >= rhs.log_mag { (self, rhs) } else { (rhs, self) };
        let d = small.log_mag - big.log_mag;
        if big.sign == small.sign {
            Self::new(big.sign, big.log_mag + ln_1p(exp(d)))
        } else if d == 0.0 {
            Self::ZERO
        } else {
            // ln(1 - e^d) for d < 0
            Self::new(big.sign, big.log_mag + ln(-exp_m1(d)))
        }
    }
}

impl Sub for SignedLogValue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sum for SignedLogValue {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}
