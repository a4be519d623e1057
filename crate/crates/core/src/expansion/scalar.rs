//! Number types for the series engines.
//!
//! Plain `f64` is used while the energy spread `beta (E_max - E_min)` keeps
//! every entry of a row within the double range. Beyond that, [`Wide`]
//! carries its own binary exponent so entries spanning thousands of orders
//! of magnitude are kept without underflow.

use core::ops::{Add, Mul, Sub};

use crate::math::{exp, floor, ln};
use crate::signed_log::SignedLogValue;

pub(crate) trait DpScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    const ZERO: Self;
    /// Whether the engine must rescale rows to stay in range.
    const RESCALES: bool;
    /// `exp(l)`.
    fn from_ln(l: f64) -> Self;
    fn magnitude(self) -> f64;
    fn to_signed_log(self) -> SignedLogValue;
}

impl DpScalar for f64 {
    const ZERO: Self = 0.0;
    const RESCALES: bool = true;

    fn from_ln(l: f64) -> Self {
        exp(l)
    }

    fn magnitude(self) -> f64 {
        self.abs()
    }

    fn to_signed_log(self) -> SignedLogValue {
        SignedLogValue::from_f64(self)
    }
}

/// `m * 2^e` with `0.5 <= |m| < 1`, or zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Wide {
    m: f64,
    e: i64,
}

/// Operands further apart than this many binary orders do not interact.
const ALIGN_LIMIT: i64 = 1100;

impl Wide {
    fn normalized(m: f64, e: i64) -> Self {
        if m == 0.0 {
            return Self::ZERO;
        }
        let (mm, de) = libm::frexp(m);
        Self { m: mm, e: e + de as i64 }
    }
}

impl Add for Wide {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let d = self.e - o.e;
        if d > ALIGN_LIMIT {
            self
        } else if d < -ALIGN_LIMIT {
            o
        } else if d >= 0 {
            Self::normalized(self.m + libm::scalbn(o.m, -d as i32), self.e)
        } else {
            Self::normalized(libm::scalbn(self.m, d as i32) + o.m, o.e)
        }
    }
}

impl Sub for Wide {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        self + Self { m: -o.m, e: o.e }
    }
}

impl Mul<f64> for Wide {
    type Output = Self;

    fn mul(self, f: f64) -> Self {
        Self::normalized(self.m * f, self.e)
    }
}

impl DpScalar for Wide {
    const ZERO: Self = Self { m: 0.0, e: 0 };
    const RESCALES: bool = false;

    fn from_ln(l: f64) -> Self {
        let e = floor(l / core::f64::consts::LN_2);
        Self::normalized(exp(l - e * core::f64::consts::LN_2), e as i64)
    }

    fn magnitude(self) -> f64 {
        libm::scalbn(self.m.abs(), self.e.clamp(-2000, 2000) as i32)
    }

    fn to_signed_log(self) -> SignedLogValue {
        if self.m == 0.0 {
            return SignedLogValue::ZERO;
        }
        let sign = if self.m > 0.0 { 1 } else { -1 };
        SignedLogValue::new(sign, ln(self.m.abs()) + self.e as f64 * core::f64::consts::LN_2)
    }
}
