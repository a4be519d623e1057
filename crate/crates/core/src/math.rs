//! Floating-point helpers backed by `libm`.

pub use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Reduces an angle into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = x - TAU * floor((x + PI) / TAU);
    if y <= -PI {
        y + TAU
    } else if y > PI {
        y - TAU
    } else {
        y
    }
}

/// `ln(n!)` by direct summation; exact enough for the orders used here.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n > 4096 {
        return libm::lgamma(n as f64 + 1.0);
    }
    (2..=n).map(|k| ln(k as f64)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(0.0), 0.0);
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5 * PI + 4.0 * TAU) + 0.5 * PI).abs() < 1e-12);
        for k in -50..50 {
            let x = 0.37 * k as f64;
            let w = wrap_phase(x);
            assert!(w > -PI && w <= PI);
            let turns = (x - w) / TAU;
            assert!((turns - round(turns)).abs() < 1e-9);
        }
    }

    #[test]
    fn factorials() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(5) - ln(120.0)).abs() < 1e-14);
        assert!((ln_factorial(5000) - libm::lgamma(5001.0)).abs() < 1e-9);
    }
}
