//! Divided differences of `f(x) = exp(-beta x)`.
//!
//! With `E_max = max E_i` and `w_i = beta (E_max - E_i) >= 0`,
//!
//! ```text
//! f[E_0, ..., E_q] = (-beta)^q exp(-beta E_max) e[w_0, ..., w_q]
//! e[w_0, ..., w_q] = sum_{m >= 0} h_m(w) / (q + m)!
//! ```
//!
//! where `e[..]` is the divided difference of `exp` and `h_m` the complete
//! homogeneous symmetric polynomial. Every term of the series is
//! nonnegative, so the sum loses no precision to cancellation. For wide
//! spreads the same quantity is read off the corner of `exp(B)` with `B`
//! the bidiagonal matrix `diag(w) + superdiag(1)`, computed by scaling and
//! squaring.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ceil, exp, ln, ln_factorial};
use crate::signed_log::SignedLogValue;

/// Minimum pairwise separation accepted by [`divdiff_naive`].
pub const SEP_MIN: f64 = 1e-6;

/// Relative threshold below which inputs are treated as coincident.
pub const MERGE_TOL: f64 = 1e-12;

const SQUARING_SPREAD: f64 = 30.0;
const SQUARING_MAX_Q: usize = 40;

/// Inverse temperature together with the node list `[E_0, ..., E_q]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyList {
    pub beta: f64,
    pub energies: Vec<f64>,
}

impl EnergyList {
    pub fn new(beta: f64, energies: Vec<f64>) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!("beta must be positive and finite, got {beta}")));
        }
        if energies.is_empty() {
            return Err(Error::InvalidInput("energy list is empty".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("energies must be finite".into()));
        }
        Ok(Self { beta, energies })
    }

    /// Order `q` of the divided difference.
    pub fn q(&self) -> usize {
        self.energies.len() - 1
    }
}

/// `(-1)^q`, the sign every divided difference of `exp(-beta x)` carries.
pub fn divdiff_sign(q: usize) -> i8 {
    if q.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Stable evaluation in signed-log form.
pub fn divdiff_exp(input: &EnergyList) -> SignedLogValue {
    let q = input.q();
    SignedLogValue::new(divdiff_sign(q), ln_abs_divdiff(input.beta, &input.energies))
}

/// `ln |f[E_0..E_q]|` for `f = exp(-beta x)`.
pub(crate) fn ln_abs_divdiff(beta: f64, energies: &[f64]) -> f64 {
    let q = energies.len() - 1;
    let nodes = merged_sorted(energies);
    let e_max = nodes[q];
    let w: Vec<f64> = nodes.iter().map(|&e| beta * (e_max - e)).collect();
    q as f64 * ln(beta) - beta * e_max + ln_exp_divdiff(&w)
}

/// Sorted copy with near-coincident nodes snapped onto a shared value.
fn merged_sorted(energies: &[f64]) -> Vec<f64> {
    let mut v = energies.to_vec();
    v.sort_by(f64::total_cmp);
    let mut rep = v[0];
    for x in v.iter_mut().skip(1) {
        if (*x - rep).abs() <= MERGE_TOL * rep.abs().max(1.0) {
            *x = rep;
        } else {
            rep = *x;
        }
    }
    v
}

/// `ln e[w_0..w_q]` for nonnegative nodes.
fn ln_exp_divdiff(w: &[f64]) -> f64 {
    let q = w.len() - 1;
    let spread = w.iter().copied().fold(0.0, f64::max);
    if spread == 0.0 {
        return -ln_factorial(q);
    }
    if spread > SQUARING_SPREAD && q <= SQUARING_MAX_Q {
        ln_exp_divdiff_squaring(w)
    } else {
        ln_exp_divdiff_series(w)
    }
}

/// Series `sum_m h_m(w) / (q+m)!` with running rescaling.
pub(crate) fn ln_exp_divdiff_series(w: &[f64]) -> f64 {
    let q = w.len() - 1;
    let s = w.iter().copied().fold(0.0, f64::max);
    if s == 0.0 {
        return -ln_factorial(q);
    }
    let wh: Vec<f64> = w.iter().map(|&x| x / s).collect();
    // g[j] = b_m h_m(wh_0..wh_j), b_m = s^m q! / (q+m)!
    let mut g = vec![1.0f64; q + 1];
    let mut sum = 1.0f64;
    let mut log_scale = 0.0f64;
    let mut m = 0usize;
    loop {
        m += 1;
        let ratio = s / (q + m) as f64;
        let mut acc = 0.0;
        for (gj, &x) in g.iter_mut().zip(&wh) {
            acc += x * ratio * *gj;
            *gj = acc;
        }
        let term = g[q];
        sum += term;
        if sum > 1e250 {
            for gj in g.iter_mut() {
                *gj *= 1e-250;
            }
            sum *= 1e-250;
            log_scale += 250.0 * core::f64::consts::LN_10;
        }
        // later terms shrink at least by s / (m + 1) per step
        let r = s / (m + 1) as f64;
        if r < 1.0 {
            let rest = g[q] * r / (1.0 - r);
            if rest <= 1e-17 * sum || g[q] == 0.0 {
                break;
            }
        }
    }
    ln(sum) + log_scale - ln_factorial(q)
}

/// Corner entry of `exp(diag(w) + tau superdiag(1))`, divided by `tau^q`.
pub(crate) fn ln_exp_divdiff_squaring(w: &[f64]) -> f64 {
    let n = w.len();
    let q = n - 1;
    if q == 0 {
        return w[0];
    }
    let s_max = w.iter().copied().fold(0.0, f64::max);
    // keeps entries at distance d near tau^d / d!, of order one for d = q
    let tau = (q as f64 / core::f64::consts::E).max(1.0);
    let squarings = ceil(ln(s_max.max(1.0)) / core::f64::consts::LN_2) as u32 + 1;
    let scale = 1.0 / (1u64 << squarings) as f64;

    let idx = |i: usize, j: usize| i * n + j;
    let mut c = vec![0.0f64; n * n];
    for i in 0..n {
        c[idx(i, i)] = w[i] * scale;
        if i + 1 < n {
            c[idx(i, i + 1)] = tau;
        }
    }
    // diagonal part has norm at most 1/2; q + 18 terms leave a relative
    // error below 1e-20 in every entry
    let mut result = vec![0.0f64; n * n];
    let mut power = vec![0.0f64; n * n];
    for i in 0..n {
        result[idx(i, i)] = 1.0;
        power[idx(i, i)] = 1.0;
    }
    for k in 1..=(q + 18) {
        power = upper_mul(&power, &c, n);
        let inv = 1.0 / k as f64;
        for (p, r) in power.iter_mut().zip(result.iter_mut()) {
            *p *= inv;
            *r += *p;
        }
    }
    let mut log_scale = 0.0;
    for _ in 0..squarings {
        result = upper_mul(&result, &result, n);
        log_scale *= 2.0;
        // conjugate by diag(2^i) so the superdiagonal weight stays tau
        for i in 0..n {
            let mut f = 1.0;
            for j in i..n {
                result[idx(i, j)] *= f;
                f *= 0.5;
            }
        }
        let biggest = result.iter().copied().fold(0.0, f64::max);
        if biggest > 1e100 {
            let inv = 1.0 / biggest;
            for r in result.iter_mut() {
                *r *= inv;
            }
            log_scale += ln(biggest);
        }
    }
    ln(result[idx(0, q)]) + log_scale - q as f64 * ln(tau)
}

fn upper_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        for k in i..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in k..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Direct formula `sum_j exp(-beta E_j) / prod_{k != j} (E_j - E_k)`.
/// Intended as a reference on well-separated nodes only.
pub fn divdiff_naive(input: &EnergyList) -> Result<f64> {
    let e = &input.energies;
    for a in 0..e.len() {
        for b in (a + 1)..e.len() {
            if (e[a] - e[b]).abs() <= SEP_MIN {
                return Err(Error::NearDegenerate { a: e[a], b: e[b], sep: SEP_MIN });
            }
        }
    }
    let mut total = 0.0;
    for (j, &ej) in e.iter().enumerate() {
        let mut denom = 1.0;
        for (k, &ek) in e.iter().enumerate() {
            if k != j {
                denom *= ej - ek;
            }
        }
        total += exp(-input.beta * ej) / denom;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec::Vec;

    fn list(beta: f64, e: &[f64]) -> EnergyList {
        EnergyList::new(beta, e.to_vec()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs())
    }

    #[test]
    fn examples() {
        let v = divdiff_exp(&list(1.0, &[0.0]));
        assert_eq!(v.sign, 1);
        assert!(v.log_mag.abs() < 1e-15);
        assert!(rel(divdiff_exp(&list(1.0, &[0.0, 0.0])).to_f64(), -1.0) < 1e-15);
        let expect = -0.632_120_558_828_557_7;
        assert!(rel(divdiff_exp(&list(1.0, &[0.0, 1.0])).to_f64(), expect) < 1e-12);
        assert!(rel(divdiff_naive(&list(1.0, &[0.0, 1.0])).unwrap(), expect) < 1e-12);
        let l = list(2.0, &[0.0, 1.0, 3.0]);
        assert!(rel(divdiff_exp(&l).to_f64(), divdiff_naive(&l).unwrap()) < 1e-10);
        assert!(matches!(divdiff_naive(&list(1.0, &[0.0, 1e-14])), Err(Error::NearDegenerate { .. })));
        assert_eq!(divdiff_sign(0), 1);
        assert_eq!(divdiff_sign(1), -1);
        assert_eq!(divdiff_sign(4), 1);
    }

    #[test]
    fn rejects_bad_lists() {
        assert!(EnergyList::new(0.0, vec![1.0]).is_err());
        assert!(EnergyList::new(1.0, vec![]).is_err());
        assert!(EnergyList::new(1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn two_routes_agree() {
        let cases: [&[f64]; 4] = [
            &[0.0, 35.0],
            &[0.0, 3.0, 40.0, 40.0, 12.0],
            &[100.0, 0.0, 50.0, 50.0, 50.0, 1.0, 99.0, 7.0],
            &[0.0, 700.0, 1400.0, 3.0, 5.0],
        ];
        for w in cases {
            let a = ln_exp_divdiff_series(w);
            let b = ln_exp_divdiff_squaring(w);
            assert!((a - b).abs() < 1e-11 * a.abs().max(1.0), "{w:?}: {a} vs {b}");
        }
        let long: Vec<f64> = (0..40).map(|k| (k as f64 * 0.37) % 45.0).collect();
        let a = ln_exp_divdiff_series(&long);
        let b = ln_exp_divdiff_squaring(&long);
        assert!((a - b).abs() < 1e-10 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn extreme_ranges_stay_finite() {
        let v = divdiff_exp(&list(50.0, &[-10.0, 10.0, 3.0, -10.0]));
        assert_eq!(v.sign, -1);
        assert!(v.log_mag.is_finite());
        let big = divdiff_exp(&list(1000.0, &[-10.0, 10.0]));
        // exact: (e^{10000} - e^{-10000}) / 20 up to sign
        assert!((big.log_mag - (10000.0 - ln(20.0))).abs() < 1e-9);
    }

    fn sorted_distinct(v: &mut [f64]) -> bool {
        v.sort_by(f64::total_cmp);
        v.windows(2).all(|p| p[1] - p[0] > 0.05)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]
        #[test]
        fn sign_theorem(
            beta in 0.01f64..=5.0,
            base in proptest::collection::vec(-10.0f64..10.0, 1..=31),
            dup in proptest::collection::vec(0usize..31, 0..10)
        ) {
            let mut e = base.clone();
            for d in dup {
                if e.len() < 31 {
                    e.push(base[d % base.len()]);
                }
            }
            let v = divdiff_exp(&list(beta, &e));
            prop_assert_eq!(v.sign, divdiff_sign(e.len() - 1));
            prop_assert!(v.log_mag.is_finite());
        }

        #[test]
        fn permutation_symmetry(beta in 0.1f64..5.0, e in proptest::collection::vec(-10.0f64..10.0, 1..20), rot in 0usize..20) {
            let mut shuffled = e.clone();
            shuffled.reverse();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            let a = divdiff_exp(&list(beta, &e));
            let b = divdiff_exp(&list(beta, &shuffled));
            prop_assert!((a.log_mag - b.log_mag).abs() <= 1e-12 * a.log_mag.abs().max(1.0));
        }

        #[test]
        fn naive_agreement(beta in 0.1f64..3.0, mut e in proptest::collection::vec(-3.0f64..3.0, 1..=8)) {
            prop_assume!(sorted_distinct(&mut e));
            let a = divdiff_exp(&list(beta, &e)).to_f64();
            let b = divdiff_naive(&list(beta, &e)).unwrap();
            // the alternating sum loses digits in proportion to its terms
            let terms: f64 = e
                .iter()
                .map(|&ej| exp(-beta * ej) / e.iter().filter(|&&ek| ek != ej).map(|&ek| (ej - ek).abs()).product::<f64>())
                .sum();
            prop_assert!((a - b).abs() < 1e-10 * a.abs() + 1e-14 * terms, "{} vs {}", a, b);
        }

        #[test]
        fn recursion_residual(
            beta in 0.1f64..5.0,
            e in proptest::collection::vec(-5.0f64..5.0, 2..=16),
            dup in 0usize..16
        ) {
            let mut e = e;
            let q = e.len() - 1;
            if q >= 2 {
                e[1 + dup % (q - 1)] = e[0];
            }
            prop_assume!((e[q] - e[0]).abs() > 0.5);
            let whole = divdiff_exp(&list(beta, &e)).to_f64();
            let right = divdiff_exp(&list(beta, &e[1..])).to_f64();
            let left = divdiff_exp(&list(beta, &e[..q])).to_f64();
            let rhs = (right - left) / (e[q] - e[0]);
            prop_assert!(rel(whole, rhs) < 1e-10, "{} vs {}", whole, rhs);
        }

        #[test]
        fn scaling_identity(beta in 0.1f64..4.0, mut e in proptest::collection::vec(-2.0f64..2.0, 1..=7)) {
            prop_assume!(sorted_distinct(&mut e));
            let y: Vec<f64> = e.iter().map(|&x| -beta * x).collect();
            prop_assume!(y.iter().zip(&y[1..]).all(|(a, b)| (a - b).abs() > 0.25));
            // divided difference of exp(x) over y, summed directly
            let direct: f64 = y
                .iter()
                .map(|&yj| exp(yj) / y.iter().filter(|&&yk| yk != yj).map(|&yk| yj - yk).product::<f64>())
                .sum();
            let q = e.len() - 1;
            let v = divdiff_exp(&list(beta, &e));
            let scaled = v.to_f64() * beta.powi(-(q as i32)) * f64::from(divdiff_sign(q));
            prop_assert!(rel(scaled, direct) < 1e-10, "{} vs {}", scaled, direct);
        }

        #[test]
        fn coincident_closed_form(beta in 0.1f64..5.0, en in -10.0f64..10.0, q in 0usize..40) {
            let v = divdiff_exp(&list(beta, &vec![en; q + 1]));
            let expect = q as f64 * ln(beta) - beta * en - ln_factorial(q);
            prop_assert!((v.log_mag - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            prop_assert_eq!(v.sign, divdiff_sign(q));
        }
    }
}
