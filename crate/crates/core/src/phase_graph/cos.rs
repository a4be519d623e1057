use crate::math::cos;

/// Smallest `m` in `1..=m_max` with `cos(m x) < 0`, or `None` if there is
/// none. Only `x = 0` has no such multiple for any bound.
pub fn first_negative_cos_multiple(x: f64, m_max: u64) -> Option<u64> {
    (1..=m_max).find(|&m| cos(m as f64 * x) < 0.0)
}
