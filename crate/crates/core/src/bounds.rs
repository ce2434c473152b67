//! Exact evaluation of the run-length and truncation bounds.
//!
//! All values are big integers. They grow doubly exponentially, so callers
//! only compare them; the report carries decimal digit counts for display.

use num_bigint::BigInt;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{norm, Vass};

/// Largest result size, in bits, that the calculator agrees to materialise.
pub const MAX_RESULT_BITS: u64 = 1 << 23;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("bounds are undefined for dimension 0")]
    ZeroDimension,
    #[error("the state count must be at least 1")]
    NoStates,
    #[error("value too large to evaluate exactly (about {estimated_bits} bits)")]
    TooLarge { estimated_bits: u128 },
}

/// `(base)^(exponent)` with a size guard.
fn guarded_pow(base: &BigInt, exponent: &BigInt) -> Result<BigInt, BoundsError> {
    if base.is_zero() || base.is_one() {
        return Ok(if exponent.is_zero() { BigInt::one() } else { base.clone() });
    }
    let bits = u128::from(base.bits());
    let exp = exponent.to_u128().unwrap_or(u128::MAX);
    let estimated_bits = bits.saturating_mul(exp);
    if estimated_bits > u128::from(MAX_RESULT_BITS) {
        return Err(BoundsError::TooLarge { estimated_bits });
    }
    let exp = exponent.to_u32().ok_or(BoundsError::TooLarge { estimated_bits })?;
    Ok(Pow::pow(base, exp))
}

/// `A_{M,d,n} = (2n²(M+1)²)^((4d)^(d−1))`, the length bound on a shortest
/// accepting run of a nonempty d-VASS with norm `M` and `n` states.
pub fn rackoff_a(m: &BigInt, d: usize, n: usize) -> Result<BigInt, BoundsError> {
    if d == 0 {
        return Err(BoundsError::ZeroDimension);
    }
    if n == 0 {
        return Err(BoundsError::NoStates);
    }
    let n = BigInt::from(n);
    let m1 = m + 1;
    let base = BigInt::from(2) * &n * &n * &m1 * &m1;
    let exponent: BigInt = Pow::pow(BigInt::from(4 * d), (d - 1) as u32);
    guarded_pow(&base, &exponent)
}

/// `B_{M,d,n} = M · A_{M,2d,2n²}`.
pub fn profile_bound_b(m: &BigInt, d: usize, n: usize) -> Result<BigInt, BoundsError> {
    if m.is_zero() {
        return Ok(BigInt::zero());
    }
    Ok(m * rackoff_a(m, 2 * d, 2 * n * n)?)
}

/// `C_{M,d,n} = M · (B_{M,d,n} + 1)^d`, computed from the definitions of
/// `A` and `B`.
pub fn truncation_bound_c(m: &BigInt, d: usize, n: usize) -> Result<BigInt, BoundsError> {
    if m.is_zero() {
        return Ok(BigInt::zero());
    }
    let b = profile_bound_b(m, d, n)?;
    Ok(m * guarded_pow(&(b + 1), &BigInt::from(d))?)
}

/// The closed-form expansion of the truncation threshold as written out for
/// the complexity analysis:
/// `M · (M · (4n⁴(M+1)²)^((8d)^(2d−1)) + 1)^d`.
///
/// Kept as an independent code path from [`truncation_bound_c`].
pub fn omega_expansion(m: &BigInt, d: usize, n: usize) -> Result<BigInt, BoundsError> {
    if d == 0 {
        return Err(BoundsError::ZeroDimension);
    }
    if n == 0 {
        return Err(BoundsError::NoStates);
    }
    if m.is_zero() {
        return Ok(BigInt::zero());
    }
    let n4 = Pow::pow(BigInt::from(n), 4u32);
    let m1 = m + 1;
    let base = BigInt::from(4) * n4 * &m1 * &m1;
    let exponent: BigInt = Pow::pow(BigInt::from(8 * d), (2 * d - 1) as u32);
    let inner = m * guarded_pow(&base, &exponent)? + 1;
    Ok(m * guarded_pow(&inner, &BigInt::from(d))?)
}

fn digits(x: &BigInt) -> usize {
    x.magnitude().to_str_radix(10).len()
}

/// Bounds for one VASS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub norm: BigInt,
    pub dim: usize,
    pub states: usize,
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub omega: BigInt,
}

#[derive(Debug, Clone, Serialize)]
pub struct DigitCounts {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub omega: usize,
}

impl BoundReport {
    pub fn digit_counts(&self) -> DigitCounts {
        DigitCounts {
            a: digits(&self.a),
            b: digits(&self.b),
            c: digits(&self.c),
            omega: digits(&self.omega),
        }
    }

    /// JSON form; the big values are decimal strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "M": self.norm.to_string(),
            "d": self.dim,
            "n": self.states,
            "A": self.a.to_string(),
            "B": self.b.to_string(),
            "C": self.c.to_string(),
            "omega": self.omega.to_string(),
            "digit_counts": self.digit_counts(),
        })
    }
}

pub fn bounds_report(v: &Vass) -> Result<BoundReport, BoundsError> {
    bounds_for(&norm(v), v.dim(), v.state_count())
}

pub fn bounds_for(m: &BigInt, d: usize, n: usize) -> Result<BoundReport, BoundsError> {
    Ok(BoundReport {
        norm: m.clone(),
        dim: d,
        states: n,
        a: rackoff_a(m, d, n)?,
        b: profile_bound_b(m, d, n)?,
        c: truncation_bound_c(m, d, n)?,
        omega: omega_expansion(m, d, n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn rackoff_examples() {
        assert_eq!(rackoff_a(&big(0), 1, 1).unwrap(), big(2));
        assert_eq!(rackoff_a(&big(1), 1, 2).unwrap(), big(32));
        assert_eq!(rackoff_a(&big(1), 2, 1).unwrap(), big(16_777_216));
        assert_eq!(rackoff_a(&big(1), 0, 1), Err(BoundsError::ZeroDimension));
    }

    #[test]
    fn report_examples() {
        let r = bounds_for(&big(1), 1, 1).unwrap();
        assert_eq!(r.omega, big(4_294_967_297));
        assert_eq!(r.b, Pow::pow(big(32), 8u32));
        assert_eq!(r.c, Pow::pow(big(32), 8u32) + 1);
        assert_eq!(r.a, big(8));
        let zero = bounds_for(&big(0), 1, 1).unwrap();
        assert!(zero.b.is_zero() && zero.c.is_zero() && zero.omega.is_zero());
        assert_eq!(zero.a, big(2));
        assert_eq!(r.digit_counts().omega, 10);
    }

    #[test]
    fn oversized_values_are_refused() {
        assert!(matches!(
            truncation_bound_c(&big(1), 3, 1),
            Err(BoundsError::TooLarge { .. })
        ));
    }

    #[test]
    fn monotone_on_small_grid() {
        for d in 1..=2usize {
            for n in 1..=3usize {
                for m in 0..=3u64 {
                    let here = bounds_for(&big(m), d, n).unwrap();
                    let more_m = bounds_for(&big(m + 1), d, n).unwrap();
                    let more_n = bounds_for(&big(m), d, n + 1).unwrap();
                    for (x, y) in [
                        (&here.a, &more_m.a),
                        (&here.b, &more_m.b),
                        (&here.c, &more_m.c),
                        (&here.omega, &more_m.omega),
                        (&here.a, &more_n.a),
                        (&here.b, &more_n.b),
                        (&here.c, &more_n.c),
                        (&here.omega, &more_n.omega),
                    ] {
                        assert!(x <= y, "not monotone at M={m} d={d} n={n}");
                    }
                    if d == 1 {
                        let more_d = bounds_for(&big(m), 2, n).unwrap();
                        assert!(here.a <= more_d.a);
                        assert!(here.c <= more_d.c);
                        assert!(here.omega <= more_d.omega);
                    }
                }
            }
        }
    }
}
