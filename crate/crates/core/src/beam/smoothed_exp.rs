//! `C²` replacement for `exp(-x)` that stays bounded for negative arguments.
//!
//! For `x ≥ 0` this is exactly `exp(-x)`. For `x < 0` it is the reciprocal
//! of the second-order Taylor polynomial `1 + x + x²/2`, which has no real
//! roots and matches value, slope and curvature at the origin.

use crate::scalar::Real;

/// `𝓔(x)`.
#[inline]
pub fn smoothed_exp<T: Real>(x: T) -> T {
    if x >= T::zero() {
        (-x).exp()
    } else {
        T::one() / quad(x)
    }
}

/// `𝓔′(x)`.
#[inline]
pub fn smoothed_exp_d1<T: Real>(x: T) -> T {
    if x >= T::zero() {
        -(-x).exp()
    } else {
        let q = quad(x);
        -(T::one() + x) / (q * q)
    }
}

/// `𝓔″(x)`.
#[inline]
pub fn smoothed_exp_d2<T: Real>(x: T) -> T {
    if x >= T::zero() {
        (-x).exp()
    } else {
        let q = quad(x);
        let dq = T::one() + x;
        (dq * dq + dq * dq - q) / (q * q * q)
    }
}

#[inline]
fn quad<T: Real>(x: T) -> T {
    T::one() + x + T::lit(0.5) * x * x
}

/// Suprema of `|𝓔|`, `|𝓔′|`, `|𝓔″|` over the real line.
///
/// `|𝓔|` peaks at `x = -1` with value 2. `|𝓔′|` peaks at
/// `x = -1 + 1/√3` with value `3√3/4`. `|𝓔″|` peaks at `x = -1` with value 4.
pub fn smoothed_exp_bounds() -> (f64, f64, f64) {
    (2.0, 0.75 * 3f64.sqrt(), 4.0)
}
