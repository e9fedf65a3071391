//! Float helpers that behave identically with and without `std`.

use crate::TAU;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

/// Reduces an angle into `[0, 2π)`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let r = x - TAU * floor(x / TAU);
    // floor() can leave r == 2π (or a hair negative) when x is a tiny
    // negative number or sits one ulp off a multiple of 2π.
    if !(0.0..TAU).contains(&r) {
        0.0
    } else {
        r
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1); zero for fewer than two values.
pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    sqrt(ss / (xs.len() - 1) as f64)
}

/// Median of a scratch buffer; reorders the buffer.
pub(crate) fn median_in_place(buf: &mut [f64]) -> f64 {
    debug_assert!(!buf.is_empty());
    buf.sort_unstable_by(f64::total_cmp);
    let n = buf.len();
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}
