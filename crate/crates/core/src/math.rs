// libm shims; core has no float intrinsics.

pub(crate) use libm::{exp, fabs as abs, lgamma, log, pow, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;

/// `ln(e^a + e^b)` without overflow; either side may be `-inf`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log1p(exp(lo - hi))
}
