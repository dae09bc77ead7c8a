//! Overflow-free hyperbolic helpers.
//!
//! The filter functions divide `cosh` values whose arguments grow like
//! `pi * T * A0`; evaluated naively they overflow past ~710.

use std::f64::consts::LN_2;

/// `sech(x)` without forming `cosh(x)`.
pub(crate) fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// `ln cosh(x)`, accurate for all finite `x`.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `cosh(a) / cosh(b)` evaluated as a single exponent.
pub(crate) fn cosh_ratio(a: f64, b: f64) -> f64 {
    (ln_cosh(a) - ln_cosh(b)).exp()
}

/// `acosh(y)` given `ln y`, for `y >= 1`.
pub(crate) fn acosh_from_ln(ln_y: f64) -> f64 {
    if ln_y > 20.0 {
        ln_y + (1.0 + (1.0 - (-2.0 * ln_y).exp()).sqrt()).ln()
    } else {
        ln_y.exp().acosh()
    }
}

/// Round-trip float formatting (17 significant digits) used in every CSV.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
