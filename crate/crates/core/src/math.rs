//! Float intrinsics routed through `libm` so results do not depend on `std`.

pub(crate) use core::f64::consts::{PI, TAU};

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `x mod period` in `[0, period)`.
#[inline]
pub(crate) fn rem_period(x: f64, period: f64) -> f64 {
    let r = libm::fmod(x, period);
    let r = if r < 0.0 { r + period } else { r };
    // fmod(-tiny) + period can round up to period itself
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Angle difference wrapped to `(-π, π]`.
#[inline]
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let r = rem_period(a + PI, TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}
