// libm shims; the core is no_std so the inherent float methods are unavailable.

#[inline]
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Volume of the unit ball in `R^n`.
pub(crate) fn unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    pow(core::f64::consts::PI, half) / libm::tgamma(half + 1.0)
}
