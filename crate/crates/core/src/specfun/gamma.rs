//! Gamma function helpers on top of `libm`.

use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// 1/Γ(x), exactly zero at the poles x = 0, −1, −2, ...
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 0.5 {
        let g = libm::tgamma(x);
        return if g.is_infinite() { 0.0 } else { 1.0 / g };
    }
    // Reflection keeps large negative arguments finite.
    (PI * x).sin() * libm::tgamma(1.0 - x) / PI
}
