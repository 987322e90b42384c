//! Special functions used by the closed-form functionals.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Upper standard normal tail `P(Z > z)`, accurate far into the tail.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// `P(a < Z < b)` for a standard normal, without cancellation in the tails.
pub fn normal_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a >= 0.0 {
        normal_sf(a) - normal_sf(b)
    } else if b <= 0.0 {
        normal_cdf(b) - normal_cdf(a)
    } else {
        1.0 - normal_cdf(a) - normal_sf(b)
    }
}

/// `π csc(πα/2) / (2Γ(α))`: scale of the stable law whose Lévy spectral
/// function has total tail constant one.
pub fn stable_scale_constant(alpha: f64) -> f64 {
    PI / ((PI * alpha / 2.0).sin() * 2.0 * gamma(alpha))
}
