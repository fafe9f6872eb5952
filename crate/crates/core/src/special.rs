//! Normal distribution helpers and the lower real branch of Lambert W.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal survival function `1 - Phi(z)`.
pub fn norm_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// `ln(1 - Phi(z))`, accurate far into the upper tail.
pub fn log_norm_sf(z: f64) -> f64 {
    if z < 30.0 {
        return libm::log(norm_sf(z));
    }
    // Mills ratio asymptotic series; four terms give full precision past 30.
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - libm::log(z) - 0.5 * libm::log(2.0 * PI) + libm::log(series)
}

/// `ln Phi(z)`.
pub fn log_norm_cdf(z: f64) -> f64 {
    log_norm_sf(-z)
}

/// Lower branch `W_{-1}(z)` for `z` in `[-1/e, 0)`.
///
/// Returns NaN outside that interval.
pub fn lambert_w_m1(z: f64) -> f64 {
    let branch_point = -libm::exp(-1.0);
    if !(z >= branch_point && z < 0.0) {
        return f64::NAN;
    }
    if z == branch_point {
        return -1.0;
    }
    let mut w = if z < -0.25 {
        let p = -libm::sqrt(2.0 * (1.0 + core::f64::consts::E * z));
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = libm::log(-z);
        let l2 = libm::log(-l1);
        l1 - l2 + l2 / l1
    };
    // Halley iteration.
    for _ in 0..64 {
        let ew = libm::exp(w);
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if libm::fabs(step) <= 4.0 * f64::EPSILON * libm::fabs(w) {
            break;
        }
    }
    w
}
