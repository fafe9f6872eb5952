//! The adjustment coefficient: the positive root of `E[exp(-alpha X)] = 1`.
//!
//! `g(t) = E[exp(-tX)] - 1` is strictly convex with `g(0) = 0` and
//! `g'(0) = -E[X] < 0`, so it is negative on `(0, alpha)` and positive past
//! `alpha`. The solver brackets the root by geometric expansion from twice the
//! Gaussian-matched rate, bisects to a coarse width and polishes with Newton.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::special::lambert_w_m1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum SolverMethod {
    ClosedForm,
    BisectionNewton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SolverDiagnostics {
    pub method: SolverMethod,
    pub iterations: u32,
    /// `E[exp(-alpha X)] - 1` at the returned alpha.
    pub residual: f64,
    /// Set when Newton polishing stopped short of `tol` but the residual is
    /// still below `1e-8`.
    pub tolerance_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AdjustmentResult {
    pub alpha: f64,
    /// `1 / alpha`.
    pub riskiness: f64,
    /// `2 E[X] / Var[X]`.
    pub gaussian_rate: f64,
    pub solver: SolverDiagnostics,
}

const COARSE_WIDTH: f64 = 1e-6;
const MAX_NEWTON: u32 = 100;
const MAX_EXPANSIONS: u32 = 2000;
const WARN_RESIDUAL: f64 = 1e-8;

/// `2 E[X] / Var[X]`; zero when the variance is infinite.
pub fn gaussian_rate(dist: &Distribution) -> f64 {
    2.0 * dist.mean() / dist.variance()
}

/// Closed-form adjustment coefficient, where the family has one.
///
/// Shifted exponential increments satisfy `ln(1 + alpha/theta) = alpha*delta`,
/// whose non-trivial root is `-theta - W_{-1}(-theta*delta*exp(-theta*delta))/delta`.
pub fn closed_form_alpha(dist: &Distribution) -> Option<f64> {
    match *dist.spec() {
        DistributionSpec::Gaussian { mu, sigma } => Some(2.0 * mu / (sigma * sigma)),
        DistributionSpec::DoubleExponential { p, theta, mu } => Some(p * mu - (1.0 - p) * theta),
        DistributionSpec::ShiftedExponential { theta, delta } => {
            let z = -theta * delta * libm::exp(-theta * delta);
            Some(-theta - lambert_w_m1(z) / delta)
        }
        DistributionSpec::TwoPoint { x_minus, x_plus, p_plus } if x_minus == -1.0 && x_plus == 1.0 => {
            Some(libm::log(p_plus / (1.0 - p_plus)))
        }
        _ => None,
    }
}

fn finish(dist: &Distribution, alpha: f64, method: SolverMethod, iterations: u32, warn: bool) -> Result<AdjustmentResult> {
    let residual = dist.neg_exp_moment(alpha)? - 1.0;
    Ok(AdjustmentResult {
        alpha,
        riskiness: 1.0 / alpha,
        gaussian_rate: gaussian_rate(dist),
        solver: SolverDiagnostics { method, iterations, residual, tolerance_warning: warn },
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol >= 1e-14 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("tolerance must be >= 1e-14, got {tol}")))
    }
}

/// Adjustment coefficient, using the closed form when one exists.
pub fn adjustment_coefficient(dist: &Distribution, tol: f64) -> Result<AdjustmentResult> {
    check_tol(tol)?;
    match closed_form_alpha(dist) {
        Some(alpha) if alpha.is_finite() && alpha > 0.0 => {
            finish(dist, alpha, SolverMethod::ClosedForm, 0, false)
        }
        _ => solve_root(dist, tol),
    }
}

/// Adjustment coefficient by bracketed root search, ignoring closed forms.
pub fn solve_root(dist: &Distribution, tol: f64) -> Result<AdjustmentResult> {
    check_tol(tol)?;
    let g = |t: f64| dist.neg_exp_moment(t).map(|v| v - 1.0);
    let cap = dist.divergence_rate();
    let rate = gaussian_rate(dist);
    let start = if rate.is_finite() && rate > 0.0 {
        rate
    } else if cap.is_finite() {
        0.25 * cap
    } else {
        1.0 / dist.mean()
    };

    let mut iterations = 0u32;
    let mut lo = 0.0;
    let mut hi = 2.0 * start;
    if hi >= cap {
        hi = 0.5 * cap;
    }
    loop {
        iterations += 1;
        let v = g(hi)?;
        if v == 0.0 {
            return finish(dist, hi, SolverMethod::BisectionNewton, iterations, false);
        }
        if v > 0.0 {
            break;
        }
        lo = hi;
        hi = if 2.0 * hi < cap { 2.0 * hi } else { 0.5 * (hi + cap) };
        let stuck = cap.is_finite() && (cap - lo) <= 1e-12 * cap;
        if stuck || !hi.is_finite() || iterations > MAX_EXPANSIONS {
            return Err(Error::NoRoot);
        }
    }

    while hi - lo > COARSE_WIDTH * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if g(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        iterations += 1;
        let v = g(t)?;
        if v == 0.0 {
            return finish(dist, t, SolverMethod::BisectionNewton, iterations, false);
        }
        if v < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = dist.neg_exp_moment_derivative(t)?;
        let mut next = t - v / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = libm::fabs(next - t);
        t = next;
        if step <= tol * t || hi - lo <= tol * t {
            return finish(dist, t, SolverMethod::BisectionNewton, iterations, false);
        }
    }
    let residual = g(t)?;
    if libm::fabs(residual) <= WARN_RESIDUAL {
        finish(dist, t, SolverMethod::BisectionNewton, iterations, true)
    } else {
        Err(Error::ToleranceNotMet { residual })
    }
}
