//! Closed-form bounds on the pre-drawdown maximum and on the all-time minimum
//! of the walk, plus the Brownian reference formulas they generalise.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::adjustment::adjustment_coefficient;
use crate::distributions::{Distribution, DistributionSpec};
use crate::error::{Error, Result};
use crate::excess::{excess_constants, ExcessConstants};

/// `(exp(a*d) - 1) / a` without cancellation for small `a*d`.
fn growth(alpha: f64, d: f64) -> f64 {
    libm::expm1(alpha * d) / alpha
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MaxBounds {
    pub lower: f64,
    pub upper: f64,
    /// False when `upper` overflowed or `d_zero` is infinite.
    pub upper_finite: bool,
}

/// Lower and upper bounds on `E[M_d]`:
/// `(e^{ad} - 1)/a <= E[M_d] <= (e^{a(d + d0)} - 1)/a`.
pub fn expected_max_bounds(alpha: f64, d: f64, d_zero: f64) -> MaxBounds {
    let lower = growth(alpha, d);
    let upper = growth(alpha, d + d_zero);
    MaxBounds { lower, upper, upper_finite: upper.is_finite() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TailBound {
    pub x: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `e^{-a(x + d-)} <= P(-min S > x) <= e^{-a x}`, clamped to `[0, 1]`.
pub fn min_tail_bounds(alpha: f64, x: f64, d_minus: f64) -> TailBound {
    let upper = libm::exp(-alpha * x).min(1.0);
    let lower = libm::exp(-alpha * (x + d_minus)).min(upper);
    TailBound { x, lower, upper }
}

/// Mean of the (exponential) maximum of BM with drift `mu` and diffusion
/// `sigma` before its first drawdown of size `d`.
pub fn bm_expected_max(mu: f64, sigma: f64, d: f64) -> f64 {
    growth(2.0 * mu / (sigma * sigma), d)
}

/// `P(-min B > x)` for BM with positive drift.
pub fn bm_min_tail(mu: f64, sigma: f64, x: f64) -> f64 {
    libm::exp(-2.0 * mu / (sigma * sigma) * x).min(1.0)
}

/// Exact `E[M_d]` for the +-1 walk with `P(X = 1) = p`, using `ceil(d)`.
pub fn dichotomous_expected_max(p: f64, d: f64) -> Result<f64> {
    if !(p > 0.5 && p < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("p must lie in (1/2, 1), got {p}")));
    }
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("d must be > 0, got {d}")));
    }
    let alpha = libm::log(p / (1.0 - p));
    Ok(p / (2.0 * p - 1.0) * libm::expm1(alpha * libm::ceil(d)))
}

/// Which sup restriction feeds the upper bound on `E[M_d]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum CapPolicy {
    /// Restrict to `|x| < d`.
    #[default]
    DrawdownLevel,
    Unrestricted,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BmReference {
    pub mu: f64,
    pub sigma: f64,
    pub emax: f64,
    pub tail: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BoundsReport {
    pub alpha: f64,
    pub d: f64,
    /// Constants used by the `E[M_d]` upper bound (per the cap policy).
    pub excess: ExcessConstants,
    /// Unrestricted constants; the min-tail bound always uses these.
    pub excess_unrestricted: ExcessConstants,
    pub emax_lower: f64,
    pub emax_upper: f64,
    pub emax_upper_finite: bool,
    /// Exact `E[M_d]` when known (the +-1 walk).
    pub emax_exact: Option<f64>,
    pub min_tail: Vec<TailBound>,
    pub bm_reference: BmReference,
}

/// Assembles alpha, the excess constants and every bound for one law.
///
/// The Brownian reference shares the walk's drift and has
/// `sigma^2 = 2 mu / alpha`, so its adjustment coefficient is alpha and its
/// expected maximum equals `emax_lower`.
pub fn report(dist: &Distribution, d: f64, xs: &[f64], cap_policy: CapPolicy) -> Result<BoundsReport> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("d must be finite and > 0, got {d}")));
    }
    if let Some(&x) = xs.iter().find(|&&x| !(x >= 0.0)) {
        return Err(Error::InvalidParameter(alloc::format!("tail points must be >= 0, got {x}")));
    }
    let alpha = adjustment_coefficient(dist, 1e-12)?.alpha;
    let unrestricted = excess_constants(dist, alpha, None)?;
    let excess = match cap_policy {
        CapPolicy::DrawdownLevel => excess_constants(dist, alpha, Some(d))?,
        CapPolicy::Fixed(c) => excess_constants(dist, alpha, Some(c))?,
        CapPolicy::Unrestricted => unrestricted,
    };
    let emax = expected_max_bounds(alpha, d, excess.d_zero);
    let min_tail = xs.iter().map(|&x| min_tail_bounds(alpha, x, unrestricted.d_minus)).collect();

    let mu = dist.mean();
    let sigma = libm::sqrt(2.0 * mu / alpha);
    let bm_reference = BmReference {
        mu,
        sigma,
        emax: bm_expected_max(mu, sigma, d),
        tail: xs.iter().map(|&x| (x, bm_min_tail(mu, sigma, x))).collect(),
    };
    let emax_exact = match *dist.spec() {
        DistributionSpec::TwoPoint { x_minus, x_plus, p_plus } if x_minus == -1.0 && x_plus == 1.0 => {
            Some(dichotomous_expected_max(p_plus, d)?)
        }
        _ => None,
    };
    Ok(BoundsReport {
        alpha,
        d,
        excess,
        excess_unrestricted: unrestricted,
        emax_lower: emax.lower,
        emax_upper: emax.upper,
        emax_upper_finite: emax.upper_finite && excess.finite_plus && excess.finite_minus,
        emax_exact,
        min_tail,
        bm_reference,
    })
}
