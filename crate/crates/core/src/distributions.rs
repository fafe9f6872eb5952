//! Increment laws: validation, analytic moments, conditional exponential
//! moments and exact sampling.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution as _, Exp1, StandardNormal};
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breakpoints, DEFAULT_REL_TOL};
use crate::special::{log_norm_cdf, log_norm_sf};

/// Parametric description of an increment law, exactly as read from a spec
/// file: `{"family": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(Serialize, Deserialize),
    serde(tag = "family", content = "params", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum DistributionSpec {
    Gaussian { mu: f64, sigma: f64 },
    /// Density `p*theta*exp(-theta x)` on `x > 0` and `(1-p)*mu*exp(mu x)` on `x < 0`.
    DoubleExponential { p: f64, theta: f64, mu: f64 },
    /// `Exp(theta) - delta`.
    ShiftedExponential { theta: f64, delta: f64 },
    TwoPoint { x_minus: f64, x_plus: f64, p_plus: f64 },
    /// `[[x, p], ...]`
    FiniteSupport { atoms: Vec<(f64, f64)> },
    /// Exponential left tail with rate `lambda` (weight `1-q`) and a Lomax
    /// right tail with scale `s` and shape `gamma` (weight `q`).
    LomaxMix { q: f64, lambda: f64, s: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Family {
    Gaussian,
    DoubleExponential,
    ShiftedExponential,
    TwoPoint,
    FiniteSupport,
    LomaxMix,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::DoubleExponential => "double_exponential",
            Family::ShiftedExponential => "shifted_exponential",
            Family::TwoPoint => "two_point",
            Family::FiniteSupport => "finite_support",
            Family::LomaxMix => "lomax_mix",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Gaussian { mu: f64, sigma: f64 },
    DoubleExponential { p: f64, theta: f64, mu: f64 },
    ShiftedExponential { theta: f64, delta: f64 },
    Atoms { xs: Vec<f64>, ps: Vec<f64> },
    LomaxMix { q: f64, lambda: f64, s: f64, gamma: f64 },
}

/// A validated increment law with cached moments and support bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    spec: DistributionSpec,
    family: Family,
    law: Law,
    mean: f64,
    variance: f64,
    ess_inf: f64,
    ess_sup: f64,
}

fn invalid(msg: alloc::string::String) -> Error {
    Error::InvalidParameter(msg)
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    require_finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be > 0, got {v}")))
    }
}

/// `(1 - exp(k x)) / k`, with the `k -> 0` limit `-x`.
fn one_minus_exp_over(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        -x
    } else {
        -libm::expm1(k * x) / k
    }
}

// Integrand below 1e-16 of its peak past this many e-folds.
const TAIL_EFOLDS: f64 = 36.85;

/// `E[exp(-t Y)]` for `Y ~ Lomax(scale c, shape gamma)`.
fn lomax_laplace(t: f64, c: f64, gamma: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    // Substituting w = t*y leaves exp(-w) times a slowly varying factor.
    let k = t * c;
    let f = |w: f64| (gamma / k) * libm::exp(-w - (gamma + 1.0) * libm::log1p(w / k));
    let breaks = [0.01 * k, 0.1 * k, k, 10.0 * k, 1.0, 4.0, 12.0];
    Ok(integrate_with_breakpoints(f, 0.0, TAIL_EFOLDS, &breaks, DEFAULT_REL_TOL)?.value)
}

/// `E[Y exp(-t Y)]` for `Y ~ Lomax(c, gamma)`, `t > 0`.
fn lomax_laplace_weighted(t: f64, c: f64, gamma: f64) -> Result<f64> {
    let k = t * c;
    let f = |w: f64| (w / t) * (gamma / k) * libm::exp(-w - (gamma + 1.0) * libm::log1p(w / k));
    let breaks = [0.01 * k, 0.1 * k, k, 10.0 * k, 1.0, 4.0, 12.0];
    Ok(integrate_with_breakpoints(f, 0.0, TAIL_EFOLDS + 4.0, &breaks, DEFAULT_REL_TOL)?.value)
}

/// `E[exp(-t Y); Y < x]` for `Y ~ Lomax(s, gamma)`.
fn lomax_partial_laplace(t: f64, s: f64, gamma: f64, x: f64) -> Result<f64> {
    let f = |y: f64| (gamma / s) * libm::exp(-t * y - (gamma + 1.0) * libm::log1p(y / s));
    let breaks = [0.01 * s, 0.1 * s, s, 10.0 * s];
    Ok(integrate_with_breakpoints(f, 0.0, x, &breaks, DEFAULT_REL_TOL)?.value)
}

impl Distribution {
    /// Checks family constraints and the standing assumptions `E[X] > 0`,
    /// `P(X < 0) > 0`.
    pub fn validate(spec: DistributionSpec) -> Result<Self> {
        let (family, law) = match spec {
            DistributionSpec::Gaussian { mu, sigma } => {
                require_finite("mu", mu)?;
                require_positive("sigma", sigma)?;
                (Family::Gaussian, Law::Gaussian { mu, sigma })
            }
            DistributionSpec::DoubleExponential { p, theta, mu } => {
                require_positive("theta", theta)?;
                require_positive("mu", mu)?;
                require_finite("p", p)?;
                let p_min = theta / (mu + theta);
                if !(p > p_min && p < 1.0) {
                    return Err(invalid(format!(
                        "double_exponential needs theta/(mu+theta) = {p_min} < p < 1, got p = {p}"
                    )));
                }
                (Family::DoubleExponential, Law::DoubleExponential { p, theta, mu })
            }
            DistributionSpec::ShiftedExponential { theta, delta } => {
                require_positive("theta", theta)?;
                require_positive("delta", delta)?;
                if delta >= 1.0 / theta {
                    return Err(invalid(format!(
                        "shifted_exponential needs delta < 1/theta = {}, got {delta}",
                        1.0 / theta
                    )));
                }
                (Family::ShiftedExponential, Law::ShiftedExponential { theta, delta })
            }
            DistributionSpec::TwoPoint { x_minus, x_plus, p_plus } => {
                require_finite("x_minus", x_minus)?;
                require_finite("x_plus", x_plus)?;
                require_finite("p_plus", p_plus)?;
                if !(x_minus < 0.0 && x_plus > 0.0) {
                    return Err(invalid(format!(
                        "two_point needs x_minus < 0 < x_plus, got {x_minus}, {x_plus}"
                    )));
                }
                if !(p_plus > 0.0 && p_plus < 1.0) {
                    return Err(invalid(format!("p_plus must lie in (0,1), got {p_plus}")));
                }
                let law = Law::Atoms { xs: alloc::vec![x_minus, x_plus], ps: alloc::vec![1.0 - p_plus, p_plus] };
                (Family::TwoPoint, law)
            }
            DistributionSpec::FiniteSupport { ref atoms } => {
                let mut sorted = atoms.clone();
                if sorted.is_empty() {
                    return Err(invalid("finite_support needs at least one atom".into()));
                }
                for &(x, p) in &sorted {
                    require_finite("atom location", x)?;
                    require_positive("atom probability", p)?;
                }
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(invalid("finite_support atoms must be distinct".into()));
                }
                let total: f64 = sorted.iter().map(|a| a.1).sum();
                if libm::fabs(total - 1.0) > 1e-12 {
                    return Err(invalid(format!("atom probabilities sum to {total}, not 1")));
                }
                let (xs, ps) = sorted.into_iter().unzip();
                (Family::FiniteSupport, Law::Atoms { xs, ps })
            }
            DistributionSpec::LomaxMix { q, lambda, s, gamma } => {
                require_positive("lambda", lambda)?;
                require_positive("s", s)?;
                require_finite("gamma", gamma)?;
                require_finite("q", q)?;
                if gamma <= 1.0 {
                    return Err(invalid(format!("lomax_mix needs gamma > 1, got {gamma}")));
                }
                if !(q > 0.0 && q < 1.0) {
                    return Err(invalid(format!("lomax_mix needs q in (0,1), got {q}")));
                }
                (Family::LomaxMix, Law::LomaxMix { q, lambda, s, gamma })
            }
        };

        let (mean, second, ess_inf, ess_sup) = match &law {
            Law::Gaussian { mu, sigma } => (*mu, mu * mu + sigma * sigma, f64::NEG_INFINITY, f64::INFINITY),
            Law::DoubleExponential { p, theta, mu } => (
                p / theta - (1.0 - p) / mu,
                2.0 * p / (theta * theta) + 2.0 * (1.0 - p) / (mu * mu),
                f64::NEG_INFINITY,
                f64::INFINITY,
            ),
            Law::ShiftedExponential { theta, delta } => {
                let m = 1.0 / theta - delta;
                (m, 1.0 / (theta * theta) + m * m, -delta, f64::INFINITY)
            }
            Law::Atoms { xs, ps } => {
                let m: f64 = xs.iter().zip(ps).map(|(x, p)| x * p).sum();
                let m2: f64 = xs.iter().zip(ps).map(|(x, p)| x * x * p).sum();
                (m, m2, xs[0], xs[xs.len() - 1])
            }
            Law::LomaxMix { q, lambda, s, gamma } => {
                let m = -(1.0 - q) / lambda + q * s / (gamma - 1.0);
                let right = if *gamma > 2.0 {
                    2.0 * s * s / ((gamma - 1.0) * (gamma - 2.0))
                } else {
                    f64::INFINITY
                };
                (m, 2.0 * (1.0 - q) / (lambda * lambda) + q * right, f64::NEG_INFINITY, f64::INFINITY)
            }
        };
        if !(mean > 0.0) {
            return Err(Error::NonPositiveMean { mean });
        }
        if !(ess_inf < 0.0) {
            return Err(Error::NoNegativeMass);
        }
        let variance = match &law {
            Law::Gaussian { sigma, .. } => sigma * sigma,
            Law::ShiftedExponential { theta, .. } => 1.0 / (theta * theta),
            _ if second.is_infinite() => f64::INFINITY,
            _ => second - mean * mean,
        };
        Ok(Distribution { spec, family, law, mean, variance, ess_inf, ess_sup })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// May be `+inf` (lomax_mix with `gamma <= 2`).
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn ess_inf(&self) -> f64 {
        self.ess_inf
    }

    /// `+inf` for unbounded right tails.
    pub fn ess_sup(&self) -> f64 {
        self.ess_sup
    }

    /// Atom locations and probabilities, sorted by location, for lattice laws.
    pub fn atoms(&self) -> Option<(&[f64], &[f64])> {
        match &self.law {
            Law::Atoms { xs, ps } => Some((xs, ps)),
            _ => None,
        }
    }

    /// Density for the continuous families.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        let v = match self.law {
            Law::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                libm::exp(-0.5 * z * z) / (sigma * libm::sqrt(2.0 * core::f64::consts::PI))
            }
            Law::DoubleExponential { p, theta, mu } => {
                if x > 0.0 {
                    p * theta * libm::exp(-theta * x)
                } else {
                    (1.0 - p) * mu * libm::exp(mu * x)
                }
            }
            Law::ShiftedExponential { theta, delta } => {
                if x < -delta {
                    0.0
                } else {
                    theta * libm::exp(-theta * (x + delta))
                }
            }
            Law::LomaxMix { q, lambda, s, gamma } => {
                if x < 0.0 {
                    (1.0 - q) * lambda * libm::exp(lambda * x)
                } else {
                    q * (gamma / s) * libm::pow(1.0 + x / s, -(gamma + 1.0))
                }
            }
            Law::Atoms { .. } => return None,
        };
        Some(v)
    }

    /// Families whose excess suprema sit at `x -> 0`.
    pub fn is_ifr(&self) -> bool {
        matches!(
            self.family,
            Family::Gaussian | Family::DoubleExponential | Family::ShiftedExponential | Family::TwoPoint
        )
    }

    /// Smallest `t > 0` at which `E[exp(-tX)]` is infinite.
    pub fn divergence_rate(&self) -> f64 {
        match self.law {
            Law::DoubleExponential { mu, .. } => mu,
            Law::LomaxMix { lambda, .. } => lambda,
            _ => f64::INFINITY,
        }
    }

    fn check_rate(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid(format!("exponent rate must be finite and >= 0, got {t}")));
        }
        let rate = self.divergence_rate();
        if t >= rate {
            return Err(Error::MomentDiverges { t, rate });
        }
        Ok(())
    }

    /// `E[exp(-tX)]`.
    pub fn neg_exp_moment(&self, t: f64) -> Result<f64> {
        self.check_rate(t)?;
        if t == 0.0 {
            return Ok(1.0);
        }
        Ok(match &self.law {
            Law::Gaussian { mu, sigma } => libm::exp(-t * mu + 0.5 * t * t * sigma * sigma),
            Law::DoubleExponential { p, theta, mu } => p * theta / (theta + t) + (1.0 - p) * mu / (mu - t),
            Law::ShiftedExponential { theta, delta } => libm::exp(t * delta) * theta / (theta + t),
            Law::Atoms { xs, ps } => xs.iter().zip(ps).map(|(x, p)| p * libm::exp(-t * x)).sum(),
            Law::LomaxMix { q, lambda, s, gamma } => {
                (1.0 - q) * lambda / (lambda - t) + q * lomax_laplace(t, *s, *gamma)?
            }
        })
    }

    /// `d/dt E[exp(-tX)] = -E[X exp(-tX)]`.
    pub fn neg_exp_moment_derivative(&self, t: f64) -> Result<f64> {
        self.check_rate(t)?;
        Ok(match &self.law {
            Law::Gaussian { mu, sigma } => (t * sigma * sigma - mu) * libm::exp(-t * mu + 0.5 * t * t * sigma * sigma),
            Law::DoubleExponential { p, theta, mu } => {
                -p * theta / ((theta + t) * (theta + t)) + (1.0 - p) * mu / ((mu - t) * (mu - t))
            }
            Law::ShiftedExponential { theta, delta } => {
                libm::exp(t * delta) * theta / (theta + t) * (delta - 1.0 / (theta + t))
            }
            Law::Atoms { xs, ps } => -xs.iter().zip(ps).map(|(x, p)| p * x * libm::exp(-t * x)).sum::<f64>(),
            Law::LomaxMix { q, lambda, s, gamma } => {
                let right = if t == 0.0 { s / (gamma - 1.0) } else { lomax_laplace_weighted(t, *s, *gamma)? };
                (1.0 - q) * lambda / ((lambda - t) * (lambda - t)) - q * right
            }
        })
    }

    fn check_alpha(alpha: f64) -> Result<()> {
        if alpha > 0.0 && alpha.is_finite() {
            Ok(())
        } else {
            Err(invalid(format!("alpha must be finite and > 0, got {alpha}")))
        }
    }

    /// `E[exp(-alpha (X - x)) | X >= x]`, a value in `(0, 1]`.
    pub fn cond_upper_exp_moment(&self, alpha: f64, x: f64) -> Result<f64> {
        Self::check_alpha(alpha)?;
        require_finite("x", x)?;
        let empty = Error::EmptyConditioningSet { x };
        match &self.law {
            Law::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                let log_v = alpha * (x - mu) + 0.5 * alpha * alpha * sigma * sigma
                    + log_norm_sf(z + alpha * sigma)
                    - log_norm_sf(z);
                Ok(libm::exp(log_v))
            }
            &Law::DoubleExponential { p, theta, mu } => {
                if x >= 0.0 {
                    return Ok(theta / (theta + alpha));
                }
                let mass = 1.0 - (1.0 - p) * libm::exp(mu * x);
                let partial = p * theta / (theta + alpha) + (1.0 - p) * mu * one_minus_exp_over(mu - alpha, x);
                Ok(libm::exp(alpha * x) * partial / mass)
            }
            &Law::ShiftedExponential { theta, delta } => {
                if x >= -delta {
                    Ok(theta / (theta + alpha))
                } else {
                    Ok(libm::exp(alpha * x) * self.neg_exp_moment(alpha)?)
                }
            }
            Law::Atoms { xs, ps } => {
                let start = xs.partition_point(|&a| a < x);
                if start == xs.len() {
                    return Err(empty);
                }
                let mass: f64 = ps[start..].iter().sum();
                let num: f64 = xs[start..].iter().zip(&ps[start..]).map(|(a, p)| p * libm::exp(-alpha * (a - x))).sum();
                Ok(num / mass)
            }
            &Law::LomaxMix { q, lambda, s, gamma } => {
                if x >= 0.0 {
                    return lomax_laplace(alpha, s + x, gamma);
                }
                let mass = 1.0 - (1.0 - q) * libm::exp(lambda * x);
                let partial =
                    q * lomax_laplace(alpha, s, gamma)? + (1.0 - q) * lambda * one_minus_exp_over(lambda - alpha, x);
                Ok(libm::exp(alpha * x) * partial / mass)
            }
        }
    }

    /// `E[exp(alpha (x - X)) | X < x]`, a value `>= 1`.
    pub fn cond_lower_exp_moment(&self, alpha: f64, x: f64) -> Result<f64> {
        Self::check_alpha(alpha)?;
        require_finite("x", x)?;
        let empty = Error::EmptyConditioningSet { x };
        match &self.law {
            Law::Gaussian { mu, sigma } => {
                let z = (x - mu) / sigma;
                let log_v = alpha * (x - mu) + 0.5 * alpha * alpha * sigma * sigma
                    + log_norm_cdf(z + alpha * sigma)
                    - log_norm_cdf(z);
                Ok(libm::exp(log_v))
            }
            &Law::DoubleExponential { p, theta, mu } => {
                self.check_rate(alpha)?;
                if x <= 0.0 {
                    return Ok(mu / (mu - alpha));
                }
                let mass = (1.0 - p) + p * (-libm::expm1(-theta * x));
                let partial = (1.0 - p) * mu / (mu - alpha) + p * theta * one_minus_exp_over(-(theta + alpha), x);
                Ok(libm::exp(alpha * x) * partial / mass)
            }
            &Law::ShiftedExponential { theta, delta } => {
                let c = x + delta;
                if c <= 0.0 {
                    return Err(empty);
                }
                Ok(libm::exp(alpha * c) * theta / (theta + alpha) * libm::expm1(-(theta + alpha) * c)
                    / libm::expm1(-theta * c))
            }
            Law::Atoms { xs, ps } => {
                let end = xs.partition_point(|&a| a < x);
                if end == 0 {
                    return Err(empty);
                }
                let mass: f64 = ps[..end].iter().sum();
                let num: f64 = xs[..end].iter().zip(&ps[..end]).map(|(a, p)| p * libm::exp(alpha * (x - a))).sum();
                Ok(num / mass)
            }
            &Law::LomaxMix { q, lambda, s, gamma } => {
                self.check_rate(alpha)?;
                if x <= 0.0 {
                    return Ok(lambda / (lambda - alpha));
                }
                let mass = (1.0 - q) + q * (1.0 - libm::pow(1.0 + x / s, -gamma));
                let partial = (1.0 - q) * lambda / (lambda - alpha) + q * lomax_partial_laplace(alpha, s, gamma, x)?;
                Ok(libm::exp(alpha * x) * partial / mass)
            }
        }
    }

    /// Draws one increment.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.law {
            Law::Gaussian { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                mu + sigma * z
            }
            &Law::DoubleExponential { p, theta, mu } => {
                let u: f64 = rng.random();
                let e: f64 = Exp1.sample(rng);
                if u < p {
                    e / theta
                } else {
                    -e / mu
                }
            }
            &Law::ShiftedExponential { theta, delta } => {
                let e: f64 = Exp1.sample(rng);
                e / theta - delta
            }
            Law::Atoms { xs, ps } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (x, p) in xs.iter().zip(ps) {
                    acc += p;
                    if u < acc {
                        return *x;
                    }
                }
                xs[xs.len() - 1]
            }
            &Law::LomaxMix { q, lambda, s, gamma } => {
                let u: f64 = rng.random();
                if u < q {
                    let v = 1.0 - rng.random::<f64>();
                    s * (libm::pow(v, -1.0 / gamma) - 1.0)
                } else {
                    let e: f64 = Exp1.sample(rng);
                    -e / lambda
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{norm_cdf, norm_sf};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian(mu: f64, sigma: f64) -> Distribution {
        Distribution::validate(DistributionSpec::Gaussian { mu, sigma }).unwrap()
    }

    fn two_point(x_minus: f64, x_plus: f64, p_plus: f64) -> Distribution {
        Distribution::validate(DistributionSpec::TwoPoint { x_minus, x_plus, p_plus }).unwrap()
    }

    #[test]
    fn gaussian_moments_are_its_parameters() {
        let g = gaussian(1.0, 1.0);
        assert_eq!(g.mean(), 1.0);
        assert_eq!(g.variance(), 1.0);
        assert!(g.ess_inf() < 0.0 && g.ess_sup() > 0.0);
    }

    #[test]
    fn zero_mean_two_point_is_rejected() {
        let err = Distribution::validate(DistributionSpec::TwoPoint { x_minus: -1.0, x_plus: 1.0, p_plus: 0.5 });
        assert!(matches!(err, Err(Error::NonPositiveMean { .. })));
    }

    #[test]
    fn double_exponential_weight_precondition() {
        let err = Distribution::validate(DistributionSpec::DoubleExponential { p: 0.4, theta: 1.0, mu: 1.0 });
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn other_constraint_failures() {
        let cases = [
            DistributionSpec::Gaussian { mu: 1.0, sigma: 0.0 },
            DistributionSpec::ShiftedExponential { theta: 1.0, delta: 1.0 },
            DistributionSpec::ShiftedExponential { theta: 1.0, delta: -0.1 },
            DistributionSpec::TwoPoint { x_minus: 1.0, x_plus: 2.0, p_plus: 0.5 },
            DistributionSpec::FiniteSupport { atoms: alloc::vec![(-1.0, 0.5), (1.0, 0.6)] },
            DistributionSpec::FiniteSupport { atoms: alloc::vec![(-1.0, 0.5), (-1.0, 0.5)] },
            DistributionSpec::LomaxMix { q: 0.5, lambda: 1.0, s: 1.0, gamma: 1.0 },
            DistributionSpec::LomaxMix { q: 1.0, lambda: 1.0, s: 1.0, gamma: 3.0 },
        ];
        for spec in cases {
            let r = Distribution::validate(spec.clone());
            assert!(matches!(r, Err(Error::InvalidParameter(_))), "{spec:?} -> {r:?}");
        }
        let r = Distribution::validate(DistributionSpec::FiniteSupport { atoms: alloc::vec![(0.5, 0.5), (1.0, 0.5)] });
        assert_eq!(r, Err(Error::NoNegativeMass));
        let r = Distribution::validate(DistributionSpec::Gaussian { mu: -1.0, sigma: 1.0 });
        assert!(matches!(r, Err(Error::NonPositiveMean { .. })));
        let r = Distribution::validate(DistributionSpec::LomaxMix { q: 0.1, lambda: 1.0, s: 1.0, gamma: 3.0 });
        assert!(matches!(r, Err(Error::NonPositiveMean { .. })));
    }

    #[test]
    fn neg_exp_moment_examples() {
        let g = gaussian(1.0, 1.0);
        assert_eq!(g.neg_exp_moment(0.0).unwrap(), 1.0);
        assert!((g.neg_exp_moment(2.0).unwrap() - 1.0).abs() < 1e-15);
        let se = Distribution::validate(DistributionSpec::ShiftedExponential { theta: 1.0, delta: 0.5 }).unwrap();
        let expected = libm::exp(0.5) * 0.5;
        assert!((se.neg_exp_moment(1.0).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.82436).abs() < 1e-5);
    }

    #[test]
    fn moment_divergence_is_reported() {
        let de = Distribution::validate(DistributionSpec::DoubleExponential { p: 0.75, theta: 1.0, mu: 1.0 }).unwrap();
        assert!(matches!(de.neg_exp_moment(1.0), Err(Error::MomentDiverges { .. })));
        let lm = Distribution::validate(DistributionSpec::LomaxMix { q: 0.5, lambda: 4.0, s: 1.0, gamma: 3.0 }).unwrap();
        assert!(matches!(lm.neg_exp_moment(4.5), Err(Error::MomentDiverges { .. })));
        assert!(lm.neg_exp_moment(1.0).unwrap().is_finite());
    }

    #[test]
    fn gaussian_conditional_moments_match_normal_cdf_ratios() {
        let g = gaussian(1.0, 1.0);
        let up = g.cond_upper_exp_moment(2.0, 0.0).unwrap();
        assert!((up - norm_sf(1.0) / norm_sf(-1.0)).abs() < 1e-14);
        assert!((up - 0.188_573_417).abs() < 1e-8);
        let low = g.cond_lower_exp_moment(2.0, 0.0).unwrap();
        assert!((low - norm_cdf(1.0) / norm_cdf(-1.0)).abs() < 1e-12);
        assert!((low - 5.302_974_375).abs() < 1e-8);
    }

    #[test]
    fn atom_conditional_moments() {
        let tp = two_point(-1.0, 1.0, 0.7);
        let alpha = libm::log(7.0 / 3.0);
        let up = tp.cond_upper_exp_moment(alpha, 0.5).unwrap();
        assert!((up - libm::sqrt(3.0 / 7.0)).abs() < 1e-15);
        assert!((up - 0.654_654).abs() < 1e-6);
        let low = tp.cond_lower_exp_moment(alpha, -0.5).unwrap();
        assert!((low - libm::exp(0.5 * alpha)).abs() < 1e-15);
        // Conditioning on the top atom alone.
        assert_eq!(tp.cond_upper_exp_moment(alpha, 1.0).unwrap(), 1.0);
        assert!((tp.cond_lower_exp_moment(alpha, -1.0 + 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(matches!(tp.cond_upper_exp_moment(alpha, 1.5), Err(Error::EmptyConditioningSet { .. })));
        assert!(matches!(tp.cond_lower_exp_moment(alpha, -1.0), Err(Error::EmptyConditioningSet { .. })));
    }

    #[test]
    fn two_point_samples_stay_on_atoms() {
        let tp = two_point(-1.0, 1.0, 1.0 - 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x = tp.sample(&mut rng);
            assert!(x == -1.0 || x == 1.0);
        }
    }
}
