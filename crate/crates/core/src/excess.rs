//! Excess constants `d+`, `d-` and `d0 = d+ + d-`.
//!
//! `d+ = (1/alpha) sup_{0 < x < es} -ln E[exp(-alpha (X - x)) | X >= x]` and
//! `d- = (1/alpha) sup_{ei < x < 0} ln E[exp(alpha (x - X)) | X < x]`. An
//! optional cap restricts the sups to `x < cap` and `x > -cap`, which keeps
//! them finite for power-law right tails.
//!
//! Lattice laws are maximised exactly: between consecutive atoms the
//! conditioning set is constant and the maximand is monotone, so only the
//! interval end points need to be examined. IFR families are evaluated at
//! `x -> 0`. Anything else goes through a coarse grid followed by
//! golden-section refinement.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, Family};
use crate::error::{Error, Result, Side};

const GRID_POINTS: usize = 256;
// Log-spaced grids start this many decades below the upper end.
const GRID_DECADES: f64 = 8.0;
const GOLDEN_TOL: f64 = 1e-8;

/// One side's supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SideExcess {
    pub value: f64,
    /// Where the sup is attained or approached; `None` when the maximand is
    /// constant over the whole domain.
    pub argmax: Option<f64>,
    /// The maximiser sits on the edge of the (open) domain.
    pub boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExcessConstants {
    pub d_plus: f64,
    pub d_minus: f64,
    pub d_zero: f64,
    pub argmax_plus: Option<f64>,
    pub argmax_minus: Option<f64>,
    pub boundary_plus: bool,
    pub boundary_minus: bool,
    pub cap: Option<f64>,
    pub finite_plus: bool,
    pub finite_minus: bool,
}

fn check_inputs(alpha: f64, cap: Option<f64>) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("alpha must be > 0, got {alpha}")));
    }
    if let Some(c) = cap {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("cap must be > 0, got {c}")));
        }
    }
    Ok(())
}

/// `-ln( sum_i w_i exp(e_i) / sum_i w_i )`, shifted so that a single term
/// gives exactly `-e`.
fn neg_log_mean_exp(weights: &[f64], exponents: impl Iterator<Item = f64> + Clone) -> f64 {
    let peak = exponents.clone().fold(f64::NEG_INFINITY, f64::max);
    let mass: f64 = weights.iter().sum();
    let sum: f64 = weights.iter().zip(exponents).map(|(w, e)| w * libm::exp(e - peak)).sum();
    -peak - libm::log(sum / mass)
}

fn atoms_upper(xs: &[f64], ps: &[f64], alpha: f64, cap: Option<f64>) -> SideExcess {
    let top = xs[xs.len() - 1];
    let domain_end = cap.map_or(top, |c| c.min(top));
    let mut best = SideExcess { value: f64::NEG_INFINITY, argmax: None, boundary: false };
    for j in 0..xs.len() {
        if xs[j] <= 0.0 {
            continue;
        }
        // On (left, x_j] the conditioning set is {X >= x_j} and the maximand
        // falls with x, so the sup is the limit x -> left+.
        let left = if j > 0 { xs[j - 1].max(0.0) } else { 0.0 };
        if left >= domain_end {
            break;
        }
        let value = neg_log_mean_exp(&ps[j..], xs[j..].iter().map(|&a| -alpha * (a - left))) / alpha;
        if value > best.value {
            best = SideExcess { value, argmax: Some(left), boundary: left == 0.0 };
        }
    }
    best
}

fn atoms_lower(xs: &[f64], ps: &[f64], alpha: f64, cap: Option<f64>) -> SideExcess {
    let domain_start = cap.map_or(xs[0], |c| (-c).max(xs[0]));
    let mut best = SideExcess { value: f64::NEG_INFINITY, argmax: None, boundary: false };
    for j in 0..xs.len() {
        if xs[j] >= 0.0 {
            break;
        }
        // On (x_j, right] the set {X < x} is {X <= x_j} and the maximand
        // grows with x; the sup sits at right = min(x_{j+1}, 0).
        let right = if j + 1 < xs.len() { xs[j + 1].min(0.0) } else { 0.0 };
        if right <= domain_start {
            continue;
        }
        let value = -neg_log_mean_exp(&ps[..=j], xs[..=j].iter().map(|&a| alpha * (right - a))) / alpha;
        if value > best.value {
            best = SideExcess { value, argmax: Some(right), boundary: right == 0.0 };
        }
    }
    best
}

/// Maximises `f` on `[lo, hi]` by a 256-point grid and golden-section
/// refinement around the best grid point.
fn grid_maximise<F: Fn(f64) -> Result<f64>>(f: F, lo: f64, hi: f64, log_spaced: bool) -> Result<(f64, f64)> {
    let mut grid: Vec<f64> = Vec::with_capacity(GRID_POINTS + 1);
    grid.push(lo);
    for i in 0..GRID_POINTS {
        let frac = i as f64 / (GRID_POINTS - 1) as f64;
        let x = if log_spaced {
            hi * libm::pow(10.0, -GRID_DECADES * (1.0 - frac))
        } else {
            lo + (hi - lo) * frac
        };
        if x > lo && x <= hi {
            grid.push(x);
        }
    }
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        values.push(f(x)?);
    }
    let (best, _) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(grid.len() - 1)];
    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    let candidates = [(grid[best], values[best]), (c, fc), (d, fd)];
    let (x, v) = candidates.iter().copied().fold((grid[best], f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok((x, v))
}

fn upper_maximand(dist: &Distribution, alpha: f64, x: f64) -> Result<f64> {
    Ok(-libm::log(dist.cond_upper_exp_moment(alpha, x)?) / alpha)
}

fn lower_maximand(dist: &Distribution, alpha: f64, x: f64) -> Result<f64> {
    Ok(libm::log(dist.cond_lower_exp_moment(alpha, x)?) / alpha)
}

/// `d+` and where it is attained.
pub fn d_plus(dist: &Distribution, alpha: f64, cap: Option<f64>) -> Result<SideExcess> {
    check_inputs(alpha, cap)?;
    if let Some((xs, ps)) = dist.atoms() {
        return Ok(atoms_upper(xs, ps, alpha, cap));
    }
    if dist.is_ifr() {
        let value = upper_maximand(dist, alpha, 0.0)?;
        return Ok(SideExcess { value, argmax: Some(0.0), boundary: true });
    }
    // Only the power-law right tail reaches this point; its maximand grows
    // like ln(x) without bound.
    let end = match cap {
        Some(c) => c.min(dist.ess_sup()),
        None if dist.family() == Family::LomaxMix => {
            let witness = upper_maximand(dist, alpha, 1e6 / alpha)?;
            return Err(Error::DivergentExcess { side: Side::Upper, witness });
        }
        None => dist.ess_sup(),
    };
    let log_spaced = dist.ess_sup().is_infinite();
    let (x, value) = grid_maximise(|x| upper_maximand(dist, alpha, x), 0.0, end, log_spaced)?;
    let boundary = x <= 0.0 || x >= end * (1.0 - 1e-9);
    Ok(SideExcess { value, argmax: Some(x), boundary })
}

/// `d-` and where it is attained.
pub fn d_minus(dist: &Distribution, alpha: f64, cap: Option<f64>) -> Result<SideExcess> {
    check_inputs(alpha, cap)?;
    if let Some((xs, ps)) = dist.atoms() {
        return Ok(atoms_lower(xs, ps, alpha, cap));
    }
    match dist.family() {
        // Exponential left tails are memoryless: the maximand is flat on x < 0.
        Family::LomaxMix => {
            let value = lower_maximand(dist, alpha, 0.0)?;
            Ok(SideExcess { value, argmax: None, boundary: false })
        }
        _ => {
            let value = lower_maximand(dist, alpha, 0.0)?;
            Ok(SideExcess { value, argmax: Some(0.0), boundary: true })
        }
    }
}

/// Both sides together. A divergent side is reported as `+inf` with its
/// `finite_*` flag cleared rather than as an error.
pub fn excess_constants(dist: &Distribution, alpha: f64, cap: Option<f64>) -> Result<ExcessConstants> {
    fn settle(r: Result<SideExcess>) -> Result<(SideExcess, bool)> {
        match r {
            Ok(s) => Ok((s, true)),
            Err(Error::DivergentExcess { .. }) => {
                Ok((SideExcess { value: f64::INFINITY, argmax: None, boundary: false }, false))
            }
            Err(e) => Err(e),
        }
    }
    let (plus, finite_plus) = settle(d_plus(dist, alpha, cap))?;
    let (minus, finite_minus) = settle(d_minus(dist, alpha, cap))?;
    Ok(ExcessConstants {
        d_plus: plus.value,
        d_minus: minus.value,
        d_zero: plus.value + minus.value,
        argmax_plus: plus.argmax,
        argmax_minus: minus.argmax,
        boundary_plus: plus.boundary,
        boundary_minus: minus.boundary,
        cap,
        finite_plus,
        finite_minus,
    })
}
