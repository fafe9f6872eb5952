//! Skorokhod embeddings of finite-support laws as chains of first exits.
//!
//! A chain sits at the barycenter of a contiguous block of atoms, splits the
//! block in two and moves to the barycenter of whichever half the Brownian
//! path exits into. Exit probabilities are exact, so no path is discretised.
//! The schemes differ only in where they split a block:
//!
//! * Dubins: at the current position.
//! * Azéma–Yor: off the lowest atom, so the chain climbs through the upper
//!   barycenters `E[Y | Y >= x_j]`.
//! * Azéma–Yor minus: off the highest atom (the mirror image).
//! * DAY: one Dubins split, then Azéma–Yor above and Azéma–Yor minus below.
//!
//! Barycenters are taken in a martingale scale `S`. With the linear scale the
//! chain embeds in standard Brownian motion; with `S(x) = exp(-alpha x)` it
//! embeds in Brownian motion with drift, whose scale function that is.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::adjustment::adjustment_coefficient;
use crate::bounds::bm_expected_max;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::excess::excess_constants;
use crate::montecarlo::{chunk_layout, chunk_rng, ChunkRunner, Moments, MonteCarloEstimate, STEP_LIMIT};

const PROB_TOL: f64 = 1e-12;

/// A law on finitely many points, atoms strictly increasing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AtomicDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl AtomicDistribution {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("at least one atom is required".into()));
        }
        let mut total = 0.0;
        for (i, &(x, p)) in points.iter().enumerate() {
            if !x.is_finite() || !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidParameter(alloc::format!("bad atom ({x}, {p})")));
            }
            if i > 0 && x <= points[i - 1].0 {
                return Err(Error::InvalidParameter("atoms must be strictly increasing".into()));
            }
            total += p;
        }
        if libm::fabs(total - 1.0) > PROB_TOL {
            return Err(Error::InvalidParameter(alloc::format!("probabilities sum to {total}")));
        }
        let atoms: Vec<f64> = points.iter().map(|a| a.0).collect();
        let probs: Vec<f64> = points.iter().map(|a| a.1).collect();
        let mean = atoms.iter().zip(&probs).map(|(x, p)| x * p).sum::<f64>();
        let variance = atoms.iter().zip(&probs).map(|(x, p)| p * (x - mean) * (x - mean)).sum::<f64>();
        Ok(AtomicDistribution { atoms, probs, mean, variance })
    }

    /// The atoms of a `two_point` or `finite_support` law.
    pub fn from_distribution(dist: &Distribution) -> Result<Self> {
        let (xs, ps) = dist.atoms().ok_or_else(|| {
            Error::InvalidParameter(alloc::format!("{} is not a finite-support law", dist.family().name()))
        })?;
        let points: Vec<(f64, f64)> = xs.iter().copied().zip(ps.iter().copied()).collect();
        Self::new(&points)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Upper barycenter `E[Y | Y >= x]`.
    pub fn barycenter(&self, x: f64) -> Result<f64> {
        let lo = self.atoms.partition_point(|&a| a < x);
        if lo == self.atoms.len() {
            return Err(Error::EmptyTail { x });
        }
        Ok(range_barycenter(self, MartingaleScale::Linear, lo, self.atoms.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum Scheme {
    Dubins,
    #[cfg_attr(feature = "serde", serde(rename = "ay"))]
    AzemaYor,
    #[cfg_attr(feature = "serde", serde(rename = "ay-minus"))]
    AzemaYorMinus,
    Day,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Dubins, Scheme::AzemaYor, Scheme::AzemaYorMinus, Scheme::Day];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Dubins => "dubins",
            Scheme::AzemaYor => "ay",
            Scheme::AzemaYorMinus => "ay-minus",
            Scheme::Day => "day",
        }
    }
}

/// Scale function making the embedding process a martingale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MartingaleScale {
    /// `S(x) = x`: standard Brownian motion.
    Linear,
    /// `S(x) = exp(-alpha x)`: Brownian motion with drift `mu`, variance
    /// `sigma^2` and `alpha = 2 mu / sigma^2`.
    Exponential { alpha: f64 },
}

impl MartingaleScale {
    fn s(self, x: f64) -> f64 {
        match self {
            MartingaleScale::Linear => x,
            MartingaleScale::Exponential { alpha } => libm::exp(-alpha * x),
        }
    }

    /// Probability that a path started at `m` leaves `(a, b)` through `b`.
    pub fn exit_up(self, a: f64, m: f64, b: f64) -> f64 {
        let p = match self {
            MartingaleScale::Linear => (m - a) / (b - a),
            MartingaleScale::Exponential { alpha } => {
                libm::expm1(-alpha * (m - a)) / libm::expm1(-alpha * (b - a))
            }
        };
        p.clamp(0.0, 1.0)
    }
}

/// Scale barycenter `S^{-1}(E[S(Y)])` of the atoms in `lo..hi`.
fn range_barycenter(f: &AtomicDistribution, scale: MartingaleScale, lo: usize, hi: usize) -> f64 {
    if hi - lo == 1 {
        return f.atoms[lo];
    }
    let xs = &f.atoms[lo..hi];
    let ps = &f.probs[lo..hi];
    let value = match scale {
        MartingaleScale::Linear => {
            let mass: f64 = ps.iter().sum();
            xs.iter().zip(ps).map(|(x, p)| x * p).sum::<f64>() / mass
        }
        MartingaleScale::Exponential { alpha } => {
            let peak = xs.iter().zip(ps).map(|(x, p)| libm::log(*p) - alpha * x).fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = xs.iter().zip(ps).map(|(x, p)| libm::exp(libm::log(*p) - alpha * x - peak)).sum();
            let mass: f64 = ps.iter().sum();
            -(peak + libm::log(sum / mass)) / alpha
        }
    };
    value.clamp(xs[0], xs[xs.len() - 1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EmbeddingOutcome {
    pub stopped_value: f64,
    pub n_exits: u32,
    /// Sum of `(S(m) - S(a)) (S(b) - S(m))` over the exits; its mean is the
    /// expected stopping time for the linear scale.
    pub quadratic_time: f64,
    /// Largest and smallest chain positions, start included.
    pub chain_max: f64,
    pub chain_min: f64,
}

#[derive(Clone, Copy)]
enum Mode {
    Dubins,
    Ay,
    AyMinus,
    DayFirst,
}

/// Runs one chain, reporting every position (start included) to `visit`.
pub fn embed_with<R, V>(
    f: &AtomicDistribution,
    scheme: Scheme,
    scale: MartingaleScale,
    rng: &mut R,
    mut visit: V,
) -> EmbeddingOutcome
where
    R: Rng + ?Sized,
    V: FnMut(f64),
{
    let (mut lo, mut hi) = (0usize, f.atoms.len());
    let mut pos = range_barycenter(f, scale, lo, hi);
    let mut mode = match scheme {
        Scheme::Dubins => Mode::Dubins,
        Scheme::AzemaYor => Mode::Ay,
        Scheme::AzemaYorMinus => Mode::AyMinus,
        Scheme::Day => Mode::DayFirst,
    };
    let mut out = EmbeddingOutcome { stopped_value: 0.0, n_exits: 0, quadratic_time: 0.0, chain_max: pos, chain_min: pos };
    visit(pos);

    while hi - lo > 1 {
        let k = match mode {
            Mode::Dubins | Mode::DayFirst => (lo + f.atoms[lo..hi].partition_point(|&x| x < pos)).clamp(lo + 1, hi - 1),
            Mode::Ay => lo + 1,
            Mode::AyMinus => hi - 1,
        };
        let a = range_barycenter(f, scale, lo, k);
        let b = range_barycenter(f, scale, k, hi);
        let up = rng.random::<f64>() < scale.exit_up(a, pos, b);
        let (sa, sm, sb) = (scale.s(a), scale.s(pos), scale.s(b));
        out.quadratic_time += libm::fabs((sm - sa) * (sb - sm));
        out.n_exits += 1;
        if up {
            pos = b;
            lo = k;
        } else {
            pos = a;
            hi = k;
        }
        if let Mode::DayFirst = mode {
            mode = if up { Mode::Ay } else { Mode::AyMinus };
        }
        out.chain_max = out.chain_max.max(pos);
        out.chain_min = out.chain_min.min(pos);
        visit(pos);
    }
    out.stopped_value = f.atoms[lo];
    out
}

/// Embeds `f` in standard Brownian motion with the given scheme.
pub fn embed<R: Rng + ?Sized>(f: &AtomicDistribution, scheme: Scheme, rng: &mut R) -> EmbeddingOutcome {
    embed_with(f, scheme, MartingaleScale::Linear, rng, |_| {})
}

pub fn dubins_embed<R: Rng + ?Sized>(f: &AtomicDistribution, rng: &mut R) -> EmbeddingOutcome {
    embed(f, Scheme::Dubins, rng)
}

pub fn azema_yor_embed<R: Rng + ?Sized>(f: &AtomicDistribution, rng: &mut R) -> EmbeddingOutcome {
    embed(f, Scheme::AzemaYor, rng)
}

pub fn azema_yor_minus_embed<R: Rng + ?Sized>(f: &AtomicDistribution, rng: &mut R) -> EmbeddingOutcome {
    embed(f, Scheme::AzemaYorMinus, rng)
}

pub fn day_embed<R: Rng + ?Sized>(f: &AtomicDistribution, rng: &mut R) -> EmbeddingOutcome {
    embed(f, Scheme::Day, rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct AtomFrequency {
    pub x: f64,
    pub p: f64,
    pub frequency: f64,
    /// Binomial standard error `sqrt(p (1 - p) / n)` at the model probability.
    pub stderr: f64,
}

impl AtomFrequency {
    pub fn within(&self, k: f64) -> bool {
        libm::fabs(self.frequency - self.p) <= k * self.stderr + 1e-12
    }
}

/// Aggregate behaviour of a scheme over many independent chains.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EmbeddingStats {
    pub scheme: Scheme,
    pub n: u64,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub atoms: Vec<AtomFrequency>,
    pub stopped_value: MonteCarloEstimate,
    pub quadratic_time: MonteCarloEstimate,
    pub mean_exits: f64,
    /// Distinct chain maxima with their counts, increasing.
    pub chain_max: Vec<(f64, u64)>,
}

impl EmbeddingStats {
    /// Smallest observed chain maximum whose empirical CDF reaches `q`.
    pub fn chain_max_quantile(&self, q: f64) -> f64 {
        let target = q * self.n as f64;
        let mut seen = 0u64;
        for &(v, c) in &self.chain_max {
            seen += c;
            if seen as f64 >= target {
                return v;
            }
        }
        self.chain_max.last().map_or(f64::NAN, |e| e.0)
    }
}

struct ChunkTally {
    counts: Vec<u64>,
    stopped: Moments,
    qt: Moments,
    exits: u64,
    maxima: BTreeMap<u64, u64>,
}

pub fn embedding_frequencies<C: ChunkRunner>(
    f: &AtomicDistribution,
    scheme: Scheme,
    n: u64,
    seed: u64,
    runner: &C,
) -> Result<EmbeddingStats> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one path".into()));
    }
    let (chunks, size) = chunk_layout(n);
    let parts = runner.map_chunks(chunks, |k| {
        let mut rng = chunk_rng(seed, k);
        let mut t = ChunkTally {
            counts: vec![0; f.len()],
            stopped: Moments::default(),
            qt: Moments::default(),
            exits: 0,
            maxima: BTreeMap::new(),
        };
        for _ in 0..size(k) {
            let o = embed(f, scheme, &mut rng);
            let idx = f.atoms.partition_point(|&x| x < o.stopped_value);
            t.counts[idx] += 1;
            t.stopped.push(o.stopped_value);
            t.qt.push(o.quadratic_time);
            t.exits += u64::from(o.n_exits);
            *t.maxima.entry(o.chain_max.to_bits()).or_insert(0) += 1;
        }
        t
    });

    let mut counts = vec![0u64; f.len()];
    let mut stopped = Moments::default();
    let mut qt = Moments::default();
    let mut exits = 0u64;
    let mut maxima: BTreeMap<u64, u64> = BTreeMap::new();
    for t in &parts {
        counts.iter_mut().zip(&t.counts).for_each(|(a, b)| *a += b);
        stopped.merge(&t.stopped);
        qt.merge(&t.qt);
        exits += t.exits;
        for (&key, &c) in &t.maxima {
            *maxima.entry(key).or_insert(0) += c;
        }
    }
    let mut chain_max: Vec<(f64, u64)> = maxima.into_iter().map(|(bits, c)| (f64::from_bits(bits), c)).collect();
    chain_max.sort_by(|a, b| a.0.total_cmp(&b.0));

    let nf = n as f64;
    let atoms = f
        .atoms
        .iter()
        .zip(&f.probs)
        .zip(&counts)
        .map(|((&x, &p), &c)| AtomFrequency { x, p, frequency: c as f64 / nf, stderr: libm::sqrt(p * (1.0 - p) / nf) })
        .collect();
    let estimate = |m: &Moments| MonteCarloEstimate { mean: m.mean(), stderr: m.stderr(), n, seed, censored_fraction: 0.0 };
    Ok(EmbeddingStats {
        scheme,
        n,
        seed,
        mean: f.mean,
        variance: f.variance,
        atoms,
        stopped_value: estimate(&stopped),
        quadratic_time: estimate(&qt),
        mean_exits: exits as f64 / nf,
        chain_max,
    })
}

/// Outcome of embedding a random walk in drifted Brownian motion and
/// comparing the two paths up to the walk's first drawdown of size `d`.
///
/// Flags are counted per path:
///
/// * `drawdown`: the chain's drawdown at the walk's stopping step is below `d`.
/// * `upper`: the chain rises above `M_d + d_plus`.
/// * `lower`: during the stopping increment the chain falls below
///   `S_tau - d_minus`.
/// * `widened`: before the stopping increment the chain's drawdown reaches
///   `d + d_zero`.
///
/// Chain extremes are over visited exit endpoints only.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CouplingReport {
    pub n_paths: u64,
    pub seed: u64,
    pub d: f64,
    pub alpha: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub d_zero: f64,
    pub violations_drawdown: u64,
    pub violations_upper: u64,
    pub violations_lower: u64,
    pub violations_widened: u64,
    /// Walk `E[M_d]`.
    pub expected_max: MonteCarloEstimate,
    /// `E[M_d]` of Brownian motion with the walk's mean and `sigma^2 = 2 mu / alpha`.
    pub bm_expected_max: f64,
    pub bm_sigma: f64,
    pub mean_steps: f64,
}

impl CouplingReport {
    pub fn total_violations(&self) -> u64 {
        self.violations_drawdown + self.violations_upper + self.violations_lower + self.violations_widened
    }

    /// Walk mean maximum at or above the Brownian value, allowing `k` stderr.
    pub fn expected_max_dominates(&self, k: f64) -> bool {
        self.expected_max.mean + k * self.expected_max.stderr >= self.bm_expected_max
    }
}

#[derive(Default)]
struct CouplingTally {
    flags: [u64; 4],
    max: Moments,
    steps: u64,
}

fn slack(x: f64) -> f64 {
    1e-9 * (1.0 + libm::fabs(x))
}

pub fn coupled_drawdown_experiment<C: ChunkRunner>(
    dist: &Distribution,
    d: f64,
    n_paths: u64,
    seed: u64,
    runner: &C,
) -> Result<CouplingReport> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!("drawdown size must be finite and > 0, got {d}")));
    }
    let f = AtomicDistribution::from_distribution(dist)?;
    let alpha = adjustment_coefficient(dist, 1e-12)?.alpha;
    let ex = excess_constants(dist, alpha, None)?;
    let (d_plus, d_minus, d_zero) = (ex.d_plus, ex.d_minus, ex.d_zero);
    let scale = MartingaleScale::Exponential { alpha };

    let (chunks, size) = chunk_layout(n_paths);
    let parts = runner.map_chunks(chunks, |k| {
        let mut rng = chunk_rng(seed, k);
        let mut t = CouplingTally::default();
        for _ in 0..size(k) {
            let mut s = 0.0f64;
            let mut walk_max = 0.0f64;
            let mut chain_top = 0.0f64;
            let mut chain_dd = 0.0f64;
            let mut steps = 0u64;
            loop {
                if steps >= STEP_LIMIT {
                    return Err(Error::StepLimitExceeded { steps });
                }
                steps += 1;
                let start = s;
                let dd_before = chain_dd;
                let mut inc_min = f64::INFINITY;
                let o = embed_with(&f, Scheme::Day, scale, &mut rng, |p| {
                    let y = start + p;
                    chain_top = chain_top.max(y);
                    inc_min = inc_min.min(y);
                    chain_dd = chain_dd.max(chain_top - y);
                });
                s = start + o.stopped_value;
                if s > walk_max {
                    walk_max = s;
                } else if walk_max - s >= d {
                    if chain_top - s < d - slack(d) {
                        t.flags[0] += 1;
                    }
                    if chain_top > walk_max + d_plus + slack(walk_max + d_plus) {
                        t.flags[1] += 1;
                    }
                    if inc_min < s - d_minus - slack(s - d_minus) {
                        t.flags[2] += 1;
                    }
                    if dd_before >= d + d_zero {
                        t.flags[3] += 1;
                    }
                    t.max.push(walk_max);
                    t.steps += steps;
                    break;
                }
            }
        }
        Ok(t)
    });
    let parts: Vec<CouplingTally> = parts.into_iter().collect::<Result<_>>()?;
    let mut flags = [0u64; 4];
    let mut max = Moments::default();
    let mut steps = 0u64;
    for t in &parts {
        flags.iter_mut().zip(&t.flags).for_each(|(a, b)| *a += b);
        max.merge(&t.max);
        steps += t.steps;
    }
    let mu = dist.mean();
    let bm_sigma = libm::sqrt(2.0 * mu / alpha);
    Ok(CouplingReport {
        n_paths,
        seed,
        d,
        alpha,
        d_plus,
        d_minus,
        d_zero,
        violations_drawdown: flags[0],
        violations_upper: flags[1],
        violations_lower: flags[2],
        violations_widened: flags[3],
        expected_max: MonteCarloEstimate { mean: max.mean(), stderr: max.stderr(), n: n_paths, seed, censored_fraction: 0.0 },
        bm_expected_max: bm_expected_max(mu, bm_sigma, d),
        bm_sigma,
        mean_steps: steps as f64 / n_paths.max(1) as f64,
    })
}
