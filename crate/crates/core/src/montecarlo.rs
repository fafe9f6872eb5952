//! Monte Carlo drivers for drawdown episodes, the running minimum and the
//! exponential martingale.
//!
//! Work is cut into chunks of [`CHUNK_SIZE`] paths. Chunk `k` draws from a
//! ChaCha8 stream keyed by `(seed, k)`, and chunk results are merged in chunk
//! order, so estimates are bit-identical however the chunks are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::adjustment::adjustment_coefficient;
use crate::distributions::Distribution;
use crate::error::{Error, Result};

pub const CHUNK_SIZE: u64 = 4096;
pub const STEP_LIMIT: u64 = 1_000_000_000;
/// Default continuation probability tolerated when declaring a minimum final.
pub const DEFAULT_EPS: f64 = 1e-6;
// exp(700) is still finite in f64.
const MAX_EXPONENT: f64 = 700.0;

/// Schedules independent chunks. Implementations must return results in
/// chunk order.
pub trait ChunkRunner {
    fn map_chunks<T, F>(&self, n_chunks: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs chunks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ChunkRunner for Sequential {
    fn map_chunks<T, F>(&self, n_chunks: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..n_chunks).map(f).collect()
    }
}

/// The random stream for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Number of chunks and the size of chunk `k` for `n` paths.
pub fn chunk_layout(n: u64) -> (u64, impl Fn(u64) -> u64) {
    let chunks = n.div_ceil(CHUNK_SIZE);
    (chunks, move |k: u64| CHUNK_SIZE.min(n - k * CHUNK_SIZE))
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation over `sqrt(n)`.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        libm::sqrt(self.m2 / (self.n - 1) as f64 / self.n as f64)
    }
}

/// One drawdown episode of the walk.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EpisodeSample {
    /// Running maximum when the drawdown completes (`M_d`).
    pub m_d: f64,
    /// Steps taken, including the stopping step.
    pub tau: u64,
    /// Realised drawdown at the stopping step, `>= d`.
    pub overshoot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    /// Share of paths whose outcome was settled by the continuation bound
    /// rather than observed. Always zero for drawdown episodes.
    pub censored_fraction: f64,
}

impl MonteCarloEstimate {
    fn from_moments(m: &Moments, seed: u64, censored_fraction: f64) -> Self {
        MonteCarloEstimate { mean: m.mean(), stderr: m.stderr(), n: m.count(), seed, censored_fraction }
    }

    /// True when `lower - k*se <= mean <= upper + k*se`, up to rounding in
    /// the last dozen digits.
    pub fn within(&self, lower: f64, upper: f64, k: f64) -> bool {
        let slack = |v: f64| if v.is_finite() { 1e-12 * (1.0 + v.abs()) } else { 0.0 };
        self.mean >= lower - k * self.stderr - slack(lower) && self.mean <= upper + k * self.stderr + slack(upper)
    }
}

fn check_d(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("drawdown size must be finite and > 0, got {d}")))
    }
}

/// Walks until the first drawdown of size `d`.
pub fn run_episode<R: Rng + ?Sized>(dist: &Distribution, d: f64, rng: &mut R) -> Result<EpisodeSample> {
    run_episode_with_limit(dist, d, rng, STEP_LIMIT)
}

/// [`run_episode`] with an explicit step guard.
pub fn run_episode_with_limit<R: Rng + ?Sized>(
    dist: &Distribution,
    d: f64,
    rng: &mut R,
    step_limit: u64,
) -> Result<EpisodeSample> {
    check_d(d)?;
    let mut s = 0.0f64;
    let mut max = 0.0f64;
    let mut tau = 0u64;
    loop {
        if tau >= step_limit {
            return Err(Error::StepLimitExceeded { steps: step_limit });
        }
        tau += 1;
        s += dist.sample(rng);
        if s > max {
            max = s;
        } else if max - s >= d {
            return Ok(EpisodeSample { m_d: max, tau, overshoot: max - s });
        }
    }
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

fn reduce(parts: Vec<Moments>) -> Moments {
    parts.iter().fold(Moments::default(), |mut acc, m| {
        acc.merge(m);
        acc
    })
}

/// Per-chunk moments of `f(episode)` over `n` episodes.
fn episode_moments<C, F>(dist: &Distribution, d: f64, n: u64, seed: u64, runner: &C, f: F) -> Result<Moments>
where
    C: ChunkRunner,
    F: Fn(&EpisodeSample) -> Result<f64> + Sync + Send,
{
    check_d(d)?;
    let (chunks, size) = chunk_layout(n);
    let parts = runner.map_chunks(chunks, |k| {
        let mut rng = chunk_rng(seed, k);
        let mut m = Moments::default();
        for _ in 0..size(k) {
            let ep = run_episode(dist, d, &mut rng)?;
            m.push(f(&ep)?);
        }
        Ok(m)
    });
    Ok(reduce(collect(parts)?))
}

/// Mean of `M_d` over `n >= 100` independent episodes.
pub fn estimate_expected_max<C: ChunkRunner>(
    dist: &Distribution,
    d: f64,
    n: u64,
    seed: u64,
    runner: &C,
) -> Result<MonteCarloEstimate> {
    if n < 100 {
        return Err(Error::InvalidParameter(alloc::format!("need at least 100 episodes, got {n}")));
    }
    let m = episode_moments(dist, d, n, seed, runner, |ep| Ok(ep.m_d))?;
    Ok(MonteCarloEstimate::from_moments(&m, seed, 0.0))
}

/// The individual `M_d` values behind [`estimate_expected_max`], in path order.
pub fn sample_maxima<C: ChunkRunner>(dist: &Distribution, d: f64, n: u64, seed: u64, runner: &C) -> Result<Vec<f64>> {
    check_d(d)?;
    let (chunks, size) = chunk_layout(n);
    let parts = runner.map_chunks(chunks, |k| {
        let mut rng = chunk_rng(seed, k);
        (0..size(k)).map(|_| run_episode(dist, d, &mut rng).map(|ep| ep.m_d)).collect::<Result<Vec<f64>>>()
    });
    Ok(collect(parts)?.into_iter().flatten().collect())
}

/// Empirical `P(-min_n S_n > x)` for each `x` in `xs` (sorted, `>= 0`).
///
/// A path stops once its minimum has passed every `x`, or once it sits
/// `ln(1/eps)/alpha` above its running minimum: by Lundberg's inequality the
/// minimum then moves again with probability at most `eps`. Such paths are
/// counted as not reaching the undecided levels.
pub fn estimate_min_tail<C: ChunkRunner>(
    dist: &Distribution,
    xs: &[f64],
    n: u64,
    seed: u64,
    eps: f64,
    runner: &C,
) -> Result<Vec<MonteCarloEstimate>> {
    if !(eps > 0.0 && eps <= 1e-3) {
        return Err(Error::InvalidParameter(alloc::format!("eps must lie in (0, 1e-3], got {eps}")));
    }
    if xs.iter().any(|&x| !(x >= 0.0 && x.is_finite())) || xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("tail points must be finite, >= 0 and sorted".into()));
    }
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let alpha = adjustment_coefficient(dist, 1e-12)?.alpha;
    let margin = libm::log(1.0 / eps) / alpha;
    let deepest = xs[xs.len() - 1];

    let (chunks, size) = chunk_layout(n);
    let parts = runner.map_chunks(chunks, |k| {
        let mut rng = chunk_rng(seed, k);
        let mut hits = vec![Moments::default(); xs.len()];
        let mut censored = vec![0u64; xs.len()];
        for _ in 0..size(k) {
            let mut s = 0.0f64;
            let mut min = 0.0f64;
            let mut steps = 0u64;
            let stopped_by_margin = loop {
                if steps >= STEP_LIMIT {
                    return Err(Error::StepLimitExceeded { steps });
                }
                steps += 1;
                s += dist.sample(&mut rng);
                if s < min {
                    min = s;
                    if -min > deepest {
                        break false;
                    }
                } else if s - min >= margin {
                    break true;
                }
            };
            for (i, &x) in xs.iter().enumerate() {
                let hit = -min > x;
                hits[i].push(if hit { 1.0 } else { 0.0 });
                if !hit && stopped_by_margin {
                    censored[i] += 1;
                }
            }
        }
        Ok((hits, censored))
    });
    let parts = collect(parts)?;
    let mut out = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        let mut m = Moments::default();
        let mut cens = 0u64;
        for (hits, censored) in &parts {
            m.merge(&hits[i]);
            cens += censored[i];
        }
        out.push(MonteCarloEstimate::from_moments(&m, seed, cens as f64 / n as f64));
    }
    Ok(out)
}

/// `E[exp(-alpha S_n)]` at a fixed `n_steps`.
pub fn martingale_check<C: ChunkRunner>(
    dist: &Distribution,
    alpha: f64,
    n_steps: u64,
    n_paths: u64,
    seed: u64,
    runner: &C,
) -> Result<MonteCarloEstimate> {
    let (chunks, size) = chunk_layout(n_paths);
    let parts = runner.map_chunks(chunks, |k| {
        let mut rng = chunk_rng(seed, k);
        let mut m = Moments::default();
        for _ in 0..size(k) {
            let s: f64 = (0..n_steps).map(|_| dist.sample(&mut rng)).sum();
            if -alpha * s > MAX_EXPONENT {
                return Err(Error::OverflowGuard);
            }
            m.push(libm::exp(-alpha * s));
        }
        Ok(m)
    });
    Ok(MonteCarloEstimate::from_moments(&reduce(collect(parts)?), seed, 0.0))
}

/// `E[exp(-alpha S_tau)]` at the first drawdown of size `d`, where
/// `S_tau = M_d - overshoot`. Optional stopping makes this 1.
pub fn stopped_martingale_check<C: ChunkRunner>(
    dist: &Distribution,
    d: f64,
    n_paths: u64,
    seed: u64,
    runner: &C,
) -> Result<MonteCarloEstimate> {
    let alpha = adjustment_coefficient(dist, 1e-12)?.alpha;
    let m = episode_moments(dist, d, n_paths, seed, runner, |ep| {
        let exponent = -alpha * (ep.m_d - ep.overshoot);
        if exponent > MAX_EXPONENT {
            return Err(Error::OverflowGuard);
        }
        Ok(libm::exp(exponent))
    })?;
    Ok(MonteCarloEstimate::from_moments(&m, seed, 0.0))
}
