//! Empirical quantization: codebooks, Monte Carlo distortion, Lloyd
//! refinement and V_n estimates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::spaces::SpaceModel;
use crate::stats::{self, mc_moments, Moments, BATCH};

const TAG_EVAL: u64 = 0xD157;
const TAG_CODEBOOK: u64 = 0xC0DE;
const TAG_LLOYD: u64 = 0x110D;
const TAG_POOL: u64 = 0x9001;

/// Independent sub-seed for (seed, a, b) via SplitMix64 mixing.
pub fn subseed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0xA24B_AED4_963E_E407) ^ b.wrapping_mul(0x9FB2_1C65_1E98_DF25);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A nonempty list of codewords.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codebook<P> {
    points: Vec<P>,
}

impl<P> Codebook<P> {
    pub fn new(points: Vec<P>) -> Result<Self> {
        if points.is_empty() {
            return Err(domain("Codebook", "a codebook needs at least one point"));
        }
        Ok(Self { points })
    }

    /// Rejects points outside the reproduction space.
    pub fn checked<S: SpaceModel<Point = P>>(space: &S, points: Vec<P>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !space.contains(p)) {
            return Err(domain("Codebook", format!("codeword {i} is outside the reproduction space")));
        }
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn into_points(self) -> Vec<P> {
        self.points
    }
}

/// Monte Carlo estimate of an expected distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistortionEstimate {
    pub mean: f64,
    /// One standard error.
    pub ci_halfwidth: f64,
    pub samples: usize,
}

impl DistortionEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            ci_halfwidth: 0.0,
            samples: 0,
        }
    }

    fn from_moments(m: &Moments) -> Self {
        Self {
            mean: m.mean,
            ci_halfwidth: m.std_error(),
            samples: m.n as usize,
        }
    }
}

/// Index and distortion of the nearest codeword; ties go to the lowest index.
pub fn nearest<S: SpaceModel>(space: &S, x: &S::Point, codebook: &[S::Point]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, y) in codebook.iter().enumerate() {
        let d = space.distortion(x, y);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// E[min_i ρ(X, y_i)] for X drawn from `source`.
pub fn nearest_distortion<S, F>(
    space: &S,
    source: &F,
    codebook: &Codebook<S::Point>,
    samples: usize,
    seed: u64,
) -> Result<DistortionEstimate>
where
    S: SpaceModel,
    F: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
{
    if samples == 0 {
        return Err(domain("nearest_distortion", "samples must be positive"));
    }
    let pts = codebook.points();
    let m = mc_moments(seed, TAG_EVAL, samples, |rng| nearest(space, &source(rng), pts).1);
    Ok(DistortionEstimate::from_moments(&m))
}

/// Codebook of n i.i.d. draws from `codeword`.
pub fn random_codebook<S, G>(codeword: &G, n: usize, seed: u64) -> Result<Codebook<S::Point>>
where
    S: SpaceModel,
    G: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
{
    let mut rng = stats::stream(seed, TAG_CODEBOOK, 0);
    Codebook::new((0..n).map(|_| codeword(&mut rng)).collect())
}

/// Average distortion of random codebooks with codewords i.i.d. from ν.
///
/// With two or more trials the CI is the standard error across trial means,
/// which includes the codebook randomness.
pub fn random_codebook_estimate<S, F, G>(
    space: &S,
    source: &F,
    codeword: &G,
    n: usize,
    trials: usize,
    samples: usize,
    seed: u64,
) -> Result<DistortionEstimate>
where
    S: SpaceModel,
    F: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
    G: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
{
    if n == 0 || trials == 0 {
        return Err(domain("random_codebook_estimate", "n and trials must be positive"));
    }
    let mut across = Moments::default();
    let mut last = None;
    for t in 0..trials as u64 {
        let cb = random_codebook::<S, G>(codeword, n, subseed(seed, 1, t))?;
        let est = nearest_distortion(space, source, &cb, samples, subseed(seed, 2, t))?;
        across.push(est.mean);
        last = Some(est);
    }
    let ci = if trials >= 2 {
        across.std_error()
    } else {
        last.map_or(f64::INFINITY, |e| e.ci_halfwidth)
    };
    Ok(DistortionEstimate {
        mean: across.mean,
        ci_halfwidth: ci,
        samples: trials * samples,
    })
}

/// k-means++ seeding from a pool of source draws, mapped into Y.
pub fn kmeans_pp_init<S, F>(space: &S, source: &F, n: usize, pool: usize, seed: u64) -> Result<Codebook<S::Point>>
where
    S: SpaceModel,
    F: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
{
    if n == 0 {
        return Err(domain("kmeans_pp_init", "n must be positive"));
    }
    let pool = pool.max(n);
    let mut rng = stats::stream(seed, TAG_POOL, 0);
    let xs: Vec<S::Point> = (0..pool).map(|_| source(&mut rng)).collect();
    let to_y = |x: &S::Point| space.project(&space.embed(x));
    let mut chosen = vec![to_y(&xs[rng.random_range(0..pool)])];
    let mut dist: Vec<f64> = xs.iter().map(|x| space.distortion(x, &chosen[0])).collect();
    while chosen.len() < n {
        let total: f64 = dist.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = pool - 1;
            for (i, d) in dist.iter().enumerate() {
                if u < *d {
                    pick = i;
                    break;
                }
                u -= d;
            }
            pick
        } else {
            rng.random_range(0..pool)
        };
        let y = to_y(&xs[idx]);
        for (d, x) in dist.iter_mut().zip(&xs) {
            *d = d.min(space.distortion(x, &y));
        }
        chosen.push(y);
    }
    Codebook::new(chosen)
}

/// Result of Lloyd refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LloydOutcome<P> {
    pub codebook: Codebook<P>,
    /// Training distortion of the codebook entering each iteration.
    pub history: Vec<f64>,
    /// Codewords removed because their cells were empty.
    pub dropped: usize,
}

struct CellSums {
    sums: Vec<f64>,
    counts: Vec<u64>,
    distortion: f64,
}

impl CellSums {
    fn zeros(n: usize, dim: usize) -> Self {
        Self {
            sums: vec![0.0; n * dim],
            counts: vec![0; n],
            distortion: 0.0,
        }
    }

    fn add(&mut self, other: &CellSums) {
        self.sums.iter_mut().zip(&other.sums).for_each(|(a, b)| *a += b);
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        self.distortion += other.distortion;
    }
}

/// Lloyd iterations: centroids in the Euclidean embedding, projected back to Y.
pub fn lloyd_refine<S, F>(
    space: &S,
    source: &F,
    init: Codebook<S::Point>,
    iterations: usize,
    samples: usize,
    seed: u64,
) -> Result<LloydOutcome<S::Point>>
where
    S: SpaceModel,
    F: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
{
    if samples == 0 {
        return Err(domain("lloyd_refine", "samples must be positive"));
    }
    let dim = space.embedding_dim();
    let start = init.len();
    let mut points = init.into_points();
    let mut history = Vec::with_capacity(iterations);
    for it in 0..iterations as u64 {
        let n = points.len();
        let batch_seed = subseed(seed, 3, it);
        let parts: Vec<CellSums> = (0..samples.div_ceil(BATCH))
            .into_par_iter()
            .map(|b| {
                let mut rng = stats::stream(batch_seed, TAG_LLOYD, b as u64);
                let mut acc = CellSums::zeros(n, dim);
                for _ in 0..BATCH.min(samples - b * BATCH) {
                    let x = source(&mut rng);
                    let (i, d) = nearest(space, &x, &points);
                    acc.distortion += d;
                    acc.counts[i] += 1;
                    for (s, e) in acc.sums[i * dim..(i + 1) * dim].iter_mut().zip(space.embed(&x)) {
                        *s += e;
                    }
                }
                acc
            })
            .collect();
        let mut total = CellSums::zeros(n, dim);
        parts.iter().for_each(|p| total.add(p));
        history.push(total.distortion / samples as f64);
        points = (0..n)
            .filter(|&i| total.counts[i] > 0)
            .map(|i| {
                let c = total.counts[i] as f64;
                let mean: Vec<f64> = total.sums[i * dim..(i + 1) * dim].iter().map(|s| s / c).collect();
                space.project(&mean)
            })
            .collect();
    }
    let dropped = start - points.len();
    Ok(LloydOutcome {
        codebook: Codebook::new(points)?,
        history,
        dropped,
    })
}

/// A V_n estimate together with the codebook that achieves it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VnEstimate<P> {
    pub estimate: DistortionEstimate,
    pub codebook: Codebook<P>,
    /// "structured", "kmeans++", "random" or "lloyd".
    pub method: &'static str,
}

/// Best achievable distortion found within `budget` samples: 25% screening
/// of structured, k-means++ and random codebooks, 75% Lloyd refinement of the
/// best screen including a fresh final evaluation.
pub fn vn_estimate<S, F, G>(
    space: &S,
    source: &F,
    codeword: &G,
    n: usize,
    budget: usize,
    seed: u64,
) -> Result<VnEstimate<S::Point>>
where
    S: SpaceModel,
    F: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
    G: Fn(&mut ChaCha8Rng) -> S::Point + Sync,
{
    if n == 0 {
        return Err(domain("vn_estimate", "n must be positive"));
    }
    if budget < 1000 {
        return Err(domain("vn_estimate", format!("budget {budget} is below 1000 samples")));
    }
    let mut candidates: Vec<(&'static str, Codebook<S::Point>)> = space
        .structured_codebooks(n)
        .into_iter()
        .filter_map(|c| Codebook::new(c).ok().map(|c| ("structured", c)))
        .collect();
    for t in 0..2u64 {
        candidates.push(("kmeans++", kmeans_pp_init(space, source, n, (20 * n).max(1000), subseed(seed, 4, t))?));
        candidates.push(("random", random_codebook::<S, G>(codeword, n, subseed(seed, 5, t))?));
    }
    let screen_each = (budget / 4 / candidates.len()).max(100);
    let mut screened = Vec::with_capacity(candidates.len());
    for (i, (label, cb)) in candidates.into_iter().enumerate() {
        let est = nearest_distortion(space, source, &cb, screen_each, subseed(seed, 6, i as u64))?;
        screened.push((est, label, cb));
    }
    let (best_est, best_label, best_cb) = screened
        .into_iter()
        .min_by(|a, b| a.0.mean.total_cmp(&b.0.mean))
        .expect("at least one candidate");

    let lloyd_budget = budget - budget / 4;
    let final_eval = (lloyd_budget / 4).max(100);
    let iterations = 20usize;
    let per_iter = ((lloyd_budget - final_eval) / iterations).max(100);
    let refined = lloyd_refine(space, source, best_cb.clone(), iterations, per_iter, subseed(seed, 7, 0))?;
    let refined_est = nearest_distortion(space, source, &refined.codebook, final_eval, subseed(seed, 8, 0))?;
    Ok(if refined_est.mean <= best_est.mean {
        VnEstimate {
            estimate: refined_est,
            codebook: refined.codebook,
            method: "lloyd",
        }
    } else {
        VnEstimate {
            estimate: best_est,
            codebook: best_cb,
            method: best_label,
        }
    })
}
