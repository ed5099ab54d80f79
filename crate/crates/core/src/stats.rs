//! Reproducible random streams and Monte Carlo summaries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Samples per independent stream; fixed so results do not depend on worker count.
pub const BATCH: usize = 1 << 15;

/// Deterministic stream for (seed, tag, index).
pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Running mean/variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Monte Carlo moments of `f` over `samples` draws, batched on independent streams.
pub fn mc_moments<F>(seed: u64, tag: u64, samples: usize, f: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, tag, b as u64);
            let count = BATCH.min(samples - b * BATCH);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(f(&mut rng));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// One-sigma half-width for a binomial proportion; the Wilson interval
/// (plus its center offset) is used when the normal approximation is poor.
pub fn proportion_sigma(hits: u64, n: u64) -> f64 {
    let nf = n as f64;
    let p = hits as f64 / nf;
    let normal = (p * (1.0 - p) / nf).sqrt();
    if hits >= 10 && n - hits >= 10 {
        return normal;
    }
    let z2 = 1.0;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    normal.max(half + (center - p).abs())
}

/// Monte Carlo probability of the event `f` with one-sigma half-width.
pub fn mc_fraction<F>(seed: u64, tag: u64, samples: usize, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, tag, b as u64);
            let count = BATCH.min(samples - b * BATCH);
            (0..count).filter(|_| f(&mut rng)).count() as u64
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let n = samples as u64;
    (hits as f64 / n as f64, proportion_sigma(hits, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..300].iter().for_each(|&x| a.push(x));
        xs[300..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.variance() - whole.variance()).abs() < 1e-9);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_moments(9, 1, 200_000, |r| r.random::<f64>()))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn wilson_fallback_for_zero_hits() {
        let s = proportion_sigma(0, 1000);
        assert!(s > 0.0 && s < 2e-3);
        assert!((proportion_sigma(500, 1000) - 0.5 / 1000f64.sqrt()).abs() < 1e-12);
    }
}
