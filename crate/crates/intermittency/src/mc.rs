//! Seeded, block-parallel Monte Carlo with a deterministic reduction.
//!
//! Samples are split into fixed-size blocks. Each block draws from its own
//! generator seeded from `(seed, stream, block)`, and block statistics are
//! merged in block order, so results do not depend on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Rng = ChaCha8Rng;

pub const BLOCK: u64 = 4096;

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Stats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, o: &Stats) -> Stats {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        Stats { n, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for block `block` of stream `stream`.
pub fn derive_seed(seed: u64, stream: u64, block: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ stream.wrapping_mul(0xa076_1d64_78bd_642f)) ^ block)
}

pub fn rng_for(seed: u64, stream: u64, block: u64) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, stream, block))
}

/// Mean of `f` over `n` samples.
pub fn run<F>(seed: u64, stream: u64, n: u64, f: F) -> Stats
where
    F: Fn(&mut Rng) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<Stats> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, stream, b);
            let len = BLOCK.min(n - b * BLOCK);
            let mut s = Stats::default();
            for _ in 0..len {
                s.push(f(&mut rng));
            }
            s
        })
        .collect();
    parts.iter().fold(Stats::default(), |acc, s| acc.merge(s))
}

/// Runs `f` once per block and collects the outputs in block order.
pub fn map_blocks<T, F>(seed: u64, stream: u64, blocks: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, u64) -> T + Sync,
{
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_for(seed, stream, b);
            f(&mut rng, b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn uniform_mean() {
        let s = run(7, 0, 100_000, |r| r.random::<f64>());
        assert!((s.mean - 0.5).abs() < 4.0 * s.std_error());
        assert!((s.variance() - 1.0 / 12.0).abs() < 1e-3);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let f = |r: &mut Rng| r.random::<f64>().powi(3);
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run(3, 1, 50_000, f));
        let b = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run(3, 1, 50_000, f));
        assert_eq!(a, b);
    }

    #[test]
    fn merge_matches_push() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let mut all = Stats::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Stats::default();
        let mut b = Stats::default();
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert!((m.mean - all.mean).abs() < 1e-15);
        assert!((m.m2 - all.m2).abs() < 1e-12);
    }
}
