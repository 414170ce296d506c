//! Chunked Monte Carlo estimation.
//!
//! Replications are split into fixed-size chunks; chunk k draws from
//! substream k of the seed and is reduced with Welford's update. Chunks are
//! merged in index order, so the result does not depend on how many worker
//! threads ran them.

use rayon::prelude::*;
use serde::Serialize;

use crate::rng::{substream, StreamRng};

pub const CHUNK: usize = 4096;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    /// |value − target| ≤ 3·stderr + bias.
    pub fn covers(&self, target: f64, bias: f64) -> bool {
        (self.value - target).abs() <= 3.0 * self.stderr + bias
    }
}

/// Streaming mean and centred second moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn estimate(&self) -> McEstimate {
        let stderr = if self.n >= 2 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate { value: self.mean, stderr, n: self.n }
    }
}

fn chunk_sizes(n: usize) -> Vec<(u64, usize)> {
    (0..n.div_ceil(CHUNK))
        .map(|k| (k as u64, CHUNK.min(n - k * CHUNK)))
        .collect()
}

/// Mean of `n` draws of `sample`.
pub fn estimate_mean<F>(n: usize, seed: u64, sample: F) -> McEstimate
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    estimate_means(n, 1, seed, |rng, out| out[0] = sample(rng))[0]
}

/// Means of `k` jointly sampled quantities.
pub fn estimate_means<F>(n: usize, k: usize, seed: u64, sample: F) -> Vec<McEstimate>
where
    F: Fn(&mut StreamRng, &mut [f64]) + Sync,
{
    let parts: Vec<Vec<Welford>> = chunk_sizes(n)
        .into_par_iter()
        .map(|(id, size)| {
            let mut rng = substream(seed, id);
            let mut acc = vec![Welford::default(); k];
            let mut buf = vec![0.0; k];
            for _ in 0..size {
                sample(&mut rng, &mut buf);
                acc.iter_mut().zip(&buf).for_each(|(a, x)| a.push(*x));
            }
            acc
        })
        .collect();
    let mut total = vec![Welford::default(); k];
    for p in &parts {
        total.iter_mut().zip(p).for_each(|(t, c)| t.merge(c));
    }
    total.iter().map(Welford::estimate).collect()
}
