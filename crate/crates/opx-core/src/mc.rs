//! Chunked Monte Carlo accumulation.
//!
//! Samples are drawn in fixed-size chunks, chunk `i` from its own ChaCha
//! stream `i` under the run seed. Chunk accumulators are merged in chunk
//! order, so a run sharded over any number of workers reproduces the
//! sequential result bit for bit.

use alloc::vec;
use alloc::vec::Vec;

pub use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

pub const CHUNK_SIZE: usize = 1024;

pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

pub fn chunk_count(samples: usize) -> usize {
    samples.div_ceil(CHUNK_SIZE)
}

fn chunk_len(samples: usize, chunk: usize) -> usize {
    CHUNK_SIZE.min(samples - chunk * CHUNK_SIZE)
}

/// Running first and second moments of a vector observable.
#[derive(Clone, Debug, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    sum: Vec<f64>,
    /// Row-major sums of products x_i x_j.
    outer: Vec<f64>,
}

impl Accumulator {
    pub fn new(dim: usize) -> Self {
        Accumulator { count: 0, sum: vec![0.0; dim], outer: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn push(&mut self, x: &[f64]) {
        let d = self.dim();
        self.count += 1;
        for i in 0..d {
            self.sum[i] += x[i];
            for j in 0..d {
                self.outer[i * d + j] += x[i] * x[j];
            }
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.outer.iter_mut().zip(&other.outer) {
            *a += b;
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.count as f64
    }

    /// Unbiased sample covariance.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        let n = self.count as f64;
        if n < 2.0 {
            return 0.0;
        }
        let d = self.dim();
        (self.outer[i * d + j] - self.sum[i] * self.sum[j] / n) / (n - 1.0)
    }

    /// Standard error of the mean of component `i`.
    pub fn stderr(&self, i: usize) -> f64 {
        libm::sqrt(self.cov(i, i).max(0.0) / self.count as f64)
    }
}

/// Accumulates one chunk; `draw` produces a single observation per call.
pub fn run_chunk<F>(samples: usize, seed: u64, dim: usize, chunk: usize, draw: &mut F) -> Accumulator
where
    F: FnMut(&mut ChaCha8Rng, &mut Vec<f64>),
{
    let mut rng = chunk_rng(seed, chunk);
    let mut acc = Accumulator::new(dim);
    let mut buf = vec![0.0; dim];
    for _ in 0..chunk_len(samples, chunk) {
        draw(&mut rng, &mut buf);
        acc.push(&buf);
    }
    acc
}

/// Sequential driver over all chunks.
pub fn run<F>(samples: usize, seed: u64, dim: usize, mut draw: F) -> Accumulator
where
    F: FnMut(&mut ChaCha8Rng, &mut Vec<f64>),
{
    let mut total = Accumulator::new(dim);
    for c in 0..chunk_count(samples) {
        total.merge(&run_chunk(samples, seed, dim, c, &mut draw));
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::RngCore;

    #[test]
    fn chunk_merge_matches_sequential() {
        let draw = |rng: &mut ChaCha8Rng, out: &mut Vec<f64>| {
            out[0] = (rng.next_u32() as f64) / 4294967296.0;
            out[1] = out[0] * out[0];
        };
        let seq = run(5000, 9, 2, draw);
        let mut merged = Accumulator::new(2);
        let mut d = draw;
        let parts: Vec<Accumulator> = (0..chunk_count(5000)).map(|c| run_chunk(5000, 9, 2, c, &mut d)).collect();
        for p in &parts {
            merged.merge(p);
        }
        assert_eq!(seq, merged);
        assert_eq!(seq.count, 5000);
        assert!((seq.mean(0) - 0.5).abs() < 5.0 * seq.stderr(0));
    }
}
