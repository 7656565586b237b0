//! Threaded Monte Carlo over the core chunk layout.
//!
//! Chunks are distributed round-robin over scoped threads and merged in
//! chunk order, so the result matches the sequential driver exactly.

use std::thread;

use opx_core::mc::{self, Accumulator, ChaCha8Rng};

pub fn default_threads() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(16)
}

pub fn run_parallel<F>(samples: usize, seed: u64, dim: usize, threads: usize, draw: F) -> Accumulator
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<f64>) + Sync,
{
    let chunks = mc::chunk_count(samples);
    let threads = threads.clamp(1, chunks.max(1));
    let mut parts: Vec<Option<Accumulator>> = (0..chunks).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let draw = &draw;
                s.spawn(move || {
                    let mut f = |rng: &mut ChaCha8Rng, out: &mut Vec<f64>| draw(rng, out);
                    (w..chunks)
                        .step_by(threads)
                        .map(|c| (c, mc::run_chunk(samples, seed, dim, c, &mut f)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (c, acc) in h.join().expect("worker thread panicked") {
                parts[c] = Some(acc);
            }
        }
    });
    let mut total = Accumulator::new(dim);
    for acc in parts.into_iter().flatten() {
        total.merge(&acc);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::RngCore;

    #[test]
    fn matches_sequential_driver() {
        let draw = |rng: &mut ChaCha8Rng, out: &mut Vec<f64>| {
            let u = rng.next_u32() as f64 / 4294967296.0;
            out[0] = u;
            out[1] = u * u;
        };
        let seq = mc::run(5000, 11, 2, draw);
        for threads in [1, 3, 8] {
            let par = run_parallel(5000, 11, 2, threads, draw);
            assert_eq!(par.count, seq.count);
            assert_eq!(par.mean(0).to_bits(), seq.mean(0).to_bits());
            assert_eq!(par.stderr(1).to_bits(), seq.stderr(1).to_bits());
        }
    }
}
