//! Monte Carlo oracle for cosine matrix entries.
//!
//! For each row `E`, Haar-random `N` is drawn at a deep level `R`; the sample
//! `s(E, N) 1[N ∈ cell]` estimates the entry of every column at once. Kernel
//! values are exact powers of `q` except when the stacked matrix is singular
//! mod `m^R`, which has vanishing probability and bounded error `q^{-R}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{enumerate, reduce, PatternSampler};
use crate::linalg::{rat_to_f64, RatMatrix};
use crate::ring::{max_depth, ChainRing};

/// Extra digits sampled beyond the level.
pub const DEFAULT_EXTRA_DEPTH: u32 = 16;

const CHUNK: u64 = 1 << 15;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonteCarloMatrix {
    pub rows: usize,
    pub cols: usize,
    pub samples_per_row: u64,
    pub depth: u32,
    /// Row-major estimates of the entries.
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl MonteCarloMatrix {
    /// Largest `|estimate - exact| / stderr`; entries with zero spread must match.
    pub fn max_z_score(&self, exact: &RatMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.rows {
            for b in 0..self.cols {
                let i = a * self.cols + b;
                let diff = (self.mean[i] - rat_to_f64(exact.get(a, b))).abs();
                let z = if self.stderr[i] > 0.0 {
                    diff / self.stderr[i]
                } else if diff < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }

    pub fn within(&self, exact: &RatMatrix, sigmas: f64) -> bool {
        self.max_z_score(exact) <= sigmas
    }
}

/// Estimates `D_i` at the level of `ring` from `samples_per_row` draws per row.
pub fn cosine_monte_carlo(
    ring: &ChainRing,
    n: usize,
    i: usize,
    samples_per_row: u64,
    seed: u64,
) -> Result<MonteCarloMatrix> {
    if i > n {
        return Err(Error::Dimension(format!("i = {i} exceeds n = {n}")));
    }
    let depth = (ring.depth() + DEFAULT_EXTRA_DEPTH).min(max_depth(ring.q()));
    let deep = ring.at_depth(depth)?;
    let rows = enumerate(ring, n, i, None)?;
    let cols = enumerate(ring, n, n - i, None)?;
    let sampler = PatternSampler::new(&deep, n, n - i);
    let q = ring.q() as f64;
    let chunks = samples_per_row.div_ceil(CHUNK);
    let mut mean = Vec::with_capacity(rows.len() * cols.len());
    let mut stderr = Vec::with_capacity(rows.len() * cols.len());
    for (a, e) in rows.points().iter().enumerate() {
        // Level digits are valid deep digits: the canonical lift of E.
        let e_deep = e.matrix();
        let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((a as u64) << 32) | c);
                let count = CHUNK.min(samples_per_row - c * CHUNK);
                let mut sum = vec![0.0; cols.len()];
                let mut sq = vec![0.0; cols.len()];
                for _ in 0..count {
                    let nn = sampler.sample(&mut rng);
                    let exps = deep.smith_exponents(&e_deep.vstack(&nn.matrix()));
                    let v: u32 = exps.iter().sum();
                    let s = q.powi(-(v as i32));
                    let col = cols.position(&reduce(ring, &nn)).expect("reduction lands in the index");
                    sum[col] += s;
                    sq[col] += s * s;
                }
                (sum, sq)
            })
            .collect();
        let total = samples_per_row as f64;
        for b in 0..cols.len() {
            let s: f64 = partials.iter().map(|p| p.0[b]).sum();
            let s2: f64 = partials.iter().map(|p| p.1[b]).sum();
            let m = s / total;
            let var = (s2 / total - m * m).max(0.0);
            mean.push(m);
            stderr.push((var / total).sqrt());
        }
    }
    Ok(MonteCarloMatrix { rows: rows.len(), cols: cols.len(), samples_per_row, depth, mean, stderr })
}
