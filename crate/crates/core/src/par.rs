//! Data-parallel batch evaluation with a sequential fallback.
//!
//! Monte Carlo work is cut into fixed-size chunks, each driven by its own
//! [`RngStream`] `(seed, chunk_index)`, and the per-chunk accumulators are
//! merged in chunk order. The result is therefore identical for any thread
//! count, and identical with the `parallel` feature switched off.

use serde::{Deserialize, Serialize};

use crate::randomtimes::RngStream;

/// Draws per Monte Carlo chunk.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel. Output order is preserved.
pub fn map<T, F>(n: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Running mean and variance (Welford), mergeable (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
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
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub draws: u64,
}

impl From<Welford> for McEstimate {
    fn from(w: Welford) -> Self {
        McEstimate {
            value: w.mean(),
            std_error: w.std_error(),
            draws: w.count(),
        }
    }
}

/// Mean of `draw` over `n` independent draws.
pub fn monte_carlo<F>(n: usize, seed: u64, exec: Exec, draw: F) -> Welford
where
    F: Fn(&mut RngStream) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let parts = map(chunks, exec, |i| {
        let mut rng = RngStream::new(seed, i as u64);
        let len = CHUNK.min(n - i * CHUNK);
        let mut acc = Welford::new();
        for _ in 0..len {
            acc.push(draw(&mut rng));
        }
        acc
    });
    let mut total = Welford::new();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Collects `n` draws in a fixed order.
pub fn sample<T, F>(n: usize, seed: u64, exec: Exec, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    map(chunks, exec, |i| {
        let mut rng = RngStream::new(seed, i as u64);
        let len = CHUNK.min(n - i * CHUNK);
        (0..len).map(|_| draw(&mut rng)).collect::<Vec<T>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut w = Welford::new();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((w.mean() - mean).abs() < 1e-12);
        assert!((w.variance() - var).abs() < 1e-10);

        let (a, b) = xs.split_at(313);
        let mut wa = Welford::new();
        let mut wb = Welford::new();
        a.iter().for_each(|&x| wa.push(x));
        b.iter().for_each(|&x| wb.push(x));
        wa.merge(&wb);
        assert!((wa.mean() - mean).abs() < 1e-12);
        assert!((wa.variance() - var).abs() < 1e-10);
    }

    #[test]
    fn execution_mode_does_not_change_results() {
        let f = |r: &mut RngStream| r.uniform();
        let a = monte_carlo(20_000, 9, Exec::Sequential, f);
        let b = monte_carlo(20_000, 9, Exec::Parallel, f);
        assert_eq!(a, b);
        let s1 = sample(10_000, 3, Exec::Sequential, |r: &mut RngStream| r.uniform());
        let s2 = sample(10_000, 3, Exec::Parallel, |r: &mut RngStream| r.uniform());
        assert_eq!(s1, s2);
    }
}
