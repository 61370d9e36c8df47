//! Counter-based Gaussian noise.
//!
//! Every path gets its own ChaCha8 stream (`set_stream(path_id)`) under the master
//! seed. Normals come from Box-Muller on pairs of 64-bit words, so normal number `m`
//! of a stream always occupies words `4 * (m / 2) .. 4 * (m / 2) + 4`. That makes
//! `(seed, stream, step)` map to one fixed increment whatever order paths run in,
//! and lets [`NoisePath::at`] jump straight to any step.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_PI: f64 = std::f64::consts::TAU;
const WORDS_PER_PAIR: u128 = 4;

#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    cached: Option<f64>,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NoiseStream { rng, cached: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn pair(&mut self) -> (f64, f64) {
        let a = self.next_u64();
        let b = self.next_u64();
        // u1 in (0, 1] keeps the log finite
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TWO_PI * u2).sin_cos();
        (r * c, r * s)
    }

    /// Standard normal. Consecutive calls consume one Box-Muller pair per two normals.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.cached.take() {
            return z;
        }
        let (z0, z1) = self.pair();
        self.cached = Some(z1);
        z0
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for o in out {
            *o = self.normal();
        }
    }

    /// Positions the stream at normal number `m`.
    pub fn seek_normal(&mut self, m: u128) {
        self.rng.set_word_pos(WORDS_PER_PAIR * (m / 2));
        self.cached = None;
        if m % 2 == 1 {
            self.normal();
        }
    }
}

/// Brownian increments of one path: step `k` uses normals `k d .. (k + 1) d` of the
/// path's stream, scaled by `sqrt(dt)`.
#[derive(Debug, Clone)]
pub struct NoisePath {
    stream: NoiseStream,
    d: usize,
    sqrt_dt: f64,
    stream_id: u64,
    step: u64,
}

impl NoisePath {
    pub fn new(seed: u64, stream_id: u64, d: usize, dt: f64) -> Self {
        NoisePath {
            stream: NoiseStream::new(seed, stream_id),
            d,
            sqrt_dt: dt.sqrt(),
            stream_id,
            step: 0,
        }
    }

    /// A path positioned at `step`.
    pub fn at(seed: u64, stream_id: u64, d: usize, dt: f64, step: u64) -> Self {
        let mut p = Self::new(seed, stream_id, d, dt);
        p.stream.seek_normal(step as u128 * d as u128);
        p.step = step;
        p
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Writes the next increment `dW` (variance `dt` per coordinate).
    pub fn next_into(&mut self, dw: &mut [f64]) {
        debug_assert_eq!(dw.len(), self.d);
        for w in dw.iter_mut() {
            *w = self.sqrt_dt * self.stream.normal();
        }
        self.step += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_se;

    #[test]
    fn same_triple_same_increment() {
        let mut a = NoisePath::new(42, 3, 3, 1e-2);
        let mut buf = vec![0.0; 3];
        let mut seq = Vec::new();
        for _ in 0..7 {
            a.next_into(&mut buf);
            seq.push(buf.clone());
        }
        for (k, expect) in seq.iter().enumerate() {
            let mut b = NoisePath::at(42, 3, 3, 1e-2, k as u64);
            b.next_into(&mut buf);
            assert_eq!(&buf, expect);
        }
        let mut c = NoisePath::new(42, 4, 3, 1e-2);
        c.next_into(&mut buf);
        assert_ne!(buf, seq[0]);
    }

    #[test]
    fn increments_have_mean_zero_and_variance_dt() {
        let dt = 0.01;
        let mut p = NoisePath::new(7, 0, 2, dt);
        let mut buf = [0.0; 2];
        let mut xs = Vec::new();
        for _ in 0..50_000 {
            p.next_into(&mut buf);
            xs.extend_from_slice(&buf);
        }
        let (m, se) = mean_se(&xs);
        assert!(m.abs() < 4.0 * se);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (v, se_v) = mean_se(&sq);
        assert!((v - dt).abs() < 4.0 * se_v, "variance {v}");
    }

    #[test]
    fn uniform_range() {
        let mut s = NoiseStream::new(1, 1);
        for _ in 0..1000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
