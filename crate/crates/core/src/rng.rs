//! Reproducible, index-splittable uniform streams.
//!
//! A [`RandomSource`] is identified by a `(seed, stream)` pair. The seed keys a
//! ChaCha8 generator and the stream index selects one of its 2^64 independent
//! keystreams, so trajectory `k` of an experiment can always be replayed from
//! `(seed, k)` alone, on any platform and with any number of workers.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh source on another stream of the same seed.
    pub fn with_stream(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform variate on the open interval (0, 1).
    ///
    /// Uses the top 53 bits and offsets by half a grid step, so neither 0 nor
    /// 1 can be returned and `-ln(u)` is always finite.
    pub fn uniform(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64 + 0.5) * SCALE
    }

    /// Unit-rate exponential variate by inversion.
    pub fn exp1(&mut self) -> f64 {
        -self.uniform().ln()
    }

    /// Exponential variate with the given rate.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        self.exp1() / rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_stream_replay() {
        let mut a = RandomSource::new(42, 7);
        let mut b = RandomSource::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RandomSource::new(42, 0);
        let mut b = RandomSource::new(42, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn known_first_value_is_stable() {
        // Frozen so that a dependency bump that changes the keystream is caught.
        let mut a = RandomSource::new(0, 0);
        assert_eq!(a.next_u64(), 13_080_132_717_333_068_652);
        assert_eq!(a.next_u64(), 8_594_738_769_458_413_623);
        assert_eq!(RandomSource::new(42, 7).next_u64(), 2_370_525_664_269_707_216);
    }

    #[test]
    fn uniform_is_open_interval() {
        let mut r = RandomSource::new(1, 2);
        for _ in 0..100_000 {
            let u = r.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn pairwise_stream_correlation_is_small() {
        let n = 100_000;
        let mut a = RandomSource::new(9, 3);
        let mut b = RandomSource::new(9, 4);
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, y) = (a.uniform(), b.uniform());
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let nf = n as f64;
        let cov = sab / nf - (sa / nf) * (sb / nf);
        let va = saa / nf - (sa / nf).powi(2);
        let vb = sbb / nf - (sb / nf).powi(2);
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 0.01, "corr = {corr}");
    }
}
