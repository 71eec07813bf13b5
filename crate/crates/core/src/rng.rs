//! Counter-based reproducible random number streams.
//!
//! Every stochastic routine in the crate draws from a ChaCha8 generator
//! keyed by a `(seed, stream_id)` pair. Distinct stream ids give
//! statistically independent streams, and a `(seed, stream_id)` pair fully
//! determines the output regardless of thread count or platform, so
//! parallel replications and Monte Carlo draws stay bit-reproducible.
//!
//! Standard normals use the Box-Muller transform (fixed here so identical
//! seeds give identical datasets everywhere); standard Cauchy draws use the
//! inverse-CDF form `tan(pi * (u - 1/2))`.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream-id ranges reserved per purpose, so data generation and Monte
/// Carlo simulation never collide on the same stream of one seed.
pub mod streams {
    /// Design matrix of sample A.
    pub const DESIGN_A: u64 = 0;
    /// Design matrix of sample B.
    pub const DESIGN_B: u64 = 1;
    /// Noise of sample A.
    pub const NOISE_A: u64 = 2;
    /// Noise of sample B.
    pub const NOISE_B: u64 = 3;
    /// Coefficient draws (dense regimes).
    pub const BETA: u64 = 4;
    /// First id reserved for per-draw critical-value simulation.
    pub const MC_BASE: u64 = 1 << 40;
    /// First id reserved for per-replication seed derivation.
    pub const REP_BASE: u64 = 1 << 41;
}

/// Independent, reproducible child stream for `(seed, stream_id)`.
pub fn rng_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Derives a replication seed from an experiment seed and a replication
/// coordinate (e.g. `h`-index and repetition index packed by the caller).
pub fn derive_seed(seed: u64, coordinate: u64) -> u64 {
    rng_stream(seed, streams::REP_BASE ^ coordinate).next_u64()
}

/// Uniform draw in the open-closed interval `(0, 1]`.
#[inline]
fn uniform_oc(rng: &mut ChaCha8Rng) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / 9007199254740992.0)
}

/// Uniform draw in `[0, 1)`.
#[inline]
pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64) * (1.0 / 9007199254740992.0)
}

/// Source of standard normal variates (Box-Muller, pair-cached).
pub struct NormalSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Self { rng, spare: None }
    }

    pub fn from_stream(seed: u64, stream_id: u64) -> Self {
        Self::new(rng_stream(seed, stream_id))
    }

    /// One standard normal draw.
    pub fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = uniform_oc(&mut self.rng);
        let u2 = uniform(&mut self.rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Fills a slice with standard normals.
    pub fn fill(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.next();
        }
    }

    /// One standard Cauchy draw via `tan(pi (u - 1/2))`.
    pub fn next_cauchy(&mut self) -> f64 {
        // u = 0 would map to -inf; the shifted uniform avoids both endpoints.
        let u = uniform_oc(&mut self.rng) - 0.5 / 9007199254740992.0;
        (std::f64::consts::PI * (u - 0.5)).tan()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_doubles() {
        let mut a = NormalSource::from_stream(42, 7);
        let mut b = NormalSource::from_stream(42, 7);
        for _ in 0..100 {
            assert_eq!(a.next().to_bits(), b.next().to_bits());
        }
    }

    #[test]
    fn different_streams_differ() {
        let mut a = NormalSource::from_stream(42, 7);
        let mut b = NormalSource::from_stream(42, 8);
        let mut any_diff = false;
        for _ in 0..100 {
            if a.next().to_bits() != b.next().to_bits() {
                any_diff = true;
            }
        }
        assert!(any_diff);
    }

    #[test]
    fn normal_mean_within_four_se() {
        let mut src = NormalSource::from_stream(1, 0);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += src.next();
        }
        let mean = sum / n as f64;
        // SE = 1/sqrt(n) = 1e-3; 4 SE = 0.004.
        assert!(mean.abs() < 0.004, "mean {mean}");
    }

    #[test]
    fn cauchy_median_and_iqr() {
        let mut src = NormalSource::from_stream(3, 0);
        let n = 1_000_000usize;
        let mut draws: Vec<f64> = (0..n).map(|_| src.next_cauchy()).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = draws[n / 2];
        let q1 = draws[n / 4];
        let q3 = draws[3 * n / 4];
        assert!(median.abs() < 0.005, "median {median}");
        assert!(((q3 - q1) - 2.0).abs() < 0.01, "iqr {}", q3 - q1);
    }
}
