//! Reproducible random streams and the gamma / normal samplers built on them.
//!
//! A [`RandomStream`] is a ChaCha12 generator keyed by `(seed, stream_id)`.
//! Equal keys give identical sequences; distinct stream ids select disjoint
//! keystream counters, so substreams handed to different workers are
//! independent by construction and results cannot depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream {
            seed,
            stream_id,
            rng,
        }
    }

    /// A fresh stream with the same seed and a different substream selector,
    /// unaffected by how much of `self` has been consumed.
    pub fn substream(&self, stream_id: u64) -> Self {
        RandomStream::new(self.seed, stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }

    /// Uniform draw on (0, 1), used by test oracles.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

/// One draw from Gamma(shape, scale). The chi-square χ²_d is the special case
/// `shape = d/2, scale = 2`, valid for non-integer degrees of freedom.
pub fn sample_gamma(shape: f64, scale: f64, stream: &mut RandomStream) -> Result<f64> {
    if !(shape > 0.0) || !(scale > 0.0) {
        return Err(Error::domain(format!(
            "sample_gamma requires positive parameters, got shape = {shape}, scale = {scale}"
        )));
    }
    let dist = Gamma::new(shape, scale)
        .map_err(|e| Error::domain(format!("gamma parameters rejected: {e}")))?;
    Ok(dist.sample(stream.rng()))
}

/// One draw from N(mean, sd²).
pub fn sample_normal(mean: f64, sd: f64, stream: &mut RandomStream) -> Result<f64> {
    if !(sd > 0.0) {
        return Err(Error::domain(format!(
            "sample_normal requires sd > 0, got {sd}"
        )));
    }
    let dist = Normal::new(mean, sd)
        .map_err(|e| Error::domain(format!("normal parameters rejected: {e}")))?;
    Ok(dist.sample(stream.rng()))
}
