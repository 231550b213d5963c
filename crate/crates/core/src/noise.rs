//! Seeded additive white Gaussian noise.
//!
//! The generator is fully determined by the seed:
//!
//! 1. A ChaCha20 stream cipher RNG is keyed with `ChaCha20Rng::seed_from_u64(seed)`.
//! 2. Each uniform draw takes the top 53 bits of `next_u64()`; `u1` is
//!    `(bits + 1) * 2^-53` in `(0, 1]`, `u2` is `bits * 2^-53` in `[0, 1)`.
//! 3. Box–Muller turns each `(u1, u2)` pair into two independent normals,
//!    `sqrt(-2 ln u1) * cos(2 pi u2)` then `sqrt(-2 ln u1) * sin(2 pi u2)`,
//!    consumed in that order.
//! 4. Pixels are visited row-major, so the noise field depends only on the
//!    seed and the image size, never on the thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(Self { sigma, seed })
    }
}

/// Standard normal sampler (ChaCha20 + Box–Muller).
pub struct GaussianSampler {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform_bits(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let u1 = (self.uniform_bits() + 1.0) * SCALE;
        let u2 = self.uniform_bits() * SCALE;
        let radius = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(radius * sin);
        radius * cos
    }
}

/// Returns `u + b` with `b` i.i.d. `N(0, sigma^2)`. No clipping is applied.
pub fn add_gaussian_noise(u: &Image, model: &NoiseModel) -> Image {
    if model.sigma == 0.0 {
        return u.clone();
    }
    let mut sampler = GaussianSampler::new(model.seed);
    let pixels = u
        .pixels()
        .iter()
        .map(|&p| p + model.sigma * sampler.next_standard())
        .collect();
    Image::from_raw(u.width(), u.height(), pixels)
}
