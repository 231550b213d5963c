use crate::error::{Error, Result};

/// Default patch radius (7x7 patches).
pub const DEFAULT_PATCH_RADIUS: usize = 3;

/// Default standard deviation of the patch weighting, in pixels.
pub const DEFAULT_PATCH_SIGMA: f64 = 2.0;

/// Normalized Gaussian weights over a `(2p+1) x (2p+1)` patch.
///
/// `w(t) = exp(-|t|^2 / (2 a^2)) / sum_t' exp(-|t'|^2 / (2 a^2))`, so the
/// weighted squared distance between two pure-noise patches has expectation
/// `2 sigma^2` whatever the patch size.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchWeights {
    radius: usize,
    weights: Vec<f64>,
}

impl PatchWeights {
    pub fn gaussian(radius: usize, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "patch weight std must be positive, got {a}"
            )));
        }
        let side = 2 * radius + 1;
        let r = radius as f64;
        let mut weights = Vec::with_capacity(side * side);
        for dy in 0..side {
            for dx in 0..side {
                let (ox, oy) = (dx as f64 - r, dy as f64 - r);
                weights.push((-(ox * ox + oy * oy) / (2.0 * a * a)).exp());
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { radius, weights })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Row-major weights, offset `(dx, dy)` at `(dy + p) * side + dx + p`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, dx: i64, dy: i64) -> f64 {
        let p = self.radius as i64;
        self.weights[((dy + p) as usize) * self.side() + (dx + p) as usize]
    }

    /// `(dx, dy, w)` for every offset, row-major.
    pub fn offsets(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let side = self.side();
        let p = self.radius as i64;
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| ((i % side) as i64 - p, (i / side) as i64 - p, w))
    }
}
