use crate::error::{Error, Result};
use crate::image::Image;

/// Peak value used for PSNR, whatever the actual dynamic range.
pub const PEAK: f64 = 255.0;

/// Mean squared error over all pixels.
pub fn mse(u: &Image, w: &Image) -> Result<f64> {
    u.same_dims(w)?;
    let sum: f64 = u
        .pixels()
        .iter()
        .zip(w.pixels())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / u.len() as f64)
}

/// Peak signal-to-noise ratio in dB, `10 log10(255^2 / MSE)`.
///
/// Returns [`Error::IdenticalImages`] when the MSE is zero; callers that
/// want `+inf` can match on it.
pub fn psnr(u: &Image, w: &Image) -> Result<f64> {
    let m = mse(u, w)?;
    if m == 0.0 {
        return Err(Error::IdenticalImages);
    }
    Ok(10.0 * (PEAK * PEAK / m).log10())
}
