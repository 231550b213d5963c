//! Real-valued grayscale raster.

use crate::error::{Error, Result};

/// Grayscale image with `f64` samples stored row-major.
///
/// Samples nominally live in `[0, 255]` but are never clipped while
/// processing; quantization only happens when writing a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} samples for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidImage(format!(
                "non-finite sample at ({}, {})",
                i % width,
                i / width
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image with every sample set to `value`.
    ///
    /// # Panics
    ///
    /// Panics on zero dimensions or a non-finite value.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("valid constant image")
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// # Panics
    ///
    /// Panics on zero dimensions or if `f` yields a non-finite value.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels).expect("valid generated image")
    }

    /// Wraps filter output whose samples are finite by construction.
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        debug_assert!(pixels.iter().all(|p| p.is_finite()));
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn same_dims(&self, other: &Image) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            })
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Population variance of the samples.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.pixels.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / self.pixels.len() as f64
    }

    /// Copy of the rectangle `[x0, x0 + w) x [y0, y0 + h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        Ok(Image::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y)))
    }

    /// Samples rounded half-up and clamped to `[0, 255]`.
    pub fn quantized(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| quantize(p)).collect()
    }

    /// Same image after 8-bit quantization, as `f64` again.
    pub fn clipped(&self) -> Image {
        Image::from_raw(
            self.width,
            self.height,
            self.pixels.iter().map(|&p| quantize(p) as f64).collect(),
        )
    }
}

#[inline]
pub(crate) fn quantize(p: f64) -> u8 {
    (p + 0.5).floor().clamp(0.0, 255.0) as u8
}
