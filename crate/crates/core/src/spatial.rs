//! Classical NL-means on a Euclidean-disc search zone.
//!
//! `out(x) = sum_{y in D(x)} w(x, y) v(y) / Z(x)` with
//! `w(x, y) = exp(-||V(x) - V(y)||^2_a / (2 h^2))`, where `D(x)` is the set of
//! pixels at Euclidean distance at most `d` from `x`, clipped to the image,
//! and `||.||_a` is the Gaussian-weighted patch norm of [`PatchWeights`].
//! Patches that cross the border read mirrored samples (`.. 2 1 0 | 0 1 2 ..`).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::patch::{PatchWeights, DEFAULT_PATCH_RADIUS, DEFAULT_PATCH_SIGMA};

/// Distance beyond which `exp(-distance / (2 h^2))` is exactly zero in `f64`,
/// expressed as a multiple of `2 h^2`.
pub(crate) const WEIGHT_UNDERFLOW: f64 = 746.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialParams {
    /// Filtering strength, in gray levels.
    pub h: f64,
    /// Search radius, in pixels.
    pub d: f64,
    pub patch_radius: usize,
    /// Std of the patch weighting, in pixels.
    pub a: f64,
}

impl SpatialParams {
    pub fn new(h: f64, d: f64) -> Self {
        Self {
            h,
            d,
            patch_radius: DEFAULT_PATCH_RADIUS,
            a: DEFAULT_PATCH_SIGMA,
        }
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_patch_radius(mut self, patch_radius: usize) -> Self {
        self.patch_radius = patch_radius;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("h must be > 0, got {}", self.h)));
        }
        if !(self.d >= 1.0 && self.d.is_finite()) {
            return Err(Error::InvalidParameter(format!("d must be >= 1, got {}", self.d)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a must be > 0, got {}", self.a)));
        }
        Ok(())
    }

    pub fn weights(&self) -> Result<PatchWeights> {
        PatchWeights::gaussian(self.patch_radius, self.a)
    }
}

/// Half-sample symmetric reflection of `i` into `[0, n)`.
#[inline]
pub(crate) fn mirror(i: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = i.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Search offsets `(dx, dy)` with `dx^2 + dy^2 <= d^2`, ordered by `dy` then `dx`.
pub fn disc_offsets(d: f64) -> Vec<(i64, i64)> {
    let reach = d.floor() as i64;
    let mut out = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            if ((dx * dx + dy * dy) as f64) <= d * d {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Gaussian-weighted squared distance between the patches centred at `x`
/// and `y` (both `(column, row)`).
pub fn patch_distance(v: &Image, x: (usize, usize), y: (usize, usize), w: &PatchWeights) -> f64 {
    let (width, height) = v.dims();
    w.offsets()
        .map(|(dx, dy, wt)| {
            let a = v.get(
                mirror(x.0 as i64 + dx, width),
                mirror(x.1 as i64 + dy, height),
            );
            let b = v.get(
                mirror(y.0 as i64 + dx, width),
                mirror(y.1 as i64 + dy, height),
            );
            wt * (a - b) * (a - b)
        })
        .sum()
}

/// Image padded by `pad` mirrored samples on every side.
struct Padded {
    stride: usize,
    data: Vec<f64>,
}

impl Padded {
    fn new(v: &Image, pad: usize) -> Self {
        let (w, h) = v.dims();
        let stride = w + 2 * pad;
        let mut data = Vec::with_capacity(stride * (h + 2 * pad));
        for py in 0..h + 2 * pad {
            let y = mirror(py as i64 - pad as i64, h);
            for px in 0..stride {
                data.push(v.get(mirror(px as i64 - pad as i64, w), y));
            }
        }
        Self { stride, data }
    }

    /// Distance between patches whose top-left corners in padded
    /// coordinates are `a` and `b`, or `None` once it exceeds `cutoff`.
    #[inline]
    fn distance(&self, a: usize, b: usize, w: &PatchWeights, cutoff: f64) -> Option<f64> {
        let side = w.side();
        let mut acc = 0.0;
        for (r, wrow) in w.weights().chunks_exact(side).enumerate() {
            let ra = &self.data[a + r * self.stride..][..side];
            let rb = &self.data[b + r * self.stride..][..side];
            for ((&pa, &pb), &wt) in ra.iter().zip(rb).zip(wrow) {
                let diff = pa - pb;
                acc += wt * diff * diff;
            }
            if acc > cutoff {
                return None;
            }
        }
        Some(acc)
    }
}

/// NL-means output together with the normalization `Z(x)` of every pixel.
pub fn nlm_filter_with_normalization(v: &Image, p: &SpatialParams) -> Result<(Image, Vec<f64>)> {
    p.validate()?;
    let w = p.weights()?;
    let (width, height) = v.dims();
    let pad = p.patch_radius;
    let padded = Padded::new(v, pad);
    let offsets = disc_offsets(p.d);
    let two_h2 = 2.0 * p.h * p.h;
    let cutoff = WEIGHT_UNDERFLOW * two_h2;
    let src = v.pixels();

    let mut out = vec![0.0; width * height];
    let mut norm = vec![0.0; width * height];
    out.par_chunks_mut(width)
        .zip(norm.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, (out_row, norm_row))| {
            for x in 0..width {
                // padded top-left corner of the patch centred at (x, y)
                let here = y * padded.stride + x;
                let mut sum = 0.0;
                let mut z = 0.0;
                for &(dx, dy) in &offsets {
                    let (qx, qy) = (x as i64 + dx, y as i64 + dy);
                    if qx < 0 || qy < 0 || qx >= width as i64 || qy >= height as i64 {
                        continue;
                    }
                    let (qx, qy) = (qx as usize, qy as usize);
                    let there = qy * padded.stride + qx;
                    if let Some(dist) = padded.distance(here, there, &w, cutoff) {
                        let weight = (-dist / two_h2).exp();
                        sum += weight * src[qy * width + qx];
                        z += weight;
                    }
                }
                out_row[x] = sum / z;
                norm_row[x] = z;
            }
        });
    Ok((Image::from_raw(width, height, out), norm))
}

/// Spatial NL-means filter.
pub fn nlm_filter(v: &Image, p: &SpatialParams) -> Result<Image> {
    nlm_filter_with_normalization(v, p).map(|(img, _)| img)
}
