//! NL-means on complex Fourier coefficients (FNLM).
//!
//! Only one representative `w` of every conjugate pair is filtered (see
//! [`HalfPlaneIndex`]); the other half of the plane follows by Hermitian
//! symmetry. Candidates for `w` are the representatives `x` on the
//! half-annulus `| |w| - |x| | <= r`, compared through 7x7 spectral patches
//! read from the full plane with wraparound:
//!
//! `d(w, x) = sum_t g(t) (|Re V(w+t) - Re V(x+t)|^2 + |Im V(w+t) - Im V(x+t)|^2)`
//!
//! and averaged with weights `exp(-d / (2 l^2))`.

use std::ops::Range;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::patch::{PatchWeights, DEFAULT_PATCH_RADIUS, DEFAULT_PATCH_SIGMA};
use crate::spatial::WEIGHT_UNDERFLOW;
use crate::spectral::{reconstruct_full, HalfPlaneIndex, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyParams {
    /// Filtering strength, in units of coefficient magnitude.
    pub l: f64,
    /// Half-width of the annulus, in frequency-grid units.
    pub r: f64,
    pub patch_radius: usize,
    pub a: f64,
}

impl FrequencyParams {
    pub fn new(l: f64, r: f64) -> Self {
        Self {
            l,
            r,
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
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::InvalidParameter(format!("l must be > 0, got {}", self.l)));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be >= 0, got {}", self.r)));
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

/// Representatives sorted by modulus, so that every half-annulus is a
/// contiguous range found by two binary searches.
#[derive(Debug, Clone)]
pub struct AnnulusIndex {
    r: f64,
    // half-plane positions, ascending (|k|^2, position)
    order: Vec<u32>,
    // moduli in sorted order
    radii: Vec<f64>,
    // sorted rank of each half-plane position
    rank: Vec<u32>,
}

pub fn build_annulus_index(idx: &HalfPlaneIndex, r: f64) -> AnnulusIndex {
    assert!(r >= 0.0, "annulus half-width must be non-negative");
    let sq = |i: usize| {
        let (kx, ky) = idx.entries()[i];
        kx * kx + ky * ky
    };
    let mut order: Vec<u32> = (0..idx.len() as u32).collect();
    order.sort_by_key(|&i| (sq(i as usize), i));
    let radii = order.iter().map(|&i| (sq(i as usize) as f64).sqrt()).collect();
    let mut rank = vec![0u32; idx.len()];
    for (k, &i) in order.iter().enumerate() {
        rank[i as usize] = k as u32;
    }
    AnnulusIndex {
        r,
        order,
        radii,
        rank,
    }
}

impl AnnulusIndex {
    pub fn half_width(&self) -> f64 {
        self.r
    }

    /// Modulus `|w|` of half-plane entry `i`.
    pub fn modulus(&self, i: usize) -> f64 {
        self.radii[self.rank[i] as usize]
    }

    /// Half-plane positions in ascending modulus order.
    pub fn sorted(&self) -> &[u32] {
        &self.order
    }

    /// Range of sorted ranks holding the half-annulus of the entry with
    /// sorted rank `k`.
    pub fn window(&self, k: usize) -> Range<usize> {
        let rw = self.radii[k];
        let r = self.r;
        let lo = self.radii.partition_point(|&rx| rw - rx > r);
        let hi = self.radii.partition_point(|&rx| rx - rw <= r);
        lo..hi
    }

    /// Half-plane positions of the half-annulus around entry `i`, in
    /// ascending modulus order.
    pub fn members(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.order[self.window(self.rank[i] as usize)]
            .iter()
            .map(|&j| j as usize)
    }
}

/// Weighted distance between the spectral patches centred at `w` and `x`
/// (centred coordinates, wrapped modulo the plane).
pub fn spectral_patch_distance(
    s: &Spectrum,
    w: (i64, i64),
    x: (i64, i64),
    weights: &PatchWeights,
) -> f64 {
    weights
        .offsets()
        .map(|(dx, dy, g)| {
            let a = s.get(w.0 + dx, w.1 + dy);
            let b = s.get(x.0 + dx, x.1 + dy);
            g * ((a.re - b.re).powi(2) + (a.im - b.im).powi(2))
        })
        .sum()
}

const LANES: usize = 8;
const LANE_BLOCKS_PER_CHECK: usize = 4;

/// Patch vectors stored contiguously in sorted order, premultiplied by the
/// square root of the patch weights and zero-padded to a multiple of
/// [`LANES`].
struct PatchTable {
    stride: usize,
    data: Vec<f64>,
}

impl PatchTable {
    fn new(s: &Spectrum, idx: &HalfPlaneIndex, ann: &AnnulusIndex, w: &PatchWeights) -> Self {
        let n = 2 * w.weights().len();
        let stride = n.div_ceil(LANES) * LANES;
        let roots: Vec<(i64, i64, f64)> =
            w.offsets().map(|(dx, dy, g)| (dx, dy, g.sqrt())).collect();
        let mut data = vec![0.0; stride * ann.order.len()];
        data.par_chunks_mut(stride)
            .zip(ann.order.par_iter())
            .for_each(|(row, &i)| {
                let (kx, ky) = idx.entries()[i as usize];
                for (t, &(dx, dy, g)) in roots.iter().enumerate() {
                    let c = s.get(kx + dx, ky + dy);
                    row[2 * t] = g * c.re;
                    row[2 * t + 1] = g * c.im;
                }
            });
        Self { stride, data }
    }

    #[inline]
    fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.stride..][..self.stride]
    }

    /// Squared distance between rows, or `None` once it exceeds `cutoff`.
    #[inline]
    fn distance(&self, a: &[f64], k: usize, cutoff: f64) -> Option<f64> {
        let b = self.row(k);
        let mut acc = [0.0f64; LANES];
        for (block, (ca, cb)) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)).enumerate() {
            for lane in 0..LANES {
                let d = ca[lane] - cb[lane];
                acc[lane] += d * d;
            }
            if (block + 1) % LANE_BLOCKS_PER_CHECK == 0 && acc.iter().sum::<f64>() > cutoff {
                return None;
            }
        }
        Some(acc.iter().sum())
    }
}

/// FNLM over the half-plane. Returns the filtered representatives (in
/// half-plane order) and their normalizations `Z(w)`.
pub fn fnlm_half_plane(
    s: &Spectrum,
    p: &FrequencyParams,
    idx: &HalfPlaneIndex,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    p.validate()?;
    if (s.width(), s.height()) != (idx.width(), idx.height()) {
        return Err(Error::DimensionMismatch(
            s.width(),
            s.height(),
            idx.width(),
            idx.height(),
        ));
    }
    let weights = p.weights()?;
    let ann = build_annulus_index(idx, p.r);
    let table = PatchTable::new(s, idx, &ann, &weights);
    let values: Vec<Complex64> = ann
        .order
        .iter()
        .map(|&i| {
            let (kx, ky) = idx.entries()[i as usize];
            s.get(kx, ky)
        })
        .collect();
    let two_l2 = 2.0 * p.l * p.l;
    let cutoff = WEIGHT_UNDERFLOW * two_l2;

    let sorted_out: Vec<(Complex64, f64)> = (0..ann.order.len())
        .into_par_iter()
        .map(|k| {
            let here = table.row(k);
            let mut re = 0.0;
            let mut im = 0.0;
            let mut z = 0.0;
            for j in ann.window(k) {
                if let Some(dist) = table.distance(here, j, cutoff) {
                    let weight = (-dist / two_l2).exp();
                    re += weight * values[j].re;
                    im += weight * values[j].im;
                    z += weight;
                }
            }
            (Complex64::new(re / z, im / z), z)
        })
        .collect();

    let mut half = vec![Complex64::new(0.0, 0.0); idx.len()];
    let mut norm = vec![0.0; idx.len()];
    for (&i, &(c, z)) in ann.order.iter().zip(&sorted_out) {
        half[i as usize] = c;
        norm[i as usize] = z;
    }
    Ok((half, norm))
}

/// FNLM filter; the output plane is rebuilt by Hermitian symmetry.
pub fn fnlm_filter(s: &Spectrum, p: &FrequencyParams, idx: &HalfPlaneIndex) -> Result<Spectrum> {
    let (half, _) = fnlm_half_plane(s, p, idx)?;
    reconstruct_full(&half, idx)
}
