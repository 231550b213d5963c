//! Unitary 2D DFT with centred frequency indexing, and the half-plane
//! bookkeeping used to rebuild the spectrum of a real image.
//!
//! Frequencies are addressed by centred integer coordinates
//! `kx in [-floor(W/2), ceil(W/2) - 1]`, `ky` likewise, with DC at `(0, 0)`.
//! Any integer pair is accepted by the accessors and wrapped modulo the
//! dimensions. Both transforms carry a `1 / sqrt(W H)` factor, so energy and
//! white-noise variance are preserved.

pub use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::image::Image;

/// Relative tolerance for the Hermitian check in [`inverse_dft`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// Complex spectrum stored row-major in centred order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(width: usize, height: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if width == 0 || height == 0 || coeffs.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a {width}x{height} spectrum",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite spectral coefficient".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            coeffs,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![Complex64::new(0.0, 0.0); width * height])
            .expect("positive dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Coefficients in centred row-major order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Storage slot of `(kx, ky)`, wrapping both coordinates.
    #[inline]
    pub fn slot(&self, kx: i64, ky: i64) -> usize {
        let col = (kx + (self.width / 2) as i64).rem_euclid(self.width as i64) as usize;
        let row = (ky + (self.height / 2) as i64).rem_euclid(self.height as i64) as usize;
        row * self.width + col
    }

    /// Centred coordinates of a storage slot.
    #[inline]
    pub fn coord(&self, slot: usize) -> (i64, i64) {
        let (row, col) = (slot / self.width, slot % self.width);
        (
            col as i64 - (self.width / 2) as i64,
            row as i64 - (self.height / 2) as i64,
        )
    }

    #[inline]
    pub fn get(&self, kx: i64, ky: i64) -> Complex64 {
        self.coeffs[self.slot(kx, ky)]
    }

    pub fn set(&mut self, kx: i64, ky: i64, value: Complex64) {
        let s = self.slot(kx, ky);
        self.coeffs[s] = value;
    }

    /// Total energy `sum |c|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|c(k) - conj(c(-k))|` and the coordinate where it occurs.
    pub fn hermitian_deviation(&self) -> (f64, (i64, i64)) {
        let mut worst = (0.0, (0, 0));
        for slot in 0..self.coeffs.len() {
            let (kx, ky) = self.coord(slot);
            let dev = (self.coeffs[slot] - self.get(-kx, -ky).conj()).norm();
            if dev > worst.0 {
                worst = (dev, (kx, ky));
            }
        }
        worst
    }

    /// `log(1 + |c|)` rescaled to `[0, 255]`, DC at the image centre.
    pub fn log_magnitude(&self) -> Image {
        let logs: Vec<f64> = self.coeffs.iter().map(|c| c.norm().ln_1p()).collect();
        let max = logs.iter().cloned().fold(0.0, f64::max);
        let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
        Image::from_raw(
            self.width,
            self.height,
            logs.iter().map(|l| l * scale).collect(),
        )
    }
}

fn fft_rows(data: &mut [Complex64], width: usize, fft: &dyn Fft<f64>) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(width) {
        fft.process_with_scratch(row, &mut scratch);
    }
}

fn transpose(data: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = data[y * width + x];
        }
    }
    out
}

/// Unnormalized 2D DFT in natural (uncentred) order.
fn fft_2d(data: &mut Vec<Complex64>, width: usize, height: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    fft_rows(data, width, row_fft.as_ref());
    let mut t = transpose(data, width, height);
    fft_rows(&mut t, height, col_fft.as_ref());
    *data = transpose(&t, height, width);
}

/// Unitary forward DFT, `v^(k) = (W H)^-1/2 sum_x v(x) exp(-2 pi i <k, x / N>)`.
pub fn forward_dft(v: &Image) -> Spectrum {
    let (w, h) = v.dims();
    let mut data: Vec<Complex64> = v.pixels().iter().map(|&p| Complex64::new(p, 0.0)).collect();
    fft_2d(&mut data, w, h, false);
    let norm = 1.0 / ((w * h) as f64).sqrt();
    let mut out = Spectrum::zeros(w, h);
    for (y, row) in data.chunks_exact(w).enumerate() {
        for (x, c) in row.iter().enumerate() {
            let s = out.slot(x as i64, y as i64);
            out.coeffs[s] = c * norm;
        }
    }
    out
}

/// Unitary inverse DFT of a Hermitian spectrum.
///
/// Fails with [`Error::NonHermitian`] when `|c(k) - conj(c(-k))|` exceeds
/// `1e-9 * max(1, max |c|)` anywhere. Residual imaginary parts are dropped.
pub fn inverse_dft(s: &Spectrum) -> Result<Image> {
    let (w, h) = (s.width, s.height);
    let scale = s.coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let (deviation, (kx, ky)) = s.hermitian_deviation();
    if deviation > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NonHermitian { kx, ky, deviation });
    }
    let mut data = vec![Complex64::new(0.0, 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            data[y * w + x] = s.get(x as i64, y as i64);
        }
    }
    fft_2d(&mut data, w, h, true);
    let norm = 1.0 / ((w * h) as f64).sqrt();
    Ok(Image::from_raw(
        w,
        h,
        data.iter().map(|c| c.re * norm).collect(),
    ))
}

/// One representative per conjugate pair of frequencies.
///
/// The representative of `{k, -k}` is the one that is smaller in
/// `(ky, kx)` lexicographic order of centred coordinates. This yields all of
/// `ky < 0`, the `kx <= 0` half of the `ky = 0` line and, for even heights,
/// the `kx <= 0` half of the Nyquist row `ky = -H/2`.
#[derive(Debug, Clone)]
pub struct HalfPlaneIndex {
    width: usize,
    height: usize,
    entries: Vec<(i64, i64)>,
    self_conjugate: Vec<bool>,
    // per storage slot: (representative position in `entries`, conjugated?)
    mirror: Vec<(u32, bool)>,
}

pub fn build_half_plane(width: usize, height: usize) -> HalfPlaneIndex {
    assert!(width > 0 && height > 0, "positive dimensions required");
    let grid = Spectrum::zeros(width, height);
    let n = width * height;
    let mut entries = Vec::with_capacity(n / 2 + 2);
    let mut self_conjugate = Vec::with_capacity(n / 2 + 2);
    let mut position = vec![u32::MAX; n];
    for slot in 0..n {
        let (kx, ky) = grid.coord(slot);
        let mirror = grid.coord(grid.slot(-kx, -ky));
        if (ky, kx) <= (mirror.1, mirror.0) {
            position[slot] = entries.len() as u32;
            entries.push((kx, ky));
            self_conjugate.push(mirror == (kx, ky));
        }
    }
    let mirror = (0..n)
        .map(|slot| {
            if position[slot] != u32::MAX {
                (position[slot], false)
            } else {
                let (kx, ky) = grid.coord(slot);
                (position[grid.slot(-kx, -ky)], true)
            }
        })
        .collect();
    HalfPlaneIndex {
        width,
        height,
        entries,
        self_conjugate,
        mirror,
    }
}

impl HalfPlaneIndex {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Representatives in `(ky, kx)` order.
    pub fn entries(&self) -> &[(i64, i64)] {
        &self.entries
    }

    pub fn is_self_conjugate(&self, i: usize) -> bool {
        self.self_conjugate[i]
    }

    pub fn self_conjugate_flags(&self) -> &[bool] {
        &self.self_conjugate
    }

    /// Representative of `(kx, ky)` and whether the value there is the
    /// conjugate of the representative's.
    pub fn mirror_of(&self, kx: i64, ky: i64) -> (usize, bool) {
        let col = (kx + (self.width / 2) as i64).rem_euclid(self.width as i64) as usize;
        let row = (ky + (self.height / 2) as i64).rem_euclid(self.height as i64) as usize;
        let (i, c) = self.mirror[row * self.width + col];
        (i as usize, c)
    }

    /// Values of `s` at the representatives.
    pub fn restrict(&self, s: &Spectrum) -> Vec<Complex64> {
        self.entries.iter().map(|&(kx, ky)| s.get(kx, ky)).collect()
    }
}

/// Rebuilds the full Hermitian plane from one value per representative.
///
/// Self-conjugate representatives have their imaginary part forced to zero.
pub fn reconstruct_full(half: &[Complex64], idx: &HalfPlaneIndex) -> Result<Spectrum> {
    if half.len() != idx.len() {
        return Err(Error::InvalidParameter(format!(
            "{} half-plane values for {} representatives",
            half.len(),
            idx.len()
        )));
    }
    let coeffs = idx
        .mirror
        .iter()
        .map(|&(i, conj)| {
            let i = i as usize;
            let v = if idx.self_conjugate[i] {
                Complex64::new(half[i].re, 0.0)
            } else {
                half[i]
            };
            if conj {
                v.conj()
            } else {
                v
            }
        })
        .collect();
    Spectrum::new(idx.width, idx.height, coeffs)
}
