//! Space-frequency NL-means: FNLM in the Fourier domain followed by a mild
//! spatial NL-means, with parameters tied to the noise level.

use crate::error::{Error, Result};
use crate::frequency::{fnlm_filter, FrequencyParams};
use crate::image::Image;
use crate::noise::{add_gaussian_noise, NoiseModel};
use crate::patch::{DEFAULT_PATCH_RADIUS, DEFAULT_PATCH_SIGMA};
use crate::spatial::{nlm_filter, SpatialParams};
use crate::spectral::{build_half_plane, forward_dft, inverse_dft};

/// Parameter schedule, every strength being a multiple of `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfnlmConfig {
    pub sigma: f64,
    /// `l = l_factor * sigma` for the frequency stage.
    pub l_factor: f64,
    /// Annulus half-width of the frequency stage.
    pub r: f64,
    /// `h = h_factor * sigma` for the spatial stage after FNLM.
    pub h_factor: f64,
    /// `h = baseline_h_factor * sigma` for plain NL-means.
    pub baseline_h_factor: f64,
    /// Spatial search radius.
    pub d: f64,
    pub a: f64,
    pub patch_radius: usize,
}

impl SfnlmConfig {
    pub fn new(sigma: f64) -> Self {
        Self {
            sigma,
            l_factor: 0.8,
            r: 2.0,
            h_factor: 0.6,
            baseline_h_factor: 1.0,
            d: 4.0,
            a: DEFAULT_PATCH_SIGMA,
            patch_radius: DEFAULT_PATCH_RADIUS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        self.frequency_params().validate()?;
        self.spatial_params().validate()?;
        self.baseline_params().validate()
    }

    pub fn frequency_params(&self) -> FrequencyParams {
        FrequencyParams::new(self.l_factor * self.sigma, self.r)
            .with_a(self.a)
            .with_patch_radius(self.patch_radius)
    }

    /// Second (spatial) stage of the composite filter.
    pub fn spatial_params(&self) -> SpatialParams {
        SpatialParams::new(self.h_factor * self.sigma, self.d)
            .with_a(self.a)
            .with_patch_radius(self.patch_radius)
    }

    /// Stand-alone NL-means baseline.
    pub fn baseline_params(&self) -> SpatialParams {
        SpatialParams::new(self.baseline_h_factor * self.sigma, self.d)
            .with_a(self.a)
            .with_patch_radius(self.patch_radius)
    }
}

/// `F^-1(FNLM(F(v)))`.
pub fn fnlm_denoise(v: &Image, cfg: &SfnlmConfig) -> Result<Image> {
    cfg.validate()?;
    fnlm_denoise_with(v, &cfg.frequency_params())
}

/// Frequency-domain denoising with explicit parameters.
pub fn fnlm_denoise_with(v: &Image, p: &FrequencyParams) -> Result<Image> {
    let idx = build_half_plane(v.width(), v.height());
    let filtered = fnlm_filter(&forward_dft(v), p, &idx)?;
    inverse_dft(&filtered)
}

/// Both stages of the composite filter.
#[derive(Debug, Clone)]
pub struct SfnlmStages {
    /// Output of the frequency stage.
    pub intermediate: Image,
    pub output: Image,
}

pub fn sfnlm_stages(v: &Image, cfg: &SfnlmConfig) -> Result<SfnlmStages> {
    let intermediate = fnlm_denoise(v, cfg)?;
    let output = nlm_filter(&intermediate, &cfg.spatial_params())?;
    Ok(SfnlmStages {
        intermediate,
        output,
    })
}

/// `NLM(F^-1(FNLM(F(v))))`.
pub fn sfnlm_denoise(v: &Image, cfg: &SfnlmConfig) -> Result<Image> {
    sfnlm_stages(v, cfg).map(|s| s.output)
}

/// Per-pixel squared errors accumulated over noise realizations.
#[derive(Debug, Clone)]
pub struct ErrorMaps {
    pub spatial: Vec<f64>,
    pub frequency: Vec<f64>,
}

/// Accumulates `|u - NLM(v)|^2` (baseline parameters) and
/// `|u - F^-1(FNLM(F(v)))|^2` over `n` realizations, realization `i` using
/// noise seed `model.seed + i`.
pub fn accumulate_errors(
    u: &Image,
    model: &NoiseModel,
    n_realizations: usize,
    cfg: &SfnlmConfig,
) -> Result<ErrorMaps> {
    if n_realizations == 0 {
        return Err(Error::InvalidParameter(
            "at least one noise realization is required".into(),
        ));
    }
    cfg.validate()?;
    let mut maps = ErrorMaps {
        spatial: vec![0.0; u.len()],
        frequency: vec![0.0; u.len()],
    };
    for i in 0..n_realizations {
        let noise = NoiseModel::new(model.sigma, model.seed.wrapping_add(i as u64))?;
        let v = add_gaussian_noise(u, &noise);
        let spatial = nlm_filter(&v, &cfg.baseline_params())?;
        let frequency = fnlm_denoise(&v, cfg)?;
        for (k, &clean) in u.pixels().iter().enumerate() {
            maps.spatial[k] += (clean - spatial.pixels()[k]).powi(2);
            maps.frequency[k] += (clean - frequency.pixels()[k]).powi(2);
        }
    }
    Ok(maps)
}

/// White (255) where the frequency filter's accumulated error is strictly
/// smaller than the spatial one, black (0) elsewhere.
pub fn fourier_better_map(
    u: &Image,
    model: &NoiseModel,
    n_realizations: usize,
    cfg: &SfnlmConfig,
) -> Result<Image> {
    let maps = accumulate_errors(u, model, n_realizations, cfg)?;
    Ok(better_map_from(u.width(), u.height(), &maps))
}

pub fn better_map_from(width: usize, height: usize, maps: &ErrorMaps) -> Image {
    let pixels = maps
        .spatial
        .iter()
        .zip(&maps.frequency)
        .map(|(s, f)| if s > f { 255.0 } else { 0.0 })
        .collect();
    Image::from_raw(width, height, pixels)
}

/// Fraction of white pixels of a binary map inside `[x0, x0+w) x [y0, y0+h)`.
pub fn white_fraction(map: &Image, x0: usize, y0: usize, w: usize, h: usize) -> Result<f64> {
    let region = map.crop(x0, y0, w, h)?;
    Ok(region.pixels().iter().filter(|&&p| p > 127.0).count() as f64 / region.len() as f64)
}
