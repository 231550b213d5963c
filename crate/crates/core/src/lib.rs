//! Non-local means denoising in the spatial domain, in the Fourier domain,
//! and the composition of the two (space-frequency NL-means).
//!
//! The crate is organised bottom-up:
//!
//! - [`image`], [`noise`], [`metrics`] and [`io`] hold the raster type,
//!   seeded Gaussian noise, PSNR and PGM/PNG file access.
//! - [`spectral`] provides the unitary centred 2D DFT together with the
//!   half-plane bookkeeping needed to rebuild a Hermitian spectrum.
//! - [`spatial`] is the classical NL-means filter on a Euclidean-disc
//!   search zone; [`frequency`] is the same filter applied to complex DFT
//!   coefficients with half-annulus search zones.
//! - [`pipeline`] chains them and [`bench`] runs PSNR benchmarks.

pub mod bench;
pub mod error;
pub mod frequency;
pub mod image;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod patch;
pub mod pipeline;
pub mod spatial;
pub mod spectral;

pub use error::{Error, Result};
pub use frequency::{fnlm_filter, AnnulusIndex, FrequencyParams};
pub use image::Image;
pub use metrics::{mse, psnr};
pub use noise::{add_gaussian_noise, NoiseModel};
pub use patch::PatchWeights;
pub use pipeline::{fnlm_denoise, fourier_better_map, sfnlm_denoise, SfnlmConfig};
pub use spatial::{nlm_filter, SpatialParams};
pub use spectral::{build_half_plane, Complex64, forward_dft, inverse_dft, reconstruct_full, HalfPlaneIndex, Spectrum};
