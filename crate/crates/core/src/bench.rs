//! PSNR benchmark harness.
//!
//! A run is one `(image, sigma, seed, method)` tuple: the clean image gets
//! seeded noise, is denoised, and scored against the original. Results are
//! written as CSV, one row per run, with the columns of [`RunRecord`] in
//! declaration order. [`CSV_FORMAT_VERSION`] is stored in every row and is
//! bumped whenever the column set changes.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::decode;
use crate::metrics::psnr;
use crate::noise::{add_gaussian_noise, NoiseModel};
use crate::pipeline::{fnlm_denoise, sfnlm_stages, SfnlmConfig};
use crate::spatial::nlm_filter;

pub const CSV_FORMAT_VERSION: u32 = 1;

/// Reference PSNRs at sigma = 20 as `(image, sfnlm, nlm)`.
pub const REFERENCE_SIGMA20: &[(&str, f64, f64)] = &[
    ("lena", 32.2, 31.6),
    ("barbara", 30.0, 29.2),
    ("house", 32.7, 32.1),
    ("mandrill", 25.9, 25.8),
    ("peppers", 30.6, 30.4),
    ("cameraman", 29.6, 29.4),
];

/// Tolerance on the reference spot checks, in dB.
pub const REFERENCE_TOLERANCE: f64 = 0.3;

/// Reference House figures at sigma = 10.
pub const HOUSE_NOISY_PSNR: f64 = 28.14;
pub const HOUSE_NLM_PSNR: f64 = 36.16;
pub const HOUSE_SFNLM_PSNR: f64 = 37.19;
pub const HOUSE_NOISY_TOLERANCE: f64 = 0.10;
pub const HOUSE_DENOISED_TOLERANCE: f64 = 0.40;
pub const HOUSE_MIN_GAIN: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nlm,
    Fnlm,
    Sfnlm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Nlm, Method::Fnlm, Method::Sfnlm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nlm => "nlm",
            Method::Fnlm => "fnlm",
            Method::Sfnlm => "sfnlm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nlm" => Ok(Method::Nlm),
            "fnlm" => Ok(Method::Fnlm),
            "sfnlm" => Ok(Method::Sfnlm),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Parses a comma-separated method list such as `nlm,fnlm,sfnlm`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Parameters actually used by one method at one noise level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MethodParams {
    pub h: Option<f64>,
    pub d: Option<f64>,
    pub l: Option<f64>,
    pub r: Option<f64>,
    pub a: f64,
    pub patch_radius: usize,
}

impl MethodParams {
    pub fn for_method(method: Method, cfg: &SfnlmConfig) -> Self {
        let (h, d, l, r) = match method {
            Method::Nlm => {
                let p = cfg.baseline_params();
                (Some(p.h), Some(p.d), None, None)
            }
            Method::Fnlm => {
                let p = cfg.frequency_params();
                (None, None, Some(p.l), Some(p.r))
            }
            Method::Sfnlm => {
                let s = cfg.spatial_params();
                let f = cfg.frequency_params();
                (Some(s.h), Some(s.d), Some(f.l), Some(f.r))
            }
        };
        Self {
            h,
            d,
            l,
            r,
            a: cfg.a,
            patch_radius: cfg.patch_radius,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub format_version: u32,
    pub image: String,
    pub sha256: String,
    pub width: usize,
    pub height: usize,
    pub method: Method,
    pub sigma: f64,
    pub seed: u64,
    pub h: Option<f64>,
    pub d: Option<f64>,
    pub l: Option<f64>,
    pub r: Option<f64>,
    pub a: f64,
    pub patch_radius: usize,
    pub noisy_psnr: f64,
    /// PSNR of the unquantized output.
    pub psnr: f64,
    /// PSNR after rounding and clamping the output to 8 bits.
    pub psnr_clipped: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DenoiseReport {
    pub records: Vec<RunRecord>,
    /// Warnings and remarks, e.g. skipped images.
    pub notes: Vec<String>,
}

impl DenoiseReport {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.records.is_empty() {
            // keep the header even without rows
            w.write_record([
                "format_version", "image", "sha256", "width", "height", "method", "sigma",
                "seed", "h", "d", "l", "r", "a", "patch_radius", "noisy_psnr", "psnr",
                "psnr_clipped", "wall_time_s",
            ])?;
        }
        for rec in &self.records {
            w.serialize(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::from(e).at(path))?;
        self.write_csv(file)
    }

    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let records = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<RunRecord>, _>>()?;
        Ok(Self {
            records,
            notes: Vec::new(),
        })
    }

    /// Mean PSNR over seeds of one `(image, method, sigma)` cell.
    pub fn mean_psnr(&self, image: &str, method: Method, sigma: f64) -> Option<f64> {
        let vals: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.image == image && r.method == method && r.sigma == sigma)
            .map(|r| r.psnr)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Human-readable table: one row per `(image, sigma)`, one column per
    /// method, mean PSNR over seeds.
    pub fn summary_table(&self) -> String {
        let methods: Vec<Method> = {
            let mut m: Vec<Method> = self.records.iter().map(|r| r.method).collect();
            m.sort();
            m.dedup();
            // composite first
            m.sort_by_key(|m| match m {
                Method::Sfnlm => 0,
                Method::Nlm => 1,
                Method::Fnlm => 2,
            });
            m
        };
        let mut cells: BTreeMap<(String, u64), BTreeMap<Method, (f64, usize)>> = BTreeMap::new();
        for r in &self.records {
            let cell = cells
                .entry((r.image.clone(), r.sigma.to_bits()))
                .or_default()
                .entry(r.method)
                .or_insert((0.0, 0));
            cell.0 += r.psnr;
            cell.1 += 1;
        }
        let mut out = String::new();
        let _ = write!(out, "{:<12} {:>6}", "image", "sigma");
        for m in &methods {
            let _ = write!(out, " {:>8}", m.name());
        }
        out.push('\n');
        for ((image, sigma_bits), row) in &cells {
            let _ = write!(out, "{:<12} {:>6}", image, f64::from_bits(*sigma_bits));
            for m in &methods {
                match row.get(m) {
                    Some((sum, n)) => {
                        let _ = write!(out, " {:>8.2}", sum / *n as f64);
                    }
                    None => {
                        let _ = write!(out, " {:>8}", "-");
                    }
                }
            }
            out.push('\n');
        }
        if self.records.is_empty() && self.notes.is_empty() {
            out.push_str("(no runs)\n");
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub sigmas: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Restrict to these image ids (file stems). `None` takes the whole corpus.
    pub images: Option<Vec<String>>,
    /// Worker threads; 0 uses all available cores.
    pub threads: usize,
    /// Parameter schedule; its `sigma` is replaced by each benchmarked level.
    pub schedule: SfnlmConfig,
}

impl BenchConfig {
    pub fn new(methods: Vec<Method>, sigmas: Vec<f64>) -> Self {
        Self {
            methods,
            sigmas,
            seeds: vec![0],
            images: None,
            threads: 0,
            schedule: SfnlmConfig::new(1.0),
        }
    }
}

/// A clean benchmark image with its provenance.
#[derive(Debug, Clone)]
pub struct CorpusImage {
    pub id: String,
    pub path: PathBuf,
    pub sha256: String,
    pub image: Image,
}

fn is_image_file(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("pgm") | Some("png")
    )
}

/// Loads the corpus directory. Unreadable files and requested ids that are
/// absent become notes rather than errors.
pub fn load_corpus(
    dir: &Path,
    only: Option<&[String]>,
    notes: &mut Vec<String>,
) -> Result<Vec<CorpusImage>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::from(e).at(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image_file(p))
        .collect();
    paths.sort();
    let mut out: Vec<CorpusImage> = Vec::new();
    for path in paths {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        if only.is_some_and(|ids| !ids.iter().any(|i| i.eq_ignore_ascii_case(&id))) {
            continue;
        }
        if out.iter().any(|c| c.id == id) {
            notes.push(format!("duplicate image id `{id}`; skipped {}", path.display()));
            continue;
        }
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                notes.push(format!("skipped {}: {e}", path.display()));
                continue;
            }
        };
        match decode(&bytes) {
            Ok(image) => out.push(CorpusImage {
                id,
                sha256: hex::encode(Sha256::digest(&bytes)),
                path,
                image,
            }),
            Err(e) => notes.push(format!("skipped {}: {e}", path.display())),
        }
    }
    if let Some(ids) = only {
        for id in ids {
            if !out.iter().any(|c| c.id.eq_ignore_ascii_case(id)) {
                notes.push(format!("image `{id}` not found in {}", dir.display()));
            }
        }
    }
    if out.is_empty() {
        notes.push(format!("no images found in {}", dir.display()));
    }
    for n in notes.iter() {
        warn!("{n}");
    }
    Ok(out)
}

/// Denoises `v` with one method; returns the output and elapsed seconds.
pub fn denoise_with(method: Method, v: &Image, cfg: &SfnlmConfig) -> Result<(Image, f64)> {
    let start = Instant::now();
    let out = match method {
        Method::Nlm => nlm_filter(v, &cfg.baseline_params())?,
        Method::Fnlm => fnlm_denoise(v, cfg)?,
        Method::Sfnlm => sfnlm_stages(v, cfg)?.output,
    };
    Ok((out, start.elapsed().as_secs_f64()))
}

fn score(clean: &Image, out: &Image) -> Result<(f64, f64)> {
    let unclipped = psnr(clean, out).unwrap_or(f64::INFINITY);
    let clipped = match psnr(clean, &out.clipped()) {
        Ok(p) => p,
        Err(Error::IdenticalImages) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok((unclipped, clipped))
}

/// Runs every `(image, sigma, seed, method)` combination on a bounded
/// worker pool. Rows come out sorted by image, sigma, seed, method.
pub fn run_benchmark(corpus: &Path, cfg: &BenchConfig) -> Result<DenoiseReport> {
    if cfg.methods.is_empty() {
        return Err(Error::InvalidParameter("no methods requested".into()));
    }
    if let Some(s) = cfg.sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {s}")));
    }
    let mut notes = Vec::new();
    let images = load_corpus(corpus, cfg.images.as_deref(), &mut notes)?;
    let jobs: Vec<(&CorpusImage, f64, u64)> = images
        .iter()
        .flat_map(|img| {
            cfg.sigmas
                .iter()
                .flat_map(move |&s| cfg.seeds.iter().map(move |&seed| (img, s, seed)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let results: Vec<Result<Vec<RunRecord>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(img, sigma, seed)| {
                let schedule = SfnlmConfig { sigma, ..cfg.schedule };
                schedule.validate()?;
                let noisy = add_gaussian_noise(&img.image, &NoiseModel::new(sigma, seed)?);
                let noisy_psnr = psnr(&img.image, &noisy).unwrap_or(f64::INFINITY);
                let mut rows = Vec::with_capacity(cfg.methods.len());
                for &method in &cfg.methods {
                    let (out, secs) = denoise_with(method, &noisy, &schedule)?;
                    let (p, pc) = score(&img.image, &out)?;
                    let mp = MethodParams::for_method(method, &schedule);
                    rows.push(RunRecord {
                        format_version: CSV_FORMAT_VERSION,
                        image: img.id.clone(),
                        sha256: img.sha256.clone(),
                        width: img.image.width(),
                        height: img.image.height(),
                        method,
                        sigma,
                        seed,
                        h: mp.h,
                        d: mp.d,
                        l: mp.l,
                        r: mp.r,
                        a: mp.a,
                        patch_radius: mp.patch_radius,
                        noisy_psnr,
                        psnr: p,
                        psnr_clipped: pc,
                        wall_time_s: secs,
                    });
                }
                Ok(rows)
            })
            .collect()
    });
    let mut records = Vec::new();
    for r in results {
        records.extend(r?);
    }
    records.sort_by(|a, b| {
        a.image
            .cmp(&b.image)
            .then(a.sigma.total_cmp(&b.sigma))
            .then(a.seed.cmp(&b.seed))
            .then(a.method.cmp(&b.method))
    });
    Ok(DenoiseReport { records, notes })
}

/// Outcome of one reference-value comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured
            .is_some_and(|m| (m - self.expected).abs() <= self.tolerance)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        match self.measured {
            Some(m) => write!(
                f,
                "[{status}] {}: {m:.2} dB (expected {:.2} +/- {:.2})",
                self.label, self.expected, self.tolerance
            ),
            None => write!(
                f,
                "[{status}] {}: not measured (expected {:.2} +/- {:.2})",
                self.label, self.expected, self.tolerance
            ),
        }
    }
}

/// Compares a sigma = 20 report against the reference NL-means and
/// SFNL-means columns for the given image ids.
pub fn check_reference(report: &DenoiseReport, images: &[&str]) -> Vec<Check> {
    let mut out = Vec::new();
    for &(name, sfnlm, nlm) in REFERENCE_SIGMA20 {
        if !images.contains(&name) {
            continue;
        }
        for (method, expected) in [(Method::Nlm, nlm), (Method::Sfnlm, sfnlm)] {
            out.push(Check {
                label: format!("{name} {method} sigma=20"),
                measured: report.mean_psnr(name, method, 20.0),
                expected,
                tolerance: REFERENCE_TOLERANCE,
            });
        }
    }
    out
}

/// Results of the House comparison at one noise level.
#[derive(Debug, Clone)]
pub struct HouseExperiment {
    pub sigma: f64,
    pub seed: u64,
    pub noisy: Image,
    pub nlm: Image,
    pub intermediate: Image,
    pub sfnlm: Image,
    pub noisy_psnr: f64,
    /// NL-means with `h = sigma` (baseline schedule).
    pub nlm_psnr: f64,
    /// NL-means with `h = 0.6 sigma`, the composite's second-stage strength.
    pub nlm_mild_psnr: f64,
    pub fnlm_psnr: f64,
    pub sfnlm_psnr: f64,
}

impl HouseExperiment {
    pub fn gain(&self) -> f64 {
        self.sfnlm_psnr - self.nlm_psnr
    }

    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check {
                label: "noisy".into(),
                measured: Some(self.noisy_psnr),
                expected: HOUSE_NOISY_PSNR,
                tolerance: HOUSE_NOISY_TOLERANCE,
            },
            Check {
                label: "nlm".into(),
                measured: Some(self.nlm_psnr),
                expected: HOUSE_NLM_PSNR,
                tolerance: HOUSE_DENOISED_TOLERANCE,
            },
            Check {
                label: "sfnlm".into(),
                measured: Some(self.sfnlm_psnr),
                expected: HOUSE_SFNLM_PSNR,
                tolerance: HOUSE_DENOISED_TOLERANCE,
            },
        ]
    }

    pub fn gain_ok(&self) -> bool {
        self.gain() >= HOUSE_MIN_GAIN
    }

    pub fn passed(&self) -> bool {
        self.gain_ok() && self.checks().iter().all(Check::passed)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("house experiment, sigma={} seed={}\n", self.sigma, self.seed);
        for c in self.checks() {
            let _ = writeln!(s, "{c}");
        }
        let _ = writeln!(s, "nlm (h=0.6 sigma): {:.2} dB", self.nlm_mild_psnr);
        let _ = writeln!(s, "fnlm stage: {:.2} dB", self.fnlm_psnr);
        let _ = writeln!(
            s,
            "[{}] sfnlm - nlm = {:.2} dB (required >= {HOUSE_MIN_GAIN})",
            if self.gain_ok() { "PASS" } else { "FAIL" },
            self.gain()
        );
        s
    }
}

pub fn run_house_experiment(
    house: &Image,
    sigma: f64,
    seed: u64,
    schedule: &SfnlmConfig,
) -> Result<HouseExperiment> {
    let cfg = SfnlmConfig { sigma, ..*schedule };
    cfg.validate()?;
    let noisy = add_gaussian_noise(house, &NoiseModel::new(sigma, seed)?);
    let nlm = nlm_filter(&noisy, &cfg.baseline_params())?;
    let nlm_mild = nlm_filter(&noisy, &cfg.spatial_params())?;
    let stages = sfnlm_stages(&noisy, &cfg)?;
    Ok(HouseExperiment {
        sigma,
        seed,
        noisy_psnr: psnr(house, &noisy)?,
        nlm_psnr: psnr(house, &nlm)?,
        nlm_mild_psnr: psnr(house, &nlm_mild)?,
        fnlm_psnr: psnr(house, &stages.intermediate)?,
        sfnlm_psnr: psnr(house, &stages.output)?,
        noisy,
        nlm,
        intermediate: stages.intermediate,
        sfnlm: stages.output,
    })
}
