use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use sfnlm::bench::{
    check_reference, denoise_with, parse_methods, run_benchmark, run_house_experiment, BenchConfig,
    Method,
};
use sfnlm::io::{read_image, write_image};
use sfnlm::pipeline::sfnlm_stages;
use sfnlm::{add_gaussian_noise, forward_dft, fourier_better_map, psnr, NoiseModel, SfnlmConfig};

#[derive(Parser)]
#[command(name = "sfnlm", version, about = "Spatial, Fourier and space-frequency NL-means denoising")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a grayscale image.
    Denoise(DenoiseArgs),
    /// Add seeded white Gaussian noise to an image.
    Noise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// PSNR between a reference and a test image.
    Psnr { reference: PathBuf, test: PathBuf },
    /// Map of pixels where the Fourier filter beats spatial NL-means.
    Map {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        sigma: f64,
        #[arg(long, default_value_t = 10)]
        realizations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// PSNR benchmark over a directory of clean images.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        /// Noise levels, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "20")]
        sigma: Vec<f64>,
        #[arg(long, default_value = "nlm,fnlm,sfnlm")]
        methods: String,
        /// Noise seeds, comma separated; PSNRs are averaged over them.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// Only these image ids (file stems), comma separated.
        #[arg(long, value_delimiter = ',')]
        images: Option<Vec<String>>,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Compare against the reference sigma = 20 values; exit nonzero on a miss.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// House comparison: writes clean, noisy, nlm and sfnlm images.
    House {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "house_out")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tuning: Tuning,
    },
}

/// Overrides of the sigma-relative parameter schedule.
#[derive(Args, Clone, Default)]
struct Tuning {
    /// Patch weighting std, in pixels.
    #[arg(long)]
    a: Option<f64>,
    /// Search radius of spatial NL-means.
    #[arg(long)]
    d: Option<f64>,
    /// Annulus half-width of the Fourier filter.
    #[arg(long)]
    r: Option<f64>,
}

impl Tuning {
    fn apply(&self, cfg: &mut SfnlmConfig) {
        if let Some(a) = self.a {
            cfg.a = a;
        }
        if let Some(d) = self.d {
            cfg.d = d;
        }
        if let Some(r) = self.r {
            cfg.r = r;
        }
    }
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "sfnlm")]
    method: String,
    /// Noise std; sets h and l unless they are given explicitly.
    #[arg(long)]
    sigma: Option<f64>,
    /// Spatial filtering strength (nlm: whole filter, sfnlm: second stage).
    #[arg(long)]
    h: Option<f64>,
    /// Fourier filtering strength.
    #[arg(long)]
    l: Option<f64>,
    #[command(flatten)]
    tuning: Tuning,
    /// Also write the Fourier-stage output (sfnlm only).
    #[arg(long)]
    dump_intermediate: Option<PathBuf>,
    /// Write the log-magnitude spectrum of the input.
    #[arg(long)]
    dump_spectrum: Option<PathBuf>,
}

fn denoise(args: DenoiseArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    let sigma = match (args.sigma, args.h, args.l) {
        (Some(s), _, _) => s,
        // derive a nominal sigma from whichever strength is given
        (None, Some(h), _) if method == Method::Nlm => h,
        (None, _, Some(l)) if method == Method::Fnlm => l / 0.8,
        (None, Some(h), Some(_)) => h / 0.6,
        _ => bail!("--sigma is required unless the strengths of every stage are given"),
    };
    let mut cfg = SfnlmConfig::new(sigma);
    args.tuning.apply(&mut cfg);
    if let Some(h) = args.h {
        match method {
            Method::Nlm => cfg.baseline_h_factor = h / sigma,
            _ => cfg.h_factor = h / sigma,
        }
    }
    if let Some(l) = args.l {
        cfg.l_factor = l / sigma;
    }
    cfg.validate()?;

    let v = read_image(&args.input)?;
    if let Some(path) = &args.dump_spectrum {
        write_image(path, &forward_dft(&v).log_magnitude())?;
    }
    let out = if let Some(path) = &args.dump_intermediate {
        if method != Method::Sfnlm {
            bail!("--dump-intermediate only applies to --method sfnlm");
        }
        let stages = sfnlm_stages(&v, &cfg)?;
        write_image(path, &stages.intermediate)?;
        stages.output
    } else {
        let (out, secs) = denoise_with(method, &v, &cfg)?;
        info!("{method} took {secs:.2} s");
        out
    };
    write_image(&args.output, &out)?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Denoise(args) => denoise(args)?,
        Command::Noise {
            input,
            output,
            sigma,
            seed,
        } => {
            let u = read_image(&input)?;
            let v = add_gaussian_noise(&u, &NoiseModel::new(sigma, seed)?);
            write_image(&output, &v)?;
            if sigma > 0.0 {
                println!("psnr {:.4}", psnr(&u, &v)?);
            }
        }
        Command::Psnr { reference, test } => {
            let value = psnr(&read_image(&reference)?, &read_image(&test)?)?;
            println!("{value:.4}");
        }
        Command::Map {
            input,
            output,
            sigma,
            realizations,
            seed,
            tuning,
        } => {
            let u = read_image(&input)?;
            let mut cfg = SfnlmConfig::new(sigma);
            tuning.apply(&mut cfg);
            let map = fourier_better_map(&u, &NoiseModel::new(sigma, seed)?, realizations, &cfg)?;
            write_image(&output, &map)?;
        }
        Command::Bench {
            corpus,
            sigma,
            methods,
            seeds,
            images,
            out,
            threads,
            check,
            tuning,
        } => {
            let mut cfg = BenchConfig::new(parse_methods(&methods)?, sigma);
            cfg.seeds = seeds;
            cfg.images = images;
            cfg.threads = threads;
            tuning.apply(&mut cfg.schedule);
            let report = run_benchmark(&corpus, &cfg)?;
            report.save_csv(&out)?;
            print!("{}", report.summary_table());
            if check {
                let ids: Vec<&str> = {
                    let mut ids: Vec<&str> = report.records.iter().map(|r| r.image.as_str()).collect();
                    ids.dedup();
                    ids
                };
                let checks = check_reference(&report, &ids);
                for c in &checks {
                    println!("{c}");
                }
                if checks.is_empty() || !checks.iter().all(|c| c.passed()) {
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::House {
            input,
            out_dir,
            sigma,
            seed,
            tuning,
        } => {
            let house = read_image(&input)?;
            let mut cfg = SfnlmConfig::new(sigma);
            tuning.apply(&mut cfg);
            let exp = run_house_experiment(&house, sigma, seed, &cfg)?;
            ensure_dir(&out_dir)?;
            write_image(out_dir.join("clean.png"), &house)?;
            write_image(out_dir.join("noisy.png"), &exp.noisy)?;
            write_image(out_dir.join("nlm.png"), &exp.nlm)?;
            write_image(out_dir.join("sfnlm.png"), &exp.sfnlm)?;
            print!("{}", exp.summary());
            if !exp.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
