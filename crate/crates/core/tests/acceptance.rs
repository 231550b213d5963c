//! Acceptance suite. Each test prints one `[PASS]` / `[FAIL]` line that is
//! visible without `--nocapture`, then asserts on the same outcome.
//!
//! Criteria 4, 5 and 7 need clean test images. They are read from the
//! directory named by `SFNLM_CORPUS`, defaulting to `<workspace>/corpus`
//! (see `scripts/fetch_corpus.py`). A missing image fails its criterion.

mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use common::*;
use sfnlm::bench::{
    check_reference, run_benchmark, run_house_experiment, BenchConfig, Method, REFERENCE_SIGMA20,
};
use sfnlm::frequency::{build_annulus_index, fnlm_half_plane};
use sfnlm::pipeline::{fourier_better_map, white_fraction};
use sfnlm::spatial::nlm_filter_with_normalization;
use sfnlm::{
    add_gaussian_noise, build_half_plane, fnlm_filter, forward_dft, inverse_dft, nlm_filter, psnr,
    reconstruct_full, Complex64, FrequencyParams, Image, NoiseModel, SfnlmConfig, SpatialParams,
};

fn verdict(criterion: u32, title: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{status}] criterion {criterion} ({title}): {detail}");
    let _ = out.flush();
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn table_diff(s: &sfnlm::Spectrum, t: &Table) -> f64 {
    let mut worst: f64 = 0.0;
    for ky in freq_range(t.h) {
        for kx in freq_range(t.w) {
            worst = worst.max((s.get(kx, ky) - t.get(kx, ky)).norm());
        }
    }
    worst
}

#[test]
fn criterion_1_oracle_equivalence() {
    let mut rng = Uniform::new(2024);
    let trials = 100;
    let (mut nlm_worst, mut fnlm_worst) = (0.0f64, 0.0f64);
    let mut annulus_mismatches = 0;
    for _ in 0..trials {
        let (w, h) = (rng.int(1, 16), rng.int(1, 16));
        let v = rng.image(w, h);
        let p = rng.int(0, 3);
        let a = rng.range(0.5, 4.0);

        let (hh, d) = (rng.range(2.0, 80.0), rng.range(1.0, 5.0));
        let out = nlm_filter(&v, &SpatialParams::new(hh, d).with_a(a).with_patch_radius(p)).unwrap();
        nlm_worst = nlm_worst.max(max_abs_diff(out.pixels(), &naive_nlm(&v, hh, d, p, a).0));

        let (l, r) = (rng.range(2.0, 200.0), rng.range(0.0, 4.0));
        let params = FrequencyParams::new(l, r).with_a(a).with_patch_radius(p);
        let idx = build_half_plane(w, h);
        let got = fnlm_filter(&forward_dft(&v), &params, &idx).unwrap();
        let (want, _) = naive_fnlm(&naive_dft(&v), l, r, p, a);
        fnlm_worst = fnlm_worst.max(table_diff(&got, &want));

        let ann = build_annulus_index(&idx, r);
        let reps = idx.entries();
        for (i, &k) in reps.iter().enumerate() {
            let got: BTreeSet<_> = ann.members(i).map(|j| reps[j]).collect();
            let want: BTreeSet<_> = annulus_scan(reps, k, r).into_iter().collect();
            if got != want {
                annulus_mismatches += 1;
            }
        }
    }
    let pass = nlm_worst <= 1e-9 && fnlm_worst <= 1e-9 && annulus_mismatches == 0;
    verdict(
        1,
        "oracle equivalence",
        pass,
        &format!(
            "{trials} random images up to 16x16; max |nlm - oracle| = {nlm_worst:.2e}, \
             max |fnlm - oracle| = {fnlm_worst:.2e}, annulus mismatches = {annulus_mismatches}"
        ),
    );
}

#[test]
fn criterion_2_spectral_correctness() {
    let mut rng = Uniform::new(77);
    let (mut roundtrip, mut parseval, mut imag, mut real_diff) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let (w, h) = (rng.int(1, 16), rng.int(1, 16));
        let v = rng.image(w, h);
        let s = forward_dft(&v);
        roundtrip = roundtrip.max(max_abs_diff(inverse_dft(&s).unwrap().pixels(), v.pixels()));
        let e: f64 = v.pixels().iter().map(|p| p * p).sum();
        parseval = parseval.max((s.energy() - e).abs() / e);

        let idx = build_half_plane(w, h);
        let half: Vec<Complex64> = (0..idx.len())
            .map(|_| Complex64::new(rng.range(-500.0, 500.0), rng.range(-500.0, 500.0)))
            .collect();
        let full = reconstruct_full(&half, &idx).unwrap();
        let mut t = Table::zeros(w, h);
        for ky in freq_range(h) {
            for kx in freq_range(w) {
                t.set(kx, ky, full.get(kx, ky));
            }
        }
        let (re, im) = naive_idft(&t);
        imag = imag.max(im.iter().fold(0.0, |m, x| m.max(x.abs())));
        real_diff = real_diff.max(max_abs_diff(inverse_dft(&full).unwrap().pixels(), &re));
    }
    let pass = roundtrip <= 1e-9 && parseval <= 1e-6 && imag <= 1e-9 && real_diff <= 1e-9;
    verdict(
        2,
        "spectral correctness",
        pass,
        &format!(
            "100 trials; roundtrip {roundtrip:.2e}, Parseval rel {parseval:.2e}, \
             max imaginary part {imag:.2e}, inverse vs oracle {real_diff:.2e}"
        ),
    );
}

#[test]
fn criterion_3_noise_psnr_calibration() {
    let (u, source) = match corpus_image("lena").filter(|u| u.dims() == (512, 512)) {
        Some(u) => (u, "lena"),
        None => (
            Image::from_fn(512, 512, |x, y| 64.0 + 0.25 * (x + y) as f64),
            "synthetic ramp",
        ),
    };
    let start = Instant::now();
    let v = add_gaussian_noise(&u, &NoiseModel::new(10.0, 0).unwrap());
    let value = psnr(&u, &v).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = (value - 28.13).abs() <= 0.10 && secs < 1.0;
    verdict(
        3,
        "noise/PSNR calibration",
        pass,
        &format!("sigma=10 on 512x512 {source}: {value:.3} dB (expected 28.13 +/- 0.10), {secs:.3} s"),
    );
}

#[test]
fn criterion_4_house_experiment() {
    let Some(house) = corpus_image("house") else {
        verdict(
            4,
            "house experiment",
            false,
            &format!("house image not found in {}", corpus_dir().display()),
        );
        return;
    };
    let exp = run_house_experiment(&house, 10.0, 0, &SfnlmConfig::new(10.0)).unwrap();
    let detail = exp
        .checks()
        .iter()
        .map(|c| c.to_string())
        .chain([
            format!("nlm h=0.6 sigma {:.2}", exp.nlm_mild_psnr),
            format!("sfnlm - nlm = {:.2} (>= 0.7)", exp.gain()),
        ])
        .collect::<Vec<_>>()
        .join("; ");
    verdict(4, "house experiment", exp.passed(), &detail);
}

#[test]
fn criterion_5_reference_spot_checks() {
    let all: Vec<String> = REFERENCE_SIGMA20.iter().map(|t| t.0.to_string()).collect();
    let mut cfg = BenchConfig::new(vec![Method::Nlm, Method::Sfnlm], vec![20.0]);
    cfg.images = Some(all.clone());
    let dir = corpus_dir();
    let report = match run_benchmark(&dir, &cfg) {
        Ok(r) => r,
        Err(e) => {
            verdict(5, "reference PSNR spot checks", false, &format!("corpus unreadable: {e}"));
            return;
        }
    };
    print!("{}", report.summary_table());

    let spot = check_reference(&report, &["lena", "barbara", "house", "peppers"]);
    let absolute_ok = spot.iter().all(|c| c.passed());

    let mut ordering = Vec::new();
    for id in &all {
        let nlm = report.mean_psnr(id, Method::Nlm, 20.0);
        let sf = report.mean_psnr(id, Method::Sfnlm, 20.0);
        ordering.push(match (nlm, sf) {
            (Some(n), Some(s)) => (format!("{id} {:+.2}", s - n), s >= n),
            _ => (format!("{id} missing"), false),
        });
    }
    let ordering_ok = ordering.iter().all(|o| o.1);

    // one-thread wall time of each 512x512 composite run
    let slowest = report
        .records
        .iter()
        .filter(|r| r.method == Method::Sfnlm && r.width * r.height <= 512 * 512)
        .map(|r| r.wall_time_s)
        .fold(0.0, f64::max);
    let perf_ok = slowest <= 30.0 * 60.0;

    let detail = format!(
        "{}; ordering sfnlm - nlm: {}; slowest 512x512 sfnlm run {slowest:.1} s",
        spot.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; "),
        ordering.iter().map(|o| o.0.clone()).collect::<Vec<_>>().join(", "),
    );
    verdict(5, "reference PSNR spot checks", (absolute_ok || ordering_ok) && perf_ok, &detail);
}

#[test]
fn criterion_6_convexity_and_normalization() {
    let mut rng = Uniform::new(5);
    let mut failures = Vec::new();
    for trial in 0..40 {
        let (w, h) = (rng.int(1, 16), rng.int(1, 16));
        let c = rng.range(0.0, 255.0);
        let flat = nlm_filter(&Image::filled(w, h, c), &SpatialParams::new(rng.range(1.0, 40.0), 4.0)).unwrap();
        if flat.pixels().iter().any(|&p| (p - c).abs() > 1e-12) {
            failures.push(format!("trial {trial}: constant image moved"));
        }

        let v = rng.image(w, h);
        let (lo, hi) = v.min_max();
        let (out, z) = nlm_filter_with_normalization(&v, &SpatialParams::new(rng.range(1.0, 80.0), 4.0)).unwrap();
        if out.pixels().iter().any(|&p| p < lo - 1e-9 || p > hi + 1e-9) {
            failures.push(format!("trial {trial}: nlm output outside input range"));
        }
        if z.iter().any(|&z| !(z > 0.0)) {
            failures.push(format!("trial {trial}: nlm Z(x) not positive"));
        }

        let s = forward_dft(&v);
        let idx = build_half_plane(w, h);
        let input = idx.restrict(&s);
        let (half, zf) = fnlm_half_plane(&s, &FrequencyParams::new(rng.range(1.0, 200.0), 2.0), &idx).unwrap();
        let bound = |f: fn(&Complex64) -> f64| {
            input.iter().map(f).fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)))
        };
        let (re, im) = (bound(|c| c.re), bound(|c| c.im));
        let tol = 1e-9 * (1.0 + re.0.abs().max(re.1.abs()));
        if half.iter().any(|c| c.re < re.0 - tol || c.re > re.1 + tol || c.im < im.0 - tol || c.im > im.1 + tol) {
            failures.push(format!("trial {trial}: fnlm coefficient outside input range"));
        }
        if zf.iter().any(|&z| !(z > 0.0)) {
            failures.push(format!("trial {trial}: fnlm Z(w) not positive"));
        }
    }
    let detail = if failures.is_empty() {
        "40 trials: constant fixed point, outputs within input extrema, Z > 0".to_string()
    } else {
        failures.join("; ")
    };
    verdict(6, "convexity/normalization", failures.is_empty(), &detail);
}

/// Regions of the 512x512 Barbara image as `(x0, y0, width, height)`:
/// the striped trouser leg and the plain wall above the table.
const BARBARA_TEXTURED: (usize, usize, usize, usize) = (240, 290, 120, 120);
const BARBARA_FLAT: (usize, usize, usize, usize) = (175, 5, 50, 60);

#[test]
fn criterion_7_fourier_better_map() {
    let Some(barbara) = corpus_image("barbara") else {
        verdict(
            7,
            "fourier-better map",
            false,
            &format!("barbara image not found in {}", corpus_dir().display()),
        );
        return;
    };
    let fits = |(x0, y0, w, h): (usize, usize, usize, usize)| {
        x0 + w <= barbara.width() && y0 + h <= barbara.height()
    };
    if !fits(BARBARA_TEXTURED) || !fits(BARBARA_FLAT) {
        verdict(
            7,
            "fourier-better map",
            false,
            &format!("barbara is {:?}; documented regions do not fit", barbara.dims()),
        );
        return;
    }
    let cfg = SfnlmConfig::new(20.0);
    let model = NoiseModel::new(20.0, 0).unwrap();
    let map = fourier_better_map(&barbara, &model, 10, &cfg).unwrap();
    let frac = |(x0, y0, w, h)| white_fraction(&map, x0, y0, w, h).unwrap();
    let (textured, flat) = (frac(BARBARA_TEXTURED), frac(BARBARA_FLAT));

    // reproducibility under a fixed seed, on a crop to keep it cheap
    let crop = barbara.crop(BARBARA_TEXTURED.0, BARBARA_TEXTURED.1, 96, 96).unwrap();
    let repro = fourier_better_map(&crop, &model, 2, &cfg).unwrap()
        == fourier_better_map(&crop, &model, 2, &cfg).unwrap();

    verdict(
        7,
        "fourier-better map",
        textured > flat && repro,
        &format!(
            "10 realizations, sigma=20: white fraction textured {textured:.3} vs flat {flat:.3}; \
             reproducible = {repro}"
        ),
    );
}
