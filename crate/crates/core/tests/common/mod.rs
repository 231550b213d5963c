//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the filtering code of the crate.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfnlm::{Complex64, Image};

/// Uniform `[0, 1)` samples for randomized checks outside proptest.
pub struct Uniform(ChaCha8Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next()
    }

    pub fn int(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.0.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }

    pub fn image(&mut self, w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |_, _| 255.0 * self.next())
    }
}

/// Centred frequency range along an axis of length `n`.
pub fn freq_range(n: usize) -> std::ops::Range<i64> {
    let lo = -((n / 2) as i64);
    lo..lo + n as i64
}

/// Wraps a frequency into the centred range.
pub fn wrap(k: i64, n: usize) -> i64 {
    let n = n as i64;
    let lo = -(n / 2);
    (k - lo).rem_euclid(n) + lo
}

/// Full spectrum as a dense table addressed by centred coordinates.
#[derive(Clone, Debug)]
pub struct Table {
    pub w: usize,
    pub h: usize,
    data: Vec<Complex64>,
}

impl Table {
    pub fn zeros(w: usize, h: usize) -> Self {
        Self {
            w,
            h,
            data: vec![Complex64::new(0.0, 0.0); w * h],
        }
    }

    fn at(&self, kx: i64, ky: i64) -> usize {
        let col = (wrap(kx, self.w) + (self.w / 2) as i64) as usize;
        let row = (wrap(ky, self.h) + (self.h / 2) as i64) as usize;
        row * self.w + col
    }

    pub fn get(&self, kx: i64, ky: i64) -> Complex64 {
        self.data[self.at(kx, ky)]
    }

    pub fn set(&mut self, kx: i64, ky: i64, v: Complex64) {
        let i = self.at(kx, ky);
        self.data[i] = v;
    }
}

/// Textbook unitary DFT, `O((WH)^2)`.
pub fn naive_dft(v: &Image) -> Table {
    let (w, h) = v.dims();
    let norm = 1.0 / ((w * h) as f64).sqrt();
    let mut out = Table::zeros(w, h);
    for ky in freq_range(h) {
        for kx in freq_range(w) {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let phase = -2.0 * PI * (kx as f64 * x as f64 / w as f64 + ky as f64 * y as f64 / h as f64);
                    acc += v.get(x, y) * Complex64::from_polar(1.0, phase);
                }
            }
            out.set(kx, ky, acc * norm);
        }
    }
    out
}

/// Textbook unitary inverse DFT; returns real and imaginary parts.
pub fn naive_idft(t: &Table) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (t.w, t.h);
    let norm = 1.0 / ((w * h) as f64).sqrt();
    let mut re = Vec::with_capacity(w * h);
    let mut im = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for ky in freq_range(h) {
                for kx in freq_range(w) {
                    let phase = 2.0 * PI * (kx as f64 * x as f64 / w as f64 + ky as f64 * y as f64 / h as f64);
                    acc += t.get(kx, ky) * Complex64::from_polar(1.0, phase);
                }
            }
            re.push(acc.re * norm);
            im.push(acc.im * norm);
        }
    }
    (re, im)
}

/// Representatives of conjugate pairs written out case by case: every row
/// strictly above the centre except a Nyquist row, plus the non-positive
/// half of the centre row and of the Nyquist row.
pub fn half_plane_by_rule(w: usize, h: usize) -> Vec<(i64, i64)> {
    let nyquist_row = (h % 2 == 0).then(|| -((h / 2) as i64));
    let mut out = Vec::new();
    for ky in freq_range(h) {
        for kx in freq_range(w) {
            let keep = if ky == 0 || Some(ky) == nyquist_row {
                kx <= 0
            } else {
                ky < 0
            };
            if keep {
                out.push((kx, ky));
            }
        }
    }
    out
}

pub fn is_self_conjugate(kx: i64, ky: i64, w: usize, h: usize) -> bool {
    wrap(-kx, w) == kx && wrap(-ky, h) == ky
}

/// Exhaustive half-annulus: every representative whose modulus differs by
/// at most `r`.
pub fn annulus_scan(p: &[(i64, i64)], centre: (i64, i64), r: f64) -> Vec<(i64, i64)> {
    let m = |k: (i64, i64)| ((k.0 * k.0 + k.1 * k.1) as f64).sqrt();
    p.iter().copied().filter(|&k| (m(k) - m(centre)).abs() <= r).collect()
}

/// Normalized Gaussian patch weights, indexed `[dy + p][dx + p]`.
pub fn gaussian_weights(p: usize, a: f64) -> Vec<Vec<f64>> {
    let side = 2 * p + 1;
    let mut g = vec![vec![0.0; side]; side];
    let mut total = 0.0;
    for (j, row) in g.iter_mut().enumerate() {
        for (i, cell) in row.iter_mut().enumerate() {
            let (dx, dy) = (i as f64 - p as f64, j as f64 - p as f64);
            *cell = (-(dx * dx + dy * dy) / (2.0 * a * a)).exp();
            total += *cell;
        }
    }
    for row in &mut g {
        for cell in row {
            *cell /= total;
        }
    }
    g
}

/// Symmetric reflection `.. 1 0 | 0 1 .. n-1 | n-1 n-2 ..`, unfolded step by step.
pub fn reflect(mut i: i64, n: usize) -> usize {
    let n = n as i64;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// Quadruple-loop NL-means; returns output and normalizations.
pub fn naive_nlm(v: &Image, h: f64, d: f64, p: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    let (w, ht) = v.dims();
    let g = gaussian_weights(p, a);
    let p = p as i64;
    let reach = d.ceil() as i64;
    let mut out = Vec::new();
    let mut norm = Vec::new();
    for y in 0..ht as i64 {
        for x in 0..w as i64 {
            let (mut num, mut z) = (0.0, 0.0);
            for qy in (y - reach)..=(y + reach) {
                for qx in (x - reach)..=(x + reach) {
                    if qx < 0 || qy < 0 || qx >= w as i64 || qy >= ht as i64 {
                        continue;
                    }
                    let (ox, oy) = ((qx - x) as f64, (qy - y) as f64);
                    if (ox * ox + oy * oy).sqrt() > d {
                        continue;
                    }
                    let mut dist = 0.0;
                    for ty in -p..=p {
                        for tx in -p..=p {
                            let s = v.get(reflect(x + tx, w), reflect(y + ty, ht));
                            let t = v.get(reflect(qx + tx, w), reflect(qy + ty, ht));
                            dist += g[(ty + p) as usize][(tx + p) as usize] * (s - t) * (s - t);
                        }
                    }
                    let wt = (-dist / (2.0 * h * h)).exp();
                    num += wt * v.get(qx as usize, qy as usize);
                    z += wt;
                }
            }
            out.push(num / z);
            norm.push(z);
        }
    }
    (out, norm)
}

/// FNLM on a full spectrum table: filters every representative, then
/// fills the other half by conjugation. Returns the filtered table and
/// `(representative, Z)` pairs.
pub fn naive_fnlm(s: &Table, l: f64, r: f64, p: usize, a: f64) -> (Table, Vec<((i64, i64), f64)>) {
    let (w, h) = (s.w, s.h);
    let g = gaussian_weights(p, a);
    let p = p as i64;
    let reps = half_plane_by_rule(w, h);
    let mut out = Table::zeros(w, h);
    let mut norms = Vec::new();
    for &k in &reps {
        let (mut num, mut z) = (Complex64::new(0.0, 0.0), 0.0);
        for q in annulus_scan(&reps, k, r) {
            let mut dist = 0.0;
            for ty in -p..=p {
                for tx in -p..=p {
                    let diff = s.get(k.0 + tx, k.1 + ty) - s.get(q.0 + tx, q.1 + ty);
                    dist += g[(ty + p) as usize][(tx + p) as usize] * diff.norm_sqr();
                }
            }
            let wt = (-dist / (2.0 * l * l)).exp();
            num += wt * s.get(q.0, q.1);
            z += wt;
        }
        let mut val = num / z;
        if is_self_conjugate(k.0, k.1, w, h) {
            val.im = 0.0;
        }
        out.set(k.0, k.1, val);
        out.set(-k.0, -k.1, val.conj());
        norms.push((k, z));
    }
    (out, norms)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Directory holding the clean benchmark images.
pub fn corpus_dir() -> PathBuf {
    std::env::var_os("SFNLM_CORPUS")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus"))
}

/// Loads `<corpus>/<id>.pgm` or `<id>.png`, if present.
pub fn corpus_image(id: &str) -> Option<Image> {
    let dir = corpus_dir();
    ["pgm", "png"]
        .iter()
        .map(|ext| dir.join(format!("{id}.{ext}")))
        .find(|p| p.is_file())
        .map(|p| sfnlm::io::read_image(&p).expect("corpus image readable"))
}
