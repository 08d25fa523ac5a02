//! Print-and-scan channel simulation.
//!
//! The digital image goes through the device point spread function (two
//! cascaded Gaussians), picks up edge-dependent noise from a high-pass copy of
//! itself, passes the responsivity curve
//!
//! ```text
//! K(x) = omega * max(x - beta_x, 0)^gamma + beta_k + N2(x)
//! ```
//!
//! and is finally resampled and quantized. All noise comes from the
//! counter-based generator in [`crate::rng`], so the output is a pure function
//! of the pixels and [`PnsParams`] (seed included).

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{FloatRaster, Raster};
use crate::rng::{self, NoiseField, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct PnsParams {
    /// Contrast/brightness gain.
    pub omega: f64,
    /// Input colour offset.
    pub beta_x: f64,
    /// Output colour offset.
    pub beta_k: f64,
    /// Overall system gamma.
    pub gamma: f64,
    /// Printer PSF kernel size (odd).
    pub k1: usize,
    /// Scanner PSF kernel size (odd).
    pub k2: usize,
    pub sigma1: f64,
    pub sigma2: f64,
    /// Standard deviation multiplier of the edge noise N1.
    pub edge_noise_std: f64,
    /// Standard deviation of N2 at black; falls linearly to 0 at white.
    pub dark_noise_scale: f64,
    /// Maximum global sampling displacement in pixels.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for PnsParams {
    fn default() -> Self {
        PnsParams {
            omega: 15.5,
            beta_x: 20.0,
            beta_k: 20.0,
            gamma: 0.5,
            k1: 3,
            k2: 3,
            sigma1: 1.2,
            sigma2: 1.2,
            edge_noise_std: 0.02,
            dark_noise_scale: 2.0,
            jitter: 0.0,
            seed: 0,
        }
    }
}

impl PnsParams {
    pub fn with_seed(seed: u64) -> Self {
        PnsParams {
            seed,
            ..PnsParams::default()
        }
    }

    /// Default device parameters with both noise terms switched off.
    pub fn noiseless() -> Self {
        PnsParams {
            edge_noise_std: 0.0,
            dark_noise_scale: 0.0,
            ..PnsParams::default()
        }
    }

    /// Parameters under which every stage is the identity.
    pub fn neutral() -> Self {
        PnsParams {
            omega: 1.0,
            beta_x: 0.0,
            beta_k: 0.0,
            gamma: 1.0,
            k1: 1,
            k2: 1,
            edge_noise_std: 0.0,
            dark_noise_scale: 0.0,
            jitter: 0.0,
            ..PnsParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, k) in [("k1", self.k1), ("k2", self.k2)] {
            if k == 0 || k % 2 == 0 {
                return bad(format!("{name} must be odd and >= 1, got {k}"));
            }
        }
        for (name, v) in [
            ("omega", self.omega),
            ("beta_x", self.beta_x),
            ("beta_k", self.beta_k),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("edge_noise_std", self.edge_noise_std),
            ("dark_noise_scale", self.dark_noise_scale),
            ("jitter", self.jitter),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
            _ => Error::io(path, e),
        })?;
        let mut params = PnsParams::default();
        params.apply_config(&text)?;
        params.validate()?;
        Ok(params)
    }

    /// Sets one field by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Parse(format!("invalid value '{v}' for {key}")))
        }
        match key {
            "omega" => self.omega = num(key, value)?,
            "beta_x" => self.beta_x = num(key, value)?,
            "beta_k" => self.beta_k = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "k1" => self.k1 = num(key, value)?,
            "k2" => self.k2 = num(key, value)?,
            "sigma1" => self.sigma1 = num(key, value)?,
            "sigma2" => self.sigma2 = num(key, value)?,
            "edge_noise_std" => self.edge_noise_std = num(key, value)?,
            "dark_noise_scale" => self.dark_noise_scale = num(key, value)?,
            "jitter" => self.jitter = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::Parse(format!("unknown parameter '{key}'"))),
        }
        Ok(())
    }

    pub fn to_config(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "omega={}", self.omega);
        let _ = writeln!(s, "beta_x={}", self.beta_x);
        let _ = writeln!(s, "beta_k={}", self.beta_k);
        let _ = writeln!(s, "gamma={}", self.gamma);
        let _ = writeln!(s, "k1={}", self.k1);
        let _ = writeln!(s, "k2={}", self.k2);
        let _ = writeln!(s, "sigma1={}", self.sigma1);
        let _ = writeln!(s, "sigma2={}", self.sigma2);
        let _ = writeln!(s, "edge_noise_std={}", self.edge_noise_std);
        let _ = writeln!(s, "dark_noise_scale={}", self.dark_noise_scale);
        let _ = writeln!(s, "jitter={}", self.jitter);
        let _ = writeln!(s, "seed={}", self.seed);
        s
    }
}

/// Normalized 1-D Gaussian of odd length `size`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as f64;
    let raw: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

#[derive(Clone, Copy)]
enum Axis {
    Horizontal,
    Vertical,
}

/// 1-D convolution along one axis with replicated borders.
fn convolve_axis(f: &FloatRaster, kernel: &[f64], axis: Axis) -> FloatRaster {
    let (w, h, ch) = (f.width(), f.height(), f.channels());
    let r = (kernel.len() / 2) as isize;
    let src = f.data();
    let mut out = FloatRaster::zeros_like(f);
    out.data_mut()
        .par_chunks_mut(w * ch)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..w {
                for c in 0..ch {
                    let mut acc = 0.0;
                    for (k, &g) in kernel.iter().enumerate() {
                        let off = k as isize - r;
                        let (sx, sy) = match axis {
                            Axis::Horizontal => ((x as isize + off).clamp(0, w as isize - 1) as usize, y),
                            Axis::Vertical => (x, (y as isize + off).clamp(0, h as isize - 1) as usize),
                        };
                        acc += g * src[(sy * w + sx) * ch + c];
                    }
                    row[x * ch + c] = acc;
                }
            }
        });
    out
}

/// Separable Gaussian blur of size `size`, replicated borders.
pub fn gaussian_blur(f: &FloatRaster, size: usize, sigma: f64) -> Result<FloatRaster> {
    if size > f.width() || size > f.height() {
        return Err(Error::InvalidParameter(format!(
            "kernel size {size} exceeds image {}x{}",
            f.width(),
            f.height()
        )));
    }
    if size == 1 {
        return Ok(f.clone());
    }
    let g = gaussian_kernel(size, sigma);
    Ok(convolve_axis(
        &convolve_axis(f, &g, Axis::Horizontal),
        &g,
        Axis::Vertical,
    ))
}

/// Printer PSF followed by scanner PSF.
pub fn psf_blur(f: &FloatRaster, params: &PnsParams) -> Result<FloatRaster> {
    params.validate()?;
    let printed = gaussian_blur(f, params.k1, params.sigma1)?;
    gaussian_blur(&printed, params.k2, params.sigma2)
}

/// Blurs an 8-bit image with the PSF alone and quantizes it.
pub fn blur_only(img: &Raster, params: &PnsParams) -> Result<Raster> {
    psf_blur(&img.to_float(), params)?.quantize()
}

/// 4-neighbour Laplacian with replicated borders.
pub fn laplacian(f: &FloatRaster) -> FloatRaster {
    let (w, h, ch) = (f.width(), f.height(), f.channels());
    let mut out = FloatRaster::zeros_like(f);
    let data = out.data_mut();
    for y in 0..h {
        let (up, down) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (left, right) = (x.saturating_sub(1), (x + 1).min(w - 1));
            for c in 0..ch {
                data[(y * w + x) * ch + c] = f.get(x, up, c)
                    + f.get(x, down, c)
                    + f.get(left, y, c)
                    + f.get(right, y, c)
                    - 4.0 * f.get(x, y, c);
            }
        }
    }
    out
}

/// High-pass copy of the source scaled by white noise: `(f * laplacian) . edge_noise_std . n1`.
pub fn edge_noise_term(f: &FloatRaster, params: &PnsParams, n1: &NoiseField) -> Result<FloatRaster> {
    if n1.dims() != (f.width(), f.height(), f.channels()) {
        return Err(Error::DimensionMismatch(format!(
            "noise field {:?} vs image {}x{}x{}",
            n1.dims(),
            f.width(),
            f.height(),
            f.channels()
        )));
    }
    let mut lap = laplacian(f);
    let scale = params.edge_noise_std;
    for (v, &n) in lap.data_mut().iter_mut().zip(n1.values()) {
        *v *= scale * n;
    }
    Ok(lap)
}

/// Device responsivity applied to one sample; `n2` is a standard-normal draw.
#[inline]
pub fn responsivity(v: f64, params: &PnsParams, n2: f64) -> f64 {
    let base = (v - params.beta_x).max(0.0);
    let noise_std = params.dark_noise_scale * (1.0 - v.clamp(0.0, 255.0) / 255.0);
    params.omega * base.powf(params.gamma) + params.beta_k + noise_std * n2
}

/// Global sampling displacement drawn from the seed.
pub fn jitter_offset(params: &PnsParams) -> (f64, f64) {
    if params.jitter == 0.0 {
        return (0.0, 0.0);
    }
    let draw = |i| (2.0 * rng::uniform(params.seed, Stream::Jitter, 0, 0, i) - 1.0) * params.jitter;
    (draw(0), draw(1))
}

pub fn simulate_pns(img: &Raster, params: &PnsParams) -> Result<Raster> {
    params.validate()?;
    let f = img.to_float();
    let mut signal = psf_blur(&f, params)?;
    let (w, h, ch) = (f.width(), f.height(), f.channels());

    if params.edge_noise_std > 0.0 {
        let n1 = NoiseField::generate(params.seed, Stream::EdgeNoise, w, h, ch);
        let edge = edge_noise_term(&f, params, &n1)?;
        for (s, e) in signal.data_mut().iter_mut().zip(edge.data()) {
            *s += e;
        }
    }

    let seed = params.seed;
    let noisy = params.dark_noise_scale > 0.0;
    signal
        .data_mut()
        .par_chunks_mut(w * ch)
        .enumerate()
        .for_each(|(y, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                let n2 = if noisy {
                    rng::normal(seed, Stream::DarkNoise, (i % ch) as u64, y as u64, (i / ch) as u64)
                } else {
                    0.0
                };
                *v = responsivity(*v, params, n2);
            }
        });

    let (dx, dy) = jitter_offset(params);
    if dx != 0.0 || dy != 0.0 {
        let mut moved = FloatRaster::zeros_like(&signal);
        moved
            .data_mut()
            .par_chunks_mut(w * ch)
            .enumerate()
            .for_each(|(y, row)| {
                for x in 0..w {
                    for c in 0..ch {
                        row[x * ch + c] = signal.sample_bilinear(x as f64 + dx, y as f64 + dy, c);
                    }
                }
            });
        signal = moved;
    }
    signal.quantize()
}
