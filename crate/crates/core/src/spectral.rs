//! 2-D magnitude spectra and spectrum similarity measures.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::raster::Raster;

/// ITU-R BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Centred DFT magnitudes: the DC bin sits at `(width / 2, height / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn new(width: usize, height: usize, magnitudes: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || magnitudes.len() != width * height {
            return Err(Error::InvalidData(format!(
                "spectrum of {} bins cannot be {width}x{height}",
                magnitudes.len()
            )));
        }
        if magnitudes.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidData("magnitudes must be finite and >= 0".into()));
        }
        Ok(Spectrum {
            width,
            height,
            magnitudes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel dimensions of the transformed image (equal to the bin grid).
    pub fn source_size(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.magnitudes[v * self.width + u]
    }

    pub fn dc(&self) -> f64 {
        self.at(self.width / 2, self.height / 2)
    }

    /// Signed frequency offsets (in bins) of centred position `(u, v)`.
    pub fn frequency(&self, u: usize, v: usize) -> (isize, isize) {
        (
            u as isize - (self.width / 2) as isize,
            v as isize - (self.height / 2) as isize,
        )
    }

    /// Radial frequency of a centred bin as a fraction of Nyquist.
    pub fn radial_frequency(&self, u: usize, v: usize) -> f64 {
        let (fx, fy) = self.frequency(u, v);
        let rx = 2.0 * fx as f64 / self.width as f64;
        let ry = 2.0 * fy as f64 / self.height as f64;
        rx.hypot(ry)
    }

    /// One CSV row per frequency row; `log_display` writes `ln(1 + |F|)`.
    pub fn to_csv(&self, log_display: bool) -> String {
        let mut out = String::with_capacity(self.magnitudes.len() * 12);
        for row in self.magnitudes.chunks(self.width) {
            for (i, &m) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let v = if log_display { m.ln_1p() } else { m };
                let _ = write!(out, "{v:.6}");
            }
            out.push('\n');
        }
        out
    }
}

/// Luminance plane of an image as floats.
pub fn luminance(img: &Raster) -> Vec<f64> {
    match img.channels() {
        1 => img.data().iter().map(|&v| f64::from(v)).collect(),
        _ => img
            .data()
            .chunks_exact(3)
            .map(|p| {
                LUMA_WEIGHTS[0] * f64::from(p[0])
                    + LUMA_WEIGHTS[1] * f64::from(p[1])
                    + LUMA_WEIGHTS[2] * f64::from(p[2])
            })
            .collect(),
    }
}

/// Unshifted 2-D DFT of a real plane (row-major).
pub fn dft2(width: usize, height: usize, plane: &[f64]) -> Vec<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = plane.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let row_fft = planner.plan_fft_forward(width);
    for row in buf.chunks_exact_mut(width) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft_forward(height);
    let mut col = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for y in 0..height {
            col[y] = buf[y * width + x];
        }
        col_fft.process(&mut col);
        for y in 0..height {
            buf[y * width + x] = col[y];
        }
    }
    buf
}

/// Centred magnitude spectrum of a real plane.
pub fn plane_spectrum(width: usize, height: usize, plane: &[f64]) -> Result<Spectrum> {
    if plane.len() != width * height {
        return Err(Error::DimensionMismatch(format!(
            "plane of {} samples is not {width}x{height}",
            plane.len()
        )));
    }
    let f = dft2(width, height, plane);
    let mut mags = vec![0.0; width * height];
    let (hw, hh) = (width / 2, height / 2);
    for y in 0..height {
        let cy = (y + hh) % height;
        for x in 0..width {
            let cx = (x + hw) % width;
            mags[cy * width + cx] = f[y * width + x].norm();
        }
    }
    Spectrum::new(width, height, mags)
}

/// Magnitude spectrum of the image's luminance; no window is applied.
pub fn magnitude_spectrum(img: &Raster) -> Spectrum {
    plane_spectrum(img.width(), img.height(), &luminance(img))
        .expect("raster dimensions always match its luminance plane")
}

fn same_grid(a: &Spectrum, b: &Spectrum) -> Result<()> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::DimensionMismatch(format!(
            "spectra {}x{} and {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Angle (radians) between the flattened magnitude vectors, in `[0, pi/2]`.
///
/// Evaluated as `2 atan2(|a' - b'|, |a' + b'|)` on the unit vectors, which equals
/// `acos(<a, b> / (|a| |b|))` but stays accurate for nearly parallel spectra.
pub fn spectral_angle(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    same_grid(a, b)?;
    let norm = |s: &Spectrum| s.magnitudes.iter().map(|m| m * m).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidData("zero-norm spectrum".into()));
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (&x, &y) in a.magnitudes.iter().zip(&b.magnitudes) {
        let (u, v) = (x / na, y / nb);
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    Ok((2.0 * diff.sqrt().atan2(sum.sqrt())).clamp(0.0, FRAC_PI_2))
}

/// Pearson correlation of the flattened magnitudes.
pub fn spectral_correlation(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    same_grid(a, b)?;
    let n = a.magnitudes.len() as f64;
    let ma = a.magnitudes.iter().sum::<f64>() / n;
    let mb = b.magnitudes.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.magnitudes.iter().zip(&b.magnitudes) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::InvalidData("zero-variance spectrum".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

const ROUNDOFF_ENERGY: f64 = 1e-20;

/// Share of non-DC energy above `cutoff` x Nyquist (radially).
pub fn hf_energy_ratio(s: &Spectrum, cutoff: f64) -> Result<f64> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} outside (0, 1)"
        )));
    }
    let (cx, cy) = (s.width / 2, s.height / 2);
    let (mut high, mut total) = (0.0, 0.0);
    for v in 0..s.height {
        for u in 0..s.width {
            if (u, v) == (cx, cy) {
                continue;
            }
            let e = s.at(u, v).powi(2);
            total += e;
            if s.radial_frequency(u, v) > cutoff {
                high += e;
            }
        }
    }
    // non-DC energy at FFT round-off level counts as none
    let dc_energy = s.dc().powi(2);
    if total <= ROUNDOFF_ENERGY * (total + dc_energy) {
        return Ok(0.0);
    }
    Ok(high / total)
}
