//! Image and landmark data model.
//!
//! [`Raster`] is the 8-bit storage type used for every file on disk and every
//! pipeline boundary. [`FloatRaster`] is the working representation for
//! filtering: samples are nominally in `[0, 255]` but intermediates may leave
//! that range, and only [`FloatRaster::quantize`] brings them back.

use crate::error::{Error, Result};

/// Owned 8-bit image, row-major, interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

fn check_shape(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::InvalidRaster(format!(
            "channel count must be 1 or 3, got {channels}"
        )));
    }
    let expected = width * height * channels;
    if len != expected {
        return Err(Error::InvalidRaster(format!(
            "data length {len} != {width}x{height}x{channels}"
        )));
    }
    Ok(())
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        check_shape(width, height, channels, data.len())?;
        Ok(Raster {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Raster::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds a raster by evaluating `f(x, y, channel)` for every sample.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Raster::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: u8) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn to_float(&self) -> FloatRaster {
        FloatRaster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    /// Horizontal flip.
    pub fn mirror(&self) -> Raster {
        let mut out = self.data.clone();
        let row = self.width * self.channels;
        for y in 0..self.height {
            for x in 0..self.width {
                let src = y * row + (self.width - 1 - x) * self.channels;
                let dst = y * row + x * self.channels;
                out[dst..dst + self.channels].copy_from_slice(&self.data[src..src + self.channels]);
            }
        }
        Raster {
            data: out,
            ..*self
        }
    }

    /// Copies the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Raster> {
        if x0 + w > self.width || y0 + h > self.height || w == 0 || h == 0 {
            return Err(Error::InvalidParameter(format!(
                "crop {w}x{h}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + w * self.channels]);
        }
        Raster::new(w, h, self.channels, data)
    }

    /// Bilinear sample of channel `c` at `(x, y)`, coordinates clamped to the image.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> f64 {
        bilinear(self.width, self.height, x, y, |xi, yi| {
            f64::from(self.data[(yi * self.width + xi) * self.channels + c])
        })
    }
}

/// Owned floating-point image with the same layout as [`Raster`].
#[derive(Debug, Clone, PartialEq)]
pub struct FloatRaster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FloatRaster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(width, height, channels, data.len())?;
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(FloatRaster {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn zeros_like(other: &FloatRaster) -> FloatRaster {
        FloatRaster {
            data: vec![0.0; other.data.len()],
            ..*other
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64, c: usize) -> f64 {
        bilinear(self.width, self.height, x, y, |xi, yi| {
            self.data[(yi * self.width + xi) * self.channels + c]
        })
    }

    /// Clamps to `[0, 255]`, then rounds half away from zero.
    pub fn quantize(&self) -> Result<Raster> {
        let mut out = Vec::with_capacity(self.data.len());
        for (i, &v) in self.data.iter().enumerate() {
            if v.is_nan() {
                return Err(Error::NonFinite(i));
            }
            out.push(quantize_sample(v));
        }
        Raster::new(self.width, self.height, self.channels, out)
    }
}

/// Clamp-then-round conversion of one sample. `f64::round` rounds half away from zero.
#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}

#[inline]
pub(crate) fn bilinear(
    width: usize,
    height: usize,
    x: f64,
    y: f64,
    fetch: impl Fn(usize, usize) -> f64,
) -> f64 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    if fx == 0.0 && fy == 0.0 {
        return fetch(x0, y0);
    }
    let top = fetch(x0, y0) * (1.0 - fx) + fetch(x1, y0) * fx;
    let bottom = fetch(x0, y1) * (1.0 - fx) + fetch(x1, y1) * fx;
    top * (1.0 - fy) + bottom * fy
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Ordered face landmarks, optionally tagged (`"left_eye"`, `"nose_tip"`, ...).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkSet {
    points: Vec<Point2>,
    tags: Vec<Option<String>>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        let tags = vec![None; points.len()];
        LandmarkSet::with_tags(points, tags)
    }

    pub fn with_tags(points: Vec<Point2>, tags: Vec<Option<String>>) -> Result<Self> {
        if tags.len() != points.len() {
            return Err(Error::LandmarkMismatch(format!(
                "{} tags for {} points",
                tags.len(),
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::LandmarkMismatch(format!("point {i} is not finite")));
        }
        Ok(LandmarkSet { points, tags })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        LandmarkSet::new(coords.iter().map(|&(x, y)| Point2::new(x, y)).collect())
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn tags(&self) -> &[Option<String>] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn find(&self, tag: &str) -> Option<Point2> {
        self.tags
            .iter()
            .position(|t| t.as_deref() == Some(tag))
            .map(|i| self.points[i])
    }
}
