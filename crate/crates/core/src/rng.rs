//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, channel, y, x)`, so noise
//! fields do not depend on iteration order or thread count.

/// Noise stream identifiers. Each stochastic term in the pipeline owns one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    EdgeNoise = 1,
    DarkNoise = 2,
    Jitter = 3,
    Derive = 4,
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit hash of a key tuple; successive fields are chained through splitmix.
#[inline]
pub fn hash_key(seed: u64, stream: Stream, channel: u64, y: u64, x: u64) -> u64 {
    let mut h = splitmix(seed);
    for v in [stream as u64, channel, y, x] {
        h = splitmix(h ^ v);
    }
    h
}

#[inline]
fn to_unit_open(bits: u64) -> f64 {
    // 53 random bits mapped into (0, 1)
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `(0, 1)`.
#[inline]
pub fn uniform(seed: u64, stream: Stream, channel: u64, y: u64, x: u64) -> f64 {
    to_unit_open(hash_key(seed, stream, channel, y, x))
}

/// Standard normal draw (Box-Muller on two decorrelated uniforms).
#[inline]
pub fn normal(seed: u64, stream: Stream, channel: u64, y: u64, x: u64) -> f64 {
    let h = hash_key(seed, stream, channel, y, x);
    let u1 = to_unit_open(h);
    let u2 = to_unit_open(splitmix(h));
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Derives an independent seed for a sub-task (e.g. one image in a batch).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    hash_key(seed, Stream::Derive, 0, a, b)
}

/// Per-sample standard-normal draws for one image and one stream.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseField {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<f64>,
}

impl NoiseField {
    pub fn generate(seed: u64, stream: Stream, width: usize, height: usize, channels: usize) -> Self {
        let mut values = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    values.push(normal(seed, stream, c as u64, y as u64, x as u64));
                }
            }
        }
        NoiseField {
            width,
            height,
            channels,
            values,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.channels)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
