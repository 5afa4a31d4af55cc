//! Single-channel intensity images and the point operations built on them:
//! grayscale conversion, histograms, binary thresholding, Otsu threshold
//! selection and range normalization.

use crate::error::{invalid, Error, Result};

/// Rec.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Default histogram resolution, matching 8-bit scans.
pub const DEFAULT_BINS: usize = 256;

/// Single-channel image, row-major, every value finite and in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(width, height, data.len())?;
        if let Some((i, v)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidRaster(format!(
                "value {v} at index {i} is outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds a raster by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Clamps into `[0, 1]`. NaN maps to 0.
    pub(crate) fn from_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with replicate padding outside the image.
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Raster {
        Raster::from_clamped(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Values after 8-bit quantization, as written by the encoders.
    pub fn quantized(&self) -> Raster {
        self.map(|v| f64::from(quantize_u8(v)) / 255.0)
    }
}

/// Real-valued image whose values may leave `[0, 1]`, e.g. the output of a
/// frequency-domain filter before it is clamped or renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Field {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(width, height, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRaster("field contains non-finite values".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn clamp_to_raster(&self) -> Raster {
        Raster::from_clamped(self.width, self.height, self.data.clone())
    }
}

impl From<&Raster> for Field {
    fn from(r: &Raster) -> Self {
        Field {
            width: r.width,
            height: r.height,
            data: r.data.clone(),
        }
    }
}

/// Interleaved multi-channel image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRaster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

/// Pixel-count histogram over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(invalid("bin_count", "at least 2 bins are required"));
        }
        let total = counts.iter().sum();
        Ok(Self { counts, total })
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) / self.counts.len() as f64
    }
}

fn check_shape(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidRaster(format!(
            "zero dimension {width}x{height}"
        )));
    }
    match width.checked_mul(height) {
        Some(n) if n == len => Ok(()),
        _ => Err(Error::InvalidRaster(format!(
            "data length {len} does not match {width}x{height}"
        ))),
    }
}

pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

pub(crate) fn quantize_u8(v: f64) -> u8 {
    (clamp_unit(v) * 255.0).round() as u8
}

/// Luma conversion of a three-channel image using the Rec.601 weights.
pub fn to_grayscale(rgb: &ChannelRaster) -> Result<Raster> {
    if rgb.channels != 3 {
        return Err(invalid(
            "channels",
            format!("expected 3 channels, got {}", rgb.channels),
        ));
    }
    check_shape(rgb.width, rgb.height, rgb.data.len() / 3)?;
    if !rgb.data.len().is_multiple_of(3) {
        return Err(Error::InvalidRaster("channel data is not a multiple of 3".into()));
    }
    let [wr, _, wb] = LUMA_WEIGHTS;
    // Written relative to green so gray inputs (r = g = b) map to themselves
    // exactly.
    let data = rgb
        .data
        .chunks_exact(3)
        .map(|p| p[1] + wr * (p[0] - p[1]) + wb * (p[2] - p[1]))
        .collect();
    Ok(Raster::from_clamped(rgb.width, rgb.height, data))
}

pub fn histogram(r: &Raster, bin_count: usize) -> Result<Histogram> {
    if bin_count < 2 {
        return Err(invalid("bin_count", "at least 2 bins are required"));
    }
    let mut counts = vec![0u64; bin_count];
    for &v in &r.data {
        let bin = ((v * bin_count as f64).floor() as usize).min(bin_count - 1);
        counts[bin] += 1;
    }
    Ok(Histogram {
        counts,
        total: (r.width * r.height) as u64,
    })
}

/// 1.0 where `v > t`, 0.0 elsewhere.
pub fn threshold_binary(r: &Raster, t: f64) -> Result<Raster> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid("t", format!("threshold {t} is outside [0, 1]")));
    }
    Ok(r.map(|v| if v > t { 1.0 } else { 0.0 }))
}

/// Otsu's threshold: the split maximizing between-class variance, reported
/// as the center of the last bin of the dark class. Ties go to the lower
/// split; a histogram with a single occupied bin yields that bin's center.
pub fn otsu_threshold(h: &Histogram) -> Result<f64> {
    if h.total == 0 {
        return Err(invalid("histogram", "histogram is empty"));
    }
    let n = h.total as i128;
    let sum_all: i128 = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| i as i128 * c as i128)
        .sum();

    let mut best: Option<(usize, f64)> = None;
    let mut w0: i128 = 0;
    let mut s0: i128 = 0;
    for (k, &c) in h.counts.iter().enumerate().take(h.counts.len() - 1) {
        w0 += c as i128;
        s0 += k as i128 * c as i128;
        let w1 = n - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        // (N*S0 - S*W0)^2 / (W0*W1) is N^2 times the between-class variance.
        let diff = (n * s0 - sum_all * w0) as f64;
        let score = diff * diff / (w0 as f64 * w1 as f64);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((k, score));
        }
    }

    let bin = match best {
        Some((k, _)) => k,
        None => h
            .counts
            .iter()
            .position(|&c| c > 0)
            .expect("non-empty histogram has an occupied bin"),
    };
    Ok(h.bin_center(bin))
}

/// Affine map of `[min, max]` onto `[lo, hi]`; a constant field maps to the
/// midpoint.
pub fn normalize_range(f: &Field, lo: f64, hi: f64) -> Result<Raster> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
        return Err(invalid("range", format!("[{lo}, {hi}] is not inside [0, 1]")));
    }
    if lo >= hi {
        return Err(invalid("range", format!("lo {lo} must be below hi {hi}")));
    }
    let (min, max) = f
        .data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let data = if max > min {
        let scale = (hi - lo) / (max - min);
        f.data
            .iter()
            .map(|&v| (lo + (v - min) * scale).clamp(lo, hi))
            .collect()
    } else {
        vec![(lo + hi) / 2.0; f.data.len()]
    };
    Ok(Raster::from_clamped(f.width, f.height, data))
}
