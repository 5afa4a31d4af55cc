//! 2D Fourier transform and multiplicative frequency-domain filtering.
//!
//! Conventions:
//! - images are zero-padded to even width and height before transforming,
//!   and cropped back on the inverse;
//! - the forward transform is unnormalized, the inverse scales by `1/N`;
//! - spectra and masks are stored DC-centred: frequency `(0, 0)` sits at
//!   sample `(width / 2, height / 2)`.

pub use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{check_dims, invalid, Result};
use crate::raster::{normalize_range, Field, Raster};

/// DC-centred 2D spectrum of a (padded) real image.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    orig_width: usize,
    orig_height: usize,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_parts(
        width: usize,
        height: usize,
        orig_width: usize,
        orig_height: usize,
        coefficients: Vec<Complex64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(invalid("spectrum", format!("{width}x{height} is not a positive even size")));
        }
        if orig_width == 0 || orig_height == 0 || orig_width > width || orig_height > height {
            return Err(invalid(
                "spectrum",
                format!("original size {orig_width}x{orig_height} does not fit {width}x{height}"),
            ));
        }
        if coefficients.len() != width * height {
            return Err(invalid("spectrum", "coefficient count does not match size"));
        }
        Ok(Self {
            width,
            height,
            orig_width,
            orig_height,
            coefficients,
        })
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

    pub fn orig_dims(&self) -> (usize, usize) {
        (self.orig_width, self.orig_height)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn center(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    fn offset_index(&self, du: isize, dv: isize) -> usize {
        let x = (self.width as isize / 2 + du).rem_euclid(self.width as isize) as usize;
        let y = (self.height as isize / 2 + dv).rem_euclid(self.height as isize) as usize;
        y * self.width + x
    }

    /// Coefficient at frequency offset `(du, dv)` from DC, wrapping.
    pub fn coefficient(&self, du: isize, dv: isize) -> Complex64 {
        self.coefficients[self.offset_index(du, dv)]
    }

    pub fn set_coefficient(&mut self, du: isize, dv: isize, value: Complex64) {
        let i = self.offset_index(du, dv);
        self.coefficients[i] = value;
    }

    /// Σ|C|².
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Real attenuation field in `[0, 1]`, aligned with a DC-centred spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterMask {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl FilterMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn identity(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![1.0; width * height],
        }
    }

    /// Pointwise product of two masks.
    pub fn product(&self, other: &FilterMask) -> Result<FilterMask> {
        check_dims(self.dims(), other.dims())?;
        Ok(FilterMask {
            width: self.width,
            height: self.height,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    /// True when `m(c + k) == m(c - k)` for every offset `k`, modulo size.
    pub fn is_point_symmetric(&self) -> bool {
        let (w, h) = (self.width as isize, self.height as isize);
        let (cx, cy) = (w / 2, h / 2);
        (0..h).all(|y| {
            (0..w).all(|x| {
                let mx = (2 * cx - x).rem_euclid(w);
                let my = (2 * cy - y).rem_euclid(h);
                self.values[(y * w + x) as usize] == self.values[(my * w + mx) as usize]
            })
        })
    }

    pub fn to_raster(&self) -> Raster {
        Raster::from_clamped(self.width, self.height, self.values.clone())
    }
}

/// Frequency axis a notch band runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotchAxis {
    /// Band on the horizontal frequency axis (`v = 0`); removes vertical lines.
    Horizontal,
    /// Band on the vertical frequency axis (`u = 0`); removes horizontal lines.
    Vertical,
}

fn padded(n: usize) -> usize {
    n + n % 2
}

/// Size of the spectrum produced for an image of the given size.
pub fn padded_dims(width: usize, height: usize) -> (usize, usize) {
    (padded(width), padded(height))
}

fn fft_rows(buf: &mut [Complex64], len: usize, direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(len, direction);
    fft.process(buf);
}

fn transpose(src: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); src.len()];
    for y in 0..height {
        for x in 0..width {
            out[x * height + y] = src[y * width + x];
        }
    }
    out
}

fn fft2(buf: &mut Vec<Complex64>, width: usize, height: usize, direction: FftDirection) {
    fft_rows(buf, width, direction);
    let mut t = transpose(buf, width, height);
    fft_rows(&mut t, height, direction);
    *buf = transpose(&t, height, width);
}

// With even sizes the centring shift and its inverse are the same swap.
fn quadrant_swap(buf: &[Complex64], width: usize, height: usize) -> Vec<Complex64> {
    let (hw, hh) = (width / 2, height / 2);
    let mut out = vec![Complex64::default(); buf.len()];
    for y in 0..height {
        let sy = (y + hh) % height;
        for x in 0..width {
            out[sy * width + (x + hw) % width] = buf[y * width + x];
        }
    }
    out
}

pub fn forward_spectrum(r: &Raster) -> Spectrum {
    let (ow, oh) = r.dims();
    let (w, h) = padded_dims(ow, oh);
    let mut buf = vec![Complex64::default(); w * h];
    for y in 0..oh {
        for x in 0..ow {
            buf[y * w + x] = Complex64::new(r.get(x, y), 0.0);
        }
    }
    fft2(&mut buf, w, h, FftDirection::Forward);
    Spectrum {
        width: w,
        height: h,
        orig_width: ow,
        orig_height: oh,
        coefficients: quadrant_swap(&buf, w, h),
    }
}

/// Inverse transform over the full padded size, before any projection.
pub fn inverse_complex(s: &Spectrum) -> Vec<Complex64> {
    let (w, h) = s.dims();
    let mut buf = quadrant_swap(&s.coefficients, w, h);
    fft2(&mut buf, w, h, FftDirection::Inverse);
    let scale = 1.0 / (w * h) as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Real part of the inverse, cropped to the original size, unclamped.
pub fn inverse_field(s: &Spectrum) -> Field {
    let full = inverse_complex(s);
    let (ow, oh) = s.orig_dims();
    let mut data = Vec::with_capacity(ow * oh);
    for y in 0..oh {
        data.extend(full[y * s.width..y * s.width + ow].iter().map(|c| c.re));
    }
    Field {
        width: ow,
        height: oh,
        data,
    }
}

/// Back to an image: renormalize stretches the result onto `[0, 1]`,
/// otherwise values are clamped.
pub fn inverse_spectrum(s: &Spectrum, renormalize: bool) -> Raster {
    let field = inverse_field(s);
    if renormalize {
        normalize_range(&field, 0.0, 1.0).expect("unit range is valid")
    } else {
        field.clamp_to_raster()
    }
}

/// `|C|` (or `ln(1 + |C|)`) stretched onto `[0, 1]`, at the padded size.
pub fn spectrum_magnitude_view(s: &Spectrum, log_scale: bool) -> Raster {
    let data = s
        .coefficients
        .iter()
        .map(|c| {
            let m = c.norm();
            if log_scale {
                m.ln_1p()
            } else {
                m
            }
        })
        .collect();
    let field = Field {
        width: s.width,
        height: s.height,
        data,
    };
    normalize_range(&field, 0.0, 1.0).expect("unit range is valid")
}

fn check_mask_size(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(invalid("size", format!("mask size {width}x{height} is empty")));
    }
    Ok(())
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(invalid(name, format!("{v} must be finite and non-negative")));
    }
    Ok(())
}

fn radial_distance(x: usize, y: usize, width: usize, height: usize) -> f64 {
    let dx = x as f64 - (width / 2) as f64;
    let dy = y as f64 - (height / 2) as f64;
    dx.hypot(dy)
}

/// Radial high-pass: 0 inside `cutoff`, 1 beyond `cutoff + softness`,
/// smoothstep between.
pub fn make_highpass_mask(width: usize, height: usize, cutoff: f64, softness: f64) -> Result<FilterMask> {
    check_mask_size(width, height)?;
    check_nonneg("cutoff", cutoff)?;
    check_nonneg("softness", softness)?;
    let mut values = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let d = radial_distance(x, y, width, height);
            let v = if d < cutoff {
                0.0
            } else if d >= cutoff + softness {
                1.0
            } else {
                let t = (d - cutoff) / softness;
                t * t * (3.0 - 2.0 * t)
            };
            values.push(v);
        }
    }
    Ok(FilterMask {
        width,
        height,
        values,
    })
}

/// Zeroes a band of `half_width` samples either side of a frequency axis,
/// except inside the disc of radius `guard_radius` around DC.
pub fn make_axis_notch_mask(
    width: usize,
    height: usize,
    axis: NotchAxis,
    half_width: f64,
    guard_radius: f64,
) -> Result<FilterMask> {
    check_mask_size(width, height)?;
    check_nonneg("half_width", half_width)?;
    check_nonneg("guard_radius", guard_radius)?;
    let (cx, cy) = (width / 2, height / 2);
    let mut values = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let off_axis = match axis {
                NotchAxis::Horizontal => y.abs_diff(cy),
                NotchAxis::Vertical => x.abs_diff(cx),
            } as f64;
            let in_band = off_axis <= half_width;
            let guarded = radial_distance(x, y, width, height) <= guard_radius;
            values.push(if in_band && !guarded { 0.0 } else { 1.0 });
        }
    }
    Ok(FilterMask {
        width,
        height,
        values,
    })
}

/// Uses the pixel values of `m` verbatim as attenuation. No symmetrization
/// is applied; the inverse transform keeps only the real part.
pub fn mask_from_raster(m: &Raster, expected: (usize, usize)) -> Result<FilterMask> {
    check_dims(expected, m.dims())?;
    Ok(FilterMask {
        width: m.width(),
        height: m.height(),
        values: m.data().to_vec(),
    })
}

pub fn apply_mask(s: &Spectrum, m: &FilterMask) -> Result<Spectrum> {
    check_dims(s.dims(), m.dims())?;
    let coefficients = s
        .coefficients
        .iter()
        .zip(&m.values)
        .map(|(c, &a)| c * a)
        .collect();
    Ok(Spectrum {
        coefficients,
        ..s.clone()
    })
}

/// Forward transform, mask built for the padded size, inverse.
pub fn fourier_filter(
    r: &Raster,
    renormalize: bool,
    mask: impl FnOnce(usize, usize) -> Result<FilterMask>,
) -> Result<Raster> {
    let s = forward_spectrum(r);
    let m = mask(s.width, s.height)?;
    Ok(inverse_spectrum(&apply_mask(&s, &m)?, renormalize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn direct_dft(r: &Raster, u: usize, v: usize) -> Complex64 {
        let (w, h) = r.dims();
        let mut acc = Complex64::default();
        for y in 0..h {
            for x in 0..w {
                let phase = -2.0 * std::f64::consts::PI * ((u * x) as f64 / w as f64 + (v * y) as f64 / h as f64);
                acc += Complex64::from_polar(r.get(x, y), phase);
            }
        }
        acc
    }

    #[test]
    fn constant_image_has_only_dc() {
        let r = Raster::filled(8, 8, 0.5).unwrap();
        let s = forward_spectrum(&r);
        assert_eq!(s.center(), (4, 4));
        assert!((s.coefficient(0, 0) - Complex64::new(32.0, 0.0)).norm() < 1e-12);
        assert!((direct_dft(&r, 0, 0).re - 32.0).abs() < 1e-12);
        let others: f64 = s.energy() - s.coefficient(0, 0).norm_sqr();
        assert!(others < 1e-20);
    }

    #[test]
    fn zero_image_zero_spectrum() {
        let s = forward_spectrum(&Raster::filled(6, 4, 0.0).unwrap());
        assert!(s.coefficients().iter().all(|c| c.norm() == 0.0));
        assert!(inverse_spectrum(&s, false).data().iter().all(|&v| v == 0.0));
        let view = spectrum_magnitude_view(&s, true);
        assert!(view.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn cosine_grating_two_peaks() {
        let r = Raster::from_fn(8, 8, |x, _| {
            0.5 + 0.5 * (2.0 * std::f64::consts::PI * x as f64 / 8.0).cos()
        })
        .unwrap();
        let s = forward_spectrum(&r);
        // DC 32, and 0.5 * 0.5 * 64 = 16 at (+-1, 0)
        for (du, dv, want) in [(0, 0, 32.0), (1, 0, 16.0), (-1, 0, 16.0)] {
            let c = s.coefficient(du, dv);
            assert!((c.re - want).abs() < 1e-9 && c.im.abs() < 1e-9, "({du},{dv}) = {c}");
            assert!((c - direct_dft(&r, du.rem_euclid(8) as usize, 0)).norm() < 1e-9);
        }
        let rest = s.energy() - 32.0f64.powi(2) - 2.0 * 16.0f64.powi(2);
        assert!(rest.abs() < 1e-9);

        let view = spectrum_magnitude_view(&s, false);
        assert_eq!(view.get(4, 4), 1.0);
        assert!((view.get(3, 4) - 0.5).abs() < 1e-12 && (view.get(5, 4) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn odd_sizes_are_padded_and_cropped() {
        let r = Raster::from_fn(5, 3, |x, y| (x + 2 * y) as f64 / 10.0).unwrap();
        let s = forward_spectrum(&r);
        assert_eq!((s.dims(), s.orig_dims()), ((6, 4), (5, 3)));
        let back = inverse_spectrum(&s, false);
        assert_eq!(back.dims(), (5, 3));
        for (a, b) in back.data().iter().zip(r.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn removing_dc_of_constant_leaves_nothing() {
        let mut s = forward_spectrum(&Raster::filled(8, 8, 0.5).unwrap());
        s.set_coefficient(0, 0, Complex64::default());
        assert!(inverse_spectrum(&s, false).data().iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn highpass_examples() {
        let id = make_highpass_mask(16, 16, 0.0, 0.0).unwrap();
        assert!(id.values().iter().all(|&v| v == 1.0));

        let m = make_highpass_mask(16, 16, 3.0, 0.0).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                let d = radial_distance(x, y, 16, 16);
                assert_eq!(m.get(x, y), if d < 3.0 { 0.0 } else { 1.0 });
            }
        }
        assert_eq!(make_highpass_mask(16, 16, 1.0, 0.0).unwrap().get(8, 8), 0.0);

        let soft = make_highpass_mask(32, 32, 2.0, 4.0).unwrap();
        assert_eq!(soft.get(16, 16), 0.0);
        assert_eq!(soft.get(16 + 6, 16), 1.0);
        let mid = soft.get(16 + 4, 16);
        assert!((mid - 0.5).abs() < 1e-12);
        assert!(soft.is_point_symmetric());
        assert!(make_highpass_mask(8, 8, -1.0, 0.0).is_err());
    }

    #[test]
    fn notch_examples() {
        let thin = make_axis_notch_mask(8, 8, NotchAxis::Horizontal, 0.0, 0.0).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let want = if y == 4 && x != 4 { 0.0 } else { 1.0 };
                assert_eq!(thin.get(x, y), want);
            }
        }

        let m = make_axis_notch_mask(32, 32, NotchAxis::Horizontal, 1.0, 4.0).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let band = (15..=17).contains(&y);
                let guarded = radial_distance(x, y, 32, 32) <= 4.0;
                assert_eq!(m.get(x, y), if band && !guarded { 0.0 } else { 1.0 }, "({x},{y})");
            }
        }
        assert!(m.is_point_symmetric());

        let v = make_axis_notch_mask(32, 32, NotchAxis::Vertical, 1.0, 4.0).unwrap();
        assert_eq!(v.get(16, 0), 0.0);
        assert_eq!(v.get(0, 16), 1.0);
    }

    #[test]
    fn mask_from_raster_checks_size() {
        let white = Raster::filled(4, 4, 1.0).unwrap();
        assert_eq!(mask_from_raster(&white, (4, 4)).unwrap(), FilterMask::identity(4, 4));
        let black = Raster::filled(4, 4, 0.0).unwrap();
        assert!(mask_from_raster(&black, (4, 4)).unwrap().values().iter().all(|&v| v == 0.0));
        assert!(matches!(
            mask_from_raster(&white, (6, 4)),
            Err(Error::DimensionMismatch { expected_width: 6, .. })
        ));
    }

    #[test]
    fn apply_mask_examples() {
        let r = Raster::from_fn(8, 6, |x, y| ((x * y) % 5) as f64 / 4.0).unwrap();
        let s = forward_spectrum(&r);
        assert_eq!(apply_mask(&s, &FilterMask::identity(8, 6)).unwrap(), s);
        let zero = make_highpass_mask(8, 6, 100.0, 0.0).unwrap();
        assert!(apply_mask(&s, &zero).unwrap().coefficients().iter().all(|c| c.norm() == 0.0));
        assert!(apply_mask(&s, &FilterMask::identity(6, 8)).is_err());

        let flat = Raster::filled(8, 8, 0.7).unwrap();
        let out = fourier_filter(&flat, false, |w, h| make_highpass_mask(w, h, 1.0, 0.0)).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }
}
