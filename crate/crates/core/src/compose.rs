//! Recombining processed layers: blending, edge overlay, bas-relief and the
//! text-enhancement preset.

use crate::edge::{dipole_edge_map, EdgeMap};
use crate::error::{check_dims, invalid, Result};
use crate::raster::{clamp_unit, histogram, otsu_threshold, threshold_binary, Raster, DEFAULT_BINS};

/// How two layers are combined by [`blend`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlendMode {
    /// `(1 - alpha) * a + alpha * b`
    Alpha,
    /// `a * (1 - alpha * (1 - b))`
    MultiplyDarken,
    /// `min(a, b)`
    Min,
}

impl BlendMode {
    pub const ALL: [BlendMode; 3] = [BlendMode::Alpha, BlendMode::MultiplyDarken, BlendMode::Min];

    pub fn name(self) -> &'static str {
        match self {
            BlendMode::Alpha => "alpha",
            BlendMode::MultiplyDarken => "multiply_darken",
            BlendMode::Min => "min",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// Layer weights `(w_a, w_b)` summing to exactly one. The larger weight is
/// derived from the smaller one, so `alpha` and `1 - alpha` yield the same
/// pair swapped.
fn alpha_weights(alpha: f64) -> (f64, f64) {
    if alpha < 0.5 {
        let wa = 1.0 - alpha;
        (wa, 1.0 - wa)
    } else {
        (1.0 - alpha, alpha)
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(name, format!("{v} is outside [0, 1]")));
    }
    Ok(())
}

fn check_gain(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(invalid(name, format!("{v} must be finite and non-negative")));
    }
    Ok(())
}

pub fn blend(a: &Raster, b: &Raster, mode: BlendMode, alpha: f64) -> Result<Raster> {
    check_dims(a.dims(), b.dims())?;
    check_unit("alpha", alpha)?;
    let pairs = a.data().iter().zip(b.data());
    let data: Vec<f64> = match mode {
        BlendMode::Alpha => {
            let (wa, wb) = alpha_weights(alpha);
            pairs.map(|(&x, &y)| wa * x + wb * y).collect()
        }
        BlendMode::MultiplyDarken => pairs.map(|(&x, &y)| x * (1.0 - alpha * (1.0 - y))).collect(),
        BlendMode::Min => pairs.map(|(&x, &y)| x.min(y)).collect(),
    };
    Ok(Raster::from_clamped(a.width(), a.height(), data))
}

/// Darkens `img` along edges: `img * (1 - gain * E)`, clamped.
pub fn overlay_edges(img: &Raster, e: &EdgeMap, gain: f64) -> Result<Raster> {
    check_dims(img.dims(), e.dims())?;
    check_gain("gain", gain)?;
    let data = img
        .data()
        .iter()
        .zip(e.values())
        .map(|(&v, &m)| v * clamp_unit(1.0 - gain * m))
        .collect();
    Ok(Raster::from_clamped(img.width(), img.height(), data))
}

/// Directional-difference relief rendering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasRelief {
    pub dx: i32,
    pub dy: i32,
    pub depth: f64,
    pub bias: f64,
}

impl Default for BasRelief {
    fn default() -> Self {
        Self {
            dx: 1,
            dy: 1,
            depth: 1.0,
            bias: 0.5,
        }
    }
}

pub const MAX_RELIEF_OFFSET: i32 = 8;

/// `clamp(bias + depth * (img(p) - img(p + (dx, dy))))`, replicate padding.
pub fn bas_relief(img: &Raster, params: &BasRelief) -> Result<Raster> {
    let BasRelief { dx, dy, depth, bias } = *params;
    if dx.abs() > MAX_RELIEF_OFFSET || dy.abs() > MAX_RELIEF_OFFSET {
        return Err(invalid(
            "offset",
            format!("({dx}, {dy}) exceeds {MAX_RELIEF_OFFSET} pixels"),
        ));
    }
    check_gain("depth", depth)?;
    check_unit("bias", bias)?;
    let (w, h) = img.dims();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let here = img.get_clamped(x, y);
            let there = img.get_clamped(x + dx as isize, y + dy as isize);
            data.push(bias + depth * (here - there));
        }
    }
    Ok(Raster::from_clamped(w, h, data))
}

/// Binarization threshold: a fixed tone or Otsu's choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Manual(f64),
    Auto,
}

impl Threshold {
    pub fn resolve(self, img: &Raster) -> Result<f64> {
        match self {
            Threshold::Manual(t) => {
                check_unit("t", t)?;
                Ok(t)
            }
            Threshold::Auto => otsu_threshold(&histogram(img, DEFAULT_BINS)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhanceParams {
    pub threshold: Threshold,
    pub radius: usize,
    pub edge_gain: f64,
    pub mix: f64,
}

impl Default for EnhanceParams {
    fn default() -> Self {
        Self {
            threshold: Threshold::Auto,
            radius: 2,
            edge_gain: 0.8,
            mix: 0.75,
        }
    }
}

/// Threshold-plus-edges text enhancement:
///
/// ```text
/// letters   = threshold_binary(img, t)
/// softened  = blend(img, letters, alpha, 0.5)
/// edges     = dipole_edge_map(img, radius)
/// result    = blend(img, overlay_edges(min(img, softened), edges, gain), alpha, mix)
/// ```
///
/// Softening the binary mask keeps faint strokes that a hard threshold
/// would erase.
pub fn enhance_text(img: &Raster, params: &EnhanceParams) -> Result<Raster> {
    check_unit("mix", params.mix)?;
    check_gain("edge_gain", params.edge_gain)?;
    let t = params.threshold.resolve(img)?;
    let letters = threshold_binary(img, t)?;
    let softened = blend(img, &letters, BlendMode::Alpha, 0.5)?;
    let edges = dipole_edge_map(img, params.radius)?;
    let darkened = blend(img, &softened, BlendMode::Min, 0.0)?;
    let overlaid = overlay_edges(&darkened, &edges, params.edge_gain)?;
    blend(img, &overlaid, BlendMode::Alpha, params.mix)
}
