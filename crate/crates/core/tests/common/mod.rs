//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod http;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use restore_core::edge::{max_axis_moment, snap_moment};
use restore_core::{Histogram, Raster};

pub const BASE_TONE: f64 = 0.75;
pub const INK_TONE: f64 = 0.2;
pub const GRATING_AMPLITUDE: f64 = 0.2;
pub const GRATING_PERIOD: usize = 8;
pub const NOISE_SIGMA: f64 = 0.02;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_raster(width: usize, height: usize, seed: u64) -> Raster {
    let mut rng = rng(seed);
    let data = (0..width * height).map(|_| rng.random::<f64>()).collect();
    Raster::new(width, height, data).unwrap()
}

pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Zero-mean vertical-line texture with unit peak-to-peak amplitude.
pub fn grating(x: usize) -> f64 {
    0.5 * (2.0 * PI * x as f64 / GRATING_PERIOD as f64).cos()
}

/// Synthetic papyrus fragment: base tone, vertical fibre grating, rows of
/// pseudo-glyph strokes in ink tone, Gaussian noise.
pub struct Papyrus {
    pub image: Raster,
    /// Same fragment without the fibre grating.
    pub clean: Raster,
    /// Ground-truth ink pixels.
    pub glyphs: Vec<bool>,
}

fn segment_distance(px: f64, py: f64, (ax, ay): (f64, f64), (bx, by): (f64, f64)) -> f64 {
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0)
    };
    (px - (ax + t * dx)).hypot(py - (ay + t * dy))
}

/// Ink mask of uncial-like pseudo glyphs laid out in text lines. Letter
/// widths and line indents vary so that columns carry no spurious period.
pub fn glyph_mask(width: usize, height: usize, seed: u64) -> Vec<bool> {
    const CELL_H: usize = 28;
    const LINE_GAP: usize = 14;
    const MARGIN: usize = 16;
    let mut rng = rng(seed);
    let mut mask = vec![false; width * height];
    let mut top = MARGIN;
    while top + CELL_H + MARGIN <= height {
        let mut left = MARGIN + rng.random_range(0..12);
        loop {
            let cell_w = rng.random_range(14..=24);
            if left + cell_w + MARGIN > width {
                break;
            }
            // occasional word gap
            if rng.random::<f64>() < 0.15 {
                left += cell_w;
                continue;
            }
            let (x0, y0) = (left as f64 + 2.0, top as f64 + 3.0);
            let (x1, y1) = (left as f64 + cell_w as f64 - 4.0, top as f64 + CELL_H as f64 - 3.0);
            let half = rng.random_range(0.9..1.4);
            let strokes = rng.random_range(2..=3);
            let mut segments = Vec::new();
            let mut rings = Vec::new();
            for _ in 0..strokes {
                match rng.random_range(0..5) {
                    0 => {
                        let x = rng.random_range(x0..x1);
                        segments.push(((x, y0), (x, y1)));
                    }
                    1 => {
                        let y = rng.random_range(y0..y1);
                        segments.push(((x0, y), (x1, y)));
                    }
                    2 => segments.push(((x0, y0), (x1, y1))),
                    3 => segments.push(((x0, y1), (x1, y0))),
                    _ => rings.push((((x0 + x1) / 2.0, (y0 + y1) / 2.0), (x1 - x0) / 2.0)),
                }
            }
            for y in top..top + CELL_H {
                for x in left..left + cell_w {
                    let (px, py) = (x as f64, y as f64);
                    let on_segment = segments.iter().any(|&(a, b)| segment_distance(px, py, a, b) <= half);
                    let on_ring = rings
                        .iter()
                        .any(|&((cx, cy), r)| ((px - cx).hypot(py - cy) - r).abs() <= half);
                    if on_segment || on_ring {
                        mask[y * width + x] = true;
                    }
                }
            }
            left += cell_w;
        }
        top += CELL_H + LINE_GAP;
    }
    mask
}

pub fn papyrus(width: usize, height: usize, seed: u64) -> Papyrus {
    let glyphs = glyph_mask(width, height, seed);
    let mut rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let noise = Normal::new(0.0, NOISE_SIGMA).unwrap();
    let mut image = Vec::with_capacity(width * height);
    let mut clean = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let tone = if glyphs[y * width + x] { INK_TONE } else { BASE_TONE };
            let n = noise.sample(&mut rng);
            clean.push((tone + n).clamp(0.0, 1.0));
            image.push((tone + GRATING_AMPLITUDE * grating(x) + n).clamp(0.0, 1.0));
        }
    }
    Papyrus {
        image: Raster::new(width, height, image).unwrap(),
        clean: Raster::new(width, height, clean).unwrap(),
        glyphs,
    }
}

/// Mean over ink pixels of |v - mean of the non-ink pixels in the
/// surrounding (2r+1)^2 window|.
pub fn stroke_contrast(values: &[f64], w: usize, glyphs: &[bool], radius: usize) -> f64 {
    let h = values.len() / w;
    let mut total = 0.0;
    let mut count = 0usize;
    for y in 0..h {
        for x in 0..w {
            if !glyphs[y * w + x] {
                continue;
            }
            let (mut sum, mut n) = (0.0, 0usize);
            for yy in y.saturating_sub(radius)..(y + radius + 1).min(h) {
                for xx in x.saturating_sub(radius)..(x + radius + 1).min(w) {
                    if !glyphs[yy * w + xx] {
                        sum += values[yy * w + xx];
                        n += 1;
                    }
                }
            }
            if n > 0 {
                total += (values[y * w + x] - sum / n as f64).abs();
                count += 1;
            }
        }
    }
    total / count as f64
}

/// Textbook double loop: Σ I(p + (dx, dy)) · (dx, dy) over the full square
/// window with replicate padding, then the normalization and clamp.
pub fn naive_edge_map(r: &Raster, radius: usize) -> Vec<f64> {
    let (w, h) = r.dims();
    let rad = radius as isize;
    let norm = max_axis_moment(radius);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut mx, mut my) = (0.0, 0.0);
            for dy in -rad..=rad {
                for dx in -rad..=rad {
                    let xx = (x + dx).clamp(0, w as isize - 1) as usize;
                    let yy = (y + dy).clamp(0, h as isize - 1) as usize;
                    let v = r.get(xx, yy);
                    mx += v * dx as f64;
                    my += v * dy as f64;
                }
            }
            let (mx, my) = (snap_moment(mx), snap_moment(my));
            out.push(((mx * mx + my * my).sqrt() / norm).min(1.0));
        }
    }
    out
}

/// Exhaustive between-class variance scan, classes valued by bin center,
/// computed from scratch for every split. Ties go to the lower split.
pub fn otsu_oracle(h: &Histogram) -> f64 {
    let counts = h.counts();
    let n = counts.len();
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let mut best: Option<(usize, f64)> = None;
    for k in 0..n - 1 {
        let (lo, hi) = counts.split_at(k + 1);
        let w0: f64 = lo.iter().map(|&c| c as f64).sum();
        let w1: f64 = hi.iter().map(|&c| c as f64).sum();
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = lo.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum::<f64>() / w0;
        let mu1 = hi.iter().enumerate().map(|(i, &c)| (i + k + 1) as f64 * c as f64).sum::<f64>() / w1;
        let var = (w0 / total) * (w1 / total) * (mu0 - mu1).powi(2);
        match best {
            Some((_, b)) if var <= b * (1.0 + 1e-12) => {}
            _ => best = Some((k, var)),
        }
    }
    let k = best.map(|(k, _)| k).unwrap_or_else(|| counts.iter().position(|&c| c > 0).unwrap());
    (k as f64 + 0.5) / n as f64
}

pub fn random_histogram(bins: usize, seed: u64) -> Histogram {
    let mut rng = rng(seed);
    let mut counts = (0..bins)
        .map(|_| if rng.random::<f64>() < 0.3 { 0 } else { rng.random_range(0..1000) })
        .collect::<Vec<u64>>();
    if counts.iter().all(|&c| c == 0) {
        counts[bins / 2] = 1;
    }
    Histogram::from_counts(counts).unwrap()
}

/// 10k samples from two Gaussian clusters (0.3, 0.05) and (0.7, 0.05).
pub fn two_gaussian_raster(seed: u64) -> Raster {
    let mut rng = rng(seed);
    let a = Normal::new(0.3, 0.05).unwrap();
    let b = Normal::new(0.7, 0.05).unwrap();
    let data = (0..10_000)
        .map(|i| {
            let v: f64 = if i % 2 == 0 { a.sample(&mut rng) } else { b.sample(&mut rng) };
            v.clamp(0.0, 1.0)
        })
        .collect();
    Raster::new(100, 100, data).unwrap()
}

/// Rasters with sides in `min..=max` and arbitrary values in `[0, 1]`.
pub fn raster_strategy(min: usize, max: usize) -> impl proptest::strategy::Strategy<Value = Raster> {
    use proptest::prelude::*;
    (min..=max, min..=max).prop_flat_map(|(w, h)| {
        proptest::collection::vec(0.0..=1.0f64, w * h).prop_map(move |d| Raster::new(w, h, d).unwrap())
    })
}

/// Two rasters of identical, arbitrary shape.
pub fn raster_pair(min: usize, max: usize) -> impl proptest::strategy::Strategy<Value = (Raster, Raster)> {
    use proptest::prelude::*;
    (min..=max, min..=max).prop_flat_map(|(w, h)| {
        let side = || proptest::collection::vec(0.0..=1.0f64, w * h).prop_map(move |d| Raster::new(w, h, d).unwrap());
        (side(), side())
    })
}
