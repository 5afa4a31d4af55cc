//! Edge detection from the magnitude of windowed dipole moments.
//!
//! For a pixel `p` and a square window of half-size `radius`, the dipole
//! moment is the first moment of intensity about the window center:
//!
//! ```text
//! Dx = Σ_{dy=-r..r} Σ_{dx=-r..r} I(p + (dx, dy)) · dx
//! Dy = Σ_{dy=-r..r} Σ_{dx=-r..r} I(p + (dx, dy)) · dy
//! ```
//!
//! Samples outside the image use replicate padding. Because the offsets of
//! a symmetric window sum to zero, subtracting the window mean first would
//! change nothing, and a constant window has zero moment.
//!
//! Moments are snapped to a grid of [`MOMENT_QUANTUM`]. Mathematically equal
//! moments (the same window shifted by a constant, or summed in another
//! order) therefore compare bit-equal instead of differing in the last ulp.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::raster::Raster;

/// Resolution of reported moments: 2^-20.
pub const MOMENT_QUANTUM: f64 = 1.0 / (1u64 << 20) as f64;

/// Per-pixel edge strength in `[0, 1]`, same shape as its source raster.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl EdgeMap {
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

    pub fn to_raster(&self) -> Raster {
        Raster::from_clamped(self.width, self.height, self.values.clone())
    }

    /// Reinterprets a raster (e.g. one read back from disk) as an edge map.
    pub fn from_raster(r: &Raster) -> Self {
        Self {
            width: r.width(),
            height: r.height(),
            values: r.data().to_vec(),
        }
    }
}

/// Snap to the moment grid. `round` is symmetric, so snapping commutes with
/// negation.
pub fn snap_moment(m: f64) -> f64 {
    (m / MOMENT_QUANTUM).round() * MOMENT_QUANTUM
}

/// Largest single-axis moment reachable with intensities in `[0, 1]`:
/// `(2r + 1) · r(r + 1) / 2`.
pub fn max_axis_moment(radius: usize) -> f64 {
    ((2 * radius + 1) * radius * (radius + 1)) as f64 / 2.0
}

/// Signed dipole moments `(Dx, Dy)` of the window centred on `(x, y)`.
pub fn dipole_moments(r: &Raster, x: usize, y: usize, radius: usize) -> Result<(f64, f64)> {
    if radius < 1 {
        return Err(invalid("radius", "must be at least 1"));
    }
    if x >= r.width() || y >= r.height() {
        return Err(invalid(
            "p",
            format!("({x}, {y}) is outside {}x{}", r.width(), r.height()),
        ));
    }
    let (dx, dy) = raw_moments(r, x as isize, y as isize, radius as isize);
    Ok((snap_moment(dx), snap_moment(dy)))
}

// Pairs the +d and -d samples so a constant window cancels exactly and a
// mirrored window negates exactly.
#[inline]
fn raw_moments(r: &Raster, x: isize, y: isize, radius: isize) -> (f64, f64) {
    let mut mx = 0.0;
    for j in -radius..=radius {
        for d in 1..=radius {
            mx += d as f64 * (r.get_clamped(x + d, y + j) - r.get_clamped(x - d, y + j));
        }
    }
    let mut my = 0.0;
    for i in -radius..=radius {
        for d in 1..=radius {
            my += d as f64 * (r.get_clamped(x + i, y + d) - r.get_clamped(x + i, y - d));
        }
    }
    (mx, my)
}

/// `E = min(1, |(Dx, Dy)| / M)` for every pixel, `M` from
/// [`max_axis_moment`]. Requires `1 <= radius` and `2 * radius < min(w, h)`.
pub fn dipole_edge_map(r: &Raster, radius: usize) -> Result<EdgeMap> {
    if radius < 1 {
        return Err(invalid("radius", "must be at least 1"));
    }
    let min_side = r.width().min(r.height());
    if 2 * radius >= min_side {
        return Err(invalid(
            "radius",
            format!("radius {radius} needs an image larger than {}x{}", 2 * radius, 2 * radius),
        ));
    }
    let (w, h) = r.dims();
    let norm = max_axis_moment(radius);
    let rad = radius as isize;
    let mut values = vec![0.0; w * h];
    values.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let (mx, my) = raw_moments(r, x as isize, y as isize, rad);
            let (mx, my) = (snap_moment(mx), snap_moment(my));
            *out = ((mx * mx + my * my).sqrt() / norm).min(1.0);
        }
    });
    Ok(EdgeMap {
        width: w,
        height: h,
        values,
    })
}

/// Binary raster: 1.0 where the edge strength exceeds `t`.
pub fn edge_threshold(e: &EdgeMap, t: f64) -> Result<Raster> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid("t", format!("threshold {t} is outside [0, 1]")));
    }
    let values = e
        .values
        .iter()
        .map(|&v| if v > t { 1.0 } else { 0.0 })
        .collect();
    Ok(Raster::from_clamped(e.width, e.height, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(w: usize, h: usize, at: usize) -> Raster {
        Raster::from_fn(w, h, |x, _| if x >= at { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn constant_has_no_moment() {
        let r = Raster::filled(7, 7, 0.37).unwrap();
        assert_eq!(dipole_moments(&r, 3, 3, 1).unwrap(), (0.0, 0.0));
        assert_eq!(dipole_moments(&r, 0, 6, 3).unwrap(), (0.0, 0.0));
        assert!(dipole_edge_map(&r, 2).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_moments() {
        let r = step(8, 5, 2);
        assert_eq!(dipole_moments(&r, 1, 2, 1).unwrap(), (3.0, 0.0));
        assert_eq!(dipole_moments(&r, 6, 2, 1).unwrap(), (0.0, 0.0));
        assert!(dipole_moments(&r, 1, 2, 0).is_err());
    }

    #[test]
    fn step_edge_map_lights_two_columns() {
        let r = step(8, 5, 2);
        let e = dipole_edge_map(&r, 1).unwrap();
        for y in 0..5 {
            for x in 0..8 {
                let expected = if x == 1 || x == 2 { 1.0 } else { 0.0 };
                assert_eq!(e.get(x, y), expected, "({x}, {y})");
            }
        }
        let mask = edge_threshold(&e, 0.5).unwrap();
        assert_eq!(mask.data(), e.values());
    }

    #[test]
    fn radius_must_fit() {
        let r = Raster::filled(6, 10, 0.5).unwrap();
        assert!(dipole_edge_map(&r, 2).is_ok());
        assert!(dipole_edge_map(&r, 3).is_err());
        assert!(dipole_edge_map(&r, 0).is_err());
    }

    #[test]
    fn edge_threshold_examples() {
        let r = Raster::filled(5, 5, 0.2).unwrap();
        let zero = dipole_edge_map(&r, 1).unwrap();
        assert!(edge_threshold(&zero, 0.1).unwrap().data().iter().all(|&v| v == 0.0));
        let positive = EdgeMap::from_raster(&Raster::filled(3, 3, 0.01).unwrap());
        assert!(edge_threshold(&positive, 0.0).unwrap().data().iter().all(|&v| v == 1.0));
        assert!(edge_threshold(&positive, 2.0).is_err());
    }

    #[test]
    fn norm_constant() {
        assert_eq!(max_axis_moment(1), 3.0);
        assert_eq!(max_axis_moment(2), 15.0);
        assert_eq!(max_axis_moment(3), 42.0);
    }
}
