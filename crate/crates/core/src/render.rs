//! Raster output of spherical signals.
//!
//! Rasters sample colatitude at ring midpoints `theta_i = (i + 1/2) pi / rows`
//! and longitude at `phi_j = 2 pi j / cols`. With `rows = cols = 2L` this is
//! exactly the node set of `SphereGrid::new(L)`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::sphere::{synthesize_ring, SphericalCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    Real,
    Magnitude,
}

/// Row-major grid of real samples, row 0 nearest the north pole.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

pub fn raster_theta(i: usize, rows: usize) -> f64 {
    (2 * i + 1) as f64 * PI / (2.0 * rows as f64)
}

pub fn raster_phi(j: usize, cols: usize) -> f64 {
    2.0 * PI * j as f64 / cols as f64
}

/// Complex samples of `coeffs` on the `rows x cols` raster.
pub fn sample_raster(coeffs: &SphericalCoeffs, rows: usize, cols: usize) -> Result<Vec<Complex64>> {
    if rows < 2 || cols < 2 {
        return Err(invalid("raster needs at least 2 rows and 2 columns"));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    out.par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, ring)| synthesize_ring(coeffs, raster_theta(i, rows), ring));
    Ok(out)
}

pub fn render_map(
    coeffs: &SphericalCoeffs,
    rows: usize,
    cols: usize,
    mode: RenderMode,
) -> Result<Raster> {
    let samples = sample_raster(coeffs, rows, cols)?;
    let values = samples
        .iter()
        .map(|v| match mode {
            RenderMode::Real => v.re,
            RenderMode::Magnitude => v.norm(),
        })
        .collect();
    Ok(Raster { rows, cols, values })
}

impl Raster {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// 8-bit grey levels, min mapped to 0 and max to 255. A constant raster
    /// maps to mid-grey.
    pub fn grey_levels(&self) -> Vec<u8> {
        let (lo, hi) = self.range();
        let span = hi - lo;
        let flat = !(span > 1e-12 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE));
        self.values
            .iter()
            .map(|&v| {
                if flat {
                    128
                } else {
                    ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
                }
            })
            .collect()
    }

    /// Binary PGM (P5).
    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.cols, self.rows)?;
        w.write_all(&self.grey_levels())?;
        Ok(())
    }

    /// One raster row per line, values separated by spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        for row in self.values.chunks(self.cols) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:e}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{inverse_sht, lm_to_n, SphereGrid};

    #[test]
    fn constant_map_is_flat_grey() {
        let c = SphericalCoeffs::basis(3, 0);
        let r = render_map(&c, 6, 9, RenderMode::Real).unwrap();
        let v0 = r.values[0];
        assert!(r.values.iter().all(|v| (v - v0).abs() < 1e-14));
        let mut pgm = Vec::new();
        r.write_pgm(&mut pgm).unwrap();
        assert!(pgm.starts_with(b"P5\n9 6\n255\n"));
        assert!(pgm[pgm.len() - 54..].iter().all(|&b| b == 128));
    }

    #[test]
    fn y10_monotone_in_theta() {
        let c = SphericalCoeffs::basis(2, lm_to_n(1, 0));
        let r = render_map(&c, 12, 7, RenderMode::Real).unwrap();
        for i in 0..r.rows {
            for j in 1..r.cols {
                assert!((r.get(i, j) - r.get(i, 0)).abs() < 1e-14);
            }
            if i > 0 {
                assert!(r.get(i, 0) < r.get(i - 1, 0));
            }
        }
    }

    #[test]
    fn text_grid_matches_grid_synthesis() {
        let l = 4;
        let c = crate::noise::synth_signal(l, 5);
        let grid = SphereGrid::new(l).unwrap();
        let samples = inverse_sht(&c, &grid).unwrap();
        let r = render_map(&c, 2 * l, 2 * l, RenderMode::Real).unwrap();
        let parsed: Vec<f64> = r
            .to_text()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        let expected: Vec<f64> = samples.iter().map(|v| v.re).collect();
        assert_eq!(parsed, expected);
    }

    #[test]
    fn magnitude_is_nonnegative() {
        let c = crate::noise::synth_signal(3, 2);
        let r = render_map(&c, 5, 5, RenderMode::Magnitude).unwrap();
        assert!(r.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn tiny_raster_rejected() {
        let c = SphericalCoeffs::basis(1, 0);
        assert!(render_map(&c, 1, 4, RenderMode::Real).is_err());
    }
}
