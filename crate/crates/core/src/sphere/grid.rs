use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::harmonics::{legendre_table, tri_index};
use super::{lm_to_n, SphericalCoeffs};
use crate::error::{invalid, Result};
use crate::quadrature::fejer_first;

/// Equiangular sampling grid with closed-form per-ring quadrature weights.
///
/// A grid built for bandlimit `L` has `2L` colatitude rings (Fejer nodes, the
/// poles are excluded) and `2L` equispaced longitudes. Its quadrature is exact
/// for every integrand bandlimited to degree `2L - 1`, in particular for
/// products of two signals bandlimited to `L`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    bandlimit: usize,
    thetas: Vec<f64>,
    weights: Vec<f64>,
    n_phi: usize,
}

impl SphereGrid {
    pub fn new(bandlimit: usize) -> Result<Self> {
        if bandlimit == 0 {
            return Err(invalid("grid bandlimit must be positive"));
        }
        let (thetas, weights) = fejer_first(2 * bandlimit);
        Ok(Self {
            bandlimit,
            thetas,
            weights,
            n_phi: 2 * bandlimit,
        })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    /// Ring weights `w_j` for `int sin(theta) d theta`; the longitude step is
    /// applied separately.
    pub fn ring_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// Node `(theta, phi)` of flat sample index `j * n_phi + k`.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        (self.thetas[idx / self.n_phi], self.phi(idx % self.n_phi))
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Full quadrature weight of sample `idx`.
    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx / self.n_phi] * self.dphi()
    }

    /// Quadrature approximation of the integral over the sphere.
    pub fn integrate(&self, samples: &[Complex64]) -> Result<Complex64> {
        self.check_samples(samples)?;
        let dphi = self.dphi();
        Ok(samples
            .chunks(self.n_phi)
            .zip(&self.weights)
            .map(|(ring, w)| ring.iter().sum::<Complex64>() * (w * dphi))
            .sum())
    }

    /// Samples `f(x_j) = sum_n (f)_n Y_n(x_j)` at every node.
    pub fn evaluate(&self, coeffs: &SphericalCoeffs) -> Result<Vec<Complex64>> {
        let lf = coeffs.bandlimit();
        if lf > self.bandlimit {
            return Err(invalid(format!(
                "signal bandlimit {lf} exceeds grid bandlimit {}",
                self.bandlimit
            )));
        }
        let n_phi = self.n_phi;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        out.par_chunks_mut(n_phi)
            .zip(self.thetas.par_iter())
            .for_each(|(ring, &theta)| synthesize_ring(coeffs, theta, ring));
        Ok(out)
    }

    /// Harmonic coefficients up to `bandlimit` of the sampled signal.
    pub fn analyze(&self, samples: &[Complex64], bandlimit: usize) -> Result<SphericalCoeffs> {
        self.check_samples(samples)?;
        if bandlimit == 0 || bandlimit > self.bandlimit {
            return Err(invalid(format!(
                "requested bandlimit {bandlimit} not supported by grid bandlimit {}",
                self.bandlimit
            )));
        }
        let lf = bandlimit;
        let n_phi = self.n_phi;
        let dphi = self.dphi();
        let partials: Vec<Vec<Complex64>> = samples
            .par_chunks(n_phi)
            .zip(self.thetas.par_iter().zip(self.weights.par_iter()))
            .map(|(ring, (&theta, &w))| {
                let mut lam = Vec::new();
                legendre_table(lf, theta, &mut lam);
                let fm: Vec<Complex64> = (-(lf as i64 - 1)..=(lf as i64 - 1))
                    .map(|m| {
                        ring.iter()
                            .enumerate()
                            .map(|(k, s)| {
                                s * Complex64::from_polar(
                                    1.0,
                                    -(m as f64) * 2.0 * PI * k as f64 / n_phi as f64,
                                )
                            })
                            .sum::<Complex64>()
                    })
                    .collect();
                let mut acc = vec![Complex64::new(0.0, 0.0); lf * lf];
                for l in 0..lf {
                    for m in -(l as i64)..=(l as i64) {
                        let am = m.unsigned_abs() as usize;
                        let mut v = lam[tri_index(l, am)];
                        if m < 0 && am % 2 == 1 {
                            v = -v;
                        }
                        acc[lm_to_n(l, m)] = fm[(m + lf as i64 - 1) as usize] * (v * w * dphi);
                    }
                }
                acc
            })
            .collect();
        let mut data = vec![Complex64::new(0.0, 0.0); lf * lf];
        for p in partials {
            for (d, v) in data.iter_mut().zip(p) {
                *d += v;
            }
        }
        SphericalCoeffs::new(lf, data)
    }

    fn check_samples(&self, samples: &[Complex64]) -> Result<()> {
        if samples.len() != self.len() {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                self.len(),
                samples.len()
            )));
        }
        Ok(())
    }
}

/// Samples `coeffs` on the ring at colatitude `theta`, at `out.len()`
/// equispaced longitudes starting from `phi = 0`.
pub(crate) fn synthesize_ring(coeffs: &SphericalCoeffs, theta: f64, out: &mut [Complex64]) {
    let lf = coeffs.bandlimit();
    let mut lam = Vec::new();
    legendre_table(lf, theta, &mut lam);
    // per-order sums over degree
    let mut fm = vec![Complex64::new(0.0, 0.0); 2 * lf - 1];
    for l in 0..lf {
        for m in -(l as i64)..=(l as i64) {
            let am = m.unsigned_abs() as usize;
            let mut v = lam[tri_index(l, am)];
            if m < 0 && am % 2 == 1 {
                v = -v;
            }
            fm[(m + lf as i64 - 1) as usize] += coeffs.as_slice()[lm_to_n(l, m)] * v;
        }
    }
    let n_phi = out.len();
    for (k, out) in out.iter_mut().enumerate() {
        let phi = 2.0 * PI * k as f64 / n_phi as f64;
        *out = fm
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, (i as f64 - (lf as f64 - 1.0)) * phi))
            .sum();
    }
}

/// Forward spherical harmonic transform of samples on `grid`.
pub fn forward_sht(
    grid: &SphereGrid,
    samples: &[Complex64],
    bandlimit: usize,
) -> Result<SphericalCoeffs> {
    grid.analyze(samples, bandlimit)
}

/// Inverse spherical harmonic transform onto `grid`.
pub fn inverse_sht(coeffs: &SphericalCoeffs, grid: &SphereGrid) -> Result<Vec<Complex64>> {
    grid.evaluate(coeffs)
}
