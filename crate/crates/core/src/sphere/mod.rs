//! Signals on the 2-sphere: harmonic coefficients, basis evaluation,
//! sampling grids with exact quadrature and rotations.

mod grid;
mod harmonics;
mod rotation;

pub(crate) use grid::synthesize_ring;
pub use grid::{forward_sht, inverse_sht, SphereGrid};
pub use harmonics::{eval_ylm, legendre_table, tri_index};
pub use rotation::{rotate_coeffs, Rotation};

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;

/// Flat index `n = l(l+1) + m`.
#[inline]
pub fn lm_to_n(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * (l + 1)) as i64 + m) as usize
}

/// Degree and order of a flat index: `l = floor(sqrt(n))`, `m = n - l(l+1)`.
#[inline]
pub fn n_to_lm(n: usize) -> (usize, i64) {
    let mut l = (n as f64).sqrt() as usize;
    // guard against rounding in the square root
    while l * l > n {
        l -= 1;
    }
    while (l + 1) * (l + 1) <= n {
        l += 1;
    }
    (l, n as i64 - (l * (l + 1)) as i64)
}

/// Harmonic coefficients `(f)_n`, `0 <= n < L^2`, of a signal bandlimited to `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCoeffs {
    bandlimit: usize,
    data: Vec<Complex64>,
}

impl SphericalCoeffs {
    pub fn new(bandlimit: usize, data: Vec<Complex64>) -> Result<Self> {
        if bandlimit == 0 {
            return Err(invalid("bandlimit must be positive"));
        }
        if data.len() != bandlimit * bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: bandlimit * bandlimit,
                actual: data.len(),
            });
        }
        Ok(Self { bandlimit, data })
    }

    pub fn zeros(bandlimit: usize) -> Self {
        assert!(bandlimit > 0, "bandlimit must be positive");
        Self {
            bandlimit,
            data: vec![Complex64::new(0.0, 0.0); bandlimit * bandlimit],
        }
    }

    /// Unit coefficient at flat index `n`.
    pub fn basis(bandlimit: usize, n: usize) -> Self {
        let mut c = Self::zeros(bandlimit);
        c.data[n] = Complex64::new(1.0, 0.0);
        c
    }

    pub fn from_fn(bandlimit: usize, mut f: impl FnMut(usize, i64) -> Complex64) -> Self {
        let data = (0..bandlimit * bandlimit)
            .map(|n| {
                let (l, m) = n_to_lm(n);
                f(l, m)
            })
            .collect();
        Self { bandlimit, data }
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.data[lm_to_n(l, m)]
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            bandlimit: self.bandlimit,
            data: self.data.iter().map(|c| c * alpha).collect(),
        }
    }

    /// `self + other`, both with the same bandlimit.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            bandlimit: self.bandlimit,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            bandlimit: self.bandlimit,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.bandlimit != other.bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: self.bandlimit,
                actual: other.bandlimit,
            });
        }
        Ok(())
    }
}
