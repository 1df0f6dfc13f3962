//! Spectral covariance matrices `C_{nn'} = E{(d)_n conj((d)_{n'})}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::sphere::SphericalCoeffs;

/// Hermitian `L^2 x L^2` spectral covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCovariance {
    bandlimit: usize,
    matrix: DMatrix<Complex64>,
}

impl SpectralCovariance {
    /// Wraps `matrix`, rejecting non-square, wrongly sized or non-Hermitian input.
    pub fn new(bandlimit: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = bandlimit * bandlimit;
        if bandlimit == 0 || matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(invalid(format!(
                "covariance for bandlimit {bandlimit} must be {dim}x{dim}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let cov = Self { bandlimit, matrix };
        let scale = cov.matrix.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let err = cov.hermitian_error();
        if err > 1e-12 * scale {
            return Err(invalid(format!(
                "covariance is not Hermitian (deviation {err:e})"
            )));
        }
        Ok(cov)
    }

    pub fn zeros(bandlimit: usize) -> Self {
        let dim = bandlimit * bandlimit;
        Self {
            bandlimit,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(bandlimit: usize) -> Self {
        let dim = bandlimit * bandlimit;
        Self {
            bandlimit,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// Rank-one covariance `s s^H`.
    pub fn rank_one(s: &SphericalCoeffs) -> Result<Self> {
        if s.is_zero() {
            return Err(Error::Degenerate(
                "signal covariance from a zero vector".into(),
            ));
        }
        let v = s.as_slice();
        let dim = v.len();
        Ok(Self {
            bandlimit: s.bandlimit(),
            matrix: DMatrix::from_fn(dim, dim, |i, j| v[i] * v[j].conj()),
        })
    }

    /// `alpha^2 T T^H` for a square mixing matrix `T`.
    pub fn from_mixing(bandlimit: usize, mixing: &DMatrix<Complex64>, alpha: f64) -> Result<Self> {
        let dim = bandlimit * bandlimit;
        if mixing.nrows() != dim || mixing.ncols() != dim {
            return Err(invalid("mixing matrix has the wrong shape"));
        }
        // row-major copy so each output entry is a contiguous dot product
        let rows: Vec<Vec<Complex64>> = (0..dim)
            .map(|i| mixing.row(i).iter().copied().collect())
            .collect();
        let a2 = alpha * alpha;
        let lower: Vec<Vec<Complex64>> = (0..dim)
            .into_par_iter()
            .map(|i| {
                (0..=i)
                    .map(|j| {
                        rows[i]
                            .iter()
                            .zip(&rows[j])
                            .map(|(a, b)| a * b.conj())
                            .sum::<Complex64>()
                            * a2
                    })
                    .collect()
            })
            .collect();
        let matrix = DMatrix::from_fn(dim, dim, |i, j| {
            if j <= i {
                lower[i][j]
            } else {
                lower[j][i].conj()
            }
        });
        Ok(Self { bandlimit, matrix })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn dim(&self) -> usize {
        self.bandlimit * self.bandlimit
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    #[inline]
    pub fn get(&self, n: usize, np: usize) -> Complex64 {
        self.matrix[(n, np)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            bandlimit: self.bandlimit,
            matrix: self.matrix.map(|c| c * factor),
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.bandlimit != other.bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: self.bandlimit,
                actual: other.bandlimit,
            });
        }
        Ok(Self {
            bandlimit: self.bandlimit,
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Largest `|C_{ij} - conj(C_{ji})|`.
    pub fn hermitian_error(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}
