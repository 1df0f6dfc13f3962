//! Anisotropic noise synthesis and signal-to-noise ratios.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::covariance::SpectralCovariance;
use crate::error::{invalid, Error, Result};
use crate::sphere::SphericalCoeffs;

/// Noise `z = alpha T g` with a fixed mixing matrix `T` and a standard complex
/// circular Gaussian driver `g`, so that `E{z z^H} = alpha^2 T T^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    bandlimit: usize,
    mixing: DMatrix<Complex64>,
    alpha: f64,
}

impl NoiseModel {
    pub fn new(bandlimit: usize, mixing: DMatrix<Complex64>, alpha: f64) -> Result<Self> {
        let d = bandlimit * bandlimit;
        if bandlimit == 0 || mixing.shape() != (d, d) {
            return Err(invalid("mixing matrix must be L^2 x L^2"));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid("noise scale must be finite and non-negative"));
        }
        Ok(Self {
            bandlimit,
            mixing,
            alpha,
        })
    }

    /// Mixing entries with real and imaginary parts i.i.d. uniform on `(-1, 1)`.
    pub fn uniform(bandlimit: usize, alpha: f64, seed: u64) -> Result<Self> {
        let d = bandlimit * bandlimit;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new(-1.0, 1.0).map_err(|e| invalid(e.to_string()))?;
        let mut data = Vec::with_capacity(d * d);
        for _ in 0..d * d {
            let re = dist.sample(&mut rng);
            let im = dist.sample(&mut rng);
            data.push(Complex64::new(re, im));
        }
        Self::new(bandlimit, DMatrix::from_vec(d, d, data), alpha)
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mixing(&self) -> &DMatrix<Complex64> {
        &self.mixing
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.bandlimit, self.mixing.clone(), alpha)
    }

    /// `C^z = alpha^2 T T^H`.
    pub fn covariance(&self) -> Result<SpectralCovariance> {
        SpectralCovariance::from_mixing(self.bandlimit, &self.mixing, self.alpha)
    }

    /// One noise draw; the same seed always yields the same draw.
    pub fn synth(&self, seed: u64) -> SphericalCoeffs {
        let d = self.bandlimit * self.bandlimit;
        let g = complex_gaussian(d, seed);
        let z = &self.mixing * DVector::from_vec(g) * Complex64::new(self.alpha, 0.0);
        SphericalCoeffs::new(self.bandlimit, z.iter().copied().collect())
            .expect("shape fixed by construction")
    }
}

/// `len` draws of a standard complex circular Gaussian (`E|g|^2 = 1`).
pub fn complex_gaussian(len: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    (0..len)
        .map(|_| {
            let re: f64 = normal.sample(&mut rng);
            let im: f64 = normal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect()
}

/// Synthetic bandlimited test source: complex Gaussian coefficients with a
/// red spectrum, variance `1/(l+1)^2` per coefficient.
pub fn synth_signal(bandlimit: usize, seed: u64) -> SphericalCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    SphericalCoeffs::from_fn(bandlimit, |l, _| {
        let s = 1.0 / (l as f64 + 1.0);
        let re: f64 = normal.sample(&mut rng);
        let im: f64 = normal.sample(&mut rng);
        Complex64::new(re, im) * s
    })
}

/// `SNR = 20 log10(||s|| / ||d - s||)` in dB; `+inf` when `d == s`.
pub fn snr(d: &SphericalCoeffs, s: &SphericalCoeffs) -> Result<f64> {
    let ns = s.norm();
    if ns == 0.0 {
        return Err(Error::Degenerate("reference signal is zero".into()));
    }
    let err = d.sub(s)?.norm();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (ns / err).log10())
}

/// Scales `z` so that `s + alpha z` has exactly `target_db` input SNR.
/// Returns the scaled noise and `alpha`.
pub fn calibrate_snr(
    s: &SphericalCoeffs,
    z: &SphericalCoeffs,
    target_db: f64,
) -> Result<(SphericalCoeffs, f64)> {
    let nz = z.norm();
    if nz == 0.0 {
        return Err(Error::Degenerate("noise draw is zero".into()));
    }
    if s.bandlimit() != z.bandlimit() {
        return Err(Error::BandlimitMismatch {
            expected: s.bandlimit(),
            actual: z.bandlimit(),
        });
    }
    if !target_db.is_finite() {
        return Err(invalid("target SNR must be finite"));
    }
    let alpha = s.norm() / nz * 10f64.powf(-target_db / 20.0);
    Ok((z.scaled(Complex64::new(alpha, 0.0)), alpha))
}
