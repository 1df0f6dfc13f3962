//! Joint SO(3)-spectral domain filtering for bandlimited signals on the sphere.
//!
//! The crate builds the directional spatially localized spherical harmonic
//! transform (DSLSHT) of a noisy signal, designs the minimum mean-square
//! error filter in the joint rotation/spectral domain, applies it and
//! recovers a least-squares estimate of the source spectrum.
//!
//! Conventions used throughout:
//!
//! * Spherical harmonics are orthonormal and complex with the Condon-Shortley
//!   phase, so `conj(Y_l^m) = (-1)^m Y_l^{-m}`.
//! * Harmonic coefficients are stored flat with `n = l(l+1) + m`.
//! * Rotations use zyz Euler angles `(alpha, beta, gamma)` and
//!   `D^l_{m,m'}(alpha, beta, gamma) = e^{-i m alpha} d^l_{m,m'}(beta) e^{-i m' gamma}`.
//! * Wigner coefficients follow `(g)^l_{m,m'} = (2l+1)/(8 pi^2) <g, D^l_{m,m'}>`,
//!   so `||g||^2 = sum 8 pi^2/(2l+1) |(g)^l_{m,m'}|^2`.
//!
//! The production path (transform, filter design, estimation) never samples
//! SO(3); every rotation-group integral is evaluated in coefficient space.

pub mod config;
pub mod coupling;
pub mod covariance;
pub mod dslsht;
pub mod error;
pub mod estimator;
pub mod filter;
pub mod io;
pub mod noise;
pub mod pipeline;
pub mod quadrature;
pub mod render;
pub mod slepian;
pub mod so3;
pub mod sphere;

pub use num_complex::Complex64;

pub use coupling::{nonzero_n_range, triple_product, wigner3j, TripleProductTable};
pub use covariance::SpectralCovariance;
pub use dslsht::{forward_dslsht, psi_coeffs, DslshtRep};
pub use error::{Error, Result};
pub use estimator::{estimate, estimate_from_representation, upsilon_matrix, EstimatorMatrix};
pub use filter::{apply_filter, design_filter, FilterOptions, JointFilter};
pub use noise::{calibrate_snr, snr, NoiseModel};
pub use slepian::{slepian_window, Region, SlepianResult};
pub use so3::{so3_norm_sq, so3_synthesize, wigner_big_d, wigner_d_matrix, WignerCoeffs};
pub use sphere::{Rotation, SphereGrid, SphericalCoeffs};
