//! Reference implementations that share no numerical code with the library:
//! explicit polynomial harmonics, Golub-Welsch quadrature, exact rational
//! Wigner-3j values.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use so3filt::noise::complex_gaussian;
use so3filt::so3::wigner_d_matrix;
use so3filt::{Rotation, SpectralCovariance, SphericalCoeffs};

/// Gauss-Legendre nodes and weights on `[-1, 1]` from the Jacobi matrix.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `P_l^m(x)` with the Condon-Shortley phase, `m >= 0`, from the expanded
/// Rodrigues polynomial. Adequate for the small degrees used in tests.
pub fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    // P_l(x) = 2^-l sum_k (-1)^k C(l,k) C(2l-2k, l) x^(l-2k)
    let mut coeff = vec![0.0; l + 1];
    for k in 0..=l / 2 {
        let c = factorial(l) / (factorial(k) * factorial(l - k)) * factorial(2 * l - 2 * k)
            / (factorial(l) * factorial(l - 2 * k));
        coeff[l - 2 * k] += if k % 2 == 0 { c } else { -c } / 2f64.powi(l as i32);
    }
    for _ in 0..m {
        coeff = (1..coeff.len()).map(|i| coeff[i] * i as f64).collect();
        if coeff.is_empty() {
            return 0.0;
        }
    }
    let poly: f64 = coeff.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * (1.0 - x * x).powf(m as f64 / 2.0) * poly
}

pub fn ylm(l: usize, m: i64, theta: f64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let y = Complex64::from_polar(norm * assoc_legendre(l, am, theta.cos()), am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

pub fn n_to_lm(n: usize) -> (usize, i64) {
    let l = (n as f64).sqrt() as usize;
    (l, n as i64 - (l * l + l) as i64)
}

/// Product rule on the sphere: `k` Gauss-Legendre nodes in `cos theta`,
/// `2k` longitudes. Exact for integrands of degree `<= 2k - 1`.
pub fn sphere_quadrature(k: usize) -> Vec<(f64, f64, f64)> {
    let (x, w) = gauss_legendre(k);
    let n_phi = 2 * k;
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::with_capacity(k * n_phi);
    for (xi, wi) in x.iter().zip(&w) {
        for j in 0..n_phi {
            out.push((xi.acos(), dphi * j as f64, wi * dphi));
        }
    }
    out
}

/// Product rule on SO(3) exact for products of two functions with Wigner
/// degree below `bw`: Gauss-Legendre in `cos beta`, equispaced `alpha`,
/// `gamma`.
pub fn so3_quadrature(bw: usize) -> Vec<(Rotation, f64)> {
    let (x, w) = gauss_legendre(bw);
    let n_ang = 2 * bw - 1;
    let da = 2.0 * PI / n_ang as f64;
    let mut out = Vec::new();
    for (xi, wi) in x.iter().zip(&w) {
        for a in 0..n_ang {
            for g in 0..n_ang {
                let rho = Rotation::new(da * a as f64, xi.acos(), da * g as f64).unwrap();
                out.push((rho, wi * da * da));
            }
        }
    }
    out
}

/// `D^l_{m,m'}(rho)` for `l < bw` at one rotation, indexed `[l][(m+l)(2l+1) + m'+l]`.
pub fn big_d_table(bw: usize, rho: &Rotation) -> Vec<Vec<Complex64>> {
    (0..bw)
        .map(|l| {
            let d = wigner_d_matrix(l, rho.beta);
            let li = l as i64;
            let w = 2 * l + 1;
            let mut out = vec![Complex64::new(0.0, 0.0); w * w];
            for m in -li..=li {
                for mp in -li..=li {
                    let (i, j) = ((m + li) as usize, (mp + li) as usize);
                    out[i * w + j] = Complex64::from_polar(
                        d[(i, j)],
                        -(m as f64) * rho.alpha - mp as f64 * rho.gamma,
                    );
                }
            }
            out
        })
        .collect()
}

fn fact_big(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Wigner-3j symbol by the Racah sum in exact rational arithmetic; only the
/// final square root is taken in floating point.
pub fn wigner3j_exact(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0
        || j3 < (j1 - j2).abs()
        || j3 > j1 + j2
        || m1.abs() > j1
        || m2.abs() > j2
        || m3.abs() > j3
    {
        return 0.0;
    }
    let r = |n: i64| BigRational::from_integer(fact_big(n));
    let delta = r(j1 + j2 - j3) * r(j1 - j2 + j3) * r(-j1 + j2 + j3) / r(j1 + j2 + j3 + 1);
    let pref = delta * r(j1 + m1) * r(j1 - m1) * r(j2 + m2) * r(j2 - m2) * r(j3 + m3) * r(j3 - m3);
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = BigRational::zero();
    for k in kmin..=kmax {
        let den = fact_big(k)
            * fact_big(j3 - j2 + k + m1)
            * fact_big(j3 - j1 + k - m2)
            * fact_big(j1 + j2 - j3 - k)
            * fact_big(j1 - k - m1)
            * fact_big(j2 - k + m2);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let mag = (pref * sum.clone() * sum.clone()).to_f64().unwrap().sqrt();
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    let s = if sum.is_negative() { -1.0 } else { 1.0 };
    phase * s * mag
}

pub fn random_coeffs(bandlimit: usize, seed: u64) -> SphericalCoeffs {
    SphericalCoeffs::new(bandlimit, complex_gaussian(bandlimit * bandlimit, seed)).unwrap()
}

pub fn unit_coeffs(bandlimit: usize, seed: u64) -> SphericalCoeffs {
    let c = random_coeffs(bandlimit, seed);
    c.scaled(Complex64::new(1.0 / c.norm(), 0.0))
}

/// `B B^H` with `B` of shape `L^2 x rank`.
pub fn random_psd(bandlimit: usize, rank: usize, seed: u64) -> SpectralCovariance {
    let dim = bandlimit * bandlimit;
    let b = DMatrix::from_vec(dim, rank, complex_gaussian(dim * rank, seed));
    let m = &b * b.adjoint();
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SpectralCovariance::new(bandlimit, m).unwrap()
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}
