use std::f64::consts::PI;

use num_complex::Complex64;

use super::{lm_to_n, SphericalCoeffs};
use crate::error::{invalid, Result};
use crate::so3::wigner_d_table;

const TWO_PI: f64 = 2.0 * PI;

/// Rotation by zyz Euler angles: `R = Rz(alpha) Ry(beta) Rz(gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

impl Rotation {
    /// `alpha` and `gamma` are wrapped into `[0, 2 pi)`; `beta` must lie in `[0, pi]`.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(invalid("Euler angles must be finite"));
        }
        if !(0.0..=PI).contains(&beta) {
            return Err(invalid(format!("beta = {beta} outside [0, pi]")));
        }
        Ok(Self {
            alpha: wrap(alpha),
            beta,
            gamma: wrap(gamma),
        })
    }

    pub fn identity() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    /// `R^{-1} = Rz(-gamma) Ry(-beta) Rz(-alpha)`, rewritten with `beta >= 0`
    /// via `Ry(-beta) = Rz(pi) Ry(beta) Rz(-pi)`.
    pub fn inverse(&self) -> Self {
        if self.beta == 0.0 {
            return Self {
                alpha: wrap(-self.gamma),
                beta: 0.0,
                gamma: wrap(-self.alpha),
            };
        }
        Self {
            alpha: wrap(PI - self.gamma),
            beta: self.beta,
            gamma: wrap(-self.alpha - PI),
        }
    }

    /// 3x3 rotation matrix, row-major.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let rz = |a: f64| {
            let (s, c) = a.sin_cos();
            [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
        };
        let (sb, cb) = self.beta.sin_cos();
        let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
        matmul(&matmul(&rz(self.alpha), &ry), &rz(self.gamma))
    }
}

fn matmul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Coefficients of the rotated signal:
/// `(D(rho) h)_l^m = sum_{m'} D^l_{m,m'}(rho) (h)_l^{m'}`.
pub fn rotate_coeffs(coeffs: &SphericalCoeffs, rho: &Rotation) -> SphericalCoeffs {
    let lmax = coeffs.bandlimit();
    let d = wigner_d_table(lmax, rho.beta);
    let src = coeffs.as_slice();
    let mut out = SphericalCoeffs::zeros(lmax);
    let dst = out.as_mut_slice();
    for (l, dl) in d.iter().enumerate() {
        let li = l as i64;
        let width = 2 * l + 1;
        for m in -li..=li {
            let em = Complex64::from_polar(1.0, -(m as f64) * rho.alpha);
            let mut acc = Complex64::new(0.0, 0.0);
            for mp in -li..=li {
                let emp = Complex64::from_polar(1.0, -(mp as f64) * rho.gamma);
                let dv = dl[(m + li) as usize * width + (mp + li) as usize];
                acc += emp * dv * src[lm_to_n(l, mp)];
            }
            dst[lm_to_n(l, m)] = em * acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{eval_ylm, n_to_lm};

    fn sample_coeffs(l: usize, seed: u64) -> SphericalCoeffs {
        let mut s = seed;
        SphericalCoeffs::from_fn(l, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            Complex64::new(a, b)
        })
    }

    fn synth(c: &SphericalCoeffs, t: f64, p: f64) -> Complex64 {
        c.as_slice()
            .iter()
            .enumerate()
            .map(|(n, v)| {
                let (l, m) = n_to_lm(n);
                v * eval_ylm(l, m, t, p).unwrap()
            })
            .sum()
    }

    #[test]
    fn identity_rotation() {
        let c = sample_coeffs(6, 3);
        let r = rotate_coeffs(&c, &Rotation::identity());
        assert!(r.sub(&c).unwrap().norm() < 1e-14);
    }

    #[test]
    fn monopole_is_invariant() {
        let c = SphericalCoeffs::basis(4, 0);
        let r = rotate_coeffs(&c, &Rotation::new(1.0, 2.0, 3.0).unwrap());
        assert!(r.sub(&c).unwrap().norm() < 1e-14);
    }

    #[test]
    fn inverse_undoes_rotation() {
        let c = sample_coeffs(10, 7);
        for rho in [
            Rotation::new(0.3, 1.1, 5.0).unwrap(),
            Rotation::new(4.0, 0.0, 1.0).unwrap(),
            Rotation::new(2.0, PI, 0.5).unwrap(),
        ] {
            let back = rotate_coeffs(&rotate_coeffs(&c, &rho), &rho.inverse());
            assert!(back.sub(&c).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn per_degree_norms_preserved() {
        let c = sample_coeffs(12, 11);
        let r = rotate_coeffs(&c, &Rotation::new(0.7, 2.1, 4.4).unwrap());
        for l in 0..12usize {
            let block = |x: &SphericalCoeffs| -> f64 {
                (0..2 * l + 1)
                    .map(|i| x.as_slice()[l * l + i].norm_sqr())
                    .sum()
            };
            assert!((block(&c) - block(&r)).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_spatial_rotation() {
        // (D(rho) h)(x) = h(R^{-1} x)
        let c = sample_coeffs(5, 5);
        let rho = Rotation::new(0.9, 1.3, 2.6).unwrap();
        let rotated = rotate_coeffs(&c, &rho);
        let r = rho.matrix();
        for &(t, p) in &[(0.4f64, 0.2f64), (1.9, 3.3), (2.8, 5.5)] {
            let x = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            // R^{-1} = R^T
            let y: Vec<f64> = (0..3)
                .map(|i| (0..3).map(|k| r[k][i] * x[k]).sum())
                .collect();
            let ty = y[2].clamp(-1.0, 1.0).acos();
            let py = y[1].atan2(y[0]);
            let lhs = synth(&rotated, t, p);
            let rhs = synth(&c, ty, py);
            assert!((lhs - rhs).norm() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn inverse_matrix_is_transpose() {
        let rho = Rotation::new(1.2, 0.8, 5.7).unwrap();
        let a = rho.matrix();
        let b = rho.inverse().matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[j][i]).abs() < 1e-14);
            }
        }
    }
}
