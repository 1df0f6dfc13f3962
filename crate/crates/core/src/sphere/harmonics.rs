use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Index of `(l, m)`, `m >= 0`, in a triangular Legendre table.
#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Fills `out` with the normalized associated Legendre functions
/// `lambda_l^m(theta)` for `0 <= m <= l < bandlimit`, such that
/// `Y_l^m(theta, phi) = lambda_l^m(theta) e^{i m phi}`. Condon-Shortley phase
/// is included. Uses the normalized three-term recursion in `l`, which stays
/// bounded for high degrees.
pub fn legendre_table(bandlimit: usize, theta: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize(bandlimit * (bandlimit + 1) / 2, 0.0);
    if bandlimit == 0 {
        return;
    }
    let (st, ct) = theta.sin_cos();
    let mut pmm = (0.25 / PI).sqrt();
    for m in 0..bandlimit {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * st;
        }
        out[tri_index(m, m)] = pmm;
        if m + 1 >= bandlimit {
            break;
        }
        let mf = m as f64;
        let mut p_prev = pmm;
        let mut p_cur = (2.0 * mf + 3.0).sqrt() * ct * pmm;
        out[tri_index(m + 1, m)] = p_cur;
        for l in (m + 2)..bandlimit {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lp = lf - 1.0;
            let b = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
            let p_next = a * (ct * p_cur - b * p_prev);
            out[tri_index(l, m)] = p_next;
            p_prev = p_cur;
            p_cur = p_next;
        }
    }
}

/// Orthonormal complex spherical harmonic `Y_l^m(theta, phi)`.
pub fn eval_ylm(l: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return Err(invalid(format!("order {m} out of range for degree {l}")));
    }
    if !theta.is_finite() || !phi.is_finite() {
        return Err(invalid("angles must be finite"));
    }
    let mut table = Vec::new();
    legendre_table(l + 1, theta, &mut table);
    let lam = table[tri_index(l, am)];
    let y = Complex64::from_polar(lam, am as f64 * phi);
    if m < 0 {
        let sign = if am % 2 == 0 { 1.0 } else { -1.0 };
        Ok(y.conj() * sign)
    } else {
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monopole_is_constant() {
        for &(t, p) in &[(0.0, 0.0), (1.2, 3.4), (PI, 6.0)] {
            let y = eval_ylm(0, 0, t, p).unwrap();
            assert!((y.re - 0.282_094_791_773_878_14).abs() < 1e-15);
            assert_eq!(y.im, 0.0);
        }
    }

    #[test]
    fn closed_forms_low_degree() {
        let t = 0.7_f64;
        let p = 1.9_f64;
        let y10 = eval_ylm(1, 0, t, p).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-15);
        assert!((eval_ylm(1, 0, 0.0, 0.0).unwrap().re - 0.488_602_511_902_919_9).abs() < 1e-15);
        // Y_1^1 = -sqrt(3/8pi) sin(theta) e^{i phi}
        let y11 = eval_ylm(1, 1, t, p).unwrap();
        let expect = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
        assert!((y11 - expect).norm() < 1e-15);
        // Y_2^2 = 1/4 sqrt(15/2pi) sin^2 e^{2i phi}
        let y22 = eval_ylm(2, 2, t, p).unwrap();
        let expect =
            Complex64::from_polar(0.25 * (15.0 / (2.0 * PI)).sqrt() * t.sin().powi(2), 2.0 * p);
        assert!((y22 - expect).norm() < 1e-15);
    }

    #[test]
    fn conjugate_symmetry() {
        for &(t, p) in &[(0.3, 0.1), (2.5, 4.4), (1.0, 5.9)] {
            for l in 0..12 {
                for m in -(l as i64)..=(l as i64) {
                    let a = eval_ylm(l, m, t, p).unwrap().conj();
                    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let b = eval_ylm(l, -m, t, p).unwrap() * sign;
                    assert!((a - b).norm() < 1e-14);
                }
            }
        }
        let y = eval_ylm(2, 1, 0.4, 2.2).unwrap().conj() + eval_ylm(2, -1, 0.4, 2.2).unwrap();
        assert!(y.norm() < 1e-15);
    }

    #[test]
    fn out_of_range_order() {
        assert!(eval_ylm(2, 3, 0.1, 0.1).is_err());
        assert!(eval_ylm(2, -3, 0.1, 0.1).is_err());
    }

    #[test]
    fn high_degree_stays_finite() {
        let mut t = Vec::new();
        legendre_table(200, 0.01, &mut t);
        assert!(t.iter().all(|v| v.is_finite()));
    }
}
