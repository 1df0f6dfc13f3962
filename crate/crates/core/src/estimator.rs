//! Least-squares recovery of the source spectrum from a filtered
//! joint-domain representation.
//!
//! Minimizing `sum_u ||nu(.; u) - g_s(.; u)||^2` over `s` leads to a normal
//! matrix `sum_u <psi_{u,n'}, psi_{u,n}> = 2 pi <h,h> delta_{n,n'}`, so the
//! estimate is a direct projection:
//!
//! `(s)_n = (4 pi / <h,h>) sum_u sum_p 1/(2p+1) sum_q T(n;p,q;u) sum_{q'} nu^p_{q,q'}(u) conj((h)_p^{q'})`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coupling::coupling_columns;
use crate::dslsht::DslshtRep;
use crate::error::{invalid, Error, Result};
use crate::filter::JointFilter;
use crate::so3::WignerCoeffs;
use crate::sphere::SphericalCoeffs;

/// `Upsilon`, mapping the observation spectrum to the estimate: `s = Upsilon f`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorMatrix {
    l_f: usize,
    matrix: DMatrix<Complex64>,
}

impl EstimatorMatrix {
    pub fn new(l_f: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = l_f * l_f;
        if matrix.shape() != (d, d) {
            return Err(invalid("estimator matrix must be L_f^2 x L_f^2"));
        }
        Ok(Self { l_f, matrix })
    }

    pub fn identity(l_f: usize) -> Self {
        let d = l_f * l_f;
        Self {
            l_f,
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn bandlimit(&self) -> usize {
        self.l_f
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Spectral norm, via the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .singular_values()
            .iter()
            .fold(0.0, |a, &b| a.max(b))
    }
}

fn window_energy(h: &SphericalCoeffs) -> Result<f64> {
    let e = h.norm_sq();
    if e == 0.0 {
        return Err(Error::Degenerate("window is identically zero".into()));
    }
    Ok(e)
}

/// Adds the contribution of component `u` to the unnormalized estimate.
pub(crate) fn accumulate_component(
    nu: &WignerCoeffs,
    h: &SphericalCoeffs,
    u: usize,
    l_f: usize,
    acc: &mut [Complex64],
) {
    for p in 0..nu.bandlimit() {
        let w = 2 * p + 1;
        let hp = &h.as_slice()[p * p..p * p + w];
        let block = nu.block(p);
        let cols = coupling_columns(p, u, l_f);
        let inv = 1.0 / w as f64;
        for (q, col) in cols.iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            let r: Complex64 = block[q * w..(q + 1) * w]
                .iter()
                .zip(hp)
                .map(|(a, b)| a * b.conj())
                .sum::<Complex64>()
                * inv;
            for (&n, &t) in col.n.iter().zip(&col.value) {
                acc[n] += r * t;
            }
        }
    }
}

pub(crate) fn finish_estimate(
    acc: Vec<Complex64>,
    h: &SphericalCoeffs,
    l_f: usize,
) -> Result<SphericalCoeffs> {
    let scale = 4.0 * PI / window_energy(h)?;
    SphericalCoeffs::new(l_f, acc.into_iter().map(|c| c * scale).collect())
}

/// Least-squares estimate from a (filtered) representation; the SO(3)
/// integrals are evaluated exactly through Wigner-D orthogonality.
pub fn estimate_from_representation(
    nu: &DslshtRep,
    h: &SphericalCoeffs,
) -> Result<SphericalCoeffs> {
    window_energy(h)?;
    if h.bandlimit() != nu.l_h() {
        return Err(Error::BandlimitMismatch {
            expected: nu.l_h(),
            actual: h.bandlimit(),
        });
    }
    let l_f = nu.l_f();
    let dim = l_f * l_f;
    let acc = nu
        .components()
        .par_iter()
        .enumerate()
        .fold(
            || vec![Complex64::new(0.0, 0.0); dim],
            |mut acc, (u, comp)| {
                accumulate_component(comp, h, u, l_f, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![Complex64::new(0.0, 0.0); dim],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    finish_estimate(acc, h, l_f)
}

/// End-to-end estimator matrix for filter `zeta` and window `h`:
///
/// `Upsilon_{n,n'} = (4 pi/<h,h>) sum_u sum_p (sum_{q'} |h_p^{q'}|^2)/(2p+1)
///  sum_q sum_k zeta^p_{q,k}(u) T(n;p,q;u) T(n';p,k;u)`.
pub fn upsilon_matrix(
    zeta: &JointFilter,
    h: &SphericalCoeffs,
    l_f: usize,
) -> Result<EstimatorMatrix> {
    let energy = window_energy(h)?;
    let l_h = h.bandlimit();
    if zeta.l_h() != l_h || zeta.l_g() != l_f + l_h - 1 {
        return Err(invalid(
            "filter bandlimits inconsistent with window and signal bandlimits",
        ));
    }
    let dim = l_f * l_f;
    let hp_energy: Vec<f64> = (0..l_h)
        .map(|p| {
            h.as_slice()[p * p..(p + 1) * (p + 1)]
                .iter()
                .map(|c| c.norm_sqr())
                .sum()
        })
        .collect();
    let l_g = zeta.l_g();
    let acc = (0..l_g * l_g)
        .into_par_iter()
        .fold(
            || vec![Complex64::new(0.0, 0.0); dim * dim],
            |mut acc, u| {
                let z = zeta.component(u);
                for p in 0..l_h {
                    if hp_energy[p] == 0.0 {
                        continue;
                    }
                    let w = 2 * p + 1;
                    let cols = coupling_columns(p, u, l_f);
                    let block = z.block(p);
                    let factor = hp_energy[p] / w as f64;
                    for (q, cq) in cols.iter().enumerate() {
                        if cq.is_empty() {
                            continue;
                        }
                        for (k, ck) in cols.iter().enumerate() {
                            let zv = block[q * w + k];
                            if ck.is_empty() || zv == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let zf = zv * factor;
                            for (&n, &t) in cq.n.iter().zip(&cq.value) {
                                let zt = zf * t;
                                // column-major storage: entry (n, n') at n' * dim + n
                                for (&np, &tp) in ck.n.iter().zip(&ck.value) {
                                    acc[np * dim + n] += zt * tp;
                                }
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![Complex64::new(0.0, 0.0); dim * dim],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let scale = 4.0 * PI / energy;
    let matrix = DMatrix::from_vec(dim, dim, acc.into_iter().map(|c| c * scale).collect());
    EstimatorMatrix::new(l_f, matrix)
}

/// `s = Upsilon f`.
pub fn estimate(upsilon: &EstimatorMatrix, f: &SphericalCoeffs) -> Result<SphericalCoeffs> {
    if f.bandlimit() != upsilon.l_f {
        return Err(Error::BandlimitMismatch {
            expected: upsilon.l_f,
            actual: f.bandlimit(),
        });
    }
    let x = DVector::from_column_slice(f.as_slice());
    let y = &upsilon.matrix * x;
    SphericalCoeffs::new(upsilon.l_f, y.iter().copied().collect())
}
