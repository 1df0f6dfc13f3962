//! Directional spatially localized spherical harmonic transform (DSLSHT).
//!
//! For a signal `f` bandlimited to `L_f` and a window `h` bandlimited to
//! `L_h`, the representation `g_f(rho; u)` has one SO(3) component per
//! spectral index `u < L_g^2`, `L_g = L_f + L_h - 1`, each bandlimited to
//! `L_h` in `rho`, with coefficients
//!
//! `(g_f(.; u))^p_{q,q'} = (h)_p^{q'} sum_n (f)_n T(n; p, q; u)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coupling::{coupling_columns, triple_product};
use crate::error::{invalid, Error, Result};
use crate::so3::WignerCoeffs;
use crate::sphere::{eval_ylm, lm_to_n, n_to_lm, Rotation, SphereGrid, SphericalCoeffs};

/// Joint SO(3)-spectral representation: one Wigner coefficient set per `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DslshtRep {
    l_f: usize,
    l_h: usize,
    components: Vec<WignerCoeffs>,
}

impl DslshtRep {
    pub fn zeros(l_f: usize, l_h: usize) -> Self {
        let l_g = l_f + l_h - 1;
        Self {
            l_f,
            l_h,
            components: (0..l_g * l_g).map(|_| WignerCoeffs::zeros(l_h)).collect(),
        }
    }

    pub fn from_components(l_f: usize, l_h: usize, components: Vec<WignerCoeffs>) -> Result<Self> {
        if l_f == 0 || l_h == 0 {
            return Err(invalid("bandlimits must be positive"));
        }
        let l_g = l_f + l_h - 1;
        if components.len() != l_g * l_g {
            return Err(Error::BandlimitMismatch {
                expected: l_g * l_g,
                actual: components.len(),
            });
        }
        if let Some(c) = components.iter().find(|c| c.bandlimit() != l_h) {
            return Err(Error::BandlimitMismatch {
                expected: l_h,
                actual: c.bandlimit(),
            });
        }
        Ok(Self {
            l_f,
            l_h,
            components,
        })
    }

    pub fn l_f(&self) -> usize {
        self.l_f
    }

    pub fn l_h(&self) -> usize {
        self.l_h
    }

    pub fn l_g(&self) -> usize {
        self.l_f + self.l_h - 1
    }

    pub fn component(&self, u: usize) -> &WignerCoeffs {
        &self.components[u]
    }

    pub fn components(&self) -> &[WignerCoeffs] {
        &self.components
    }

    pub fn into_components(self) -> Vec<WignerCoeffs> {
        self.components
    }

    /// `sum_u ||g(.; u)||^2_{SO(3)}`.
    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(crate::so3::so3_norm_sq).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| {
                a.as_slice()
                    .iter()
                    .zip(b.as_slice())
                    .map(|(x, y)| (x - y).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Component `u` of the DSLSHT of `f` with window `h`.
pub(crate) fn dslsht_component(f: &SphericalCoeffs, h: &SphericalCoeffs, u: usize) -> WignerCoeffs {
    let l_f = f.bandlimit();
    let l_h = h.bandlimit();
    let mut g = WignerCoeffs::zeros(l_h);
    for p in 0..l_h {
        let cols = coupling_columns(p, u, l_f);
        let w = 2 * p + 1;
        let hp = &h.as_slice()[p * p..p * p + w];
        let block = g.block_mut(p);
        for (qi, col) in cols.iter().enumerate() {
            if col.is_empty() {
                continue;
            }
            let a = col.dot_real(f.as_slice());
            for (k, hv) in hp.iter().enumerate() {
                block[qi * w + k] = a * hv;
            }
        }
    }
    g
}

/// Forward DSLSHT computed in coefficient space.
pub fn forward_dslsht(f: &SphericalCoeffs, h: &SphericalCoeffs) -> Result<DslshtRep> {
    if h.is_zero() {
        return Err(Error::Degenerate("window is identically zero".into()));
    }
    let l_f = f.bandlimit();
    let l_h = h.bandlimit();
    let l_g = l_f + l_h - 1;
    let components = (0..l_g * l_g)
        .into_par_iter()
        .map(|u| dslsht_component(f, h, u))
        .collect();
    Ok(DslshtRep {
        l_f,
        l_h,
        components,
    })
}

/// Wigner coefficients of `psi_{u,n}(rho) = sum D^p_{q,q'}(rho) (h)_p^{q'} T(n; p, q; u)`.
pub fn psi_coeffs(u: usize, n: usize, h: &SphericalCoeffs, l_f: usize) -> Result<WignerCoeffs> {
    let l_h = h.bandlimit();
    let l_g = l_f + l_h - 1;
    if n >= l_f * l_f || u >= l_g * l_g {
        return Err(invalid(format!(
            "index out of range: n={n}, u={u} (L_f={l_f}, L_h={l_h})"
        )));
    }
    let mut psi = WignerCoeffs::zeros(l_h);
    for p in 0..l_h {
        let pi = p as i64;
        for q in -pi..=pi {
            let t = triple_product(n, p, q, u)?;
            if t == 0.0 {
                continue;
            }
            for qp in -pi..=pi {
                psi.set(p, q, qp, h.get(p, qp) * t);
            }
        }
    }
    Ok(psi)
}

/// Brute-force quadrature of
/// `g_f(rho; u) = int f(x) (D(rho) h)(x) conj(Y_u(x)) ds(x)`, with the
/// rotated window evaluated pointwise as `h(R^{-1} x)`. Reference only.
pub fn spatial_dslsht_oracle(
    grid: &SphereGrid,
    f_samples: &[Complex64],
    l_f: usize,
    h: &SphericalCoeffs,
    rho: &Rotation,
    u: usize,
) -> Result<Complex64> {
    let l_h = h.bandlimit();
    let l_g = l_f + l_h - 1;
    if u >= l_g * l_g {
        return Err(invalid(format!("u = {u} outside [0, {})", l_g * l_g)));
    }
    // integrand degree (L_f - 1) + (L_h - 1) + (L_g - 1) must be < 2 L_grid
    let degree = l_f + l_h + l_g - 3;
    if degree >= 2 * grid.bandlimit() {
        return Err(invalid(format!(
            "grid bandlimit {} too coarse for integrand degree {degree}",
            grid.bandlimit()
        )));
    }
    if f_samples.len() != grid.len() {
        return Err(invalid("sample count does not match grid"));
    }
    let r = rho.matrix();
    let (v, w) = n_to_lm(u);
    let mut integrand = Vec::with_capacity(grid.len());
    for (idx, (theta, phi)) in grid.nodes().enumerate() {
        let x = [
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ];
        let y: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|k| r[k][i] * x[k]).sum())
            .collect();
        let ty = y[2].clamp(-1.0, 1.0).acos();
        let py = y[1].atan2(y[0]);
        let mut hv = Complex64::new(0.0, 0.0);
        for l in 0..l_h {
            for m in -(l as i64)..=(l as i64) {
                let c = h.as_slice()[lm_to_n(l, m)];
                if c != Complex64::new(0.0, 0.0) {
                    hv += c * eval_ylm(l, m, ty, py)?;
                }
            }
        }
        integrand.push(f_samples[idx] * hv * eval_ylm(v, w, theta, phi)?.conj());
    }
    grid.integrate(&integrand)
}
