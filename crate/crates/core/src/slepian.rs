//! Bandlimited windows maximally concentrated in a spatial region.
//!
//! The concentration kernel `K_{n,n'} = int_R Y_n conj(Y_{n'}) ds` is
//! evaluated by a region-adapted product rule: both supported regions are
//! star-shaped about the north pole, so the region is described by its
//! boundary colatitude `theta_max(phi)`. Longitude uses the trapezoid rule
//! (spectrally accurate for periodic integrands) and colatitude uses
//! Gauss-Legendre on `[0, theta_max(phi)]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::sphere::{eval_ylm, legendre_table, n_to_lm, tri_index, SphereGrid, SphericalCoeffs};

/// Concentration region on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Whole sphere; concentration is trivially perfect.
    Sphere,
    /// `theta <= theta0`.
    PolarCap { theta0: f64 },
    /// Spherical ellipse centered at the north pole with foci at colatitude
    /// `focus` along the `+x` and `-x` directions: points whose great-circle
    /// distances to the two foci sum to at most `2 * semi_major`.
    Ellipse { focus: f64, semi_major: f64 },
}

impl Region {
    pub fn polar_cap(theta0: f64) -> Result<Self> {
        let r = Region::PolarCap { theta0 };
        r.validate()?;
        Ok(r)
    }

    pub fn ellipse(focus: f64, semi_major: f64) -> Result<Self> {
        let r = Region::Ellipse { focus, semi_major };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Region::Sphere => Ok(()),
            Region::PolarCap { theta0 } => {
                if !(theta0 > 0.0 && theta0 < PI) {
                    return Err(invalid(format!("cap angle {theta0} outside (0, pi)")));
                }
                Ok(())
            }
            Region::Ellipse { focus, semi_major } => {
                if !(focus > 0.0 && focus < semi_major && semi_major < 0.5 * PI) {
                    return Err(invalid(format!(
                        "ellipse needs 0 < focus < semi_major < pi/2, got focus={focus}, a={semi_major}"
                    )));
                }
                Ok(())
            }
        }
    }

    fn focus_distance_sum(focus: f64, theta: f64, phi: f64) -> f64 {
        let (st, ct) = theta.sin_cos();
        let (sf, cf) = focus.sin_cos();
        let x = st * phi.cos();
        let d1 = (ct * cf + x * sf).clamp(-1.0, 1.0).acos();
        let d2 = (ct * cf - x * sf).clamp(-1.0, 1.0).acos();
        d1 + d2
    }

    /// Point membership test.
    pub fn contains(&self, theta: f64, phi: f64) -> bool {
        match *self {
            Region::Sphere => true,
            Region::PolarCap { theta0 } => theta <= theta0,
            Region::Ellipse { focus, semi_major } => {
                Self::focus_distance_sum(focus, theta, phi) <= 2.0 * semi_major
            }
        }
    }

    /// Boundary colatitude along longitude `phi`.
    pub fn boundary(&self, phi: f64) -> f64 {
        match *self {
            Region::Sphere => PI,
            Region::PolarCap { theta0 } => theta0,
            Region::Ellipse { focus, semi_major } => {
                // the focal distance sum grows monotonically along a meridian
                // from the center until it leaves the region
                let target = 2.0 * semi_major;
                let (mut lo, mut hi) = (0.0, 2.0 * semi_major);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if Self::focus_distance_sum(focus, mid, phi) <= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Exact area for spheres and caps.
    pub fn analytic_area(&self) -> Option<f64> {
        match *self {
            Region::Sphere => Some(4.0 * PI),
            Region::PolarCap { theta0 } => Some(2.0 * PI * (1.0 - theta0.cos())),
            Region::Ellipse { .. } => None,
        }
    }
}

/// Resolution of the region-adapted quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelResolution {
    pub n_phi: usize,
    pub n_theta: usize,
}

impl KernelResolution {
    /// Longitude rule of `2 * max(2 L_h, 128)` points and `2 L_h + 32`
    /// Gauss-Legendre colatitude nodes.
    pub fn for_bandlimit(l_h: usize) -> Self {
        Self {
            n_phi: 2 * (2 * l_h).max(128),
            n_theta: 2 * l_h + 32,
        }
    }
}

/// Region area by the same quadrature as the kernel.
pub fn region_area(region: &Region, res: KernelResolution) -> f64 {
    let dphi = 2.0 * PI / res.n_phi as f64;
    (0..res.n_phi)
        .map(|k| 1.0 - region.boundary(dphi * k as f64).cos())
        .sum::<f64>()
        * dphi
}

/// Concentration kernel at the default resolution.
pub fn concentration_kernel(region: &Region, l_h: usize) -> Result<DMatrix<Complex64>> {
    concentration_kernel_with(region, l_h, KernelResolution::for_bandlimit(l_h))
}

/// `K_{n,n'} = int_R Y_n conj(Y_{n'}) ds` for `n, n' < L_h^2`.
pub fn concentration_kernel_with(
    region: &Region,
    l_h: usize,
    res: KernelResolution,
) -> Result<DMatrix<Complex64>> {
    region.validate()?;
    if l_h == 0 {
        return Err(invalid("window bandlimit must be positive"));
    }
    if res.n_phi <= 2 * l_h || res.n_theta == 0 {
        return Err(invalid("kernel quadrature too coarse for the bandlimit"));
    }
    let area = region_area(region, res);
    if !(area > 1e-12 * 4.0 * PI) {
        return Err(Error::Degenerate(format!(
            "region has negligible area {area:e}"
        )));
    }
    let dim = l_h * l_h;
    let tri = l_h * (l_h + 1) / 2;
    let (x, wgl) = gauss_legendre(res.n_theta);
    let dphi = 2.0 * PI / res.n_phi as f64;

    // For each longitude: the real moment matrix M_{ab} = int_0^{theta_max} lam_a lam_b sin,
    // then K_{(l,m),(l',m')} += dphi e^{i(m-m')phi} s(m) s(m') M.
    let per_phi = |k: usize| -> (f64, Vec<f64>) {
        let phi = dphi * k as f64;
        let tmax = region.boundary(phi);
        let mut m = vec![0.0; tri * tri];
        let mut lam = Vec::new();
        for (xi, wi) in x.iter().zip(&wgl) {
            let theta = 0.5 * tmax * (1.0 + xi);
            let weight = 0.5 * tmax * wi * theta.sin();
            legendre_table(l_h, theta, &mut lam);
            for a in 0..tri {
                let wa = weight * lam[a];
                if wa == 0.0 {
                    continue;
                }
                let row = &mut m[a * tri..(a + 1) * tri];
                for (r, lb) in row.iter_mut().zip(&lam) {
                    *r += wa * lb;
                }
            }
        }
        (phi, m)
    };
    let moments: Vec<(f64, Vec<f64>)> = (0..res.n_phi).into_par_iter().map(per_phi).collect();

    let index: Vec<(usize, i64)> = (0..dim).map(n_to_lm).collect();
    let top = l_h as i64 - 1;
    let mut kernel = DMatrix::<Complex64>::zeros(dim, dim);
    for (phi, m) in &moments {
        let phase: Vec<Complex64> = (-top..=top)
            .map(|mo| Complex64::from_polar(1.0, mo as f64 * phi))
            .collect();
        for (np, &(lp, mop)) in index.iter().enumerate() {
            let b = tri_index(lp, mop.unsigned_abs() as usize);
            let sb = if mop < 0 && mop % 2 != 0 { -1.0 } else { 1.0 };
            let pb = phase[(mop + top) as usize].conj();
            for (n, &(l, mo)) in index.iter().enumerate() {
                let a = tri_index(l, mo.unsigned_abs() as usize);
                let sa = if mo < 0 && mo % 2 != 0 { -1.0 } else { 1.0 };
                kernel[(n, np)] +=
                    phase[(mo + top) as usize] * pb * (m[a * tri + b] * sa * sb * dphi);
            }
        }
    }
    Ok(kernel)
}

/// Eigen-decomposition of the concentration problem.
#[derive(Debug, Clone)]
pub struct SlepianResult {
    /// Concentration ratios, descending.
    pub eigenvalues: Vec<f64>,
    /// Unit-norm eigenvectors matching `eigenvalues`.
    pub eigenvectors: Vec<SphericalCoeffs>,
}

impl SlepianResult {
    /// The best-concentrated window.
    pub fn window(&self) -> &SphericalCoeffs {
        &self.eigenvectors[0]
    }

    pub fn shannon_number(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Rotates the global phase so the largest-magnitude entry is positive real.
fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let c = v[best];
    if c.norm() == 0.0 {
        return;
    }
    let phase = c.conj() / c.norm();
    for x in v.iter_mut() {
        *x *= phase;
    }
}

/// Solves the concentration eigenproblem for a kernel.
pub fn slepian_from_kernel(kernel: DMatrix<Complex64>, l_h: usize) -> Result<SlepianResult> {
    let dim = l_h * l_h;
    if kernel.shape() != (dim, dim) {
        return Err(invalid("kernel shape does not match bandlimit"));
    }
    let eig = SymmetricEigen::try_new(kernel, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Solver("concentration eigenproblem did not converge".into()))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut eigenvectors = Vec::with_capacity(dim);
    for i in order {
        eigenvalues.push(eig.eigenvalues[i]);
        let mut v: Vec<Complex64> = eig.eigenvectors.column(i).iter().copied().collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        fix_phase(&mut v);
        eigenvectors.push(SphericalCoeffs::new(l_h, v)?);
    }
    Ok(SlepianResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Slepian functions of `region` bandlimited to `l_h`, best concentrated first.
pub fn slepian_window(region: &Region, l_h: usize) -> Result<SlepianResult> {
    slepian_from_kernel(concentration_kernel(region, l_h)?, l_h)
}

/// Kernel entry `(n, n')` by masked quadrature over the nodes of `grid` that
/// fall inside the region. Far less accurate than the region-adapted rule
/// near the boundary; used for cross-checks.
pub fn masked_kernel_entry(
    region: &Region,
    grid: &SphereGrid,
    n: usize,
    np: usize,
) -> Result<Complex64> {
    let (l, m) = n_to_lm(n);
    let (lp, mp) = n_to_lm(np);
    let mut acc = Complex64::new(0.0, 0.0);
    for (idx, (theta, phi)) in grid.nodes().enumerate() {
        if region.contains(theta, phi) {
            acc += eval_ylm(l, m, theta, phi)?
                * eval_ylm(lp, mp, theta, phi)?.conj()
                * grid.weight(idx);
        }
    }
    Ok(acc)
}
