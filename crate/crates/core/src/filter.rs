//! Minimum mean-square error filter in the joint SO(3)-spectral domain.
//!
//! For every `(p, q, u)` the filter vector `F_k = (zeta(.; u))^p_{q,k}`
//! solves the normal equations `A(p, u) F = b(p, q, u)` with
//!
//! `A_{k',k} = sum_{n,n'} T(n;p,k;u) T(n';p,k';u) (C^s + C^z)_{nn'}`
//! `b_{k'}   = sum_{n,n'} T(n;p,q;u) T(n';p,k';u) C^s_{nn'}`
//!
//! (the triple products are real). `A` depends only on `(p, u)`, so each
//! system is factored once and solved for all `2p + 1` right-hand sides.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coupling::{coupling_columns, CouplingColumn};
use crate::covariance::SpectralCovariance;
use crate::dslsht::DslshtRep;
use crate::error::{invalid, Error, Result};
use crate::so3::WignerCoeffs;

/// Solver settings for the normal equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    /// Eigenvalues below `rcond * lambda_max` are treated as zero.
    pub rcond: f64,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self { rcond: 1e-10 }
    }
}

/// Outcome of solving one system `A(p, u)`, shared by its `2p + 1` slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemDiagnostics {
    /// Numerical rank of the active part of `A`.
    pub rank: u32,
    /// Number of orders `k` with a nonzero coupling column.
    pub active: u32,
    /// `lambda_max / lambda_min` of the diagonally scaled active part;
    /// infinite when singular.
    pub condition: f64,
    /// True when the minimum-norm pseudo-inverse solution was used, including
    /// the degenerate case `A = 0`.
    pub pseudo_inverse: bool,
}

impl SystemDiagnostics {
    const DEGENERATE: Self = Self {
        rank: 0,
        active: 0,
        condition: f64::INFINITY,
        pseudo_inverse: true,
    };
}

/// Filter coefficients `(zeta(.; u))^p_{q,k}` for all `u < L_g^2`, stored as
/// one Wigner coefficient set per `u` (row `q`, column `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct JointFilter {
    l_h: usize,
    l_g: usize,
    components: Vec<WignerCoeffs>,
    diagnostics: Vec<SystemDiagnostics>,
}

impl JointFilter {
    pub fn from_parts(
        l_h: usize,
        l_g: usize,
        components: Vec<WignerCoeffs>,
        diagnostics: Vec<SystemDiagnostics>,
    ) -> Result<Self> {
        if components.len() != l_g * l_g || diagnostics.len() != l_g * l_g * l_h {
            return Err(invalid(
                "filter component or diagnostic count does not match bandlimits",
            ));
        }
        if components.iter().any(|c| c.bandlimit() != l_h) {
            return Err(invalid("filter component bandlimit differs from L_h"));
        }
        Ok(Self {
            l_h,
            l_g,
            components,
            diagnostics,
        })
    }

    /// `F_k = delta_{k,q}`: leaves every representation unchanged.
    pub fn identity(l_h: usize, l_g: usize) -> Self {
        let mut unit = WignerCoeffs::zeros(l_h);
        for p in 0..l_h {
            let pi = p as i64;
            for q in -pi..=pi {
                unit.set(p, q, q, Complex64::new(1.0, 0.0));
            }
        }
        let diag = SystemDiagnostics {
            rank: 0,
            active: 0,
            condition: 1.0,
            pseudo_inverse: false,
        };
        Self {
            l_h,
            l_g,
            components: vec![unit; l_g * l_g],
            diagnostics: vec![diag; l_g * l_g * l_h],
        }
    }

    pub fn zeros(l_h: usize, l_g: usize) -> Self {
        Self {
            l_h,
            l_g,
            components: vec![WignerCoeffs::zeros(l_h); l_g * l_g],
            diagnostics: vec![SystemDiagnostics::DEGENERATE; l_g * l_g * l_h],
        }
    }

    pub fn l_h(&self) -> usize {
        self.l_h
    }

    pub fn l_g(&self) -> usize {
        self.l_g
    }

    pub fn component(&self, u: usize) -> &WignerCoeffs {
        &self.components[u]
    }

    pub fn components(&self) -> &[WignerCoeffs] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [WignerCoeffs] {
        &mut self.components
    }

    /// Filter vector `F(p, q, u)` of length `2p + 1`.
    pub fn vector(&self, p: usize, q: i64, u: usize) -> &[Complex64] {
        let w = 2 * p + 1;
        let row = (q + p as i64) as usize;
        &self.components[u].block(p)[row * w..(row + 1) * w]
    }

    pub fn diagnostics(&self, p: usize, u: usize) -> &SystemDiagnostics {
        &self.diagnostics[u * self.l_h + p]
    }

    pub fn all_diagnostics(&self) -> &[SystemDiagnostics] {
        &self.diagnostics
    }

    /// Fraction of `(p, q, u)` slots solved through the pseudo-inverse.
    pub fn flagged_fraction(&self) -> f64 {
        flagged_fraction(&self.diagnostics, self.l_h)
    }
}

pub(crate) fn flagged_fraction(diagnostics: &[SystemDiagnostics], l_h: usize) -> f64 {
    slot_fraction(diagnostics, l_h, |d| d.pseudo_inverse)
}

/// Fraction of slots whose system has no active order at all.
pub(crate) fn degenerate_fraction(diagnostics: &[SystemDiagnostics], l_h: usize) -> f64 {
    slot_fraction(diagnostics, l_h, |d| d.active == 0)
}

fn slot_fraction(
    diagnostics: &[SystemDiagnostics],
    l_h: usize,
    pick: impl Fn(&SystemDiagnostics) -> bool,
) -> f64 {
    let mut hit = 0usize;
    let mut total = 0usize;
    for (i, d) in diagnostics.iter().enumerate() {
        let slots = 2 * (i % l_h) + 1;
        total += slots;
        if pick(d) {
            hit += slots;
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

/// `M_{k',k} = sum_{n in col_k} sum_{n' in col_k'} t_k[n] t_k'[n'] C_{n n'}`.
fn gram(cols: &[CouplingColumn], c: &SpectralCovariance) -> DMatrix<Complex64> {
    let w = cols.len();
    let mut m = DMatrix::zeros(w, w);
    for (k, ck) in cols.iter().enumerate() {
        if ck.is_empty() {
            continue;
        }
        for (kp, ckp) in cols.iter().enumerate() {
            if ckp.is_empty() {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (&n, &t) in ck.n.iter().zip(&ck.value) {
                let mut inner = Complex64::new(0.0, 0.0);
                for (&np, &tp) in ckp.n.iter().zip(&ckp.value) {
                    inner += c.get(n, np) * tp;
                }
                acc += inner * t;
            }
            m[(kp, k)] = acc;
        }
    }
    m
}

/// Normal-equation matrix `A(p, u)` from `C^s + C^z`.
pub fn assemble_a(p: usize, u: usize, csum: &SpectralCovariance) -> Result<DMatrix<Complex64>> {
    Ok(gram(&coupling_columns(p, u, csum.bandlimit()), csum))
}

/// Right-hand side `b(p, q, u)` from `C^s`.
pub fn assemble_b(
    p: usize,
    q: i64,
    u: usize,
    cs: &SpectralCovariance,
) -> Result<DVector<Complex64>> {
    if q.unsigned_abs() as usize > p {
        return Err(invalid(format!("order {q} out of range for degree {p}")));
    }
    let g = gram(&coupling_columns(p, u, cs.bandlimit()), cs);
    Ok(g.column((q + p as i64) as usize).into_owned())
}

/// Solves `A X = B` for all columns of `B` restricted to the active orders,
/// falling back to a pseudo-inverse of the diagonally scaled system when
/// `A` is rank deficient.
fn solve_system(
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    active: &[usize],
    opts: &FilterOptions,
) -> Result<(DMatrix<Complex64>, SystemDiagnostics)> {
    let w = a.nrows();
    let mut x = DMatrix::zeros(w, w);
    if active.is_empty() {
        return Ok((x, SystemDiagnostics::DEGENERATE));
    }
    let na = active.len();
    // Jacobi scaling: coupling columns differ in norm by many decades
    let scale: Vec<f64> = active
        .iter()
        .map(|&k| {
            let d = a[(k, k)].re;
            if d > 0.0 && d.is_finite() {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let ar = DMatrix::from_fn(na, na, |i, j| {
        a[(active[i], active[j])] * (scale[i] * scale[j])
    });
    let br = DMatrix::from_fn(na, w, |i, j| b[(active[i], j)] * scale[i]);
    let eig = SymmetricEigen::try_new(ar, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Solver("Hermitian eigen-decomposition did not converge".into()))?;
    let lmax = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut diag = SystemDiagnostics {
        rank: 0,
        active: na as u32,
        condition: f64::INFINITY,
        pseudo_inverse: true,
    };
    if lmax == 0.0 || !lmax.is_finite() {
        return Ok((x, diag));
    }
    let cutoff = opts.rcond * lmax;
    let mut lmin = f64::INFINITY;
    let mut inv = DVector::zeros(na);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            inv[i] = 1.0 / lam;
            diag.rank += 1;
        }
        lmin = lmin.min(lam);
    }
    diag.condition = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    diag.pseudo_inverse = (diag.rank as usize) < na;
    let v = &eig.eigenvectors;
    let mut proj = v.adjoint() * br;
    for (i, mut row) in proj.row_iter_mut().enumerate() {
        row *= Complex64::new(inv[i], 0.0);
    }
    let xr = v * proj;
    for (i, &k) in active.iter().enumerate() {
        for j in 0..w {
            x[(k, j)] = xr[(i, j)] * scale[i];
        }
    }
    Ok((x, diag))
}

/// Filter component for spectral index `u`: returns the Wigner coefficients
/// of `zeta(.; u)` and the diagnostics of each degree `p`.
pub(crate) fn design_component(
    u: usize,
    cs: &SpectralCovariance,
    csum: &SpectralCovariance,
    l_h: usize,
    opts: &FilterOptions,
) -> Result<(WignerCoeffs, Vec<SystemDiagnostics>)> {
    let l_f = cs.bandlimit();
    let mut zeta = WignerCoeffs::zeros(l_h);
    let mut diags = Vec::with_capacity(l_h);
    for p in 0..l_h {
        let w = 2 * p + 1;
        let cols = coupling_columns(p, u, l_f);
        let active: Vec<usize> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, _)| i)
            .collect();
        let a = gram(&cols, csum);
        let b = gram(&cols, cs);
        let (x, diag) = solve_system(&a, &b, &active, opts)?;
        // column q of X is F(p, q, u); store as row q of the block
        let block = zeta.block_mut(p);
        for q in 0..w {
            for k in 0..w {
                block[q * w + k] = x[(k, q)];
            }
        }
        diags.push(diag);
    }
    Ok((zeta, diags))
}

fn check_covariances(cs: &SpectralCovariance, cz: &SpectralCovariance) -> Result<()> {
    if cs.bandlimit() != cz.bandlimit() {
        return Err(Error::BandlimitMismatch {
            expected: cs.bandlimit(),
            actual: cz.bandlimit(),
        });
    }
    for (name, c) in [("signal", cs), ("noise", cz)] {
        let scale = c.matrix().iter().map(|v| v.norm()).fold(1.0, f64::max);
        if c.hermitian_error() > 1e-12 * scale {
            return Err(invalid(format!("{name} covariance is not Hermitian")));
        }
    }
    Ok(())
}

/// Designs the joint filter for window bandlimit `l_h` from the signal and
/// noise spectral covariances.
pub fn design_filter(
    cs: &SpectralCovariance,
    cz: &SpectralCovariance,
    l_h: usize,
    opts: &FilterOptions,
) -> Result<JointFilter> {
    check_covariances(cs, cz)?;
    if l_h == 0 {
        return Err(invalid("window bandlimit must be positive"));
    }
    let csum = cs.sum(cz)?;
    let l_g = cs.bandlimit() + l_h - 1;
    let parts: Vec<(WignerCoeffs, Vec<SystemDiagnostics>)> = (0..l_g * l_g)
        .into_par_iter()
        .map(|u| design_component(u, cs, &csum, l_h, opts))
        .collect::<Result<_>>()?;
    let mut components = Vec::with_capacity(parts.len());
    let mut diagnostics = Vec::with_capacity(parts.len() * l_h);
    for (z, d) in parts {
        components.push(z);
        diagnostics.extend(d);
    }
    Ok(JointFilter {
        l_h,
        l_g,
        components,
        diagnostics,
    })
}

/// `(nu)^p_{q,q'} = sum_k (g)^p_{k,q'} (zeta)^p_{q,k}` for one component.
pub(crate) fn filter_component(g: &WignerCoeffs, zeta: &WignerCoeffs) -> WignerCoeffs {
    let l_h = g.bandlimit();
    let mut nu = WignerCoeffs::zeros(l_h);
    for p in 0..l_h {
        let w = 2 * p + 1;
        let gb = g.block(p);
        let zb = zeta.block(p);
        let nb = nu.block_mut(p);
        for q in 0..w {
            for k in 0..w {
                let z = zb[q * w + k];
                if z == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for qp in 0..w {
                    nb[q * w + qp] += gb[k * w + qp] * z;
                }
            }
        }
    }
    nu
}

/// Applies the filter to every component of a representation.
pub fn apply_filter(g: &DslshtRep, zeta: &JointFilter) -> Result<DslshtRep> {
    if g.l_h() != zeta.l_h() || g.l_g() != zeta.l_g() {
        return Err(invalid(format!(
            "representation (L_h={}, L_g={}) and filter (L_h={}, L_g={}) differ",
            g.l_h(),
            g.l_g(),
            zeta.l_h(),
            zeta.l_g()
        )));
    }
    let components = g
        .components()
        .par_iter()
        .zip(zeta.components.par_iter())
        .map(|(gu, zu)| filter_component(gu, zu))
        .collect();
    DslshtRep::from_components(g.l_f(), g.l_h(), components)
}
