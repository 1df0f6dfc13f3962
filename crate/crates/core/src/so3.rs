//! Functions on the rotation group: Wigner-d/D evaluation and the Wigner
//! coefficient space of bandlimited functions on SO(3).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::sphere::Rotation;

/// `8 pi^2 / (2l + 1)`: squared SO(3) norm of `D^l_{m,m'}`.
#[inline]
pub fn wigner_weight(l: usize) -> f64 {
    8.0 * PI * PI / (2 * l + 1) as f64
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// `d^j_{m,m'}(beta)` at the lowest degree `j = max(|m|, |m'|)`, where the
/// explicit Wigner sum has a single term.
fn seed(j: i64, m: i64, mp: i64, beta: f64, lnf: &[f64]) -> f64 {
    let s = (mp - m).max(0);
    debug_assert_eq!(s, (j + mp).min(j - m));
    let f = |k: i64| lnf[k as usize];
    let cexp = 2 * j + mp - m - 2 * s;
    let sexp = m - mp + 2 * s;
    let (sh, ch) = (0.5 * beta).sin_cos();
    let pow = |base: f64, e: i64| -> Option<f64> {
        if e == 0 {
            Some(0.0)
        } else if base == 0.0 {
            None
        } else {
            Some(e as f64 * base.abs().ln())
        }
    };
    let (Some(lc), Some(ls)) = (pow(ch, cexp), pow(sh, sexp)) else {
        return 0.0;
    };
    let ln_mag = 0.5 * (f(j + m) + f(j - m) + f(j + mp) + f(j - mp))
        - (f(j + mp - s) + f(s) + f(m - mp + s) + f(j - m - s))
        + lc
        + ls;
    let mut sign = if (m - mp + s).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    };
    if ch < 0.0 && cexp % 2 == 1 {
        sign = -sign;
    }
    if sh < 0.0 && sexp % 2 == 1 {
        sign = -sign;
    }
    sign * ln_mag.exp()
}

/// `d^l_{m,m'}(beta)` for all `l` in `max(|m|,|m'|) .. lmax` (exclusive),
/// by the three-term recursion in degree seeded with the closed form at the
/// lowest admissible degree.
fn d_ladder(m: i64, mp: i64, lmax: usize, beta: f64, lnf: &[f64], out: &mut Vec<f64>) {
    out.clear();
    let l0 = m.abs().max(mp.abs());
    if l0 as usize >= lmax {
        return;
    }
    let cb = beta.cos();
    let d0 = seed(l0, m, mp, beta, lnf);
    out.push(d0);
    if l0 as usize + 1 >= lmax {
        return;
    }
    let (mf, mpf) = (m as f64, mp as f64);
    let mut prev = 0.0;
    let mut cur = d0;
    for l in l0..(lmax as i64 - 1) {
        let next = if l == 0 {
            cb
        } else {
            let lf = l as f64;
            let l1 = lf + 1.0;
            let denom = ((l1 * l1 - mf * mf) * (l1 * l1 - mpf * mpf)).sqrt();
            let a = l1 * (2.0 * lf + 1.0) / denom * (cb - mf * mpf / (lf * l1));
            let b = l1 * ((lf * lf - mf * mf) * (lf * lf - mpf * mpf)).sqrt() / (lf * denom);
            a * cur - b * prev
        };
        out.push(next);
        prev = cur;
        cur = next;
    }
}

/// Wigner-d matrices for every degree below `lmax`. Block `l` is row-major
/// `(2l+1) x (2l+1)` with entry `(m + l, m' + l)`.
pub fn wigner_d_table(lmax: usize, beta: f64) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = (0..lmax)
        .map(|l| vec![0.0; (2 * l + 1) * (2 * l + 1)])
        .collect();
    if lmax == 0 {
        return table;
    }
    let lnf = ln_factorials(2 * lmax + 2);
    let top = lmax as i64 - 1;
    let mut ladder = Vec::with_capacity(lmax);
    for m in -top..=top {
        for mp in -top..=top {
            d_ladder(m, mp, lmax, beta, &lnf, &mut ladder);
            let l0 = m.abs().max(mp.abs()) as usize;
            for (i, v) in ladder.iter().enumerate() {
                let l = l0 + i;
                let li = l as i64;
                table[l][(m + li) as usize * (2 * l + 1) + (mp + li) as usize] = *v;
            }
        }
    }
    table
}

/// Real orthogonal matrix `d^l(beta)`, rows and columns indexed by `m + l`.
pub fn wigner_d_matrix(l: usize, beta: f64) -> DMatrix<f64> {
    let w = 2 * l + 1;
    let lnf = ln_factorials(2 * l + 2);
    let li = l as i64;
    let mut ladder = Vec::new();
    DMatrix::from_fn(w, w, |r, c| {
        let (m, mp) = (r as i64 - li, c as i64 - li);
        d_ladder(m, mp, l + 1, beta, &lnf, &mut ladder);
        *ladder.last().expect("degree is admissible")
    })
}

/// Single element `d^l_{m,m'}(beta)`.
pub fn wigner_d(l: usize, m: i64, mp: i64, beta: f64) -> f64 {
    if m.unsigned_abs() as usize > l || mp.unsigned_abs() as usize > l {
        return 0.0;
    }
    let lnf = ln_factorials(2 * l + 2);
    let mut ladder = Vec::new();
    d_ladder(m, mp, l + 1, beta, &lnf, &mut ladder);
    *ladder.last().unwrap()
}

/// `D^l_{m,m'}(rho) = e^{-i m alpha} d^l_{m,m'}(beta) e^{-i m' gamma}`.
pub fn wigner_big_d(l: usize, m: i64, mp: i64, rho: &Rotation) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l || mp.unsigned_abs() as usize > l {
        return Err(invalid(format!(
            "orders ({m}, {mp}) out of range for degree {l}"
        )));
    }
    let d = wigner_d(l, m, mp, rho.beta);
    Ok(Complex64::from_polar(
        d,
        -(m as f64) * rho.alpha - (mp as f64) * rho.gamma,
    ))
}

/// Offset of the degree-`l` block in a flat Wigner coefficient vector:
/// `sum_{j<l} (2j+1)^2 = l(2l-1)(2l+1)/3`.
#[inline]
pub fn block_offset(l: usize) -> usize {
    if l == 0 {
        0
    } else {
        l * (2 * l - 1) * (2 * l + 1) / 3
    }
}

/// Coefficients `(g)^l_{m,m'}` of a function on SO(3) bandlimited to `L`,
/// stored as ragged row-major `(2l+1) x (2l+1)` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerCoeffs {
    bandlimit: usize,
    data: Vec<Complex64>,
}

impl WignerCoeffs {
    pub fn zeros(bandlimit: usize) -> Self {
        Self {
            bandlimit,
            data: vec![Complex64::new(0.0, 0.0); block_offset(bandlimit)],
        }
    }

    pub fn from_vec(bandlimit: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != block_offset(bandlimit) {
            return Err(Error::BandlimitMismatch {
                expected: block_offset(bandlimit),
                actual: data.len(),
            });
        }
        Ok(Self { bandlimit, data })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    fn index(l: usize, m: i64, mp: i64) -> usize {
        let li = l as i64;
        block_offset(l) + (m + li) as usize * (2 * l + 1) + (mp + li) as usize
    }

    pub fn get(&self, l: usize, m: i64, mp: i64) -> Complex64 {
        self.data[Self::index(l, m, mp)]
    }

    pub fn set(&mut self, l: usize, m: i64, mp: i64, v: Complex64) {
        let i = Self::index(l, m, mp);
        self.data[i] = v;
    }

    /// Degree-`l` block, row `m + l`, column `m' + l`.
    pub fn block(&self, l: usize) -> &[Complex64] {
        &self.data[block_offset(l)..block_offset(l + 1)]
    }

    pub fn block_mut(&mut self, l: usize) -> &mut [Complex64] {
        &mut self.data[block_offset(l)..block_offset(l + 1)]
    }

    /// `<self, other>_{SO(3)}` evaluated with Wigner-D orthogonality.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.bandlimit != other.bandlimit {
            return Err(Error::BandlimitMismatch {
                expected: self.bandlimit,
                actual: other.bandlimit,
            });
        }
        Ok((0..self.bandlimit)
            .map(|l| {
                let s: Complex64 = self
                    .block(l)
                    .iter()
                    .zip(other.block(l))
                    .map(|(a, b)| a * b.conj())
                    .sum();
                s * wigner_weight(l)
            })
            .sum())
    }
}

/// `||g||^2_{SO(3)} = sum_{l,m,m'} 8 pi^2/(2l+1) |(g)^l_{m,m'}|^2`.
pub fn so3_norm_sq(g: &WignerCoeffs) -> f64 {
    (0..g.bandlimit())
        .map(|l| wigner_weight(l) * g.block(l).iter().map(|c| c.norm_sqr()).sum::<f64>())
        .sum()
}

/// Pointwise synthesis `g(rho) = sum (g)^l_{m,m'} D^l_{m,m'}(rho)`.
pub fn so3_synthesize(g: &WignerCoeffs, rho: &Rotation) -> Complex64 {
    let table = wigner_d_table(g.bandlimit(), rho.beta);
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, d) in table.iter().enumerate() {
        let li = l as i64;
        let w = 2 * l + 1;
        let block = g.block(l);
        for m in -li..=li {
            for mp in -li..=li {
                let idx = (m + li) as usize * w + (mp + li) as usize;
                let phase =
                    Complex64::from_polar(1.0, -(m as f64) * rho.alpha - (mp as f64) * rho.gamma);
                acc += block[idx] * phase * d[idx];
            }
        }
    }
    acc
}
