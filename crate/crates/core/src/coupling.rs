//! Wigner-3j symbols and spherical harmonic triple products.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::sphere::{lm_to_n, n_to_lm};

/// Values `(j1 j2 j3; m1 m2 m3)` for every admissible `j1`, with
/// `m1 = -(m2 + m3)`. Returns `(j1_min, values)`; `values` is empty when no
/// `j1` is admissible.
///
/// Uses the three-term recursion in `j1` run inward from both ends of the
/// range and matched in the oscillatory region, normalized by
/// `sum_j (2j+1) f(j)^2 = 1` with sign fixed at `j1_max`.
pub fn wigner3j_family(j2: i64, j3: i64, m2: i64, m3: i64) -> (i64, Vec<f64>) {
    let m1 = -(m2 + m3);
    if j2 < 0 || j3 < 0 || m2.abs() > j2 || m3.abs() > j3 {
        return (0, Vec::new());
    }
    let jmin = (j2 - j3).abs().max(m1.abs());
    let jmax = j2 + j3;
    if jmin > jmax {
        return (jmin, Vec::new());
    }
    let n = (jmax - jmin + 1) as usize;
    let (fj2, fj3, fm1, fm2, fm3) = (j2 as f64, j3 as f64, m1 as f64, m2 as f64, m3 as f64);
    let a = |j: i64| -> f64 {
        let j = j as f64;
        ((j * j - (fj2 - fj3).powi(2)) * ((fj2 + fj3 + 1.0).powi(2) - j * j) * (j * j - fm1 * fm1))
            .sqrt()
    };
    let b = |j: i64| -> f64 {
        let jf = j as f64;
        -(2.0 * jf + 1.0)
            * (fj2 * (fj2 + 1.0) * fm1 - fj3 * (fj3 + 1.0) * fm1 - jf * (jf + 1.0) * (fm3 - fm2))
    };

    let mut f = vec![0.0; n];
    if n == 1 {
        f[0] = 1.0;
    } else {
        // forward from jmin while the solution grows
        f[0] = 1.0;
        f[1] = if jmin == 0 {
            // j2 == j3, m1 == 0: (1 J J; 0 m -m) / (0 J J; 0 m -m) = m / sqrt(J(J+1))
            fm2 / (fj2 * (fj2 + 1.0)).sqrt()
        } else {
            -b(jmin) / (jmin as f64 * a(jmin + 1))
        };
        let mut fwd_end = 1usize;
        let mut peak = f[0].abs().max(f[1].abs());
        while fwd_end + 1 < n {
            let j = jmin + fwd_end as i64;
            let next = -(b(j) * f[fwd_end] + (j + 1) as f64 * a(j) * f[fwd_end - 1])
                / (j as f64 * a(j + 1));
            let mag = next.abs().max(f[fwd_end].abs());
            if mag < peak {
                break;
            }
            peak = mag;
            fwd_end += 1;
            f[fwd_end] = next;
            if next.abs() > 1e150 {
                for v in &mut f[..=fwd_end] {
                    *v *= 1e-150;
                }
                peak *= 1e-150;
            }
        }
        // the match uses two points: fwd_end - 1 and fwd_end
        let match_lo = fwd_end - 1;
        let mut g = vec![0.0; n];
        g[n - 1] = 1.0;
        if n >= 2 {
            g[n - 2] = -b(jmax) / ((jmax + 1) as f64 * a(jmax));
        }
        let mut idx = n - 2;
        while idx > match_lo {
            let j = jmin + idx as i64;
            g[idx - 1] =
                -(b(j) * g[idx] + j as f64 * a(j + 1) * g[idx + 1]) / ((j + 1) as f64 * a(j));
            idx -= 1;
            if g[idx].abs() > 1e150 {
                for v in &mut g[idx..] {
                    *v *= 1e-150;
                }
            }
        }
        let num = f[match_lo] * g[match_lo] + f[fwd_end] * g[fwd_end];
        let den = f[match_lo] * f[match_lo] + f[fwd_end] * f[fwd_end];
        let scale = num / den;
        for i in 0..n {
            f[i] = if i <= fwd_end { f[i] * scale } else { g[i] };
        }
    }
    let norm: f64 = f
        .iter()
        .enumerate()
        .map(|(i, v)| (2 * (jmin + i as i64) + 1) as f64 * v * v)
        .sum::<f64>()
        .sqrt();
    let want_negative = (j2 - j3 - m1).rem_euclid(2) == 1;
    let sign = if (f[n - 1] < 0.0) != want_negative {
        -1.0
    } else {
        1.0
    };
    for v in &mut f {
        *v *= sign / norm;
    }
    (jmin, f)
}

/// Wigner-3j symbol `(l1 l2 l3; m1 m2 m3)`. Zero when the triangle or
/// order selection rules fail; negative degrees are rejected.
pub fn wigner3j(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> Result<f64> {
    if l1 < 0 || l2 < 0 || l3 < 0 {
        return Err(invalid("Wigner-3j degrees must be non-negative"));
    }
    if m1.abs() > l1 || m2.abs() > l2 || m3.abs() > l3 || m1 + m2 + m3 != 0 {
        return Ok(0.0);
    }
    if l1 < (l2 - l3).abs() || l1 > l2 + l3 {
        return Ok(0.0);
    }
    let (jmin, vals) = wigner3j_family(l2, l3, m2, m3);
    Ok(vals.get((l1 - jmin) as usize).copied().unwrap_or(0.0))
}

fn parity_sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `T(n; p, q; u) = int Y_n Y_p^q conj(Y_u) ds`
/// `= (-1)^w sqrt((2l+1)(2p+1)(2v+1)/4pi) (l p v; 0 0 0) (l p v; m q -w)`.
pub fn triple_product(n: usize, p: usize, q: i64, u: usize) -> Result<f64> {
    if q.unsigned_abs() as usize > p {
        return Err(invalid(format!("order {q} out of range for degree {p}")));
    }
    let (l, m) = n_to_lm(n);
    let (v, w) = n_to_lm(u);
    let (l, p, v) = (l as i64, p as i64, v as i64);
    if m + q != w || (l + p + v) % 2 == 1 {
        return Ok(0.0);
    }
    let c0 = wigner3j(l, p, v, 0, 0, 0)?;
    if c0 == 0.0 {
        return Ok(0.0);
    }
    let c1 = wigner3j(l, p, v, m, q, -w)?;
    let pref = (((2 * l + 1) * (2 * p + 1) * (2 * v + 1)) as f64 / (4.0 * PI)).sqrt();
    Ok(parity_sign(w) * pref * c0 * c1)
}

/// Degree range `[lo, hi]` of `n` that can couple to `(p, k, u)` at bandlimit
/// `l_f`, with the fixed order `m = w - k`. `None` if empty.
fn degree_range(p: usize, k: i64, u: usize, l_f: usize) -> Option<(i64, i64, i64)> {
    let (v, w) = n_to_lm(u);
    let m = w - k;
    let lo = (v as i64 - p as i64).abs().max(m.abs());
    let hi = (v as i64 + p as i64).min(l_f as i64 - 1);
    (lo <= hi).then_some((lo, hi, m))
}

/// Sphere indices `n` for which `T(n; p, k; u)` can be nonzero when `n` is
/// restricted to bandlimit `l_f`: order `m = w - k` and
/// `max(|v - p|, |m|) <= l <= min(v + p, l_f - 1)`.
pub fn nonzero_n_range(p: usize, k: i64, u: usize, l_f: usize) -> Vec<usize> {
    match degree_range(p, k, u, l_f) {
        Some((lo, hi, m)) => (lo..=hi).map(|l| lm_to_n(l as usize, m)).collect(),
        None => Vec::new(),
    }
}

/// Nonzero entries of `T(.; p, k; u)` over `n < l_f^2`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CouplingColumn {
    pub n: Vec<usize>,
    pub value: Vec<f64>,
}

impl CouplingColumn {
    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn dot_real(&self, x: &[num_complex::Complex64]) -> num_complex::Complex64 {
        self.n
            .iter()
            .zip(&self.value)
            .map(|(&n, &t)| x[n] * t)
            .sum()
    }
}

/// All columns `k = -p..=p` of the triple products for fixed `(p, u)`,
/// restricted to `n < l_f^2`. One 3j recursion per column covers every
/// admissible degree of `n`.
pub fn coupling_columns(p: usize, u: usize, l_f: usize) -> Vec<CouplingColumn> {
    let (v, w) = n_to_lm(u);
    let (pi, vi) = (p as i64, v as i64);
    let (zmin, zero_orders) = wigner3j_family(pi, vi, 0, 0);
    let pref_pv = ((2 * p + 1) * (2 * v + 1)) as f64 / (4.0 * PI);
    let sign_w = parity_sign(w);
    (-pi..=pi)
        .map(|k| {
            let mut col = CouplingColumn::default();
            let Some((lo, hi, m)) = degree_range(p, k, u, l_f) else {
                return col;
            };
            let (fmin, family) = wigner3j_family(pi, vi, k, -w);
            debug_assert_eq!(fmin, lo.max(fmin));
            for l in lo..=hi {
                if (l + pi + vi) % 2 == 1 {
                    continue;
                }
                let c0 = zero_orders[(l - zmin) as usize];
                let c1 = family[(l - fmin) as usize];
                let t = sign_w * (pref_pv * (2 * l + 1) as f64).sqrt() * c0 * c1;
                if t != 0.0 {
                    col.n.push(lm_to_n(l as usize, m));
                    col.value.push(t);
                }
            }
            col
        })
        .collect()
}

/// Dense lookup of all nonzero `T(n; p, q; u)` for `n < L_f^2`, `p < L_h`,
/// `u < L_g^2` with `L_g = L_f + L_h - 1`. Intended for small bandlimits.
#[derive(Debug, Clone)]
pub struct TripleProductTable {
    l_f: usize,
    l_h: usize,
    l_g: usize,
    entries: HashMap<(usize, usize, i64, usize), f64>,
}

impl TripleProductTable {
    pub fn build(l_f: usize, l_h: usize) -> Result<Self> {
        if l_f == 0 || l_h == 0 {
            return Err(invalid("bandlimits must be positive"));
        }
        let l_g = l_f + l_h - 1;
        let mut entries = HashMap::new();
        for u in 0..l_g * l_g {
            for p in 0..l_h {
                for (i, col) in coupling_columns(p, u, l_f).into_iter().enumerate() {
                    let q = i as i64 - p as i64;
                    for (n, t) in col.n.into_iter().zip(col.value) {
                        entries.insert((n, p, q, u), t);
                    }
                }
            }
        }
        Ok(Self {
            l_f,
            l_h,
            l_g,
            entries,
        })
    }

    pub fn bandlimits(&self) -> (usize, usize, usize) {
        (self.l_f, self.l_h, self.l_g)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: usize, p: usize, q: i64, u: usize) -> Result<f64> {
        if n >= self.l_f * self.l_f
            || p >= self.l_h
            || q.unsigned_abs() as usize > p
            || u >= self.l_g * self.l_g
        {
            return Err(invalid(format!(
                "index (n={n}, p={p}, q={q}, u={u}) out of range"
            )));
        }
        Ok(self.entries.get(&(n, p, q, u)).copied().unwrap_or(0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize, i64, usize), &f64)> {
        self.entries.iter()
    }
}
