//! Plain-text coefficient and covariance files, binary filter and
//! representation dumps.
//!
//! Text files print floats with `{:e}`, which is the shortest representation
//! that parses back to the same value, so text round-trips are exact too.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::covariance::SpectralCovariance;
use crate::dslsht::DslshtRep;
use crate::error::{Error, Result};
use crate::filter::{JointFilter, SystemDiagnostics};
use crate::so3::WignerCoeffs;
use crate::sphere::SphericalCoeffs;

fn format_err(kind: &'static str, reason: impl Into<String>) -> Error {
    Error::Format {
        kind,
        reason: reason.into(),
    }
}

fn parse_header(line: &str, magic: &str, kind: &'static str) -> Result<usize> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(magic) || parts.next() != Some("v1") {
        return Err(format_err(
            kind,
            format!("expected header `{magic} v1 L=<int>`"),
        ));
    }
    let l = parts
        .next()
        .and_then(|s| s.strip_prefix("L="))
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| format_err(kind, "missing or malformed L= field"))?;
    if parts.next().is_some() {
        return Err(format_err(kind, "trailing tokens in header"));
    }
    Ok(l)
}

fn parse_f64(tok: Option<&str>, kind: &'static str, line: usize) -> Result<f64> {
    tok.and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| format_err(kind, format!("bad number on line {line}")))
}

/// Writes `slm v1 L=<L>` followed by `n re im` for every coefficient.
pub fn write_coeffs<W: Write>(mut w: W, c: &SphericalCoeffs) -> Result<()> {
    writeln!(w, "slm v1 L={}", c.bandlimit())?;
    for (n, v) in c.as_slice().iter().enumerate() {
        writeln!(w, "{n} {:e} {:e}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_coeffs<R: Read>(r: R) -> Result<SphericalCoeffs> {
    const KIND: &str = "coefficients";
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(KIND, "empty file"))??;
    let l = parse_header(&header, "slm", KIND)?;
    let mut data = Vec::with_capacity(l * l);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let mut parts = line.split_whitespace();
        let n: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(KIND, format!("bad index on line {lineno}")))?;
        if n != data.len() {
            return Err(format_err(
                KIND,
                format!("index {n} out of order on line {lineno}"),
            ));
        }
        let re = parse_f64(parts.next(), KIND, lineno)?;
        let im = parse_f64(parts.next(), KIND, lineno)?;
        if parts.next().is_some() {
            return Err(format_err(
                KIND,
                format!("trailing tokens on line {lineno}"),
            ));
        }
        data.push(Complex64::new(re, im));
    }
    if data.len() != l * l {
        return Err(format_err(
            KIND,
            format!("expected {} coefficients, found {}", l * l, data.len()),
        ));
    }
    SphericalCoeffs::new(l, data)
}

/// Row-major covariance text file: `cov v1 L=<L>`, then one matrix row per
/// line as alternating `re im` pairs.
pub fn write_covariance<W: Write>(mut w: W, c: &SpectralCovariance) -> Result<()> {
    writeln!(w, "cov v1 L={}", c.bandlimit())?;
    let m = c.matrix();
    for i in 0..c.dim() {
        let row: Vec<String> = (0..c.dim())
            .map(|j| format!("{:e} {:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_covariance<R: Read>(r: R) -> Result<SpectralCovariance> {
    const KIND: &str = "covariance";
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(KIND, "empty file"))??;
    let l = parse_header(&header, "cov", KIND)?;
    let dim = l * l;
    let mut m = DMatrix::zeros(dim, dim);
    let mut row = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        if row == dim {
            return Err(format_err(KIND, format!("extra row on line {lineno}")));
        }
        let vals = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| format_err(KIND, format!("bad number on line {lineno}")))?;
        if vals.len() != 2 * dim {
            return Err(format_err(
                KIND,
                format!(
                    "line {lineno} has {} values, expected {}",
                    vals.len(),
                    2 * dim
                ),
            ));
        }
        for j in 0..dim {
            m[(row, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
        }
        row += 1;
    }
    if row != dim {
        return Err(format_err(
            KIND,
            format!("expected {dim} rows, found {row}"),
        ));
    }
    SpectralCovariance::new(l, m)
}

fn put_complex<W: Write>(w: &mut W, v: Complex64) -> Result<()> {
    w.write_all(&v.re.to_le_bytes())?;
    w.write_all(&v.im.to_le_bytes())?;
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R, kind: &'static str) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => format_err(kind, "truncated data"),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn take_complex<R: Read>(r: &mut R, kind: &'static str) -> Result<Complex64> {
    let re = f64::from_le_bytes(take::<8, _>(r, kind)?);
    let im = f64::from_le_bytes(take::<8, _>(r, kind)?);
    Ok(Complex64::new(re, im))
}

fn read_ascii_header<R: BufRead>(
    r: &mut R,
    magic: &str,
    kind: &'static str,
) -> Result<(usize, usize)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != magic || parts[1] != "v1" {
        return Err(format_err(
            kind,
            format!("expected header `{magic} v1 <int> <int>`"),
        ));
    }
    let a = parts[2]
        .parse()
        .map_err(|_| format_err(kind, "bad header integer"))?;
    let b = parts[3]
        .parse()
        .map_err(|_| format_err(kind, "bad header integer"))?;
    Ok((a, b))
}

fn expect_eof<R: Read>(r: &mut R, kind: &'static str) -> Result<()> {
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(format_err(kind, "trailing bytes"));
    }
    Ok(())
}

/// Binary filter file: header line `jfilt v1 <Lh> <Lg>`, then for every `u`
/// and `p` the system diagnostics (u8 flag, u32 rank, u32 active, f64
/// condition) followed by the `(2p+1)^2` coefficients, row `q` by row.
/// All numbers little-endian.
pub fn write_filter<W: Write>(w: W, f: &JointFilter) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "jfilt v1 {} {}", f.l_h(), f.l_g())?;
    for u in 0..f.l_g() * f.l_g() {
        let comp = f.component(u);
        for p in 0..f.l_h() {
            let d = f.diagnostics(p, u);
            w.write_all(&[d.pseudo_inverse as u8])?;
            w.write_all(&d.rank.to_le_bytes())?;
            w.write_all(&d.active.to_le_bytes())?;
            w.write_all(&d.condition.to_le_bytes())?;
            for &v in comp.block(p) {
                put_complex(&mut w, v)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_filter<R: Read>(r: R) -> Result<JointFilter> {
    const KIND: &str = "filter";
    let mut r = BufReader::new(r);
    let (l_h, l_g) = read_ascii_header(&mut r, "jfilt", KIND)?;
    if l_h == 0 || l_g < l_h {
        return Err(format_err(KIND, "inconsistent bandlimits"));
    }
    let mut components = Vec::with_capacity(l_g * l_g);
    let mut diagnostics = Vec::with_capacity(l_g * l_g * l_h);
    for _ in 0..l_g * l_g {
        let mut comp = WignerCoeffs::zeros(l_h);
        for p in 0..l_h {
            let flag = take::<1, _>(&mut r, KIND)?[0];
            if flag > 1 {
                return Err(format_err(KIND, "bad flag byte"));
            }
            let rank = u32::from_le_bytes(take::<4, _>(&mut r, KIND)?);
            let active = u32::from_le_bytes(take::<4, _>(&mut r, KIND)?);
            let condition = f64::from_le_bytes(take::<8, _>(&mut r, KIND)?);
            diagnostics.push(SystemDiagnostics {
                rank,
                active,
                condition,
                pseudo_inverse: flag == 1,
            });
            for v in comp.block_mut(p) {
                *v = take_complex(&mut r, KIND)?;
            }
        }
        components.push(comp);
    }
    expect_eof(&mut r, KIND)?;
    JointFilter::from_parts(l_h, l_g, components, diagnostics)
}

/// Debug dump of a representation: header line `dslsht v1 <Lf> <Lh>`, then
/// the Wigner coefficients of every component `u` as little-endian pairs.
pub fn write_dslsht<W: Write>(w: W, g: &DslshtRep) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "dslsht v1 {} {}", g.l_f(), g.l_h())?;
    for comp in g.components() {
        for &v in comp.as_slice() {
            put_complex(&mut w, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_dslsht<R: Read>(r: R) -> Result<DslshtRep> {
    const KIND: &str = "dslsht";
    let mut r = BufReader::new(r);
    let (l_f, l_h) = read_ascii_header(&mut r, "dslsht", KIND)?;
    if l_f == 0 || l_h == 0 {
        return Err(format_err(KIND, "bandlimits must be positive"));
    }
    let l_g = l_f + l_h - 1;
    let mut components = Vec::with_capacity(l_g * l_g);
    for _ in 0..l_g * l_g {
        let mut comp = WignerCoeffs::zeros(l_h);
        for v in comp.as_mut_slice() {
            *v = take_complex(&mut r, KIND)?;
        }
        components.push(comp);
    }
    expect_eof(&mut r, KIND)?;
    DslshtRep::from_components(l_f, l_h, components)
}

pub fn save_coeffs(path: &Path, c: &SphericalCoeffs) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_coeffs(&mut w, c)?;
    w.flush()?;
    Ok(())
}

pub fn load_coeffs(path: &Path) -> Result<SphericalCoeffs> {
    read_coeffs(fs::File::open(path)?)
}

pub fn save_covariance(path: &Path, c: &SpectralCovariance) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write_covariance(&mut w, c)?;
    w.flush()?;
    Ok(())
}

pub fn load_covariance(path: &Path) -> Result<SpectralCovariance> {
    read_covariance(fs::File::open(path)?)
}

pub fn save_filter(path: &Path, f: &JointFilter) -> Result<()> {
    write_filter(fs::File::create(path)?, f)
}

pub fn load_filter(path: &Path) -> Result<JointFilter> {
    read_filter(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{complex_gaussian, synth_signal};

    #[test]
    fn coeffs_round_trip_exact() {
        let c = synth_signal(5, 3);
        let mut buf = Vec::new();
        write_coeffs(&mut buf, &c).unwrap();
        let back = read_coeffs(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn coeffs_length_mismatch_rejected() {
        let text = "slm v1 L=2\n0 1 0\n1 0 0\n2 0 0\n";
        assert!(matches!(
            read_coeffs(text.as_bytes()),
            Err(Error::Format { .. })
        ));
        let text = "slm v1 L=1\n0 1 0\n1 0 0\n";
        assert!(read_coeffs(text.as_bytes()).is_err());
        assert!(read_coeffs("slm v2 L=1\n0 1 0\n".as_bytes()).is_err());
        assert!(read_coeffs("slm v1 L=1\n0 1\n".as_bytes()).is_err());
    }

    #[test]
    fn covariance_round_trip_exact() {
        let c = SpectralCovariance::rank_one(&synth_signal(3, 9)).unwrap();
        let mut buf = Vec::new();
        write_covariance(&mut buf, &c).unwrap();
        let back = read_covariance(buf.as_slice()).unwrap();
        assert_eq!(back.matrix(), c.matrix());
    }

    #[test]
    fn covariance_short_file_rejected() {
        let text = "cov v1 L=1\n";
        assert!(read_covariance(text.as_bytes()).is_err());
    }

    #[test]
    fn filter_round_trip_bit_exact() {
        let (l_h, l_g) = (3, 4);
        let mut f = JointFilter::identity(l_h, l_g);
        for (u, comp) in f.components_mut().iter_mut().enumerate() {
            let vals = complex_gaussian(comp.len(), u as u64);
            comp.as_mut_slice().copy_from_slice(&vals);
        }
        let mut buf = Vec::new();
        write_filter(&mut buf, &f).unwrap();
        let back = read_filter(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        for (a, b) in back.components().iter().zip(f.components()) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        buf.pop();
        assert!(read_filter(buf.as_slice()).is_err());
    }

    #[test]
    fn dslsht_round_trip() {
        let f = synth_signal(3, 1);
        let h = synth_signal(2, 2);
        let g = crate::dslsht::forward_dslsht(&f, &h).unwrap();
        let mut buf = Vec::new();
        write_dslsht(&mut buf, &g).unwrap();
        let back = read_dslsht(buf.as_slice()).unwrap();
        assert_eq!(back.max_abs_diff(&g), 0.0);
        buf.push(0);
        assert!(read_dslsht(buf.as_slice()).is_err());
    }
}
