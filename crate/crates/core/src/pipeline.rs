//! End-to-end denoising and the SNR benchmark harness.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::covariance::SpectralCovariance;
use crate::dslsht::dslsht_component;
use crate::error::{invalid, Error, Result};
use crate::estimator::{accumulate_component, finish_estimate};
use crate::filter::{
    degenerate_fraction, design_component, filter_component, flagged_fraction, FilterOptions,
    SystemDiagnostics,
};
use crate::noise::{calibrate_snr, snr, NoiseModel};
use crate::so3::WignerCoeffs;
use crate::sphere::SphericalCoeffs;

/// Oracle signal covariance `s s^H`.
pub fn build_signal_covariance(s: &SphericalCoeffs) -> Result<SpectralCovariance> {
    SpectralCovariance::rank_one(s)
}

/// Estimate plus solver statistics of one denoising run.
#[derive(Debug, Clone)]
pub struct DenoiseOutput {
    pub estimate: SphericalCoeffs,
    /// Fraction of `(p, q, u)` filter slots solved through the pseudo-inverse.
    pub flagged_fraction: f64,
    /// Part of `flagged_fraction` with no active order (`F = 0` by structure).
    pub degenerate_fraction: f64,
    pub systems: usize,
}

/// Full pipeline: DSLSHT of `f`, filter design, filtering and least-squares
/// estimation. Components are streamed per spectral index `u`, so neither
/// the representation nor the filter is held in memory at once.
pub fn denoise(
    f: &SphericalCoeffs,
    cs: &SpectralCovariance,
    cz: &SpectralCovariance,
    h: &SphericalCoeffs,
    opts: &FilterOptions,
) -> Result<DenoiseOutput> {
    let l_f = f.bandlimit();
    if cs.bandlimit() != l_f || cz.bandlimit() != l_f {
        return Err(Error::BandlimitMismatch {
            expected: l_f,
            actual: if cs.bandlimit() != l_f {
                cs.bandlimit()
            } else {
                cz.bandlimit()
            },
        });
    }
    if h.is_zero() {
        return Err(Error::Degenerate("window is identically zero".into()));
    }
    let l_h = h.bandlimit();
    let l_g = l_f + l_h - 1;
    let csum = cs.sum(cz)?;
    let dim = l_f * l_f;
    type Acc = (Vec<Complex64>, Vec<SystemDiagnostics>);
    let (acc, diags) = (0..l_g * l_g)
        .into_par_iter()
        .map(|u| -> Result<(usize, WorkItem)> {
            let g = dslsht_component(f, h, u);
            let (zeta, d) = design_component(u, cs, &csum, l_h, opts)?;
            let nu = filter_component(&g, &zeta);
            Ok((u, WorkItem { nu, diags: d }))
        })
        .try_fold(
            || -> Acc { (vec![Complex64::new(0.0, 0.0); dim], Vec::new()) },
            |(mut acc, mut diags), item| -> Result<Acc> {
                let (u, w) = item?;
                accumulate_component(&w.nu, h, u, l_f, &mut acc);
                diags.extend(w.diags);
                Ok((acc, diags))
            },
        )
        .try_reduce(
            || (vec![Complex64::new(0.0, 0.0); dim], Vec::new()),
            |(mut a, mut da), (b, db)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                da.extend(db);
                Ok((a, da))
            },
        )?;
    // each u contributes its degrees in order, so the concatenation is valid
    let flagged = flagged_fraction(&diags, l_h);
    Ok(DenoiseOutput {
        estimate: finish_estimate(acc, h, l_f)?,
        flagged_fraction: flagged,
        degenerate_fraction: degenerate_fraction(&diags, l_h),
        systems: diags.len(),
    })
}

struct WorkItem {
    nu: WignerCoeffs,
    diags: Vec<SystemDiagnostics>,
}

/// One benchmark trial.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub target_db: f64,
    pub realization: usize,
    pub input_db: f64,
    pub output_db: f64,
}

/// Averages over realizations at one target SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSummary {
    pub target_db: f64,
    pub mean_input_db: f64,
    pub mean_output_db: f64,
    pub std_output_db: f64,
    pub baseline_output_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    pub summary: Vec<BenchmarkSummary>,
}

pub const BENCHMARK_HEADER: &str = "target_db,realization,input_db,output_db";

impl BenchmarkReport {
    /// Per-realization CSV with the stable header.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from(BENCHMARK_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.target_db, r.realization, r.input_db, r.output_db
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "target_db,mean_input_db,mean_output_db,std_output_db,baseline_output_db\n",
        );
        for s in &self.summary {
            let base = s
                .baseline_output_db
                .map(|b| b.to_string())
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.target_db, s.mean_input_db, s.mean_output_db, s.std_output_db, base
            );
        }
        out
    }

    /// Attaches external baseline results keyed by target SNR.
    pub fn attach_baseline(&mut self, baseline: &[(f64, f64)]) {
        for s in &mut self.summary {
            s.baseline_output_db = baseline
                .iter()
                .find(|(t, _)| (t - s.target_db).abs() < 1e-9)
                .map(|&(_, v)| v);
        }
    }
}

/// Seed of the shared mixing matrix, derived from the master seed.
fn mixing_seed(master: u64) -> u64 {
    master ^ 0x6d69_7869_6e67_0001
}

/// SNR sweep: for every target input SNR, `realizations` independent noise
/// draws (realization `r` uses seed `master + r`) are calibrated, denoised
/// and scored. The noise covariance handed to the filter is
/// `alpha^2 T T^H` with the calibrated `alpha`.
pub fn benchmark(
    cfg: &ExperimentConfig,
    source: &SphericalCoeffs,
    window: &SphericalCoeffs,
    opts: &FilterOptions,
) -> Result<BenchmarkReport> {
    cfg.validate()?;
    if source.bandlimit() != cfg.l_f || window.bandlimit() != cfg.l_h {
        return Err(invalid(
            "source/window bandlimits differ from the configuration",
        ));
    }
    let model = NoiseModel::uniform(cfg.l_f, 1.0, mixing_seed(cfg.seed))?;
    let base_cov = model.covariance()?;
    let cs = build_signal_covariance(source)?;
    let draws: Vec<SphericalCoeffs> = (0..cfg.realizations)
        .map(|r| model.synth(cfg.seed.wrapping_add(r as u64)))
        .collect();

    let mut jobs = Vec::new();
    for &target in &cfg.snr_db {
        for r in 0..cfg.realizations {
            jobs.push((target, r));
        }
    }
    let rows: Vec<BenchmarkRow> = jobs
        .par_iter()
        .map(|&(target, r)| -> Result<BenchmarkRow> {
            let (z, alpha) = calibrate_snr(source, &draws[r], target)?;
            let f = source.add(&z)?;
            let cz = base_cov.scaled(alpha * alpha);
            let out = denoise(&f, &cs, &cz, window, opts)?;
            Ok(BenchmarkRow {
                target_db: target,
                realization: r,
                input_db: snr(&f, source)?,
                output_db: snr(&out.estimate, source)?,
            })
        })
        .collect::<Result<_>>()?;

    let summary = cfg
        .snr_db
        .iter()
        .map(|&target| {
            let sel: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.target_db == target).collect();
            let k = sel.len() as f64;
            let mean_in = sel.iter().map(|r| r.input_db).sum::<f64>() / k;
            let mean_out = sel.iter().map(|r| r.output_db).sum::<f64>() / k;
            let var = sel
                .iter()
                .map(|r| (r.output_db - mean_out).powi(2))
                .sum::<f64>()
                / k;
            BenchmarkSummary {
                target_db: target,
                mean_input_db: mean_in,
                mean_output_db: mean_out,
                std_output_db: var.sqrt(),
                baseline_output_db: None,
            }
        })
        .collect();
    Ok(BenchmarkReport { rows, summary })
}

/// Parses a baseline CSV with a header row containing `target_db` and
/// `output_db` columns; rows for the same target are averaged.
pub fn parse_baseline_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Format {
        kind: "baseline",
        reason: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Format {
                kind: "baseline",
                reason: format!("missing column {name}"),
            })
    };
    let (ti, oi) = (find("target_db")?, find("output_db")?);
    let mut acc: Vec<(f64, f64, usize)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format {
                    kind: "baseline",
                    reason: format!("bad value on data line {}", lineno + 1),
                })
        };
        let (t, o) = (parse(ti)?, parse(oi)?);
        match acc.iter_mut().find(|(x, _, _)| *x == t) {
            Some(e) => {
                e.1 += o;
                e.2 += 1;
            }
            None => acc.push((t, o, 1)),
        }
    }
    Ok(acc.into_iter().map(|(t, s, k)| (t, s / k as f64)).collect())
}
