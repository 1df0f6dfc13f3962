//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! The full-scale smoke run (L_f = 64, L_h = 20) is skipped unless the binary
//! gets `--ignored` / `--include-ignored` or `SO3FILT_FULL_SCALE=1` is set:
//!
//! ```text
//! cargo test --release -p so3filt --test acceptance -- --include-ignored
//! ```

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use so3filt::config::ExperimentConfig;
use so3filt::coupling::{triple_product, wigner3j};
use so3filt::filter::{assemble_a, assemble_b};
use so3filt::noise::{synth_signal, NoiseModel};
use so3filt::pipeline::{benchmark, denoise};
use so3filt::{
    apply_filter, calibrate_snr, design_filter, estimate_from_representation, forward_dslsht,
    psi_coeffs, slepian_window, snr, upsilon_matrix, FilterOptions, Region, SpectralCovariance,
    SphericalCoeffs,
};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn frame_identity() -> Outcome {
    let (l_f, l_h) = (8, 4);
    let l_g = l_f + l_h - 1;
    let h = unit_coeffs(l_h, 11);
    let energy = h.norm_sq();
    let quad = so3_quadrature(l_h);
    let tables: Vec<_> = quad.iter().map(|(rho, _)| big_d_table(l_h, rho)).collect();
    let dim = l_f * l_f;
    let mut gram = vec![Complex64::new(0.0, 0.0); dim * dim];
    for u in 0..l_g * l_g {
        // samples[n][j] = psi_{u,n}(rho_j)
        let samples: Vec<Vec<Complex64>> = (0..dim)
            .map(|n| {
                let psi = psi_coeffs(u, n, &h, l_f).unwrap();
                tables
                    .iter()
                    .map(|tab| {
                        let mut v = Complex64::new(0.0, 0.0);
                        for p in 0..l_h {
                            for (c, d) in psi.block(p).iter().zip(&tab[p]) {
                                v += c * d;
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        for n in 0..dim {
            for np in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, (_, w)) in quad.iter().enumerate() {
                    acc += samples[np][j] * samples[n][j].conj() * *w;
                }
                gram[n * dim + np] += acc;
            }
        }
    }
    let target = 2.0 * PI * energy;
    let mut err: f64 = 0.0;
    for n in 0..dim {
        for np in 0..dim {
            let expect = if n == np { target } else { 0.0 };
            err = err.max((gram[n * dim + np] - expect).norm() / target);
        }
    }
    check(
        err <= 1e-8,
        format!("max relative error {err:.2e} over 64x64 pairs (tol 1e-8)"),
    )
}

fn noiseless_recovery() -> Outcome {
    let (l_f, l_h) = (8, 4);
    let s = random_coeffs(l_f, 21);
    let h = unit_coeffs(l_h, 22);
    let cs = SpectralCovariance::rank_one(&s).unwrap();
    let cz = SpectralCovariance::zeros(l_f);
    let out = denoise(&s, &cs, &cz, &h, &FilterOptions::default()).unwrap();
    let rel = out.estimate.sub(&s).unwrap().norm() / s.norm();
    check(rel <= 1e-6, format!("relative error {rel:.2e} (tol 1e-6)"))
}

fn three_j_sum_rules() -> Outcome {
    let jmax = 6i64;
    let mut err: f64 = 0.0;
    let w = |a, b, c, d, e, f| wigner3j(a, b, c, d, e, f).unwrap();
    for j1 in 0..=jmax {
        for j2 in 0..=jmax {
            let lo = (j1 - j2).abs();
            // orthogonality over (m1, m2) at fixed (j3, m3), (j3', m3)
            for j3 in lo..=(j1 + j2).min(jmax) {
                for j3p in lo..=(j1 + j2).min(jmax) {
                    for m3 in -j3.min(j3p)..=j3.min(j3p) {
                        let mut s = 0.0;
                        for m1 in -j1..=j1 {
                            let m2 = -m1 - m3;
                            if m2.abs() <= j2 {
                                s += w(j1, j2, j3, m1, m2, m3) * w(j1, j2, j3p, m1, m2, m3);
                            }
                        }
                        let expect = if j3 == j3p {
                            1.0 / (2 * j3 + 1) as f64
                        } else {
                            0.0
                        };
                        err = err.max((s - expect).abs());
                    }
                }
            }
            // completeness over (j3, m3) at fixed (m1, m2), (m1', m2')
            for m1 in -j1..=j1 {
                for m2 in -j2..=j2 {
                    for m1p in -j1..=j1 {
                        let m2p = m1 + m2 - m1p;
                        if m2p.abs() > j2 {
                            continue;
                        }
                        let m3 = -m1 - m2;
                        let mut s = 0.0;
                        for j3 in lo.max(m3.abs())..=j1 + j2 {
                            s += (2 * j3 + 1) as f64
                                * w(j1, j2, j3, m1, m2, m3)
                                * w(j1, j2, j3, m1p, m2p, m3);
                        }
                        let expect = if m1 == m1p { 1.0 } else { 0.0 };
                        err = err.max((s - expect).abs());
                    }
                }
            }
        }
    }
    check(
        err <= 1e-12,
        format!("max error {err:.2e} for degrees <= 6 (tol 1e-12)"),
    )
}

fn triple_product_quadrature() -> Outcome {
    let (l_f, l_h) = (4usize, 3usize);
    let l_g = l_f + l_h - 1;
    // integrand degree (l_f-1)+(l_h-1)+(l_g-1) = 10
    let quad = sphere_quadrature(8);
    let mut err: f64 = 0.0;
    let mut count = 0;
    for n in 0..l_f * l_f {
        let (l, m) = n_to_lm(n);
        for p in 0..l_h {
            for q in -(p as i64)..=p as i64 {
                for u in 0..l_g * l_g {
                    let (v, w) = n_to_lm(u);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(t, ph, wt) in &quad {
                        acc += ylm(l, m, t, ph) * ylm(p, q, t, ph) * ylm(v, w, t, ph).conj() * wt;
                    }
                    let lib = triple_product(n, p, q, u).unwrap();
                    err = err.max((acc - lib).norm());
                    count += 1;
                }
            }
        }
    }
    check(
        err <= 1e-10,
        format!("max error {err:.2e} over {count} values (tol 1e-10)"),
    )
}

fn normal_equations() -> Outcome {
    let (l_f, l_h) = (8, 4);
    let l_g = l_f + l_h - 1;
    let cs = random_psd(l_f, 5, 31);
    let cz = random_psd(l_f, 64, 32);
    let csum = cs.sum(&cz).unwrap();
    let filter = design_filter(&cs, &cz, l_h, &FilterOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    for u in 0..l_g * l_g {
        for p in 0..l_h {
            let a = assemble_a(p, u, &csum).unwrap();
            let a_norm = a.clone().singular_values().max();
            for q in -(p as i64)..=p as i64 {
                let b = assemble_b(p, q, u, &cs).unwrap();
                let f = DVector::from_column_slice(filter.vector(p, q, u));
                let res = (&a * &f - &b).norm();
                let scale = a_norm * f.norm() + b.norm();
                let ratio = if scale == 0.0 { res } else { res / scale };
                worst = worst.max(ratio);
            }
        }
    }
    check(
        worst <= 1e-8,
        format!("worst ||AF-b||/(||A||||F||+||b||) = {worst:.2e} (tol 1e-8)"),
    )
}

fn upsilon_composition() -> Outcome {
    let (l_f, l_h) = (4, 2);
    let h = unit_coeffs(l_h, 41);
    let cs = random_psd(l_f, 3, 42);
    let cz = random_psd(l_f, 16, 43);
    let zeta = design_filter(&cs, &cz, l_h, &FilterOptions::default()).unwrap();
    let ups = upsilon_matrix(&zeta, &h, l_f).unwrap();
    let mut err: f64 = 0.0;
    for np in 0..l_f * l_f {
        let e = SphericalCoeffs::basis(l_f, np);
        let g = forward_dslsht(&e, &h).unwrap();
        let col = estimate_from_representation(&apply_filter(&g, &zeta).unwrap(), &h).unwrap();
        for n in 0..l_f * l_f {
            err = err.max((ups.matrix()[(n, np)] - col.as_slice()[n]).norm());
        }
    }
    check(err <= 1e-8, format!("max entry error {err:.2e} (tol 1e-8)"))
}

fn snr_gain() -> Outcome {
    let cfg = ExperimentConfig::desk();
    let source = synth_signal(cfg.l_f, 2024);
    let window = slepian_window(&cfg.region, cfg.l_h).unwrap();
    let report = benchmark(&cfg, &source, window.window(), &FilterOptions::default()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for s in &report.summary {
        pass &= s.mean_output_db > s.mean_input_db;
        pass &= s.mean_output_db >= last;
        last = s.mean_output_db;
        parts.push(format!("{:+.1}->{:.2}", s.mean_input_db, s.mean_output_db));
    }
    check(pass, format!("mean input->output dB: {}", parts.join(", ")))
}

fn shannon_number() -> Outcome {
    let theta0 = 15f64.to_radians();
    let l_h = 8;
    let region = Region::polar_cap(theta0).unwrap();
    let res = slepian_window(&region, l_h).unwrap();
    let expect = (l_h * l_h) as f64 * (1.0 - theta0.cos()) / 2.0;
    let rel = (res.shannon_number() - expect).abs() / expect;
    check(
        rel <= 1e-3,
        format!(
            "sum {:.6} vs {expect:.6}, relative error {rel:.2e} (tol 1e-3)",
            res.shannon_number()
        ),
    )
}

fn full_scale_smoke() -> Outcome {
    let (cfg, warning) = ExperimentConfig::full_scale();
    eprintln!("note: {warning}");
    let source = synth_signal(cfg.l_f, 7);
    let window = slepian_window(&cfg.region, cfg.l_h).unwrap();
    let model = NoiseModel::uniform(cfg.l_f, 1.0, cfg.seed).unwrap();
    let (z, alpha) = calibrate_snr(&source, &model.synth(cfg.seed), 0.0).unwrap();
    let f = source.add(&z).unwrap();
    let cs = SpectralCovariance::rank_one(&source).unwrap();
    let cz = model.covariance().unwrap().scaled(alpha * alpha);
    let out = denoise(&f, &cs, &cz, window.window(), &FilterOptions::default()).unwrap();
    let (input, output) = (
        snr(&f, &source).unwrap(),
        snr(&out.estimate, &source).unwrap(),
    );
    check(
        out.flagged_fraction < 0.05 && output > input,
        format!(
            "flagged {:.2}% of slots (tol 5%; {:.2}% structurally degenerate), SNR {input:.3} -> {output:.3} dB",
            100.0 * out.flagged_fraction,
            100.0 * out.degenerate_fraction
        ),
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let full = args
        .iter()
        .any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("SO3FILT_FULL_SCALE").is_ok_and(|v| v == "1");
    // positional arguments select criteria by substring, like a test filter
    let filters: Vec<&String> = args
        .iter()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("frame_identity", frame_identity, Duration::from_secs(60)),
        (
            "noiseless_recovery",
            noiseless_recovery,
            Duration::from_secs(60),
        ),
        ("three_j_sum_rules", three_j_sum_rules, Duration::MAX),
        (
            "triple_product_quadrature",
            triple_product_quadrature,
            Duration::MAX,
        ),
        ("normal_equation_residuals", normal_equations, Duration::MAX),
        ("upsilon_composition", upsilon_composition, Duration::MAX),
        ("snr_gain", snr_gain, Duration::from_secs(15 * 60)),
        ("shannon_number", shannon_number, Duration::MAX),
    ];
    let mut failed = 0;
    let mut run = |name: &str, f: fn() -> Outcome, limit: Duration| {
        if !filters.is_empty() && !filters.iter().any(|flt| name.contains(flt.as_str())) {
            return;
        }
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let pass = out.pass && took <= limit;
        let budget = if limit == Duration::MAX {
            String::new()
        } else {
            format!(" / {}s", limit.as_secs())
        };
        println!(
            "[{}] {name}: {} [{:.1}s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
        if !pass {
            failed += 1;
        }
    };
    for (name, f, limit) in criteria {
        run(name, f, limit);
    }
    if full {
        run("full_scale_smoke", full_scale_smoke, Duration::MAX);
    } else {
        println!("[SKIP] full_scale_smoke: pass --include-ignored or set SO3FILT_FULL_SCALE=1");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
