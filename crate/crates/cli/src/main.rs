use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use so3filt::config::ExperimentConfig;
use so3filt::io::{load_coeffs, load_covariance, save_coeffs, save_covariance};
use so3filt::noise::{synth_signal, NoiseModel};
use so3filt::pipeline::{benchmark, build_signal_covariance, denoise, parse_baseline_csv};
use so3filt::render::{render_map, RenderMode};
use so3filt::{slepian_window, snr, FilterOptions, SpectralCovariance};

#[derive(Parser)]
#[command(
    name = "so3filt",
    version,
    about = "Joint SO(3)-spectral denoising of signals on the sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best-concentrated window for a region, written as a coefficient file.
    Slepian(SlepianArgs),
    /// Synthetic bandlimited source with a decaying random spectrum.
    SynthSignal(SynthSignalArgs),
    /// Anisotropic noise `alpha T g`.
    SynthNoise(SynthNoiseArgs),
    /// Denoise a coefficient file.
    Denoise(DenoiseArgs),
    /// SNR sweep over noise realizations.
    Benchmark(BenchmarkArgs),
    /// Raster image and text grid of a coefficient file.
    Render(RenderArgs),
    /// SNR of an estimate against a reference, in dB.
    Snr(SnrArgs),
}

#[derive(Args, Clone, Default)]
struct RegionArgs {
    /// cap, ellipse or sphere.
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    cap_deg: Option<f64>,
    #[arg(long)]
    focus_deg: Option<f64>,
    #[arg(long)]
    semi_major_deg: Option<f64>,
}

impl RegionArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(r) = &self.region {
            cfg.set("region", r)?;
        }
        if let Some(v) = self.cap_deg {
            cfg.set("cap_deg", &v.to_string())?;
        }
        if let Some(v) = self.focus_deg {
            cfg.set("focus_deg", &v.to_string())?;
        }
        if let Some(v) = self.semi_major_deg {
            cfg.set("semi_major_deg", &v.to_string())?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct SlepianArgs {
    /// Window bandlimit.
    #[arg(long, default_value_t = 8)]
    l_h: usize,
    #[command(flatten)]
    region: RegionArgs,
    #[arg(long, short)]
    out: PathBuf,
    /// Also write all concentration eigenvalues, one per line.
    #[arg(long)]
    eigenvalues: Option<PathBuf>,
}

#[derive(Args)]
struct SynthSignalArgs {
    #[arg(long, default_value_t = 16)]
    l: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthNoiseArgs {
    #[arg(long, default_value_t = 16)]
    l: usize,
    /// Seed of the mixing matrix T.
    #[arg(long, default_value_t = 1)]
    mixing_seed: u64,
    /// Seed of the Gaussian driver.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, short)]
    out: PathBuf,
    /// Also write the covariance `alpha^2 T T^H`.
    #[arg(long)]
    covariance: Option<PathBuf>,
    /// Write this signal plus the noise instead of the noise alone.
    #[arg(long)]
    add: Option<PathBuf>,
}

#[derive(Args)]
struct DenoiseArgs {
    /// Noisy observation.
    #[arg(long, short)]
    input: PathBuf,
    /// Window coefficient file.
    #[arg(long)]
    window: PathBuf,
    /// Signal covariance file.
    #[arg(long, conflicts_with = "source")]
    signal_cov: Option<PathBuf>,
    /// Source coefficients; the covariance `s s^H` is built from it.
    #[arg(long)]
    source: Option<PathBuf>,
    /// Noise covariance file.
    #[arg(long)]
    noise_cov: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    rcond: f64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the L_f = 64, L_h = 20 preset.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    l_f: Option<usize>,
    #[arg(long)]
    l_h: Option<usize>,
    #[command(flatten)]
    region: RegionArgs,
    /// Comma-separated target input SNRs in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Source coefficient file; a synthetic source is used when absent.
    #[arg(long)]
    signal: Option<PathBuf>,
    /// Window coefficient file; the region's Slepian window when absent.
    #[arg(long)]
    window: Option<PathBuf>,
    /// Output directory for benchmark.csv and summary.csv; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// External baseline results (CSV with target_db and output_db columns).
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Real,
    Magnitude,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 180)]
    rows: usize,
    #[arg(long, default_value_t = 360)]
    cols: usize,
    #[arg(long, value_enum, default_value_t = Mode::Real)]
    mode: Mode,
    /// Binary PGM output.
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Plain-text value grid.
    #[arg(long)]
    text: Option<PathBuf>,
}

#[derive(Args)]
struct SnrArgs {
    /// Estimate or observation.
    #[arg(long)]
    estimate: PathBuf,
    /// Reference signal.
    #[arg(long)]
    source: PathBuf,
}

fn load(path: &Path) -> Result<so3filt::SphericalCoeffs> {
    load_coeffs(path).with_context(|| format!("reading {}", path.display()))
}

fn run_slepian(a: SlepianArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::desk();
    a.region.apply(&mut cfg)?;
    cfg.region.validate()?;
    let res = slepian_window(&cfg.region, a.l_h)?;
    save_coeffs(&a.out, res.window())?;
    if let Some(path) = a.eigenvalues {
        let text: String = res.eigenvalues.iter().map(|v| format!("{v:e}\n")).collect();
        fs::write(path, text)?;
    }
    println!(
        "lambda_1 = {:.12}, shannon number = {:.6}",
        res.eigenvalues[0],
        res.shannon_number()
    );
    Ok(())
}

fn run_synth_noise(a: SynthNoiseArgs) -> Result<()> {
    let model = NoiseModel::uniform(a.l, a.alpha, a.mixing_seed)?;
    let z = model.synth(a.seed);
    match &a.add {
        Some(p) => save_coeffs(&a.out, &load(p)?.add(&z)?)?,
        None => save_coeffs(&a.out, &z)?,
    }
    if let Some(path) = a.covariance {
        save_covariance(&path, &model.covariance()?)?;
    }
    Ok(())
}

fn run_denoise(a: DenoiseArgs) -> Result<()> {
    let f = load(&a.input)?;
    let h = load(&a.window)?;
    let cs: SpectralCovariance = match (&a.signal_cov, &a.source) {
        (Some(p), _) => load_covariance(p)?,
        (None, Some(p)) => build_signal_covariance(&load(p)?)?,
        (None, None) => bail!("one of --signal-cov or --source is required"),
    };
    let cz = load_covariance(&a.noise_cov)?;
    let out = denoise(&f, &cs, &cz, &h, &FilterOptions { rcond: a.rcond })?;
    save_coeffs(&a.out, &out.estimate)?;
    eprintln!(
        "solved {} systems, {:.3}% of slots via pseudo-inverse",
        out.systems,
        100.0 * out.flagged_fraction
    );
    Ok(())
}

fn run_benchmark(a: BenchmarkArgs) -> Result<()> {
    let mut cfg = if a.full_scale {
        let (cfg, warning) = ExperimentConfig::full_scale();
        eprintln!("warning: {warning}");
        cfg
    } else {
        ExperimentConfig::desk()
    };
    if let Some(path) = &a.config {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_text(&text)?;
    }
    if let Some(v) = a.l_f {
        cfg.l_f = v;
    }
    if let Some(v) = a.l_h {
        cfg.l_h = v;
    }
    a.region.apply(&mut cfg)?;
    if let Some(v) = &a.snr_db {
        cfg.set("snr_db", v)?;
    }
    if let Some(v) = a.realizations {
        cfg.realizations = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    for (slot, v) in [
        (&mut cfg.signal, a.signal),
        (&mut cfg.window, a.window),
        (&mut cfg.output, a.output),
    ] {
        if v.is_some() {
            *slot = v;
        }
    }
    cfg.validate()?;

    let source = match &cfg.signal {
        Some(p) => load(p)?,
        None => synth_signal(cfg.l_f, cfg.seed),
    };
    let window = match &cfg.window {
        Some(p) => load(p)?,
        None => slepian_window(&cfg.region, cfg.l_h)?.window().clone(),
    };
    let mut report = benchmark(&cfg, &source, &window, &FilterOptions::default())?;
    if let Some(path) = &a.baseline {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        report.attach_baseline(&parse_baseline_csv(&text)?);
    }
    match &cfg.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("benchmark.csv"), report.rows_csv())?;
            fs::write(dir.join("summary.csv"), report.summary_csv())?;
            fs::write(dir.join("config.txt"), cfg.to_text())?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(report.rows_csv().as_bytes())?;
        }
    }
    for s in &report.summary {
        eprintln!(
            "target {:+.2} dB: mean input {:.3} dB, mean output {:.3} dB (std {:.3})",
            s.target_db, s.mean_input_db, s.mean_output_db, s.std_output_db
        );
    }
    Ok(())
}

fn run_render(a: RenderArgs) -> Result<()> {
    if a.pgm.is_none() && a.text.is_none() {
        bail!("nothing to write: pass --pgm and/or --text");
    }
    let c = load(&a.input)?;
    let mode = match a.mode {
        Mode::Real => RenderMode::Real,
        Mode::Magnitude => RenderMode::Magnitude,
    };
    let raster = render_map(&c, a.rows, a.cols, mode)?;
    if let Some(path) = a.pgm {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        raster.write_pgm(&mut f)?;
        f.flush()?;
    }
    if let Some(path) = a.text {
        fs::write(path, raster.to_text())?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Slepian(a) => run_slepian(a),
        Command::SynthSignal(a) => Ok(save_coeffs(&a.out, &synth_signal(a.l, a.seed))?),
        Command::SynthNoise(a) => run_synth_noise(a),
        Command::Denoise(a) => run_denoise(a),
        Command::Benchmark(a) => run_benchmark(a),
        Command::Render(a) => run_render(a),
        Command::Snr(a) => {
            let d = load(&a.estimate)?;
            let s = load(&a.source)?;
            let v = snr(&d, &s)?;
            println!("{v}");
            Ok(())
        }
    }
}
