//! Experiment configuration as a plain `key = value` file.
//!
//! Recognized keys (angles in degrees):
//!
//! ```text
//! l_f = 16
//! l_h = 8
//! region = cap            # cap | ellipse | sphere
//! cap_deg = 15
//! focus_deg = 15          # ellipse only
//! semi_major_deg = 16     # ellipse only
//! snr_db = -5, 0, 5, 10
//! realizations = 5
//! seed = 1
//! signal = source.slm     # optional paths
//! window = window.slm
//! output = out
//! ```
//!
//! Blank lines and text after `#` are ignored.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{invalid, Error, Result};
use crate::slepian::Region;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub l_f: usize,
    pub l_h: usize,
    pub region: Region,
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub signal: Option<PathBuf>,
    pub window: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

pub const FULL_SCALE_WARNING: &str =
    "full-scale parameters (L_f = 64, L_h = 20): expect about 4 minutes \
     per denoising run on one core, and about 270 MB per covariance matrix";

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    /// Small default: `L_f = 16`, `L_h = 8`, 15 degree polar cap.
    pub fn desk() -> Self {
        Self {
            l_f: 16,
            l_h: 8,
            region: Region::PolarCap {
                theta0: 15f64.to_radians(),
            },
            snr_db: vec![-5.0, 0.0, 5.0, 10.0],
            realizations: 5,
            seed: 1,
            signal: None,
            window: None,
            output: None,
        }
    }

    /// Large preset: `L_f = 64`, `L_h = 20`, ellipse with foci at 15 degrees
    /// and semi-major axis 16 degrees, 10 realizations at 0 dB. Returns the
    /// config and a warning about its cost.
    pub fn full_scale() -> (Self, &'static str) {
        let cfg = Self {
            l_f: 64,
            l_h: 20,
            region: Region::Ellipse {
                focus: 15f64.to_radians(),
                semi_major: 16f64.to_radians(),
            },
            snr_db: vec![0.0],
            realizations: 10,
            ..Self::desk()
        };
        (cfg, FULL_SCALE_WARNING)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_f == 0 || self.l_h == 0 {
            return Err(invalid("bandlimits must be positive"));
        }
        if self.realizations == 0 {
            return Err(invalid("realization count must be at least 1"));
        }
        if self.snr_db.is_empty() {
            return Err(invalid("SNR target list is empty"));
        }
        if self.snr_db.iter().any(|v| !v.is_finite()) {
            return Err(invalid("SNR targets must be finite"));
        }
        self.region.validate()
    }

    /// Parses a config file on top of the desk defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::desk();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of `text`; does not validate.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
                kind: "config",
                reason: format!("line {} is not `key = value`", i + 1),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets one key; the region is rebuilt when any of its keys change.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| invalid(format!("bad value `{value}` for `{key}`")))
        }
        match key {
            "l_f" => self.l_f = num(key, value)?,
            "l_h" => self.l_h = num(key, value)?,
            "realizations" => self.realizations = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "snr_db" => {
                self.snr_db = value
                    .split(',')
                    .map(|s| num::<f64>(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "region" => {
                self.region = match value {
                    "sphere" => Region::Sphere,
                    "cap" => match self.region {
                        r @ Region::PolarCap { .. } => r,
                        _ => Region::PolarCap {
                            theta0: 15f64.to_radians(),
                        },
                    },
                    "ellipse" => match self.region {
                        r @ Region::Ellipse { .. } => r,
                        _ => Region::Ellipse {
                            focus: 15f64.to_radians(),
                            semi_major: 16f64.to_radians(),
                        },
                    },
                    _ => return Err(invalid(format!("unknown region `{value}`"))),
                }
            }
            "cap_deg" => {
                self.region = Region::PolarCap {
                    theta0: num::<f64>(key, value)?.to_radians(),
                }
            }
            "focus_deg" | "semi_major_deg" => {
                let v = num::<f64>(key, value)?.to_radians();
                let (mut focus, mut semi_major) = match self.region {
                    Region::Ellipse { focus, semi_major } => (focus, semi_major),
                    _ => (15f64.to_radians(), 16f64.to_radians()),
                };
                if key == "focus_deg" {
                    focus = v;
                } else {
                    semi_major = v;
                }
                self.region = Region::Ellipse { focus, semi_major };
            }
            "signal" => self.signal = Some(PathBuf::from(value)),
            "window" => self.window = Some(PathBuf::from(value)),
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Serializes back to the key = value format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "l_f = {}", self.l_f);
        let _ = writeln!(out, "l_h = {}", self.l_h);
        match self.region {
            Region::Sphere => {
                let _ = writeln!(out, "region = sphere");
            }
            Region::PolarCap { theta0 } => {
                let _ = writeln!(out, "region = cap\ncap_deg = {}", theta0.to_degrees());
            }
            Region::Ellipse { focus, semi_major } => {
                let _ = writeln!(
                    out,
                    "region = ellipse\nfocus_deg = {}\nsemi_major_deg = {}",
                    focus.to_degrees(),
                    semi_major.to_degrees()
                );
            }
        }
        let snr: Vec<String> = self.snr_db.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "snr_db = {}", snr.join(", "));
        let _ = writeln!(out, "realizations = {}", self.realizations);
        let _ = writeln!(out, "seed = {}", self.seed);
        for (k, v) in [
            ("signal", &self.signal),
            ("window", &self.window),
            ("output", &self.output),
        ] {
            if let Some(p) = v {
                let _ = writeln!(out, "{k} = {}", p.display());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_desk_defaults() {
        assert_eq!(
            ExperimentConfig::parse("").unwrap(),
            ExperimentConfig::desk()
        );
    }

    #[test]
    fn parses_keys_and_comments() {
        let text = "l_f = 8 # small\n\nl_h=4\nregion = ellipse\nfocus_deg = 10\nsemi_major_deg = 12\nsnr_db = 0, 3.5\nrealizations = 2\nseed = 77\nwindow = w.slm\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(
            (cfg.l_f, cfg.l_h, cfg.realizations, cfg.seed),
            (8, 4, 2, 77)
        );
        assert_eq!(cfg.snr_db, vec![0.0, 3.5]);
        match cfg.region {
            Region::Ellipse { focus, semi_major } => {
                assert!((focus.to_degrees() - 10.0).abs() < 1e-12);
                assert!((semi_major.to_degrees() - 12.0).abs() < 1e-12);
            }
            r => panic!("unexpected region {r:?}"),
        }
        assert_eq!(cfg.window, Some(PathBuf::from("w.slm")));
    }

    #[test]
    fn text_round_trip() {
        let (full, _) = ExperimentConfig::full_scale();
        for cfg in [ExperimentConfig::desk(), full] {
            let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
            assert_eq!(back.l_f, cfg.l_f);
            assert_eq!(back.snr_db, cfg.snr_db);
            assert_eq!(back.to_text(), cfg.to_text());
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(ExperimentConfig::parse("realizations = 0").is_err());
        assert!(ExperimentConfig::parse("snr_db = ").is_err());
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("l_f").is_err());
        assert!(ExperimentConfig::parse("cap_deg = 200").is_err());
    }
}
