use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use hybrid_repeater::detectors::DetectorModel;

use crate::table::num;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    #[value(name = "new")]
    New,
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Detector {
    Pnr,
    Td,
    Homodyne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

macro_rules! display_value_enum {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
            }
        }
    )*};
}
display_value_enum!(Protocol, Detector, Scale);

/// Every tunable, each optional so that flags can be layered over a config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// key=value file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub alpha_count: Option<usize>,
    #[arg(long, value_enum)]
    pub alpha_scale: Option<Scale>,
    /// Controlled-rotation angle (rad)
    #[arg(long)]
    pub theta: Option<f64>,
    /// Fiber length (km)
    #[arg(long)]
    pub l: Option<f64>,
    /// Fiber attenuation length (km)
    #[arg(long)]
    pub l0: Option<f64>,
    #[arg(long, value_enum)]
    pub protocol: Option<Protocol>,
    #[arg(long, value_enum)]
    pub detector: Option<Detector>,
    /// Threshold-detector efficiency
    #[arg(long)]
    pub eta: Option<f64>,
    /// Threshold-detector mean dark count
    #[arg(long)]
    pub nu: Option<f64>,
    /// Homodyne acceptance half-width
    #[arg(long)]
    pub window: Option<f64>,
    /// Number of samples for boundary tables and presets
    #[arg(long)]
    pub count: Option<usize>,
    /// Output file (point, sweep, boundary) or directory (presets); stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value for {key}: {value:?}")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T, CliError> {
    T::from_str(value, false)
        .map_err(|_| CliError::Config(format!("invalid value for {key}: {value:?}")))
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key.replace('_', "-").as_str() {
                "alpha" => s.alpha = Some(parse(key, value)?),
                "alpha-min" => s.alpha_min = Some(parse(key, value)?),
                "alpha-max" => s.alpha_max = Some(parse(key, value)?),
                "alpha-count" => s.alpha_count = Some(parse(key, value)?),
                "alpha-scale" => s.alpha_scale = Some(parse_enum(key, value)?),
                "theta" => s.theta = Some(parse(key, value)?),
                "l" => s.l = Some(parse(key, value)?),
                "l0" => s.l0 = Some(parse(key, value)?),
                "protocol" => s.protocol = Some(parse_enum(key, value)?),
                "detector" => s.detector = Some(parse_enum(key, value)?),
                "eta" => s.eta = Some(parse(key, value)?),
                "nu" => s.nu = Some(parse(key, value)?),
                "window" => s.window = Some(parse(key, value)?),
                "count" => s.count = Some(parse(key, value)?),
                "out" => s.out = Some(PathBuf::from(value)),
                _ => {
                    return Err(CliError::Config(format!(
                        "line {}: unknown key {key:?}",
                        i + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Loads `--config` if given and lays these flags over it.
    pub fn resolve(self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = Self::from_file(&path)?;
        Ok(Settings {
            config: Some(path),
            alpha: self.alpha.or(file.alpha),
            alpha_min: self.alpha_min.or(file.alpha_min),
            alpha_max: self.alpha_max.or(file.alpha_max),
            alpha_count: self.alpha_count.or(file.alpha_count),
            alpha_scale: self.alpha_scale.or(file.alpha_scale),
            theta: self.theta.or(file.theta),
            l: self.l.or(file.l),
            l0: self.l0.or(file.l0),
            protocol: self.protocol.or(file.protocol),
            detector: self.detector.or(file.detector),
            eta: self.eta.or(file.eta),
            nu: self.nu.or(file.nu),
            window: self.window.or(file.window),
            count: self.count.or(file.count),
            out: self.out.or(file.out),
        })
    }
}

pub const DEFAULT_THETA: f64 = 0.01;
pub const DEFAULT_L: f64 = 10.0;
pub const DEFAULT_L0: f64 = 25.0;
pub const DEFAULT_WINDOW: f64 = 0.5;

/// Physics shared by every row of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub protocol: Protocol,
    pub detector: Detector,
    pub eta: f64,
    pub nu: f64,
    pub window: f64,
    pub theta: f64,
    pub l: f64,
    pub l0: f64,
}

impl Physics {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let protocol = s.protocol.unwrap_or(Protocol::New);
        let detector = s.detector.unwrap_or(match protocol {
            Protocol::I => Detector::Homodyne,
            _ => Detector::Pnr,
        });
        let p = Physics {
            protocol,
            detector,
            eta: s.eta.unwrap_or(1.0),
            nu: s.nu.unwrap_or(0.0),
            window: s.window.unwrap_or(DEFAULT_WINDOW),
            theta: s.theta.unwrap_or(DEFAULT_THETA),
            l: s.l.unwrap_or(DEFAULT_L),
            l0: s.l0.unwrap_or(DEFAULT_L0),
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), CliError> {
        match (self.protocol, self.detector) {
            (Protocol::I, Detector::Homodyne)
            | (Protocol::New | Protocol::II, Detector::Pnr | Detector::Td) => {}
            (p, d) => {
                return Err(CliError::Config(format!(
                    "protocol {p} cannot use detector {d}"
                )))
            }
        }
        if self.detector == Detector::Td {
            DetectorModel::threshold(self.eta, self.nu)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if self.detector == Detector::Homodyne && !(self.window > 0.0 && self.window.is_finite()) {
            return Err(CliError::Config(format!(
                "window must be positive, got {}",
                self.window
            )));
        }
        hybrid_repeater::ProtocolParams64::new(0.0, self.theta, self.l, self.l0)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn model(&self) -> DetectorModel<f64> {
        match self.detector {
            Detector::Pnr => DetectorModel::Pnr,
            Detector::Td => DetectorModel::Threshold {
                eta: self.eta,
                nu: self.nu,
            },
            Detector::Homodyne => DetectorModel::Homodyne { angle: 0.0 },
        }
    }

    pub fn transmittance(&self) -> f64 {
        (-self.l / self.l0).exp()
    }

    pub fn describe(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("protocol".to_string(), self.protocol.to_string()),
            ("detector".to_string(), self.detector.to_string()),
        ];
        match self.detector {
            Detector::Td => {
                v.push(("eta".into(), num(self.eta)));
                v.push(("nu".into(), num(self.nu)));
            }
            Detector::Homodyne => v.push(("window".into(), num(self.window))),
            Detector::Pnr => {}
        }
        v.push(("theta".into(), num(self.theta)));
        v.push(("l".into(), num(self.l)));
        v.push(("l0".into(), num(self.l0)));
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl AlphaRange {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let r = AlphaRange {
            min: s.alpha_min.unwrap_or(10.0),
            max: s.alpha_max.unwrap_or(1000.0),
            count: s.alpha_count.unwrap_or(100),
            scale: s.alpha_scale.unwrap_or(Scale::Log),
        };
        if r.count == 0 {
            return Err(CliError::Config("alpha-count must be at least 1".into()));
        }
        if !(r.min >= 0.0 && r.min <= r.max && r.max.is_finite()) {
            return Err(CliError::Config(format!(
                "empty alpha range [{}, {}]",
                r.min, r.max
            )));
        }
        if r.scale == Scale::Log && r.min <= 0.0 {
            return Err(CliError::Config(
                "log alpha scale needs alpha-min > 0".into(),
            ));
        }
        Ok(r)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = |i: usize| i as f64 / (self.count - 1) as f64;
        match self.scale {
            Scale::Linear => (0..self.count)
                .map(|i| self.min + (self.max - self.min) * step(i))
                .collect(),
            Scale::Log => {
                let mut v = hybrid_repeater::analytics::log_grid(self.min, self.max, self.count);
                v[0] = self.min;
                v[self.count - 1] = self.max;
                v
            }
        }
    }
}
