//! Experiment configuration: presets, `key = value` files and overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::dynamics::Spacing;
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::relaxation::{BathParams, Channels, Coupling, SpectralMode, SystemParams};

/// Keys starting with this prefix are outputs and are skipped on input.
pub const RESULT_PREFIX: &str = "result.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig3a,
    Fig3c,
    Fig3bOverlaps,
    Fig3dGenuine,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig3a, Preset::Fig3c, Preset::Fig3bOverlaps, Preset::Fig3dGenuine, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3a => "fig3a",
            Preset::Fig3c => "fig3c",
            Preset::Fig3bOverlaps => "fig3b_overlaps",
            Preset::Fig3dGenuine => "fig3d_genuine",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            Error::Config(format!("unknown preset '{s}' (expected one of fig3a, fig3c, fig3b_overlaps, fig3d_genuine, custom)"))
        })
    }
}

/// Which state competes with the far state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NearState {
    /// Dephased ρ(θ).
    Theta,
    /// `𝟙/4 + ε(I1z − I2z)/2`.
    Genuine,
}

/// How the configured `b` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BUnit {
    /// `b` in Hz, multiplied by 2π.
    Hz,
    /// `b` already in rad/s.
    Angular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub theta_deg: f64,
    pub metric: Metric,
    pub near_state: NearState,
    pub larmor_hz: f64,
    pub delta_hz: f64,
    pub j_hz: f64,
    pub epsilon: f64,
    pub tau_c: f64,
    pub b: f64,
    pub b_unit: BUnit,
    pub csa_d: f64,
    pub coupling: Coupling,
    pub spectral_mode: SpectralMode,
    pub channels: Channels,
    /// Grid bounds; units of 1/K0 when dimensionless, seconds otherwise.
    /// `None` means the default `[1e-3, 20]/K0`.
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: usize,
    pub spacing: Spacing,
    pub dimensionless: bool,
    pub output: String,
    pub rescale_by_epsilon: bool,
    pub mode_columns: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(Preset::Custom)
    }
}

pub const DEFAULT_T_MIN: f64 = 1e-3;
pub const DEFAULT_T_MAX: f64 = 20.0;

impl ExperimentConfig {
    /// Preset defaults.
    pub fn preset(preset: Preset) -> Self {
        let (theta_deg, metric, near_state, mode_columns) = match preset {
            Preset::Fig3a => (45.0, Metric::TraceDistance, NearState::Theta, false),
            Preset::Fig3c => (70.0, Metric::TraceDistance, NearState::Theta, false),
            Preset::Fig3bOverlaps => (70.0, Metric::TraceDistance, NearState::Theta, true),
            Preset::Fig3dGenuine => (70.0, Metric::RelativeEntropy, NearState::Genuine, false),
            Preset::Custom => (70.0, Metric::TraceDistance, NearState::Theta, false),
        };
        Self {
            preset,
            theta_deg,
            metric,
            near_state,
            larmor_hz: 500.02e6,
            delta_hz: 89.0,
            j_hz: 3.24,
            epsilon: 1e-5,
            tau_c: 2.1e-12,
            b: 5903.0,
            b_unit: BUnit::Hz,
            csa_d: 0.0,
            coupling: Coupling::Ising,
            spectral_mode: SpectralMode::Linearized,
            channels: Channels::default(),
            t_min: None,
            t_max: None,
            points: 400,
            spacing: Spacing::Logarithmic,
            dimensionless: true,
            output: preset.name().to_string(),
            rescale_by_epsilon: false,
            mode_columns,
        }
    }

    /// Physical parameters (angular units, seconds).
    pub fn physical_params(&self) -> (SystemParams, BathParams) {
        let p = SystemParams {
            omega0: 2.0 * PI * self.larmor_hz,
            delta_offset: 2.0 * PI * self.delta_hz,
            j_coupling_hz: self.j_hz,
            epsilon: self.epsilon,
        };
        let b = match self.b_unit {
            BUnit::Hz => 2.0 * PI * self.b,
            BUnit::Angular => self.b,
        };
        let bp = BathParams {
            b_dipolar: b,
            tau_c: self.tau_c,
            csa_d: self.csa_d,
            include_cross_correlation: self.channels.cross,
            ..BathParams::experiment()
        };
        (p, bp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_deg > 0.0 && self.theta_deg < 90.0) && self.near_state == NearState::Theta {
            return Err(Error::Config(format!("theta = {} deg outside (0, 90)", self.theta_deg)));
        }
        if self.points < 2 {
            return Err(Error::Config("points must be at least 2".into()));
        }
        if self.output.is_empty() {
            return Err(Error::Config("output prefix is empty".into()));
        }
        let (p, bp) = self.physical_params();
        p.validate()?;
        bp.validate()
    }

    /// Apply one `key = value` setting. `preset` must be handled by the caller.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "preset" => {
                let preset: Preset = v.parse()?;
                if preset != self.preset {
                    return Err(Error::Config("preset must be set before other keys".into()));
                }
            }
            "theta" | "theta_deg" => self.theta_deg = parse_f64(key, v)?,
            "metric" => self.metric = v.parse()?,
            "near_state" => {
                self.near_state = match v {
                    "theta" => NearState::Theta,
                    "genuine" => NearState::Genuine,
                    _ => return Err(bad(key, v)),
                }
            }
            "larmor_hz" => self.larmor_hz = parse_f64(key, v)?,
            "delta_hz" => self.delta_hz = parse_f64(key, v)?,
            "j_hz" => self.j_hz = parse_f64(key, v)?,
            "epsilon" => self.epsilon = parse_f64(key, v)?,
            "tau_c" => self.tau_c = parse_f64(key, v)?,
            "b" => self.b = parse_f64(key, v)?,
            "b_unit" => {
                self.b_unit = match v {
                    "hz" => BUnit::Hz,
                    "angular" => BUnit::Angular,
                    _ => return Err(bad(key, v)),
                }
            }
            "csa_d" => self.csa_d = parse_f64(key, v)?,
            "coupling" => self.coupling = parse_coupling(v)?,
            "spectral_mode" => {
                self.spectral_mode = match v {
                    "linearized" => SpectralMode::Linearized,
                    "exact" => SpectralMode::Exact,
                    _ => return Err(bad(key, v)),
                }
            }
            "channels" => self.channels = parse_channels(v)?,
            "t_min" => self.t_min = parse_optional(key, v)?,
            "t_max" => self.t_max = parse_optional(key, v)?,
            "points" => self.points = v.parse().map_err(|_| bad(key, v))?,
            "spacing" => {
                self.spacing = match v {
                    "log" => Spacing::Logarithmic,
                    "linear" => Spacing::Linear,
                    _ => return Err(bad(key, v)),
                }
            }
            "dimensionless" => self.dimensionless = parse_bool(key, v)?,
            "output" => self.output = v.to_string(),
            "rescale_by_epsilon" => self.rescale_by_epsilon = parse_bool(key, v)?,
            "mode_columns" => self.mode_columns = parse_bool(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines. `#` starts a comment; `result.*` keys are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_pairs(None, &parse_pairs(text)?)
    }

    /// Build from a preset and ordered overrides. A `preset` key in `pairs`
    /// is honored when `preset` is `None`.
    pub fn from_pairs(preset: Option<Preset>, pairs: &[(String, String)]) -> Result<Self> {
        let from_pairs = pairs.iter().find(|(k, _)| k == "preset").map(|(_, v)| v.parse()).transpose()?;
        let mut cfg = Self::preset(preset.or(from_pairs).unwrap_or(Preset::Custom));
        for (k, v) in pairs {
            if k == "preset" {
                continue;
            }
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_pairs(None, &read_pairs(path)?)
    }

    /// Ordered `key = value` echo that [`ExperimentConfig::parse`] reads back
    /// to an identical config.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let opt = |x: Option<f64>| x.map_or_else(|| "default".to_string(), fmt_f64);
        vec![
            ("preset", self.preset.to_string()),
            ("theta", fmt_f64(self.theta_deg)),
            ("metric", self.metric.to_string()),
            (
                "near_state",
                match self.near_state {
                    NearState::Theta => "theta",
                    NearState::Genuine => "genuine",
                }
                .into(),
            ),
            ("larmor_hz", fmt_f64(self.larmor_hz)),
            ("delta_hz", fmt_f64(self.delta_hz)),
            ("j_hz", fmt_f64(self.j_hz)),
            ("epsilon", fmt_f64(self.epsilon)),
            ("tau_c", fmt_f64(self.tau_c)),
            ("b", fmt_f64(self.b)),
            (
                "b_unit",
                match self.b_unit {
                    BUnit::Hz => "hz",
                    BUnit::Angular => "angular",
                }
                .into(),
            ),
            ("csa_d", fmt_f64(self.csa_d)),
            (
                "coupling",
                match self.coupling {
                    Coupling::Ising => "ising",
                    Coupling::FullScalar => "full_scalar",
                }
                .into(),
            ),
            (
                "spectral_mode",
                match self.spectral_mode {
                    SpectralMode::Linearized => "linearized",
                    SpectralMode::Exact => "exact",
                }
                .into(),
            ),
            ("channels", fmt_channels(self.channels)),
            ("t_min", opt(self.t_min)),
            ("t_max", opt(self.t_max)),
            ("points", self.points.to_string()),
            (
                "spacing",
                match self.spacing {
                    Spacing::Logarithmic => "log",
                    Spacing::Linear => "linear",
                }
                .into(),
            ),
            ("dimensionless", self.dimensionless.to_string()),
            ("output", self.output.clone()),
            ("rescale_by_epsilon", self.rescale_by_epsilon.to_string()),
            ("mode_columns", self.mode_columns.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Ordered `(key, value)` pairs of a config text, skipping comments, blank
/// lines and `result.*` keys.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let k = k.trim();
        if !k.starts_with(RESULT_PREFIX) {
            pairs.push((k.to_string(), v.trim().to_string()));
        }
    }
    Ok(pairs)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_pairs(&text)
}

/// Shortest representation that parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn bad(key: &str, v: &str) -> Error {
    Error::Config(format!("invalid value '{v}' for '{key}'"))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| bad(key, v))?;
    if !x.is_finite() {
        return Err(bad(key, v));
    }
    Ok(x)
}

fn parse_optional(key: &str, v: &str) -> Result<Option<f64>> {
    if v == "default" {
        Ok(None)
    } else {
        parse_f64(key, v).map(Some)
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, v)),
    }
}

pub fn parse_coupling(v: &str) -> Result<Coupling> {
    match v {
        "ising" => Ok(Coupling::Ising),
        "full_scalar" => Ok(Coupling::FullScalar),
        _ => Err(bad("coupling", v)),
    }
}

/// Comma-separated subset of `dipolar`, `csa`, `cross`.
pub fn parse_channels(v: &str) -> Result<Channels> {
    let mut ch = Channels { dipolar: false, csa: false, cross: false };
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "dipolar" => ch.dipolar = true,
            "csa" => ch.csa = true,
            "cross" => ch.cross = true,
            _ => return Err(bad("channels", v)),
        }
    }
    if !(ch.dipolar || ch.csa || ch.cross) {
        return Err(Error::Config("at least one relaxation channel is required".into()));
    }
    Ok(ch)
}

fn fmt_channels(ch: Channels) -> String {
    let mut out = Vec::new();
    if ch.dipolar {
        out.push("dipolar");
    }
    if ch.csa {
        out.push("csa");
    }
    if ch.cross {
        out.push("cross");
    }
    out.join(",")
}
