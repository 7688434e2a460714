//! TOML run configuration.
//!
//! ```toml
//! [geometry]
//! b = 1.2          # µm
//! aspect = 1.5     # a = aspect·b; or give `a` directly
//!
//! [emitter]
//! omega1 = 1.3     # PHz
//! omega2 = 1.1
//! lambda1 = 0.1    # or dipole1 = p, converted with λ = p/sqrt(πab)
//! lambda2 = 0.1
//!
//! [sweep]
//! omega_min = 0.95
//! omega_max = 1.75
//! points = 2000
//!
//! [input]
//! kind = "single"  # single | css | dark | custom
//! mode = 1
//! ```

use std::path::Path;

use serde::Deserialize;
use wgscatter::conditions::Window;
use wgscatter::emitter::lambda_from_dipole;
use wgscatter::{Complex64, EmitterParams, InputKind, ScanOptions, SelfEnergyOptions, WaveguideGeometry};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub geometry: GeometrySection,
    pub emitter: Option<EmitterSection>,
    pub sweep: Option<SweepSection>,
    pub input: Option<InputSection>,
    #[serde(default)]
    pub options: OptionsSection,
    #[serde(default)]
    pub cutoff_map: CutoffMapSection,
    #[serde(default)]
    pub conditions: ConditionsSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub b: f64,
    pub a: Option<f64>,
    pub aspect: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterSection {
    pub omega1: f64,
    pub omega2: f64,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub dipole1: Option<f64>,
    pub dipole2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondAxis {
    Omega1,
    Lambda2,
}

impl SecondAxis {
    pub fn label(self) -> &'static str {
        match self {
            SecondAxis::Omega1 => "omega1",
            SecondAxis::Lambda2 => "lambda2",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub second_axis: Option<SecondAxis>,
    pub second_min: Option<f64>,
    pub second_max: Option<f64>,
    pub second_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputName {
    Single,
    Css,
    Dark,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    pub kind: InputName,
    pub mode: Option<usize>,
    /// `[re, im]` pairs in mode-rank order.
    pub amplitudes: Option<Vec<[f64; 2]>>,
    /// Dark-state coordinates as `[re, im]` pairs.
    pub free: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsSection {
    pub red_shift: bool,
    pub red_shift_modes: usize,
    pub guard: f64,
    pub fano_grid: usize,
}

impl Default for OptionsSection {
    fn default() -> Self {
        let se = SelfEnergyOptions::default();
        Self {
            red_shift: se.include_red_shift,
            red_shift_modes: se.red_shift_modes,
            guard: se.guard,
            fano_grid: ScanOptions::default().grid,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffMapSection {
    pub b_min: f64,
    pub b_max: f64,
    pub points: usize,
    pub modes: usize,
    /// Input energy whose critical sizes are reported.
    pub reference_omega: Option<f64>,
}

impl Default for CutoffMapSection {
    fn default() -> Self {
        Self { b_min: 0.2, b_max: 2.0, points: 200, modes: 6, reference_omega: None }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConditionsSection {
    /// Explicit `[lo, hi]`; otherwise the window of `open_modes` open modes.
    pub window: Option<[f64; 2]>,
    pub open_modes: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub draws: usize,
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { draws: 10, points: 50, seed: 20_240_917, tolerance: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub path: Option<String>,
    pub format: Format,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn complex(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.geometry()?;
        if cfg.emitter.is_some() {
            cfg.emitter()?;
        }
        if let Some(s) = &cfg.sweep {
            check_range("sweep.omega", s.omega_min, s.omega_max, s.points)?;
            if let Some(axis) = s.second_axis {
                let (lo, hi, n) = cfg.second_axis_range()?;
                check_range(&format!("sweep.{}", axis.label()), lo, hi, n)?;
            }
        }
        if cfg.input.is_some() {
            cfg.input_kind()?;
        }
        let o = &cfg.options;
        if !(o.guard.is_finite() && o.guard > 0.0 && o.guard < 0.1) {
            return Err(invalid(format!("options.guard must be in (0, 0.1), got {}", o.guard)));
        }
        if o.fano_grid < 2 {
            return Err(invalid("options.fano_grid must be at least 2"));
        }
        let m = &cfg.cutoff_map;
        if !(m.b_min > 0.0) {
            return Err(invalid("cutoff_map.b_min must be positive"));
        }
        check_range("cutoff_map.b", m.b_min, m.b_max, m.points)?;
        if m.modes == 0 {
            return Err(invalid("cutoff_map.modes must be at least 1"));
        }
        if let Some([lo, hi]) = cfg.conditions.window {
            Window::new(lo, hi).map_err(|e| invalid(format!("conditions.window: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn geometry(&self) -> Result<WaveguideGeometry, CliError> {
        let g = &self.geometry;
        let geom = match (g.a, g.aspect) {
            (Some(a), None) => WaveguideGeometry::new(a, g.b),
            (None, Some(l)) => WaveguideGeometry::from_aspect(l, g.b),
            _ => return Err(invalid("geometry needs exactly one of `a` or `aspect`")),
        };
        geom.map_err(|e| invalid(format!("geometry: {e}")))
    }

    pub fn emitter(&self) -> Result<EmitterParams, CliError> {
        let e = self.emitter.as_ref().ok_or_else(|| invalid("missing [emitter] section"))?;
        let geom = self.geometry()?;
        let pick = |name: &str, lambda: Option<f64>, dipole: Option<f64>| match (lambda, dipole) {
            (Some(l), None) => Ok(l),
            (None, Some(p)) => lambda_from_dipole(p, &geom).map_err(|err| invalid(format!("emitter: {err}"))),
            _ => Err(invalid(format!("emitter needs exactly one of lambda{name} or dipole{name}"))),
        };
        let l1 = pick("1", e.lambda1, e.dipole1)?;
        let l2 = pick("2", e.lambda2, e.dipole2)?;
        EmitterParams::new(e.omega1, e.omega2, l1, l2).map_err(|err| invalid(format!("emitter: {err}")))
    }

    pub fn sweep(&self) -> Result<&SweepSection, CliError> {
        self.sweep.as_ref().ok_or_else(|| invalid("missing [sweep] section"))
    }

    pub fn second_axis_range(&self) -> Result<(f64, f64, usize), CliError> {
        let s = self.sweep()?;
        match (s.second_min, s.second_max, s.second_points) {
            (Some(lo), Some(hi), Some(n)) => Ok((lo, hi, n)),
            _ => Err(invalid("sweep.second_axis needs second_min, second_max and second_points")),
        }
    }

    pub fn input_kind(&self) -> Result<InputKind, CliError> {
        let Some(i) = &self.input else {
            return Ok(InputKind::Single(1));
        };
        match i.kind {
            InputName::Single => {
                let n = i.mode.unwrap_or(1);
                if n == 0 {
                    return Err(invalid("input.mode is a 1-based rank"));
                }
                Ok(InputKind::Single(n))
            }
            InputName::Css => Ok(InputKind::Css),
            InputName::Dark => Ok(InputKind::Dark(complex(i.free.as_deref().unwrap_or(&[])))),
            InputName::Custom => {
                let amps = complex(i.amplitudes.as_deref().ok_or_else(|| invalid("custom input needs input.amplitudes"))?);
                let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("input.amplitudes are not normalized (sum |c|^2 = {norm})")));
                }
                Ok(InputKind::Custom(amps))
            }
        }
    }

    pub fn self_energy_options(&self, red_shift_flag: bool) -> SelfEnergyOptions {
        SelfEnergyOptions {
            include_red_shift: self.options.red_shift || red_shift_flag,
            red_shift_modes: self.options.red_shift_modes,
            guard: self.options.guard,
        }
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions { grid: self.options.fano_grid, ..ScanOptions::default() }
    }
}

fn check_range(name: &str, lo: f64, hi: f64, points: usize) -> Result<(), CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("{name} range must be finite with min < max (got {lo}, {hi})")));
    }
    if points < 2 {
        return Err(invalid(format!("{name} needs at least 2 points (got {points})")));
    }
    Ok(())
}
