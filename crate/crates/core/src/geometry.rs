//! Rectangular cross-section and its TM mode catalogue.
//!
//! Only modes with odd `m` and odd `n` are enumerated: for an emitter at the
//! centre of the cross section the coupling carries a factor
//! `sin(mπ/2)·sin(nπ/2)`, which vanishes for any even index.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};

/// Speed of light in µm·PHz.
pub const C_LIGHT: f64 = 0.29979;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveguideGeometry {
    a: f64,
    b: f64,
}

impl WaveguideGeometry {
    /// `a` is the length and `b` the width of the cross section, both in µm.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cross-section sides must be positive and finite (a={a}, b={b})"
            )));
        }
        Ok(Self { a, b })
    }

    /// Build from the aspect ratio `l = a/b` and the width `b`.
    pub fn from_aspect(aspect: f64, b: f64) -> Result<Self> {
        Self::new(aspect * b, b)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn aspect(&self) -> f64 {
        self.a / self.b
    }

    /// Cutoff frequency of TM(m,n) in PHz.
    pub fn cutoff(&self, m: i64, n: i64) -> Result<f64> {
        check_indices(m, n)?;
        Ok(self.cutoff_unchecked(m as f64, n as f64))
    }

    fn cutoff_unchecked(&self, m: f64, n: f64) -> f64 {
        C_LIGHT * std::f64::consts::PI * ((m / self.a).powi(2) + (n / self.b).powi(2)).sqrt()
    }

    /// All coupling (odd, odd) modes with cutoff `<= omega_max`, ranked by
    /// ascending cutoff. Equal cutoffs are ordered by `(n, m)`, which puts
    /// TM31 ahead of TM13 in a square guide. Empty below the TM11 cutoff.
    pub fn modes_up_to(&self, omega_max: f64) -> Vec<TmMode> {
        let mut raw: Vec<(u32, u32, f64)> = Vec::new();
        if !(omega_max.is_finite() && omega_max > 0.0) {
            return Vec::new();
        }
        let mut m = 1u32;
        while self.cutoff_unchecked(m as f64, 1.0) <= omega_max {
            let mut n = 1u32;
            loop {
                let cutoff = self.cutoff_unchecked(m as f64, n as f64);
                if cutoff > omega_max {
                    break;
                }
                raw.push((m, n, cutoff));
                n += 2;
            }
            m += 2;
        }
        raw.sort_by(|x, y| {
            x.2.partial_cmp(&y.2)
                .unwrap_or(Ordering::Equal)
                .then(x.1.cmp(&y.1))
                .then(x.0.cmp(&y.0))
        });
        raw.into_iter()
            .enumerate()
            .map(|(i, (m, n, cutoff))| TmMode { m, n, cutoff, rank: i + 1 })
            .collect()
    }

    /// The `count` lowest coupling modes.
    pub fn first_modes(&self, count: usize) -> Vec<TmMode> {
        if count == 0 {
            return Vec::new();
        }
        let mut omega_max = 2.0 * self.cutoff_unchecked(1.0, 1.0);
        loop {
            let modes = self.modes_up_to(omega_max);
            if modes.len() >= count {
                // Everything below the last kept cutoff is already present, so
                // truncating keeps the ranks valid.
                return modes.into_iter().take(count).collect();
            }
            omega_max *= 1.5;
        }
    }

    /// The `rank`-th mode (1-based).
    pub fn mode(&self, rank: usize) -> Result<TmMode> {
        if rank == 0 {
            return Err(Error::InvalidParameter("mode ranks start at 1".into()));
        }
        Ok(self.first_modes(rank)[rank - 1])
    }

    /// Modes that propagate at `omega`, i.e. with cutoff `<= omega`.
    pub fn open_modes(&self, omega: f64) -> Vec<TmMode> {
        self.modes_up_to(omega)
    }

    /// Operating region at the input energy `omega_in`.
    pub fn classify_region(&self, omega_in: f64) -> Result<Region> {
        if !(omega_in.is_finite() && omega_in > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "input energy must be positive (got {omega_in})"
            )));
        }
        let modes = self.modes_up_to(omega_in);
        if let Some(hit) = modes.iter().find(|m| m.cutoff == omega_in) {
            return Ok(Region::Boundary { rank: hit.rank });
        }
        Ok(match modes.len() {
            0 => Region::Cutoff,
            1 => Region::SingleMode,
            j_max => Region::MultiMode { j_max },
        })
    }
}

fn check_indices(m: i64, n: i64) -> Result<()> {
    if m < 1 || n < 1 || m % 2 == 0 || n % 2 == 0 {
        return Err(Error::InvalidModeIndex { m, n });
    }
    Ok(())
}

/// Width `b_j` at which TM(m,n) has its cutoff exactly at `omega_in`, for a
/// fixed aspect ratio `l = a/b`.
pub fn critical_size(omega_in: f64, aspect: f64, m: i64, n: i64) -> Result<f64> {
    check_indices(m, n)?;
    if !(omega_in > 0.0 && aspect > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "critical size needs positive energy and aspect ratio (omega={omega_in}, l={aspect})"
        )));
    }
    let (m, n) = (m as f64, n as f64);
    Ok(C_LIGHT * std::f64::consts::PI / omega_in * ((m / aspect).powi(2) + n * n).sqrt())
}

/// Where an input energy sits relative to the cutoff ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "region")]
pub enum Region {
    /// Below the TM11 cutoff; nothing propagates.
    Cutoff,
    SingleMode,
    MultiMode { j_max: usize },
    /// Exactly on the cutoff of mode `rank`.
    Boundary { rank: usize },
}

impl Region {
    pub fn label(&self) -> &'static str {
        match self {
            Region::Cutoff => "cutoff",
            Region::SingleMode => "single_mode",
            Region::MultiMode { .. } => "multi_mode",
            Region::Boundary { .. } => "boundary",
        }
    }
}

/// One TM(m,n) propagation channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmMode {
    pub m: u32,
    pub n: u32,
    /// Cutoff frequency `ω_j` in PHz.
    pub cutoff: f64,
    /// 1-based position in the ascending-cutoff order.
    pub rank: usize,
}

impl TmMode {
    /// `sin(mπ/2)·sin(nπ/2)`, which is ±1 for odd indices.
    pub fn parity(&self) -> f64 {
        let s = |k: u32| if k % 4 == 1 { 1.0 } else { -1.0 };
        s(self.m) * s(self.n)
    }

    pub fn label(&self) -> String {
        format!("TM{}{}", self.m, self.n)
    }

    /// `ω(k) = sqrt(ω_j² + k²)`.
    pub fn dispersion(&self, k: f64) -> f64 {
        self.cutoff.hypot(k)
    }

    /// Non-negative propagation constant at energy `omega`.
    pub fn wavenumber(&self, omega: f64) -> Result<f64> {
        if omega < self.cutoff {
            return Err(Error::Evanescent { omega, cutoff: self.cutoff });
        }
        Ok(((omega - self.cutoff) * (omega + self.cutoff)).sqrt())
    }

    /// Photon density of states `ρ_j = ω / sqrt(ω² − ω_j²)`.
    pub fn state_density(&self, omega: f64) -> Result<f64> {
        if omega == self.cutoff {
            return Err(Error::Boundary { omega, cutoff: self.cutoff });
        }
        Ok(omega / self.wavenumber(omega)?)
    }
}
