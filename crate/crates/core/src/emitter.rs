//! V-type emitter parameters and the mode-dependent coupling strength.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{TmMode, WaveguideGeometry};

/// Relative splitting `|Ω₁ − Ω₂| / max(Ω₁, Ω₂)` below which the upper levels
/// are treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// One of the two dipole transitions `|e_i⟩ ↔ |g⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Transition {
    First,
    Second,
}

impl Transition {
    pub const BOTH: [Transition; 2] = [Transition::First, Transition::Second];

    /// 0 for `First`, 1 for `Second`.
    pub fn index(self) -> usize {
        match self {
            Transition::First => 0,
            Transition::Second => 1,
        }
    }
}

/// Which form of the resolvent applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Generic,
    /// `Ω₁ = Ω₂` within [`DEGENERACY_TOLERANCE`].
    Degenerate,
    /// Exactly one coupling is zero; `active` is the transition that remains.
    TwoLevel { active: Transition },
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::Generic => "generic",
            Variant::Degenerate => "degenerate",
            Variant::TwoLevel { .. } => "two_level",
        }
    }
}

/// Transition frequencies `Ω₁, Ω₂` (PHz) and dimensionless couplings
/// `λ₁, λ₂`.
///
/// Both couplings may be zero, which describes a decoupled emitter; the
/// variant then follows the level splitting only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitterParams {
    omega: [f64; 2],
    lambda: [f64; 2],
}

impl EmitterParams {
    pub fn new(omega1: f64, omega2: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        for (name, w) in [("omega1", omega1), ("omega2", omega2)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive (got {w})")));
            }
        }
        for (name, l) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative (got {l})"
                )));
            }
        }
        Ok(Self { omega: [omega1, omega2], lambda: [lambda1, lambda2] })
    }

    /// Couplings derived from dipole moments via [`lambda_from_dipole`].
    pub fn from_dipoles(
        omega1: f64,
        omega2: f64,
        p1: f64,
        p2: f64,
        geom: &WaveguideGeometry,
    ) -> Result<Self> {
        Self::new(omega1, omega2, lambda_from_dipole(p1, geom)?, lambda_from_dipole(p2, geom)?)
    }

    pub fn omega(&self, tr: Transition) -> f64 {
        self.omega[tr.index()]
    }

    pub fn lambda(&self, tr: Transition) -> f64 {
        self.lambda[tr.index()]
    }

    pub fn with_omega(mut self, tr: Transition, value: f64) -> Result<Self> {
        self.omega[tr.index()] = value;
        Self::new(self.omega[0], self.omega[1], self.lambda[0], self.lambda[1])
    }

    pub fn with_lambda(mut self, tr: Transition, value: f64) -> Result<Self> {
        self.lambda[tr.index()] = value;
        Self::new(self.omega[0], self.omega[1], self.lambda[0], self.lambda[1])
    }

    pub fn is_decoupled(&self) -> bool {
        self.lambda == [0.0, 0.0]
    }

    pub fn variant(&self) -> Variant {
        let [l1, l2] = self.lambda;
        if l2 == 0.0 && l1 > 0.0 {
            return Variant::TwoLevel { active: Transition::First };
        }
        if l1 == 0.0 && l2 > 0.0 {
            return Variant::TwoLevel { active: Transition::Second };
        }
        let [w1, w2] = self.omega;
        if (w1 - w2).abs() <= DEGENERACY_TOLERANCE * w1.max(w2) {
            Variant::Degenerate
        } else {
            Variant::Generic
        }
    }

    /// `λ_i² Ω_i²`, the weight shared by the coupling, decay rate and shift.
    pub fn strength(&self, tr: Transition) -> f64 {
        let i = tr.index();
        (self.lambda[i] * self.omega[i]).powi(2)
    }

    /// Factors `w_i` multiplying `h_i` in the resolvent, such that
    /// `f = bare(E) − w₁h₁ − w₂h₂` and `u_e^{(i)} = g^{(i)} w_i / f`.
    ///
    /// Generic: `(E − Ω₂, E − Ω₁)`; degenerate: `(1, 1)`; two-level: 1 on
    /// the active transition and 0 on the other.
    pub fn pathway_weights(&self, energy: f64) -> [f64; 2] {
        match self.variant() {
            Variant::Generic => [energy - self.omega[1], energy - self.omega[0]],
            Variant::Degenerate => [1.0, 1.0],
            Variant::TwoLevel { active: Transition::First } => [1.0, 0.0],
            Variant::TwoLevel { active: Transition::Second } => [0.0, 1.0],
        }
    }

    /// The emitter-only part of the resolvent.
    pub fn bare_factor(&self, energy: f64) -> f64 {
        match self.variant() {
            Variant::Generic => (energy - self.omega[0]) * (energy - self.omega[1]),
            Variant::Degenerate => energy - 0.5 * (self.omega[0] + self.omega[1]),
            Variant::TwoLevel { active } => energy - self.omega(active),
        }
    }
}

/// `λ = p / sqrt(π a b)`.
pub fn lambda_from_dipole(p: f64, geom: &WaveguideGeometry) -> Result<f64> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::InvalidParameter(format!("dipole moment must be non-negative (got {p})")));
    }
    Ok(p / (std::f64::consts::PI * geom.a() * geom.b()).sqrt())
}

/// Real coupling `g_{j,k}^{(i)} = −λ_i Ω_i ω_j / ω_{j,k}^{3/2} · sin(mπ/2) sin(nπ/2)`.
pub fn coupling(em: &EmitterParams, mode: &TmMode, k: f64, tr: Transition) -> f64 {
    let omega_k = mode.dispersion(k);
    -em.lambda(tr) * em.omega(tr) * mode.cutoff / omega_k.powf(1.5) * mode.parity()
}
