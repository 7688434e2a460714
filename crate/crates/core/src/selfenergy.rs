//! Emitter self-energy `h^{(i)}(E) = Δ^{(i)}(E) − iΓ^{(i)}(E)` and the
//! resolvent `f(E)` that sits in the denominator of every scattering
//! amplitude.
//!
//! Each mode `j` contributes in closed form
//!
//! ```text
//! Δ_j = (Ω²λ²/E²) [2E + πω_j + ω_j² ζ_j(E) / sqrt|ω_j² − E²|]
//! Γ_j = 2π Ω²λ² ω_j² / (E² sqrt(E² − ω_j²))      (E > ω_j, else 0)
//! ```
//!
//! with `ζ_j = 2 ln(ω_j / (E − sqrt(E² − ω_j²)))` above the cutoff (blue
//! shift) and `ζ_j = −π − 2 atan(E / sqrt(ω_j² − E²))` below it (red shift).
//! By default only open modes enter the sum, which makes it finite and
//! exact. Keeping the red shifts of closed modes needs a truncation, see
//! [`SelfEnergyOptions::red_shift_modes`]; that sum grows without bound as
//! more modes are added.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::emitter::{EmitterParams, Transition, Variant};
use crate::error::{Error, Result};
use crate::geometry::{TmMode, WaveguideGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfEnergyOptions {
    /// Keep the red Lamb shift of modes above the probe energy.
    pub include_red_shift: bool,
    /// Number of lowest modes summed when `include_red_shift` is set.
    pub red_shift_modes: usize,
    /// Relative distance to any cutoff inside which evaluation is refused.
    pub guard: f64,
}

impl Default for SelfEnergyOptions {
    fn default() -> Self {
        Self { include_red_shift: false, red_shift_modes: 64, guard: 1e-9 }
    }
}

/// Branch function `ζ_j(E)`.
pub fn zeta(mode: &TmMode, energy: f64) -> Result<f64> {
    check_energy(energy)?;
    let w = mode.cutoff;
    if energy == w {
        return Err(Error::Boundary { omega: energy, cutoff: w });
    }
    if energy > w {
        // ω/(E − k) = (E + k)/ω; the second form does not cancel.
        let k = mode.wavenumber(energy)?;
        Ok(2.0 * ((energy + k) / w).ln())
    } else {
        let q = ((w - energy) * (w + energy)).sqrt();
        Ok(-PI - 2.0 * (energy / q).atan())
    }
}

/// Decay rate `Γ_j^{(i)}(E)` into mode `j`.
pub fn decay_rate(em: &EmitterParams, tr: Transition, mode: &TmMode, energy: f64) -> Result<f64> {
    check_energy(energy)?;
    let w = mode.cutoff;
    if energy == w {
        return Err(Error::Boundary { omega: energy, cutoff: w });
    }
    if energy < w {
        return Ok(0.0);
    }
    let k = mode.wavenumber(energy)?;
    Ok(2.0 * PI * em.strength(tr) * w * w / (energy * energy * k))
}

/// Lamb shift `Δ_j^{(i)}(E)` from mode `j`; zero for closed modes unless
/// `include_red_shift` is set.
pub fn lamb_shift(
    em: &EmitterParams,
    tr: Transition,
    mode: &TmMode,
    energy: f64,
    include_red_shift: bool,
) -> Result<f64> {
    let z = zeta(mode, energy)?;
    let w = mode.cutoff;
    if energy < w && !include_red_shift {
        return Ok(0.0);
    }
    let gap = ((w - energy) * (w + energy)).abs().sqrt();
    let bracket = 2.0 * energy + PI * w + w * w * z / gap;
    Ok(em.strength(tr) / (energy * energy) * bracket)
}

/// Contribution of one mode to both self-energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeContribution {
    pub mode: TmMode,
    pub zeta: f64,
    /// `Δ_j^{(1)}, Δ_j^{(2)}`.
    pub shift: [f64; 2],
    /// `Γ_j^{(1)}, Γ_j^{(2)}`.
    pub decay: [f64; 2],
}

/// Mode-resolved self-energy at one probe energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfEnergy {
    pub energy: f64,
    pub include_red_shift: bool,
    pub terms: Vec<ModeContribution>,
}

impl SelfEnergy {
    pub fn shift(&self, tr: Transition) -> f64 {
        self.terms.iter().map(|t| t.shift[tr.index()]).sum()
    }

    pub fn decay(&self, tr: Transition) -> f64 {
        self.terms.iter().map(|t| t.decay[tr.index()]).sum()
    }

    pub fn h(&self, tr: Transition) -> Complex64 {
        Complex64::new(self.shift(tr), -self.decay(tr))
    }

    /// Modes open at this energy, in rank order.
    pub fn open_terms(&self) -> impl Iterator<Item = &ModeContribution> {
        self.terms.iter().filter(move |t| t.mode.cutoff < self.energy)
    }
}

/// Evaluate every contributing mode at `energy`.
pub fn self_energy(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    energy: f64,
    opts: &SelfEnergyOptions,
) -> Result<SelfEnergy> {
    check_energy(energy)?;
    check_guard(geom, energy, opts.guard)?;
    let open = geom.modes_up_to(energy);
    let modes = if opts.include_red_shift {
        geom.first_modes(opts.red_shift_modes.max(open.len()))
    } else {
        open
    };
    let terms = modes
        .into_iter()
        .map(|mode| {
            let mut shift = [0.0; 2];
            let mut decay = [0.0; 2];
            for tr in Transition::BOTH {
                shift[tr.index()] = lamb_shift(em, tr, &mode, energy, opts.include_red_shift)?;
                decay[tr.index()] = decay_rate(em, tr, &mode, energy)?;
            }
            Ok(ModeContribution { mode, zeta: zeta(&mode, energy)?, shift, decay })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelfEnergy { energy, include_red_shift: opts.include_red_shift, terms })
}

/// Total `h^{(i)}(E)` over the mode sum selected by `opts`.
pub fn h_total(
    em: &EmitterParams,
    tr: Transition,
    geom: &WaveguideGeometry,
    energy: f64,
    opts: &SelfEnergyOptions,
) -> Result<Complex64> {
    Ok(self_energy(em, geom, energy, opts)?.h(tr))
}

/// Value of the resolvent at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventValue {
    pub energy: f64,
    pub f: Complex64,
    pub variant: Variant,
}

/// `f(E)` in the form selected by the emitter variant:
///
/// * generic: `(E−Ω₁)(E−Ω₂) − (E−Ω₂)h⁽¹⁾ − (E−Ω₁)h⁽²⁾`
/// * degenerate: `E − Ω − h⁽¹⁾ − h⁽²⁾`
/// * two-level: `E − Ω_a − h⁽ᵃ⁾` for the active transition `a`
pub fn f_eval(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    energy: f64,
    opts: &SelfEnergyOptions,
) -> Result<ResolventValue> {
    let se = self_energy(em, geom, energy, opts)?;
    Ok(resolvent(em, &se))
}

/// Assemble `f` from an already evaluated self-energy.
pub fn resolvent(em: &EmitterParams, se: &SelfEnergy) -> ResolventValue {
    let e = se.energy;
    let w = em.pathway_weights(e);
    let f = Complex64::from(em.bare_factor(e))
        - se.h(Transition::First) * w[0]
        - se.h(Transition::Second) * w[1];
    ResolventValue { energy: e, f, variant: em.variant() }
}

/// Per-channel widths `Λ_j = Σ_i w_i Γ_j^{(i)}` over the open modes, with the
/// variant weights of [`EmitterParams::pathway_weights`]. In the generic case
/// this is `Γ_j⁽¹⁾(E−Ω₂) + Γ_j⁽²⁾(E−Ω₁)`, and `Σ_j Λ_j = Im f` in every
/// variant.
pub fn channel_widths(em: &EmitterParams, se: &SelfEnergy) -> Vec<f64> {
    let w = em.pathway_weights(se.energy);
    se.open_terms().map(|t| w[0] * t.decay[0] + w[1] * t.decay[1]).collect()
}

fn check_energy(energy: f64) -> Result<()> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be positive (got {energy})")));
    }
    Ok(())
}

/// Refuse energies within `guard` (relative) of any cutoff.
pub fn check_guard(geom: &WaveguideGeometry, energy: f64, guard: f64) -> Result<()> {
    let reach = energy * (1.0 + 2.0 * guard) / (1.0 - guard).max(f64::EPSILON);
    for mode in geom.modes_up_to(reach) {
        if (energy - mode.cutoff).abs() <= guard * mode.cutoff {
            return Err(Error::Boundary { omega: energy, cutoff: mode.cutoff });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn guide() -> WaveguideGeometry {
        WaveguideGeometry::from_aspect(1.5, 1.2).unwrap()
    }

    fn em(l1: f64, l2: f64) -> EmitterParams {
        EmitterParams::new(1.2, 1.2, l1, l2).unwrap()
    }

    #[test]
    fn zeta_branches() {
        let tm11 = guide().mode(1).unwrap();
        let w = tm11.cutoff;
        assert!(zeta(&tm11, w * (1.0 + 1e-12)).unwrap().abs() < 1e-5);
        assert!((zeta(&tm11, 1e-9).unwrap() + PI).abs() < 1e-8);
        let z = zeta(&tm11, w * 2f64.sqrt()).unwrap();
        assert!((z - 1.762_747_174_039).abs() < 1e-11);
        assert!((zeta(&tm11, 1.5).unwrap() - 2.078_183_429_888).abs() < 1e-11);
        assert!(zeta(&tm11, 0.5).unwrap() < 0.0);
        assert!(matches!(zeta(&tm11, w), Err(Error::Boundary { .. })));
    }

    #[test]
    fn decay_rate_values() {
        let tm11 = guide().mode(1).unwrap();
        let e = em(0.1, 0.0);
        assert_eq!(decay_rate(&e, Transition::First, &tm11, 0.9).unwrap(), 0.0);
        assert_eq!(decay_rate(&e, Transition::Second, &tm11, 1.5).unwrap(), 0.0);
        let g = decay_rate(&e, Transition::First, &tm11, 1.5).unwrap();
        assert!((g - 0.030_677_805_468_49).abs() < 1e-13);
        assert!(decay_rate(&e, Transition::First, &tm11, tm11.cutoff).is_err());
        let quad = decay_rate(&em(0.2, 0.0), Transition::First, &tm11, 1.5).unwrap();
        assert!((quad / g - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lamb_shift_values() {
        let g = guide();
        let tm11 = g.mode(1).unwrap();
        let tm31 = g.mode(2).unwrap();
        let e = em(0.1, 0.0);
        let d = lamb_shift(&e, Transition::First, &tm11, 1.5, false).unwrap();
        assert!((d - 0.048_312_357_259_92).abs() < 1e-13);
        assert_eq!(lamb_shift(&e, Transition::Second, &tm11, 1.5, false).unwrap(), 0.0);
        assert_eq!(lamb_shift(&e, Transition::First, &tm31, 1.2, false).unwrap(), 0.0);
        let red = lamb_shift(&e, Transition::First, &tm31, 1.2, true).unwrap();
        assert!((red + 0.032_639_883_201_35).abs() < 1e-13);
    }

    #[test]
    fn h_total_sums() {
        let g = guide();
        let e = em(0.1, 0.07);
        let opts = SelfEnergyOptions::default();
        assert_eq!(h_total(&e, Transition::First, &g, 0.8, &opts).unwrap(), Complex64::new(0.0, 0.0));

        let tm11 = g.mode(1).unwrap();
        let h = h_total(&e, Transition::Second, &g, 1.3, &opts).unwrap();
        let d = lamb_shift(&e, Transition::Second, &tm11, 1.3, false).unwrap();
        let gam = decay_rate(&e, Transition::Second, &tm11, 1.3).unwrap();
        assert_eq!(h, Complex64::new(d, -gam));

        let se = self_energy(&e, &g, 2.0, &opts).unwrap();
        assert_eq!(se.terms.len(), 2);
        let red = SelfEnergyOptions { include_red_shift: true, red_shift_modes: 10, ..opts };
        let se_red = self_energy(&e, &g, 2.0, &red).unwrap();
        assert_eq!(se_red.terms.len(), 10);
        assert_eq!(se.decay(Transition::First), se_red.decay(Transition::First));
        assert!(se_red.shift(Transition::First) < se.shift(Transition::First));
    }

    #[test]
    fn guard_margin() {
        let g = guide();
        let w1 = g.mode(1).unwrap().cutoff;
        let opts = SelfEnergyOptions::default();
        let e = em(0.1, 0.1);
        assert!(matches!(f_eval(&e, &g, w1 * (1.0 + 5e-10), &opts), Err(Error::Boundary { .. })));
        assert!(matches!(f_eval(&e, &g, w1 * (1.0 - 5e-10), &opts), Err(Error::Boundary { .. })));
        assert!(f_eval(&e, &g, w1 * (1.0 + 1e-8), &opts).is_ok());
    }

    #[test]
    fn decoupled_resolvent_is_real() {
        let g = guide();
        let e = EmitterParams::new(1.3, 1.1, 0.0, 0.0).unwrap();
        let f = f_eval(&e, &g, 1.25, &SelfEnergyOptions::default()).unwrap();
        assert_eq!(f.f, Complex64::new((1.25 - 1.3) * (1.25 - 1.1), 0.0));
    }

    #[test]
    fn imaginary_part_is_channel_width_sum() {
        let g = guide();
        let e = EmitterParams::new(1.9, 2.2, 0.08, 0.12).unwrap();
        for &energy in &[1.2, 2.0, 2.6] {
            let se = self_energy(&e, &g, energy, &SelfEnergyOptions::default()).unwrap();
            let f = resolvent(&e, &se).f;
            let by_def = (energy - 2.2) * se.decay(Transition::First)
                + (energy - 1.9) * se.decay(Transition::Second);
            assert!((f.im - by_def).abs() < 1e-15 * by_def.abs().max(1.0));
            let lam: f64 = channel_widths(&e, &se).iter().sum();
            assert!((f.im - lam).abs() < 1e-15);
        }
    }

    #[test]
    fn generic_factors_into_degenerate() {
        let g = guide();
        let opts = SelfEnergyOptions::default();
        let omega = 1.2;
        let deg = EmitterParams::new(omega, omega, 0.1, 0.06).unwrap();
        for &energy in &[1.0, 1.3, 1.6, 2.1] {
            let se = self_energy(&deg, &g, energy, &opts).unwrap();
            let generic = Complex64::from((energy - omega) * (energy - omega))
                - se.h(Transition::First) * (energy - omega)
                - se.h(Transition::Second) * (energy - omega);
            let ratio = generic / resolvent(&deg, &se).f;
            assert!((ratio - (energy - omega)).norm() < 1e-13);
        }
    }

    #[test]
    fn two_level_resolvent() {
        let g = guide();
        let e = EmitterParams::new(1.3, 1.1, 0.1, 0.0).unwrap();
        let opts = SelfEnergyOptions::default();
        let f = f_eval(&e, &g, 1.4, &opts).unwrap();
        let h1 = h_total(&e, Transition::First, &g, 1.4, &opts).unwrap();
        assert_eq!(f.variant, Variant::TwoLevel { active: Transition::First });
        assert!((f.f - (Complex64::from(1.4 - 1.3) - h1)).norm() < 1e-15);
    }
}
