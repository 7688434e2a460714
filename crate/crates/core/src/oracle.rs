//! Quadrature reference for the per-mode self-energy.
//!
//! Evaluates `∫ dk |g_{j,k}|² / (E − ω_{j,k} + i0⁺)` over the whole real
//! line directly from the coupling, without using the closed-form
//! antiderivative. The real part is a principal value: the on-shell pole at
//! `k_j = sqrt(E² − ω_j²)` is cut out symmetrically with radius `δ`, the
//! truncated integral is computed for three radii, and the leading `O(δ)`
//! remainder is removed by Richardson extrapolation. The imaginary part is
//! the `−iπ δ(E − ω)` term, i.e. the on-shell weight times the density of
//! states.

use num_complex::Complex64;
use serde::Serialize;

use crate::emitter::{coupling, EmitterParams, Transition};
use crate::error::{Error, Result};
use crate::geometry::{TmMode, WaveguideGeometry};
use crate::quadrature::integrate;
use crate::selfenergy::{decay_rate, lamb_shift};

const EXCLUSION_RADII: [f64; 3] = [1e-3, 1e-4, 1e-5];
const QUAD_REL_TOL: f64 = 1e-13;
const MAX_PANELS: usize = 4000;
/// Agreement demanded between the two Richardson estimates.
const RICHARDSON_TOL: f64 = 1e-8;

/// Numerical `h_j^{(i)}(E) = Δ_j^{(i)} − iΓ_j^{(i)}` for a single mode.
pub fn h_numeric_oracle(
    em: &EmitterParams,
    tr: Transition,
    mode: &TmMode,
    energy: f64,
) -> Result<Complex64> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidParameter(format!("energy must be positive (got {energy})")));
    }
    let w = mode.cutoff;
    if energy == w {
        return Err(Error::Boundary { omega: energy, cutoff: w });
    }
    let weight = |k: f64| coupling(em, mode, k, tr).powi(2);
    if weight(0.0) == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k_max = 50.0 * energy.max(w);

    if energy < w {
        let integrand = |k: f64| weight(k) / (energy - mode.dispersion(k));
        let half = integrate(integrand, 0.0, k_max, 0.0, QUAD_REL_TOL, MAX_PANELS)?.value
            + tail(&integrand, k_max)?;
        return Ok(Complex64::new(2.0 * half, 0.0));
    }

    let pole = mode.wavenumber(energy)?;
    // E − ω(k) = (k_p − k)(k_p + k)/(E + ω(k)); avoids cancellation near the pole.
    let integrand = |k: f64| {
        weight(k) * (energy + mode.dispersion(k)) / ((pole - k) * (pole + k))
    };
    let outer = integrate(integrand, 2.0 * pole, k_max.max(4.0 * pole), 0.0, QUAD_REL_TOL, MAX_PANELS)?
        .value
        + tail(&integrand, k_max.max(4.0 * pole))?;

    let base = energy.min(pole);
    let truncated = EXCLUSION_RADII
        .iter()
        .map(|&r| {
            let delta = r * base;
            let pair = |u: f64| integrand(pole + u) + integrand(pole - u);
            Ok(integrate(pair, delta, pole, 0.0, QUAD_REL_TOL, MAX_PANELS)?.value + outer)
        })
        .collect::<Result<Vec<f64>>>()?;

    // Radii shrink by 10 per step and the remainder is linear in δ.
    let coarse = (10.0 * truncated[1] - truncated[0]) / 9.0;
    let fine = (10.0 * truncated[2] - truncated[1]) / 9.0;
    if (coarse - fine).abs() > RICHARDSON_TOL * fine.abs() {
        return Err(Error::OracleFailure(format!(
            "Richardson extrapolation did not settle at E={energy}: {coarse} vs {fine}"
        )));
    }

    let density = energy / pole;
    let imag = -std::f64::consts::PI * 2.0 * weight(pole) * density;
    Ok(Complex64::new(2.0 * fine, imag))
}

/// Analytic and numerical self-energy of one mode side by side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    pub energy: f64,
    pub analytic: Complex64,
    pub numeric: Complex64,
    /// `|numeric − analytic| / |analytic|`.
    pub rel_err: f64,
}

/// Compare the closed form, red shift included, against the quadrature.
pub fn check(em: &EmitterParams, tr: Transition, mode: &TmMode, energy: f64) -> Result<OracleCheck> {
    let analytic = Complex64::new(
        lamb_shift(em, tr, mode, energy, true)?,
        -decay_rate(em, tr, mode, energy)?,
    );
    let numeric = h_numeric_oracle(em, tr, mode, energy)?;
    let scale = analytic.norm();
    let diff = (numeric - analytic).norm();
    let rel_err = if scale > 0.0 { diff / scale } else { diff };
    Ok(OracleCheck { energy, analytic, numeric, rel_err })
}

/// `n` energies spread evenly over `(1.01 ω₁, 0.99 ω₃)` with `±1 %` around
/// the second cutoff left out.
pub fn energy_grid(geom: &WaveguideGeometry, n: usize) -> Vec<f64> {
    let modes = geom.first_modes(3);
    let segments = [
        (1.01 * modes[0].cutoff, 0.99 * modes[1].cutoff),
        (1.01 * modes[1].cutoff, 0.99 * modes[2].cutoff),
    ];
    let segments: Vec<(f64, f64)> = segments.into_iter().filter(|(lo, hi)| hi > lo).collect();
    let total: f64 = segments.iter().map(|(lo, hi)| hi - lo).sum();
    (0..n)
        .map(|i| {
            // Midpoints of n equal cells over the concatenated segments.
            let mut s = total * (i as f64 + 0.5) / n as f64;
            for &(lo, hi) in &segments {
                if s <= hi - lo {
                    return lo + s;
                }
                s -= hi - lo;
            }
            segments.last().map(|&(_, hi)| hi).unwrap_or(f64::NAN)
        })
        .collect()
}

/// `∫_{k0}^∞ f(k) dk` via `k = k0/t`.
fn tail<F: Fn(f64) -> f64>(f: &F, k0: f64) -> Result<f64> {
    let mapped = |t: f64| if t <= 0.0 { 0.0 } else { f(k0 / t) * k0 / (t * t) };
    Ok(integrate(mapped, 0.0, 1.0, 1e-300, QUAD_REL_TOL, MAX_PANELS)?.value)
}
