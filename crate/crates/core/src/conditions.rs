//! Perfect-transmission (EIT) and perfect-reflection (Fano) conditions.
//!
//! With `f = bare − w₁h₁ − w₂h₂` the total reflectance of a CSS input, or of
//! any input in the single-mode window, is `Im(f)²/|f|²`. It vanishes where
//! `Im f = Σ_j Λ_j = 0` and reaches one where `Re f = 0`.
//!
//! In the generic variant `Im f = Γ⁽¹⁾(E−Ω₂) + Γ⁽²⁾(E−Ω₁)`, and every mode
//! contributes to `Γ⁽¹⁾` and `Γ⁽²⁾` with the same energy dependence, scaled by
//! `λ₁²Ω₁²` and `λ₂²Ω₂²` respectively. The zero is therefore the same in every
//! window:
//!
//! ```text
//! ω* = (λ₁²Ω₁²Ω₂ + λ₂²Ω₂²Ω₁) / (λ₁²Ω₁² + λ₂²Ω₂²)
//! ```
//!
//! `Re f` contains the Lamb shift and has no closed-form zero; it is scanned
//! on a grid and bracketed roots are refined by bisection. A root that
//! touches zero without changing sign, or two roots closer than the grid
//! spacing, can be missed; raise [`ScanOptions::grid`] if that matters.

use rayon::prelude::*;
use serde::Serialize;

use crate::emitter::{EmitterParams, Transition, Variant};
use crate::error::{Error, Result};
use crate::geometry::WaveguideGeometry;
use crate::scattering::{closed_form_reflectance, scatter, single_mode_input_laws, ClosedForm, InputState};
use crate::selfenergy::{f_eval, SelfEnergyOptions};

/// Open energy interval `(lo, hi)` in PHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err(Error::InvalidParameter(format!("window needs 0 < lo < hi (got {lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    /// `(ω₁, ω₂)`, where only TM11 propagates.
    pub fn single_mode(geom: &WaveguideGeometry) -> Self {
        let modes = geom.first_modes(2);
        Self { lo: modes[0].cutoff, hi: modes[1].cutoff }
    }

    /// `(ω_j, ω_{j+1})`, where exactly `j` modes propagate.
    pub fn open(geom: &WaveguideGeometry, j: usize) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidParameter("window index starts at 1".into()));
        }
        let modes = geom.first_modes(j + 1);
        Self::new(modes[j - 1].cutoff, modes[j].cutoff)
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega > self.lo && omega < self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    /// Uniform scan points per window (per sub-interval between cutoffs).
    pub grid: usize,
    /// Relative bracket width at which bisection stops.
    pub rel_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { grid: 2000, rel_tol: 1e-12 }
    }
}

/// Closed-form EIT frequency; `None` unless the variant is generic and both
/// couplings are non-zero.
pub fn eit_root(em: &EmitterParams) -> Option<f64> {
    if em.variant() != Variant::Generic || em.lambda(Transition::First) == 0.0 || em.lambda(Transition::Second) == 0.0 {
        return None;
    }
    let s1 = em.strength(Transition::First);
    let s2 = em.strength(Transition::Second);
    let (w1, w2) = (em.omega(Transition::First), em.omega(Transition::Second));
    Some((s1 * w2 + s2 * w1) / (s1 + s2))
}

/// [`eit_root`] if it lies strictly inside `window` at an energy where some
/// mode propagates and no cutoff is hit.
pub fn eit_root_in(em: &EmitterParams, geom: &WaveguideGeometry, window: &Window) -> Option<f64> {
    let root = eit_root(em)?;
    let open = geom.open_modes(root);
    if !window.contains(root) || open.is_empty() || open.iter().any(|m| m.cutoff == root) {
        return None;
    }
    Some(root)
}

/// Sub-intervals of `window` between cutoffs where at least one mode is open,
/// pulled in from each cutoff by a few guard widths.
fn open_segments(geom: &WaveguideGeometry, window: &Window, guard: f64) -> Vec<(f64, f64)> {
    let margin = 4.0 * guard.max(f64::EPSILON);
    let mut edges = vec![window.lo];
    edges.extend(geom.modes_up_to(window.hi).iter().map(|m| m.cutoff).filter(|&c| window.contains(c)));
    edges.push(window.hi);
    edges.dedup();
    edges
        .windows(2)
        .filter_map(|e| {
            let (lo, hi) = (e[0], e[1]);
            if geom.open_modes(0.5 * (lo + hi)).is_empty() {
                return None;
            }
            let lo = lo * (1.0 + margin);
            let hi = hi * (1.0 - margin);
            (hi > lo).then_some((lo, hi))
        })
        .collect()
}

/// All roots of `Re f` found by scan and bisection inside `window`. Energies
/// below the TM11 cutoff are skipped, since nothing can be reflected there.
pub fn fano_roots(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    window: &Window,
    opts: &SelfEnergyOptions,
    scan: &ScanOptions,
) -> Result<Vec<f64>> {
    if scan.grid < 2 {
        return Err(Error::InvalidParameter("scan grid needs at least 2 points".into()));
    }
    let re_f = |x: f64| f_eval(em, geom, x, opts).map(|v| v.f.re);
    let mut roots = Vec::new();
    for (lo, hi) in open_segments(geom, window, opts.guard) {
        let mut xs: Vec<f64> = (0..scan.grid)
            .map(|i| lo + (hi - lo) * i as f64 / (scan.grid - 1) as f64)
            .collect();
        // Resonances have width ~λ²Ω; make sure narrow ones are bracketed.
        for tr in Transition::BOTH {
            let w = em.omega(tr);
            let spread = 5.0 * em.lambda(tr).powi(2) * w;
            xs.extend([w - spread, w, w + spread].into_iter().filter(|&x| x > lo && x < hi));
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let values = xs.par_iter().map(|&x| re_f(x)).collect::<Result<Vec<f64>>>()?;
        for i in 0..xs.len() {
            if values[i] == 0.0 {
                roots.push(xs[i]);
            } else if i + 1 < xs.len() && values[i] * values[i + 1] < 0.0 {
                roots.push(bisect(&re_f, xs[i], xs[i + 1], values[i], scan.rel_tol)?);
            }
        }
    }
    Ok(roots)
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64, rel_tol: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    // Return whichever end has the smaller residual.
    let (a, b) = (f(lo)?.abs(), f(hi)?.abs());
    Ok(if a <= b { lo } else { hi })
}

/// Shape of the single-mode-window reflectance spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Both transitions below the TM11 cutoff: monotone decreasing R.
    I,
    /// One transition inside the window: a single unit peak.
    II,
    /// Both inside and distinct: two unit peaks around an EIT zero.
    III,
    /// Degenerate transitions inside the window: one unit peak, no zero.
    IV,
    /// A transition at or above the second cutoff, or a two-level emitter.
    Unclassified,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::I => "i",
            Regime::II => "ii",
            Regime::III => "iii",
            Regime::IV => "iv",
            Regime::Unclassified => "unclassified",
        }
    }
}

/// Regime from the position of `Ω₁, Ω₂` relative to the first two cutoffs.
pub fn classify_regime(em: &EmitterParams, geom: &WaveguideGeometry) -> Regime {
    let window = Window::single_mode(geom);
    let variant = em.variant();
    if matches!(variant, Variant::TwoLevel { .. }) {
        return Regime::Unclassified;
    }
    let omegas = [em.omega(Transition::First), em.omega(Transition::Second)];
    if omegas.iter().any(|&w| w >= window.hi) {
        return Regime::Unclassified;
    }
    let inside = omegas.iter().filter(|&&w| w > window.lo).count();
    match (inside, variant) {
        (0, _) => Regime::I,
        (1, _) => Regime::II,
        (_, Variant::Degenerate) => Regime::IV,
        _ => Regime::III,
    }
}

/// Fano root nearest to `Ω_i` minus `Ω_i`; `None` when there is no root.
pub fn blueshift(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    tr: Transition,
    window: &Window,
    opts: &SelfEnergyOptions,
    scan: &ScanOptions,
) -> Result<Option<f64>> {
    let roots = fano_roots(em, geom, window, opts, scan)?;
    Ok(nearest(&roots, em.omega(tr)).map(|r| r - em.omega(tr)))
}

fn nearest(roots: &[f64], target: f64) -> Option<f64> {
    roots.iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EitCheck {
    pub omega: f64,
    /// `|Im f|` at the root.
    pub im_f_residual: f64,
    /// Full-pipeline reflectance of the CSS input at the root.
    pub reflectance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanoCheck {
    pub omega: f64,
    /// Transition whose frequency is closest to the root.
    pub nearest: Transition,
    /// Root minus that transition frequency.
    pub blueshift: f64,
    /// `|Re f|` at the root.
    pub re_f_residual: f64,
    /// `Im(f)²/|f|²` at the root; one up to rounding.
    pub closed_form_reflectance: f64,
    /// Total reflectance for a photon in mode `n` (index `n − 1`), which is
    /// `Λ_n/Λ` at a Fano root.
    pub single_mode_reflectance: Vec<f64>,
    /// `Λ_n/Λ` for each open mode.
    pub peak_bounds: Vec<f64>,
}

/// Roots and regime for one window, each root re-verified numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub window: Window,
    pub variant: Variant,
    pub regime: Regime,
    pub eit_roots: Vec<EitCheck>,
    pub fano_roots: Vec<FanoCheck>,
}

pub fn report(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    window: &Window,
    opts: &SelfEnergyOptions,
    scan: &ScanOptions,
) -> Result<ConditionReport> {
    let eit_roots = eit_root_in(em, geom, window)
        .map(|omega| -> Result<EitCheck> {
            let f = f_eval(em, geom, omega, opts)?.f;
            let res = scatter(em, geom, &InputState::css(geom, omega)?, opts)?;
            Ok(EitCheck { omega, im_f_residual: f.im.abs(), reflectance: res.total_reflectance })
        })
        .transpose()?
        .into_iter()
        .collect();

    let fano_roots = fano_roots(em, geom, window, opts, scan)?
        .into_iter()
        .map(|omega| {
            let nearest = if (omega - em.omega(Transition::First)).abs()
                <= (omega - em.omega(Transition::Second)).abs()
            {
                Transition::First
            } else {
                Transition::Second
            };
            let f = f_eval(em, geom, omega, opts)?.f;
            let j_max = geom.open_modes(omega).len();
            let mut single_mode_reflectance = Vec::with_capacity(j_max);
            let mut peak_bounds = Vec::with_capacity(j_max);
            for n in 1..=j_max {
                let laws = single_mode_input_laws(em, geom, omega, n, opts)?;
                peak_bounds.push(laws.peak_bound());
                let res = scatter(em, geom, &InputState::single_mode(geom, omega, n)?, opts)?;
                single_mode_reflectance.push(res.total_reflectance);
            }
            Ok(FanoCheck {
                omega,
                nearest,
                blueshift: omega - em.omega(nearest),
                re_f_residual: f.re.abs(),
                closed_form_reflectance: closed_form_reflectance(em, geom, omega, ClosedForm::Css, opts)?,
                single_mode_reflectance,
                peak_bounds,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ConditionReport {
        window: *window,
        variant: em.variant(),
        regime: classify_regime(em, geom),
        eit_roots,
        fano_roots,
    })
}
