//! Input states and per-channel scattering coefficients.
//!
//! An input photon of energy `ω_in` is a superposition `Σ_j c_j |j, k_j⟩`
//! over the open modes. The outgoing state is `Σ_j (c_j + r_j)|j, k_j⟩ +
//! r_j|j, −k_j⟩` with
//!
//! ```text
//! r_j = −2πi ρ_j Σ_{j'} Σ_i c_{j'} g*_{j,k_j}^{(i)} u_e^{(i)}(j', k_{j'})
//! ```
//!
//! and reflectances/transmittances weighted by the group velocity `1/ρ_j`.
//!
//! Phase convention: `c_j` is the amplitude on the mode-`j` basis state
//! multiplied by the parity `sin(mπ/2) sin(nπ/2)` of that mode. In this basis
//! every channel couples with the same sign, so the dark-state condition is
//! `Σ c_j ω_j = 0` and the coherent superposition state has real positive
//! amplitudes. Probabilities do not depend on the convention.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::emitter::{coupling, EmitterParams, Transition, Variant};
use crate::error::{Error, Result};
use crate::geometry::{TmMode, WaveguideGeometry};
use crate::selfenergy::{channel_widths, resolvent, self_energy, SelfEnergy, SelfEnergyOptions};

const NORM_TOL: f64 = 1e-12;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Normalized single-photon input at a fixed energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputState {
    omega_in: f64,
    modes: Vec<TmMode>,
    amps: Vec<Complex64>,
}

fn open_modes(geom: &WaveguideGeometry, omega_in: f64) -> Result<Vec<TmMode>> {
    if !(omega_in.is_finite() && omega_in > 0.0) {
        return Err(Error::InvalidParameter(format!("input energy must be positive (got {omega_in})")));
    }
    let modes = geom.open_modes(omega_in);
    if modes.is_empty() {
        return Err(Error::CutoffRegion { omega: omega_in });
    }
    Ok(modes)
}

fn normalize(v: &mut [Complex64]) -> Result<()> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidParameter("input amplitudes are all zero".into()));
    }
    v.iter_mut().for_each(|c| *c /= norm);
    Ok(())
}

impl InputState {
    /// Photon entirely in the mode of rank `n`.
    pub fn single_mode(geom: &WaveguideGeometry, omega_in: f64, n: usize) -> Result<Self> {
        let modes = open_modes(geom, omega_in)?;
        if n == 0 || n > modes.len() {
            return Err(Error::ModeClosed { rank: n, omega: omega_in });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); modes.len()];
        amps[n - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { omega_in, modes, amps })
    }

    /// Coherent superposition state `c_j ∝ ω_j / sqrt(ω_in² − ω_j²)`.
    pub fn css(geom: &WaveguideGeometry, omega_in: f64) -> Result<Self> {
        let modes = open_modes(geom, omega_in)?;
        let mut amps = modes
            .iter()
            .map(|m| {
                if m.cutoff == omega_in {
                    return Err(Error::Boundary { omega: omega_in, cutoff: m.cutoff });
                }
                Ok(Complex64::new(m.cutoff / m.wavenumber(omega_in)?, 0.0))
            })
            .collect::<Result<Vec<_>>>()?;
        normalize(&mut amps)?;
        Ok(Self { omega_in, modes, amps })
    }

    /// Dark state with `Σ c_j ω_j = 0`.
    ///
    /// `free` holds the coordinates on an orthonormal basis of that null
    /// space (length `j_max − 1`); empty selects the two-mode state
    /// `(ω₂, −ω₁, 0, …)`.
    pub fn dark(geom: &WaveguideGeometry, omega_in: f64, free: &[Complex64]) -> Result<Self> {
        let modes = open_modes(geom, omega_in)?;
        let j_max = modes.len();
        if j_max < 2 {
            return Err(Error::NoDarkState);
        }
        if !free.is_empty() && free.len() != j_max - 1 {
            return Err(Error::InvalidParameter(format!(
                "dark state at {omega_in} PHz takes {} free coordinates, got {}",
                j_max - 1,
                free.len()
            )));
        }
        let basis = null_space_basis(&modes);
        let mut amps = vec![Complex64::new(0.0, 0.0); j_max];
        for (k, v) in basis.iter().enumerate() {
            let coeff = if free.is_empty() {
                if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
            } else {
                free[k]
            };
            for (a, &x) in amps.iter_mut().zip(v) {
                *a += coeff * x;
            }
        }
        normalize(&mut amps)?;
        Ok(Self { omega_in, modes, amps })
    }

    /// Arbitrary amplitudes over all open modes; must already be normalized.
    pub fn custom(geom: &WaveguideGeometry, omega_in: f64, amps: Vec<Complex64>) -> Result<Self> {
        let modes = open_modes(geom, omega_in)?;
        if amps.len() != modes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes given but {} modes are open at {omega_in} PHz",
                amps.len(),
                modes.len()
            )));
        }
        let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { omega_in, modes, amps })
    }

    pub fn omega_in(&self) -> f64 {
        self.omega_in
    }

    pub fn modes(&self) -> &[TmMode] {
        &self.modes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn j_max(&self) -> usize {
        self.modes.len()
    }

    /// `Σ_j c_j ω_j`, which vanishes for dark states.
    pub fn bright_overlap(&self) -> Complex64 {
        self.amps.iter().zip(&self.modes).map(|(c, m)| c * m.cutoff).sum()
    }
}

/// Orthonormal real basis of `{c : Σ c_j ω_j = 0}`, starting from
/// `ω₂ e₁ − ω₁ e₂`.
fn null_space_basis(modes: &[TmMode]) -> Vec<Vec<f64>> {
    let j_max = modes.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(j_max - 1);
    for k in 1..j_max {
        let mut v = vec![0.0; j_max];
        v[0] = modes[k].cutoff;
        v[k] = -modes[0].cutoff;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

/// How to build the input at each energy of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum InputKind {
    /// Photon in the mode of this rank.
    Single(usize),
    Css,
    /// Dark state; coordinates as in [`InputState::dark`].
    Dark(Vec<Complex64>),
    /// Amplitudes in rank order. Missing trailing entries are zero; entries
    /// for closed modes must be zero.
    Custom(Vec<Complex64>),
}

impl InputKind {
    pub fn build(&self, geom: &WaveguideGeometry, omega_in: f64) -> Result<InputState> {
        match self {
            InputKind::Single(n) => InputState::single_mode(geom, omega_in, *n),
            InputKind::Css => InputState::css(geom, omega_in),
            InputKind::Dark(free) => {
                let j_max = open_modes(geom, omega_in)?.len();
                // Coordinates are given for the widest window in use; use the
                // leading ones here.
                let free = if free.len() >= j_max && j_max >= 2 { &free[..j_max - 1] } else { &free[..] };
                InputState::dark(geom, omega_in, free)
            }
            InputKind::Custom(amps) => {
                let j_max = open_modes(geom, omega_in)?.len();
                if let Some(pos) = amps.iter().skip(j_max).position(|c| c.norm() > 0.0) {
                    return Err(Error::ModeClosed { rank: j_max + pos + 1, omega: omega_in });
                }
                let mut v: Vec<Complex64> = amps.iter().take(j_max).copied().collect();
                v.resize(j_max, Complex64::new(0.0, 0.0));
                InputState::custom(geom, omega_in, v)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InputKind::Single(n) => format!("single:{n}"),
            InputKind::Css => "css".into(),
            InputKind::Dark(_) => "dark".into(),
            InputKind::Custom(_) => "custom".into(),
        }
    }
}

/// Couplings at the on-shell wavenumber in the parity-absorbed basis; the
/// same for every open mode up to the factor `ω_j`.
fn effective_coupling(em: &EmitterParams, mode: &TmMode, omega_in: f64) -> Result<[f64; 2]> {
    let k = mode.wavenumber(omega_in)?;
    let mut g = [0.0; 2];
    for tr in Transition::BOTH {
        g[tr.index()] = coupling(em, mode, k, tr) * mode.parity();
    }
    Ok(g)
}

fn amplitudes_from(
    em: &EmitterParams,
    input: &InputState,
    se: &SelfEnergy,
    f: Complex64,
) -> Result<[Complex64; 2]> {
    let zero = Complex64::new(0.0, 0.0);
    if em.is_decoupled() {
        return Ok([zero; 2]);
    }
    if f == zero {
        return Err(Error::SingularResolvent { omega: input.omega_in });
    }
    let w = em.pathway_weights(se.energy);
    let mut drive = [zero; 2];
    for (c, mode) in input.amps.iter().zip(&input.modes) {
        let g = effective_coupling(em, mode, input.omega_in)?;
        for i in 0..2 {
            drive[i] += c * g[i];
        }
    }
    Ok([drive[0] * w[0] / f, drive[1] * w[1] / f])
}

/// Excited-state amplitudes `(u_e⁽¹⁾, u_e⁽²⁾)` of the scattering state.
pub fn excited_amplitudes(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    input: &InputState,
    opts: &SelfEnergyOptions,
) -> Result<[Complex64; 2]> {
    let se = self_energy(em, geom, input.omega_in, opts)?;
    let f = resolvent(em, &se).f;
    amplitudes_from(em, input, &se, f)
}

/// Per-channel and total reflection/transmission for one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub omega_in: f64,
    pub variant: Variant,
    /// Scattered amplitudes `r_j` in rank order.
    pub amplitudes: Vec<Complex64>,
    pub reflectance: Vec<f64>,
    pub transmittance: Vec<f64>,
    pub total_reflectance: f64,
    pub total_transmittance: f64,
    /// `f(ω_in)`; absent at a cutoff resonance.
    pub resolvent: Option<Complex64>,
    /// `Λ_j(ω_in)`; empty at a cutoff resonance.
    pub channel_widths: Vec<f64>,
    /// `ρ_j(ω_in)`; infinite for a mode exactly at cutoff.
    pub state_density: Vec<f64>,
    /// `ω_in` coincides with the cutoff of an open mode.
    pub cutoff_resonance: bool,
}

/// Full Lippmann-Schwinger pipeline for `input`.
///
/// When `ω_in` equals the cutoff of one of the open modes the divergent
/// density of states is handled as a limit: an input living entirely in the
/// resonant mode(s) is reflected completely, any other input sees the
/// resonant channel as closed and is transmitted.
pub fn scatter(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    input: &InputState,
    opts: &SelfEnergyOptions,
) -> Result<ScatteringResult> {
    let omega = input.omega_in;
    if input.modes.iter().any(|m| m.cutoff == omega) {
        return Ok(cutoff_resonance(em, input));
    }
    let se = self_energy(em, geom, omega, opts)?;
    let f = resolvent(em, &se).f;
    let u = amplitudes_from(em, input, &se, f)?;

    let mut amplitudes = Vec::with_capacity(input.j_max());
    let mut rho = Vec::with_capacity(input.j_max());
    for mode in &input.modes {
        let g = effective_coupling(em, mode, omega)?;
        let density = mode.state_density(omega)?;
        // g is real, so g* = g.
        let r = -2.0 * PI * I * density * (u[0] * g[0] + u[1] * g[1]);
        amplitudes.push(r);
        rho.push(density);
    }

    let flux: f64 = input.amps.iter().zip(&rho).map(|(c, p)| c.norm_sqr() / p).sum();
    let reflectance: Vec<f64> =
        amplitudes.iter().zip(&rho).map(|(r, p)| r.norm_sqr() / p / flux).collect();
    let transmittance: Vec<f64> = amplitudes
        .iter()
        .zip(&input.amps)
        .zip(&rho)
        .map(|((r, c), p)| (c + r).norm_sqr() / p / flux)
        .collect();

    Ok(ScatteringResult {
        omega_in: omega,
        variant: em.variant(),
        total_reflectance: reflectance.iter().sum(),
        total_transmittance: transmittance.iter().sum(),
        amplitudes,
        reflectance,
        transmittance,
        resolvent: Some(f),
        channel_widths: channel_widths(em, &se),
        state_density: rho,
        cutoff_resonance: false,
    })
}

fn cutoff_resonance(em: &EmitterParams, input: &InputState) -> ScatteringResult {
    let omega = input.omega_in;
    let resonant: Vec<bool> = input.modes.iter().map(|m| m.cutoff == omega).collect();
    let trapped = input.amps.iter().zip(&resonant).all(|(c, &res)| res || c.norm_sqr() == 0.0);
    let j_max = input.j_max();
    let zero = Complex64::new(0.0, 0.0);
    let state_density: Vec<f64> = input
        .modes
        .iter()
        .map(|m| if m.cutoff == omega { f64::INFINITY } else { m.state_density(omega).unwrap_or(f64::INFINITY) })
        .collect();

    let (amplitudes, reflectance, transmittance) = if trapped {
        let amplitudes: Vec<Complex64> = input.amps.iter().map(|c| -c).collect();
        let reflectance: Vec<f64> = input.amps.iter().map(|c| c.norm_sqr()).collect();
        (amplitudes, reflectance, vec![0.0; j_max])
    } else {
        // Zero group velocity: the resonant channel carries no flux.
        let weights: Vec<f64> = input
            .amps
            .iter()
            .zip(&state_density)
            .map(|(c, p)| c.norm_sqr() / p)
            .collect();
        let total: f64 = weights.iter().sum();
        (vec![zero; j_max], vec![0.0; j_max], weights.iter().map(|w| w / total).collect())
    };
    ScatteringResult {
        omega_in: omega,
        variant: em.variant(),
        total_reflectance: reflectance.iter().sum(),
        total_transmittance: transmittance.iter().sum(),
        amplitudes,
        reflectance,
        transmittance,
        resolvent: None,
        channel_widths: Vec::new(),
        state_density,
        cutoff_resonance: true,
    }
}

/// Which input the reduced reflectance `Im(f)²/|f|²` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    /// Any input with only TM11 open.
    SingleModeWindow,
    /// Coherent superposition state in any open window.
    Css,
}

/// `R = Im(f)² / |f|²`, valid in the single-mode window or for CSS input.
pub fn closed_form_reflectance(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    omega_in: f64,
    kind: ClosedForm,
    opts: &SelfEnergyOptions,
) -> Result<f64> {
    let j_max = open_modes(geom, omega_in)?.len();
    if kind == ClosedForm::SingleModeWindow && j_max != 1 {
        return Err(Error::KindMismatch(format!(
            "{j_max} modes are open at {omega_in} PHz, not a single-mode window"
        )));
    }
    let se = self_energy(em, geom, omega_in, opts)?;
    let f = resolvent(em, &se).f;
    if f.norm_sqr() == 0.0 {
        return Err(Error::SingularResolvent { omega: omega_in });
    }
    Ok(f.im * f.im / f.norm_sqr())
}

/// Total reflectance of an arbitrary input from the reduced expression
/// `|Im f / f|² |Σ c_j ω_j|² / (Σ_j ω_j²/k_j · Σ_j |c_j|² k_j)`, without
/// building the channel amplitudes.
pub fn mixed_input_reflectance(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    input: &InputState,
    opts: &SelfEnergyOptions,
) -> Result<f64> {
    let se = self_energy(em, geom, input.omega_in, opts)?;
    let f = resolvent(em, &se).f;
    if f.norm_sqr() == 0.0 {
        return Err(Error::SingularResolvent { omega: input.omega_in });
    }
    let mut density_sum = 0.0;
    let mut flux = 0.0;
    for (c, mode) in input.amps.iter().zip(&input.modes) {
        let k = mode.wavenumber(input.omega_in)?;
        density_sum += mode.cutoff * mode.cutoff / k;
        flux += c.norm_sqr() * k;
    }
    Ok((f.im * f.im / f.norm_sqr()) * input.bright_overlap().norm_sqr() / (density_sum * flux))
}

/// Channel-resolved reflection for a photon entering in mode `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelLaws {
    pub input_rank: usize,
    /// `Λ_j` over the open modes.
    pub widths: Vec<f64>,
    /// `R_j = Λ_n Λ_j / |f|²`.
    pub reflectance: Vec<f64>,
    /// `T_n = |1 − iΛ_n/f|²`; for `j ≠ n`, `T_j = R_j`.
    pub transmittance_input: f64,
    /// `R = Λ_n Λ / |f|²` with `Λ = Σ_j Λ_j = Im f`.
    pub total_reflectance: f64,
    pub resolvent: Complex64,
}

impl ChannelLaws {
    /// Upper bound `Λ_n / Λ` on the total reflectance, reached where `Re f = 0`.
    pub fn peak_bound(&self) -> f64 {
        self.widths[self.input_rank - 1] / self.widths.iter().sum::<f64>()
    }
}

pub fn single_mode_input_laws(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    omega_in: f64,
    n: usize,
    opts: &SelfEnergyOptions,
) -> Result<ChannelLaws> {
    let j_max = open_modes(geom, omega_in)?.len();
    if n == 0 || n > j_max {
        return Err(Error::ModeClosed { rank: n, omega: omega_in });
    }
    let se = self_energy(em, geom, omega_in, opts)?;
    let f = resolvent(em, &se).f;
    if f.norm_sqr() == 0.0 {
        return Err(Error::SingularResolvent { omega: omega_in });
    }
    let widths = channel_widths(em, &se);
    let mag = f.norm_sqr();
    let lam_n = widths[n - 1];
    let total: f64 = widths.iter().sum();
    Ok(ChannelLaws {
        input_rank: n,
        reflectance: widths.iter().map(|l| lam_n * l / mag).collect(),
        transmittance_input: (Complex64::new(1.0, 0.0) - I * lam_n / f).norm_sqr(),
        total_reflectance: lam_n * total / mag,
        widths,
        resolvent: f,
    })
}

/// On-shell S-matrix element between channels at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelAmplitude {
    /// Free-propagation part, 1 on the diagonal.
    pub direct: f64,
    /// `−2πi Σ_i g*_{out}^{(i)} u_e^{(i)}(in)`; multiplying by `ρ_out` gives
    /// the contribution to `r_out` per unit input amplitude.
    pub scattered: Complex64,
}

pub fn s_matrix_channel(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    omega: f64,
    j_out: usize,
    j_in: usize,
    opts: &SelfEnergyOptions,
) -> Result<ChannelAmplitude> {
    let modes = open_modes(geom, omega)?;
    for rank in [j_out, j_in] {
        if rank == 0 || rank > modes.len() {
            return Err(Error::ModeClosed { rank, omega });
        }
    }
    let input = InputState::single_mode(geom, omega, j_in)?;
    let se = self_energy(em, geom, omega, opts)?;
    let f = resolvent(em, &se).f;
    let u = amplitudes_from(em, &input, &se, f)?;
    let g = effective_coupling(em, &modes[j_out - 1], omega)?;
    Ok(ChannelAmplitude {
        direct: if j_out == j_in { 1.0 } else { 0.0 },
        scattered: -2.0 * PI * I * (u[0] * g[0] + u[1] * g[1]),
    })
}
