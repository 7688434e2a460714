//! Energy sweeps and simple spectral features.
//!
//! Points are evaluated in parallel and collected in grid order, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::emitter::EmitterParams;
use crate::error::Error;
use crate::geometry::WaveguideGeometry;
use crate::scattering::{scatter, InputKind, ScatteringResult};
use crate::selfenergy::SelfEnergyOptions;

/// Why a grid point produced no result.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// Below the TM11 cutoff.
    Cutoff,
    /// Within the guard margin of a cutoff.
    Guard,
    /// The requested input mode is not open here.
    Closed,
    Failed(String),
}

impl PointStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PointStatus::Ok => "ok",
            PointStatus::Cutoff => "cutoff",
            PointStatus::Guard => "guard",
            PointStatus::Closed => "closed",
            PointStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub omega: f64,
    pub status: PointStatus,
    pub result: Option<ScatteringResult>,
}

/// Scatter `input` at every energy in `omegas`.
pub fn sweep(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    input: &InputKind,
    omegas: &[f64],
    opts: &SelfEnergyOptions,
) -> Vec<SweepPoint> {
    omegas
        .par_iter()
        .map(|&omega| {
            let outcome = input.build(geom, omega).and_then(|state| scatter(em, geom, &state, opts));
            match outcome {
                Ok(res) => SweepPoint { omega, status: PointStatus::Ok, result: Some(res) },
                Err(err) => {
                    let status = match err {
                        Error::CutoffRegion { .. } => PointStatus::Cutoff,
                        Error::Boundary { .. } => PointStatus::Guard,
                        Error::ModeClosed { .. } | Error::NoDarkState => PointStatus::Closed,
                        other => PointStatus::Failed(other.to_string()),
                    };
                    SweepPoint { omega, status, result: None }
                }
            }
        })
        .collect()
}

/// `n` evenly spaced points including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` evenly spaced points strictly inside `(lo, hi)`.
pub fn interior_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i + 1) as f64 / (n + 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub index: usize,
    pub kind: ExtremumKind,
    pub value: f64,
}

/// Strict local extrema at interior samples.
pub fn local_extrema(values: &[f64]) -> Vec<Extremum> {
    values
        .windows(3)
        .enumerate()
        .filter_map(|(i, w)| {
            let kind = if w[1] > w[0] && w[1] > w[2] {
                ExtremumKind::Max
            } else if w[1] < w[0] && w[1] < w[2] {
                ExtremumKind::Min
            } else {
                return None;
            };
            Some(Extremum { index: i + 1, kind, value: w[1] })
        })
        .collect()
}

/// Feature counts used to tell reflectance regimes apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Features {
    /// Local maxima above the peak threshold.
    pub peaks: usize,
    /// Local minima below the valley threshold.
    pub valleys: usize,
    pub monotone_decreasing: bool,
}

pub fn features(values: &[f64], peak: f64, valley: f64) -> Features {
    let ext = local_extrema(values);
    Features {
        peaks: ext.iter().filter(|e| e.kind == ExtremumKind::Max && e.value > peak).count(),
        valleys: ext.iter().filter(|e| e.kind == ExtremumKind::Min && e.value < valley).count(),
        monotone_decreasing: values.windows(2).all(|w| w[1] < w[0]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::Window;
    use crate::scattering::InputState;

    fn guide() -> WaveguideGeometry {
        WaveguideGeometry::from_aspect(1.5, 1.2).unwrap()
    }

    fn single_mode_spectrum(w1: f64, w2: f64) -> Vec<f64> {
        let g = guide();
        let em = EmitterParams::new(w1, w2, 0.1, 0.1).unwrap();
        let w = Window::single_mode(&g);
        let pts = sweep(&em, &g, &InputKind::Single(1), &interior_grid(w.lo, w.hi, 2000), &SelfEnergyOptions::default());
        pts.iter().map(|p| p.result.as_ref().unwrap().total_reflectance).collect()
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(1.0, 2.0, 3), vec![1.0, 1.5, 2.0]);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert_eq!(interior_grid(0.0, 4.0, 3), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn extrema() {
        let v = [0.0, 1.0, 0.5, 0.5, 0.2, 0.9, 0.8];
        let e = local_extrema(&v);
        assert_eq!(e.len(), 3);
        assert_eq!((e[0].index, e[0].kind), (1, ExtremumKind::Max));
        assert_eq!((e[1].index, e[1].kind), (4, ExtremumKind::Min));
        assert_eq!((e[2].index, e[2].kind), (5, ExtremumKind::Max));
        let f = features(&v, 0.95, 0.3);
        assert_eq!((f.peaks, f.valleys, f.monotone_decreasing), (1, 1, false));
    }

    #[test]
    fn statuses() {
        let g = guide();
        let em = EmitterParams::new(1.3, 1.1, 0.1, 0.1).unwrap();
        let w2 = g.mode(2).unwrap().cutoff;
        let omegas = [0.5, w2 * (1.0 + 1e-10), 1.2, 1.9];
        let pts = sweep(&em, &g, &InputKind::Single(2), &omegas, &SelfEnergyOptions::default());
        let labels: Vec<_> = pts.iter().map(|p| p.status.label()).collect();
        assert_eq!(labels, ["cutoff", "guard", "closed", "ok"]);
        assert!(pts[3].omega > w2);
        let order: Vec<f64> = pts.iter().map(|p| p.omega).collect();
        assert_eq!(order, omegas);
    }

    #[test]
    fn sweep_matches_pointwise() {
        let g = guide();
        let em = EmitterParams::new(2.0, 1.8, 0.05, 0.05).unwrap();
        let omegas = linspace(1.8, 2.4, 17);
        let pts = sweep(&em, &g, &InputKind::Css, &omegas, &SelfEnergyOptions::default());
        for p in pts {
            let direct = scatter(&em, &g, &InputState::css(&g, p.omega).unwrap(), &SelfEnergyOptions::default()).unwrap();
            assert_eq!(p.result.unwrap(), direct);
        }
    }

    #[test]
    fn regime_spectra() {
        let i = features(&single_mode_spectrum(0.8, 0.8), 0.999, 1e-6);
        assert!(i.monotone_decreasing);
        let ii = features(&single_mode_spectrum(0.8, 1.2), 0.999, 1e-6);
        assert_eq!((ii.peaks, ii.valleys), (1, 0));
        let iii = features(&single_mode_spectrum(1.3, 1.1), 0.999, 1e-6);
        assert_eq!((iii.peaks, iii.valleys), (2, 1));
        let iv = features(&single_mode_spectrum(1.2, 1.2), 0.999, 1e-6);
        assert_eq!((iv.peaks, iv.valleys), (1, 0));
    }
}
