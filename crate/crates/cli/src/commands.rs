//! One function per subcommand. Each builds its tables in memory and hands
//! them back; writing happens in `main`.

use std::fmt::Write as _;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wgscatter::conditions::{eit_root_in, fano_roots, report, ConditionReport, Regime, Window};
use wgscatter::geometry::critical_size;
use wgscatter::oracle::{check, energy_grid};
use wgscatter::spectrum::{linspace, sweep, PointStatus, SweepPoint};
use wgscatter::{scatter, EmitterParams, InputKind, SelfEnergyOptions, Transition, WaveguideGeometry, C_LIGHT};

use crate::config::{Config, SecondAxis};
use crate::output::{fmt_g, Cell, Table};
use crate::CliError;

/// Flags that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub points: Option<usize>,
    pub red_shift: bool,
}

/// Main table plus any companion outputs, keyed by file-name suffix.
#[derive(Debug, Default)]
pub struct Outcome {
    pub table: Table,
    /// `(suffix, table)` written next to the main output as CSV.
    pub extra_tables: Vec<(&'static str, Table)>,
    /// JSON document written next to the main output.
    pub json_mirror: Option<String>,
    /// Human-readable summary for stdout.
    pub text: Option<String>,
    /// Set by `verify` when a check fails; the outputs are still written.
    pub oracle_failure: Option<String>,
}

fn header(table: &mut Table, cfg: &Config, command: &str, ov: &Overrides) -> Result<(), CliError> {
    let geom = cfg.geometry()?;
    table.meta("command", command);
    table.meta("units", format!("omega in PHz, lengths in um, c = {C_LIGHT} um*PHz"));
    table.meta("geometry", format!("a={} b={} aspect={}", fmt_g(geom.a()), fmt_g(geom.b()), fmt_g(geom.aspect())));
    if cfg.emitter.is_some() {
        let em = cfg.emitter()?;
        table.meta("emitter", emitter_label(&em));
    }
    if cfg.input.is_some() || cfg.sweep.is_some() {
        table.meta("input", cfg.input_kind()?.label());
    }
    let se = cfg.self_energy_options(ov.red_shift);
    table.meta(
        "options",
        format!(
            "red_shift={} red_shift_modes={} guard={} fano_grid={}",
            se.include_red_shift,
            se.red_shift_modes,
            fmt_g(se.guard),
            cfg.options.fano_grid
        ),
    );
    Ok(())
}

fn emitter_label(em: &EmitterParams) -> String {
    format!(
        "omega1={} omega2={} lambda1={} lambda2={} variant={}",
        fmt_g(em.omega(Transition::First)),
        fmt_g(em.omega(Transition::Second)),
        fmt_g(em.lambda(Transition::First)),
        fmt_g(em.lambda(Transition::Second)),
        em.variant().label()
    )
}

pub fn modes(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let geom = cfg.geometry()?;
    let count = ov.points.unwrap_or(cfg.cutoff_map.modes);
    // One extra mode so the last window has an upper edge.
    let all = geom.first_modes(count + 1);
    let mut table = Table::new(["j", "m", "n", "label", "cutoff", "window_lo", "window_hi", "degenerate_with"]);
    header(&mut table, cfg, "modes", ov)?;
    for (i, mode) in all.iter().take(count).enumerate() {
        let twin = all
            .iter()
            .enumerate()
            .find(|&(k, other)| k != i && other.cutoff == mode.cutoff)
            .map(|(_, other)| Cell::from(other.label()))
            .unwrap_or(Cell::Empty);
        table.push(vec![
            mode.rank.into(),
            mode.m.into(),
            mode.n.into(),
            mode.label().into(),
            mode.cutoff.into(),
            mode.cutoff.into(),
            all[i + 1].cutoff.into(),
            twin,
        ]);
    }
    Ok(Outcome { table, ..Outcome::default() })
}

fn omega_grid(cfg: &Config, ov: &Overrides) -> Result<Vec<f64>, CliError> {
    let s = cfg.sweep()?;
    let points = ov.points.unwrap_or(s.points);
    if points < 2 {
        return Err(CliError::Config(format!("--points must be at least 2 (got {points})")));
    }
    Ok(linspace(s.omega_min, s.omega_max, points))
}

fn status_label(p: &SweepPoint) -> &'static str {
    match &p.result {
        Some(r) if r.cutoff_resonance => "resonance",
        _ => p.status.label(),
    }
}

/// Keep rows except guard points, which are logged and dropped.
fn keep(p: &SweepPoint) -> bool {
    match &p.status {
        PointStatus::Guard => {
            warn!("skipping omega={} PHz: within the guard margin of a cutoff", fmt_g(p.omega));
            false
        }
        PointStatus::Failed(msg) => {
            warn!("omega={} PHz: {msg}", fmt_g(p.omega));
            true
        }
        _ => true,
    }
}

pub fn spectrum(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let geom = cfg.geometry()?;
    let em = cfg.emitter()?;
    let input = cfg.input_kind()?;
    let opts = cfg.self_energy_options(ov.red_shift);
    let omegas = omega_grid(cfg, ov)?;
    let points = sweep(&em, &geom, &input, &omegas, &opts);
    if points.iter().all(|p| p.result.is_none()) {
        return Err(nothing_evaluated(&em, &geom, &input, &omegas, &opts));
    }
    let j_max = points.iter().filter_map(|p| p.result.as_ref()).map(|r| r.reflectance.len()).max().unwrap_or(0);

    let mut columns: Vec<String> =
        ["omega_in", "status", "region", "j_max", "R", "T", "re_f", "im_f"].iter().map(|s| s.to_string()).collect();
    columns.extend((1..=j_max).map(|j| format!("R_{j}")));
    columns.extend((1..=j_max).map(|j| format!("T_{j}")));
    let mut table = Table::new(columns);
    header(&mut table, cfg, "spectrum", ov)?;

    for p in points.iter().filter(|p| keep(p)) {
        let region = geom.classify_region(p.omega)?;
        let open = geom.open_modes(p.omega).len();
        let mut row: Vec<Cell> = vec![p.omega.into(), status_label(p).into(), region.label().into(), open.into()];
        match &p.result {
            Some(r) => {
                row.push(r.total_reflectance.into());
                row.push(r.total_transmittance.into());
                match r.resolvent {
                    Some(f) => row.extend([f.re.into(), f.im.into()]),
                    None => row.extend([Cell::Empty, Cell::Empty]),
                }
                for values in [&r.reflectance, &r.transmittance] {
                    row.extend((0..j_max).map(|j| values.get(j).map_or(Cell::Empty, |&v| v.into())));
                }
            }
            None => row.extend(std::iter::repeat(Cell::Empty).take(4 + 2 * j_max)),
        }
        table.push(row);
    }
    Ok(Outcome { table, ..Outcome::default() })
}

/// The error behind a sweep in which no point could be evaluated.
fn nothing_evaluated(
    em: &EmitterParams,
    geom: &WaveguideGeometry,
    input: &InputKind,
    omegas: &[f64],
    opts: &SelfEnergyOptions,
) -> CliError {
    omegas
        .iter()
        .find_map(|&w| input.build(geom, w).and_then(|state| scatter(em, geom, &state, opts)).err())
        .map(CliError::from)
        .unwrap_or_else(|| CliError::Config("empty sweep".into()))
}

fn emitter_at(em: &EmitterParams, axis: SecondAxis, value: f64) -> Result<EmitterParams, CliError> {
    let updated = match axis {
        SecondAxis::Omega1 => em.with_omega(Transition::First, value),
        SecondAxis::Lambda2 => em.with_lambda(Transition::Second, value),
    };
    updated.map_err(|e| CliError::Config(format!("sweep.{}={}: {e}", axis.label(), fmt_g(value))))
}

/// Sign change of `values[i]` → `values[i + 1]`, or an exact zero at `i`.
fn crossing(values: &[Option<f64>], i: usize) -> bool {
    match (values[i], values.get(i + 1).copied().flatten()) {
        (Some(a), _) if a == 0.0 => true,
        (Some(a), Some(b)) => a * b < 0.0,
        _ => false,
    }
}

pub fn sweep2d(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let geom = cfg.geometry()?;
    let base = cfg.emitter()?;
    let input = cfg.input_kind()?;
    let opts = cfg.self_energy_options(ov.red_shift);
    let scan = cfg.scan_options();
    let s = cfg.sweep()?;
    let axis = s.second_axis.ok_or_else(|| CliError::Config("sweep2d needs sweep.second_axis".into()))?;
    let (lo, hi, n) = cfg.second_axis_range()?;
    let omegas = omega_grid(cfg, ov)?;
    let window = Window::new(s.omega_min, s.omega_max)?;

    let mut table = Table::new([axis.label(), "omega_in", "status", "R", "T", "re_f", "im_f", "eit_locus", "fano_locus"]);
    header(&mut table, cfg, "sweep2d", ov)?;
    table.meta("layout", format!("row-major, {} outer x {} inner (omega_in)", axis.label(), omegas.len()));
    table.meta("loci", "eit_locus/fano_locus = 1 where Im f/Re f changes sign before the next omega_in");
    let mut loci = Table::new([axis.label(), "kind", "omega"]);
    loci.meta("command", "sweep2d loci");
    loci.meta("units", "omega in PHz");

    for value in linspace(lo, hi, n) {
        let em = emitter_at(&base, axis, value)?;
        let points = sweep(&em, &geom, &input, &omegas, &opts);
        let f_values: Vec<Option<(f64, f64)>> = points
            .iter()
            .map(|p| p.result.as_ref().and_then(|r| r.resolvent).map(|f| (f.re, f.im)))
            .collect();
        let re: Vec<Option<f64>> = f_values.iter().map(|v| v.map(|x| x.0)).collect();
        let im: Vec<Option<f64>> = f_values.iter().map(|v| v.map(|x| x.1)).collect();
        for (i, p) in points.iter().enumerate() {
            if !keep(p) {
                continue;
            }
            let mut row: Vec<Cell> = vec![value.into(), p.omega.into(), status_label(p).into()];
            match &p.result {
                Some(r) => {
                    row.push(r.total_reflectance.into());
                    row.push(r.total_transmittance.into());
                    match r.resolvent {
                        Some(f) => row.extend([f.re.into(), f.im.into()]),
                        None => row.extend([Cell::Empty, Cell::Empty]),
                    }
                }
                None => row.extend(std::iter::repeat(Cell::Empty).take(4)),
            }
            row.push(crossing(&im, i).into());
            row.push(crossing(&re, i).into());
            table.push(row);
        }
        if let Some(root) = eit_root_in(&em, &geom, &window) {
            loci.push(vec![value.into(), "eit".into(), root.into()]);
        }
        for root in fano_roots(&em, &geom, &window, &opts, &scan)? {
            loci.push(vec![value.into(), "fano".into(), root.into()]);
        }
    }
    Ok(Outcome { table, extra_tables: vec![("_loci", loci)], ..Outcome::default() })
}

pub fn cutoff_map(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let geom = cfg.geometry()?;
    let m = &cfg.cutoff_map;
    let aspect = geom.aspect();
    let modes = geom.first_modes(m.modes);
    let points = ov.points.unwrap_or(m.points);
    if points < 2 {
        return Err(CliError::Config(format!("--points must be at least 2 (got {points})")));
    }

    let mut columns = vec!["b".to_string()];
    columns.extend(modes.iter().map(|md| format!("omega_{}", md.label())));
    if m.reference_omega.is_some() {
        columns.extend(["region".to_string(), "j_max".to_string()]);
    }
    let mut table = Table::new(columns);
    header(&mut table, cfg, "cutoff-map", ov)?;
    let mut critical = Table::new(["j", "label", "critical_b"]);
    critical.meta("command", "cutoff-map critical sizes");
    critical.meta("units", "lengths in um");

    if let Some(w) = m.reference_omega {
        table.meta("reference_omega", fmt_g(w));
        critical.meta("reference_omega", fmt_g(w));
        for md in &modes {
            let b = critical_size(w, aspect, md.m as i64, md.n as i64)?;
            table.meta(&format!("critical_b_{}", md.label()), fmt_g(b));
            critical.push(vec![md.rank.into(), md.label().into(), b.into()]);
        }
    }
    for b in linspace(m.b_min, m.b_max, points) {
        let g = WaveguideGeometry::from_aspect(aspect, b)?;
        let mut row: Vec<Cell> = vec![b.into()];
        for md in &modes {
            row.push(g.cutoff(md.m as i64, md.n as i64)?.into());
        }
        if let Some(w) = m.reference_omega {
            row.push(g.classify_region(w)?.label().into());
            row.push(g.open_modes(w).len().into());
        }
        table.push(row);
    }
    let extra_tables = if m.reference_omega.is_some() { vec![("_critical", critical)] } else { Vec::new() };
    Ok(Outcome { table, extra_tables, ..Outcome::default() })
}

fn conditions_window(cfg: &Config, geom: &WaveguideGeometry) -> Result<Window, CliError> {
    Ok(match (cfg.conditions.window, cfg.conditions.open_modes) {
        (Some([lo, hi]), _) => Window::new(lo, hi)?,
        (None, Some(j)) => Window::open(geom, j)?,
        (None, None) => Window::single_mode(geom),
    })
}

fn report_text(rep: &ConditionReport) -> String {
    let mut s = String::new();
    let regime = match rep.regime {
        Regime::Unclassified => "unclassified (outside the four single-mode regimes)".to_string(),
        r => r.label().to_string(),
    };
    let _ = writeln!(s, "regime: {regime}");
    let _ = writeln!(s, "variant: {}", rep.variant.label());
    let _ = writeln!(s, "window: ({}, {}) PHz", fmt_g(rep.window.lo), fmt_g(rep.window.hi));
    if rep.eit_roots.is_empty() {
        let _ = writeln!(s, "EIT root: none");
    }
    for e in &rep.eit_roots {
        let _ = writeln!(
            s,
            "EIT root: {} PHz  |Im f| = {}  R(css) = {}",
            fmt_g(e.omega),
            fmt_g(e.im_f_residual),
            fmt_g(e.reflectance)
        );
    }
    if rep.fano_roots.is_empty() {
        let _ = writeln!(s, "Fano roots: none");
    }
    for f in &rep.fano_roots {
        let near = match f.nearest {
            Transition::First => "omega1",
            Transition::Second => "omega2",
        };
        let _ = writeln!(
            s,
            "Fano root: {} PHz  near {near}, blueshift {}  |Re f| = {}  R(css) = {}",
            fmt_g(f.omega),
            fmt_g(f.blueshift),
            fmt_g(f.re_f_residual),
            fmt_g(f.closed_form_reflectance)
        );
        if f.peak_bounds.len() > 1 {
            let bounds: Vec<String> = f.peak_bounds.iter().map(|b| fmt_g(*b)).collect();
            let _ = writeln!(s, "  single-mode input peaks Lambda_n/Lambda: {}", bounds.join(", "));
        }
    }
    s
}

pub fn conditions(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let geom = cfg.geometry()?;
    let em = cfg.emitter()?;
    let opts = cfg.self_energy_options(ov.red_shift);
    let mut scan = cfg.scan_options();
    if let Some(p) = ov.points {
        scan.grid = p;
    }
    let window = conditions_window(cfg, &geom)?;
    let rep = report(&em, &geom, &window, &opts, &scan)?;
    if rep.regime == Regime::Unclassified {
        warn!("regime unclassified: a transition lies at or above the second cutoff, or only one transition couples");
    }

    let j_max = rep.fano_roots.iter().map(|f| f.peak_bounds.len()).max().unwrap_or(0);
    let mut columns: Vec<String> = ["kind", "omega", "nearest", "blueshift", "residual", "R_css"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    columns.extend((1..=j_max).map(|n| format!("R_single_{n}")));
    columns.extend((1..=j_max).map(|n| format!("bound_{n}")));
    let mut table = Table::new(columns);
    header(&mut table, cfg, "conditions", ov)?;
    table.meta("regime", rep.regime.label());
    table.meta("window", format!("{} {}", fmt_g(window.lo), fmt_g(window.hi)));

    for e in &rep.eit_roots {
        let mut row: Vec<Cell> =
            vec!["eit".into(), e.omega.into(), Cell::Empty, Cell::Empty, e.im_f_residual.into(), e.reflectance.into()];
        row.extend(std::iter::repeat(Cell::Empty).take(2 * j_max));
        table.push(row);
    }
    for f in &rep.fano_roots {
        let near = match f.nearest {
            Transition::First => "omega1",
            Transition::Second => "omega2",
        };
        let mut row: Vec<Cell> = vec![
            "fano".into(),
            f.omega.into(),
            near.into(),
            f.blueshift.into(),
            f.re_f_residual.into(),
            f.closed_form_reflectance.into(),
        ];
        for values in [&f.single_mode_reflectance, &f.peak_bounds] {
            row.extend((0..j_max).map(|j| values.get(j).map_or(Cell::Empty, |&v| v.into())));
        }
        table.push(row);
    }

    let mirror = serde_json::json!({
        "regime": rep.regime.label(),
        "emitter": emitter_label(&em),
        "report": rep,
    });
    let mut json = serde_json::to_string_pretty(&mirror).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    Ok(Outcome { table, json_mirror: Some(json), text: Some(report_text(&rep)), ..Outcome::default() })
}

/// Analytic self-energy against the quadrature oracle for seeded random
/// emitters over the first three modes.
pub fn verify(cfg: &Config, ov: &Overrides) -> Result<Outcome, CliError> {
    let geom = cfg.geometry()?;
    let v = &cfg.verify;
    let points = ov.points.unwrap_or(v.points);
    let grid = energy_grid(&geom, points);
    let modes = geom.first_modes(3);
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    let draws: Vec<EmitterParams> = (0..v.draws)
        .map(|_| {
            let w1 = rng.gen_range(0.5..3.0);
            let w2 = rng.gen_range(0.5..3.0);
            let l1 = rng.gen_range(0.01..0.3);
            let l2 = rng.gen_range(0.01..0.3);
            EmitterParams::new(w1, w2, l1, l2)
        })
        .collect::<Result<_, _>>()?;

    let mut table = Table::new([
        "draw", "omega1", "omega2", "lambda1", "lambda2", "mode", "transition", "E",
        "delta_analytic", "gamma_analytic", "delta_numeric", "gamma_numeric", "rel_err",
    ]);
    header(&mut table, cfg, "verify", ov)?;
    table.meta("verify", format!("draws={} points={} seed={} tolerance={}", v.draws, points, v.seed, fmt_g(v.tolerance)));

    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (d, em) in draws.iter().enumerate() {
        let mut jobs: Vec<(usize, Transition, f64)> = Vec::new();
        for j in 0..modes.len() {
            for tr in Transition::BOTH {
                jobs.extend(grid.iter().map(|&e| (j, tr, e)));
            }
        }
        let results: Vec<_> = jobs.par_iter().map(|&(j, tr, e)| check(em, tr, &modes[j], e)).collect();
        for ((j, tr, e), res) in jobs.iter().zip(results) {
            let tr_label = if *tr == Transition::First { "1" } else { "2" };
            let mut row: Vec<Cell> = vec![
                d.into(),
                em.omega(Transition::First).into(),
                em.omega(Transition::Second).into(),
                em.lambda(Transition::First).into(),
                em.lambda(Transition::Second).into(),
                modes[*j].label().into(),
                tr_label.into(),
                (*e).into(),
            ];
            match res {
                Ok(c) => {
                    worst = worst.max(c.rel_err);
                    if c.rel_err >= v.tolerance {
                        failures.push(format!("draw {d} {} transition {tr_label} E={}: rel_err {}", modes[*j].label(), fmt_g(*e), fmt_g(c.rel_err)));
                    }
                    row.extend([c.analytic.re, -c.analytic.im, c.numeric.re, -c.numeric.im, c.rel_err].map(Cell::from));
                }
                Err(err) => {
                    failures.push(format!("draw {d} {} transition {tr_label} E={}: {err}", modes[*j].label(), fmt_g(*e)));
                    row.extend(std::iter::repeat(Cell::Empty).take(5));
                }
            }
            table.push(row);
        }
    }
    info!("oracle comparison: {} evaluations, worst relative error {:e}", table.rows.len(), worst);
    let text = format!(
        "oracle: {} evaluations, worst relative error {}, {} above tolerance {}\n",
        table.rows.len(),
        fmt_g(worst),
        failures.len(),
        fmt_g(v.tolerance)
    );
    let oracle_failure = (!failures.is_empty()).then(|| failures.join("; "));
    Ok(Outcome { table, text: Some(text), oracle_failure, ..Outcome::default() })
}
