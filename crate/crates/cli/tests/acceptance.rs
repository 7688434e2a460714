//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference guide throughout: b = 1.2 µm, a = 1.5b.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgscatter::conditions::{eit_root, eit_root_in, fano_roots, Window};
use wgscatter::oracle::{check, energy_grid};
use wgscatter::scattering::{closed_form_reflectance, single_mode_input_laws, ClosedForm};
use wgscatter::selfenergy::f_eval;
use wgscatter::spectrum::{features, interior_grid, sweep};
use wgscatter::{
    scatter, Complex64, EmitterParams, InputKind, InputState, ScanOptions, SelfEnergyOptions, Transition,
    WaveguideGeometry,
};

type Outcome = Result<String, String>;

fn guide() -> WaveguideGeometry {
    WaveguideGeometry::from_aspect(1.5, 1.2).unwrap()
}

fn em(w1: f64, w2: f64, l1: f64, l2: f64) -> EmitterParams {
    EmitterParams::new(w1, w2, l1, l2).unwrap()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn cutoffs() -> Outcome {
    let g = guide();
    let modes = g.first_modes(4);
    let labels: Vec<String> = modes.iter().map(|m| m.label()).collect();
    ensure(labels == ["TM11", "TM31", "TM13", "TM51"], format!("order {labels:?}"))?;
    let (w1, w2) = (modes[0].cutoff, modes[1].cutoff);
    ensure((w1 / 0.94 - 1.0).abs() < 0.01, format!("omega_1 = {w1}"))?;
    ensure((w2 / 1.75 - 1.0).abs() < 0.01, format!("omega_2 = {w2}"))?;
    Ok(format!("omega_1 = {w1:.6}, omega_2 = {w2:.6}, order {}", labels.join(" ")))
}

fn oracle() -> Outcome {
    let g = guide();
    let grid = energy_grid(&g, 50);
    let modes = g.first_modes(3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..10 {
        let e = em(rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0), rng.gen_range(0.01..0.3), rng.gen_range(0.01..0.3));
        for mode in &modes {
            for tr in Transition::BOTH {
                for &energy in &grid {
                    let c = check(&e, tr, mode, energy).map_err(|err| err.to_string())?;
                    worst = worst.max(c.rel_err);
                    count += 1;
                }
            }
        }
    }
    ensure(worst < 1e-5, format!("worst relative error {worst:e}"))?;
    Ok(format!("{count} comparisons, worst relative error {worst:.2e}"))
}

fn unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = SelfEnergyOptions::default();
    let (mut evaluated, mut skipped) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    while evaluated < 10_000 {
        let g = WaveguideGeometry::from_aspect(rng.gen_range(1.0..2.5), rng.gen_range(0.8..1.6)).unwrap();
        let e = em(rng.gen_range(0.5..3.5), rng.gen_range(0.5..3.5), rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3));
        // Random open window, random point inside it.
        let j = rng.gen_range(1..=5);
        let window = Window::open(&g, j).unwrap();
        let omega = rng.gen_range(window.lo..window.hi);
        let input = match rng.gen_range(0..4) {
            0 => InputState::single_mode(&g, omega, rng.gen_range(1..=j)),
            1 => InputState::css(&g, omega),
            2 if j >= 2 => {
                let free: Vec<Complex64> =
                    (0..j - 1).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                InputState::dark(&g, omega, &free)
            }
            _ => {
                let mut amps: Vec<Complex64> =
                    (0..j).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                amps.iter_mut().for_each(|c| *c /= norm);
                InputState::custom(&g, omega, amps)
            }
        };
        let res = input.and_then(|s| scatter(&e, &g, &s, &opts));
        match res {
            Ok(r) => {
                let err = (r.total_reflectance + r.total_transmittance - 1.0).abs();
                worst = worst.max(err);
                ensure(r.total_reflectance >= 0.0 && r.total_reflectance <= 1.0 + 1e-12, format!("R = {}", r.total_reflectance))?;
                evaluated += 1;
            }
            Err(err) if err.is_domain() => skipped += 1,
            Err(err) => return Err(err.to_string()),
        }
    }
    ensure(worst < 1e-12, format!("worst |R + T - 1| = {worst:e}"))?;
    Ok(format!("{evaluated} configurations, worst |R + T - 1| = {worst:.2e}, {skipped} guard draws redrawn"))
}

fn single_mode_r(e: &EmitterParams) -> Vec<f64> {
    let g = guide();
    let w = Window::single_mode(&g);
    sweep(e, &g, &InputKind::Single(1), &interior_grid(w.lo, w.hi, 2000), &SelfEnergyOptions::default())
        .into_iter()
        .map(|p| p.result.map(|r| r.total_reflectance).unwrap_or(f64::NAN))
        .collect()
}

fn regimes() -> Outcome {
    let i = features(&single_mode_r(&em(0.8, 0.8, 0.1, 0.1)), 0.999, 1e-6);
    ensure(i.monotone_decreasing, format!("regime i not monotone: {i:?}"))?;
    let ii = features(&single_mode_r(&em(0.8, 1.2, 0.1, 0.1)), 0.999, 1e-6);
    ensure(ii.peaks == 1, format!("regime ii: {ii:?}"))?;
    let iii = features(&single_mode_r(&em(1.3, 1.1, 0.1, 0.1)), 0.999, 1e-6);
    ensure(iii.peaks == 2 && iii.valleys == 1, format!("regime iii: {iii:?}"))?;
    let iv = features(&single_mode_r(&em(1.2, 1.2, 0.1, 0.1)), 0.999, 1e-6);
    ensure(iv.peaks == 1 && iv.valleys == 0, format!("regime iv: {iv:?}"))?;
    Ok(format!(
        "i monotone; ii {} peak; iii {} peaks + {} valley; iv {} peak + {} valleys",
        ii.peaks, iii.peaks, iii.valleys, iv.peaks, iv.valleys
    ))
}

fn residuals() -> Outcome {
    let g = guide();
    let opts = SelfEnergyOptions::default();
    let scan = ScanOptions::default();
    let mut worst_im: f64 = 0.0;
    let mut worst_r: f64 = 0.0;
    let mut worst_fano: f64 = 0.0;
    let mut worst_law: f64 = 0.0;
    let cases = [
        (em(1.3, 1.1, 0.1, 0.1), Window::single_mode(&g)),
        (em(1.2, 1.3, 0.05, 0.15), Window::single_mode(&g)),
        (em(2.0, 1.8, 0.05, 0.05), Window::open(&g, 2).unwrap()),
    ];
    for (e, window) in &cases {
        let root = eit_root_in(e, &g, window).ok_or("no EIT root in window")?;
        let f = f_eval(e, &g, root, &opts).map_err(|x| x.to_string())?.f;
        worst_im = worst_im.max(f.im.abs());
        let mut inputs = vec![InputState::css(&g, root).unwrap()];
        if g.open_modes(root).len() == 1 {
            inputs.push(InputState::single_mode(&g, root, 1).unwrap());
        }
        for input in inputs {
            let r = scatter(e, &g, &input, &opts).map_err(|x| x.to_string())?;
            worst_r = worst_r.max(r.total_reflectance);
        }
        let roots = fano_roots(e, &g, window, &opts, &scan).map_err(|x| x.to_string())?;
        ensure(!roots.is_empty(), "no Fano root")?;
        for root in roots {
            let closed = closed_form_reflectance(e, &g, root, ClosedForm::Css, &opts).map_err(|x| x.to_string())?;
            worst_fano = worst_fano.max((closed - 1.0).abs());
            let j_max = g.open_modes(root).len();
            if j_max == 1 {
                let single = closed_form_reflectance(e, &g, root, ClosedForm::SingleModeWindow, &opts).unwrap();
                worst_fano = worst_fano.max((single - 1.0).abs());
            }
            for n in 1..=j_max {
                let laws = single_mode_input_laws(e, &g, root, n, &opts).unwrap();
                let r = scatter(e, &g, &InputState::single_mode(&g, root, n).unwrap(), &opts).unwrap();
                worst_law = worst_law.max((r.total_reflectance - laws.peak_bound()).abs());
            }
        }
    }
    ensure(worst_im < 1e-10, format!("|Im f| at EIT root = {worst_im:e}"))?;
    ensure(worst_r < 1e-10, format!("R at EIT root = {worst_r:e}"))?;
    ensure(worst_fano < 1e-9, format!("|R - 1| at Fano root = {worst_fano:e}"))?;
    ensure(worst_law < 1e-9, format!("|R - Lambda_n/Lambda| = {worst_law:e}"))?;
    Ok(format!(
        "|Im f| {worst_im:.1e}, R(EIT) {worst_r:.1e}, |R-1|(Fano) {worst_fano:.1e}, |R-Lambda_n/Lambda| {worst_law:.1e}"
    ))
}

fn channel_laws() -> Outcome {
    let g = guide();
    let e = em(2.0, 1.8, 0.05, 0.05);
    let opts = SelfEnergyOptions::default();
    let w = Window::open(&g, 2).unwrap();
    let grid = interior_grid(w.lo, w.hi, 2000);

    let tm11 = sweep(&e, &g, &InputKind::Single(1), &grid, &opts);
    let mut worst_side: f64 = 0.0;
    for p in &tm11 {
        let r = p.result.as_ref().ok_or("TM11 sweep point failed")?;
        worst_side = worst_side.max((r.transmittance[1] - r.reflectance[1]).abs());
    }
    ensure(worst_side <= 1e-15, format!("|T_2 - R_2| = {worst_side:e}"))?;

    let tm31 = sweep(&e, &g, &InputKind::Single(2), &grid, &opts);
    let peak = tm31
        .iter()
        .filter_map(|p| p.result.as_ref())
        .max_by(|a, b| a.total_reflectance.total_cmp(&b.total_reflectance))
        .ok_or("empty TM31 sweep")?;
    ensure(peak.reflectance[1] > peak.reflectance[0], "R_2 <= R_1 at the TM31 peak")?;

    let mut worst_css: f64 = 0.0;
    let mut worst_dark: f64 = 0.0;
    for &omega in &grid {
        let css = scatter(&e, &g, &InputState::css(&g, omega).unwrap(), &opts).map_err(|x| x.to_string())?;
        let closed = closed_form_reflectance(&e, &g, omega, ClosedForm::Css, &opts).unwrap();
        worst_css = worst_css.max((css.total_reflectance - closed).abs());
        let dark = scatter(&e, &g, &InputState::dark(&g, omega, &[]).unwrap(), &opts).map_err(|x| x.to_string())?;
        worst_dark = worst_dark.max(dark.total_reflectance);
    }
    ensure(worst_css < 1e-12, format!("CSS vs closed form {worst_css:e}"))?;
    ensure(worst_dark < 1e-12, format!("dark R = {worst_dark:e}"))?;
    Ok(format!(
        "|T_2-R_2| {worst_side:.1e}; TM31 peak R_2 {:.4} > R_1 {:.4}; CSS {worst_css:.1e}; dark {worst_dark:.1e}",
        peak.reflectance[1], peak.reflectance[0]
    ))
}

fn reductions() -> Outcome {
    let deg = single_mode_r(&em(1.2, 1.2, 0.1, 0.1));
    let split = single_mode_r(&em(1.2, 1.2 * (1.0 + 1e-6), 0.1, 0.1));
    let worst = deg.iter().zip(&split).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-4, format!("degenerate vs split {worst:e}"))?;

    let two_level = em(1.3, 1.1, 0.1, 0.0);
    ensure(eit_root(&two_level).is_none(), "two-level emitter has an EIT root")?;
    let r = single_mode_r(&two_level);
    let f = features(&r, 0.999, 1e-6);
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(f.valleys == 0 && min > 1e-6, format!("two-level zero: min R = {min:e}"))?;
    ensure(f.peaks <= 1, format!("two-level peaks: {}", f.peaks))?;
    Ok(format!("max |dR| = {worst:.1e}; two-level: {} unit peak, min R = {min:.2e}", f.peaks))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_wgscatter");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "[geometry]\nb = 1.2\naspect = 1.5\n\n[emitter]\nomega1 = 1.3\nomega2 = 1.1\nlambda1 = 0.1\nlambda2 = 0.1\n\n\
         [sweep]\nomega_min = 0.9\nomega_max = 2.5\npoints = 500\nsecond_axis = \"omega1\"\nsecond_min = 1.0\nsecond_max = 1.7\nsecond_points = 8\n\n\
         [input]\nkind = \"css\"\n\n[cutoff_map]\nreference_omega = 0.943\n\n[verify]\ndraws = 2\npoints = 10\n",
    )
    .map_err(|e| e.to_string())?;
    let run = |cmd: &str, out: &Path| -> Result<(), String> {
        let status = Command::new(bin)
            .args([cmd, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), format!("{cmd} exited with {:?}", status.status.code()))
    };
    let commands = ["modes", "spectrum", "sweep2d", "cutoff-map", "conditions", "verify"];
    let mut files = 0;
    for cmd in commands {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        run(cmd, &a.join(format!("{cmd}.csv")))?;
        run(cmd, &b.join(format!("{cmd}.csv")))?;
        for entry in std::fs::read_dir(&a).map_err(|e| e.to_string())? {
            let name = entry.map_err(|e| e.to_string())?.file_name();
            let x = std::fs::read(a.join(&name)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.join(&name)).map_err(|e| e.to_string())?;
            ensure(x == y, format!("{} differs between runs", name.to_string_lossy()))?;
            files += 1;
        }
        std::fs::remove_dir_all(&a).ok();
        std::fs::remove_dir_all(&b).ok();
    }
    Ok(format!("{} commands, {files} files byte-identical", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("cutoff reproduction", cutoffs),
        ("oracle equivalence", oracle),
        ("unitarity", unitarity),
        ("regime reproduction", regimes),
        ("condition residuals", residuals),
        ("multi-mode channel laws", channel_laws),
        ("degenerate/two-level reductions", reductions),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
