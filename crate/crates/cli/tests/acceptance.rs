//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion; the
//! target itself only fails if the harness cannot run.

#![allow(clippy::approx_constant)]

use std::time::{Duration, Instant};

use hysterobeam::beam_fe::{
    assemble, build_element_coupling, build_element_matrices, modal_analysis, shortest_period,
    BeamGeometry,
};
use hysterobeam::forcing::Unforced;
use hysterobeam::initial::InitialShape;
use hysterobeam::integrator::{mechanical_energy, simulate, Problem};
use hysterobeam::rng::SeededRng;
use hysterobeam::rom::{
    generate_snapshots, greedy_select, greedy_select_in_place, modal_coupling, project_modal,
    simulate_rom, solve_projection_dense, GreedyOptions, ProjectionAccumulator, Rom,
    SnapshotConfig,
};
use hysterobeam::{BeamSystem, BoucWenParams, Record, SimState};
use hysterobeam_cli::commands::{self, Context};
use hysterobeam_cli::presets::load_embedded;
use nalgebra::DMatrix;

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

fn scratch() -> Result<tempfile::TempDir, String> {
    tempfile::tempdir().map_err(err)
}

// ------------------------------------------------------------ 1

fn modal_frequencies() -> Outcome {
    let dir = scratch()?;
    let start = Instant::now();
    let r = commands::modes(
        &load_embedded("fig3").map_err(err)?,
        &Context::new(dir.path(), 1),
    )
    .map_err(err)?;
    let elapsed = start.elapsed();
    let want = [16.3, 102.2, 286.2, 561.3, 929.3];
    let ok = r.frequencies.len() == 5
        && r.frequencies
            .iter()
            .zip(want)
            .all(|(f, w)| (f / w - 1.0).abs() <= 5e-3)
        && elapsed < Duration::from_secs(1);
    let f: Vec<String> = r.frequencies.iter().map(|f| format!("{f:.2}")).collect();
    Ok((ok, format!("f = [{}] Hz, {}", f.join(", "), secs(elapsed))))
}

// ------------------------------------------------------------ 2

fn equivalent_damping() -> Outcome {
    let dir = scratch()?;
    let start = Instant::now();
    let r = commands::simulate_cmd(
        &load_embedded("fig3").map_err(err)?,
        &Context::new(dir.path(), 1),
    )
    .map_err(err)?;
    let elapsed = start.elapsed();
    let zeta = r.zeta.ok_or("no damping estimate")?;
    let ok = within(zeta, 0.016, 0.004) && elapsed < Duration::from_secs(60);
    Ok((
        ok,
        format!(
            "zeta_equiv = {zeta:.4} (target 0.016 +- 0.004), {}",
            secs(elapsed)
        ),
    ))
}

// ------------------------------------------------------------ 3

fn asymptotic_decay() -> Outcome {
    let dir = scratch()?;
    let ctx = Context::new(dir.path(), 1);
    let a = commands::simulate_cmd(&load_embedded("fig4").map_err(err)?, &ctx).map_err(err)?;
    let b = commands::simulate_cmd(&load_embedded("fig4_nh15").map_err(err)?, &ctx).map_err(err)?;
    let sa = a.decay_slope.ok_or("no slope")?;
    let sb = b.decay_slope.ok_or("no slope")?;
    let ok = within(sa, -2.0, 0.2) && within(sb, -2.0 / 3.0, 0.15);
    Ok((
        ok,
        format!("n_h = 0.5: {sa:.3} (-2 +- 0.2); n_h = 1.5: {sb:.3} (-0.667 +- 0.15)"),
    ))
}

// ------------------------------------------------------------ 4

fn large_step_stability() -> Outcome {
    let dir = scratch()?;
    let cfg = load_embedded("fig5").map_err(err)?;
    let start = Instant::now();
    let r = commands::simulate_cmd(&cfg, &Context::new(dir.path(), 1)).map_err(err)?;
    let elapsed = start.elapsed();
    let t_min = shortest_period(&cfg.model().map_err(err)?).map_err(err)?;
    let ratio = cfg.simulation.h / t_min;
    let tip = &r.trajectory.tip;
    let quarter = tip.len() / 4;
    let peak = |s: &[f64]| s.iter().fold(0.0f64, |a, y| a.max(y.abs()));
    let (early, late) = (peak(&tip[..quarter]), peak(&tip[3 * quarter..]));
    let bounded = tip.iter().all(|y| y.is_finite()) && late < early;
    let (peaks, df) = r.spectrum.clone().ok_or("no spectrum")?;
    let offsets: Vec<f64> = peaks
        .iter()
        .zip(&r.modal_frequencies)
        .map(|(p, f)| (p - f) / df)
        .collect();
    let spectral = peaks.len() == 3 && offsets.iter().all(|o| o.abs() <= 1.0);
    let ok = ratio > 275.0 && bounded && spectral && elapsed < Duration::from_secs(120);
    let p: Vec<String> = peaks.iter().map(|f| format!("{f:.2}")).collect();
    let o: Vec<String> = offsets.iter().map(|o| format!("{o:+.2}")).collect();
    Ok((
        ok,
        format!(
            "h/T_min = {ratio:.0}, max|y| {early:.4} -> {late:.4}, {} peaks [{}] Hz, offsets [{}] bins (limit 1), {}",
            peaks.len(),
            p.join(", "),
            o.join(", "),
            secs(elapsed)
        ),
    ))
}

// ------------------------------------------------------------ 5

fn accuracy_vs_oracle() -> Outcome {
    let dir = scratch()?;
    let start = Instant::now();
    let r = commands::simulate_cmd(
        &load_embedded("fig6").map_err(err)?,
        &Context::new(dir.path(), 1),
    )
    .map_err(err)?;
    let elapsed = start.elapsed();
    let e = r.reference_error.ok_or("no reference comparison")?;
    Ok((
        e < 1e-3 && elapsed < Duration::from_secs(120),
        format!("relative RMS = {e:.3e} (limit 1e-3), {}", secs(elapsed)),
    ))
}

// ------------------------------------------------------------ 6

fn convergence_orders() -> Outcome {
    let dir = scratch()?;
    let ctx = Context::new(dir.path(), 1);
    let slope = |name: &str| -> Result<(f64, f64), String> {
        let r = commands::converge(&load_embedded(name).map_err(err)?, &ctx).map_err(err)?;
        Ok((r.study.slope_rms, r.study.slope_tau))
    };
    let start = Instant::now();
    let (a, _) = slope("fig7a")?;
    let (b, _) = slope("fig7b")?;
    let (c, c_tau) = slope("fig8")?;
    let (d, _) = slope("fig11")?;
    let checks = [within(a, 2.0, 0.3), b >= 1.0, c >= 1.0, d >= 1.7];
    Ok((
        checks.iter().all(|&x| x),
        format!(
            "gamma_h 300: {a:.3} (2 +- 0.3) {}; gamma_h 3000 n_e 10: {b:.3} (>= 1) {}; gamma_h 3000 n_e 30: {c:.3} (>= 1, e_tau {c_tau:.3}) {}; n_h 1.5: {d:.3} (>= 1.7) {}; {}",
            tag(checks[0]),
            tag(checks[1]),
            tag(checks[2]),
            tag(checks[3]),
            secs(start.elapsed())
        ),
    ))
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "out of band"
    }
}

// ------------------------------------------------------------ 7

fn rom_pipeline() -> Outcome {
    let dir = scratch()?;
    let ctx = Context::new(
        dir.path(),
        std::thread::available_parallelism().map_or(1, |n| n.get()),
    );
    let cfg = load_embedded("fig10").map_err(err)?;
    let start = Instant::now();
    let build = commands::rom_build(&cfg, &ctx).map_err(err)?;
    let built = start.elapsed();
    let start = Instant::now();
    let eval = commands::rom_eval(&cfg, &ctx).map_err(err)?;
    let evaluated = start.elapsed();

    let baseline_ok = within(eval.baseline, 0.006, 0.0006);
    let errs: Vec<(usize, f64)> = eval.rows.iter().copied().filter(|(m, _)| *m > 0).collect();
    let worst_rise = errs
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let trend_ok =
        worst_rise <= 0.1 * eval.baseline && errs.last().map(|l| l.1) < errs.first().map(|f| f.1);
    let large_m: Vec<f64> = errs
        .iter()
        .filter(|(m, _)| *m > 100)
        .map(|(_, e)| *e)
        .collect();
    let accuracy_ok = !large_m.is_empty() && large_m.iter().all(|&e| e <= 6e-5);
    let rows: Vec<String> = errs.iter().map(|(m, e)| format!("{m}:{e:.2e}")).collect();
    Ok((
        baseline_ok && trend_ok && accuracy_ok,
        format!(
            "baseline {:.5} (0.006 +- 10%) {}; trend {} (largest rise {:.1e}); m > 100 below 6e-5 {}; E_rms [{}]; {} points selected; build {}, eval {}",
            eval.baseline,
            tag(baseline_ok),
            tag(trend_ok),
            worst_rise.max(0.0),
            tag(accuracy_ok),
            rows.join(" "),
            build.selection.indices.len(),
            secs(built),
            secs(evaluated)
        ),
    ))
}

// ------------------------------------------------------------ 8

/// Adaptive Simpson quadrature with Richardson correction.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 18)
}

fn hermite(h: f64, x: f64) -> [f64; 4] {
    let s = x / h;
    [
        1.0 - 3.0 * s * s + 2.0 * s.powi(3),
        h * (s - 2.0 * s * s + s.powi(3)),
        3.0 * s * s - 2.0 * s.powi(3),
        h * (-s * s + s.powi(3)),
    ]
}

fn hermite_xx(h: f64, x: f64) -> [f64; 4] {
    let s = x / h;
    [
        (-6.0 + 12.0 * s) / (h * h),
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / (h * h),
        (-2.0 + 6.0 * s) / h,
    ]
}

/// Largest scaled deviation of element and coupling matrices from direct quadrature.
fn quadrature_deviation() -> Result<f64, String> {
    let mut worst = 0.0f64;
    for (l, ei, rho, ne) in [(1.0, 2666.7, 3.14, 10), (2.5, 7.0, 0.3, 3)] {
        let g = BeamGeometry::new(l, ei, rho, ne, 3).map_err(err)?;
        let h = g.element_length();
        let (me, ke) = build_element_matrices(&g);
        for i in 0..4 {
            for j in 0..4 {
                let m = simpson(
                    &|x| rho * hermite(h, x)[i] * hermite(h, x)[j],
                    0.0,
                    h,
                    1e-15 * me.amax(),
                );
                let k = simpson(
                    &|x| ei * hermite_xx(h, x)[i] * hermite_xx(h, x)[j],
                    0.0,
                    h,
                    1e-15 * ke.amax(),
                );
                worst = worst.max((me[(i, j)] - m).abs() / me.amax());
                worst = worst.max((ke[(i, j)] - k).abs() / ke.amax());
            }
        }
    }
    let gamma_h = 3000.0;
    for ng in 1..=10 {
        let g = BeamGeometry::new(1.0, 2666.7, 3.14, 7, ng).map_err(err)?;
        let h = g.element_length();
        let block = build_element_coupling(&g, gamma_h).map_err(err)?;
        let nodes = &block.local_x;
        for p in 0..ng {
            let lagrange = |x: f64| -> f64 {
                (0..ng)
                    .filter(|&q| q != p)
                    .map(|q| (x - nodes[q]) / (nodes[p] - nodes[q]))
                    .product()
            };
            for i in 0..4 {
                let tol = 1e-15 * block.weights.amax();
                let direct = simpson(
                    &|x| gamma_h * lagrange(x) * hermite_xx(h, x)[i],
                    0.0,
                    h,
                    tol,
                );
                worst = worst.max((block.weights[(i, p)] - direct).abs() / block.weights.amax());
            }
        }
    }
    Ok(worst)
}

/// Random small matrices: greedy picks equal brute-force maximisers of the
/// projected row norms, and the residual never grows.
fn greedy_brute_force() -> Result<bool, String> {
    let mut rng = SeededRng::new(2024);
    for _ in 0..50 {
        let (rows, cols) = (8, 20);
        let z = DMatrix::from_fn(rows, cols, |_, _| rng.symmetric());
        let row_major: Vec<f64> = (0..rows)
            .flat_map(|i| z.row(i).iter().copied().collect::<Vec<_>>())
            .collect();
        let sel = greedy_select(&row_major, cols, &GreedyOptions::fixed(rows)).map_err(err)?;
        if sel.indices.len() != rows {
            return Ok(false);
        }
        for (k, &pick) in sel.indices.iter().enumerate() {
            let basis: Vec<usize> = sel.indices[..k].to_vec();
            let projected = |i: usize| -> f64 {
                let mut r = z.row(i).transpose();
                if !basis.is_empty() {
                    let s = DMatrix::from_fn(cols, basis.len(), |c, j| z[(basis[j], c)]);
                    let q = s.qr().q();
                    r -= &q * (q.transpose() * &r);
                }
                r.norm()
            };
            let best = (0..rows)
                .filter(|i| !basis.contains(i))
                .map(projected)
                .fold(0.0f64, f64::max);
            if projected(pick) < best * (1.0 - 1e-9) {
                return Ok(false);
            }
        }
        if sel
            .residual_norms
            .windows(2)
            .any(|w| w[1] > w[0] * (1.0 + 1e-12))
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Least-squares residual along the greedy order, streamed and dense.
fn residual_monotone() -> Result<bool, String> {
    let p = BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 3000.0).map_err(err)?;
    let model =
        assemble(&BeamGeometry::reference_beam(4).map_err(err)?, p.gamma_h()).map_err(err)?;
    let modal = project_modal(&model, 2).map_err(err)?;
    let cfg = SnapshotConfig {
        r: 2,
        n_runs: 4,
        n_samples: 100,
        t_end: 0.2,
        h: 1e-3,
        ic_scale: 0.06,
        seed: 3,
    };
    let z = generate_snapshots(&model, &p, &modal.basis, &cfg, 1).map_err(err)?;
    let zm = z.to_matrix();
    let mut work = z.clone();
    let sel =
        greedy_select_in_place(&mut work, &GreedyOptions::fixed(model.n_hyst())).map_err(err)?;
    let g = modal_coupling(&model, &modal.basis);
    let mut acc = ProjectionAccumulator::new(&sel.indices, g.clone()).map_err(err)?;
    acc.push_set(&z).map_err(err)?;
    let factor = acc.finish().map_err(err)?;
    let mut prev = f64::INFINITY;
    for m in 0..=sel.indices.len() {
        let r = factor.residual(m).map_err(err)?;
        let idx = &sel.indices[..m];
        let pd = solve_projection_dense(&zm, idx, &g).map_err(err)?;
        let zs = DMatrix::from_fn(m, zm.ncols(), |j, c| zm[(idx[j], c)]);
        let dense = (&g * &zm - &pd * zs).norm();
        if r > prev * (1.0 + 1e-10) + 1e-14 || (r - dense).abs() > 1e-8 * factor.target_norm() {
            return Ok(false);
        }
        prev = r;
    }
    Ok(true)
}

fn full_basis_deviation() -> Result<f64, String> {
    let p = BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 3000.0).map_err(err)?;
    let model =
        assemble(&BeamGeometry::reference_beam(3).map_err(err)?, p.gamma_h()).map_err(err)?;
    let rom = Rom::full_basis(&model, p).map_err(err)?;
    let q0 = InitialShape::StaticTip
        .displacement(&model, 0.06)
        .map_err(err)?;
    let xi0 = rom.basis.transpose() * &model.mass * &q0;
    let sys = BeamSystem::new(&model);
    let problem = Problem {
        system: &sys,
        params: &p,
        forcing: &Unforced,
    };
    let full = simulate(
        &problem,
        &SimState::displaced(q0, model.n_hyst()),
        1e-4,
        0.2,
        1,
        Record::TIP_ONLY,
    )
    .map_err(err)?;
    let red = simulate_rom(&rom, &Unforced, &xi0, 1e-4, 0.2, 1, Record::TIP_ONLY).map_err(err)?;
    Ok(full
        .tip
        .iter()
        .zip(&red.tip)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs())))
}

fn loop_area(p: &BoucWenParams, a: f64) -> f64 {
    let sweep = |z: &mut f64, from: f64, to: f64, steps: usize| -> f64 {
        let d = (to - from) / steps as f64;
        let dir = d.signum();
        let slope = |z: f64| p.rate(z, dir) * dir;
        let mut area = 0.0;
        for _ in 0..steps {
            let z0 = *z;
            let k1 = slope(z0);
            let k2 = slope(z0 + 0.5 * d * k1);
            let k3 = slope(z0 + 0.5 * d * k2);
            let k4 = slope(z0 + d * k3);
            *z = z0 + d / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            area += 0.5 * (z0 + *z) * d;
        }
        area
    };
    let n = 20_000;
    let mut z = 0.0;
    sweep(&mut z, 0.0, a, n);
    for _ in 0..3 {
        sweep(&mut z, a, -a, 2 * n);
        sweep(&mut z, -a, a, 2 * n);
    }
    sweep(&mut z, a, -a, 2 * n) + sweep(&mut z, -a, a, 2 * n)
}

fn loop_area_slopes() -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for p in [
        BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 3000.0).map_err(err)?,
        BoucWenParams::new(608.9, 0.8, 0.5, 1.5, 0.3).map_err(err)?,
    ] {
        let cm = hysterobeam::hysteresis::chi_max(&p);
        let amps: Vec<f64> = (0..6)
            .map(|k| cm / 100.0 * 10f64.powf(k as f64 / 5.0))
            .collect();
        let areas: Vec<f64> = amps.iter().map(|&a| loop_area(&p, a)).collect();
        let slope = hysterobeam::analysis::loglog_slope(&amps, &areas).map_err(err)?;
        out.push((p.n_h(), slope));
    }
    Ok(out)
}

/// Largest relative rise of the mechanical energy over windows of exactly
/// `w` steps (rises over longer windows are also scanned when `w` is 10).
fn energy_rises() -> Result<(f64, f64, usize), String> {
    let p = BoucWenParams::new(0.065, 0.8, 0.5, 0.5, 3000.0).map_err(err)?;
    let model =
        assemble(&BeamGeometry::reference_beam(10).map_err(err)?, p.gamma_h()).map_err(err)?;
    let sys = BeamSystem::new(&model);
    let problem = Problem {
        system: &sys,
        params: &p,
        forcing: &Unforced,
    };
    let h = 1e-4;
    let q0 = InitialShape::StaticModes(3)
        .displacement(&model, 0.06)
        .map_err(err)?;
    let rec = Record {
        q: true,
        v: true,
        z: false,
    };
    let t = simulate(
        &problem,
        &SimState::displaced(q0, model.n_hyst()),
        h,
        0.5,
        1,
        rec,
    )
    .map_err(err)?;
    let e: Vec<f64> =
        t.q.iter()
            .zip(&t.v)
            .map(|(q, v)| mechanical_energy(&sys, q, v))
            .collect();
    // any window of at least 10 steps: compare each sample with the running
    // minimum of everything at least 10 steps earlier
    let mut worst_literal = f64::NEG_INFINITY;
    let mut min_before = f64::INFINITY;
    for k in 10..e.len() {
        min_before = min_before.min(e[k - 10]);
        worst_literal = worst_literal.max((e[k] - min_before) / min_before);
    }
    let period = 1.0 / modal_analysis(&model, 1).map_err(err)?.frequencies[0];
    let w = (period / h).ceil() as usize;
    let worst_period = (0..e.len() - w)
        .map(|k| (e[k + w] - e[k]) / e[k])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((worst_literal, worst_period, w))
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let quad = quadrature_deviation()?;
    let greedy = greedy_brute_force()?;
    let residual = residual_monotone()?;
    let full = full_basis_deviation()?;
    let slopes = loop_area_slopes()?;
    let (literal, period, w) = energy_rises()?;
    let checks = [
        quad <= 1e-12,
        greedy,
        residual,
        full <= 1e-10,
        slopes.iter().all(|(n, s)| within(*s, n + 2.0, 0.1)),
        literal <= 0.0,
    ];
    let s: Vec<String> = slopes
        .iter()
        .map(|(n, s)| format!("n_h {n}: {s:.3}"))
        .collect();
    Ok((
        checks.iter().all(|&c| c),
        format!(
            "quadrature {quad:.1e} {}; greedy brute force {}; residual monotone {}; full basis {full:.1e} {}; loop area [{}] {}; energy over >= 10 steps: max rise {literal:.2e} {} (over one period, {w} steps: {period:.2e}); {}",
            tag(checks[0]),
            tag(checks[1]),
            tag(checks[2]),
            tag(checks[3]),
            s.join(", "),
            tag(checks[4]),
            tag(checks[5]),
            secs(start.elapsed())
        ),
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("modal frequencies", modal_frequencies),
        ("equivalent damping", equivalent_damping),
        ("asymptotic decay", asymptotic_decay),
        ("large-step stability", large_step_stability),
        ("accuracy vs oracle", accuracy_vs_oracle),
        ("convergence orders", convergence_orders),
        ("ROM pipeline", rom_pipeline),
        ("property suites", property_suites),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        passed += ok as usize;
        println!(
            "{} criterion {} ({name}): {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
}
