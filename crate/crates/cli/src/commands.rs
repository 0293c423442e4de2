//! Subcommand bodies. Each returns a report and writes its files under `out`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hysterobeam::analysis::{
    convergence_study, decay_slope, dominant_peaks, magnitude_spectrum, power_of_two_steps,
    reference_solution, rms_difference_all, rms_signal, spectrum_peaks, validate_step_sizes,
    zeta_equiv, ConvergenceReport, ReferenceKind,
};
use hysterobeam::beam_fe::{assemble, modal_analysis, shortest_period};
use hysterobeam::forcing::Unforced;
use hysterobeam::integrator::{simulate, step_count, Problem};
use hysterobeam::rom::io::RomArtifact;
use hysterobeam::rom::{
    generate_snapshots, greedy_select_in_place, modal_coupling, open_snapshots, project_modal,
    simulate_rom, GreedyOptions, GreedySelection, ModalIcSampler, ProjectionAccumulator, Rom,
    SnapshotConfig,
};
use hysterobeam::trajectory::{format_f64, SampleGrid};
use hysterobeam::{BeamSystem, Record, SimState, Trajectory};
use nalgebra::DVector;

use crate::config::RunConfig;
use crate::error::{io_err, CliError, Result};

/// Peaks closer than this fraction of the fundamental period are merged.
pub const PEAK_SEPARATION_PERIODS: f64 = 0.6;

pub const SNAPSHOT_FILE: &str = "snapshots.bwz";
pub const ROM_FILE: &str = "rom.bwr";

/// Where and how commands run.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: PathBuf,
    pub workers: usize,
}

impl Context {
    pub fn new(out: impl Into<PathBuf>, workers: usize) -> Self {
        Self {
            out: out.into(),
            workers: workers.max(1),
        }
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(io_err(&self.out))?;
        Ok(self.out.join(name))
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.path(name)?;
        let f = File::create(&path).map_err(io_err(&path))?;
        Ok((path, BufWriter::new(f)))
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(name)?;
        std::fs::write(&path, text).map_err(io_err(&path))?;
        Ok(path)
    }
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(io_err(path))
}

// ---------------------------------------------------------------- modes

#[derive(Debug, Clone)]
pub struct ModesReport {
    pub frequencies: Vec<f64>,
    pub shortest_period: f64,
}

pub fn modes(cfg: &RunConfig, ctx: &Context) -> Result<ModesReport> {
    let model = cfg.model()?;
    let count = cfg.modes.as_ref().map_or(5, |m| m.count).min(model.n_dof());
    let basis = modal_analysis(&model, count)?;
    let report = ModesReport {
        frequencies: basis.frequencies,
        shortest_period: shortest_period(&model)?,
    };
    let (path, mut w) = ctx.create("modes.csv")?;
    writeln!(w, "mode,frequency_hz").map_err(io_err(&path))?;
    for (i, f) in report.frequencies.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, format_f64(*f)).map_err(io_err(&path))?;
    }
    finish(&path, w)?;
    Ok(report)
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub trajectory: Trajectory,
    pub modal_frequencies: Vec<f64>,
    pub zeta: Option<f64>,
    pub decay_slope: Option<f64>,
    /// Peak frequencies and the bin width of the spectrum.
    pub spectrum: Option<(Vec<f64>, f64)>,
    /// RMS tip error against the adaptive reference over all samples, divided by the reference RMS.
    pub reference_error: Option<f64>,
    pub max_abs_tip: f64,
}

pub fn simulate_cmd(cfg: &RunConfig, ctx: &Context) -> Result<SimulateReport> {
    let s = &cfg.simulation;
    let model = cfg.model()?;
    let system = BeamSystem::new(&model);
    let params = cfg.params()?;
    let forcing = cfg.forcing(&model)?;
    let problem = Problem {
        system: &system,
        params: &params,
        forcing: forcing.as_ref(),
    };
    let ic = SimState::displaced(cfg.initial_displacement(&model)?, model.n_hyst());
    let steps = step_count(s.t_end, s.h)?;
    if s.stride == 0 || steps % s.stride != 0 {
        return Err(CliError::Invalid(format!(
            "stride {} must divide the {steps} steps",
            s.stride
        )));
    }
    let grid = SampleGrid::new(s.t_end, steps / s.stride)?;
    let mut traj = cfg
        .integrator()?
        .integrate(&problem, &ic, &grid, Record::TIP_ONLY)?;
    traj.meta.h = Some(s.h);
    traj.meta.n_elements = Some(model.geometry.n_elements());
    traj.meta.seed = Some(cfg.seed());

    let n_modes = cfg.modes.as_ref().map_or(3, |m| m.count).min(model.n_dof());
    let modal_frequencies = modal_analysis(&model, n_modes)?.frequencies;
    let analysis = cfg.analysis.clone().unwrap_or_default();
    let zeta = match analysis.zeta_cycles {
        Some(m) => {
            let peaks = dominant_peaks(&traj, PEAK_SEPARATION_PERIODS / modal_frequencies[0])?;
            if peaks.len() < m + 1 {
                return Err(CliError::Invalid(format!(
                    "only {} cycle peaks, {} needed for {m} cycles",
                    peaks.len(),
                    m + 1
                )));
            }
            let values: Vec<f64> = peaks[..=m].iter().map(|p| p.value).collect();
            Some(zeta_equiv(&values)?)
        }
        None => None,
    };
    let decay = match analysis.decay_window {
        Some([t1, t2]) => Some(decay_slope(&traj, t1, t2)?),
        None => None,
    };
    let spectrum = if analysis.spectrum {
        let (df, _) = magnitude_spectrum(&traj)?;
        Some((spectrum_peaks(&traj)?, df))
    } else {
        None
    };
    let reference_error = if analysis.compare_reference {
        let reference = reference_solution(
            &problem,
            &ic,
            &grid,
            ReferenceKind::Adaptive {
                rtol: s.rtol,
                atol: s.atol,
            },
        )?;
        let zero = Trajectory {
            times: reference.times.clone(),
            tip: vec![0.0; reference.len()],
            ..Default::default()
        };
        Some(rms_difference_all(&traj, &reference)? / rms_difference_all(&reference, &zero)?)
    } else {
        None
    };
    let max_abs_tip = traj.tip.iter().fold(0.0f64, |a, y| a.max(y.abs()));

    let report = SimulateReport {
        trajectory: traj,
        modal_frequencies,
        zeta,
        decay_slope: decay,
        spectrum,
        reference_error,
        max_abs_tip,
    };
    let (path, mut w) = ctx.create("trajectory.csv")?;
    report.trajectory.write_csv(&mut w)?;
    finish(&path, w)?;
    ctx.write_text("summary.txt", &report.summary(cfg))?;
    Ok(report)
}

impl SimulateReport {
    pub fn summary(&self, cfg: &RunConfig) -> String {
        let mut s = format!(
            "run: {}\nintegrator: {}\nh: {}\nsamples: {}\nmax |tip|: {}\n",
            cfg.name,
            self.trajectory.meta.scheme,
            format_f64(cfg.simulation.h),
            self.trajectory.len(),
            format_f64(self.max_abs_tip)
        );
        let f: Vec<String> = self
            .modal_frequencies
            .iter()
            .map(|f| format!("{f:.4}"))
            .collect();
        s += &format!("modal frequencies (Hz): {}\n", f.join(", "));
        if let Some(z) = self.zeta {
            s += &format!("zeta_equiv: {z:.6}\n");
        }
        if let Some(d) = self.decay_slope {
            s += &format!("decay slope: {d:.4}\n");
        }
        if let Some((peaks, df)) = &self.spectrum {
            let p: Vec<String> = peaks.iter().map(|f| format!("{f:.3}")).collect();
            s += &format!("spectrum peaks (Hz, bin {df:.4}): {}\n", p.join(", "));
        }
        if let Some(e) = self.reference_error {
            s += &format!("relative RMS error vs adaptive reference: {e:.3e}\n");
        }
        s
    }
}

// ---------------------------------------------------------------- converge

#[derive(Debug, Clone)]
pub struct ConvergeReport {
    pub study: ConvergenceReport,
    pub reference: ReferenceKind,
    pub signal_rms: f64,
}

pub fn converge(cfg: &RunConfig, ctx: &Context) -> Result<ConvergeReport> {
    let c = cfg.convergence()?;
    if c.fine < c.coarse {
        return Err(CliError::Invalid(format!(
            "fine exponent {} below coarse exponent {}",
            c.fine, c.coarse
        )));
    }
    let hs = power_of_two_steps(c.coarse, c.fine);
    validate_step_sizes(&hs)?;
    let model = cfg.model()?;
    let system = BeamSystem::new(&model);
    let params = cfg.params()?;
    let forcing = cfg.forcing(&model)?;
    let problem = Problem {
        system: &system,
        params: &params,
        forcing: forcing.as_ref(),
    };
    let ic = SimState::displaced(cfg.initial_displacement(&model)?, model.n_hyst());
    let reference = match c.reference.as_str() {
        "auto" => match ReferenceKind::auto(model.n_dof()) {
            ReferenceKind::Adaptive { .. } => ReferenceKind::Adaptive {
                rtol: c.rtol,
                atol: c.atol,
            },
            fine => fine,
        },
        "adaptive" => ReferenceKind::Adaptive {
            rtol: c.rtol,
            atol: c.atol,
        },
        "fine-step" => ReferenceKind::auto(usize::MAX),
        other => {
            return Err(CliError::Invalid(format!(
                "unknown reference `{other}` (auto, adaptive, fine-step)"
            )))
        }
    };
    let grid = SampleGrid::new(cfg.simulation.t_end, c.instants)?;
    let reference_traj = reference_solution(&problem, &ic, &grid, reference)?;
    let window = c.fit_window.map(|[a, b]| (a.min(b), a.max(b)));
    let study = convergence_study(
        &problem,
        &ic,
        &hs,
        &reference_traj,
        c.instants,
        c.tau,
        window,
    )?;
    let report = ConvergeReport {
        study,
        reference,
        signal_rms: rms_signal(&reference_traj, c.instants)?,
    };
    let (path, mut w) = ctx.create("convergence.csv")?;
    report.study.write_csv(&mut w)?;
    finish(&path, w)?;
    let text = format!(
        "run: {}\nreference: {:?}\nreference RMS: {}\n{}",
        cfg.name,
        report.reference,
        format_f64(report.signal_rms),
        report.study.summary()
    );
    ctx.write_text("convergence_summary.txt", &text)?;
    Ok(report)
}

// ---------------------------------------------------------------- rom build

#[derive(Debug, Clone)]
pub struct RomBuildReport {
    pub selection: GreedySelection,
    /// Points kept in the stored model.
    pub points: usize,
    /// `||R^T A Z - P Z_s||_F` for the kept points and `||R^T A Z||_F`.
    pub residual: f64,
    pub target_norm: f64,
    pub snapshot_path: PathBuf,
    pub rom_path: PathBuf,
}

pub fn rom_build(cfg: &RunConfig, ctx: &Context) -> Result<RomBuildReport> {
    let rc = cfg.rom()?;
    let model = cfg.model()?;
    let params = cfg.params()?;
    let modal = project_modal(&model, rc.modes)?;
    let snap_cfg = SnapshotConfig {
        r: rc.modes,
        n_runs: rc.runs,
        n_samples: rc.samples,
        t_end: rc.t_end,
        h: rc.h,
        ic_scale: rc.ic_scale,
        seed: cfg.seed(),
    };
    let mut z = generate_snapshots(&model, &params, &modal.basis, &snap_cfg, ctx.workers)?;
    let snapshot_path = ctx.path(SNAPSHOT_FILE)?;
    z.write_file(&snapshot_path)?;

    let max_rows = rc.max_points.unwrap_or(model.n_hyst()).min(model.n_hyst());
    let opts = GreedyOptions {
        epsilon: rc.epsilon,
        ..GreedyOptions::fixed(max_rows)
    };
    // the in-place pass overwrites z, so the projection re-reads the file
    let selection = greedy_select_in_place(&mut z, &opts)?;
    drop(z);
    let points = rc.points.min(selection.indices.len());

    let mut acc =
        ProjectionAccumulator::new(&selection.indices, modal_coupling(&model, &modal.basis))?;
    let mut reader = open_snapshots(&snapshot_path)?;
    acc.push_reader(&mut reader)?;
    let factor = acc.finish()?;
    let p = factor.solve(points)?;
    let rom = Rom::new(&model, params, &modal, &selection.indices[..points], p)?;
    let artifact = RomArtifact {
        rom,
        order: selection.indices.clone(),
        factor,
    };
    let rom_path = ctx.path(ROM_FILE)?;
    artifact.write_file(&rom_path)?;

    let (path, mut w) = ctx.create("indices.csv")?;
    writeln!(w, "rank,point,residual").map_err(io_err(&path))?;
    for (k, &i) in selection.indices.iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            k + 1,
            i + 1,
            format_f64(selection.residual_norms[k + 1])
        )
        .map_err(io_err(&path))?;
    }
    finish(&path, w)?;

    Ok(RomBuildReport {
        residual: artifact.factor.residual(points)?,
        target_norm: artifact.factor.target_norm(),
        selection,
        points,
        snapshot_path,
        rom_path,
    })
}

// ---------------------------------------------------------------- rom eval

#[derive(Debug, Clone)]
pub struct RomEvalReport {
    /// Index of the held-out draw in the seeded initial-condition stream.
    pub held_out_draw: usize,
    pub xi: DVector<f64>,
    /// RMS of the full-model tip trace, i.e. the error of a zero output.
    pub baseline: f64,
    /// Error of the modal model with no hysteresis feedback.
    pub linear_modal: f64,
    /// `(m, E_rms)`; `m = 0` carries the baseline.
    pub rows: Vec<(usize, f64)>,
}

fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Evaluates the stored model on the first initial condition drawn after the
/// snapshot runs' draws, for every requested number of points.
pub fn rom_eval(cfg: &RunConfig, ctx: &Context) -> Result<RomEvalReport> {
    let rc = cfg.rom()?;
    let rom_path = ctx.out.join(ROM_FILE);
    let artifact = RomArtifact::read_file(&rom_path)?;
    let rom = &artifact.rom;
    let model = assemble(&rom.geometry, rom.params.gamma_h())?;
    let system = BeamSystem::new(&model);

    let held_out_draw = rc.runs;
    let mut sampler = ModalIcSampler::new(&rom.basis, rom.tip_dof, rc.ic_scale, cfg.seed())?;
    let xi = sampler
        .draw_many(held_out_draw + 1)
        .pop()
        .expect("non-empty draw");
    let problem = Problem {
        system: &system,
        params: &rom.params,
        forcing: &Unforced,
    };
    let ic = SimState::displaced(&rom.basis * &xi, model.n_hyst());
    let full = simulate(&problem, &ic, rc.h, rc.t_end, 1, Record::TIP_ONLY)?;
    let zeros = vec![0.0; full.tip.len()];
    let baseline = rms_diff(&full.tip, &zeros);

    let run = |m: usize| -> Result<f64> {
        let reduced = artifact.with_points(m)?;
        let traj = simulate_rom(
            &reduced,
            &Unforced,
            &xi,
            rc.h,
            rc.t_end,
            1,
            Record::TIP_ONLY,
        )?;
        Ok(rms_diff(&full.tip, &traj.tip))
    };
    let linear_modal = run(0)?;
    let mut rows = Vec::with_capacity(rc.eval_points.len());
    for &m in &rc.eval_points {
        if m > artifact.order.len() {
            return Err(CliError::Invalid(format!(
                "m = {m} exceeds the {} stored points",
                artifact.order.len()
            )));
        }
        rows.push((m, if m == 0 { baseline } else { run(m)? }));
    }
    let report = RomEvalReport {
        held_out_draw,
        xi,
        baseline,
        linear_modal,
        rows,
    };

    let (path, mut w) = ctx.create("rom_errors.csv")?;
    writeln!(w, "m,e_rms,relative").map_err(io_err(&path))?;
    for &(m, e) in &report.rows {
        writeln!(w, "{m},{},{}", format_f64(e), format_f64(e / baseline)).map_err(io_err(&path))?;
    }
    finish(&path, w)?;
    let xi_txt: Vec<String> = report.xi.iter().map(|x| format_f64(*x)).collect();
    ctx.write_text(
        "rom_summary.txt",
        &format!(
            "held-out draw: {} (seed {})\nmodal coordinates: {}\nbaseline (zero output): {}\nmodal model without hysteresis feedback: {}\n",
            report.held_out_draw,
            cfg.seed(),
            xi_txt.join(", "),
            format_f64(report.baseline),
            format_f64(report.linear_modal)
        ),
    )?;
    Ok(report)
}
