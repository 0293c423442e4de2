//! Error measures, reference solutions, damping and decay estimates, spectra
//! and convergence studies.

use std::f64::consts::PI;
use std::io::Write;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::integrator::{Dopri5, Integrator, Problem, SemiImplicit, SimState};
use crate::trajectory::{format_f64, write_columns_csv, Record, SampleGrid, Trajectory};

/// Default number of shared error instants.
pub const N_E: usize = 128;

/// Step of the fine-step reference, `2^-23`.
pub const FINE_STEP: f64 = 1.0 / 8_388_608.0;

/// Largest model (in dofs) for which the adaptive reference is chosen automatically.
pub const ADAPTIVE_MAX_DOF: usize = 40;

/// Instants `t0 + k T / n`, `k = 1..=n`, with `T` the span of `reference`.
pub fn error_instants(reference: &Trajectory, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("N_E", "at least one instant"));
    }
    let (Some(&t0), Some(&t1)) = (reference.times.first(), reference.times.last()) else {
        return Err(Error::Analysis("empty reference trajectory".into()));
    };
    let span = t1 - t0;
    Ok((1..=n).map(|k| t0 + k as f64 * span / n as f64).collect())
}

fn paired_values(
    traj: &Trajectory,
    reference: &Trajectory,
    instants: &[f64],
) -> Result<Vec<(f64, f64)>> {
    instants
        .iter()
        .map(|&t| Ok((traj.tip_at(t)?, reference.tip_at(t)?)))
        .collect()
}

/// Root mean square tip error over `n` shared equispaced instants.
pub fn rms_error(traj: &Trajectory, reference: &Trajectory, n: usize) -> Result<f64> {
    rms_error_at(traj, reference, &error_instants(reference, n)?)
}

/// Root mean square tip error over the given instants.
pub fn rms_error_at(traj: &Trajectory, reference: &Trajectory, instants: &[f64]) -> Result<f64> {
    let pairs = paired_values(traj, reference, instants)?;
    let ss: f64 = pairs.iter().map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / pairs.len() as f64).sqrt())
}

/// Root mean square of the reference tip signal over the same instants.
pub fn rms_signal(reference: &Trajectory, n: usize) -> Result<f64> {
    let instants = error_instants(reference, n)?;
    let ss: f64 = instants
        .iter()
        .map(|&t| reference.tip_at(t).map(|y| y * y))
        .sum::<Result<f64>>()?;
    Ok((ss / n as f64).sqrt())
}

/// Root mean square difference over all common samples of two trajectories
/// sampled on the same instants.
pub fn rms_difference_all(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Analysis(format!(
            "trajectories have {} and {} samples",
            a.len(),
            b.len()
        )));
    }
    let tol = 1e-9 * a.times.last().map_or(1.0, |t| t.abs().max(1.0));
    if a.times
        .iter()
        .zip(&b.times)
        .any(|(x, y)| (x - y).abs() > tol)
    {
        return Err(Error::Analysis("sample instants differ".into()));
    }
    let ss: f64 = a
        .tip
        .iter()
        .zip(&b.tip)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((ss / a.len() as f64).sqrt())
}

/// `|y(tau) - y_ref(tau)|`.
pub fn fixed_time_error(traj: &Trajectory, reference: &Trajectory, tau: f64) -> Result<f64> {
    Ok((traj.tip_at(tau)? - reference.tip_at(tau)?).abs())
}

/// How the reference trajectory is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    /// Dormand-Prince 5(4) at the given tolerances.
    Adaptive { rtol: f64, atol: f64 },
    /// The semi-implicit scheme at a very small fixed step.
    FineStep { h: f64 },
}

impl ReferenceKind {
    /// Adaptive for small models, fine-step otherwise.
    pub fn auto(n_dof: usize) -> Self {
        if n_dof <= ADAPTIVE_MAX_DOF {
            ReferenceKind::Adaptive {
                rtol: 1e-10,
                atol: 1e-10,
            }
        } else {
            ReferenceKind::FineStep { h: FINE_STEP }
        }
    }
}

/// High-accuracy solution sampled on `grid`.
pub fn reference_solution(
    problem: &Problem<'_>,
    ic: &SimState,
    grid: &SampleGrid,
    kind: ReferenceKind,
) -> Result<Trajectory> {
    match kind {
        ReferenceKind::Adaptive { rtol, atol } => {
            Dopri5::new(rtol, atol)?.integrate(problem, ic, grid, Record::TIP_ONLY)
        }
        ReferenceKind::FineStep { h } => {
            SemiImplicit::new(h)?.integrate(problem, ic, grid, Record::TIP_ONLY)
        }
    }
}

/// Equivalent damping ratio `ln(A_1 / A_{1+M}) / (2 pi M)` from `M + 1`
/// successive cycle peaks.
pub fn zeta_equiv(peaks: &[f64]) -> Result<f64> {
    if peaks.len() < 2 {
        return Err(Error::Analysis(format!(
            "need at least 2 peaks, got {}",
            peaks.len()
        )));
    }
    let (first, last) = (peaks[0], peaks[peaks.len() - 1]);
    if !(first > 0.0 && last > 0.0) {
        return Err(Error::Analysis(format!(
            "peaks must be positive, got {first} and {last}"
        )));
    }
    let m = (peaks.len() - 1) as f64;
    Ok((first / last).ln() / (2.0 * PI * m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    pub value: f64,
}

/// Vertex of the parabola through three equispaced samples, as an offset in
/// samples from the middle one and the interpolated value.
fn parabolic_vertex(ym: f64, y0: f64, yp: f64) -> (f64, f64) {
    let den = ym - 2.0 * y0 + yp;
    if den == 0.0 {
        return (0.0, y0);
    }
    let d = (0.5 * (ym - yp) / den).clamp(-0.5, 0.5);
    (d, y0 - 0.25 * (ym - yp) * d)
}

/// Strict local maxima of `values` with quadratic refinement of time and height.
/// Samples are assumed uniformly spaced around each maximum.
pub fn local_maxima(times: &[f64], values: &[f64]) -> Vec<Peak> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (ym, y0, yp) = (values[i - 1], values[i], values[i + 1]);
        if y0 > ym && y0 >= yp {
            let (d, v) = parabolic_vertex(ym, y0, yp);
            let dt = 0.5 * (times[i + 1] - times[i - 1]);
            out.push(Peak {
                t: times[i] + d * dt,
                value: v,
            });
        }
    }
    out
}

/// Maxima of `|tip|` inside `[t1, t2]`, one per half-cycle when the signal is
/// dominated by a single mode.
pub fn envelope_peaks(traj: &Trajectory, t1: f64, t2: f64) -> Vec<Peak> {
    let abs: Vec<f64> = traj.tip.iter().map(|y| y.abs()).collect();
    local_maxima(&traj.times, &abs)
        .into_iter()
        .filter(|p| p.t >= t1 && p.t <= t2)
        .collect()
}

/// Positive maxima of the tip signal, keeping the largest of any group closer
/// than `min_separation`; returned in time order.
pub fn dominant_peaks(traj: &Trajectory, min_separation: f64) -> Result<Vec<Peak>> {
    if min_separation.is_nan() || min_separation < 0.0 {
        return Err(invalid(
            "min_separation",
            format!("must be >= 0, got {min_separation}"),
        ));
    }
    let mut cands: Vec<Peak> = local_maxima(&traj.times, &traj.tip)
        .into_iter()
        .filter(|p| p.value > 0.0)
        .collect();
    cands.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.t.total_cmp(&b.t)));
    let mut kept: Vec<Peak> = Vec::new();
    for c in cands {
        if kept.iter().all(|k| (k.t - c.t).abs() >= min_separation) {
            kept.push(c);
        }
    }
    kept.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(kept)
}

/// Unweighted least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Analysis(format!(
            "fit needs >= 2 paired points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("degenerate abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.iter().chain(y).any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::Analysis("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).map(|(s, _)| s)
}

/// Log-log slope of the `|tip|` envelope against time inside `[t1, t2]`.
pub fn decay_slope(traj: &Trajectory, t1: f64, t2: f64) -> Result<f64> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(invalid(
            "window",
            format!("need 0 < t1 < t2, got [{t1}, {t2}]"),
        ));
    }
    let peaks = envelope_peaks(traj, t1, t2);
    if peaks.len() < 5 {
        return Err(Error::Analysis(format!(
            "only {} envelope peaks in [{t1}, {t2}], need 5",
            peaks.len()
        )));
    }
    let t: Vec<f64> = peaks.iter().map(|p| p.t).collect();
    let a: Vec<f64> = peaks.iter().map(|p| p.value).collect();
    loglog_slope(&t, &a)
}

/// 4-term Blackman-Harris window.
fn blackman_harris(n: usize) -> Vec<f64> {
    const A: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / (n - 1) as f64;
            A[0] - A[1] * x.cos() + A[2] * (2.0 * x).cos() - A[3] * (3.0 * x).cos()
        })
        .collect()
}

/// One-sided magnitude spectrum of the windowed, mean-removed tip signal.
/// Returns `(bin width in Hz, magnitudes)`.
pub fn magnitude_spectrum(traj: &Trajectory) -> Result<(f64, Vec<f64>)> {
    let dt = traj
        .uniform_spacing()
        .ok_or_else(|| Error::Analysis("spectrum needs uniform sampling".into()))?;
    let n = traj.len();
    let mean = traj.tip.iter().sum::<f64>() / n as f64;
    let w = blackman_harris(n);
    let mut buf: Vec<Complex<f64>> = traj
        .tip
        .iter()
        .zip(&w)
        .map(|(y, w)| Complex::new((y - mean) * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mags = buf[..n / 2 + 1].iter().map(|c| c.norm()).collect();
    Ok((1.0 / (n as f64 * dt), mags))
}

/// Frequencies (Hz) of spectral peaks above 1 % of the largest, with
/// parabolic interpolation of the bin position.
pub fn spectrum_peaks(traj: &Trajectory) -> Result<Vec<f64>> {
    let (df, mags) = magnitude_spectrum(traj)?;
    let max = mags.iter().skip(1).copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for k in 1..mags.len().saturating_sub(1) {
        let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
        if b > a && b >= c && b > 0.01 * max {
            let (d, _) = parabolic_vertex(a, b, c);
            out.push((k as f64 + d) * df);
        }
    }
    Ok(out)
}

/// Errors of one scheme against a reference over a sequence of step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Step sizes, strictly decreasing powers of two.
    pub h: Vec<f64>,
    pub e_rms: Vec<f64>,
    pub e_tau: Vec<f64>,
    pub tau: f64,
    /// Fitted log-log slope of `e_rms` over `fit_window`.
    pub slope_rms: f64,
    /// Fitted log-log slope of `e_tau` over `fit_window`.
    pub slope_tau: f64,
    /// Inclusive range of step sizes used in the fits.
    pub fit_window: (f64, f64),
}

/// Checks that `hs` are distinct powers of two, strictly decreasing, at least three.
pub fn validate_step_sizes(hs: &[f64]) -> Result<()> {
    if hs.len() < 3 {
        return Err(invalid(
            "h",
            format!("at least 3 step sizes required, got {}", hs.len()),
        ));
    }
    for &h in hs {
        if !(h > 0.0 && h.log2().fract() == 0.0) {
            return Err(invalid("h", format!("{h} is not a power of two")));
        }
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("h", "step sizes must be strictly decreasing"));
    }
    Ok(())
}

/// `2^-k` for `k = coarse..=fine`.
pub fn power_of_two_steps(coarse: u32, fine: u32) -> Vec<f64> {
    (coarse..=fine).map(|k| (-(k as f64)).exp2()).collect()
}

impl ConvergenceReport {
    /// Fits slopes over the step sizes inside `window` (inclusive); errors
    /// that are exactly zero are left out of the fit.
    pub fn from_errors(
        h: Vec<f64>,
        e_rms: Vec<f64>,
        e_tau: Vec<f64>,
        tau: f64,
        window: Option<(f64, f64)>,
    ) -> Result<Self> {
        validate_step_sizes(&h)?;
        let (lo, hi) = window.unwrap_or((h[h.len() - 1], h[0]));
        let pick = |e: &[f64]| -> (Vec<f64>, Vec<f64>) {
            h.iter()
                .zip(e)
                .filter(|(&x, &y)| x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12) && y > 0.0)
                .map(|(&x, &y)| (x, y))
                .unzip()
        };
        let (x, y) = pick(&e_rms);
        let slope_rms = loglog_slope(&x, &y)?;
        let (x, y) = pick(&e_tau);
        let slope_tau = loglog_slope(&x, &y).unwrap_or(f64::NAN);
        Ok(Self {
            h,
            e_rms,
            e_tau,
            tau,
            slope_rms,
            slope_tau,
            fit_window: (lo, hi),
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_columns_csv(
            w,
            &["h", "e_rms", "e_tau"],
            &[&self.h, &self.e_rms, &self.e_tau],
        )
    }

    pub fn summary(&self) -> String {
        format!(
            "step sizes: {} ({} .. {})\nfit window: [{}, {}]\nslope(e_rms) = {:.4}\nslope(e_tau at t = {}) = {:.4}\n",
            self.h.len(),
            format_f64(self.h[0]),
            format_f64(self.h[self.h.len() - 1]),
            format_f64(self.fit_window.0),
            format_f64(self.fit_window.1),
            self.slope_rms,
            self.tau,
            self.slope_tau
        )
    }
}

/// Runs the semi-implicit scheme at every `h` and compares with `reference`
/// on `n_e` shared instants and at `tau`.
pub fn convergence_study(
    problem: &Problem<'_>,
    ic: &SimState,
    hs: &[f64],
    reference: &Trajectory,
    n_e: usize,
    tau: f64,
    window: Option<(f64, f64)>,
) -> Result<ConvergenceReport> {
    validate_step_sizes(hs)?;
    let t_end = reference.times.last().copied().unwrap_or(0.0) - ic.t;
    let grid = SampleGrid::new(t_end, n_e)?;
    let mut e_rms = Vec::with_capacity(hs.len());
    let mut e_tau = Vec::with_capacity(hs.len());
    for &h in hs {
        let traj = SemiImplicit::new(h)?.integrate(problem, ic, &grid, Record::TIP_ONLY)?;
        e_rms.push(rms_error(&traj, reference, n_e)?);
        e_tau.push(fixed_time_error(&traj, reference, tau)?);
    }
    ConvergenceReport::from_errors(hs.to_vec(), e_rms, e_tau, tau, window)
}
