//! Semi-implicit scheme: two-stage L-stable Rosenbrock update (gamma = 1 - 1/sqrt 2)
//! for displacements and velocities, explicit predictor-corrector for the
//! hysteretic variables with splitting at curvature-rate reversals.

use nalgebra::DVector;

use super::{Integrator, Problem, SimState};
use crate::error::{invalid, Error, Result};
use crate::hysteresis::BoucWenParams;
use crate::system::{LinearSolve, StructuralSystem};
use crate::trajectory::{Record, SampleGrid, Trajectory, TrajectoryMeta};

/// Rosenbrock parameter `1 - 1/sqrt(2)`.
pub const GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

/// Advances the hysteretic variables over one step given the curvature rates
/// at both ends of the step.
///
/// Points whose rate keeps its sign (or touches zero) take a Heun step.
/// Points whose rate strictly changes sign are split at the linearly
/// interpolated reversal instant `h0 = -h c0 / (c1 - c0)`, with a trapezoid
/// on each side using a zero rate at the reversal.
pub fn split_step(
    z0: &[f64],
    chidot0: &[f64],
    chidot1: &[f64],
    h: f64,
    params: &BoucWenParams,
    z1: &mut [f64],
) {
    for k in 0..z0.len() {
        let (z, c0, c1) = (z0[k], chidot0[k], chidot1[k]);
        let s1 = params.rate(z, c0);
        z1[k] = if c0 * c1 < 0.0 {
            let h0 = -h * c0 / (c1 - c0);
            let zmf = z + 0.5 * h0 * s1;
            let s2 = params.rate(zmf, c1);
            zmf + 0.5 * (h - h0) * s2
        } else {
            let s2 = params.rate(z + h * s1, c1);
            z + 0.5 * h * (s1 + s2)
        };
    }
}

/// Cached factorisation of `M + gamma h C + (gamma h)^2 K` plus scratch space.
pub struct StepWorkspace {
    h: f64,
    solver: Box<dyn LinearSolve>,
    n: usize,
    m: usize,
    f0: Vec<f64>,
    fdot: Vec<f64>,
    kq: Vec<f64>,
    kv: Vec<f64>,
    ke: Vec<f64>,
    cv: Vec<f64>,
    ce: Vec<f64>,
    az: Vec<f64>,
    azdot: Vec<f64>,
    rhs: Vec<f64>,
    e_tilde: Vec<f64>,
    chi0: Vec<f64>,
    chi1: Vec<f64>,
    zdot: Vec<f64>,
    z1: Vec<f64>,
}

impl StepWorkspace {
    pub fn new(system: &dyn StructuralSystem, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid(
                "h",
                format!("step must be finite and > 0, got {h}"),
            ));
        }
        let gh = GAMMA * h;
        let solver = system.factor(gh, gh * gh)?;
        let (n, m) = (system.n_dof(), system.n_hyst());
        Ok(Self {
            h,
            solver,
            n,
            m,
            f0: vec![0.0; n],
            fdot: vec![0.0; n],
            kq: vec![0.0; n],
            kv: vec![0.0; n],
            ke: vec![0.0; n],
            cv: vec![0.0; n],
            ce: vec![0.0; n],
            az: vec![0.0; n],
            azdot: vec![0.0; n],
            rhs: vec![0.0; n],
            e_tilde: vec![0.0; n],
            chi0: vec![0.0; m],
            chi1: vec![0.0; m],
            zdot: vec![0.0; m],
            z1: vec![0.0; m],
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Re-factorises for a new step size.
    pub fn refresh(&mut self, system: &dyn StructuralSystem, h: f64) -> Result<()> {
        if h != self.h {
            *self = Self::new(system, h)?;
        }
        Ok(())
    }

    fn check(&self, state: &SimState) -> Result<()> {
        let dims = [
            ("q", self.n, state.q.len()),
            ("v", self.n, state.v.len()),
            ("z", self.m, state.z.len()),
        ];
        for (ctx, expected, actual) in dims {
            if expected != actual {
                return Err(Error::Dimension {
                    context: ctx,
                    expected,
                    actual,
                });
            }
        }
        Ok(())
    }

    /// Advances `state` by one step of size `self.h()` in place.
    pub fn advance(&mut self, problem: &Problem<'_>, state: &mut SimState) -> Result<()> {
        self.check(state)?;
        let sys = problem.system;
        let params = problem.params;
        let forcing = problem.forcing;
        let (h, t0) = (self.h, state.t);
        let (n, g) = (self.n, GAMMA);
        let damped = sys.has_damping();
        let q0 = state.q.as_slice();
        let v0 = state.v.as_slice();
        let z0 = state.z.as_slice();

        // stage data at t0
        sys.mul_curvature(v0, &mut self.chi0);
        for ((zd, &z), &c) in self.zdot.iter_mut().zip(z0).zip(&self.chi0) {
            *zd = params.rate(z, c);
        }
        sys.mul_coupling(z0, &mut self.az);
        sys.mul_coupling(&self.zdot, &mut self.azdot);
        sys.mul_stiffness(q0, &mut self.kq);
        sys.mul_stiffness(v0, &mut self.kv);
        if damped {
            sys.mul_damping(v0, &mut self.cv);
        }
        let forced = !forcing.is_zero();
        if forced {
            forcing.value(t0, &mut self.f0);
            forcing.derivative(t0, &mut self.fdot);
        }

        // first stage
        for i in 0..n {
            let (f, fd) = if forced {
                (self.f0[i], self.fdot[i])
            } else {
                (0.0, 0.0)
            };
            let big_f = f - self.az[i];
            let big_fdot = fd - self.azdot[i];
            let r0 = self.kq[i] + if damped { self.cv[i] } else { 0.0 };
            self.rhs[i] = big_f - r0 + h * g * (big_fdot - self.kv[i]);
        }
        self.solver.solve_in_place(&mut self.rhs);
        for i in 0..n {
            self.e_tilde[i] = h * self.rhs[i];
        }
        if self.e_tilde.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                stage: "first stage",
                t: t0,
            });
        }

        // second stage
        sys.mul_stiffness(&self.e_tilde, &mut self.ke);
        if damped {
            sys.mul_damping(&self.e_tilde, &mut self.ce);
        }
        if forced {
            forcing.value(t0 + 0.5 * h, &mut self.f0);
        }
        for i in 0..n {
            let f = if forced { self.f0[i] } else { 0.0 };
            let big_f_half = f - (self.az[i] + 0.5 * h * self.azdot[i]);
            // K (y0 + d~/2) with d~ = h (v0 + gamma e~)
            let mut r_half = self.kq[i] + 0.5 * h * (self.kv[i] + g * self.ke[i]);
            let mut extra = h * g * (2.0 * g - 0.5) * self.ke[i];
            if damped {
                r_half += self.cv[i] + 0.5 * self.ce[i];
                extra += g * self.ce[i];
            }
            self.rhs[i] = big_f_half - r_half + extra;
        }
        self.solver.solve_in_place(&mut self.rhs);
        let e = &mut self.rhs;
        for x in e.iter_mut() {
            *x *= h;
        }
        if e.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                stage: "second stage",
                t: t0,
            });
        }

        // y1 = y0 + d, v1 = v0 + e
        for (i, &ei) in e.iter().enumerate() {
            let vi = state.v[i];
            state.q[i] += h * (vi + (0.5 - g) * self.e_tilde[i] + g * ei);
            state.v[i] = vi + ei;
        }

        // hysteresis
        sys.mul_curvature(state.v.as_slice(), &mut self.chi1);
        split_step(
            state.z.as_slice(),
            &self.chi0,
            &self.chi1,
            h,
            params,
            &mut self.z1,
        );
        if self.z1.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                stage: "hysteresis update",
                t: t0,
            });
        }
        state.z.as_mut_slice().copy_from_slice(&self.z1);
        state.t = t0 + h;
        Ok(())
    }
}

/// One step from `state`; refreshes the workspace factorisation if `h` changed.
pub fn step(
    state: &SimState,
    h: f64,
    problem: &Problem<'_>,
    ws: &mut StepWorkspace,
) -> Result<SimState> {
    ws.refresh(problem.system, h)?;
    let mut next = state.clone();
    ws.advance(problem, &mut next)?;
    Ok(next)
}

/// Number of steps of size `h` spanning `t_end`; `t_end / h` must be integral.
pub fn step_count(t_end: f64, h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid(
            "h",
            format!("step must be finite and > 0, got {h}"),
        ));
    }
    let n = (t_end / h).round();
    if n < 1.0 || (n * h - t_end).abs() > 1e-9 * t_end {
        return Err(invalid(
            "h",
            format!("t_end = {t_end} is not an integer multiple of h = {h}"),
        ));
    }
    Ok(n as usize)
}

/// Fixed-step semi-implicit integrator.
#[derive(Debug, Clone, Copy)]
pub struct SemiImplicit {
    pub h: f64,
}

impl SemiImplicit {
    pub fn new(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(invalid(
                "h",
                format!("step must be finite and > 0, got {h}"),
            ));
        }
        Ok(Self { h })
    }

    /// Integrates over `[ic.t, ic.t + n_steps h]` recording every `stride` steps,
    /// the first and the last step included.
    pub fn run(
        &self,
        problem: &Problem<'_>,
        ic: &SimState,
        n_steps: usize,
        stride: usize,
        record: Record,
    ) -> Result<Trajectory> {
        if stride == 0 {
            return Err(invalid("stride", "must be >= 1"));
        }
        let mut ws = StepWorkspace::new(problem.system, self.h)?;
        let mut state = ic.clone();
        let t0 = ic.t;
        let mut traj = Trajectory {
            meta: TrajectoryMeta {
                scheme: "semi-implicit".into(),
                h: Some(self.h),
                params: Some(*problem.params),
                ..Default::default()
            },
            ..Default::default()
        };
        let push = |traj: &mut Trajectory, s: &SimState, t: f64| {
            traj.times.push(t);
            traj.tip.push(problem.system.output(s.q.as_slice()));
            if record.q {
                traj.q.push(s.q.clone());
            }
            if record.v {
                traj.v.push(s.v.clone());
            }
            if record.z {
                traj.z.push(s.z.clone());
            }
        };
        push(&mut traj, &state, t0);
        for k in 1..=n_steps {
            // time stamps are k h, not accumulated sums
            state.t = t0 + (k - 1) as f64 * self.h;
            ws.advance(problem, &mut state)
                .map_err(|e| Error::StepFailed {
                    t: state.t,
                    source: Box::new(e),
                })?;
            state.t = t0 + k as f64 * self.h;
            if k % stride == 0 || k == n_steps {
                push(&mut traj, &state, state.t);
            }
        }
        Ok(traj)
    }
}

impl Integrator for SemiImplicit {
    fn name(&self) -> &str {
        "semi-implicit"
    }

    fn integrate(
        &self,
        problem: &Problem<'_>,
        ic: &SimState,
        grid: &SampleGrid,
        record: Record,
    ) -> Result<Trajectory> {
        let n_steps = step_count(grid.t_end, self.h)?;
        if n_steps % grid.intervals != 0 {
            return Err(invalid(
                "h",
                format!(
                    "{n_steps} steps cannot be split into {} output intervals",
                    grid.intervals
                ),
            ));
        }
        self.run(problem, ic, n_steps, n_steps / grid.intervals, record)
    }
}

/// Convenience: fixed-step simulation over `[0, t_end]` sampled every `stride` steps.
pub fn simulate(
    problem: &Problem<'_>,
    ic: &SimState,
    h: f64,
    t_end: f64,
    stride: usize,
    record: Record,
) -> Result<Trajectory> {
    let n_steps = step_count(t_end, h)?;
    SemiImplicit::new(h)?.run(problem, ic, n_steps, stride, record)
}

/// Mechanical energy `v^T M v / 2 + q^T K q / 2`.
pub fn mechanical_energy(system: &dyn StructuralSystem, q: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let n = system.n_dof();
    let mut buf = vec![0.0; n];
    system.mul_mass(v.as_slice(), &mut buf);
    let kinetic: f64 = buf.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    system.mul_stiffness(q.as_slice(), &mut buf);
    let strain: f64 = buf.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
    0.5 * (kinetic + strain)
}
