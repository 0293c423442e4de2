//! Dormand-Prince 5(4) with embedded error control on the first-order form
//! `q' = v`, `M v' = f0 - K q - C v - A z`, `z' = law(z, B v)`.
//!
//! Used as the high-accuracy reference for small models. Steps are clipped so
//! every output instant is hit exactly; no dense output is involved.

use super::{Integrator, Problem, SimState};
use crate::error::{invalid, Error, Result};
use crate::system::LinearSolve;
use crate::trajectory::{Record, SampleGrid, Trajectory, TrajectoryMeta};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
#[rustfmt::skip]
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step; `None` leaves it to the controller.
    pub h_max: Option<f64>,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_steps: 200_000_000,
            h_max: None,
        }
    }
}

/// Bookkeeping of a finished adaptive run.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveStats {
    pub accepted: usize,
    pub rejected: usize,
}

struct Rhs<'p, 'a> {
    problem: &'p Problem<'a>,
    mass: Box<dyn LinearSolve>,
    n: usize,
    m: usize,
    f: Vec<f64>,
    tmp: Vec<f64>,
    chi: Vec<f64>,
}

impl Rhs<'_, '_> {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        let sys = self.problem.system;
        let (q, rest) = y.split_at(n);
        let (v, z) = rest.split_at(n);
        let (dq, rest) = dy.split_at_mut(n);
        let (dv, dz) = rest.split_at_mut(n);
        dq.copy_from_slice(v);
        if self.problem.forcing.is_zero() {
            self.f.iter_mut().for_each(|x| *x = 0.0);
        } else {
            self.problem.forcing.value(t, &mut self.f);
        }
        sys.mul_stiffness(q, &mut self.tmp);
        for i in 0..n {
            self.f[i] -= self.tmp[i];
        }
        if sys.has_damping() {
            sys.mul_damping(v, &mut self.tmp);
            for i in 0..n {
                self.f[i] -= self.tmp[i];
            }
        }
        sys.mul_coupling(z, &mut self.tmp);
        for ((d, f), t) in dv.iter_mut().zip(&self.f).zip(&self.tmp) {
            *d = f - t;
        }
        self.mass.solve_in_place(dv);
        sys.mul_curvature(v, &mut self.chi);
        for k in 0..m {
            dz[k] = self.problem.params.rate(z[k], self.chi[k]);
        }
    }
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(invalid(
                "tolerance",
                format!("rtol = {rtol}, atol = {atol}"),
            ));
        }
        Ok(Self {
            rtol,
            atol,
            ..Default::default()
        })
    }

    pub fn integrate_with_stats(
        &self,
        problem: &Problem<'_>,
        ic: &SimState,
        grid: &SampleGrid,
        record: Record,
    ) -> Result<(Trajectory, AdaptiveStats)> {
        let sys = problem.system;
        let (n, m) = (sys.n_dof(), sys.n_hyst());
        let dim = 2 * n + m;
        let mut rhs = Rhs {
            problem,
            mass: sys.factor(0.0, 0.0)?,
            n,
            m,
            f: vec![0.0; n],
            tmp: vec![0.0; n],
            chi: vec![0.0; m],
        };
        let mut y: Vec<f64> =
            ic.q.iter()
                .chain(ic.v.iter())
                .chain(ic.z.iter())
                .copied()
                .collect();
        if y.len() != dim {
            return Err(Error::Dimension {
                context: "adaptive initial state",
                expected: dim,
                actual: y.len(),
            });
        }
        let mut k = vec![vec![0.0; dim]; 7];
        let mut ynew = vec![0.0; dim];
        let mut stage = vec![0.0; dim];
        let mut stats = AdaptiveStats::default();

        let mut traj = Trajectory {
            meta: TrajectoryMeta {
                scheme: "dopri5".into(),
                params: Some(*problem.params),
                ..Default::default()
            },
            ..Default::default()
        };
        let push = |traj: &mut Trajectory, t: f64, y: &[f64]| {
            traj.times.push(t);
            traj.tip.push(sys.output(&y[..n]));
            if record.q {
                traj.q.push(nalgebra::DVector::from_column_slice(&y[..n]));
            }
            if record.v {
                traj.v
                    .push(nalgebra::DVector::from_column_slice(&y[n..2 * n]));
            }
            if record.z {
                traj.z
                    .push(nalgebra::DVector::from_column_slice(&y[2 * n..]));
            }
        };

        let t0 = ic.t;
        let mut t = t0;
        push(&mut traj, t, &y);
        let h_cap = self.h_max.unwrap_or(grid.spacing());
        let mut h = (1e-6f64).min(h_cap);
        rhs.eval(t, &y, &mut k[0]);
        let mut last_reject = false;
        for out in 1..=grid.intervals {
            let target = t0 + grid.time(out);
            while t < target {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::Adaptive(format!(
                        "step budget of {} exhausted at t = {t}",
                        self.max_steps
                    )));
                }
                let mut hstep = h.min(h_cap);
                let hits_target = t + hstep >= target - 1e-14 * target.abs().max(1.0);
                if hits_target {
                    hstep = target - t;
                }
                for s in 1..7 {
                    for i in 0..dim {
                        let mut acc = 0.0;
                        for (j, kj) in k.iter().enumerate().take(s) {
                            acc += A[s][j] * kj[i];
                        }
                        stage[i] = y[i] + hstep * acc;
                    }
                    let (head, tail) = k.split_at_mut(s);
                    let _ = head;
                    rhs.eval(t + C[s] * hstep, &stage, &mut tail[0]);
                    if s == 6 {
                        ynew.copy_from_slice(&stage);
                    }
                }
                let mut err2 = 0.0;
                for i in 0..dim {
                    let mut e = 0.0;
                    for (s, ks) in k.iter().enumerate() {
                        e += E[s] * ks[i];
                    }
                    let sc = self.atol + self.rtol * y[i].abs().max(ynew[i].abs());
                    let r = hstep * e / sc;
                    err2 += r * r;
                }
                let err = (err2 / dim as f64).sqrt();
                if !err.is_finite() {
                    return Err(Error::NonFinite {
                        stage: "dopri5 stage",
                        t,
                    });
                }
                if err <= 1.0 {
                    stats.accepted += 1;
                    t = if hits_target { target } else { t + hstep };
                    std::mem::swap(&mut y, &mut ynew);
                    // first-same-as-last
                    let (first, rest) = k.split_at_mut(1);
                    first[0].copy_from_slice(&rest[5]);
                    let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
                    fac = fac.clamp(0.2, 5.0);
                    if last_reject {
                        fac = fac.min(1.0);
                    }
                    last_reject = false;
                    // keep the controller's step even when clipped to an output instant
                    if !hits_target || hstep >= h {
                        h = hstep * fac;
                    }
                } else {
                    stats.rejected += 1;
                    last_reject = true;
                    h = hstep * (0.9 * err.powf(-0.2)).max(0.1);
                    if h < 1e-15 * t.abs().max(1.0) {
                        return Err(Error::Adaptive(format!("step size underflow at t = {t}")));
                    }
                }
            }
            push(&mut traj, target, &y);
        }
        Ok((traj, stats))
    }
}

impl Integrator for Dopri5 {
    fn name(&self) -> &str {
        "dopri5"
    }

    fn integrate(
        &self,
        problem: &Problem<'_>,
        ic: &SimState,
        grid: &SampleGrid,
        record: Record,
    ) -> Result<Trajectory> {
        self.integrate_with_stats(problem, ic, grid, record)
            .map(|(traj, _)| traj)
    }
}
