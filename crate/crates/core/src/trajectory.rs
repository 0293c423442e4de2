//! Time-stamped simulation output and its CSV form.
//!
//! CSV layout: header `t,y_tip[,...]`, one row per sample, values written
//! with 17 significant digits (`{:.16e}`), ',' separator, '.' decimal, LF line
//! endings.

use std::io::{BufRead, Write};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hysteresis::BoucWenParams;

/// Which state blocks to keep besides the tip displacement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Record {
    pub q: bool,
    pub v: bool,
    pub z: bool,
}

impl Record {
    pub const TIP_ONLY: Record = Record {
        q: false,
        v: false,
        z: false,
    };
    pub const ALL: Record = Record {
        q: true,
        v: true,
        z: true,
    };
}

/// Uniform output instants `t_k = k t_end / intervals`, `k = 0..=intervals`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub t_end: f64,
    pub intervals: usize,
}

impl SampleGrid {
    pub fn new(t_end: f64, intervals: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(crate::error::invalid(
                "t_end",
                format!("must be > 0, got {t_end}"),
            ));
        }
        if intervals == 0 {
            return Err(crate::error::invalid(
                "intervals",
                "at least one output interval",
            ));
        }
        Ok(Self { t_end, intervals })
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.t_end / self.intervals as f64
    }

    pub fn spacing(&self) -> f64 {
        self.t_end / self.intervals as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryMeta {
    pub scheme: String,
    pub h: Option<f64>,
    pub n_elements: Option<usize>,
    pub params: Option<BoucWenParams>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub tip: Vec<f64>,
    pub q: Vec<DVector<f64>>,
    pub v: Vec<DVector<f64>>,
    pub z: Vec<DVector<f64>>,
    pub meta: TrajectoryMeta,
}

/// Relative tolerance used to match sample instants across trajectories.
const TIME_MATCH_RTOL: f64 = 1e-9;

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the sample at instant `t`.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let scale = self.times.last().map_or(1.0, |x| x.abs().max(1.0));
        let tol = TIME_MATCH_RTOL * scale;
        let i = self.times.partition_point(|&s| s < t - tol);
        match self.times.get(i) {
            Some(&s) if (s - t).abs() <= tol => Ok(i),
            _ => Err(Error::MissingInstant(t)),
        }
    }

    /// Tip displacement at a sampled instant.
    pub fn tip_at(&self, t: f64) -> Result<f64> {
        Ok(self.tip[self.index_of(t)?])
    }

    /// Constant sample spacing, if the time stamps are uniform.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt);
        uniform.then_some(dt)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_columns_csv(w, &["t", "y_tip"], &[&self.times, &self.tip])
    }

    /// Reads the `t` and `y_tip` columns of a trajectory CSV; extra columns are ignored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty trajectory CSV".into()))??;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 2 || cols[0] != "t" || cols[1] != "y_tip" {
            return Err(Error::Format(format!("unexpected header `{header}`")));
        }
        let mut traj = Trajectory::default();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = || -> Result<f64> {
                fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Format(format!("bad row {}: `{line}`", lineno + 2)))
            };
            traj.times.push(next()?);
            traj.tip.push(next()?);
        }
        Ok(traj)
    }
}

/// Writes equally long columns as CSV in the fixed numeric format.
pub fn write_columns_csv<W: Write>(mut w: W, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n) || header.len() != columns.len() {
        return Err(Error::Format("ragged CSV columns".into()));
    }
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_f64(c[i]));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        Trajectory {
            times: vec![0.0, 0.25, 0.5],
            tip: vec![1.0, -0.1, 1.0 / 3.0],
            ..Default::default()
        }
    }

    #[test]
    fn csv_is_bit_exact() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "t,y_tip\n\
             0.0000000000000000e0,1.0000000000000000e0\n\
             2.5000000000000000e-1,-1.0000000000000001e-1\n\
             5.0000000000000000e-1,3.3333333333333331e-1\n"
        );
        let back = Trajectory::read_csv(&buf[..]).unwrap();
        assert_eq!(back.times, sample().times);
        assert_eq!(back.tip, sample().tip);
    }

    #[test]
    fn instant_lookup() {
        let t = sample();
        assert_eq!(t.index_of(0.25).unwrap(), 1);
        assert_eq!(t.index_of(0.5 + 1e-13).unwrap(), 2);
        assert!(t.index_of(0.3).is_err());
        assert_eq!(t.uniform_spacing(), Some(0.25));
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(Trajectory::read_csv(&b"time,y\n"[..]).is_err());
        assert!(Trajectory::read_csv(&b"t,y_tip\n1.0,abc\n"[..]).is_err());
    }

    #[test]
    fn grid_instants() {
        let g = SampleGrid::new(1.0, 128).unwrap();
        assert_eq!(g.time(64), 0.5);
        assert!(SampleGrid::new(0.0, 4).is_err());
        assert!(SampleGrid::new(1.0, 0).is_err());
    }
}
