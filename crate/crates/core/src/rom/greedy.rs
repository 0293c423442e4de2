//! Greedy row selection by modified Gram-Schmidt on the rows of Z.

use rayon::prelude::*;

use super::snapshots::SnapshotSet;
use crate::error::{invalid, Result};

/// Relative margin under which two row norms count as tied; ties go to the
/// lower original index.
pub const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyOptions {
    /// Maximum number of rows to select.
    pub max_rows: usize,
    /// Stop once the residual Frobenius norm falls below this fraction of
    /// the initial one. `None` selects exactly `max_rows` rows.
    pub epsilon: Option<f64>,
    /// Rows whose residual norm is below `rank_tol` times the largest initial
    /// row norm are treated as numerically dependent.
    pub rank_tol: f64,
}

impl GreedyOptions {
    pub fn fixed(max_rows: usize) -> Self {
        Self {
            max_rows,
            epsilon: None,
            rank_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedySelection {
    /// Original row indices (0-based) in selection order.
    pub indices: Vec<usize>,
    /// Residual Frobenius norm of the unselected rows after `k` selections,
    /// `k = 0..=indices.len()`.
    pub residual_norms: Vec<f64>,
    /// Set when fewer rows than requested were returned because the
    /// remaining rows are numerically dependent on the selected ones.
    pub rank_deficient: bool,
}

/// Row-major view used by the selection loop.
struct Rows<'a> {
    data: &'a mut [f64],
    cols: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn select(rows: Rows<'_>, opts: &GreedyOptions) -> Result<GreedySelection> {
    let Rows { data, cols } = rows;
    let n_rows = data.len().checked_div(cols).unwrap_or(0);
    if opts.max_rows > n_rows {
        return Err(invalid(
            "m",
            format!("cannot select {} of {n_rows} rows", opts.max_rows),
        ));
    }
    if let Some(eps) = opts.epsilon {
        if !(0.0..1.0).contains(&eps) {
            return Err(invalid(
                "epsilon_greedy",
                format!("must lie in [0, 1), got {eps}"),
            ));
        }
    }
    let mut norms2: Vec<f64> = data.par_chunks(cols).map(|r| dot(r, r)).collect();
    let mut selected = vec![false; n_rows];
    let max_initial = norms2.iter().cloned().fold(0.0, f64::max).sqrt();
    let total = |norms2: &[f64], selected: &[bool]| -> f64 {
        norms2
            .iter()
            .zip(selected)
            .filter(|(_, s)| !**s)
            .map(|(n, _)| n)
            .sum::<f64>()
            .sqrt()
    };
    let initial = total(&norms2, &selected);
    let mut out = GreedySelection {
        indices: Vec::with_capacity(opts.max_rows),
        residual_norms: vec![initial],
        rank_deficient: false,
    };
    let mut pivot = vec![0.0; cols];
    while out.indices.len() < opts.max_rows {
        if let Some(eps) = opts.epsilon {
            if *out.residual_norms.last().unwrap() <= eps * initial {
                break;
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, &n2) in norms2.iter().enumerate() {
            if selected[i] {
                continue;
            }
            let n = n2.sqrt();
            match best {
                Some((_, b)) if n <= b * (1.0 + TIE_RTOL) => {}
                _ => best = Some((i, n)),
            }
        }
        let Some((j, norm)) = best else { break };
        if norm <= opts.rank_tol * max_initial || norm == 0.0 {
            out.rank_deficient = true;
            break;
        }
        selected[j] = true;
        let row = &mut data[j * cols..(j + 1) * cols];
        row.iter_mut().for_each(|x| *x /= norm);
        pivot.copy_from_slice(row);
        norms2[j] = 1.0;
        let pivot = &pivot;
        data.par_chunks_mut(cols)
            .zip(norms2.par_iter_mut())
            .zip(selected.par_iter())
            .for_each(|((r, n2), &done)| {
                if done {
                    return;
                }
                let c = dot(r, pivot);
                r.iter_mut().zip(pivot).for_each(|(x, p)| *x -= c * p);
                *n2 = dot(r, r);
            });
        out.indices.push(j);
        out.residual_norms.push(total(&norms2, &selected));
    }
    Ok(out)
}

/// Greedy selection that overwrites `z` with the partially orthogonalised
/// rows. Selected rows end up orthonormal.
pub fn greedy_select_in_place(
    z: &mut SnapshotSet,
    opts: &GreedyOptions,
) -> Result<GreedySelection> {
    let cols = z.cols();
    select(
        Rows {
            data: z.data_mut(),
            cols,
        },
        opts,
    )
}

/// Greedy selection on a row-major `rows x cols` buffer, leaving it intact.
pub fn greedy_select(data: &[f64], cols: usize, opts: &GreedyOptions) -> Result<GreedySelection> {
    if cols == 0 || !data.len().is_multiple_of(cols) {
        return Err(invalid(
            "Z",
            "buffer length is not a multiple of the column count",
        ));
    }
    let mut work = data.to_vec();
    select(
        Rows {
            data: &mut work,
            cols,
        },
        opts,
    )
}
