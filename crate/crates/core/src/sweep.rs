//! Root finding for symmetric matrix functions A(ω) that decrease monotonically
//! (in the Loewner order) on each sweep interval.
//!
//! Both D(ω) between poles and K − ω²M have this property, so the number of
//! negative eigenvalues is nondecreasing in ω and jumps by exactly the
//! multiplicity at every root. The sweep brackets sign changes of det A on a grid,
//! bisects them, and then audits the eigenvalue count at the interval ends; roots
//! that produce no sign change (even multiplicity, or two roots in one grid cell)
//! are recovered by bisecting on the count itself.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::linalg::{negative_count, signed_log_det, SignedLogDet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FoundRoot {
    pub omega: f64,
    pub multiplicity: usize,
    /// False when the root was located by the eigenvalue-count audit only.
    pub sign_change: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepDiagnostics {
    /// Grid cells that hid roots from the sign test (even multiplicity or clustered roots).
    pub grid_too_coarse: Vec<(f64, f64)>,
    /// Sign-change brackets rejected because |det| grew under bisection.
    pub pole_crossings: Vec<f64>,
}

impl SweepDiagnostics {
    pub fn merge(&mut self, other: SweepDiagnostics) {
        self.grid_too_coarse.extend(other.grid_too_coarse);
        self.pole_crossings.extend(other.pole_crossings);
    }
}

pub(crate) type MatrixFn<'a> = dyn Fn(f64) -> DMatrix<f64> + Sync + 'a;

/// Splits `total` grid points over the intervals in proportion to their length.
fn allocate(intervals: &[(f64, f64)], total: usize) -> Vec<usize> {
    let len: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    intervals
        .iter()
        .map(|(a, b)| ((total as f64 * (b - a) / len).ceil() as usize).max(8))
        .collect()
}

fn width_ok(lo: f64, hi: f64, rel_tol: f64) -> bool {
    hi - lo <= rel_tol * 0.5 * (lo + hi).abs()
}

enum Bracket {
    Root(f64, f64),
    Pole(f64),
}

fn bisect(f: &MatrixFn, mut lo: f64, mut hi: f64, mut dlo: SignedLogDet, mut dhi: SignedLogDet, rel_tol: f64) -> Bracket {
    let initial = dlo.log_abs.max(dhi.log_abs);
    while !width_ok(lo, hi, rel_tol) {
        let mid = 0.5 * (lo + hi);
        let dm = signed_log_det(&f(mid));
        if dm.sign == 0.0 {
            return Bracket::Root(mid, mid);
        }
        if dm.sign == dlo.sign {
            lo = mid;
            dlo = dm;
        } else {
            hi = mid;
            dhi = dm;
        }
    }
    // A true root drives |det| toward zero; a pole crossing drives it up.
    if dlo.log_abs.max(dhi.log_abs) > initial {
        Bracket::Pole(0.5 * (lo + hi))
    } else {
        Bracket::Root(lo, hi)
    }
}

/// All (count-jump) points in (lo, hi) given the counts at the ends.
fn count_jumps(f: &MatrixFn, lo: f64, nlo: usize, hi: f64, nhi: usize, rel_tol: f64, out: &mut Vec<(f64, usize)>) {
    if nhi <= nlo {
        return;
    }
    if width_ok(lo, hi, rel_tol) {
        out.push((0.5 * (lo + hi), nhi - nlo));
        return;
    }
    let mid = 0.5 * (lo + hi);
    let nm = negative_count(&f(mid)).clamp(nlo, nhi);
    count_jumps(f, lo, nlo, mid, nm, rel_tol, out);
    count_jumps(f, mid, nm, hi, nhi, rel_tol, out);
}

/// Finds every root of det A(ω) inside the given intervals.
pub(crate) fn sweep_monotone(
    intervals: &[(f64, f64)],
    grid_points: usize,
    rel_tol: f64,
    f: &MatrixFn,
) -> (Vec<FoundRoot>, SweepDiagnostics) {
    let mut diagnostics = SweepDiagnostics::default();
    let intervals: Vec<(f64, f64)> = intervals.iter().copied().filter(|(a, b)| b > a).collect();
    if intervals.is_empty() {
        return (Vec::new(), diagnostics);
    }
    let counts = allocate(&intervals, grid_points);

    let grids: Vec<Vec<f64>> = intervals
        .iter()
        .zip(&counts)
        .map(|(&(a, b), &n)| (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
        .collect();
    let flat: Vec<f64> = grids.iter().flatten().copied().collect();
    let dets: Vec<SignedLogDet> = flat.par_iter().map(|&w| signed_log_det(&f(w))).collect();

    let mut roots = Vec::new();
    let mut offset = 0;
    for grid in &grids {
        let d = &dets[offset..offset + grid.len()];
        offset += grid.len();

        let mut brackets = Vec::new();
        let mut exact = Vec::new();
        for i in 0..grid.len() {
            if d[i].sign == 0.0 {
                exact.push(grid[i]);
            } else if i + 1 < grid.len() && d[i + 1].sign != 0.0 && d[i].sign != d[i + 1].sign {
                brackets.push(i);
            }
        }
        let results: Vec<Bracket> = brackets
            .par_iter()
            .map(|&i| bisect(f, grid[i], grid[i + 1], d[i], d[i + 1], rel_tol))
            .collect();

        let mut local: Vec<FoundRoot> = Vec::new();
        let mut located: Vec<(f64, f64)> = exact.iter().map(|&w| (w, w)).collect();
        for r in results {
            match r {
                Bracket::Root(lo, hi) => located.push((lo, hi)),
                Bracket::Pole(w) => {
                    log::debug!("discarding pole crossing near omega = {w}");
                    diagnostics.pole_crossings.push(w);
                }
            }
        }
        let found: Vec<FoundRoot> = located
            .par_iter()
            .map(|&(lo, hi)| {
                let w = 0.5 * (lo + hi);
                let h = (hi - lo).max(rel_tol * w);
                let m = negative_count(&f(w + h)).saturating_sub(negative_count(&f(w - h)));
                FoundRoot {
                    omega: w,
                    multiplicity: m.max(1),
                    sign_change: true,
                }
            })
            .collect();
        local.extend(found);

        // Inertia audit over the whole interval.
        let (a, b) = (grid[0], grid[grid.len() - 1]);
        let na = negative_count(&f(a));
        let nb = negative_count(&f(b));
        let expected = nb.saturating_sub(na);
        let have: usize = local.iter().map(|r| r.multiplicity).sum();
        if have < expected {
            let mut jumps = Vec::new();
            count_jumps(f, a, na, b, nb, rel_tol, &mut jumps);
            for (w, m) in jumps {
                let known = local
                    .iter()
                    .any(|r| r.sign_change && (r.omega - w).abs() <= 4.0 * rel_tol * w.abs());
                if known {
                    continue;
                }
                let cell = grid.windows(2).find(|c| c[0] <= w && w <= c[1]).map(|c| (c[0], c[1])).unwrap_or((a, b));
                log::warn!(
                    "root near omega = {w} (multiplicity {m}) has no determinant sign change on cell ({}, {})",
                    cell.0,
                    cell.1
                );
                diagnostics.grid_too_coarse.push(cell);
                local.push(FoundRoot {
                    omega: w,
                    multiplicity: m,
                    sign_change: false,
                });
            }
        } else if have > expected {
            log::warn!("sign sweep found {have} roots but the eigenvalue count changes by {expected} on ({a}, {b})");
        }
        roots.extend(local);
    }
    roots.sort_by(|x, y| x.omega.total_cmp(&y.omega));
    (roots, diagnostics)
}
