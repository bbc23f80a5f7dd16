//! Natural frequencies and modes from the network Laplacian, including the
//! resonant case where some rods sit exactly at ωτ = nπ.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::assembly::{assemble_laplacian_on, assemble_rods, JointVector, POLE_GUARD};
use crate::error::{Result, TrussError};
use crate::layout::{DofLayout, Mechanism};
use crate::linalg;
use crate::model::Truss;
use crate::sweep::{sweep_monotone, SweepDiagnostics};

/// Relative singular-value cutoff for null-space modes.
pub const MODE_TOL: f64 = 1e-7;
/// Relative residual tolerance of the resonant feasibility test.
pub const FEAS_TOL: f64 = 1e-8;
/// Default relative root tolerance.
pub const ROOT_TOL: f64 = 1e-10;
/// Default grid density per unit of ωτ_min.
pub const GRID_DENSITY: f64 = 2000.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyWindow {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Total grid points over the window.
    pub grid_points: usize,
    /// Relative root tolerance (bisection stops at width ≤ root_tol·ω).
    pub root_tol: f64,
    /// Pole exclusion in ωτ radians.
    pub pole_guard: f64,
}

impl FrequencyWindow {
    pub fn new(omega_min: f64, omega_max: f64, grid_points: usize) -> Result<Self> {
        let w = FrequencyWindow {
            omega_min,
            omega_max,
            grid_points,
            root_tol: ROOT_TOL,
            pole_guard: POLE_GUARD,
        };
        w.validate()?;
        Ok(w)
    }

    /// Window given in units of ωτ_min of `truss`, with the default grid density.
    pub fn scaled(truss: &Truss, x_min: f64, x_max: f64) -> Result<Self> {
        let tau = truss.min_transit_time();
        let points = (GRID_DENSITY * (x_max - x_min)).ceil().max(2.0) as usize;
        Self::new(x_min / tau, x_max / tau, points)
    }

    /// ωτ_min ∈ (0.05, 1.2π).
    pub fn default_for(truss: &Truss) -> Self {
        Self::scaled(truss, 0.05, 1.2 * PI).expect("default window is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_min.is_finite()) {
            return Err(TrussError::InvalidWindow(format!("omega_min must be positive, got {}", self.omega_min)));
        }
        if !(self.omega_max > self.omega_min && self.omega_max.is_finite()) {
            return Err(TrussError::InvalidWindow(format!(
                "omega_max ({}) must exceed omega_min ({})",
                self.omega_max, self.omega_min
            )));
        }
        if self.grid_points < 2 {
            return Err(TrussError::InvalidWindow("grid_points must be at least 2".into()));
        }
        if !(self.root_tol > 0.0 && self.pole_guard >= 0.0) {
            return Err(TrussError::InvalidWindow("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Regular,
    Resonant,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::Regular => "regular",
            ModeKind::Resonant => "resonant",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaturalFrequency {
    pub omega: f64,
    pub kind: ModeKind,
    pub multiplicity: usize,
    pub resonant_order: Option<i64>,
}

/// Repeats each frequency by its multiplicity.
pub fn expand_multiplicity(freqs: &[NaturalFrequency]) -> Vec<f64> {
    freqs.iter().flat_map(|f| std::iter::repeat(f.omega).take(f.multiplicity)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeResult {
    pub omega: f64,
    pub kind: ModeKind,
    /// Per free joint, global coordinates; unit norm overall, first nonzero component positive.
    pub displacements: Vec<JointVector>,
    /// Per anchored joint, on the same scale as `displacements`.
    pub anchor_forces: Vec<JointVector>,
    pub resonant_order: Option<i64>,
}

impl ModeResult {
    /// Concatenated displacement vector.
    pub fn displacement_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.displacements.iter().map(|j| j.vector.len()).sum(),
            self.displacements.iter().flat_map(|j| j.vector.iter().copied()),
        )
    }

    pub fn force_vector(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.anchor_forces.iter().map(|j| j.vector.len()).sum(),
            self.anchor_forces.iter().flat_map(|j| j.vector.iter().copied()),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleRod {
    pub rod: usize,
    /// ωτ = nπ for this rod.
    pub n: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pole {
    pub omega: f64,
    pub rods: Vec<PoleRod>,
}

/// Rod resonances in the window, grouped when several rods share one.
pub fn pole_set(truss: &Truss, window: &FrequencyWindow) -> Vec<Pole> {
    let mut all: Vec<(f64, PoleRod)> = Vec::new();
    for r in 0..truss.rods().len() {
        let tau = truss.properties(r).transit_time;
        let first = (window.omega_min * tau / PI).ceil().max(1.0) as i64;
        let last = (window.omega_max * tau / PI).floor() as i64;
        for n in first..=last {
            let w = n as f64 * PI / tau;
            if w >= window.omega_min && w <= window.omega_max {
                all.push((w, PoleRod { rod: r, n }));
            }
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut poles: Vec<Pole> = Vec::new();
    for (w, pr) in all {
        let tau = truss.properties(pr.rod).transit_time;
        match poles.last_mut() {
            Some(p) if (w - p.omega) * tau <= window.pole_guard.max(1e-12 * w * tau) => p.rods.push(pr),
            _ => poles.push(Pole { omega: w, rods: vec![pr] }),
        }
    }
    poles
}

/// Pole-free sub-intervals of the window.
fn regular_intervals(truss: &Truss, window: &FrequencyWindow) -> Vec<(f64, f64)> {
    let mut cuts: Vec<(f64, f64)> = Vec::new();
    for p in pole_set(truss, window) {
        for pr in &p.rods {
            let tau = truss.properties(pr.rod).transit_time;
            let w = pr.n as f64 * PI / tau;
            let half = 2.0 * window.pole_guard / tau;
            cuts.push((w - half, w + half));
        }
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut start = window.omega_min;
    for (lo, hi) in cuts {
        if lo > start {
            out.push((start, lo.min(window.omega_max)));
        }
        start = start.max(hi);
    }
    if start < window.omega_max {
        out.push((start, window.omega_max));
    }
    out.retain(|(a, b)| b > a);
    out
}

/// Everything found by a Laplacian sweep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub frequencies: Vec<NaturalFrequency>,
    pub mechanisms: Vec<Mechanism>,
    pub diagnostics: SweepDiagnostics,
}

/// Full Laplacian sweep: regular roots between poles plus resonant modes at poles.
pub fn sweep_laplacian(truss: &Truss, window: &FrequencyWindow, reduce_anchors: bool) -> Result<SweepReport> {
    window.validate()?;
    let layout = DofLayout::spanning(truss, reduce_anchors);
    let eval = |w: f64| {
        assemble_laplacian_on(truss, w, &layout, 0.0)
            .expect("sweep points lie off the poles")
            .entries
    };
    let intervals = regular_intervals(truss, window);
    let (roots, diagnostics) = sweep_monotone(&intervals, window.grid_points, window.root_tol, &eval);

    let mut frequencies: Vec<NaturalFrequency> = roots
        .into_iter()
        .map(|r| NaturalFrequency {
            omega: r.omega,
            kind: ModeKind::Regular,
            multiplicity: r.multiplicity,
            resonant_order: None,
        })
        .collect();
    for pole in pole_set(truss, window) {
        let modes = resonant_mode_check(truss, &pole, reduce_anchors)?;
        if !modes.is_empty() {
            frequencies.push(NaturalFrequency {
                omega: pole.omega,
                kind: ModeKind::Resonant,
                multiplicity: modes.len(),
                resonant_order: Some(pole.rods[0].n),
            });
        }
    }
    frequencies.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    frequencies.dedup_by(|b, a| (b.omega - a.omega).abs() <= window.root_tol * a.omega && b.kind == a.kind);
    Ok(SweepReport {
        frequencies,
        mechanisms: layout.mechanisms().to_vec(),
        diagnostics,
    })
}

/// Natural frequencies in the window (modes are not computed).
pub fn find_natural_frequencies(truss: &Truss, window: &FrequencyWindow, reduce_anchors: bool) -> Result<Vec<NaturalFrequency>> {
    Ok(sweep_laplacian(truss, window, reduce_anchors)?.frequencies)
}

/// Normalizes a layout-space mode, lifts it to global coordinates and attaches anchor forces.
fn package_mode(
    truss: &Truss,
    layout: &DofLayout,
    omega: f64,
    kind: ModeKind,
    resonant_order: Option<i64>,
    x: &DVector<f64>,
    forces: &DVector<f64>,
) -> ModeResult {
    let joints = layout.active_joints();
    let dim = truss.dimension();
    let mut flat = DVector::zeros(joints.len() * dim);
    for (k, &j) in joints.iter().enumerate() {
        flat.rows_mut(k * dim, dim).copy_from(&layout.lift(j, x));
    }
    let norm = flat.norm();
    let mut scale = 1.0 / norm;
    let mut signed = flat.clone() * scale;
    linalg::fix_sign(&mut signed);
    if signed.dot(&flat) < 0.0 {
        scale = -scale;
    }
    let displacements = joints
        .iter()
        .enumerate()
        .map(|(k, &j)| JointVector {
            joint: truss.joints()[j].id.clone(),
            vector: signed.rows(k * dim, dim).iter().copied().collect(),
        })
        .collect();
    let anchor_forces = anchored_joints(truss)
        .enumerate()
        .map(|(k, j)| JointVector {
            joint: truss.joints()[j].id.clone(),
            vector: forces.rows(k * dim, dim).iter().map(|f| f * scale).collect(),
        })
        .collect();
    ModeResult {
        omega,
        kind,
        displacements,
        anchor_forces,
        resonant_order,
    }
}

fn anchored_joints(truss: &Truss) -> impl Iterator<Item = usize> + '_ {
    truss.joints().iter().enumerate().filter(|(_, j)| j.anchored).map(|(i, _)| i)
}

/// Rows of `full` (standard unreduced layout) at anchored joints applied to `u_global`.
fn anchor_rows(truss: &Truss, full: &DMatrix<f64>, u_global: &DVector<f64>) -> DVector<f64> {
    let dim = truss.dimension();
    let anchors: Vec<usize> = anchored_joints(truss).collect();
    let mut out = DVector::zeros(anchors.len() * dim);
    for (k, &a) in anchors.iter().enumerate() {
        let rows = full.rows(a * dim, dim);
        out.rows_mut(k * dim, dim).copy_from(&(rows * u_global));
    }
    out
}

/// Null-space modes of D(ω*) at a regular root.
pub fn extract_modes(truss: &Truss, omega_star: f64, reduce_anchors: bool) -> Result<Vec<ModeResult>> {
    let layout = DofLayout::spanning(truss, reduce_anchors);
    let d = assemble_laplacian_on(truss, omega_star, &layout, POLE_GUARD)?;
    let svd = d.entries.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let picked: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= MODE_TOL * smax)
        .collect();
    if picked.is_empty() {
        return Err(TrussError::NotARoot {
            omega: omega_star,
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    let full = assemble_laplacian_on(truss, omega_star, &DofLayout::standard(truss, false), 0.0)?.entries;
    Ok(picked
        .into_iter()
        .map(|i| {
            let x = v_t.row(i).transpose();
            let u = layout.lift_all(&x);
            let f = anchor_rows(truss, &full, &u);
            package_mode(truss, &layout, omega_star, ModeKind::Regular, None, &x, &f)
        })
        .collect())
}

/// Anchor reaction forces of a mode: full-D rows at anchored joints times the displacements.
pub fn anchor_forces(truss: &Truss, mode: &ModeResult) -> Result<Vec<JointVector>> {
    if mode.kind == ModeKind::Resonant {
        return Ok(mode.anchor_forces.clone());
    }
    let dim = truss.dimension();
    let mut u = DVector::zeros(dim * truss.joints().len());
    for jv in &mode.displacements {
        let j = truss.joint_index(&jv.joint).ok_or_else(|| TrussError::Unknown {
            kind: "joint",
            name: jv.joint.clone(),
        })?;
        for (k, v) in jv.vector.iter().enumerate() {
            u[j * dim + k] = *v;
        }
    }
    let full = assemble_laplacian_on(truss, mode.omega, &DofLayout::standard(truss, false), 0.0)?.entries;
    let f = anchor_rows(truss, &full, &u);
    Ok(anchored_joints(truss)
        .enumerate()
        .map(|(k, j)| JointVector {
            joint: truss.joints()[j].id.clone(),
            vector: f.rows(k * dim, dim).iter().copied().collect(),
        })
        .collect())
}

/// Linear operators of the resonance limit at a pole.
#[derive(Clone, Debug)]
pub struct ResonantConstraintSystem {
    /// One row per resonant rod: (−1)ⁿ ê·w_μ − ê·w_ν.
    pub constraint_matrix: DMatrix<f64>,
    /// Joint forces from non-resonant rods at the pole frequency.
    pub nonresonant_force_operator: DMatrix<f64>,
    /// Limit forces Σ (Λω/τ) g gᵀ acting on the frequency derivative of the displacements.
    pub limit_force_operator: DMatrix<f64>,
    pub layout: DofLayout,
}

/// Per resonant rod: weight Λω/τ and the force-direction vector g in a given layout.
fn limit_vectors(truss: &Truss, pole: &Pole, layout: &DofLayout) -> Vec<(f64, DVector<f64>)> {
    pole.rods
        .iter()
        .map(|pr| {
            let p = truss.properties(pr.rod);
            let (mu, nu) = truss.endpoints(pr.rod);
            let parity = if pr.n % 2 == 0 { 1.0 } else { -1.0 };
            let mut g = DVector::zeros(layout.size());
            for (j, s) in [(mu, 1.0), (nu, -parity)] {
                if let (Some((off, _)), Some(pe)) = (layout.block(j), layout.project(j, &p.unit_vector)) {
                    g.rows_mut(off, pe.len()).axpy(s, &pe, 1.0);
                }
            }
            (p.line_impedance * pole.omega / p.transit_time, g)
        })
        .collect()
}

pub fn resonant_system(truss: &Truss, pole: &Pole, layout: &DofLayout) -> ResonantConstraintSystem {
    let resonant: Vec<usize> = pole.rods.iter().map(|p| p.rod).collect();
    let omega = pole.omega;
    let nonresonant_force_operator = assemble_rods(truss, layout, |r| {
        if resonant.contains(&r) {
            (0.0, 0.0)
        } else {
            let p = truss.properties(r);
            let x = omega * p.transit_time;
            let s = p.line_impedance * omega;
            (s / x.tan(), s / x.sin())
        }
    });
    let lv = limit_vectors(truss, pole, layout);
    let n = layout.size();
    let mut constraint_matrix = DMatrix::zeros(lv.len(), n);
    let mut limit_force_operator = DMatrix::zeros(n, n);
    for (row, ((wt, g), pr)) in lv.iter().zip(&pole.rods).enumerate() {
        let parity = if pr.n % 2 == 0 { 1.0 } else { -1.0 };
        // g = (−1)ⁿ c
        constraint_matrix.row_mut(row).copy_from(&(g.transpose() * parity));
        limit_force_operator.ger(*wt, g, g, 1.0);
    }
    ResonantConstraintSystem {
        constraint_matrix,
        nonresonant_force_operator,
        limit_force_operator,
        layout: layout.clone(),
    }
}

/// Force-free modes at a rod resonance ωτ = nπ.
///
/// Candidates satisfy the end-motion constraint of every resonant rod; a candidate
/// is kept when the forces of the non-resonant rods can be balanced by the finite
/// limit forces of the resonant rods.
pub fn resonant_mode_check(truss: &Truss, pole: &Pole, reduce_anchors: bool) -> Result<Vec<ModeResult>> {
    let layout = DofLayout::spanning(truss, reduce_anchors);
    let sys = resonant_system(truss, pole, &layout);
    let n = layout.size();
    if n == 0 {
        return Ok(Vec::new());
    }
    let candidates = linalg::null_space(&sys.constraint_matrix, 1e-10, 1e-14);
    if candidates.ncols() == 0 {
        return Ok(Vec::new());
    }
    let g = DMatrix::from_columns(&limit_vectors(truss, pole, &layout).into_iter().map(|(_, g)| g).collect::<Vec<_>>());
    let q = linalg::range_space(&g, 1e-10);
    let projector = DMatrix::<f64>::identity(n, n) - &q * q.transpose();
    let dnr = &sys.nonresonant_force_operator;
    let dnr_norm = linalg::singular_values(dnr).first().copied().unwrap_or(0.0);
    let residual = &projector * dnr * &candidates;
    let y = linalg::null_space(&residual, 0.0, FEAS_TOL * dnr_norm);
    if y.ncols() == 0 {
        return Ok(Vec::new());
    }
    let modes = &candidates * y;

    // Anchor forces need the full (unreduced, standard) operators.
    let full_layout = DofLayout::standard(truss, false);
    let full_sys = resonant_system(truss, pole, &full_layout);
    let full_g = limit_vectors(truss, pole, &full_layout);
    let l_pinv = sys
        .limit_force_operator
        .clone()
        .pseudo_inverse(1e-10 * linalg::max_abs(&sys.limit_force_operator).max(f64::MIN_POSITIVE))
        .expect("pseudo-inverse with nonnegative epsilon");
    let reduced_g = limit_vectors(truss, pole, &layout);

    let order = pole.rods.first().map(|p| p.n);
    Ok(modes
        .column_iter()
        .map(|col| {
            let x = col.into_owned();
            let dw = -(&l_pinv * (dnr * &x));
            let u = layout.lift_all(&x);
            let mut f = anchor_rows(truss, &full_sys.nonresonant_force_operator, &u);
            let dim = truss.dimension();
            for ((wt, g_red), (_, g_full)) in reduced_g.iter().zip(&full_g) {
                let s = g_red.dot(&dw);
                for (k, a) in anchored_joints(truss).enumerate() {
                    let ga = g_full.rows(a * dim, dim);
                    let mut fk = f.rows_mut(k * dim, dim);
                    fk.axpy(wt * s, &ga, 1.0);
                }
            }
            package_mode(truss, &layout, pole.omega, ModeKind::Resonant, order, &x, &f)
        })
        .collect())
}

/// Modes at (or within ±1e-6 relative of) `omega`: refines to the nearest root first,
/// routing through the resonant check when a pole is that close.
pub fn modes_near(truss: &Truss, omega: f64, reduce_anchors: bool) -> Result<Vec<ModeResult>> {
    let rel = 1e-6;
    let window = FrequencyWindow::new(omega * (1.0 - rel), omega * (1.0 + rel), 64)?;
    let poles = pole_set(truss, &window);
    if let Some(pole) = poles
        .iter()
        .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
    {
        let modes = resonant_mode_check(truss, pole, reduce_anchors)?;
        if !modes.is_empty() {
            return Ok(modes);
        }
    }
    let report = sweep_laplacian(truss, &window, reduce_anchors)?;
    let nearest = report
        .frequencies
        .iter()
        .filter(|f| f.kind == ModeKind::Regular)
        .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()));
    match nearest {
        Some(f) => extract_modes(truss, f.omega, reduce_anchors),
        None => {
            let layout = DofLayout::spanning(truss, reduce_anchors);
            let ratio = match assemble_laplacian_on(truss, omega, &layout, 0.0) {
                Ok(d) => linalg::rcond(&d.entries),
                Err(_) => f64::NAN,
            };
            Err(TrussError::NotARoot { omega, ratio })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{load_truss, unit_builtin, BuiltinStructure};

    #[test]
    fn square_poles() {
        let sq = unit_builtin(BuiltinStructure::Square);
        let w = FrequencyWindow::new(0.1, 7.0, 100).unwrap();
        let poles: Vec<f64> = pole_set(&sq, &w).iter().map(|p| p.omega).collect();
        let s2 = 2f64.sqrt();
        let expected = [PI / s2, PI, s2 * PI, 2.0 * PI, 3.0 * PI / s2];
        assert_eq!(poles.len(), expected.len());
        for (a, b) in poles.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(pole_set(&sq, &w)[1].rods.len(), 4);
    }

    #[test]
    fn bridge_shared_poles() {
        let br = unit_builtin(BuiltinStructure::Bridge);
        let w = FrequencyWindow::new(0.1, 7.0, 100).unwrap();
        let poles = pole_set(&br, &w);
        assert_eq!(poles.len(), 2);
        assert!(poles.iter().all(|p| p.rods.len() == 7));
    }

    #[test]
    fn incommensurate_poles_do_not_group() {
        let doc = r#"{"dimension": 2, "dimensionless": true,
            "joints": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0]},
                       {"id": "c", "position": [1, 1.7320508075688772]}],
            "rods": [{"joints": ["a", "b"], "area": 1}, {"joints": ["b", "c"], "area": 1}]}"#;
        let t = load_truss(doc).unwrap();
        let w = FrequencyWindow::new(0.1, 20.0, 100).unwrap();
        assert!(pole_set(&t, &w).iter().all(|p| p.rods.len() == 1));
    }

    #[test]
    fn empty_window_below_lowest_root() {
        let br = unit_builtin(BuiltinStructure::Bridge);
        let w = FrequencyWindow::new(0.1, 0.6, 1000).unwrap();
        assert!(find_natural_frequencies(&br, &w, true).unwrap().is_empty());
    }

    #[test]
    fn invalid_window() {
        assert!(FrequencyWindow::new(2.0, 1.0, 10).is_err());
        assert!(FrequencyWindow::new(0.0, 1.0, 10).is_err());
        assert!(FrequencyWindow::new(0.1, 1.0, 1).is_err());
    }

    #[test]
    fn not_a_root() {
        let br = unit_builtin(BuiltinStructure::Bridge);
        assert!(matches!(extract_modes(&br, 0.5, true), Err(TrussError::NotARoot { .. })));
    }

    #[test]
    fn two_rod_partial_resonance() {
        // Collinear a-b-c with τ_ab = 1, τ_bc = √3; at ω = π only ab resonates.
        // Constraint (n = 1): −u_a − u_b = 0 along x. Joint c free, rod bc non-resonant:
        // its forces must be absorbed by the limit force direction g = (1, 1) at (a, b),
        // which forces u_c = 0 and u_b = 0 on rod bc's dynamic stiffness unless
        // cot/csc conspire; they do not here, so no mode exists.
        let doc = r#"{"dimension": 2, "dimensionless": true,
            "joints": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0]},
                       {"id": "c", "position": [2.7320508075688772, 0]}],
            "rods": [{"joints": ["a", "b"], "area": 1}, {"joints": ["b", "c"], "area": 1}]}"#;
        let t = load_truss(doc).unwrap();
        let pole = Pole { omega: PI, rods: vec![PoleRod { rod: 0, n: 1 }] };
        assert!(resonant_mode_check(&t, &pole, false).unwrap().is_empty());

        // A single free rod at its first resonance has the antisymmetric mode u_a = −u_b.
        let single = load_truss(
            r#"{"dimension": 2, "dimensionless": true,
            "joints": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0]}],
            "rods": [{"joints": ["a", "b"], "area": 1}]}"#,
        )
        .unwrap();
        let modes = resonant_mode_check(&single, &pole, false).unwrap();
        assert_eq!(modes.len(), 1);
        let u = modes[0].displacement_vector();
        assert!((u[0] + u[2]).abs() < 1e-12 && u[1] == 0.0);
    }
}
