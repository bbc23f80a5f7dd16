//! Network Laplacian D(ω), static stiffness K, and forced response.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, TrussError};
use crate::layout::DofLayout;
use crate::linalg;
use crate::model::{RodProperties, Truss};

/// Distance (in ωτ radians) from a rod pole inside which assembly refuses.
pub const POLE_GUARD: f64 = 1e-5;

/// Reciprocal condition number below which the forced response is undefined.
pub const RCOND_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RodSpectralFactors {
    /// cot(ωτ)
    pub cot_term: f64,
    /// csc(ωτ)
    pub csc_term: f64,
    /// cot(ωτ) / Λ
    pub eta: f64,
    /// min over n of |ωτ − nπ|
    pub pole_distance: f64,
    /// The n attaining `pole_distance`.
    pub nearest_pole: i64,
}

pub fn rod_factors(props: &RodProperties, omega: f64) -> RodSpectralFactors {
    let x = omega * props.transit_time;
    let n = (x / PI).round();
    let (s, c) = x.sin_cos();
    RodSpectralFactors {
        cot_term: c / s,
        csc_term: 1.0 / s,
        eta: c / s / props.line_impedance,
        pole_distance: (x - n * PI).abs(),
        nearest_pole: n as i64,
    }
}

/// A dense block matrix together with its joint ↔ row mapping.
#[derive(Clone, Debug)]
pub struct SpectralMatrix {
    pub omega: f64,
    pub entries: DMatrix<f64>,
    pub layout: DofLayout,
}

impl SpectralMatrix {
    pub fn is_reduced(&self) -> bool {
        self.layout.is_reduced()
    }

    pub fn index_map(&self) -> Vec<(String, usize)> {
        self.layout.index_map()
    }
}

#[derive(Clone, Debug)]
pub struct StiffnessMatrix {
    pub entries: DMatrix<f64>,
    pub layout: DofLayout,
}

/// A displacement or force vector attached to a joint.
#[derive(Clone, Debug, PartialEq)]
pub struct JointVector {
    pub joint: String,
    pub vector: Vec<f64>,
}

/// Assembles Σ over rods of `a`·êêᵀ on both diagonal blocks and −`b`·êêᵀ on the
/// off-diagonal blocks, with `(a, b) = coeff(rod)`, projected onto `layout`.
pub(crate) fn assemble_rods(truss: &Truss, layout: &DofLayout, coeff: impl Fn(usize) -> (f64, f64)) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(layout.size(), layout.size());
    for r in 0..truss.rods().len() {
        let (a, b) = coeff(r);
        let (mu, nu) = truss.endpoints(r);
        let e = &truss.properties(r).unit_vector;
        let ends: Vec<(usize, usize, DVector<f64>)> = [mu, nu]
            .into_iter()
            .filter_map(|j| layout.project(j, e).map(|p| (j, layout.block(j).unwrap().0, p)))
            .collect();
        for (ji, oi, pi) in &ends {
            for (jj, oj, pj) in &ends {
                let c = if ji == jj { a } else { -b };
                let mut view = m.view_mut((*oi, *oj), (pi.len(), pj.len()));
                view.ger(c, pi, pj, 1.0);
            }
        }
    }
    m
}

fn check_poles(truss: &Truss, omega: f64, guard: f64) -> Result<()> {
    for (r, rod) in truss.rods().iter().enumerate() {
        let f = rod_factors(truss.properties(r), omega);
        if f.nearest_pole != 0 && f.pole_distance <= guard {
            return Err(TrussError::PoleProximity {
                rod: rod.id.clone(),
                n: f.nearest_pole,
            });
        }
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(TrussError::InvalidWindow(format!("frequency must be positive and finite, got {omega}")))
    }
}

/// D(ω) on an arbitrary layout. `pole_guard = 0` disables the pole check.
pub fn assemble_laplacian_on(truss: &Truss, omega: f64, layout: &DofLayout, pole_guard: f64) -> Result<SpectralMatrix> {
    check_omega(omega)?;
    check_poles(truss, omega, pole_guard)?;
    let entries = assemble_rods(truss, layout, |r| {
        let p = truss.properties(r);
        let f = rod_factors(p, omega);
        let scale = p.line_impedance * omega;
        (scale * f.cot_term, scale * f.csc_term)
    });
    Ok(SpectralMatrix {
        omega,
        entries,
        layout: layout.clone(),
    })
}

/// Network Laplacian D(ω) in global aligned coordinates.
pub fn assemble_laplacian(truss: &Truss, omega: f64, reduce_anchors: bool) -> Result<SpectralMatrix> {
    assemble_laplacian_on(truss, omega, &DofLayout::standard(truss, reduce_anchors), POLE_GUARD)
}

pub fn assemble_stiffness_on(truss: &Truss, layout: &DofLayout) -> StiffnessMatrix {
    let entries = assemble_rods(truss, layout, |r| {
        let k = truss.properties(r).spring_stiffness;
        (k, k)
    });
    StiffnessMatrix {
        entries,
        layout: layout.clone(),
    }
}

/// Static stiffness K from the spring formula k = AE/L.
pub fn assemble_stiffness(truss: &Truss, reduce_anchors: bool) -> StiffnessMatrix {
    assemble_stiffness_on(truss, &DofLayout::standard(truss, reduce_anchors))
}

/// det D(ω) (may overflow for large systems; use the log form via `linalg` there).
pub fn laplacian_determinant(truss: &Truss, omega: f64, reduce_anchors: bool) -> Result<f64> {
    let d = assemble_laplacian(truss, omega, reduce_anchors)?;
    Ok(linalg::signed_log_det(&d.entries).value())
}

/// Solves D(ω)·U = P for the free joints. Joints absent from `forces` are unloaded.
pub fn solve_forced_response(truss: &Truss, omega: f64, forces: &[JointVector]) -> Result<Vec<JointVector>> {
    let d = assemble_laplacian(truss, omega, true)?;
    let layout = &d.layout;
    let dim = truss.dimension();
    let mut p = DVector::zeros(layout.size());
    for f in forces {
        let j = truss.joint_index(&f.joint).ok_or_else(|| TrussError::Unknown {
            kind: "joint",
            name: f.joint.clone(),
        })?;
        if f.vector.len() != dim {
            return Err(TrussError::DimensionMismatch {
                expected: dim,
                actual: f.vector.len(),
            });
        }
        let (offset, _) = layout
            .block(j)
            .ok_or_else(|| TrussError::validation("joint", &f.joint, "forces cannot be applied to an anchored joint"))?;
        for (k, v) in f.vector.iter().enumerate() {
            p[offset + k] += v;
        }
    }
    let rc = linalg::rcond(&d.entries);
    if rc < RCOND_THRESHOLD {
        return Err(TrussError::SingularAtFrequency { omega, rcond: rc });
    }
    let u = d
        .entries
        .clone()
        .lu()
        .solve(&p)
        .ok_or(TrussError::SingularAtFrequency { omega, rcond: rc })?;
    Ok(layout
        .active_joints()
        .into_iter()
        .map(|j| JointVector {
            joint: truss.joints()[j].id.clone(),
            vector: layout.lift(j, &u).iter().copied().collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{unit_builtin, BuiltinStructure, Joint, Material, Rod};

    #[test]
    fn square_blocks() {
        let sq = unit_builtin(BuiltinStructure::Square);
        let w = 0.7;
        let d = assemble_laplacian(&sq, w, false).unwrap().entries;
        // joint 1 diagonal: ω·diag(cot ω, cot ω)
        let c = w / w.tan();
        assert!((d[(0, 0)] - c).abs() < 1e-14 && (d[(1, 1)] - c).abs() < 1e-14 && d[(0, 1)].abs() < 1e-15);
        // joints 2-3 block: (ω csc(√2ω)/2)·[[−1, 1], [1, −1]]
        let s = w / (2f64.sqrt() * w).sin() / 2.0;
        let b = d.view((2, 4), (2, 2));
        let expected = [[-s, s], [s, -s]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((b[(i, j)] - expected[i][j]).abs() < 1e-14);
            }
        }
        // joints 1 and 4 are not connected
        assert!(d.view((0, 6), (2, 2)).amax() == 0.0);
    }

    #[test]
    fn single_rod_stiffness() {
        let t = Truss::new(
            2,
            false,
            vec![Material::unit()],
            vec![
                Joint { id: "a".into(), position: vec![0.0, 0.0], anchored: false },
                Joint { id: "b".into(), position: vec![1.0, 0.0], anchored: false },
            ],
            vec![Rod { id: "ab".into(), joints: ["a".into(), "b".into()], area: 1.0, material: "unit".into() }],
        )
        .unwrap();
        let k = assemble_stiffness(&t, false).entries;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.0, -1.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
            -1.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 0.0,
        ]);
        assert!((k - expected).amax() < 1e-15);
    }

    #[test]
    fn pole_refusal() {
        let sq = unit_builtin(BuiltinStructure::Square);
        let err = assemble_laplacian(&sq, PI + 1e-7, false).unwrap_err();
        assert!(matches!(err, TrussError::PoleProximity { n: 1, .. }));
        assert!(assemble_laplacian(&sq, PI + 1e-3, false).is_ok());
    }

    #[test]
    fn factors_identity() {
        let sq = unit_builtin(BuiltinStructure::Square);
        for w in [0.3, 1.1, 2.0, 4.4] {
            let f = rod_factors(sq.properties(4), w);
            assert!((f.csc_term.powi(2) - f.cot_term.powi(2) - 1.0).abs() < 1e-9 * f.csc_term.powi(2));
        }
    }

    #[test]
    fn bridge_reduced_stiffness_is_definite() {
        let br = unit_builtin(BuiltinStructure::Bridge);
        let k = assemble_stiffness(&br, true).entries;
        assert_eq!(k.nrows(), 6);
        let eig = nalgebra::SymmetricEigen::new(k).eigenvalues;
        assert!(eig.min() > 1e-6);
    }

    #[test]
    fn zero_force_zero_response() {
        let br = unit_builtin(BuiltinStructure::Bridge);
        let u = solve_forced_response(&br, 0.5, &[]).unwrap();
        assert_eq!(u.len(), 3);
        assert!(u.iter().all(|j| j.vector.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn forces_on_anchor_rejected() {
        let br = unit_builtin(BuiltinStructure::Bridge);
        let f = [JointVector { joint: "1".into(), vector: vec![1.0, 0.0] }];
        assert!(solve_forced_response(&br, 0.5, &f).unwrap_err().is_input_error());
    }
}
