//! Stiffness/mass finite-element baselines: det(K − ω²M) with consistent or lumped mass.

use std::str::FromStr;

use nalgebra::DMatrix;

use crate::assembly::{assemble_rods, assemble_stiffness_on};
use crate::error::{Result, TrussError};
use crate::layout::DofLayout;
use crate::linalg;
use crate::model::Truss;
use crate::spectrum::{FrequencyWindow, ModeKind, NaturalFrequency};
use crate::sweep::{sweep_monotone, SweepDiagnostics};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassKind {
    /// Linear shape functions: (m/3)êêᵀ on the diagonal, (m/6)êêᵀ off it.
    Consistent,
    /// Half of every rod's mass at each endpoint, isotropic.
    Lumped,
}

impl FromStr for MassKind {
    type Err = TrussError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(MassKind::Consistent),
            "lumped" => Ok(MassKind::Lumped),
            other => Err(TrussError::Unknown {
                kind: "mass kind",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MassMatrix {
    pub entries: DMatrix<f64>,
    pub kind: MassKind,
    pub layout: DofLayout,
}

pub fn assemble_mass_on(truss: &Truss, kind: MassKind, layout: &DofLayout) -> MassMatrix {
    let entries = match kind {
        MassKind::Consistent => assemble_rods(truss, layout, |r| {
            let m = truss.properties(r).mass;
            (m / 3.0, -m / 6.0)
        }),
        MassKind::Lumped => {
            let mut m = DMatrix::zeros(layout.size(), layout.size());
            for r in 0..truss.rods().len() {
                let half = 0.5 * truss.properties(r).mass;
                let (a, b) = truss.endpoints(r);
                for j in [a, b] {
                    if let Some((off, width)) = layout.block(j) {
                        for k in off..off + width {
                            m[(k, k)] += half;
                        }
                    }
                }
            }
            m
        }
    };
    MassMatrix {
        entries,
        kind,
        layout: layout.clone(),
    }
}

pub fn assemble_mass(truss: &Truss, kind: MassKind, reduce_anchors: bool) -> MassMatrix {
    assemble_mass_on(truss, kind, &DofLayout::standard(truss, reduce_anchors))
}

/// det(K − ω²M).
pub fn fem_determinant(truss: &Truss, omega: f64, kind: MassKind, reduce_anchors: bool) -> f64 {
    let layout = DofLayout::standard(truss, reduce_anchors);
    let k = assemble_stiffness_on(truss, &layout).entries;
    let m = assemble_mass_on(truss, kind, &layout).entries;
    linalg::signed_log_det(&(k - m * (omega * omega))).value()
}

/// Sweep of det(K − ω²M) on the `divisions`-times subdivided truss. Anchors are
/// removed whenever present.
pub fn fem_sweep(
    truss: &Truss,
    window: &FrequencyWindow,
    kind: MassKind,
    divisions: usize,
) -> Result<(Vec<NaturalFrequency>, SweepDiagnostics)> {
    window.validate()?;
    if divisions == 0 {
        return Err(TrussError::validation("option", "divisions", "must be at least 1"));
    }
    let refined = truss.subdivide(divisions);
    let layout = DofLayout::spanning(&refined, refined.has_anchors());
    let k = assemble_stiffness_on(&refined, &layout).entries;
    let m = assemble_mass_on(&refined, kind, &layout).entries;
    let eval = |w: f64| &k - &m * (w * w);
    let (roots, diagnostics) = sweep_monotone(
        &[(window.omega_min, window.omega_max)],
        window.grid_points,
        window.root_tol,
        &eval,
    );
    let freqs = roots
        .into_iter()
        .map(|r| NaturalFrequency {
            omega: r.omega,
            kind: ModeKind::Regular,
            multiplicity: r.multiplicity,
            resonant_order: None,
        })
        .collect();
    Ok((freqs, diagnostics))
}

pub fn fem_frequencies(truss: &Truss, window: &FrequencyWindow, kind: MassKind, divisions: usize) -> Result<Vec<NaturalFrequency>> {
    Ok(fem_sweep(truss, window, kind, divisions)?.0)
}
