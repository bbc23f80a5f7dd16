//! Degree-of-freedom layouts: which joints carry unknowns and in which basis.
//!
//! The standard layout gives every (free) joint a full `dimension`-sized block in
//! global coordinates. The spanning layout additionally projects joints whose rods
//! do not span the coordinate space (e.g. collinear joints created by subdivision)
//! onto an orthonormal basis of the span of their rods, removing the transverse
//! directions that carry no stiffness at all.

use nalgebra::{DMatrix, DVector};

use crate::model::Truss;

/// Relative singular-value cutoff when deciding the span of a joint's rods.
const SPAN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
struct Block {
    offset: usize,
    /// Orthonormal columns in global coordinates; `None` means the identity.
    basis: Option<DMatrix<f64>>,
    width: usize,
}

/// A joint whose transverse directions were removed from the unknowns.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    pub joint: String,
    /// Number of suppressed directions (dimension minus span rank).
    pub suppressed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DofLayout {
    dimension: usize,
    blocks: Vec<Option<Block>>,
    joint_ids: Vec<String>,
    size: usize,
    reduced: bool,
    mechanisms: Vec<Mechanism>,
}

/// Orthonormal basis (columns) of the span of the rods at joint `j`.
pub fn joint_span_basis(truss: &Truss, j: usize) -> DMatrix<f64> {
    let dim = truss.dimension();
    let cols: Vec<DVector<f64>> = truss.incident(j).iter().map(|&(r, _)| truss.direction_from(r, j)).collect();
    if cols.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    crate::linalg::range_space(&DMatrix::from_columns(&cols), SPAN_TOL)
}

impl DofLayout {
    /// Full `dimension` block per joint; anchored joints dropped when `reduce_anchors`.
    pub fn standard(truss: &Truss, reduce_anchors: bool) -> Self {
        Self::build(truss, reduce_anchors, false)
    }

    /// Like `standard`, but joints whose rods do not span the space keep only the span.
    pub fn spanning(truss: &Truss, reduce_anchors: bool) -> Self {
        Self::build(truss, reduce_anchors, true)
    }

    fn build(truss: &Truss, reduce_anchors: bool, spanning: bool) -> Self {
        let dim = truss.dimension();
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(truss.joints().len());
        let mut mechanisms = Vec::new();
        for (j, joint) in truss.joints().iter().enumerate() {
            if reduce_anchors && joint.anchored {
                blocks.push(None);
                continue;
            }
            let mut basis = None;
            let mut width = dim;
            if spanning {
                let b = joint_span_basis(truss, j);
                if b.ncols() < dim {
                    mechanisms.push(Mechanism {
                        joint: joint.id.clone(),
                        suppressed: dim - b.ncols(),
                    });
                    width = b.ncols();
                    basis = Some(b);
                }
            }
            blocks.push(Some(Block { offset, basis, width }));
            offset += width;
        }
        if !mechanisms.is_empty() {
            log::debug!(
                "{} joint(s) with rank-deficient rod stars reduced to their span",
                mechanisms.len()
            );
        }
        DofLayout {
            dimension: dim,
            blocks,
            joint_ids: truss.joints().iter().map(|j| j.id.clone()).collect(),
            size: offset,
            reduced: reduce_anchors,
            mechanisms,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    /// (offset, width) of joint `j`, or `None` if the joint carries no unknowns.
    pub fn block(&self, j: usize) -> Option<(usize, usize)> {
        self.blocks[j].as_ref().map(|b| (b.offset, b.width))
    }

    /// Joint id and row offset for every joint with unknowns, in joint order.
    pub fn index_map(&self) -> Vec<(String, usize)> {
        self.blocks
            .iter()
            .zip(&self.joint_ids)
            .filter_map(|(b, id)| b.as_ref().map(|b| (id.clone(), b.offset)))
            .collect()
    }

    /// Joint indices carrying unknowns.
    pub fn active_joints(&self) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&j| self.blocks[j].is_some()).collect()
    }

    /// Coordinates of global vector `v` at joint `j` in the joint's basis.
    pub fn project(&self, j: usize, v: &DVector<f64>) -> Option<DVector<f64>> {
        self.blocks[j].as_ref().map(|b| match &b.basis {
            None => v.clone(),
            Some(basis) => basis.transpose() * v,
        })
    }

    /// Global displacement of joint `j` given the full layout vector `x`.
    pub fn lift(&self, j: usize, x: &DVector<f64>) -> DVector<f64> {
        match &self.blocks[j] {
            None => DVector::zeros(self.dimension),
            Some(b) => {
                let local = x.rows(b.offset, b.width).into_owned();
                match &b.basis {
                    None => local,
                    Some(basis) => basis * local,
                }
            }
        }
    }

    /// Lifts a layout vector to a global vector of length `dimension * joints` (zeros where removed).
    pub fn lift_all(&self, x: &DVector<f64>) -> DVector<f64> {
        let dim = self.dimension;
        let mut out = DVector::zeros(dim * self.blocks.len());
        for j in 0..self.blocks.len() {
            out.rows_mut(j * dim, dim).copy_from(&self.lift(j, x));
        }
        out
    }
}
