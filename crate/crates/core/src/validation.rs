//! Closed-form oracles for the two built-in structures. Nothing in the solvers
//! calls into this module; it exists for tests and the `verify` command.

use nalgebra::DVector;

use crate::assembly::POLE_GUARD;
use crate::error::{Result, TrussError};
use crate::model::Truss;

/// Line impedances and transit times of the square's rods, in the order
/// 12, 24, 34, 13, 23.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareClosedForm {
    pub lambdas: [f64; 5],
    pub taus: [f64; 5],
}

pub const SQUARE_ROD_ORDER: [(&str, &str); 5] = [("1", "2"), ("2", "4"), ("3", "4"), ("1", "3"), ("2", "3")];

impl SquareClosedForm {
    pub fn new(lambdas: [f64; 5], taus: [f64; 5]) -> Result<Self> {
        if lambdas.iter().chain(&taus).any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(TrussError::validation("closed form", "square", "impedances and transit times must be positive"));
        }
        Ok(SquareClosedForm { lambdas, taus })
    }

    /// Unit side, unit impedance: τ = 1 on the sides and √2 on the crossbar.
    pub fn unit() -> Self {
        SquareClosedForm {
            lambdas: [1.0; 5],
            taus: [1.0, 1.0, 1.0, 1.0, 2f64.sqrt()],
        }
    }

    /// Reads the parameters off a truss with the square's joint ids and connectivity.
    pub fn from_truss(truss: &Truss) -> Result<Self> {
        let mut lambdas = [0.0; 5];
        let mut taus = [0.0; 5];
        if truss.rods().len() != 5 {
            return Err(TrussError::validation("truss", "square", "expected exactly five rods"));
        }
        for (k, (a, b)) in SQUARE_ROD_ORDER.iter().enumerate() {
            let r = (0..truss.rods().len())
                .find(|&r| {
                    let j = &truss.rods()[r].joints;
                    (j[0] == *a && j[1] == *b) || (j[0] == *b && j[1] == *a)
                })
                .ok_or_else(|| TrussError::validation("truss", "square", format!("no rod between joints {a} and {b}")))?;
            lambdas[k] = truss.properties(r).line_impedance;
            taus[k] = truss.properties(r).transit_time;
        }
        SquareClosedForm::new(lambdas, taus)
    }

    fn etas(&self, omega: f64) -> Result<[f64; 5]> {
        let mut eta = [0.0; 5];
        for k in 0..5 {
            let x = omega * self.taus[k];
            let n = (x / std::f64::consts::PI).round();
            if n != 0.0 && (x - n * std::f64::consts::PI).abs() <= POLE_GUARD {
                let (a, b) = SQUARE_ROD_ORDER[k];
                return Err(TrussError::PoleProximity {
                    rod: format!("{a}{b}"),
                    n: n as i64,
                });
            }
            eta[k] = x.cos() / x.sin() / self.lambdas[k];
        }
        Ok(eta)
    }
}

/// Λ₂₃⁻² − ½η₂₃(η₁₂+η₂₄+η₃₄+η₁₃) − ¼(η₁₂+η₂₄)(η₃₄+η₁₃) with η = cot(ωτ)/Λ.
pub fn closed_form_square_condition(cfg: &SquareClosedForm, omega: f64) -> Result<f64> {
    let [e12, e24, e34, e13, e23] = cfg.etas(omega)?;
    let l23 = cfg.lambdas[4];
    Ok(1.0 / (l23 * l23) - 0.5 * e23 * (e12 + e24 + e34 + e13) - 0.25 * (e12 + e24) * (e34 + e13))
}

/// ω⁸(ΠΛ)² times the condition above.
pub fn closed_form_square_det(cfg: &SquareClosedForm, omega: f64) -> Result<f64> {
    let prod: f64 = cfg.lambdas.iter().product();
    Ok(omega.powi(8) * prod * prod * closed_form_square_condition(cfg, omega)?)
}

/// Sixth-degree frequency polynomial of the bridge in c = cos(ωτ).
pub fn bridge_polynomial(c: f64) -> f64 {
    27.0 / 64.0 * (5.0 * c * c - 5.0 * c + 1.0) * (3.0 * c * c - c - 1.0) * (3.0 * c + 1.0) * (c + 1.0)
}

/// The six roots of [`bridge_polynomial`], descending.
pub fn bridge_cosines() -> [f64; 6] {
    let s5 = 5f64.sqrt();
    let s13 = 13f64.sqrt();
    [(1.0 + s13) / 6.0, (5.0 + s5) / 10.0, (5.0 - s5) / 10.0, -1.0 / 3.0, (1.0 - s13) / 6.0, -1.0]
}

#[derive(Clone, Debug, PartialEq)]
pub struct BridgeReferenceMode {
    pub cos_omega_tau: f64,
    /// (u₂, u₃, u₄) stacked, unit norm, first nonzero entry positive.
    pub displacements: DVector<f64>,
    /// (P₁, P₅) stacked, unit norm; zero for the force-free mode. The sign is the
    /// one taken with csc(ωτ) > 0, i.e. ωτ ∈ (0, π).
    pub anchor_force_direction: DVector<f64>,
}

/// Reference modes of the unit bridge (anchored at joints 1 and 5), ordered by cos(ωτ)
/// descending, i.e. by increasing frequency.
pub fn bridge_reference_modes() -> Vec<BridgeReferenceMode> {
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s13 = 13f64.sqrt();
    let q = s3 / 4.0;
    // (cos, [u2x,u2y,u3x,u3y,u4x,u4y], [P1x,P1y,P5x,P5y])
    let rows: Vec<(f64, [f64; 6], [f64; 4])> = vec![
        (
            (1.0 + s13) / 6.0,
            [
                17.0 / 72.0 - 5.0 * s13 / 72.0,
                q * (31.0 / 54.0 - 7.0 * s13 / 54.0),
                0.0,
                -q * (10.0 / 27.0 - 4.0 * s13 / 27.0),
                -17.0 / 72.0 + 5.0 * s13 / 72.0,
                q * (31.0 / 54.0 - 7.0 * s13 / 54.0),
            ],
            [
                -1.0 / 6.0 + s13 / 24.0,
                -q * (2.0 / 3.0 - s13 / 6.0),
                1.0 / 6.0 - s13 / 24.0,
                -q * (2.0 / 3.0 - s13 / 6.0),
            ],
        ),
        (
            (5.0 + s5) / 10.0,
            [
                -3.0 / 8.0 - s5 / 40.0,
                -q * (5.0 / 6.0 - 13.0 * s5 / 30.0),
                3.0 / 10.0 - s5 / 5.0,
                0.0,
                -3.0 / 8.0 - s5 / 40.0,
                q * (5.0 / 6.0 - 13.0 * s5 / 30.0),
            ],
            [
                -1.0 / 20.0 + s5 / 8.0,
                q * (1.0 - 3.0 * s5 / 10.0),
                -1.0 / 20.0 + s5 / 8.0,
                -q * (1.0 - 3.0 * s5 / 10.0),
            ],
        ),
        (
            (5.0 - s5) / 10.0,
            [
                -3.0 / 8.0 + s5 / 40.0,
                -q * (5.0 / 6.0 + 13.0 * s5 / 30.0),
                3.0 / 10.0 + s5 / 5.0,
                0.0,
                -3.0 / 8.0 + s5 / 40.0,
                q * (5.0 / 6.0 + 13.0 * s5 / 30.0),
            ],
            [
                -1.0 / 20.0 - s5 / 8.0,
                q * (1.0 + 3.0 * s5 / 10.0),
                -1.0 / 20.0 - s5 / 8.0,
                -q * (1.0 + 3.0 * s5 / 10.0),
            ],
        ),
        (
            -1.0 / 3.0,
            [1.0, -3.0 * s3, -6.0, 0.0, 1.0, 3.0 * s3],
            [12.0, 3.0 * s3, 12.0, -3.0 * s3],
        ),
        (
            (1.0 - s13) / 6.0,
            [
                17.0 / 72.0 + 5.0 * s13 / 72.0,
                q * (31.0 / 54.0 + 7.0 * s13 / 54.0),
                0.0,
                -q * (10.0 / 27.0 + 4.0 * s13 / 27.0),
                -17.0 / 72.0 - 5.0 * s13 / 72.0,
                q * (31.0 / 54.0 + 7.0 * s13 / 54.0),
            ],
            [
                -1.0 / 6.0 - s13 / 24.0,
                -q * (2.0 / 3.0 + s13 / 6.0),
                1.0 / 6.0 + s13 / 24.0,
                -q * (2.0 / 3.0 + s13 / 6.0),
            ],
        ),
        (-1.0, [-3.0, s3, 0.0, -2.0 * s3, 3.0, s3], [0.0; 4]),
    ];
    rows.into_iter()
        .map(|(c, u, p)| {
            let mut u = DVector::from_row_slice(&u);
            let mut p = DVector::from_row_slice(&p);
            let before = u[0];
            u /= u.norm();
            crate::linalg::fix_sign(&mut u);
            // Forces follow the displacement sign.
            if u[0] * before < 0.0 {
                p.neg_mut();
            }
            let n = p.norm();
            if n > 0.0 {
                p /= n;
            }
            BridgeReferenceMode {
                cos_omega_tau: c,
                displacements: u,
                anchor_force_direction: p,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_values() {
        assert!((bridge_polynomial(1.0) - 27.0 / 8.0).abs() < 1e-15);
        for c in bridge_cosines() {
            assert!(bridge_polynomial(c).abs() <= 1e-12);
            assert!((-1.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn condition_symmetry_and_small_omega() {
        let cfg = SquareClosedForm::new([1.0, 2.0, 3.0, 4.0, 5.0], [1.0, 1.1, 0.9, 1.2, 1.5]).unwrap();
        let swapped = SquareClosedForm::new([3.0, 4.0, 1.0, 2.0, 5.0], [0.9, 1.2, 1.0, 1.1, 1.5]).unwrap();
        let a = closed_form_square_condition(&cfg, 0.7).unwrap();
        let b = closed_form_square_condition(&swapped, 0.7).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
        assert!(closed_form_square_condition(&SquareClosedForm::unit(), 1e-4).unwrap() < -1e6);
    }

    #[test]
    fn pole_rejected() {
        let r = closed_form_square_condition(&SquareClosedForm::unit(), std::f64::consts::PI);
        assert!(matches!(r, Err(TrussError::PoleProximity { .. })));
    }

    #[test]
    fn reference_table_shape() {
        let t = bridge_reference_modes();
        assert_eq!(t.len(), 6);
        assert!(t.windows(2).all(|w| w[0].cos_omega_tau > w[1].cos_omega_tau));
        for m in &t {
            assert!((m.displacements.norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(t[5].anchor_force_direction.norm(), 0.0);
    }
}
