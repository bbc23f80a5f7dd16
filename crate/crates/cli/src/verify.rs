use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{json, Value};
use truss_core::assembly::{assemble_laplacian, assemble_stiffness, laplacian_determinant};
use truss_core::fem::{assemble_mass, MassKind};
use truss_core::model::{unit_builtin, BuiltinStructure, Joint, Material, Rod, Truss};
use truss_core::scattering::transmission_matrix;
use truss_core::spectrum::{find_natural_frequencies, modes_near, FrequencyWindow, ModeKind};
use truss_core::validation::{
    bridge_cosines, bridge_polynomial, bridge_reference_modes, closed_form_square_condition, closed_form_square_det,
    SquareClosedForm, SQUARE_ROD_ORDER,
};
use truss_core::TrussError;

use crate::commands::load;
use crate::output::{num, to_json, Csv, Format};
use crate::{CliError, CliResult};

struct Check {
    name: String,
    expected: f64,
    actual: f64,
    /// Allowed |actual − expected|.
    tolerance: f64,
}

impl Check {
    fn abs_error(&self) -> f64 {
        (self.actual - self.expected).abs()
    }

    /// Undefined when the expected value is zero.
    fn rel_error(&self) -> Option<f64> {
        (self.expected != 0.0).then(|| self.abs_error() / self.expected.abs())
    }

    fn pass(&self) -> bool {
        self.abs_error() <= self.tolerance
    }
}

fn err_check(name: impl Into<String>, error: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        expected: 0.0,
        actual: error,
        tolerance,
    }
}

fn in_range(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Check {
    let mid = 0.5 * (lo + hi);
    Check {
        name: name.into(),
        expected: mid,
        actual: value,
        tolerance: 0.5 * (hi - lo),
    }
}

fn numerical(e: TrussError) -> CliError {
    e.into()
}

/// Checks that hold for any structure.
fn generic(truss: &Truss, checks: &mut Vec<Check>) -> CliResult<()> {
    let mut worst: f64 = 0.0;
    for j in truss.joints() {
        if j.anchored {
            continue;
        }
        match transmission_matrix(truss, &j.id) {
            Ok(t) => {
                let n = t.entries.nrows();
                worst = worst.max((&t.entries * &t.entries - DMatrix::<f64>::identity(n, n)).amax());
            }
            Err(TrussError::DegenerateJoint { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    checks.push(err_check("transmission T^2 = I (max entry error)", worst, 1e-12));

    let tau = truss.min_transit_time();
    let mut asym: f64 = 0.0;
    for x in [0.37, 1.1, 1.9, 2.6, 3.3] {
        let d = match assemble_laplacian(truss, x / tau, false) {
            Ok(d) => d.entries,
            Err(TrussError::PoleProximity { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        asym = asym.max((&d - d.transpose()).amax() / d.amax());
    }
    checks.push(err_check("laplacian symmetry (relative)", asym, 1e-10));

    let k = assemble_stiffness(truss, false).entries;
    let m = assemble_mass(truss, MassKind::Consistent, false).entries;
    let residual = |w: f64| -> CliResult<f64> {
        let d = assemble_laplacian(truss, w, false).map_err(numerical)?.entries;
        Ok((d - (&k - &m * (w * w))).norm())
    };
    for x in [0.02, 0.01] {
        let w = x / tau;
        let ratio = residual(w)? / residual(w / 2.0)?;
        checks.push(in_range(format!("low-frequency Taylor ratio at omega*tau_min = {x}"), ratio, 8.0, 32.0));
    }
    Ok(())
}

fn square_with(lambdas: [f64; 5]) -> Truss {
    let p = [("1", [0.0, 0.0]), ("2", [1.0, 0.0]), ("3", [0.0, 1.0]), ("4", [1.0, 1.0])];
    let joints = p
        .iter()
        .map(|(id, x)| Joint {
            id: id.to_string(),
            position: x.to_vec(),
            anchored: false,
        })
        .collect();
    let rods = SQUARE_ROD_ORDER
        .iter()
        .zip(lambdas)
        .map(|((a, b), area)| Rod {
            id: format!("{a}{b}"),
            joints: [a.to_string(), b.to_string()],
            area,
            material: "unit".into(),
        })
        .collect();
    Truss::new(2, false, vec![Material::unit()], joints, rods).expect("square is valid")
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= 1e-15 * m {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn square_checks(checks: &mut Vec<Check>) -> CliResult<()> {
    let configs = [
        [1.0; 5],
        [1.3, 0.7, 2.1, 0.9, 1.6],
        [0.5, 1.8, 1.1, 2.4, 0.8],
        [2.2, 1.0, 0.6, 1.4, 3.0],
    ];
    for (c, lambdas) in configs.iter().enumerate() {
        let sq = square_with(*lambdas);
        let cfg = SquareClosedForm::from_truss(&sq)?;
        let mut worst: f64 = 0.0;
        for k in 0..100 {
            let w = 0.1 + 2.9 * (k as f64 + 0.5) / 100.0;
            let a = laplacian_determinant(&sq, w, false)?;
            let b = closed_form_square_det(&cfg, w)?;
            worst = worst.max((a - b).abs() / b.abs());
        }
        checks.push(err_check(format!("square determinant = closed form, impedance set {}", c + 1), worst, 1e-10));
    }

    let sq = unit_builtin(BuiltinStructure::Square);
    let cfg = SquareClosedForm::unit();
    let roots = find_natural_frequencies(&sq, &FrequencyWindow::default_for(&sq), false)?;
    for f in roots.iter().filter(|f| f.kind == ModeKind::Regular) {
        let cond = |w: f64| closed_form_square_condition(&cfg, w).unwrap_or(f64::NAN);
        let (a, b) = (f.omega * (1.0 - 1e-4), f.omega * (1.0 + 1e-4));
        let z = if cond(a) * cond(b) < 0.0 { bisect(cond, a, b) } else { f64::NAN };
        checks.push(Check {
            name: format!("closed-form condition zero near {:.6}", f.omega),
            expected: z,
            actual: f.omega,
            tolerance: 1e-9,
            });
    }
    let resonant = roots.iter().find(|f| f.kind == ModeKind::Resonant && (f.omega - PI).abs() < 1e-9);
    checks.push(Check {
        name: "square resonant mode at omega = pi (multiplicity)".into(),
        expected: 2.0,
        actual: resonant.map_or(0.0, |f| f.multiplicity as f64),
        tolerance: 0.0,
    });
    Ok(())
}

fn bridge_checks(checks: &mut Vec<Check>) -> CliResult<()> {
    let worst = bridge_cosines().iter().map(|&c| bridge_polynomial(c).abs()).fold(0.0, f64::max);
    checks.push(err_check("bridge polynomial vanishes at its six roots", worst, 1e-12));

    let br = unit_builtin(BuiltinStructure::Bridge);
    let window = FrequencyWindow::scaled(&br, 0.05, 1.05 * PI)?;
    let found = find_natural_frequencies(&br, &window, true)?;
    let regular: Vec<f64> = found.iter().filter(|f| f.kind == ModeKind::Regular).map(|f| f.omega).collect();
    checks.push(Check {
        name: "bridge regular root count".into(),
        expected: 5.0,
        actual: regular.len() as f64,
        tolerance: 0.0,
    });
    for (w, c) in regular.iter().zip(&bridge_cosines()[..5]) {
        checks.push(Check {
            name: format!("bridge root cos(omega*tau) = {c:.6}"),
            expected: *c,
            actual: w.cos(),
            tolerance: 1e-9,
            });
    }
    let resonant = found.iter().filter(|f| f.kind == ModeKind::Resonant && (f.omega - PI).abs() < 1e-9).count();
    checks.push(Check {
        name: "bridge resonant mode at omega*tau = pi".into(),
        expected: 1.0,
        actual: resonant as f64,
        tolerance: 0.0,
    });

    for row in bridge_reference_modes() {
        let c = row.cos_omega_tau;
        let modes = modes_near(&br, c.acos(), true)?;
        if modes.len() != 1 {
            checks.push(Check {
                name: format!("bridge mode count at cos = {c:.6}"),
                expected: 1.0,
                actual: modes.len() as f64,
                tolerance: 0.0,
                    });
            continue;
        }
        let mut u = modes[0].displacement_vector();
        let mut p = modes[0].force_vector();
        let s = u.dot(&row.displacements).signum() / u.norm();
        u *= s;
        p *= s;
        checks.push(err_check(format!("bridge mode shape at cos = {c:.6}"), (&u - &row.displacements).amax(), 1e-8));
        if row.anchor_force_direction.norm() == 0.0 {
            checks.push(err_check(format!("bridge anchor forces vanish at cos = {c:.6}"), p.norm(), 1e-10));
        } else {
            // the scale relating computed and reference forces must be positive
            let error = if p.dot(&row.anchor_force_direction) > 0.0 {
                (&p / p.norm() - &row.anchor_force_direction).amax()
            } else {
                f64::INFINITY
            };
            checks.push(err_check(format!("bridge anchor force direction at cos = {c:.6}"), error, 1e-8));
        }
    }
    Ok(())
}

pub fn run(file: Option<&Path>, builtin: Option<&str>, format: Format) -> CliResult<String> {
    let (truss, which) = match (file, builtin) {
        (_, Some(name)) => {
            let b: BuiltinStructure = name.parse()?;
            (unit_builtin(b), Some(b))
        }
        (Some(path), None) => (load(path)?, None),
        (None, None) => return Err(CliError::Input("give a structure file or --builtin".into())),
    };
    let mut checks = Vec::new();
    generic(&truss, &mut checks)?;
    match which {
        Some(BuiltinStructure::Square) => square_checks(&mut checks)?,
        Some(BuiltinStructure::Bridge) => bridge_checks(&mut checks)?,
        None => {}
    }

    let failed = checks.iter().filter(|c| !c.pass()).count();
    let report = match format {
        Format::Json => {
            to_json(&Value::Array(
                checks
                    .iter()
                    .map(|c| {
                        json!({
                            "check": c.name,
                            "expected": c.expected,
                            "actual": c.actual,
                            "abs_error": c.abs_error(),
                            "rel_error": c.rel_error(),
                            "tolerance": c.tolerance,
                            "pass": c.pass(),
                        })
                    })
                    .collect(),
            )) + "\n"
        }
        Format::Csv => {
            let mut csv = Csv::new(&["check", "expected", "actual", "abs_error", "rel_error", "tolerance", "status"]);
            for c in &checks {
                csv.row(&[
                    crate::output::field(&c.name),
                    num(c.expected),
                    num(c.actual),
                    num(c.abs_error()),
                    c.rel_error().map(num).unwrap_or_default(),
                    num(c.tolerance),
                    if c.pass() { "pass" } else { "fail" }.into(),
                ]);
            }
            csv.finish()
        }
    };
    if failed > 0 {
        Err(CliError::ChecksFailed { report, failed })
    } else {
        Ok(report)
    }
}
