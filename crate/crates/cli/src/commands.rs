use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use truss_core::assembly::JointVector;
use truss_core::fem::{fem_frequencies, MassKind};
use truss_core::model::{load_truss, unit_builtin, BuiltinStructure, Truss};
use truss_core::scattering::{reverberation_frequencies, simulate_wavefronts, Direction, Impulse, SimulationOptions};
use truss_core::spectrum::{
    find_natural_frequencies, modes_near, FrequencyWindow, ModeResult, NaturalFrequency, GRID_DENSITY,
};

use crate::output::{field, num, to_json, Csv, Format};
use crate::{CliError, CliResult, Method, WindowArgs};

pub fn load(path: &Path) -> CliResult<Truss> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    }
    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(load_truss(&text)?)
}

pub fn window(truss: &Truss, args: &WindowArgs) -> CliResult<FrequencyWindow> {
    let default = FrequencyWindow::default_for(truss);
    let lo = args.omega_min.unwrap_or(default.omega_min);
    let hi = args.omega_max.unwrap_or(default.omega_max);
    let points = args
        .grid_points
        .unwrap_or_else(|| (GRID_DENSITY * (hi - lo).abs() * truss.min_transit_time()).ceil().max(2.0) as usize);
    Ok(FrequencyWindow::new(lo, hi, points)?)
}

fn mass_kind(method: Method) -> Option<MassKind> {
    match method {
        Method::FemConsistent => Some(MassKind::Consistent),
        Method::FemLumped => Some(MassKind::Lumped),
        _ => None,
    }
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Laplacian => "laplacian",
        Method::Reverberation => "reverberation",
        Method::FemConsistent => "fem-consistent",
        Method::FemLumped => "fem-lumped",
    }
}

fn run_method(truss: &Truss, window: &FrequencyWindow, method: Method, divisions: usize) -> CliResult<Vec<NaturalFrequency>> {
    if divisions == 0 {
        return Err(CliError::Input("--divisions must be at least 1".into()));
    }
    Ok(match method {
        Method::Laplacian => find_natural_frequencies(truss, window, truss.has_anchors())?,
        Method::Reverberation => reverberation_frequencies(truss, window)?,
        Method::FemConsistent | Method::FemLumped => {
            fem_frequencies(truss, window, mass_kind(method).expect("fem method"), divisions)?
        }
    })
}

/// Keeps the lowest `count` frequencies, counting multiplicity.
fn truncate(freqs: Vec<NaturalFrequency>, count: Option<usize>) -> Vec<NaturalFrequency> {
    let Some(mut left) = count else { return freqs };
    let mut out = Vec::new();
    for mut f in freqs {
        if left == 0 {
            break;
        }
        f.multiplicity = f.multiplicity.min(left);
        left -= f.multiplicity;
        out.push(f);
    }
    out
}

fn frequency_json(f: &NaturalFrequency) -> Value {
    json!({
        "omega": f.omega,
        "kind": f.kind.as_str(),
        "multiplicity": f.multiplicity,
        "resonant_order": f.resonant_order,
    })
}

pub fn freqs(
    truss: &Truss,
    args: &WindowArgs,
    method: Method,
    divisions: usize,
    count: Option<usize>,
    format: Format,
) -> CliResult<String> {
    let window = window(truss, args)?;
    let found = truncate(run_method(truss, &window, method, divisions)?, count);
    Ok(match format {
        Format::Json => to_json(&json!({
            "method": method_name(method),
            "divisions": divisions,
            "frequencies": found.iter().map(frequency_json).collect::<Vec<_>>(),
        })) + "\n",
        Format::Csv => {
            // one row per frequency, repeated by multiplicity
            let mut csv = Csv::new(&["index", "omega", "kind", "multiplicity"]);
            let mut index = 0;
            for f in &found {
                for _ in 0..f.multiplicity {
                    index += 1;
                    csv.row(&[index.to_string(), num(f.omega), f.kind.as_str().into(), f.multiplicity.to_string()]);
                }
            }
            csv.finish()
        }
    })
}

fn vectors_json(v: &[JointVector]) -> Value {
    Value::Array(v.iter().map(|j| json!({"joint": j.joint, "vector": j.vector})).collect())
}

fn mode_json(m: &ModeResult) -> Value {
    json!({
        "omega": m.omega,
        "kind": m.kind.as_str(),
        "resonant_order": m.resonant_order,
        "displacements": vectors_json(&m.displacements),
        "anchor_forces": vectors_json(&m.anchor_forces),
    })
}

pub fn modes(truss: &Truss, omega: f64, format: Format) -> CliResult<String> {
    let found = match modes_near(truss, omega, truss.has_anchors()) {
        Ok(m) => m,
        Err(e @ truss_core::TrussError::NotARoot { .. }) => {
            let hint = find_natural_frequencies(truss, &FrequencyWindow::default_for(truss), truss.has_anchors())
                .ok()
                .and_then(|f| f.into_iter().min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs())))
                .map(|f| format!("; nearest natural frequency is {} (run `truss freqs` for the full list)", f.omega))
                .unwrap_or_else(|| "; run `truss freqs` to list natural frequencies".into());
            return Err(CliError::Numerical(format!("{e}{hint}")));
        }
        Err(e) => return Err(e.into()),
    };
    Ok(match format {
        Format::Json => to_json(&json!({ "modes": found.iter().map(mode_json).collect::<Vec<_>>() })) + "\n",
        Format::Csv => {
            let dim = truss.dimension();
            let axes = ["x", "y", "z"];
            let mut header = vec!["mode", "omega", "kind", "quantity", "joint"];
            header.extend(&axes[..dim]);
            let mut csv = Csv::new(&header);
            for (k, m) in found.iter().enumerate() {
                for (quantity, list) in [("displacement", &m.displacements), ("anchor_force", &m.anchor_forces)] {
                    for j in list {
                        let mut row = vec![(k + 1).to_string(), num(m.omega), m.kind.as_str().into(), quantity.into(), field(&j.joint)];
                        row.extend(j.vector.iter().map(|&x| num(x)));
                        csv.row(&row);
                    }
                }
            }
            csv.finish()
        }
    })
}

/// Lowest `count` frequencies (with multiplicity), widening the window upward as needed.
fn lowest(truss: &Truss, window: &FrequencyWindow, method: Method, divisions: usize, count: usize) -> CliResult<Vec<f64>> {
    let mut w = *window;
    for _ in 0..8 {
        let found = run_method(truss, &w, method, divisions)?;
        let expanded = truss_core::spectrum::expand_multiplicity(&found);
        if expanded.len() >= count {
            return Ok(expanded.into_iter().take(count).collect());
        }
        let span = w.omega_max - w.omega_min;
        w.omega_max += span;
        w.grid_points *= 2;
    }
    Err(CliError::Numerical(format!(
        "fewer than {count} {} frequencies below omega = {}",
        method_name(method),
        w.omega_max
    )))
}

pub fn compare(truss: &Truss, divisions: &[usize], count: usize, args: &WindowArgs, format: Format) -> CliResult<String> {
    let window = window(truss, args)?;
    let reference = lowest(truss, &window, Method::Laplacian, 1, count)?;
    let mut rows: Vec<(&str, usize, usize, f64, f64)> = Vec::new();
    for &n in divisions {
        for (k, w) in reference.iter().enumerate() {
            rows.push(("laplacian", n, k + 1, *w, 0.0));
        }
        for method in [Method::FemConsistent, Method::FemLumped] {
            let f = lowest(truss, &window, method, n, count)?;
            for (k, (w, r)) in f.iter().zip(&reference).enumerate() {
                rows.push((method_name(method), n, k + 1, *w, (w - r).abs() / r));
            }
        }
    }
    Ok(match format {
        Format::Json => to_json(&Value::Array(
            rows.iter()
                .map(|(m, n, k, w, e)| json!({"method": m, "divisions": n, "index": k, "omega": w, "relative_error": e}))
                .collect(),
        )) + "\n",
        Format::Csv => {
            let mut csv = Csv::new(&["method", "divisions", "index", "omega", "relative_error"]);
            for (m, n, k, w, e) in rows {
                csv.row(&[m.into(), n.to_string(), k.to_string(), num(w), num(e)]);
            }
            csv.finish()
        }
    })
}

fn timed(f: impl FnOnce() -> CliResult<Vec<f64>>) -> CliResult<f64> {
    let start = Instant::now();
    f()?;
    Ok(start.elapsed().as_secs_f64())
}

pub fn bench(truss: &Truss, divisions: &[usize], count: usize, args: &WindowArgs, format: Format) -> CliResult<String> {
    let window = window(truss, args)?;
    // The spectral methods do not depend on subdivision; time them once.
    let lap = timed(|| lowest(truss, &window, Method::Laplacian, 1, count))?;
    let rev = timed(|| lowest(truss, &window, Method::Reverberation, 1, count))?;
    let mut rows = Vec::new();
    for &n in divisions {
        let c = timed(|| lowest(truss, &window, Method::FemConsistent, n, count))?;
        let l = timed(|| lowest(truss, &window, Method::FemLumped, n, count))?;
        rows.push((n, lap, rev, c, l));
    }
    Ok(match format {
        Format::Json => to_json(&json!({
            "command": "bench",
            "parameters": {
                "count": count,
                "divisions": divisions,
                "omega_min": window.omega_min,
                "omega_max": window.omega_max,
                "grid_points": window.grid_points,
            },
            "rows": rows.iter().map(|(n, a, b, c, d)| json!({
                "divisions": n,
                "wall_time": {"laplacian": a, "reverberation": b, "fem-consistent": c, "fem-lumped": d},
            })).collect::<Vec<_>>(),
        })) + "\n",
        Format::Csv => {
            let mut csv = Csv::new(&["divisions", "laplacian_s", "reverberation_s", "fem_consistent_s", "fem_lumped_s"]);
            for (n, a, b, c, d) in rows {
                csv.row(&[n.to_string(), num(a), num(b), num(c), num(d)]);
            }
            csv.finish()
        }
    })
}

fn parse_impulse(truss: &Truss, spec: &str) -> CliResult<Impulse> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Input(format!("impulse '{spec}' is not ROD:FROM_JOINT:STRESS[:START_TIME]"));
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let r = truss
        .rod_index(parts[0])
        .ok_or_else(|| CliError::Input(format!("unknown rod '{}'", parts[0])))?;
    let (mu, nu) = truss.endpoints(r);
    let direction = if truss.joints()[mu].id == parts[1] {
        Direction::TowardNu
    } else if truss.joints()[nu].id == parts[1] {
        Direction::TowardMu
    } else {
        return Err(CliError::Input(format!("joint '{}' is not an end of rod '{}'", parts[1], parts[0])));
    };
    let stress = parts[2].parse().map_err(|_| bad())?;
    let start_time = match parts.get(3) {
        Some(t) => t.parse().map_err(|_| bad())?,
        None => 0.0,
    };
    Ok(Impulse {
        rod: parts[0].to_string(),
        direction,
        stress,
        start_time,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    truss: &Truss,
    impulses: &[String],
    t_max: f64,
    snapshots: &[f64],
    snapshot_file: Option<&Path>,
    min_amplitude: f64,
    max_fronts: usize,
    format: Format,
) -> CliResult<String> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(CliError::Input("--t-max must be finite and nonnegative".into()));
    }
    if let Some(t) = snapshots.iter().find(|&&t| !(0.0..=t_max).contains(&t)) {
        return Err(CliError::Input(format!("snapshot time {t} is outside [0, t-max]")));
    }
    if format == Format::Csv && snapshot_file.is_none() && !snapshots.is_empty() {
        return Err(CliError::Input("--snapshot needs --snapshot-file in CSV mode".into()));
    }
    let impulses = impulses.iter().map(|s| parse_impulse(truss, s)).collect::<CliResult<Vec<_>>>()?;
    let options = SimulationOptions {
        t_max,
        min_amplitude,
        max_live_fronts: max_fronts,
    };
    let sim = simulate_wavefronts(truss, &impulses, &options)?;

    match format {
        Format::Json => Ok(to_json(&json!({
            "events": sim.events().iter().map(|e| json!({
                "time": e.time,
                "joint": e.joint,
                "incoming": e.incoming.iter().map(|(r, s)| json!({"rod": r, "stress": s})).collect::<Vec<_>>(),
                "outgoing": e.outgoing.iter().map(|(r, s)| json!({"rod": r, "stress": s})).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "snapshots": snapshots.iter().map(|&t| json!({
                "time": t,
                "rods": sim.snapshot(t).iter().map(|p| json!({
                    "rod": p.rod,
                    "segments": p.segments.iter().map(|(a, b, s)| json!({"z_start": a, "z_end": b, "stress": s})).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })) + "\n"),
        Format::Csv => {
            let mut events = Csv::new(&["time", "joint", "rod_in", "rod_out", "amplitude"]);
            for e in sim.events() {
                let rods_in = e.incoming.iter().map(|(r, _)| r.as_str()).collect::<Vec<_>>().join(";");
                if e.outgoing.is_empty() {
                    events.row(&[num(e.time), field(&e.joint), field(&rods_in), String::new(), String::new()]);
                }
                for (r, s) in &e.outgoing {
                    events.row(&[num(e.time), field(&e.joint), field(&rods_in), field(r), num(*s)]);
                }
            }
            if let Some(path) = snapshot_file {
                let mut snap = Csv::new(&["time", "rod", "z_start", "z_end", "stress"]);
                for &t in snapshots {
                    for p in sim.snapshot(t) {
                        for (a, b, s) in &p.segments {
                            snap.row(&[num(t), field(&p.rod), num(*a), num(*b), num(*s)]);
                        }
                    }
                }
                std::fs::write(path, snap.finish())
                    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(events.finish())
        }
    }
}

pub fn example(name: &str) -> CliResult<String> {
    let which: BuiltinStructure = name.parse()?;
    Ok(unit_builtin(which).to_json() + "\n")
}
