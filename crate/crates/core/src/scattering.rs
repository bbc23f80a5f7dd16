//! Joint transmission matrices, the reverberation-matrix baseline and the
//! event-driven step-wavefront simulator.
//!
//! Wave amplitudes are particle velocities. At joint μ, column k refers to the rod
//! to the k-th neighbour (sorted by id) and velocities are measured along ê pointing
//! away from μ. An outgoing amplitude F carries stress −Γ·F, an incoming amplitude
//! B carries stress +Γ·B, and a wave leaving μ with amplitude F arrives at the far
//! joint ν as B = −F one transit time later.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, TrussError};
use crate::layout::joint_span_basis;
use crate::model::Truss;
use crate::spectrum::{FrequencyWindow, ModeKind, NaturalFrequency, MODE_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionMatrix {
    pub joint: String,
    pub entries: DMatrix<f64>,
    /// Neighbour joint ids defining the column order.
    pub column_order: Vec<String>,
    /// Rod ids in column order.
    pub rods: Vec<String>,
    /// êᵀ(êΛêᵀ)⁻¹, mapping a joint force to outgoing amplitudes (times 1/iω).
    pub force_map: DMatrix<f64>,
}

/// T = 2êᵀ(êΛêᵀ)⁻¹êΛ − I, in the span basis of the joint's rods when they do not
/// fill the space, and T = −I at anchored joints.
fn joint_matrices(truss: &Truss, j: usize, allow_degenerate: bool) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let inc = truss.incident(j);
    let deg = inc.len();
    let dim = truss.dimension();
    if truss.joints()[j].anchored {
        return Ok((-DMatrix::identity(deg, deg), DMatrix::zeros(deg, dim)));
    }
    let cols: Vec<DVector<f64>> = inc.iter().map(|&(r, _)| truss.direction_from(r, j)).collect();
    let e_global = DMatrix::from_columns(&cols);
    let basis = joint_span_basis(truss, j);
    let e = if basis.ncols() < dim {
        if !allow_degenerate {
            return Err(TrussError::DegenerateJoint {
                joint: truss.joints()[j].id.clone(),
            });
        }
        basis.transpose() * &e_global
    } else {
        e_global
    };
    // With s = Λ^½ and A = s·êᵀ = QR, T = s⁻¹(2QQᵀ − I)s and êᵀ(êΛêᵀ)⁻¹ = s⁻¹QR⁻ᵀ.
    // Working with the orthogonal projector QQᵀ keeps T² = I to roundoff.
    let s = DVector::from_iterator(deg, inc.iter().map(|&(r, _)| truss.properties(r).line_impedance.sqrt()));
    let mut a = e.transpose();
    for (k, mut row) in a.row_iter_mut().enumerate() {
        row *= s[k];
    }
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    let rmax = r.diagonal().amax();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * rmax) {
        return Err(TrussError::DegenerateJoint {
            joint: truss.joints()[j].id.clone(),
        });
    }
    let mut t = &q * q.transpose() * 2.0 - DMatrix::identity(deg, deg);
    for i in 0..deg {
        for k in 0..deg {
            t[(i, k)] *= s[k] / s[i];
        }
    }
    let r_inv_t = r.transpose().try_inverse().expect("triangular factor has a nonzero diagonal");
    let mut force_local = &q * r_inv_t;
    for (k, mut row) in force_local.row_iter_mut().enumerate() {
        row /= s[k];
    }
    let force_map = if basis.ncols() < dim {
        &force_local * basis.transpose()
    } else {
        force_local
    };
    Ok((t, force_map))
}

pub fn transmission_matrix(truss: &Truss, joint: &str) -> Result<TransmissionMatrix> {
    let j = truss.joint_index(joint).ok_or_else(|| TrussError::Unknown {
        kind: "joint",
        name: joint.to_string(),
    })?;
    let (entries, force_map) = joint_matrices(truss, j, false)?;
    let inc = truss.incident(j);
    Ok(TransmissionMatrix {
        joint: joint.to_string(),
        entries,
        column_order: inc.iter().map(|&(_, k)| truss.joints()[k].id.clone()).collect(),
        rods: inc.iter().map(|&(r, _)| truss.rods()[r].id.clone()).collect(),
        force_map,
    })
}

/// Outgoing amplitudes F = T·B + (1/iω)·êᵀ(êΛêᵀ)⁻¹·P.
pub fn scatter(t: &TransmissionMatrix, incoming: &[Complex64], force: Option<(&[Complex64], f64)>) -> Result<Vec<Complex64>> {
    let n = t.entries.nrows();
    if incoming.len() != n {
        return Err(TrussError::DimensionMismatch {
            expected: n,
            actual: incoming.len(),
        });
    }
    let mut out: Vec<Complex64> = (0..n)
        .map(|i| (0..n).map(|k| incoming[k] * t.entries[(i, k)]).sum())
        .collect();
    if let Some((p, omega)) = force {
        let dim = t.force_map.ncols();
        if p.len() != dim {
            return Err(TrussError::DimensionMismatch {
                expected: dim,
                actual: p.len(),
            });
        }
        let factor = Complex64::new(0.0, -1.0 / omega);
        for (i, o) in out.iter_mut().enumerate() {
            let s: Complex64 = (0..dim).map(|d| p[d] * t.force_map[(i, d)]).sum();
            *o += s * factor;
        }
    }
    Ok(out)
}

/// Index of the amplitude of rod `r` at its end `end` (0 = μ, 1 = ν).
fn end_index(r: usize, end: usize) -> usize {
    2 * r + end
}

fn end_of(truss: &Truss, r: usize, j: usize) -> usize {
    if truss.endpoints(r).0 == j {
        0
    } else {
        1
    }
}

/// Per-joint transmission matrices used by the global solvers.
fn all_joint_matrices(truss: &Truss) -> Result<Vec<DMatrix<f64>>> {
    (0..truss.joints().len()).map(|j| joint_matrices(truss, j, true).map(|m| m.0)).collect()
}

/// Global amplitude system over the outgoing amplitudes of every rod end, with the
/// incoming amplitudes eliminated through the index-exchange law.
pub fn reverberation_matrix(truss: &Truss, omega: f64) -> Result<DMatrix<Complex64>> {
    let ts = all_joint_matrices(truss)?;
    Ok(reverberation_from(truss, &ts, omega))
}

fn reverberation_from(truss: &Truss, ts: &[DMatrix<f64>], omega: f64) -> DMatrix<Complex64> {
    let n = 2 * truss.rods().len();
    let mut a = DMatrix::<Complex64>::identity(n, n);
    for (j, t) in ts.iter().enumerate() {
        let inc = truss.incident(j);
        for (k, &(rk, _)) in inc.iter().enumerate() {
            let row = end_index(rk, end_of(truss, rk, j));
            for (l, &(rl, _)) in inc.iter().enumerate() {
                let tkl = t[(k, l)];
                if tkl == 0.0 {
                    continue;
                }
                // B at this end = −F at the far end · e^{−iωτ}
                let far = end_index(rl, 1 - end_of(truss, rl, j));
                let phase = Complex64::from_polar(1.0, -omega * truss.properties(rl).transit_time);
                a[(row, far)] += phase * tkl;
            }
        }
    }
    a
}

/// |det| of the reverberation system.
pub fn reverberation_determinant(truss: &Truss, omega: f64) -> Result<f64> {
    let a = reverberation_matrix(truss, omega)?;
    Ok(complex_log_abs_det(&a).exp())
}

fn complex_log_abs_det(a: &DMatrix<Complex64>) -> f64 {
    let lu = a.clone().lu();
    let u = lu.u();
    (0..u.nrows()).map(|i| u[(i, i)].norm().ln()).sum()
}

fn sigma_ratio(a: &DMatrix<Complex64>) -> (f64, Vec<f64>) {
    let mut s: Vec<f64> = a.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    let ratio = if s[0] > 0.0 { s[s.len() - 1] / s[0] } else { 0.0 };
    (ratio, s)
}

/// Threshold on σ_min/σ_max for accepting a minimum of |det| as a zero.
pub const REVERBERATION_ACCEPT: f64 = 1e-7;

/// Zeros of the reverberation determinant: grid minima of |det| refined by a
/// golden-section search on σ_min/σ_max.
pub fn reverberation_frequencies(truss: &Truss, window: &FrequencyWindow) -> Result<Vec<NaturalFrequency>> {
    window.validate()?;
    let ts = all_joint_matrices(truss)?;
    let n = window.grid_points;
    let grid: Vec<f64> = (0..n)
        .map(|i| window.omega_min + (window.omega_max - window.omega_min) * i as f64 / (n - 1) as f64)
        .collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&w| complex_log_abs_det(&reverberation_from(truss, &ts, w)))
        .collect();
    let minima: Vec<usize> = (1..n - 1)
        .filter(|&i| values[i] < values[i - 1] && values[i] <= values[i + 1])
        .collect();
    let ratio = |w: f64| sigma_ratio(&reverberation_from(truss, &ts, w)).0;
    let mut found: Vec<NaturalFrequency> = minima
        .par_iter()
        .filter_map(|&i| {
            let w = golden_min(&ratio, grid[i - 1], grid[i + 1], 1e-15);
            let (r, s) = sigma_ratio(&reverberation_from(truss, &ts, w));
            (r <= REVERBERATION_ACCEPT).then(|| NaturalFrequency {
                omega: w,
                kind: ModeKind::Regular,
                multiplicity: s.iter().filter(|&&x| x <= 10.0 * MODE_TOL * s[0]).count(),
                resonant_order: None,
            })
        })
        .collect();
    found.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    found.dedup_by(|b, a| (b.omega - a.omega).abs() <= 1e-9 * a.omega);
    Ok(found)
}

fn golden_min(f: &(dyn Fn(f64) -> f64 + Sync), mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= rel_tol * 0.5 * (a + b).abs() {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Real degrees of freedom of the reverberation and Laplacian systems.
pub fn system_sizes(truss: &Truss) -> (usize, usize) {
    (4 * truss.rods().len(), truss.dimension() * truss.joints().len())
}

// ---------------------------------------------------------------------------
// Wavefront simulator

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Launched at μ, travelling toward ν.
    TowardNu,
    /// Launched at ν, travelling toward μ.
    TowardMu,
}

impl std::str::FromStr for Direction {
    type Err = TrussError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toward_nu" | "forward" | "+" => Ok(Direction::TowardNu),
            "toward_mu" | "backward" | "-" => Ok(Direction::TowardMu),
            other => Err(TrussError::Unknown {
                kind: "direction",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Impulse {
    pub rod: String,
    pub direction: Direction,
    /// Stress step carried by the front (Pa, tension positive).
    pub stress: f64,
    pub start_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wavefront {
    pub rod: String,
    pub direction: Direction,
    /// Distance from μ.
    pub position: f64,
    pub event_time: f64,
    pub stress_amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterEvent {
    pub time: f64,
    pub joint: String,
    /// (rod id, stress of the arriving front)
    pub incoming: Vec<(String, f64)>,
    /// (rod id, stress of the launched front); dropped fronts are omitted.
    pub outgoing: Vec<(String, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationOptions {
    pub t_max: f64,
    /// Fronts with |stress| below this are not launched (exact zeros never are).
    pub min_amplitude: f64,
    pub max_live_fronts: usize,
}

impl SimulationOptions {
    pub fn new(t_max: f64, min_amplitude: f64) -> Self {
        SimulationOptions {
            t_max,
            min_amplitude,
            max_live_fronts: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Launch {
    rod: usize,
    from_mu: bool,
    time: f64,
    stress: f64,
}

#[derive(Clone, Debug, PartialEq)]
struct Arrival {
    time: f64,
    joint: usize,
    rod: usize,
    /// Incoming velocity amplitude in the arrival joint's frame.
    amplitude: f64,
}

/// Heap entry ordered by (time, joint id, rod id), earliest first.
struct Queued {
    arrival: Arrival,
    joint_id: String,
    rod_id: String,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .arrival
            .time
            .total_cmp(&self.arrival.time)
            .then_with(|| other.joint_id.cmp(&self.joint_id))
            .then_with(|| other.rod_id.cmp(&self.rod_id))
    }
}

/// Piecewise-constant stress along one rod; segments as fractions of the length.
#[derive(Clone, Debug, PartialEq)]
pub struct RodProfile {
    pub rod: String,
    /// (z/L start, z/L end, stress)
    pub segments: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    rod_ids: Vec<String>,
    lengths: Vec<f64>,
    speeds: Vec<f64>,
    launches: Vec<Launch>,
    events: Vec<ScatterEvent>,
    t_max: f64,
}

impl Simulation {
    pub fn events(&self) -> &[ScatterEvent] {
        &self.events
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Number of fronts ever launched (impulses included).
    pub fn launched(&self) -> usize {
        self.launches.len()
    }

    fn covered(&self, l: &Launch, t: f64) -> Option<(f64, f64)> {
        if l.time > t {
            return None;
        }
        let d = ((t - l.time) * self.speeds[l.rod] / self.lengths[l.rod]).min(1.0);
        Some(if l.from_mu { (0.0, d) } else { (1.0 - d, 1.0) })
    }

    /// Stress at fractional position `z` along `rod` at time `t`.
    pub fn stress_at(&self, rod: &str, z: f64, t: f64) -> Option<f64> {
        let r = self.rod_ids.iter().position(|id| id == rod)?;
        Some(
            self.launches
                .iter()
                .filter(|l| l.rod == r)
                .filter_map(|l| self.covered(l, t).map(|c| (c, l.stress)))
                .filter(|((a, b), _)| *a <= z && z <= *b)
                .fold(0.0, |acc, (_, s)| acc + s),
        )
    }

    /// Fronts still travelling at time `t`.
    pub fn fronts_at(&self, t: f64) -> Vec<Wavefront> {
        self.launches
            .iter()
            .filter(|l| {
                let tau = self.lengths[l.rod] / self.speeds[l.rod];
                l.time <= t && t < l.time + tau
            })
            .map(|l| {
                let d = (t - l.time) * self.speeds[l.rod];
                Wavefront {
                    rod: self.rod_ids[l.rod].clone(),
                    direction: if l.from_mu { Direction::TowardNu } else { Direction::TowardMu },
                    position: if l.from_mu { d } else { self.lengths[l.rod] - d },
                    event_time: l.time,
                    stress_amplitude: l.stress,
                }
            })
            .collect()
    }

    /// Stress profile of every rod at time `t`.
    pub fn snapshot(&self, t: f64) -> Vec<RodProfile> {
        (0..self.rod_ids.len())
            .map(|r| {
                let pieces: Vec<((f64, f64), f64)> = self
                    .launches
                    .iter()
                    .filter(|l| l.rod == r)
                    .filter_map(|l| self.covered(l, t).map(|c| (c, l.stress)))
                    .collect();
                let mut cuts = vec![0.0, 1.0];
                for ((a, b), _) in &pieces {
                    cuts.push(*a);
                    cuts.push(*b);
                }
                cuts.sort_by(|a, b| a.total_cmp(b));
                cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
                let segments = cuts
                    .windows(2)
                    .map(|w| {
                        let mid = 0.5 * (w[0] + w[1]);
                        let s = pieces.iter().filter(|((a, b), _)| *a <= mid && mid <= *b).fold(0.0, |acc, (_, s)| acc + s);
                        (w[0], w[1], s)
                    })
                    .collect();
                RodProfile {
                    rod: self.rod_ids[r].clone(),
                    segments,
                }
            })
            .collect()
    }
}

/// Event-driven propagation of step fronts. Simultaneous arrivals at one joint
/// (within 1e-12·τ_min) are merged into one scattering event.
pub fn simulate_wavefronts(truss: &Truss, impulses: &[Impulse], options: &SimulationOptions) -> Result<Simulation> {
    if !(options.t_max >= 0.0 && options.t_max.is_finite()) {
        return Err(TrussError::validation("option", "t_max", "must be finite and nonnegative"));
    }
    let ts = all_joint_matrices(truss)?;
    let n_rods = truss.rods().len();
    let impedance: Vec<f64> = (0..n_rods).map(|r| truss.properties(r).impedance).collect();
    let tau: Vec<f64> = (0..n_rods).map(|r| truss.properties(r).transit_time).collect();
    let merge_tol = 1e-12 * truss.min_transit_time();

    let mut sim = Simulation {
        rod_ids: truss.rods().iter().map(|r| r.id.clone()).collect(),
        lengths: (0..n_rods).map(|r| truss.properties(r).length).collect(),
        speeds: (0..n_rods).map(|r| truss.properties(r).wave_speed).collect(),
        launches: Vec::new(),
        events: Vec::new(),
        t_max: options.t_max,
    };
    let mut heap = BinaryHeap::new();

    let launch = |sim: &mut Simulation, heap: &mut BinaryHeap<Queued>, rod: usize, from: usize, time: f64, velocity: f64| {
        let (mu, nu) = truss.endpoints(rod);
        sim.launches.push(Launch {
            rod,
            from_mu: from == mu,
            time,
            stress: -impedance[rod] * velocity,
        });
        let arrive = time + tau[rod];
        if arrive <= options.t_max + merge_tol {
            let to = if from == mu { nu } else { mu };
            heap.push(Queued {
                arrival: Arrival {
                    time: arrive,
                    joint: to,
                    rod,
                    amplitude: -velocity,
                },
                joint_id: truss.joints()[to].id.clone(),
                rod_id: truss.rods()[rod].id.clone(),
            });
        }
    };

    for imp in impulses {
        let r = truss.rod_index(&imp.rod).ok_or_else(|| TrussError::Unknown {
            kind: "rod",
            name: imp.rod.clone(),
        })?;
        if !(imp.start_time >= 0.0 && imp.start_time.is_finite() && imp.stress.is_finite()) {
            return Err(TrussError::validation("impulse", &imp.rod, "start time and stress must be finite, start time nonnegative"));
        }
        if imp.start_time > options.t_max || imp.stress == 0.0 {
            continue;
        }
        let (mu, nu) = truss.endpoints(r);
        let from = if imp.direction == Direction::TowardNu { mu } else { nu };
        launch(&mut sim, &mut heap, r, from, imp.start_time, -imp.stress / impedance[r]);
    }

    while let Some(first) = heap.pop() {
        if heap.len() + 1 > options.max_live_fronts {
            return Err(TrussError::EventExplosion {
                live: heap.len() + 1,
                cap: options.max_live_fronts,
            });
        }
        let t0 = first.arrival.time;
        let mut batch = vec![first.arrival];
        while heap.peek().is_some_and(|q| q.arrival.time <= t0 + merge_tol) {
            batch.push(heap.pop().unwrap().arrival);
        }
        let mut joints: Vec<usize> = batch.iter().map(|a| a.joint).collect();
        joints.sort_by(|a, b| truss.joints()[*a].id.cmp(&truss.joints()[*b].id));
        joints.dedup();
        for j in joints {
            let inc = truss.incident(j);
            let mut b = DVector::zeros(inc.len());
            let mut incoming = Vec::new();
            let mut time = f64::INFINITY;
            for a in batch.iter().filter(|a| a.joint == j) {
                let k = inc.iter().position(|&(r, _)| r == a.rod).expect("arrival rod is incident");
                b[k] += a.amplitude;
                time = time.min(a.time);
                incoming.push((truss.rods()[a.rod].id.clone(), impedance[a.rod] * a.amplitude));
            }
            let f = &ts[j] * &b;
            // Cancellations inside T·B leave roundoff residue where the exact value is zero.
            let floor = 64.0 * f64::EPSILON * b.amax();
            let mut outgoing = Vec::new();
            for (k, &(r, _)) in inc.iter().enumerate() {
                let stress = -impedance[r] * f[k];
                if f[k].abs() <= floor || stress.abs() < options.min_amplitude {
                    continue;
                }
                outgoing.push((truss.rods()[r].id.clone(), stress));
                launch(&mut sim, &mut heap, r, j, time, f[k]);
            }
            sim.events.push(ScatterEvent {
                time,
                joint: truss.joints()[j].id.clone(),
                incoming,
                outgoing,
            });
        }
    }
    Ok(sim)
}
