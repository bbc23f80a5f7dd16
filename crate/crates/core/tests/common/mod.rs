#![allow(dead_code)]

use rand::Rng;
use truss_core::model::{Joint, Material, Rod, Truss};

pub fn joint(id: &str, position: &[f64], anchored: bool) -> Joint {
    Joint { id: id.to_string(), position: position.to_vec(), anchored }
}

pub fn rod(id: &str, a: &str, b: &str, area: f64, material: &str) -> Rod {
    Rod { id: id.to_string(), joints: [a.to_string(), b.to_string()], area, material: material.to_string() }
}

/// Unit square (E = ρ = 1) with per-rod areas, so Λ equals the area. Order: 12, 24, 34, 13, 23.
pub fn square_with_lambdas(l: [f64; 5]) -> Truss {
    let joints = vec![
        joint("1", &[0.0, 0.0], false),
        joint("2", &[1.0, 0.0], false),
        joint("3", &[0.0, 1.0], false),
        joint("4", &[1.0, 1.0], false),
    ];
    let pairs = [("1", "2"), ("2", "4"), ("3", "4"), ("1", "3"), ("2", "3")];
    let rods = pairs.iter().zip(l).map(|((a, b), area)| rod(&format!("{a}{b}"), a, b, area, "unit")).collect();
    Truss::new(2, false, vec![Material::unit()], joints, rods).unwrap()
}

/// A joint "c" at the origin with `degree` rods to random leaves, random Λ and c.
pub fn random_star(rng: &mut impl Rng, dim: usize, degree: usize) -> Truss {
    let mut joints = vec![joint("c", &vec![0.0; dim], false)];
    let mut rods = Vec::new();
    let materials: Vec<Material> = (0..degree)
        .map(|k| Material::new(format!("m{k}"), rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0)))
        .collect();
    for k in 0..degree {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let id = format!("l{k}");
        joints.push(joint(&id, &p, false));
        rods.push(rod(&format!("r{k}"), "c", &id, rng.gen_range(0.2..3.0), &format!("m{k}")));
    }
    Truss::new(dim, false, materials, joints, rods).unwrap()
}

/// Random connected truss: a spanning tree plus a few chords, random properties.
pub fn random_truss(rng: &mut impl Rng, dim: usize) -> Truss {
    let n = rng.gen_range(3..8);
    let joints: Vec<Joint> = (0..n)
        .map(|i| {
            let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            joint(&format!("j{i}"), &p, i == 0 && rng.gen_bool(0.3))
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 1..n {
        pairs.push((rng.gen_range(0..i), i));
    }
    for _ in 0..rng.gen_range(0..n) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let (a, b) = (a.min(b), a.max(b));
        if a != b && !pairs.contains(&(a, b)) {
            pairs.push((a, b));
        }
    }
    let materials = vec![Material::new("a", rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0)), Material::new("b", 2.0, 0.7)];
    let rods = pairs
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| {
            rod(&format!("r{k}"), &format!("j{a}"), &format!("j{b}"), rng.gen_range(0.2..3.0), if k % 2 == 0 { "a" } else { "b" })
        })
        .collect();
    Truss::new(dim, false, materials, joints, rods).unwrap()
}

/// Smallest distance, in units of ωτ, from any rod's pole.
pub fn pole_margin(truss: &Truss, omega: f64) -> f64 {
    (0..truss.rods().len())
        .map(|r| {
            let x = omega * truss.properties(r).transit_time;
            let n = (x / std::f64::consts::PI).round().max(1.0);
            (x - n * std::f64::consts::PI).abs()
        })
        .fold(f64::INFINITY, f64::min)
}
