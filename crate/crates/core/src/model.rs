//! Structure data model: materials, joints, rods, derived rod quantities,
//! the JSON structure file, subdivision and the two built-in structures.

use std::collections::{BTreeMap, HashMap, HashSet};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrussError};

/// Linearly elastic rod material.
#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub name: String,
    /// Young's modulus E in Pa.
    pub youngs_modulus: f64,
    /// Mass density rho in kg/m^3.
    pub density: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, youngs_modulus: f64, density: f64) -> Self {
        Material {
            name: name.into(),
            youngs_modulus,
            density,
        }
    }

    /// E = rho = 1.
    pub fn unit() -> Self {
        Material::new("unit", 1.0, 1.0)
    }

    pub fn steel() -> Self {
        Material::new("steel", 200e9, 7850.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub id: String,
    pub position: Vec<f64>,
    /// Displacement pinned to zero; an external reaction force is allowed.
    pub anchored: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rod {
    pub id: String,
    /// Ordered endpoint pair (mu, nu); the rod's local z runs from mu to nu.
    pub joints: [String; 2],
    /// Cross-sectional area in m^2.
    pub area: f64,
    pub material: String,
}

/// Per-rod spectral quantities derived from geometry and material.
#[derive(Clone, Debug, PartialEq)]
pub struct RodProperties {
    /// L
    pub length: f64,
    /// c = sqrt(E / rho)
    pub wave_speed: f64,
    /// Gamma = sqrt(E * rho)
    pub impedance: f64,
    /// Lambda = A * Gamma
    pub line_impedance: f64,
    /// tau = L / c
    pub transit_time: f64,
    /// k = A E / L = Lambda / tau
    pub spring_stiffness: f64,
    /// rho A L
    pub mass: f64,
    /// Unit vector from mu to nu in global coordinates.
    pub unit_vector: DVector<f64>,
}

impl RodProperties {
    fn compute(material_e: f64, material_rho: f64, area: f64, from: &[f64], to: &[f64]) -> Self {
        let delta = DVector::from_iterator(from.len(), from.iter().zip(to).map(|(a, b)| b - a));
        let length = delta.norm();
        let wave_speed = (material_e / material_rho).sqrt();
        let impedance = (material_e * material_rho).sqrt();
        let line_impedance = area * impedance;
        let transit_time = length / wave_speed;
        RodProperties {
            length,
            wave_speed,
            impedance,
            line_impedance,
            transit_time,
            spring_stiffness: area * material_e / length,
            mass: material_rho * area * length,
            unit_vector: delta / length,
        }
    }
}

/// Immutable, validated truss structure.
#[derive(Clone, Debug)]
pub struct Truss {
    dimension: usize,
    dimensionless: bool,
    materials: BTreeMap<String, Material>,
    joints: Vec<Joint>,
    rods: Vec<Rod>,
    joint_lookup: HashMap<String, usize>,
    endpoints: Vec<(usize, usize)>,
    properties: Vec<RodProperties>,
    /// Per joint: (rod index, neighbouring joint index), sorted by neighbour id.
    incidence: Vec<Vec<(usize, usize)>>,
}

impl Truss {
    /// Validates and builds a truss. Every validation error names the offending entity.
    pub fn new(
        dimension: usize,
        dimensionless: bool,
        materials: Vec<Material>,
        joints: Vec<Joint>,
        rods: Vec<Rod>,
    ) -> Result<Self> {
        if dimension != 2 && dimension != 3 {
            return Err(TrussError::validation("truss", "dimension", format!("dimension must be 2 or 3, got {dimension}")));
        }
        let mut material_map = BTreeMap::new();
        for m in materials {
            if !(m.youngs_modulus > 0.0 && m.youngs_modulus.is_finite()) {
                return Err(TrussError::validation("material", &m.name, "youngs_modulus must be positive and finite"));
            }
            if !(m.density > 0.0 && m.density.is_finite()) {
                return Err(TrussError::validation("material", &m.name, "density must be positive and finite"));
            }
            if material_map.insert(m.name.clone(), m.clone()).is_some() {
                return Err(TrussError::validation("material", &m.name, "duplicate material name"));
            }
        }

        let mut joint_lookup = HashMap::new();
        for (i, j) in joints.iter().enumerate() {
            if j.position.len() != dimension {
                return Err(TrussError::validation(
                    "joint",
                    &j.id,
                    format!("position has {} coordinates but the truss is {dimension}-dimensional", j.position.len()),
                ));
            }
            if j.position.iter().any(|x| !x.is_finite()) {
                return Err(TrussError::validation("joint", &j.id, "position must be finite"));
            }
            if joint_lookup.insert(j.id.clone(), i).is_some() {
                return Err(TrussError::validation("joint", &j.id, "duplicate joint id"));
            }
        }

        if rods.is_empty() {
            return Err(TrussError::validation("truss", "rods", "at least one rod is required"));
        }

        let mut rod_ids = HashSet::new();
        let mut pairs = HashSet::new();
        let mut endpoints = Vec::with_capacity(rods.len());
        let mut properties = Vec::with_capacity(rods.len());
        for r in &rods {
            if !rod_ids.insert(r.id.clone()) {
                return Err(TrussError::validation("rod", &r.id, "duplicate rod id"));
            }
            let lookup = |id: &str| {
                joint_lookup
                    .get(id)
                    .copied()
                    .ok_or_else(|| TrussError::validation("rod", &r.id, format!("unknown joint '{id}'")))
            };
            let a = lookup(&r.joints[0])?;
            let b = lookup(&r.joints[1])?;
            if a == b {
                return Err(TrussError::validation("rod", &r.id, "endpoints must be distinct"));
            }
            if !pairs.insert((a.min(b), a.max(b))) {
                return Err(TrussError::validation("rod", &r.id, "duplicate endpoint pair"));
            }
            if !(r.area > 0.0 && r.area.is_finite()) {
                return Err(TrussError::validation("rod", &r.id, "area must be positive and finite"));
            }
            let (e, rho) = match material_map.get(&r.material) {
                Some(m) if !dimensionless => (m.youngs_modulus, m.density),
                Some(_) => (1.0, 1.0),
                None if dimensionless => (1.0, 1.0),
                None => {
                    return Err(TrussError::validation("rod", &r.id, format!("unknown material '{}'", r.material)));
                }
            };
            let props = RodProperties::compute(e, rho, r.area, &joints[a].position, &joints[b].position);
            if !(props.length > 0.0) {
                return Err(TrussError::validation("rod", &r.id, "zero rest length"));
            }
            endpoints.push((a, b));
            properties.push(props);
        }

        let mut incidence = vec![Vec::new(); joints.len()];
        for (r, &(a, b)) in endpoints.iter().enumerate() {
            incidence[a].push((r, b));
            incidence[b].push((r, a));
        }
        for list in &mut incidence {
            list.sort_by(|x, y| joints[x.1].id.cmp(&joints[y.1].id));
        }

        let truss = Truss {
            dimension,
            dimensionless,
            materials: material_map,
            joints,
            rods,
            joint_lookup,
            endpoints,
            properties,
            incidence,
        };
        if !truss.is_connected() {
            log::warn!("truss graph is disconnected; analysis proceeds per component");
        }
        Ok(truss)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_dimensionless(&self) -> bool {
        self.dimensionless
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn rods(&self) -> &[Rod] {
        &self.rods
    }

    pub fn materials(&self) -> impl Iterator<Item = &Material> {
        self.materials.values()
    }

    pub fn joint_index(&self, id: &str) -> Option<usize> {
        self.joint_lookup.get(id).copied()
    }

    pub fn rod_index(&self, id: &str) -> Option<usize> {
        self.rods.iter().position(|r| r.id == id)
    }

    /// Joint indices (mu, nu) of rod `r`.
    pub fn endpoints(&self, r: usize) -> (usize, usize) {
        self.endpoints[r]
    }

    pub fn properties(&self, r: usize) -> &RodProperties {
        &self.properties[r]
    }

    /// Derived quantities of a rod belonging to this truss.
    pub fn rod_properties(&self, rod: &Rod) -> Result<&RodProperties> {
        let r = self.rod_index(&rod.id).ok_or_else(|| TrussError::Unknown {
            kind: "rod",
            name: rod.id.clone(),
        })?;
        Ok(&self.properties[r])
    }

    /// Rods incident to joint `j` as (rod index, neighbour joint index), sorted by neighbour id.
    pub fn incident(&self, j: usize) -> &[(usize, usize)] {
        &self.incidence[j]
    }

    /// Unit vector of rod `r` pointing away from joint `j` (one of its endpoints).
    pub fn direction_from(&self, r: usize, j: usize) -> DVector<f64> {
        let e = &self.properties[r].unit_vector;
        if self.endpoints[r].0 == j {
            e.clone()
        } else {
            -e
        }
    }

    pub fn anchored_count(&self) -> usize {
        self.joints.iter().filter(|j| j.anchored).count()
    }

    pub fn has_anchors(&self) -> bool {
        self.joints.iter().any(|j| j.anchored)
    }

    pub fn total_mass(&self) -> f64 {
        self.properties.iter().map(|p| p.mass).sum()
    }

    pub fn min_transit_time(&self) -> f64 {
        self.properties.iter().map(|p| p.transit_time).fold(f64::INFINITY, f64::min)
    }

    pub fn is_connected(&self) -> bool {
        if self.joints.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.joints.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(j) = stack.pop() {
            for &(_, k) in &self.incidence[j] {
                if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Replaces every rod by `n` collinear rods of equal length.
    ///
    /// New joints are named `{rod id}#k` for k = 1..n-1 and new rods `{rod id}.k`
    /// for k = 1..n. Original joints keep their ids and anchor flags.
    pub fn subdivide(&self, n: usize) -> Truss {
        assert!(n >= 1, "subdivision count must be positive");
        if n == 1 {
            return self.clone();
        }
        let mut joints = self.joints.clone();
        let mut rods = Vec::with_capacity(self.rods.len() * n);
        for (r, rod) in self.rods.iter().enumerate() {
            let (a, b) = self.endpoints[r];
            let pa = &self.joints[a].position;
            let pb = &self.joints[b].position;
            let interior: Vec<String> = (1..n).map(|k| format!("{}#{k}", rod.id)).collect();
            for (k, id) in interior.iter().enumerate() {
                let t = (k + 1) as f64 / n as f64;
                let position = pa.iter().zip(pb).map(|(x, y)| x + (y - x) * t).collect();
                joints.push(Joint {
                    id: id.clone(),
                    position,
                    anchored: false,
                });
            }
            for k in 0..n {
                let from = if k == 0 { rod.joints[0].clone() } else { interior[k - 1].clone() };
                let to = if k == n - 1 { rod.joints[1].clone() } else { interior[k].clone() };
                rods.push(Rod {
                    id: format!("{}.{}", rod.id, k + 1),
                    joints: [from, to],
                    area: rod.area,
                    material: rod.material.clone(),
                });
            }
        }
        Truss::new(
            self.dimension,
            self.dimensionless,
            self.materials.values().cloned().collect(),
            joints,
            rods,
        )
        .expect("subdividing a valid truss yields a valid truss")
    }

    pub fn to_document(&self) -> TrussDocument {
        TrussDocument {
            dimension: self.dimension,
            dimensionless: self.dimensionless,
            materials: self
                .materials
                .values()
                .map(|m| {
                    (
                        m.name.clone(),
                        MaterialDocument {
                            youngs_modulus: m.youngs_modulus,
                            density: m.density,
                        },
                    )
                })
                .collect(),
            joints: self
                .joints
                .iter()
                .map(|j| JointDocument {
                    id: j.id.clone(),
                    position: j.position.clone(),
                    anchored: j.anchored,
                })
                .collect(),
            rods: self
                .rods
                .iter()
                .map(|r| RodDocument {
                    id: Some(r.id.clone()),
                    joints: r.joints.clone(),
                    area: r.area,
                    material: r.material.clone(),
                })
                .collect(),
        }
    }

    /// Pretty-printed structure file.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("structure document serializes")
    }
}

/// On-disk structure file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrussDocument {
    pub dimension: usize,
    #[serde(default)]
    pub dimensionless: bool,
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialDocument>,
    pub joints: Vec<JointDocument>,
    pub rods: Vec<RodDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialDocument {
    pub youngs_modulus: f64,
    pub density: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct JointDocument {
    pub id: String,
    pub position: Vec<f64>,
    #[serde(default)]
    pub anchored: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RodDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub joints: [String; 2],
    pub area: f64,
    #[serde(default)]
    pub material: String,
}

impl TrussDocument {
    pub fn into_truss(self) -> Result<Truss> {
        let materials = self
            .materials
            .into_iter()
            .map(|(name, m)| Material::new(name, m.youngs_modulus, m.density))
            .collect();
        let joints = self
            .joints
            .into_iter()
            .map(|j| Joint {
                id: j.id,
                position: j.position,
                anchored: j.anchored,
            })
            .collect();
        let rods = self
            .rods
            .into_iter()
            .map(|r| Rod {
                id: r.id.unwrap_or_else(|| format!("{}{}", r.joints[0], r.joints[1])),
                joints: r.joints,
                area: r.area,
                material: r.material,
            })
            .collect();
        Truss::new(self.dimension, self.dimensionless, materials, joints, rods)
    }
}

/// Parses and validates a structure file.
pub fn load_truss(document: &str) -> Result<Truss> {
    let doc: TrussDocument = serde_json::from_str(document).map_err(|e| TrussError::Parse(e.to_string()))?;
    doc.into_truss()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinStructure {
    /// Unit square with a crossbar between joints 2 and 3.
    Square,
    /// Seven-rod bridge of equilateral triangles anchored at joints 1 and 5.
    Bridge,
}

impl BuiltinStructure {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinStructure::Square => "square",
            BuiltinStructure::Bridge => "bridge",
        }
    }
}

impl std::str::FromStr for BuiltinStructure {
    type Err = TrussError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(BuiltinStructure::Square),
            "bridge" => Ok(BuiltinStructure::Bridge),
            other => Err(TrussError::Unknown {
                kind: "builtin structure",
                name: other.to_string(),
            }),
        }
    }
}

pub fn builtin_structure(name: BuiltinStructure, scale: f64, material: Material, area: f64) -> Result<Truss> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(TrussError::validation("truss", name.name(), "scale must be positive"));
    }
    let l = scale;
    let h = l * 3f64.sqrt() / 2.0;
    let (joints, connectivity, anchors): (Vec<(&str, [f64; 2])>, &[(&str, &str)], &[&str]) = match name {
        BuiltinStructure::Square => (
            vec![("1", [0.0, 0.0]), ("2", [l, 0.0]), ("3", [0.0, l]), ("4", [l, l])],
            &[("1", "2"), ("1", "3"), ("2", "4"), ("3", "4"), ("2", "3")],
            &[],
        ),
        BuiltinStructure::Bridge => (
            vec![
                ("1", [-l, 0.0]),
                ("2", [-l / 2.0, h]),
                ("3", [0.0, 0.0]),
                ("4", [l / 2.0, h]),
                ("5", [l, 0.0]),
            ],
            &[("1", "2"), ("1", "3"), ("2", "3"), ("2", "4"), ("3", "4"), ("3", "5"), ("4", "5")],
            &["1", "5"],
        ),
    };
    let joints = joints
        .into_iter()
        .map(|(id, p)| Joint {
            id: id.to_string(),
            position: p.to_vec(),
            anchored: anchors.contains(&id),
        })
        .collect();
    let rods = connectivity
        .iter()
        .map(|(a, b)| Rod {
            id: format!("{a}{b}"),
            joints: [a.to_string(), b.to_string()],
            area,
            material: material.name.clone(),
        })
        .collect();
    Truss::new(2, false, vec![material], joints, rods)
}

/// Built-in structure with E = rho = A = 1 and unit scale.
pub fn unit_builtin(name: BuiltinStructure) -> Truss {
    builtin_structure(name, 1.0, Material::unit(), 1.0).expect("built-in structures are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn single_rod(e: f64, rho: f64, area: f64, length: f64) -> Truss {
        Truss::new(
            2,
            false,
            vec![Material::new("m", e, rho)],
            vec![
                Joint { id: "a".into(), position: vec![0.0, 0.0], anchored: false },
                Joint { id: "b".into(), position: vec![length, 0.0], anchored: false },
            ],
            vec![Rod { id: "ab".into(), joints: ["a".into(), "b".into()], area, material: "m".into() }],
        )
        .unwrap()
    }

    #[test]
    fn unit_rod_properties() {
        let t = single_rod(1.0, 1.0, 1.0, 1.0);
        let p = t.properties(0);
        for v in [p.wave_speed, p.impedance, p.line_impedance, p.transit_time, p.spring_stiffness, p.length] {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn scaled_rod_properties() {
        let t = single_rod(4.0, 1.0, 1.0, 2.0);
        let p = t.properties(0);
        assert!((p.wave_speed - 2.0).abs() < 1e-15);
        assert!((p.impedance - 2.0).abs() < 1e-15);
        assert!((p.line_impedance - 2.0).abs() < 1e-15);
        assert!((p.transit_time - 1.0).abs() < 1e-15);
        assert!((p.spring_stiffness - 2.0).abs() < 1e-15);
    }

    #[test]
    fn steel_wave_speed() {
        // sqrt(200e9 / 7850) evaluated by hand: 25477707.006... -> 5047.5447...
        let t = single_rod(200e9, 7850.0, 1e-4, 3.0);
        let p = t.properties(0);
        assert!(rel(p.wave_speed, 5047.544_5) < 1e-7);
        assert!(rel(p.line_impedance / p.transit_time, 1e-4 * 200e9 / 3.0) < 1e-12);
        assert!(rel(p.transit_time * p.wave_speed, 3.0) < 1e-12);
    }

    #[test]
    fn square_geometry() {
        let sq = unit_builtin(BuiltinStructure::Square);
        assert_eq!(sq.joints().len(), 4);
        let ids: Vec<_> = sq.rods().iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["12", "13", "24", "34", "23"]);
        let cross = sq.rod_index("23").unwrap();
        assert!((sq.properties(cross).length - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bridge_geometry() {
        let br = unit_builtin(BuiltinStructure::Bridge);
        assert_eq!(br.anchored_count(), 2);
        let j2 = &br.joints()[br.joint_index("2").unwrap()];
        assert!((j2.position[0] + 0.5).abs() < 1e-15);
        assert!((j2.position[1] - 3f64.sqrt() / 2.0).abs() < 1e-15);

        let br2 = builtin_structure(BuiltinStructure::Bridge, 2.0, Material::unit(), 1.0).unwrap();
        for r in 0..br2.rods().len() {
            assert!((br2.properties(r).length - 2.0).abs() < 1e-14);
            assert!((br2.properties(r).transit_time - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_length_rod_is_named() {
        let doc = r#"{"dimension": 2, "materials": {"m": {"youngs_modulus": 1, "density": 1}},
            "joints": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [0, 0]}],
            "rods": [{"id": "bad", "joints": ["a", "b"], "area": 1, "material": "m"}]}"#;
        let err = load_truss(doc).unwrap_err();
        assert!(matches!(err, TrussError::Validation { entity: "rod", ref id, .. } if id == "bad"), "{err}");
    }

    #[test]
    fn validation_errors_name_entities() {
        let base = |joints: &str, rods: &str| {
            format!(
                r#"{{"dimension": 2, "materials": {{"m": {{"youngs_modulus": 1, "density": 1}}}},
                "joints": {joints}, "rods": {rods}}}"#
            )
        };
        let dup = base(
            r#"[{"id": "a", "position": [0, 0]}, {"id": "a", "position": [1, 0]}]"#,
            r#"[{"joints": ["a", "a"], "area": 1, "material": "m"}]"#,
        );
        assert!(load_truss(&dup).unwrap_err().to_string().contains("'a'"));

        let mixed = base(
            r#"[{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0, 0]}]"#,
            r#"[{"joints": ["a", "b"], "area": 1, "material": "m"}]"#,
        );
        assert!(load_truss(&mixed).unwrap_err().to_string().contains("'b'"));

        let unknown = base(
            r#"[{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0]}]"#,
            r#"[{"joints": ["a", "b"], "area": 1, "material": "steel"}]"#,
        );
        let msg = load_truss(&unknown).unwrap_err().to_string();
        assert!(msg.contains("'ab'") && msg.contains("steel"), "{msg}");

        assert!(matches!(load_truss("{not json"), Err(TrussError::Parse(_))));
    }

    #[test]
    fn dimensionless_ignores_materials() {
        let doc = r#"{"dimension": 2, "dimensionless": true,
            "joints": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [3, 0]}],
            "rods": [{"joints": ["a", "b"], "area": 2}]}"#;
        let t = load_truss(doc).unwrap();
        let p = t.properties(0);
        assert_eq!(t.rods()[0].id, "ab");
        assert!((p.wave_speed - 1.0).abs() < 1e-15);
        assert!((p.line_impedance - 2.0).abs() < 1e-15);
        assert!((p.transit_time - 3.0).abs() < 1e-15);
    }

    #[test]
    fn subdivision_counts() {
        let sq = unit_builtin(BuiltinStructure::Square);
        let one = sq.subdivide(1);
        assert_eq!((one.joints().len(), one.rods().len()), (4, 5));
        let two = sq.subdivide(2);
        assert_eq!((two.joints().len(), two.rods().len()), (9, 10));
        assert!(two.joint_index("23#1").is_some());

        let br = unit_builtin(BuiltinStructure::Bridge).subdivide(4);
        assert_eq!((br.joints().len(), br.rods().len()), (26, 28));
        assert_eq!(br.anchored_count(), 2);
    }

    #[test]
    fn disconnected_is_not_an_error() {
        let doc = r#"{"dimension": 2, "dimensionless": true,
            "joints": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [1, 0]},
                       {"id": "c", "position": [5, 0]}, {"id": "d", "position": [6, 0]}],
            "rods": [{"joints": ["a", "b"], "area": 1}, {"joints": ["c", "d"], "area": 1}]}"#;
        let t = load_truss(doc).unwrap();
        assert!(!t.is_connected());
    }
}
