//! Closed triangulated cavity boundaries.

use crate::error::{BemError, Result};
use crate::geom::Vec3;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

/// Flat-panel triangulation with cached per-face centroid, unit normal and
/// area. Normals follow the right-hand rule of the face winding.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    centroids: Vec<Vec3>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
}

/// Outcome of [`TriangleMesh::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeshReport {
    pub vertices: usize,
    pub faces: usize,
    pub edges: usize,
    pub signed_volume: f64,
    pub total_area: f64,
    pub min_area: f64,
    pub max_area: f64,
    /// `|Σ area·n| / Σ area`
    pub closure_defect: f64,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(BemError::MeshInvalid("mesh has no faces".into()));
        }
        if let Some(v) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(BemError::MeshInvalid(format!("vertex {v} is not finite")));
        }
        for (f, face) in faces.iter().enumerate() {
            if face.iter().any(|&i| i >= vertices.len()) {
                return Err(BemError::MeshInvalid(format!(
                    "face {f} references a vertex out of range"
                )));
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(BemError::MeshInvalid(format!("face {f} repeats a vertex")));
            }
        }
        let mut centroids = Vec::with_capacity(faces.len());
        let mut normals = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        for face in &faces {
            let [a, b, c] = face.map(|i| vertices[i]);
            let cr = (b - a).cross(c - a);
            let len = cr.norm();
            centroids.push((a + b + c) * (1.0 / 3.0));
            normals.push(if len > 0.0 { cr * (1.0 / len) } else { Vec3::ZERO });
            areas.push(0.5 * len);
        }
        Ok(Self { vertices, faces, centroids, normals, areas })
    }

    /// Unit sphere from a recursively subdivided icosahedron with
    /// `20·4^subdivisions` faces.
    pub fn icosphere(subdivisions: u32) -> Result<Self> {
        if subdivisions > 7 {
            return Err(BemError::InvalidArgument(format!(
                "icosphere subdivisions must be in 0..=7, got {subdivisions}"
            )));
        }
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vec3> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|&p| Vec3(p).normalized())
        .collect();
        let mut faces: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
                let key = (a.min(b), a.max(b));
                *mid.entry(key).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalized());
                    verts.len() - 1
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for &[a, b, c] in &faces {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        Self::new(verts, faces)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn centroids(&self) -> &[Vec3] {
        &self.centroids
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Corner coordinates of face `f`.
    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        self.faces[f].map(|i| self.vertices[i])
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Enclosed volume by the divergence theorem; positive for outward normals.
    pub fn signed_volume(&self) -> f64 {
        (0..self.len())
            .map(|f| self.areas[f] * self.normals[f].dot(self.centroids[f]))
            .sum::<f64>()
            / 3.0
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bbox_scale(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (Vec3(hi) - Vec3(lo)).norm()
    }

    /// Largest vertex `x₃`.
    pub fn max_height(&self) -> f64 {
        self.vertices.iter().map(|v| v[2]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Longest edge of face `f`.
    pub fn face_diameter(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    /// Checks closedness, orientation, face sizes and normal direction.
    pub fn validate(&self) -> Result<MeshReport> {
        let mut edges: BTreeMap<(usize, usize), (usize, i32)> = BTreeMap::new();
        for face in &self.faces {
            for e in 0..3 {
                let (a, b) = (face[e], face[(e + 1) % 3]);
                let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
                entry.0 += 1;
                entry.1 += if a < b { 1 } else { -1 };
            }
        }
        for (&(a, b), &(count, winding)) in &edges {
            if count != 2 {
                return Err(BemError::MeshOpen(format!(
                    "edge ({a}, {b}) is shared by {count} face(s)"
                )));
            }
            if winding != 0 {
                return Err(BemError::MeshNotOrientable(format!(
                    "edge ({a}, {b}) is traversed twice in the same direction"
                )));
            }
        }
        let scale = self.bbox_scale();
        let min_allowed = 1e-14 * scale * scale;
        for (f, &area) in self.areas.iter().enumerate() {
            if !(area > min_allowed) {
                return Err(BemError::MeshDegenerateFace { face: f, area });
            }
        }
        let volume = self.signed_volume();
        if !(volume > 0.0) {
            return Err(BemError::MeshInverted(volume));
        }
        let total_area = self.total_area();
        let mut closure = Vec3::ZERO;
        for f in 0..self.len() {
            closure += self.normals[f] * self.areas[f];
        }
        Ok(MeshReport {
            vertices: self.vertices.len(),
            faces: self.len(),
            edges: edges.len(),
            signed_volume: volume,
            total_area,
            min_area: self.areas.iter().copied().fold(f64::INFINITY, f64::min),
            max_area: self.areas.iter().copied().fold(0.0, f64::max),
            closure_defect: closure.norm() / total_area,
        })
    }

    /// Image under `v ↦ z + ε v`; the result must lie strictly below `x₃ = 0`.
    pub fn place_cavity(&self, epsilon: f64, z: Vec3) -> Result<TriangleMesh> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(BemError::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
        }
        if !z.is_finite() {
            return Err(BemError::InvalidArgument("cavity centre is not finite".into()));
        }
        let placed = self.map_vertices(|v| z + v * epsilon);
        let top = placed.max_height();
        if !(top < 0.0) || !(z[2] < 0.0) {
            return Err(BemError::CavityTouchesSurface(top.max(z[2])));
        }
        Ok(placed)
    }

    /// Same connectivity with every vertex mapped through `map`.
    pub fn map_vertices(&self, map: impl Fn(Vec3) -> Vec3) -> TriangleMesh {
        let vertices: Vec<Vec3> = self.vertices.iter().map(|&v| map(v)).collect();
        TriangleMesh::new(vertices, self.faces.clone()).expect("connectivity unchanged")
    }

    /// Reverses every face winding.
    pub fn flipped(&self) -> TriangleMesh {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        TriangleMesh::new(self.vertices.clone(), faces).expect("connectivity unchanged")
    }

    /// Generalized winding number of the surface about `p`: ≈1 inside, ≈0
    /// outside for a closed outward mesh.
    pub fn winding_number(&self, p: Vec3) -> f64 {
        let mut total = 0.0;
        for f in 0..self.len() {
            let [a, b, c] = self.triangle(f);
            let (a, b, c) = (a - p, b - p, c - p);
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(b.cross(c));
            let den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
            total += 2.0 * num.atan2(den);
        }
        total / (4.0 * std::f64::consts::PI)
    }

    pub fn parse_off(text: &str) -> Result<TriangleMesh> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, msg: &str| BemError::MeshInvalid(format!("OFF line {line}: {msg}"));
        let (ln, header) = lines.next().ok_or_else(|| bad(0, "empty file"))?;
        let rest_of_header = header
            .strip_prefix("OFF")
            .ok_or_else(|| bad(ln, "missing OFF header"))?
            .trim();
        let counts_line = if rest_of_header.is_empty() {
            lines.next().ok_or_else(|| bad(ln, "missing counts line"))?
        } else {
            (ln, rest_of_header)
        };
        let counts: Vec<usize> = counts_line
            .1
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(counts_line.0, "malformed counts"))?;
        if counts.len() < 2 {
            return Err(bad(counts_line.0, "expected vertex and face counts"));
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| bad(counts_line.0, "too few vertex lines"))?;
            let xs: Vec<f64> = l
                .split_whitespace()
                .take(3)
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(ln, "malformed vertex"))?;
            if xs.len() != 3 {
                return Err(bad(ln, "vertex needs three coordinates"));
            }
            vertices.push(Vec3([xs[0], xs[1], xs[2]]));
        }
        let mut faces = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = lines.next().ok_or_else(|| bad(counts_line.0, "too few face lines"))?;
            let ids: Vec<usize> = l
                .split_whitespace()
                .take(4)
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(ln, "malformed face"))?;
            if ids.len() != 4 || ids[0] != 3 {
                return Err(bad(ln, "only triangular faces are supported"));
            }
            faces.push([ids[1], ids[2], ids[3]]);
        }
        TriangleMesh::new(vertices, faces)
    }

    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF\n{} {} 0", self.vertices.len(), self.faces.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?} {:?}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
        }
        s
    }

    pub fn read_off(path: &Path) -> Result<TriangleMesh> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BemError::MeshInvalid(format!("{}: {e}", path.display())))?;
        Self::parse_off(&text)
    }

    pub fn write_off(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_off())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn icosphere_counts_and_radius() {
        let m0 = TriangleMesh::icosphere(0).unwrap();
        assert_eq!((m0.len(), m0.vertices().len()), (20, 12));
        let m3 = TriangleMesh::icosphere(3).unwrap();
        assert_eq!(m3.len(), 1280);
        for v in m3.vertices() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert!((m3.total_area() - 4.0 * PI).abs() / (4.0 * PI) < 0.01);
        assert!(TriangleMesh::icosphere(8).is_err());
    }

    #[test]
    fn validate_sphere() {
        let v = 4.0 * PI / 3.0;
        let r2 = TriangleMesh::icosphere(2).unwrap().validate().unwrap();
        let r3 = TriangleMesh::icosphere(3).unwrap().validate().unwrap();
        // the inscribed polyhedron loses 3.4% of the volume at level 2
        assert!((r2.signed_volume - v).abs() / v < 0.035);
        assert!((r3.signed_volume - v).abs() / v < 0.01);
        assert!(r2.closure_defect < 1e-12);
        assert_eq!(r2.edges, 3 * r2.faces / 2);
    }

    #[test]
    fn validate_failures() {
        let m = TriangleMesh::icosphere(1).unwrap();
        let mut faces = m.faces().to_vec();
        faces.pop();
        let open = TriangleMesh::new(m.vertices().to_vec(), faces).unwrap();
        assert!(matches!(open.validate(), Err(BemError::MeshOpen(_))));

        assert!(matches!(m.flipped().validate(), Err(BemError::MeshInverted(_))));

        let mut faces = m.faces().to_vec();
        faces[3] = [faces[3][0], faces[3][2], faces[3][1]];
        let twisted = TriangleMesh::new(m.vertices().to_vec(), faces).unwrap();
        assert!(matches!(twisted.validate(), Err(BemError::MeshNotOrientable(_))));

        let mut verts = m.vertices().to_vec();
        let [a, b, c] = m.faces()[0];
        verts[b] = (verts[a] + verts[c]) * 0.5;
        let tiny = TriangleMesh::new(verts, m.faces().to_vec()).unwrap();
        assert!(matches!(tiny.validate(), Err(BemError::MeshDegenerateFace { .. })));
    }

    #[test]
    fn area_weighted_normal_moment() {
        let mut prev = f64::INFINITY;
        for k in 1..4 {
            let m = TriangleMesh::icosphere(k).unwrap();
            let mut t = [[0.0; 3]; 3];
            for f in 0..m.len() {
                for i in 0..3 {
                    for j in 0..3 {
                        t[i][j] += m.areas()[f] * m.normals()[f][i] * m.centroids()[f][j];
                    }
                }
            }
            let exact = 4.0 * PI / 3.0;
            let err = (0..3).map(|i| (t[i][i] - exact).abs() / exact).fold(0.0, f64::max);
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn placement() {
        let m = TriangleMesh::icosphere(2).unwrap();
        assert!(matches!(
            m.place_cavity(1.0, Vec3::new(0.0, 0.0, -1e-300)),
            Err(BemError::CavityTouchesSurface(_))
        ));
        assert!(m.place_cavity(0.0, Vec3::new(0.0, 0.0, -1.0)).is_err());
        let p = m.place_cavity(0.1, Vec3::new(0.0, 0.0, -1.0)).unwrap();
        for v in p.vertices() {
            assert!(v[2] >= -1.1 - 1e-15 && v[2] <= -0.9 + 1e-15);
        }
        let ratio = p.signed_volume() / m.signed_volume();
        assert!((ratio / 1e-3 - 1.0).abs() < 1e-12);
        assert_eq!(p.faces(), m.faces());
        assert!(p.validate().is_ok());
    }

    #[test]
    fn winding() {
        let m = TriangleMesh::icosphere(2).unwrap();
        assert!((m.winding_number(Vec3::new(0.1, 0.2, -0.3)) - 1.0).abs() < 1e-9);
        assert!(m.winding_number(Vec3::new(2.0, 0.0, 0.0)).abs() < 1e-9);
    }

    #[test]
    fn off_round_trip() {
        let m = TriangleMesh::icosphere(1).unwrap();
        let back = TriangleMesh::parse_off(&m.to_off()).unwrap();
        assert_eq!(back, m);
        let text = "# comment\nOFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 0 3 2\n";
        let t = TriangleMesh::parse_off(text).unwrap();
        assert!(t.validate().is_ok());
        assert!(TriangleMesh::parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 3\n").is_err());
        assert!(TriangleMesh::parse_off("PLY\n").is_err());
        assert!(TriangleMesh::parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n3 0 1 2\n").is_err());
    }
}
