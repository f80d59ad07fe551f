//! Indexed triangle meshes: OBJ / ASCII-PLY I/O, adjacency and topology checks.
//!
//! Vertex order is preserved exactly through load and save. Host selection
//! downstream is re-derived from geometry plus vertex order, so any loader
//! that reorders or merges vertices would silently break extraction.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;
pub type Face = [usize; 3];
/// Undirected edge keyed by its sorted endpoint pair.
pub type Edge = (usize, usize);

/// Default angular tolerance for flat-region and collinearity tests, radians.
pub const DEFAULT_FLAT_ANGLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(Self::Obj),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub faces: Vec<Face>,
}

#[inline]
pub fn edge_key(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Build a mesh, checking index range, degenerate faces and finiteness.
    pub fn new(vertices: Vec<Point>, faces: Vec<Face>) -> Result<Self> {
        let mesh = Self { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFiniteCoordinate { vertex: i });
            }
        }
        let n = self.vertices.len();
        for (fi, f) in self.faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i >= n) {
                return Err(Error::FaceIndexOutOfRange {
                    face: fi,
                    index: bad,
                    vertex_count: n,
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::DegenerateFace { face: fi });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut edges = BTreeSet::new();
        for f in &self.faces {
            for k in 0..3 {
                edges.insert(edge_key(f[k], f[(k + 1) % 3]));
            }
        }
        edges.len()
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    pub fn face_normal_unnormalized(&self, f: usize) -> Point {
        let [a, b, c] = self.faces[f];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        (pb - pa).cross(&(pc - pa))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_normal_unnormalized(f).norm()
    }

    pub fn bbox(&self) -> Option<(Point, Point)> {
        let first = *self.vertices.first()?;
        Some(
            self.vertices
                .iter()
                .fold((first, first), |(lo, hi), v| (lo.inf(v), hi.sup(v))),
        )
    }

    pub fn bbox_diagonal(&self) -> f64 {
        self.bbox().map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }

    pub fn centroid(&self) -> Point {
        if self.vertices.is_empty() {
            return Point::zeros();
        }
        self.vertices.iter().sum::<Point>() / self.vertices.len() as f64
    }
}

fn parse_f64(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("invalid number {tok:?} for {what}")))
}

fn fan(poly: &[usize], out: &mut Vec<Face>) {
    for i in 1..poly.len() - 1 {
        out.push([poly[0], poly[i], poly[i + 1]]);
    }
}

/// Parse a mesh from bytes in the declared format.
pub fn load_mesh(bytes: &[u8], format: MeshFormat) -> Result<Mesh> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| Error::parse(0, format!("not UTF-8: {e}")))?;
    let mesh = match format {
        MeshFormat::Obj => parse_obj(text)?,
        MeshFormat::Ply => parse_ply(text)?,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn parse_obj(text: &str) -> Result<Mesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut poly = Vec::with_capacity(4);
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line, "x")?;
                let y = parse_f64(toks.next(), line, "y")?;
                let z = parse_f64(toks.next(), line, "z")?;
                if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                    return Err(Error::NonFiniteCoordinate {
                        vertex: vertices.len(),
                    });
                }
                vertices.push(Point::new(x, y, z));
            }
            Some("f") => {
                poly.clear();
                for tok in toks {
                    // `f 1/2/3` style: only the position index is used.
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx
                        .parse()
                        .map_err(|_| Error::parse(line, format!("invalid face index {tok:?}")))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(Error::parse(line, "face index 0 is invalid in OBJ"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(Error::FaceIndexOutOfRange {
                            face: faces.len(),
                            index: resolved.max(0) as usize,
                            vertex_count: vertices.len(),
                        });
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(Error::parse(line, "face needs at least 3 vertices"));
                }
                fan(&poly, &mut faces);
            }
            // vt, vn, o, g, s, usemtl, mtllib, ...: ignored
            _ => {}
        }
    }
    Ok(Mesh { vertices, faces })
}

fn parse_ply(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, _)) => return Err(Error::parse(n, "missing `ply` magic")),
        None => return Err(Error::parse(1, "empty input")),
    }

    let mut n_vertices = None;
    let mut n_faces = None;
    // Property names of the vertex element in declaration order.
    let mut vertex_props: Vec<String> = Vec::new();
    let mut current: Option<&str> = None;
    loop {
        let (line, l) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "unterminated PLY header"))?;
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("format") => {
                if toks.next() != Some("ascii") {
                    return Err(Error::parse(line, "only ascii PLY is supported"));
                }
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = toks.next().unwrap_or("");
                let count: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line, "invalid element count"))?;
                match name {
                    "vertex" => {
                        n_vertices = Some(count);
                        current = Some("vertex");
                    }
                    "face" => {
                        n_faces = Some(count);
                        current = Some("face");
                    }
                    _ => {
                        if count > 0 {
                            return Err(Error::parse(
                                line,
                                format!("unsupported element {name:?}"),
                            ));
                        }
                        current = None;
                    }
                }
            }
            Some("property") => {
                if current == Some("vertex") {
                    let name = l.split_whitespace().last().unwrap_or("").to_string();
                    vertex_props.push(name);
                }
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(Error::parse(
                    line,
                    format!("unexpected header keyword {other:?}"),
                ))
            }
        }
    }

    let nv = n_vertices.unwrap_or(0);
    let nf = n_faces.unwrap_or(0);
    let pos = |name: &str| vertex_props.iter().position(|p| p == name);
    let (ix, iy, iz) = match (pos("x"), pos("y"), pos("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ if nv == 0 => (0, 1, 2),
        _ => return Err(Error::parse(0, "vertex element lacks x/y/z properties")),
    };

    let mut vertices = Vec::with_capacity(nv);
    let mut faces = Vec::with_capacity(nf);
    let mut body = lines.filter(|(_, l)| !l.is_empty());
    for _ in 0..nv {
        let (line, l) = body
            .next()
            .ok_or_else(|| Error::parse(0, "truncated vertex list"))?;
        let vals: Vec<&str> = l.split_whitespace().collect();
        let get = |i: usize, what: &str| parse_f64(vals.get(i).copied(), line, what);
        let p = Point::new(get(ix, "x")?, get(iy, "y")?, get(iz, "z")?);
        if !p.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                vertex: vertices.len(),
            });
        }
        vertices.push(p);
    }
    let mut poly = Vec::with_capacity(4);
    for _ in 0..nf {
        let (line, l) = body
            .next()
            .ok_or_else(|| Error::parse(0, "truncated face list"))?;
        let mut toks = l.split_whitespace();
        let count: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(line, "invalid face vertex count"))?;
        poly.clear();
        for _ in 0..count {
            let i: usize = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(line, "invalid face index"))?;
            if i >= nv {
                return Err(Error::FaceIndexOutOfRange {
                    face: faces.len(),
                    index: i,
                    vertex_count: nv,
                });
            }
            poly.push(i);
        }
        if poly.len() < 3 {
            return Err(Error::parse(line, "face needs at least 3 vertices"));
        }
        fan(&poly, &mut faces);
    }
    Ok(Mesh { vertices, faces })
}

/// Serialize a mesh. Coordinates use Rust's shortest round-trip float
/// formatting, so a reload reproduces every coordinate bit-for-bit.
pub fn save_mesh(mesh: &Mesh, format: MeshFormat) -> Vec<u8> {
    let mut s = String::with_capacity(mesh.vertices.len() * 64 + mesh.faces.len() * 24);
    match format {
        MeshFormat::Obj => {
            for v in &mesh.vertices {
                let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
            }
            for f in &mesh.faces {
                let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
            }
        }
        MeshFormat::Ply => {
            s.push_str("ply\nformat ascii 1.0\n");
            let _ = writeln!(s, "element vertex {}", mesh.vertices.len());
            s.push_str("property double x\nproperty double y\nproperty double z\n");
            let _ = writeln!(s, "element face {}", mesh.faces.len());
            s.push_str("property list uchar int vertex_indices\nend_header\n");
            for v in &mesh.vertices {
                let _ = writeln!(s, "{:?} {:?} {:?}", v.x, v.y, v.z);
            }
            for f in &mesh.faces {
                let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
            }
        }
    }
    s.into_bytes()
}

/// Incidence maps derived from a [`Mesh`]. All lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyIndex {
    pub vertex_faces: Vec<Vec<usize>>,
    pub vertex_neighbors: Vec<Vec<usize>>,
    pub edge_faces: BTreeMap<Edge, Vec<usize>>,
}

impl AdjacencyIndex {
    pub fn valence(&self, v: usize) -> usize {
        self.vertex_faces[v].len()
    }

    pub fn edge_face_count(&self, a: usize, b: usize) -> usize {
        self.edge_faces.get(&edge_key(a, b)).map_or(0, Vec::len)
    }

    /// True if any incident edge of `v` has exactly one face.
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_neighbors[v]
            .iter()
            .any(|&u| self.edge_face_count(v, u) == 1)
    }

    /// Vertices within `depth` edge hops of `v`, excluding `v`, sorted.
    pub fn ring(&self, v: usize, depth: usize) -> Vec<usize> {
        let mut seen = BTreeSet::from([v]);
        let mut frontier = vec![v];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in &self.vertex_neighbors[u] {
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        seen.remove(&v);
        seen.into_iter().collect()
    }
}

pub fn build_adjacency(mesh: &Mesh) -> AdjacencyIndex {
    let n = mesh.vertex_count();
    let mut vertex_faces = vec![Vec::new(); n];
    let mut neighbor_sets = vec![BTreeSet::new(); n];
    let mut edge_faces: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            vertex_faces[a].push(fi);
            neighbor_sets[a].insert(b);
            neighbor_sets[b].insert(a);
            edge_faces.entry(edge_key(a, b)).or_default().push(fi);
        }
    }
    AdjacencyIndex {
        vertex_faces,
        vertex_neighbors: neighbor_sets
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        edge_faces,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TopologyReport {
    pub isolated_vertices: BTreeSet<usize>,
    pub boundary_vertices: BTreeSet<usize>,
    pub complex_edges: BTreeSet<Edge>,
    pub collinear_chain_vertices: BTreeSet<usize>,
    pub flat_region_vertices: BTreeSet<usize>,
}

impl TopologyReport {
    pub fn is_clean(&self) -> bool {
        self.isolated_vertices.is_empty()
            && self.boundary_vertices.is_empty()
            && self.complex_edges.is_empty()
            && self.collinear_chain_vertices.is_empty()
            && self.flat_region_vertices.is_empty()
    }
}

/// Interior angle of triangle `face` at its corner `v`, or `None` if an
/// edge leaving `v` has zero length.
pub(crate) fn corner_angle(mesh: &Mesh, face: &Face, v: usize) -> Option<f64> {
    let k = face.iter().position(|&i| i == v)?;
    let p = mesh.vertices[v];
    let a = mesh.vertices[face[(k + 1) % 3]] - p;
    let b = mesh.vertices[face[(k + 2) % 3]] - p;
    if a.norm_squared() == 0.0 || b.norm_squared() == 0.0 {
        return None;
    }
    Some(a.cross(&b).norm().atan2(a.dot(&b)))
}

/// Signed dihedral deviation from flat across an interior edge: positive
/// for convex folds, negative for concave, zero when the faces are coplanar.
pub(crate) fn edge_dihedral(mesh: &Mesh, adj: &AdjacencyIndex, a: usize, b: usize) -> Option<f64> {
    let faces = adj.edge_faces.get(&edge_key(a, b))?;
    if faces.len() != 2 {
        return None;
    }
    let n1 = mesh.face_normal_unnormalized(faces[0]);
    let n2 = mesh.face_normal_unnormalized(faces[1]);
    let (l1, l2) = (n1.norm(), n2.norm());
    if l1 == 0.0 || l2 == 0.0 {
        return None;
    }
    let angle = n1.cross(&n2).norm().atan2(n1.dot(&n2));
    // Opposite vertex of the second face, tested against the first face's plane.
    let opp = mesh.faces[faces[1]]
        .iter()
        .copied()
        .find(|&i| i != a && i != b)?;
    let side = n1.dot(&(mesh.vertices[opp] - mesh.vertices[a])) / l1;
    Some(if side > 0.0 { -angle } else { angle })
}

pub fn validate_topology(mesh: &Mesh, adj: &AdjacencyIndex, flat_angle_tol: f64) -> TopologyReport {
    let mut report = TopologyReport::default();
    for (&e, faces) in &adj.edge_faces {
        match faces.len() {
            1 => {
                report.boundary_vertices.insert(e.0);
                report.boundary_vertices.insert(e.1);
            }
            2 => {}
            _ => {
                report.complex_edges.insert(e);
            }
        }
    }
    for v in 0..mesh.vertex_count() {
        if adj.vertex_faces[v].is_empty() {
            report.isolated_vertices.insert(v);
            continue;
        }
        let p = mesh.vertices[v];
        let nbrs = &adj.vertex_neighbors[v];
        let dirs: Vec<Point> = nbrs
            .iter()
            .filter_map(|&u| (mesh.vertices[u] - p).try_normalize(0.0))
            .collect();
        let collinear = dirs.iter().enumerate().any(|(i, a)| {
            dirs[i + 1..]
                .iter()
                .any(|b| (PI - a.cross(b).norm().atan2(a.dot(b))).abs() <= flat_angle_tol)
        });
        if collinear {
            report.collinear_chain_vertices.insert(v);
        }
        if report.boundary_vertices.contains(&v) {
            continue;
        }
        let angle_sum: Option<f64> = adj.vertex_faces[v]
            .iter()
            .map(|&f| corner_angle(mesh, &mesh.faces[f], v))
            .sum();
        let Some(theta) = angle_sum else { continue };
        if (theta - 2.0 * PI).abs() > flat_angle_tol {
            continue;
        }
        let flat_edges = nbrs.iter().all(|&u| {
            edge_dihedral(mesh, adj, v, u).is_some_and(|psi| psi.abs() <= flat_angle_tol)
        });
        if flat_edges {
            report.flat_region_vertices.insert(v);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    const CUBE_OBJ: &str = "\
# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
";

    const TETRA_PLY: &str = "\
ply
format ascii 1.0
comment tetrahedron
element vertex 4
property float x
property float y
property float z
element face 4
property list uchar int vertex_indices
end_header
0 0 0
1 0 0
0 1 0
0 0 1
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
";

    fn brute_force_edge_count(mesh: &Mesh) -> usize {
        // Count an edge once per face pair that shares it, plus boundary edges.
        let mut count = 0;
        for (i, f) in mesh.faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let earlier = mesh.faces[..i]
                    .iter()
                    .any(|g| g.contains(&a) && g.contains(&b));
                if !earlier {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn obj_cube() {
        let m = load_mesh(CUBE_OBJ.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.vertex_count(), 8);
        assert_eq!(m.face_count(), 12);
        assert_eq!(m.faces[0], [0, 2, 1]);
    }

    #[test]
    fn obj_quad_is_fanned() {
        let src = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let m = load_mesh(src.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn ply_tetrahedron_euler() {
        let m = load_mesh(TETRA_PLY.as_bytes(), MeshFormat::Ply).unwrap();
        assert_eq!(m.vertex_count(), 4);
        assert_eq!(m.face_count(), 4);
        let e = brute_force_edge_count(&m);
        assert_eq!(e, 6);
        assert_eq!(m.euler_characteristic(), 4 - e as i64 + 4);
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load_mesh(b"v 0 0 0\nv 1 oops 0\n", MeshFormat::Obj).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");

        let err = load_mesh(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n", MeshFormat::Obj).unwrap_err();
        assert!(
            matches!(err, Error::FaceIndexOutOfRange { index: 8, .. }),
            "{err:?}"
        );

        let err = load_mesh(b"v 0 nan 0\n", MeshFormat::Obj).unwrap_err();
        assert!(
            matches!(err, Error::NonFiniteCoordinate { vertex: 0 }),
            "{err:?}"
        );

        let err = load_mesh(b"v 0 0 0\nv 1 0 0\nf 1 2 2\n", MeshFormat::Obj).unwrap_err();
        assert!(matches!(err, Error::DegenerateFace { face: 0 }), "{err:?}");
    }

    #[test]
    fn binary_ply_rejected() {
        let src = "ply\nformat binary_little_endian 1.0\nend_header\n";
        assert!(load_mesh(src.as_bytes(), MeshFormat::Ply).is_err());
    }

    #[test]
    fn roundtrip_precision_and_faces() {
        let mut m = shapes::tetrahedron();
        m.vertices[0].x = 0.1234567891;
        for fmt in [MeshFormat::Obj, MeshFormat::Ply] {
            let back = load_mesh(&save_mesh(&m, fmt), fmt).unwrap();
            assert_eq!(back.faces, m.faces);
            assert_eq!(back.vertices, m.vertices);
            let rel = (back.vertices[0].x - 0.1234567891).abs() / 0.1234567891;
            assert!(rel <= 1e-9);
        }
    }

    #[test]
    fn empty_mesh_roundtrip() {
        let m = Mesh::default();
        for fmt in [MeshFormat::Obj, MeshFormat::Ply] {
            let back = load_mesh(&save_mesh(&m, fmt), fmt).unwrap();
            assert_eq!(back.vertex_count(), 0);
            assert_eq!(back.face_count(), 0);
        }
    }

    #[test]
    fn adjacency_tetrahedron() {
        let m = shapes::tetrahedron();
        let adj = build_adjacency(&m);
        for v in 0..4 {
            // brute force: faces containing v
            let expect: Vec<usize> = (0..4).filter(|&f| m.faces[f].contains(&v)).collect();
            assert_eq!(adj.vertex_faces[v], expect);
            assert_eq!(adj.valence(v), 3);
        }
        assert_eq!(adj.edge_faces.len(), 6);
        assert!(adj.edge_faces.values().all(|f| f.len() == 2));
    }

    #[test]
    fn adjacency_single_and_pair() {
        let tri = shapes::single_triangle();
        let adj = build_adjacency(&tri);
        assert!(adj.edge_faces.values().all(|f| f.len() == 1));

        let pair = Mesh::new(
            vec![
                Point::new(0.0, 0.0, 0.0),
                Point::new(1.0, 0.0, 0.0),
                Point::new(0.0, 1.0, 0.0),
                Point::new(1.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [1, 3, 2]],
        )
        .unwrap();
        let adj = build_adjacency(&pair);
        assert_eq!(adj.edge_faces[&(1, 2)], vec![0, 1]);
    }

    #[test]
    fn topology_tetrahedron_clean() {
        let m = shapes::tetrahedron();
        let r = validate_topology(&m, &build_adjacency(&m), DEFAULT_FLAT_ANGLE_TOL);
        assert!(r.is_clean(), "{r:?}");
    }

    #[test]
    fn topology_single_triangle_all_boundary() {
        let m = shapes::single_triangle();
        let r = validate_topology(&m, &build_adjacency(&m), DEFAULT_FLAT_ANGLE_TOL);
        assert_eq!(r.boundary_vertices, BTreeSet::from([0, 1, 2]));
        assert!(r.flat_region_vertices.is_empty());
    }

    #[test]
    fn topology_grid_center_flat() {
        let m = shapes::grid(3, 3, 1.0);
        let r = validate_topology(&m, &build_adjacency(&m), DEFAULT_FLAT_ANGLE_TOL);
        // 3×3 vertex grid: only the center is interior.
        assert_eq!(r.flat_region_vertices, BTreeSet::from([4]));
        assert_eq!(r.boundary_vertices.len(), 8);
    }

    #[test]
    fn topology_isolated_and_complex() {
        let mut m = shapes::tetrahedron();
        m.vertices.push(Point::new(5.0, 5.0, 5.0));
        m.vertices.push(Point::new(0.5, 0.5, -1.0));
        // third face on edge (0,1)
        m.faces.push([0, 1, 5]);
        let r = validate_topology(&m, &build_adjacency(&m), DEFAULT_FLAT_ANGLE_TOL);
        assert_eq!(r.isolated_vertices, BTreeSet::from([4]));
        assert_eq!(r.complex_edges, BTreeSet::from([(0, 1)]));
    }

    #[test]
    fn closed_meshes_have_no_boundary() {
        for m in [
            shapes::icosahedron(1.0),
            shapes::icosphere(1.0, 2),
            shapes::torus(2.0, 0.5, 16, 8),
        ] {
            let r = validate_topology(&m, &build_adjacency(&m), DEFAULT_FLAT_ANGLE_TOL);
            assert!(r.boundary_vertices.is_empty());
            assert!(r.complex_edges.is_empty());
        }
    }
}
