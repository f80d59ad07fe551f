//! Attack channel: quadric-error half-edge decimation, Gaussian coordinate
//! noise and vertex survival tracing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{Face, Mesh, Point};

/// Boundary edges are held in place by a perpendicular plane quadric scaled
/// by this factor times the squared edge length.
const BOUNDARY_PENALTY: f64 = 1e3;

/// A collapse is rejected when a surviving face shrinks below this fraction
/// of its previous area (it would become degenerate).
const DEGENERATE_AREA_RATIO: f64 = 1e-9;

/// Which original vertices remain after decimation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurvivalMap {
    pub survived: Vec<bool>,
    pub surviving_count: usize,
    /// Original index to index in the simplified mesh, for survivors.
    pub mapping: Vec<Option<usize>>,
}

impl SurvivalMap {
    fn from_flags(survived: Vec<bool>) -> Self {
        let mut next = 0;
        let mapping = survived
            .iter()
            .map(|&s| {
                s.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect();
        Self {
            surviving_count: next,
            survived,
            mapping,
        }
    }
}

/// Number of vertices kept when decimating `v` vertices to `fraction`.
pub fn target_vertex_count(v: usize, fraction: f64) -> usize {
    ((fraction * v as f64) - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    lo: usize,
    hi: usize,
    /// Deleted endpoint.
    u: usize,
    /// Surviving endpoint.
    v: usize,
    stamp_u: u64,
    stamp_v: u64,
}

impl Candidate {
    fn key(&self) -> (f64, usize, usize, usize) {
        (self.cost, self.lo, self.hi, self.u)
    }
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed so the std max-heap pops the cheapest candidate first.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}

struct Decimator<'a> {
    pos: &'a [Point],
    faces: Vec<Face>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<usize>>,
    alive: Vec<bool>,
    quadric: Vec<Matrix4<f64>>,
    stamp: Vec<u64>,
    heap: BinaryHeap<Candidate>,
}

fn homogeneous(p: &Point) -> Vector4<f64> {
    Vector4::new(p.x, p.y, p.z, 1.0)
}

fn plane_quadric(normal: &Point, through: &Point, weight: f64) -> Matrix4<f64> {
    let d = -normal.dot(through);
    let p = Vector4::new(normal.x, normal.y, normal.z, d);
    p * p.transpose() * weight
}

impl<'a> Decimator<'a> {
    fn new(mesh: &'a Mesh) -> Self {
        let n = mesh.vertex_count();
        let mut vertex_faces = vec![Vec::new(); n];
        for (f, face) in mesh.faces.iter().enumerate() {
            for &v in face {
                vertex_faces[v].push(f);
            }
        }
        let mut d = Self {
            pos: &mesh.vertices,
            faces: mesh.faces.clone(),
            face_alive: vec![true; mesh.face_count()],
            vertex_faces,
            alive: vec![true; n],
            quadric: vec![Matrix4::zeros(); n],
            stamp: vec![0; n],
            heap: BinaryHeap::new(),
        };
        d.init_quadrics();
        for v in 0..n {
            d.push_edges_of(v);
        }
        d
    }

    fn init_quadrics(&mut self) {
        for face in &self.faces {
            let [a, b, c] = face.map(|i| self.pos[i]);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            if len == 0.0 {
                continue;
            }
            let normal = cross / len;
            let k = plane_quadric(&normal, &a, 0.5 * len);
            for &v in face {
                self.quadric[v] += k;
            }
            for e in 0..3 {
                let (p, q) = (face[e], face[(e + 1) % 3]);
                if self.shared_faces(p, q).len() == 1 {
                    let dir = self.pos[q] - self.pos[p];
                    let m = dir.cross(&normal);
                    let m_len = m.norm();
                    if m_len > 0.0 {
                        let bk = plane_quadric(
                            &(m / m_len),
                            &self.pos[p],
                            BOUNDARY_PENALTY * dir.norm_squared(),
                        );
                        self.quadric[p] += bk;
                        self.quadric[q] += bk;
                    }
                }
            }
        }
    }

    fn shared_faces(&self, a: usize, b: usize) -> Vec<usize> {
        self.vertex_faces[a]
            .iter()
            .copied()
            .filter(|&f| self.faces[f].contains(&b))
            .collect()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vertex_faces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn is_boundary(&self, v: usize) -> bool {
        self.neighbors(v)
            .iter()
            .any(|&w| self.shared_faces(v, w).len() == 1)
    }

    fn push_edges_of(&mut self, a: usize) {
        for b in self.neighbors(a) {
            if self.shared_faces(a, b).len() > 2 {
                continue;
            }
            let q = self.quadric[a] + self.quadric[b];
            for (u, v) in [(a, b), (b, a)] {
                let h = homogeneous(&self.pos[v]);
                let cost = (h.transpose() * q * h)[0].max(0.0);
                self.heap.push(Candidate {
                    cost,
                    lo: a.min(b),
                    hi: a.max(b),
                    u,
                    v,
                    stamp_u: self.stamp[u],
                    stamp_v: self.stamp[v],
                });
            }
        }
    }

    fn is_current(&self, c: &Candidate) -> bool {
        self.alive[c.u]
            && self.alive[c.v]
            && self.stamp[c.u] == c.stamp_u
            && self.stamp[c.v] == c.stamp_v
    }

    fn collapse_is_valid(&self, u: usize, v: usize) -> bool {
        let shared = self.shared_faces(u, v);
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        // Link condition: common neighbors are exactly the apexes of the
        // faces on the edge.
        let mut apexes: Vec<usize> = shared
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&w| w != u && w != v)
            .collect();
        apexes.sort_unstable();
        let nu = self.neighbors(u);
        let nv = self.neighbors(v);
        let common: Vec<usize> = nu
            .iter()
            .copied()
            .filter(|w| nv.binary_search(w).is_ok())
            .collect();
        if common != apexes {
            return false;
        }
        if shared.len() == 2 && self.is_boundary(u) && self.is_boundary(v) {
            return false;
        }
        // Closed meshes must not shrink below a tetrahedron.
        if shared.len() == 2
            && nu.len() + nv.len() <= 6
            && self.alive.iter().filter(|&&a| a).count() <= 4
        {
            return false;
        }
        for &f in &self.vertex_faces[u] {
            if shared.contains(&f) {
                continue;
            }
            let face = self.faces[f];
            let old = face.map(|i| self.pos[i]);
            let new = face.map(|i| if i == u { self.pos[v] } else { self.pos[i] });
            let n_old = (old[1] - old[0]).cross(&(old[2] - old[0]));
            let n_new = (new[1] - new[0]).cross(&(new[2] - new[0]));
            if n_new.norm() <= DEGENERATE_AREA_RATIO * n_old.norm() || n_old.dot(&n_new) <= 0.0 {
                return false;
            }
        }
        true
    }

    fn collapse(&mut self, u: usize, v: usize) {
        let touched = self.neighbors(u);
        for f in std::mem::take(&mut self.vertex_faces[u]) {
            if self.faces[f].contains(&v) {
                self.face_alive[f] = false;
                for w in self.faces[f] {
                    if w != u {
                        self.vertex_faces[w].retain(|&g| g != f);
                    }
                }
            } else {
                for w in self.faces[f].iter_mut() {
                    if *w == u {
                        *w = v;
                    }
                }
                self.vertex_faces[v].push(f);
            }
        }
        self.alive[u] = false;
        let qu = self.quadric[u];
        self.quadric[v] += qu;

        let mut ring = self.neighbors(v);
        ring.push(v);
        ring.extend(touched);
        ring.sort_unstable();
        ring.dedup();
        ring.retain(|&w| self.alive[w]);
        for &w in &ring {
            self.stamp[w] += 1;
        }
        for &w in &ring {
            self.push_edges_of(w);
        }
    }

    fn run(&mut self, target: usize) -> Result<()> {
        let mut remaining = self.alive.iter().filter(|&&a| a).count();
        while remaining > target {
            let Some(c) = self.heap.pop() else {
                return Err(Error::CannotReachTarget { remaining, target });
            };
            if !self.is_current(&c) || !self.collapse_is_valid(c.u, c.v) {
                continue;
            }
            self.collapse(c.u, c.v);
            remaining -= 1;
        }
        Ok(())
    }
}

/// Decimates `mesh` until `ceil(keep_fraction * V)` vertices remain, by
/// repeatedly collapsing the cheapest half-edge under the Garland–Heckbert
/// quadric metric. The deleted endpoint merges into the survivor, which
/// keeps its position. Deterministic: a smaller `keep_fraction` continues
/// the exact collapse sequence of a larger one.
pub fn decimate(mesh: &Mesh, keep_fraction: f64) -> Result<(Mesh, SurvivalMap)> {
    let n = mesh.vertex_count();
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "keep fraction {keep_fraction} outside (0, 1]"
        )));
    }
    let target = target_vertex_count(n, keep_fraction);
    if n < 4 || target < 4 {
        return Err(Error::InvalidArgument(format!(
            "decimation needs at least 4 remaining vertices (mesh {n}, target {target})"
        )));
    }
    if target >= n {
        return Ok((mesh.clone(), SurvivalMap::from_flags(vec![true; n])));
    }
    let mut d = Decimator::new(mesh);
    d.run(target)?;
    let map = SurvivalMap::from_flags(d.alive.clone());
    let vertices = (0..n)
        .filter(|&i| map.survived[i])
        .map(|i| mesh.vertices[i])
        .collect();
    let faces = d
        .faces
        .iter()
        .zip(&d.face_alive)
        .filter(|(_, &a)| a)
        .map(|(f, _)| f.map(|i| map.mapping[i].expect("face vertices survive")))
        .collect();
    Ok((Mesh { vertices, faces }, map))
}

/// Adds i.i.d. N(0, sigma²) noise to every coordinate.
pub fn gaussian_noise(mesh: &Mesh, sigma: f64, seed: u64) -> Result<Mesh> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be finite and non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(mesh.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("valid sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = mesh
        .vertices
        .iter()
        .map(|p| {
            p + Point::new(
                normal.sample(&mut rng),
                normal.sample(&mut rng),
                normal.sample(&mut rng),
            )
        })
        .collect();
    Ok(Mesh {
        vertices,
        faces: mesh.faces.clone(),
    })
}

/// Counts tracked vertices that did not survive; returns the count and the
/// deleted indices in tracked order.
pub fn trace_vertices(survival: &SurvivalMap, tracked: &[usize]) -> Result<(usize, Vec<usize>)> {
    let n = survival.survived.len();
    if let Some(&bad) = tracked.iter().find(|&&i| i >= n) {
        return Err(Error::VertexOutOfRange {
            index: bad,
            vertex_count: n,
        });
    }
    let deleted: Vec<usize> = tracked
        .iter()
        .copied()
        .filter(|&i| !survival.survived[i])
        .collect();
    Ok((deleted.len(), deleted))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetDeletion {
    pub name: String,
    pub size: usize,
    pub deleted: usize,
    pub p_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    /// Fraction of vertices deleted.
    pub level: f64,
    pub total_remaining: usize,
    pub sets: Vec<SetDeletion>,
}

/// For every deletion level, decimates the original mesh to keep `1 - level`
/// of its vertices and reports how many of each named set were deleted.
pub fn deletion_probability_curve(
    mesh: &Mesh,
    vertex_sets: &[(String, Vec<usize>)],
    levels: &[f64],
) -> Result<Vec<AttackReport>> {
    if let Some(&bad) = levels.iter().find(|&&d| !(0.0..1.0).contains(&d)) {
        return Err(Error::InvalidArgument(format!(
            "deletion level {bad} outside [0, 1)"
        )));
    }
    levels
        .par_iter()
        .map(|&level| {
            let (_, map) = decimate(mesh, 1.0 - level)?;
            let sets = vertex_sets
                .iter()
                .map(|(name, set)| {
                    let (deleted, _) = trace_vertices(&map, set)?;
                    Ok(SetDeletion {
                        name: name.clone(),
                        size: set.len(),
                        deleted,
                        p_d: if set.is_empty() {
                            0.0
                        } else {
                            deleted as f64 / set.len() as f64
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AttackReport {
                level,
                total_remaining: map.surviving_count,
                sets,
            })
        })
        .collect()
}

/// Uniform random `count`-subset of `0..n`, seeded.
pub fn random_vertex_set(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count > n {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} of {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, n, count).into_vec())
}
