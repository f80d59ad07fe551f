//! Procedural test meshes.
//!
//! Small exact solids for unit tests, plus seeded desk-scale surfaces with
//! mixed sharp and smooth regions used by the evaluation harness.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::{Face, Mesh, Point};

fn mesh(vertices: Vec<Point>, faces: Vec<Face>) -> Mesh {
    Mesh::new(vertices, faces).expect("generator produced an invalid mesh")
}

pub fn single_triangle() -> Mesh {
    mesh(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2]],
    )
}

/// Right-corner tetrahedron with outward-facing triangles.
pub fn tetrahedron() -> Mesh {
    mesh(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
        ],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
    )
}

/// Axis-aligned cube [0, s]^3 split into 12 outward triangles.
pub fn cube(s: f64) -> Mesh {
    let v = |x: f64, y: f64, z: f64| Point::new(x * s, y * s, z * s);
    mesh(
        vec![
            v(0.0, 0.0, 0.0),
            v(1.0, 0.0, 0.0),
            v(1.0, 1.0, 0.0),
            v(0.0, 1.0, 0.0),
            v(0.0, 0.0, 1.0),
            v(1.0, 0.0, 1.0),
            v(1.0, 1.0, 1.0),
            v(0.0, 1.0, 1.0),
        ],
        vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ],
    )
}

/// Icosahedron with the given edge length, centered at the origin.
pub fn icosahedron(edge: f64) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    // Canonical coordinates have edge length 2.
    let k = edge / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let vertices = raw
        .iter()
        .map(|&(x, y, z)| Point::new(x * k, y * k, z * k))
        .collect();
    let faces = vec![
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
    mesh(vertices, faces)
}

/// Loop-style subdivided icosahedron projected onto a sphere.
pub fn icosphere(radius: f64, subdivisions: usize) -> Mesh {
    let base = icosahedron(1.0);
    let mut vertices: Vec<Point> = base.vertices.iter().map(|v| v.normalize()).collect();
    let mut faces = base.faces;
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    mesh(vertices, faces)
}

/// Planar grid of `nx × ny` vertices in z = 0 with the given spacing.
/// Each square is split along the same diagonal.
pub fn grid(nx: usize, ny: usize, spacing: f64) -> Mesh {
    heightfield(nx, ny, spacing, |_, _| 0.0)
}

/// Grid whose vertex (i, j) sits at (i·h, j·h, height(x, y)).
pub fn heightfield(nx: usize, ny: usize, spacing: f64, height: impl Fn(f64, f64) -> f64) -> Mesh {
    assert!(nx >= 2 && ny >= 2);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = (i as f64 * spacing, j as f64 * spacing);
            vertices.push(Point::new(x, y, height(x, y)));
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let mut faces = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    mesh(vertices, faces)
}

/// Odd-sized flat grid with its center vertex raised into a pyramid apex.
/// Returns the mesh and the apex index.
pub fn pyramid_grid(n: usize, height: f64) -> (Mesh, usize) {
    let n = n | 1;
    let mut m = grid(n, n, 1.0);
    let apex = (n / 2) * n + n / 2;
    m.vertices[apex].z = height;
    (m, apex)
}

/// Square pyramid: apex at (0, 0, h) over the base square [−1, 1]^2 in z = 0.
/// The base is closed with two triangles. Returns (mesh, apex index).
pub fn square_pyramid(h: f64) -> (Mesh, usize) {
    let m = mesh(
        vec![
            Point::new(-1.0, -1.0, 0.0),
            Point::new(1.0, -1.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(-1.0, 1.0, 0.0),
            Point::new(0.0, 0.0, h),
        ],
        vec![
            [0, 1, 4],
            [1, 2, 4],
            [2, 3, 4],
            [3, 0, 4],
            [0, 2, 1],
            [0, 3, 2],
        ],
    );
    (m, 4)
}

/// Open cylinder about the z axis with `segments` around and `rings` rows of
/// vertices along the axis, rows spaced `dz` apart.
pub fn cylinder(radius: f64, segments: usize, rings: usize, dz: f64) -> Mesh {
    let mut vertices = Vec::with_capacity(segments * rings);
    for r in 0..rings {
        for s in 0..segments {
            let a = 2.0 * PI * s as f64 / segments as f64;
            vertices.push(Point::new(
                radius * a.cos(),
                radius * a.sin(),
                r as f64 * dz,
            ));
        }
    }
    let id = |s: usize, r: usize| r * segments + s % segments;
    let mut faces = Vec::new();
    for r in 0..rings - 1 {
        for s in 0..segments {
            faces.push([id(s, r), id(s + 1, r), id(s + 1, r + 1)]);
            faces.push([id(s, r), id(s + 1, r + 1), id(s, r + 1)]);
        }
    }
    mesh(vertices, faces)
}

/// Torus with major radius `major`, tube radius `minor`.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> Mesh {
    displaced_torus(major, minor, nu, nv, |_, _| 0.0)
}

fn displaced_torus(
    major: f64,
    minor: f64,
    nu: usize,
    nv: usize,
    bump: impl Fn(f64, f64) -> f64,
) -> Mesh {
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = minor * (1.0 + bump(u, v));
            let ring = major + r * v.cos();
            vertices.push(Point::new(ring * u.cos(), ring * u.sin(), r * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + j % nv;
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    mesh(vertices, faces)
}

/// Two planar strips meeting at a convex fold along a line parallel to the
/// x axis, with the given angle between the strips (π means flat). Returns
/// (mesh, index of a vertex in the middle of the crease).
pub fn fold(n: usize, fold_angle: f64) -> (Mesh, usize) {
    let n = n | 1;
    // Rows j = 0..n with j = n/2 the crease; rows above rotate about x.
    let mid = n / 2;
    let tilt = PI - fold_angle;
    let m = heightfield(n, n, 1.0, |_, _| 0.0);
    let mut vertices = m.vertices;
    for v in &mut vertices {
        let d = v.y - mid as f64;
        if d > 0.0 {
            v.y = mid as f64 + d * tilt.cos();
            v.z = -d * tilt.sin();
        }
    }
    let crease = mid * n + mid;
    (mesh(vertices, m.faces), crease)
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    center: Point,
    amplitude: f64,
    width: f64,
    sharp: bool,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Point {
    loop {
        let p = Point::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = p.norm();
        if n > 1e-3 && n <= 1.0 {
            return p / n;
        }
    }
}

/// Icosphere with seeded radial bumps and dents: a mix of cone-like spikes,
/// smooth blobs and untouched near-spherical areas.
pub fn bumpy_sphere(radius: f64, subdivisions: usize, bumps: usize, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: Vec<Bump> = (0..bumps)
        .map(|_| Bump {
            center: random_unit(&mut rng),
            amplitude: rng.random_range(0.05..0.25)
                * if rng.random_bool(0.75) { 1.0 } else { -1.0 },
            width: rng.random_range(0.12..0.4),
            sharp: rng.random_bool(0.5),
        })
        .collect();
    let mut m = icosphere(1.0, subdivisions);
    for v in &mut m.vertices {
        let dir = *v;
        let mut r = 1.0;
        for b in &features {
            let d = (dir - b.center).norm() / b.width;
            r += b.amplitude
                * if b.sharp {
                    (1.0 - d).max(0.0)
                } else {
                    (-d * d * 2.0).exp()
                };
        }
        *v = dir * (r * radius);
    }
    m
}

/// Torus with seeded ridges along the tube and a few knobs.
pub fn ridged_torus(major: f64, minor: f64, nu: usize, nv: usize, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ridges: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.08..0.3),
                rng.random_range(1.0..4.0),
            )
        })
        .collect();
    let knobs: Vec<(f64, f64, f64)> = (0..10)
        .map(|_| {
            (
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.1..0.35),
            )
        })
        .collect();
    displaced_torus(major, minor, nu, nv, |u, v| {
        let mut h = 0.0;
        for &(phase, amp, freq) in &ridges {
            // Tent profile in the tube angle: a crease every 2π / freq of u.
            let s = ((u * freq + phase).sin()).abs();
            h += amp * (1.0 - s).powi(3) * (0.5 + 0.5 * (v + phase).cos());
        }
        for &(ku, kv, amp) in &knobs {
            let du = (u - ku).sin().abs() * major;
            let dv = (v - kv).sin().abs();
            let d2 = du * du * 0.5 + dv * dv * 4.0;
            h += amp * (1.0 - d2.sqrt()).max(0.0);
        }
        h
    })
}

/// Seeded heightfield terrain: terraces, cones and smooth hills over a
/// flat base. Has an open boundary.
pub fn terrain(n: usize, seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = (n - 1) as f64;
    let hills: Vec<(f64, f64, f64, f64, u8)> = (0..24)
        .map(|_| {
            (
                rng.random_range(0.0..size),
                rng.random_range(0.0..size),
                rng.random_range(2.0..8.0),
                rng.random_range(1.0..6.0) * size / 70.0,
                rng.random_range(0..3u8),
            )
        })
        .collect();
    heightfield(n, n, 1.0, |x, y| {
        hills
            .iter()
            .map(|&(cx, cy, w, amp, kind)| {
                let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt() / w;
                match kind {
                    0 => amp * (-d * d).exp(),
                    1 => amp * (1.0 - d).max(0.0),
                    _ => amp * (((1.0 - d).max(0.0) * 3.0).floor() / 3.0),
                }
            })
            .sum()
    })
}

/// The desk-scale evaluation corpus: three seeded meshes of 5k–10k vertices.
pub fn evaluation_corpus(seed: u64) -> Vec<(String, Mesh)> {
    vec![
        ("bumpy_sphere".into(), bumpy_sphere(1.0, 5, 40, seed)),
        (
            "ridged_torus".into(),
            ridged_torus(2.0, 0.7, 120, 48, seed.wrapping_add(1)),
        ),
        ("terrain".into(), terrain(76, seed.wrapping_add(2))),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosahedron_is_unit_edge() {
        let m = icosahedron(1.0);
        for f in &m.faces {
            for k in 0..3 {
                let e = (m.vertices[f[k]] - m.vertices[f[(k + 1) % 3]]).norm();
                assert!((e - 1.0).abs() < 1e-12);
            }
        }
        // Outward orientation: each face normal points away from the origin.
        for fi in 0..m.face_count() {
            let c = m.faces[fi].iter().map(|&i| m.vertices[i]).sum::<Point>();
            assert!(m.face_normal_unnormalized(fi).dot(&c) > 0.0);
        }
    }

    #[test]
    fn icosphere_counts() {
        let m = icosphere(2.0, 3);
        assert_eq!(m.vertex_count(), 642);
        assert_eq!(m.face_count(), 1280);
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.vertices.iter().all(|v| (v.norm() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn closed_generators_are_closed() {
        assert_eq!(torus(2.0, 0.5, 12, 8).euler_characteristic(), 0);
        assert_eq!(cube(1.0).euler_characteristic(), 2);
        assert_eq!(square_pyramid(1.0).0.euler_characteristic(), 2);
    }

    #[test]
    fn corpus_is_desk_scale_and_seeded() {
        let a = evaluation_corpus(7);
        let b = evaluation_corpus(7);
        for ((name, m), (_, m2)) in a.iter().zip(&b) {
            assert!(m.vertex_count() >= 5000, "{name}: {}", m.vertex_count());
            assert_eq!(m, m2);
        }
    }
}
