//! Per-vertex differential-geometry descriptors.
//!
//! Two Gaussian curvature estimators are provided: the angle deficit over a
//! one-ring area (mixed Voronoi or barycentric), and the curvature of an
//! extended quadric `z = a x² + b x y + c y² + d x + e y` fitted by least
//! squares in a local tangent frame. They are scored independently by the
//! ranking stage and are not expected to agree at every vertex.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SMatrix, SVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{corner_angle, edge_dihedral, AdjacencyIndex, Mesh, Point};

/// Tikhonov damping for the quadric normal equations, relative to the
/// largest diagonal entry.
const QUADRIC_DAMPING: f64 = 1e-12;
const MAX_QUADRIC_CONDITION: f64 = 1e12;
const FRAME_FALLBACK_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaScheme {
    /// Voronoi area for non-obtuse triangles, midpoint rule for obtuse ones.
    #[default]
    Mixed,
    /// One third of each incident face.
    Barycentric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexFeatures {
    /// Angle-deficit Gaussian curvature.
    pub kappa_g: f64,
    /// Quadric-fit Gaussian curvature.
    pub kappa_g1: f64,
    /// Sum of incident corner angles.
    pub theta: f64,
    pub psi_min: f64,
    pub psi_max: f64,
    pub area: f64,
    pub normal: Point,
    pub valence: usize,
}

/// Local orthonormal frame: `axes` rows are x′, y′, z′ (z′ is the normal).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Point,
    pub axes: Matrix3<f64>,
}

impl LocalFrame {
    pub fn to_local(&self, p: &Point) -> Point {
        self.axes * (p - self.origin)
    }
}

/// Coefficients of `ẑ = a x̂² + b x̂ŷ + c ŷ² + d x̂ + e ŷ` in `frame`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub frame: LocalFrame,
}

fn incident_faces(adj: &AdjacencyIndex, i: usize) -> Result<&[usize]> {
    let faces = &adj.vertex_faces[i];
    if faces.is_empty() {
        return Err(Error::IsolatedVertex(i));
    }
    Ok(faces)
}

/// Angle-weighted average of incident face normals.
pub fn vertex_normal(mesh: &Mesh, adj: &AdjacencyIndex, i: usize) -> Result<Point> {
    let mut acc = Point::zeros();
    for &f in incident_faces(adj, i)? {
        let n = mesh.face_normal_unnormalized(f);
        let len = n.norm();
        if len == 0.0 {
            continue;
        }
        if let Some(angle) = corner_angle(mesh, &mesh.faces[f], i) {
            acc += n * (angle / len);
        }
    }
    acc.try_normalize(0.0).ok_or(Error::ZeroAreaUmbrella(i))
}

pub fn angle_sum_theta(mesh: &Mesh, adj: &AdjacencyIndex, i: usize) -> Result<f64> {
    incident_faces(adj, i)?
        .iter()
        .map(|&f| corner_angle(mesh, &mesh.faces[f], i).ok_or(Error::DegenerateTriangle(i)))
        .sum()
}

/// Minimum and maximum signed dihedral deviation over incident interior edges.
pub fn dihedral_extremes(mesh: &Mesh, adj: &AdjacencyIndex, i: usize) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &u in &adj.vertex_neighbors[i] {
        if let Some(psi) = edge_dihedral(mesh, adj, i, u) {
            lo = lo.min(psi);
            hi = hi.max(psi);
        }
    }
    if lo > hi {
        return Err(Error::NoInteriorEdge(i));
    }
    Ok((lo, hi))
}

fn cot(a: &Point, b: &Point) -> f64 {
    a.dot(b) / a.cross(b).norm()
}

/// Area attributed to vertex `i` from its incident faces.
pub fn one_ring_area(
    mesh: &Mesh,
    adj: &AdjacencyIndex,
    i: usize,
    scheme: AreaScheme,
) -> Result<f64> {
    let mut total = 0.0;
    for &f in incident_faces(adj, i)? {
        let face = mesh.faces[f];
        let area = mesh.face_area(f);
        if area == 0.0 {
            continue;
        }
        total += match scheme {
            AreaScheme::Barycentric => area / 3.0,
            AreaScheme::Mixed => {
                let k = face
                    .iter()
                    .position(|&v| v == i)
                    .expect("face lists vertex");
                let p = mesh.vertices[i];
                let q = mesh.vertices[face[(k + 1) % 3]];
                let r = mesh.vertices[face[(k + 2) % 3]];
                let (pq, pr, qr) = (q - p, r - p, r - q);
                let obtuse_p = pq.dot(&pr) < 0.0;
                let obtuse_q = (-pq).dot(&qr) < 0.0;
                let obtuse_r = (-pr).dot(&(-qr)) < 0.0;
                if obtuse_p {
                    area / 2.0
                } else if obtuse_q || obtuse_r {
                    area / 4.0
                } else {
                    // cot at r weights |pq|², cot at q weights |pr|²
                    let cot_q = cot(&(p - q), &(r - q));
                    let cot_r = cot(&(p - r), &(q - r));
                    (pq.norm_squared() * cot_r + pr.norm_squared() * cot_q) / 8.0
                }
            }
        };
    }
    if total > 0.0 {
        Ok(total)
    } else {
        Err(Error::ZeroAreaUmbrella(i))
    }
}

/// `(2π − Σθ) / 𝒜`; boundary vertices use π in place of 2π.
pub fn gaussian_curvature_deficit(
    mesh: &Mesh,
    adj: &AdjacencyIndex,
    i: usize,
    scheme: AreaScheme,
) -> Result<f64> {
    let theta = angle_sum_theta(mesh, adj, i)?;
    let area = one_ring_area(mesh, adj, i, scheme)?;
    let full = if adj.is_boundary_vertex(i) {
        PI
    } else {
        2.0 * PI
    };
    Ok((full - theta) / area)
}

fn tangent_frame(origin: Point, normal: Point) -> LocalFrame {
    let project = |axis: Point| axis - normal * normal.dot(&axis);
    let mut x = project(Point::x());
    if x.norm() < FRAME_FALLBACK_EPS {
        x = project(Point::y());
    }
    let x = x.normalize();
    let y = normal.cross(&x);
    LocalFrame {
        origin,
        axes: Matrix3::from_rows(&[x.transpose(), y.transpose(), normal.transpose()]),
    }
}

/// Fit the extended quadric to the `ring_depth`-ring of vertex `i`. When
/// fewer than five usable neighbors are found the ring is widened once.
pub fn fit_quadric(
    mesh: &Mesh,
    adj: &AdjacencyIndex,
    i: usize,
    ring_depth: usize,
) -> Result<QuadricCoeffs> {
    let normal = vertex_normal(mesh, adj, i)?;
    let origin = mesh.vertices[i];
    let frame = tangent_frame(origin, normal);

    let gather = |depth: usize| -> Vec<Point> {
        adj.ring(i, depth)
            .into_iter()
            .map(|j| frame.to_local(&mesh.vertices[j]))
            .filter(|p| p.norm_squared() > 0.0)
            .collect()
    };
    let mut pts = gather(ring_depth.max(1));
    if pts.len() < 5 {
        pts = gather(ring_depth.max(1) + 1);
    }
    if pts.len() < 5 {
        return Err(Error::InsufficientNeighbors {
            vertex: i,
            found: pts.len(),
        });
    }

    // Work in units of the mean neighbor distance so the normal equations
    // are well scaled regardless of model units.
    let h = pts.iter().map(|p| p.norm()).sum::<f64>() / pts.len() as f64;
    let mut ata = SMatrix::<f64, 5, 5>::zeros();
    let mut atb = SVector::<f64, 5>::zeros();
    for p in &pts {
        let (x, y, z) = (p.x / h, p.y / h, p.z / h);
        let row = SVector::<f64, 5>::from([x * x, x * y, y * y, x, y]);
        ata += row * row.transpose();
        atb += row * z;
    }
    let damping = QUADRIC_DAMPING * ata.diagonal().max();
    for k in 0..5 {
        ata[(k, k)] += damping;
    }
    let eig = SymmetricEigen::new(ata);
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    let condition = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    if condition > MAX_QUADRIC_CONDITION {
        return Err(Error::RankDeficient {
            vertex: i,
            condition,
        });
    }
    let sol = ata
        .cholesky()
        .ok_or(Error::RankDeficient {
            vertex: i,
            condition,
        })?
        .solve(&atb);
    // Undo the scaling: quadratic terms carry 1/h, linear terms are unitless.
    Ok(QuadricCoeffs {
        a: sol[0] / h,
        b: sol[1] / h,
        c: sol[2] / h,
        d: sol[3],
        e: sol[4],
        frame,
    })
}

/// `(4ac − b²) / (1 + d² + e²)²`.
pub fn gaussian_curvature_quadric(q: &QuadricCoeffs) -> f64 {
    let denom = 1.0 + q.d * q.d + q.e * q.e;
    (4.0 * q.a * q.c - q.b * q.b) / (denom * denom)
}

/// Cotangent Laplace–Beltrami of position; its norm is twice the mean
/// curvature.
pub fn mean_curvature_normal(mesh: &Mesh, adj: &AdjacencyIndex, i: usize) -> Result<Point> {
    let faces = incident_faces(adj, i)?;
    if faces.len() < 3 || adj.is_boundary_vertex(i) {
        return Err(Error::NoInteriorEdge(i));
    }
    let p = mesh.vertices[i];
    let mut acc = Point::zeros();
    for &f in faces {
        let face = mesh.faces[f];
        let k = face
            .iter()
            .position(|&v| v == i)
            .expect("face lists vertex");
        let q = mesh.vertices[face[(k + 1) % 3]];
        let r = mesh.vertices[face[(k + 2) % 3]];
        let sin_q = (p - q).cross(&(r - q)).norm();
        if sin_q == 0.0 {
            return Err(Error::DegenerateTriangle(i));
        }
        // Edge p–q is opposite the corner at r, edge p–r opposite q.
        acc += (p - q) * cot(&(p - r), &(q - r)) + (p - r) * cot(&(p - q), &(r - q));
    }
    let area = one_ring_area(mesh, adj, i, AreaScheme::Mixed)?;
    Ok(acc / (2.0 * area))
}

/// Eigen-decomposition of a symmetric 3×3 matrix by cyclic Jacobi sweeps.
/// Returns eigenvalues and the matrix whose columns are the eigenvectors.
pub fn jacobi_eigen(mut a: Matrix3<f64>) -> ([f64; 3], Matrix3<f64>) {
    let mut v = Matrix3::identity();
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let off = (a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2)).sqrt();
        if off <= 1e-12 * scale.max(1.0) {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut rot = Matrix3::identity();
            rot[(p, p)] = c;
            rot[(q, q)] = c;
            rot[(p, q)] = s;
            rot[(q, p)] = -s;
            a = rot.transpose() * a * rot;
            v *= rot;
        }
    }
    ([a[(0, 0)], a[(1, 1)], a[(2, 2)]], v)
}

pub fn covariance(points: &[Point]) -> Matrix3<f64> {
    let n = points.len().max(1) as f64;
    let mean = points.iter().sum::<Point>() / n;
    points
        .iter()
        .map(|p| {
            let d = p - mean;
            d * d.transpose()
        })
        .sum::<Matrix3<f64>>()
        / n
}

/// Dominant eigenvector of the vertex-coordinate covariance, signed so its
/// largest-magnitude component is positive.
pub fn principal_axis(mesh: &Mesh) -> Result<Point> {
    let cov = covariance(&mesh.vertices);
    if mesh.vertex_count() < 2 || cov.trace() <= 0.0 {
        return Err(Error::DegeneratePointCloud);
    }
    let (vals, vecs) = jacobi_eigen(cov);
    let mut best = 0;
    for k in 1..3 {
        if vals[k] > vals[best] {
            best = k;
        }
    }
    let mut axis: Point = vecs.column(best).into_owned().normalize();
    let mut big = 0;
    for k in 1..3 {
        if axis[k].abs() > axis[big].abs() {
            big = k;
        }
    }
    if axis[big] < 0.0 {
        axis = -axis;
    }
    Ok(axis)
}

/// Relative gap `(λ1 − λ2) / λ1` between the two largest covariance
/// eigenvalues. Near zero, [`principal_axis`] is ill-conditioned.
pub fn principal_axis_gap(mesh: &Mesh) -> Result<f64> {
    let cov = covariance(&mesh.vertices);
    if mesh.vertex_count() < 2 || cov.trace() <= 0.0 {
        return Err(Error::DegeneratePointCloud);
    }
    let (vals, _) = jacobi_eigen(cov);
    let mut v = vals;
    v.sort_by(|a, b| b.total_cmp(a));
    Ok((v[0] - v[1]) / v[0])
}

/// Compute every descriptor for vertex `i` with a one-ring quadric fit.
pub fn vertex_features(
    mesh: &Mesh,
    adj: &AdjacencyIndex,
    i: usize,
    scheme: AreaScheme,
) -> Result<VertexFeatures> {
    let theta = angle_sum_theta(mesh, adj, i)?;
    let (psi_min, psi_max) = dihedral_extremes(mesh, adj, i)?;
    let area = one_ring_area(mesh, adj, i, scheme)?;
    let full = if adj.is_boundary_vertex(i) {
        PI
    } else {
        2.0 * PI
    };
    let quadric = fit_quadric(mesh, adj, i, 1)?;
    Ok(VertexFeatures {
        kappa_g: (full - theta) / area,
        kappa_g1: gaussian_curvature_quadric(&quadric),
        theta,
        psi_min,
        psi_max,
        area,
        normal: quadric.frame.axes.row(2).transpose(),
        valence: adj.valence(i),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_adjacency;
    use crate::shapes;
    use approx::assert_relative_eq;

    fn with_adj(m: &Mesh) -> AdjacencyIndex {
        build_adjacency(m)
    }

    /// Brute-force corner angle via the law of cosines.
    fn law_of_cosines_angle(p: Point, q: Point, r: Point) -> f64 {
        let (a, b, c) = ((q - r).norm(), (p - q).norm(), (p - r).norm());
        ((b * b + c * c - a * a) / (2.0 * b * c))
            .clamp(-1.0, 1.0)
            .acos()
    }

    #[test]
    fn pyramid_apex_normal_is_up() {
        let (m, apex) = shapes::square_pyramid(1.3);
        let n = vertex_normal(&m, &with_adj(&m), apex).unwrap();
        assert_relative_eq!(n, Point::z(), epsilon = 1e-9);
    }

    #[test]
    fn planar_grid_interior() {
        let m = shapes::grid(5, 5, 0.7);
        let adj = with_adj(&m);
        let c = 12;
        let n = vertex_normal(&m, &adj, c).unwrap();
        assert!((n.z.abs() - 1.0).abs() < 1e-12);
        assert!((angle_sum_theta(&m, &adj, c).unwrap() - 2.0 * PI).abs() < 1e-12);
        let (lo, hi) = dihedral_extremes(&m, &adj, c).unwrap();
        assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
        assert!(
            gaussian_curvature_deficit(&m, &adj, c, AreaScheme::Mixed)
                .unwrap()
                .abs()
                < 1e-12
        );
        let bary = one_ring_area(&m, &adj, c, AreaScheme::Barycentric).unwrap();
        let total: f64 = adj.vertex_faces[c].iter().map(|&f| m.face_area(f)).sum();
        assert_relative_eq!(bary, total / 3.0, epsilon = 1e-15);
        assert!(mean_curvature_normal(&m, &adj, c).unwrap().norm() < 1e-9);
    }

    #[test]
    fn icosahedron_vertex_descriptors() {
        let m = shapes::icosahedron(1.0);
        let adj = with_adj(&m);
        for v in 0..12 {
            let n = vertex_normal(&m, &adj, v).unwrap();
            assert!(n.dot(&m.vertices[v].normalize()) > 0.999);
            assert_relative_eq!(
                angle_sum_theta(&m, &adj, v).unwrap(),
                5.0 * PI / 3.0,
                epsilon = 1e-12
            );
            let area = one_ring_area(&m, &adj, v, AreaScheme::Barycentric).unwrap();
            let expect_area = 5.0 * (3f64.sqrt() / 4.0) / 3.0;
            assert_relative_eq!(area, expect_area, epsilon = 1e-12);
            assert!((area - 0.72169).abs() < 1e-5);
            let k = gaussian_curvature_deficit(&m, &adj, v, AreaScheme::Barycentric).unwrap();
            assert_relative_eq!(k, (PI / 3.0) / expect_area, epsilon = 1e-12);
            assert!((k - 1.45103).abs() < 1e-5);
        }
    }

    #[test]
    fn cube_corner_angle_sum_matches_brute_force() {
        let m = shapes::cube(1.0);
        let adj = with_adj(&m);
        for v in 0..8 {
            let brute: f64 = m
                .faces
                .iter()
                .filter(|f| f.contains(&v))
                .map(|f| {
                    let k = f.iter().position(|&x| x == v).unwrap();
                    law_of_cosines_angle(
                        m.vertices[v],
                        m.vertices[f[(k + 1) % 3]],
                        m.vertices[f[(k + 2) % 3]],
                    )
                })
                .sum();
            assert_relative_eq!(
                angle_sum_theta(&m, &adj, v).unwrap(),
                brute,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn fold_crease_dihedral() {
        let (m, crease) = shapes::fold(7, PI / 2.0);
        let adj = with_adj(&m);
        let (lo, hi) = dihedral_extremes(&m, &adj, crease).unwrap();
        assert_relative_eq!(hi, PI / 2.0, epsilon = 1e-12);
        assert!(lo.abs() < 1e-12);
    }

    #[test]
    fn saddle_umbrella_has_mixed_dihedrals() {
        // z = x² − y² sampled on a grid; the origin is a saddle.
        let m = shapes::heightfield(5, 5, 0.5, |x, y| (x - 1.0).powi(2) - (y - 1.0).powi(2));
        let adj = with_adj(&m);
        let c = 12;
        let per_edge: Vec<f64> = adj.vertex_neighbors[c]
            .iter()
            .map(|&u| edge_dihedral(&m, &adj, c, u).unwrap())
            .collect();
        let (lo, hi) = dihedral_extremes(&m, &adj, c).unwrap();
        assert_eq!(lo, per_edge.iter().copied().fold(f64::INFINITY, f64::min));
        assert_eq!(
            hi,
            per_edge.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        );
        assert!(lo < 0.0 && hi > 0.0);
        assert!(gaussian_curvature_deficit(&m, &adj, c, AreaScheme::Mixed).unwrap() < 0.0);
        let q = fit_quadric(&m, &adj, c, 1).unwrap();
        assert!(gaussian_curvature_quadric(&q) < 0.0);
    }

    /// Circumcenter of a triangle (oracle for the Voronoi region).
    fn circumcenter(a: Point, b: Point, c: Point) -> Point {
        let (ab, ac) = (b - a, c - a);
        let n = ab.cross(&ac);
        a + (n.cross(&ab) * ac.norm_squared() + ac.cross(&n) * ab.norm_squared())
            / (2.0 * n.norm_squared())
    }

    #[test]
    fn mixed_area_matches_circumcenter_voronoi() {
        // Slightly raised regular hexagonal umbrella: all triangles acute.
        let mut verts = vec![Point::new(0.0, 0.0, 0.2)];
        for k in 0..6 {
            let a = PI / 3.0 * k as f64;
            verts.push(Point::new(a.cos(), a.sin(), 0.0));
        }
        let faces: Vec<[usize; 3]> = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        let m = Mesh::new(verts, faces).unwrap();
        let adj = with_adj(&m);
        let oracle: f64 = m
            .faces
            .iter()
            .map(|f| {
                let (p, q, r) = (m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]);
                let o = circumcenter(p, q, r);
                let (mq, mr) = ((p + q) / 2.0, (p + r) / 2.0);
                0.5 * (mq - p).cross(&(o - p)).norm() + 0.5 * (o - p).cross(&(mr - p)).norm()
            })
            .sum();
        let mixed = one_ring_area(&m, &adj, 0, AreaScheme::Mixed).unwrap();
        assert_relative_eq!(mixed, oracle, epsilon = 1e-12);
    }

    fn sampled_quadric(f: impl Fn(f64, f64) -> f64) -> (Mesh, usize) {
        let m = shapes::heightfield(5, 5, 0.25, |x, y| f(x - 0.5, y - 0.5));
        let mut m = m;
        for v in &mut m.vertices {
            v.x -= 0.5;
            v.y -= 0.5;
        }
        (m, 12)
    }

    #[test]
    fn quadric_fit_is_exact_on_quadrics() {
        for (f, expect, kappa) in [
            (
                Box::new(|x: f64, y: f64| x * x + y * y) as Box<dyn Fn(f64, f64) -> f64>,
                [1.0, 0.0, 1.0],
                4.0,
            ),
            (
                Box::new(|x: f64, y: f64| x * x - y * y),
                [1.0, 0.0, -1.0],
                -4.0,
            ),
            (Box::new(|_: f64, _: f64| 0.0), [0.0, 0.0, 0.0], 0.0),
        ] {
            let (m, c) = sampled_quadric(f);
            let adj = with_adj(&m);
            let q = fit_quadric(&m, &adj, c, 1).unwrap();
            assert_relative_eq!(q.frame.axes.row(2).transpose(), Point::z(), epsilon = 1e-12);
            for (got, want) in [q.a, q.b, q.c].iter().zip(expect) {
                assert!((got - want).abs() < 1e-9, "{q:?}");
            }
            assert!(q.d.abs() < 1e-9 && q.e.abs() < 1e-9);
            assert!((gaussian_curvature_quadric(&q) - kappa).abs() < 1e-8);
        }
    }

    #[test]
    fn quadric_curvature_formula() {
        let frame = tangent_frame(Point::zeros(), Point::z());
        let q = |a, b, c, d, e| QuadricCoeffs {
            a,
            b,
            c,
            d,
            e,
            frame,
        };
        assert_eq!(gaussian_curvature_quadric(&q(1.0, 0.0, 1.0, 0.0, 0.0)), 4.0);
        assert_eq!(gaussian_curvature_quadric(&q(0.0, 0.0, 0.0, 0.0, 0.0)), 0.0);
        assert_eq!(
            gaussian_curvature_quadric(&q(1.0, 0.0, -1.0, 0.0, 0.0)),
            -4.0
        );
        assert_relative_eq!(
            gaussian_curvature_quadric(&q(1.0, 1.0, 1.0, 1.0, 1.0)),
            3.0 / 9.0
        );
    }

    #[test]
    fn tangent_frame_falls_back_to_y() {
        let f = tangent_frame(Point::zeros(), Point::x());
        let axes = f.axes;
        assert_relative_eq!(
            axes * axes.transpose(),
            Matrix3::identity(),
            epsilon = 1e-12
        );
        assert_relative_eq!(axes.row(0).transpose(), Point::y(), epsilon = 1e-12);
    }

    #[test]
    fn quadric_fit_errors() {
        let m = shapes::single_triangle();
        let adj = with_adj(&m);
        assert!(matches!(
            fit_quadric(&m, &adj, 0, 1),
            Err(Error::InsufficientNeighbors { .. })
        ));
    }

    #[test]
    fn sphere_mean_curvature() {
        let r = 2.0;
        let m = shapes::icosphere(r, 3);
        let adj = with_adj(&m);
        for v in [0, 50, 300, 641] {
            let k = mean_curvature_normal(&m, &adj, v).unwrap();
            assert!((k.norm() - 2.0 / r).abs() / (2.0 / r) < 0.1, "{}", k.norm());
            assert!(k.normalize().dot(&m.vertices[v].normalize()).abs() > 0.99);
        }
    }

    #[test]
    fn cylinder_mean_curvature() {
        let r = 1.5;
        let m = shapes::cylinder(r, 48, 9, 0.2);
        let adj = with_adj(&m);
        let v = 4 * 48 + 7;
        let k = mean_curvature_normal(&m, &adj, v).unwrap();
        assert!((k.norm() - 1.0 / r).abs() / (1.0 / r) < 0.1, "{}", k.norm());
    }

    #[test]
    fn principal_axis_cases() {
        let pts: Vec<Point> = (0..50)
            .map(|i| {
                Point::new(
                    i as f64,
                    1e-4 * ((i * 7) % 5) as f64,
                    -1e-4 * ((i * 3) % 4) as f64,
                )
            })
            .collect();
        let m = Mesh {
            vertices: pts,
            faces: vec![],
        };
        assert_relative_eq!(principal_axis(&m).unwrap(), Point::x(), epsilon = 1e-6);

        let cube = shapes::cube(1.0);
        let a1 = principal_axis(&cube).unwrap();
        let a2 = principal_axis(&cube).unwrap();
        assert_eq!(a1, a2);
        let cov = covariance(&cube.vertices);
        let lambda = a1.dot(&(cov * a1));
        assert!((cov * a1 - a1 * lambda).norm() <= 1e-9);

        let one = Mesh {
            vertices: vec![Point::new(1.0, 2.0, 3.0); 4],
            faces: vec![],
        };
        assert!(matches!(
            principal_axis(&one),
            Err(Error::DegeneratePointCloud)
        ));
    }

    #[test]
    fn jacobi_agrees_with_nalgebra() {
        let a = Matrix3::new(4.0, 1.0, -2.0, 1.0, 2.0, 0.5, -2.0, 0.5, 3.0);
        let (vals, vecs) = jacobi_eigen(a);
        for k in 0..3 {
            let v = vecs.column(k).into_owned();
            assert!((a * v - v * vals[k]).norm() < 1e-10);
        }
        let mut ours = vals.to_vec();
        ours.sort_by(f64::total_cmp);
        let mut theirs: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            assert_relative_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn isolated_vertex_errors() {
        let mut m = shapes::tetrahedron();
        m.vertices.push(Point::new(3.0, 3.0, 3.0));
        let adj = with_adj(&m);
        assert!(matches!(
            vertex_normal(&m, &adj, 4),
            Err(Error::IsolatedVertex(4))
        ));
        assert!(matches!(
            angle_sum_theta(&m, &adj, 4),
            Err(Error::IsolatedVertex(4))
        ));
    }
}
