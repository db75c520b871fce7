use std::collections::HashMap;

use super::vec3::{self, Vec3};
use super::{gauss_unit, FaceNeighbor, Mesh, MeshParts, RawCell, RawFace, Topology, WeightRule};
use crate::error::{Error, Result};

/// Largest accepted subdivision level (20·4^7 = 327 680 cells).
pub const MAX_SPHERE_LEVEL: u32 = 7;

const ICOSAHEDRON_FACES: [[usize; 3]; 20] = [
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

fn icosahedron() -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    (raw.iter().map(vec3::normalize).collect(), ICOSAHEDRON_FACES.to_vec())
}

fn subdivide(points: &mut Vec<Vec3>, tris: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, points: &mut Vec<Vec3>| -> usize {
        let key = (a.min(b), a.max(b));
        *cache.entry(key).or_insert_with(|| {
            points.push(vec3::normalize(&vec3::add(&points[a], &points[b])));
            points.len() - 1
        })
    };
    let mut out = Vec::with_capacity(tris.len() * 4);
    for &[a, b, c] in tris {
        let ab = midpoint(a, b, points);
        let bc = midpoint(b, c, points);
        let ca = midpoint(c, a, points);
        out.push([a, ab, ca]);
        out.push([ab, b, bc]);
        out.push([ca, bc, c]);
        out.push([ab, bc, ca]);
    }
    out
}

/// Area of the geodesic triangle `abc` on the unit sphere.
pub(crate) fn spherical_triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let triple = vec3::dot(a, &vec3::cross(b, c)).abs();
    let denom = 1.0 + vec3::dot(a, b) + vec3::dot(b, c) + vec3::dot(c, a);
    2.0 * triple.atan2(denom)
}

/// Icosahedral geodesic triangulation of the unit sphere with the round area
/// form. Face normals are in-surface unit conormals of the geodesic edges and
/// face measures are arc lengths.
pub fn build_sphere_mesh(subdivision_level: u32) -> Result<Mesh> {
    if subdivision_level > MAX_SPHERE_LEVEL {
        return Err(Error::ResourceGuard(format!(
            "sphere subdivision level {subdivision_level} exceeds maximum {MAX_SPHERE_LEVEL}"
        )));
    }
    let (mut points, mut tris) = icosahedron();
    for _ in 0..subdivision_level {
        tris = subdivide(&mut points, &tris);
    }
    // outward (counter-clockwise) orientation
    for t in tris.iter_mut() {
        let [a, b, c] = t.map(|i| points[i]);
        let n = vec3::cross(&vec3::sub(&b, &a), &vec3::sub(&c, &a));
        if vec3::dot(&n, &vec3::add(&vec3::add(&a, &b), &c)) < 0.0 {
            t.swap(1, 2);
        }
    }

    let gauss = gauss_unit(6);
    let mut cells = Vec::with_capacity(tris.len());
    let mut frames = Vec::with_capacity(tris.len());
    let mut faces: Vec<RawFace> = Vec::with_capacity(tris.len() * 3 / 2);
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();

    for (k, tri) in tris.iter().enumerate() {
        let [a, b, c] = tri.map(|i| points[i]);
        let area = spherical_triangle_area(&a, &b, &c);
        let perimeter = vec3::angle(&a, &b) + vec3::angle(&b, &c) + vec3::angle(&c, &a);
        let bary = vec3::normalize(&vec3::add(&vec3::add(&a, &b), &c));
        let e1 = vec3::normalize(&vec3::sub(&a, &vec3::scale(&bary, vec3::dot(&a, &bary))));
        let e2 = vec3::cross(&bary, &e1);
        frames.push([e1, e2]);
        cells.push(RawCell {
            chart_measure: area,
            barycenter: bary,
            h: 4.0 * area / perimeter,
            vertices: tri.to_vec(),
        });

        for i in 0..3 {
            let (va, vb, vc) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
            let key = (va.min(vb), va.max(vb));
            if let Some(&fid) = edge_face.get(&key) {
                faces[fid].neighbor = FaceNeighbor::Cell(k);
                continue;
            }
            let pa = points[va];
            let pb = points[vb];
            let length = vec3::angle(&pa, &pb);
            let mut normal = vec3::normalize(&vec3::cross(&pa, &pb));
            if vec3::dot(&normal, &points[vc]) > 0.0 {
                normal = vec3::scale(&normal, -1.0);
            }
            let tangent = vec3::normalize(&vec3::sub(&pb, &vec3::scale(&pa, vec3::dot(&pa, &pb))));
            let nodes = gauss
                .iter()
                .map(|&(s, w)| {
                    let (sn, cs) = (s * length).sin_cos();
                    let p = vec3::add(&vec3::scale(&pa, cs), &vec3::scale(&tangent, sn));
                    (p, w * length, normal)
                })
                .collect();
            edge_face.insert(key, faces.len());
            faces.push(RawFace {
                owner: k,
                // placeholder, replaced when the adjacent triangle is visited
                neighbor: FaceNeighbor::Cell(k),
                measure: length,
                normal,
                nodes,
            });
        }
    }
    MeshParts {
        dimension: 2,
        topology: Topology::Sphere,
        cells,
        faces,
        points,
        tangent_frames: Some(frames),
    }
    .finish(&WeightRule::Uniform(1.0))
}
