use super::{BoundaryTag, FaceNeighbor, Mesh, MeshParts, RawCell, RawFace, Topology, WeightRule};
use crate::error::{Error, Result};

fn uniform_cells(n: usize) -> Vec<RawCell> {
    let dx = 1.0 / n as f64;
    (0..n)
        .map(|i| RawCell {
            chart_measure: dx,
            barycenter: [(i as f64 + 0.5) * dx, 0.0, 0.0],
            h: dx,
            vertices: vec![i, i + 1],
        })
        .collect()
}

fn point_face(owner: usize, neighbor: FaceNeighbor, x: f64, sign: f64) -> RawFace {
    let normal = [sign, 0.0, 0.0];
    RawFace {
        owner,
        neighbor,
        measure: 1.0,
        normal,
        nodes: vec![([x, 0.0, 0.0], 1.0, normal)],
    }
}

/// Periodic mesh of `n_cells` uniform chart intervals on `[0, 1)`.
///
/// Face `i` sits at `x = (i + 1)/n`, is owned by cell `i` and points in `+x`.
pub fn build_circle_mesh(n_cells: usize, weight: &WeightRule) -> Result<Mesh> {
    if n_cells < 3 {
        return Err(Error::InvalidArgument(format!(
            "circle mesh needs at least 3 cells, got {n_cells}"
        )));
    }
    let n = n_cells;
    let faces = (0..n)
        .map(|i| point_face(i, FaceNeighbor::Cell((i + 1) % n), (i + 1) as f64 / n as f64, 1.0))
        .collect();
    MeshParts {
        dimension: 1,
        topology: Topology::Circle,
        cells: uniform_cells(n),
        faces,
        points: (0..=n).map(|i| [i as f64 / n as f64, 0.0, 0.0]).collect(),
        tangent_frames: None,
    }
    .finish(weight)
}

/// Mesh of `[0, 1]` with a `Left` boundary face at `x = 0` and a `Right`
/// boundary face at `x = 1`. Faces are ordered left to right.
pub fn build_interval_mesh(n_cells: usize, weight: &WeightRule) -> Result<Mesh> {
    if n_cells < 3 {
        return Err(Error::InvalidArgument(format!(
            "interval mesh needs at least 3 cells, got {n_cells}"
        )));
    }
    let n = n_cells;
    let mut faces = Vec::with_capacity(n + 1);
    faces.push(point_face(0, FaceNeighbor::Boundary(BoundaryTag::Left), 0.0, -1.0));
    for i in 0..n - 1 {
        faces.push(point_face(i, FaceNeighbor::Cell(i + 1), (i + 1) as f64 / n as f64, 1.0));
    }
    faces.push(point_face(n - 1, FaceNeighbor::Boundary(BoundaryTag::Right), 1.0, 1.0));
    MeshParts {
        dimension: 1,
        topology: Topology::Interval,
        cells: uniform_cells(n),
        faces,
        points: (0..=n).map(|i| [i as f64 / n as f64, 0.0, 0.0]).collect(),
        tangent_frames: None,
    }
    .finish(weight)
}
