use super::{gauss_unit, FaceNeighbor, Mesh, MeshParts, RawCell, RawFace, Topology, WeightRule};
use crate::error::{Error, Result};

/// Doubly periodic structured quad mesh on `[0, 1)²`.
///
/// Cell `(i, j)` has id `j·nx + i` and owns its `+x` and `+y` faces.
pub fn build_torus_mesh(nx: usize, ny: usize, weight: &WeightRule) -> Result<Mesh> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidArgument(format!(
            "torus mesh needs nx, ny >= 3, got {nx}x{ny}"
        )));
    }
    let dx = 1.0 / nx as f64;
    let dy = 1.0 / ny as f64;
    let id = |i: usize, j: usize| (j % ny) * nx + (i % nx);
    let pid = |i: usize, j: usize| j * (nx + 1) + i;
    let gauss = gauss_unit(2);

    let mut cells = Vec::with_capacity(nx * ny);
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(RawCell {
                chart_measure: dx * dy,
                barycenter: [(i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy, 0.0],
                h: 2.0 * dx * dy / (dx + dy),
                vertices: vec![pid(i, j), pid(i + 1, j), pid(i + 1, j + 1), pid(i, j + 1)],
            });
            let xf = (i + 1) as f64 * dx;
            let nx_normal = [1.0, 0.0, 0.0];
            faces.push(RawFace {
                owner: id(i, j),
                neighbor: FaceNeighbor::Cell(id(i + 1, j)),
                measure: dy,
                normal: nx_normal,
                nodes: gauss
                    .iter()
                    .map(|&(s, w)| ([xf, (j as f64 + s) * dy, 0.0], w * dy, nx_normal))
                    .collect(),
            });
            let yf = (j + 1) as f64 * dy;
            let ny_normal = [0.0, 1.0, 0.0];
            faces.push(RawFace {
                owner: id(i, j),
                neighbor: FaceNeighbor::Cell(id(i, j + 1)),
                measure: dx,
                normal: ny_normal,
                nodes: gauss
                    .iter()
                    .map(|&(s, w)| ([(i as f64 + s) * dx, yf, 0.0], w * dx, ny_normal))
                    .collect(),
            });
        }
    }
    let points = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| [i as f64 * dx, j as f64 * dy, 0.0]))
        .collect();
    MeshParts {
        dimension: 2,
        topology: Topology::Torus,
        cells,
        faces,
        points,
        tangent_frames: None,
    }
    .finish(weight)
}
