use crate::error::{Error, Result};
use crate::fv::{Snapshot, Trajectory};
use crate::geometry::{BoundaryTag, FaceNeighbor, Mesh};

/// Windowed average of the cells next to a boundary face over a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEstimate {
    pub face: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub value: f64,
    pub window_cells: usize,
    pub window_steps: usize,
}

fn boundary_cells(mesh: &Mesh, side: BoundaryTag, window_cells: usize) -> Result<(usize, Vec<usize>)> {
    if window_cells == 0 {
        return Err(Error::InvalidArgument("trace window needs at least one cell".into()));
    }
    if window_cells > mesh.n_cells() {
        return Err(Error::InvalidArgument(format!(
            "trace window of {window_cells} cells exceeds the mesh ({} cells)",
            mesh.n_cells()
        )));
    }
    let face = mesh
        .faces
        .iter()
        .find(|f| f.neighbor == FaceNeighbor::Boundary(side))
        .ok_or_else(|| Error::InvalidArgument(format!("mesh has no {side:?} boundary")))?;
    let at = face.nodes[0].point;
    let mut order: Vec<usize> = (0..mesh.n_cells()).collect();
    order.sort_by(|&a, &b| {
        let da = (mesh.cells[a].barycenter[0] - at[0]).abs();
        let db = (mesh.cells[b].barycenter[0] - at[0]).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    order.truncate(window_cells);
    Ok((face.id, order))
}

/// Measure-weighted mean over cells and plain mean over snapshots, taken
/// relative to one sample so that constant data average exactly.
fn window_average(mesh: &Mesh, cells: &[usize], snaps: &[&Snapshot]) -> f64 {
    let reference = snaps[0].values[cells[0]];
    let volume: f64 = cells.iter().map(|&c| mesh.cells[c].measure).sum();
    let total: f64 = snaps
        .iter()
        .map(|s| {
            cells
                .iter()
                .map(|&c| mesh.cells[c].measure * (s.values[c] - reference))
                .sum::<f64>()
                / volume
        })
        .sum();
    reference + total / snaps.len() as f64
}

/// Trailing windowed averages of the first `window_cells` cells next to the
/// `side` boundary over `window_steps` consecutive snapshots, one estimate per
/// snapshot from the `window_steps`-th on.
pub fn extract_weak_trace(
    traj: &Trajectory,
    side: BoundaryTag,
    window_cells: usize,
    window_steps: usize,
) -> Result<Vec<TraceEstimate>> {
    let (face, cells) = boundary_cells(&traj.mesh, side, window_cells)?;
    if window_steps == 0 || window_steps > traj.snapshots.len() {
        return Err(Error::InvalidArgument(format!(
            "trace window of {window_steps} steps does not fit {} snapshots",
            traj.snapshots.len()
        )));
    }
    Ok((window_steps - 1..traj.snapshots.len())
        .map(|i| {
            let snaps: Vec<&Snapshot> = traj.snapshots[i + 1 - window_steps..=i].iter().collect();
            TraceEstimate {
                face,
                t_start: snaps[0].time,
                t_end: snaps[snaps.len() - 1].time,
                value: window_average(&traj.mesh, &cells, &snaps),
                window_cells,
                window_steps,
            }
        })
        .collect())
}

/// Trace estimate over the snapshots with time in `[t_end − width, t_end]`.
pub fn weak_trace_window(
    traj: &Trajectory,
    side: BoundaryTag,
    window_cells: usize,
    t_end: f64,
    width: f64,
) -> Result<TraceEstimate> {
    let (face, cells) = boundary_cells(&traj.mesh, side, window_cells)?;
    let eps = 1e-12 * t_end.abs().max(1.0);
    let snaps: Vec<&Snapshot> = traj
        .snapshots
        .iter()
        .filter(|s| s.time >= t_end - width - eps && s.time <= t_end + eps)
        .collect();
    if snaps.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no snapshots in the window ending at {t_end}"
        )));
    }
    Ok(TraceEstimate {
        face,
        t_start: snaps[0].time,
        t_end: snaps[snaps.len() - 1].time,
        value: window_average(&traj.mesh, &cells, &snaps),
        window_cells,
        window_steps: snaps.len(),
    })
}
