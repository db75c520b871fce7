use crate::error::{Error, Result};
use crate::fv::Trajectory;
use crate::geometry::{Cell, Mesh};

/// `Σ_K |K|_ω |u_K − v_K|`.
pub fn l1_distance(mesh: &Mesh, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != mesh.n_cells() || v.len() != mesh.n_cells() {
        return Err(Error::Mismatch(format!(
            "states of length {} and {} on a mesh of {} cells",
            u.len(),
            v.len(),
            mesh.n_cells()
        )));
    }
    Ok(mesh.cells.iter().map(|c| c.measure * (u[c.id] - v[c.id]).abs()).sum())
}

/// `Σ_K |K|_ω |u_K − exact(K)|`.
pub fn l1_error(mesh: &Mesh, u: &[f64], exact: impl Fn(&Cell) -> f64) -> Result<f64> {
    if u.len() != mesh.n_cells() {
        return Err(Error::Mismatch("state length differs from cell count".into()));
    }
    Ok(mesh.cells.iter().map(|c| c.measure * (u[c.id] - exact(c)).abs()).sum())
}

/// Absolute slack allowed between consecutive distances.
pub const CONTRACTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub distances: Vec<f64>,
    /// Largest `d_{n+1} − d_n` (negative when strictly decreasing).
    pub max_increase: f64,
    pub nonincreasing: bool,
}

fn same_mesh(a: &Trajectory, b: &Trajectory) -> bool {
    std::sync::Arc::ptr_eq(&a.mesh, &b.mesh)
        || (a.mesh.n_cells() == b.mesh.n_cells()
            && a.mesh
                .cells
                .iter()
                .zip(&b.mesh.cells)
                .all(|(p, q)| p.measure == q.measure))
}

/// Stepwise check that the `L¹_ω` distance of two synchronized runs never grows.
pub fn contraction_check(traj_u: &Trajectory, traj_v: &Trajectory) -> Result<ContractionReport> {
    if !same_mesh(traj_u, traj_v) {
        return Err(Error::Mismatch("trajectories live on different meshes".into()));
    }
    if traj_u.time_steps() != traj_v.time_steps() {
        return Err(Error::Mismatch(
            "trajectories do not share one time-step sequence".into(),
        ));
    }
    if traj_u.snapshots.len() != traj_v.snapshots.len()
        || traj_u
            .snapshots
            .iter()
            .zip(&traj_v.snapshots)
            .any(|(a, b)| a.time != b.time)
    {
        return Err(Error::Mismatch("trajectories have different snapshot times".into()));
    }
    let distances = traj_u
        .snapshots
        .iter()
        .zip(&traj_v.snapshots)
        .map(|(a, b)| l1_distance(&traj_u.mesh, &a.values, &b.values))
        .collect::<Result<Vec<f64>>>()?;
    let max_increase = distances
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ContractionReport {
        nonincreasing: distances.len() < 2 || max_increase <= CONTRACTION_SLACK,
        max_increase: if distances.len() < 2 { 0.0 } else { max_increase },
        distances,
    })
}

/// `max_n |m_n − m_0| / max(1, |m_0|)` over the recorded steps.
pub fn conservation_check(traj: &Trajectory) -> f64 {
    let m0 = traj.snapshots.first().map_or(0.0, |s| s.mass);
    let scale = m0.abs().max(1.0);
    traj.diagnostics
        .iter()
        .map(|d| d.mass)
        .chain(traj.snapshots.iter().map(|s| s.mass))
        .map(|m| (m - m0).abs() / scale)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub initial_min: f64,
    pub initial_max: f64,
    pub observed_min: f64,
    pub observed_max: f64,
    pub holds: bool,
}

/// Exact check that every step stays within the range of the initial data
/// (widened by `extra`, for instance to include boundary values).
pub fn max_principle_check(traj: &Trajectory, extra: Option<(f64, f64)>) -> MaxPrincipleReport {
    let first = &traj.snapshots[0].values;
    let (mut lo, mut hi) = first
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if let Some((a, b)) = extra {
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let (mut omin, mut omax) = (lo, hi);
    for d in &traj.diagnostics {
        omin = omin.min(d.min);
        omax = omax.max(d.max);
    }
    for s in &traj.snapshots {
        for &v in &s.values {
            omin = omin.min(v);
            omax = omax.max(v);
        }
    }
    MaxPrincipleReport {
        initial_min: lo,
        initial_max: hi,
        observed_min: omin,
        observed_max: omax,
        holds: omin >= lo && omax <= hi,
    }
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_rate(errors: &[(f64, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a rate fit needs at least 3 levels, got {}",
            errors.len()
        )));
    }
    if errors.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::InvalidArgument("mesh sizes must be strictly decreasing".into()));
    }
    if errors.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidArgument("mesh sizes and errors must be positive".into()));
    }
    let n = errors.len() as f64;
    let xs: Vec<f64> = errors.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
