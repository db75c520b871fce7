//! Empirical Young measures and the measure-valued entropy residual.

use crate::boundary::{boundary_entropy_flux, NormalFlux};
use crate::error::{Error, Result};
use crate::flux::{sign, FluxField};
use crate::fv::Trajectory;
use crate::geometry::vec3::Vec3;

use super::entropy::{bump_quadrature, cell_divergence, TestFunction};

/// Collection radius `h^{1/2} / 2`.
pub fn default_radius_rule(h: f64) -> f64 {
    0.5 * h.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelMoments {
    pub h: f64,
    pub radius: f64,
    /// `(value, ω-weight)` of every cell within the radius.
    pub atoms: Vec<(f64, f64)>,
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalYoungMeasure {
    pub time: f64,
    pub point: Vec3,
    pub levels: Vec<LevelMoments>,
}

/// Collects `ω`-weighted cell values near `(time, point)` on each refinement
/// level, using the snapshot closest in time.
pub fn empirical_young_measure(
    runs: &[&Trajectory],
    time: f64,
    point: &Vec3,
    radius_rule: impl Fn(f64) -> f64,
) -> Result<EmpiricalYoungMeasure> {
    if runs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "Young measures need at least 3 refinement levels, got {}",
            runs.len()
        )));
    }
    let mut levels = Vec::with_capacity(runs.len());
    for run in runs {
        let h = run.mesh.h_max();
        let radius = radius_rule(h);
        let snap = run.snapshot_near(time);
        let atoms: Vec<(f64, f64)> = run
            .mesh
            .cells
            .iter()
            .filter(|c| run.mesh.topology.distance(&c.barycenter, point) <= radius)
            .map(|c| (snap.values[c.id], c.measure))
            .collect();
        if atoms.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no cells within radius {radius} of the sample point at h = {h}"
            )));
        }
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        let mean = atoms.iter().map(|a| a.0 * a.1).sum::<f64>() / mass;
        let variance = atoms.iter().map(|a| (a.0 - mean).powi(2) * a.1).sum::<f64>() / mass;
        levels.push(LevelMoments {
            h,
            radius,
            atoms,
            mass,
            mean,
            variance,
        });
    }
    Ok(EmpiricalYoungMeasure {
        time,
        point: *point,
        levels,
    })
}

/// A probability measure `(value, probability)` list for every snapshot and
/// cell of a reference trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungMeasureField {
    pub atoms: Vec<Vec<Vec<(f64, f64)>>>,
}

impl YoungMeasureField {
    /// `δ_{u_K^n}` everywhere.
    pub fn dirac(traj: &Trajectory) -> Self {
        YoungMeasureField {
            atoms: traj
                .snapshots
                .iter()
                .map(|s| s.values.iter().map(|&v| vec![(v, 1.0)]).collect())
                .collect(),
        }
    }

    /// Measures on the cells of `coarse` built from the values of `fine` at the
    /// nearest snapshot time, grouping each fine cell with its nearest coarse
    /// centre and weighting by `ω`-measure.
    pub fn harvest(coarse: &Trajectory, fine: &Trajectory) -> Result<Self> {
        if coarse.mesh.topology != fine.mesh.topology {
            return Err(Error::Mismatch("refinement runs live on different manifolds".into()));
        }
        let topo = coarse.mesh.topology;
        let owner: Vec<usize> = fine
            .mesh
            .cells
            .iter()
            .map(|f| {
                coarse
                    .mesh
                    .cells
                    .iter()
                    .min_by(|a, b| {
                        topo.distance(&a.barycenter, &f.barycenter)
                            .total_cmp(&topo.distance(&b.barycenter, &f.barycenter))
                    })
                    .map(|c| c.id)
                    .unwrap_or(0)
            })
            .collect();
        let mut mass = vec![0.0; coarse.mesh.n_cells()];
        for f in &fine.mesh.cells {
            mass[owner[f.id]] += f.measure;
        }
        let atoms = coarse
            .snapshots
            .iter()
            .map(|s| {
                let fs = fine.snapshot_near(s.time);
                let mut cells: Vec<Vec<(f64, f64)>> = vec![Vec::new(); coarse.mesh.n_cells()];
                for f in &fine.mesh.cells {
                    let k = owner[f.id];
                    cells[k].push((fs.values[f.id], f.measure / mass[k]));
                }
                cells
            })
            .collect();
        Ok(YoungMeasureField { atoms })
    }
}

/// One boundary quadrature point: `θ` there, its boundary measure, the
/// prescribed value `u_B`, the auxiliary value `b` and `g = ⟨N, f⟩`.
#[derive(Debug, Clone)]
pub struct BoundaryTerm {
    pub weight: f64,
    pub theta: f64,
    pub u_b: f64,
    pub b: f64,
    pub normal: NormalFlux,
}

/// Terms for the initial leaf, whose outward conormal is `−dt`, so that
/// `⟨N, (ū, f(ū))⟩ = −ū`; with `b = u_B = u₀` they reproduce `∫ U(u₀) φ(0) ω`.
pub fn initial_leaf_terms(traj: &Trajectory, test_fn: &TestFunction) -> Vec<BoundaryTerm> {
    let u0 = &traj.snapshots[0].values;
    let g = NormalFlux::new(|u| -u, |_| -1.0);
    traj.mesh
        .cells
        .iter()
        .filter_map(|c| {
            let theta = test_fn.value(0.0, &c.barycenter);
            (theta != 0.0).then(|| BoundaryTerm {
                weight: c.measure,
                theta,
                u_b: u0[c.id],
                b: u0[c.id],
                normal: g.clone(),
            })
        })
        .collect()
}

/// `∬ ⟨ν, U ∂_t θ + ⟨dθ, F⟩ + S θ⟩ ω dt − Σ_∂ E_N(u_B, b) θ` with the boundary
/// sum over outward conormals.
pub fn measure_valued_residual(
    traj: &Trajectory,
    young: &YoungMeasureField,
    k: f64,
    test_fn: &TestFunction,
    flux: &FluxField,
    boundary: &[BoundaryTerm],
) -> Result<f64> {
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let divergence = cell_divergence(&traj.mesh, flux);
    let quad = bump_quadrature(&traj.mesh, &times, flux, &divergence, test_fn)?;
    let hk = flux.law.value(k);
    let mut r = 0.0;
    for &(n, cell, w, dt_phi, grad_x, phi, div) in &quad.entries {
        let atoms = young
            .atoms
            .get(n)
            .and_then(|s| s.get(cell))
            .filter(|a| !a.is_empty())
            .ok_or_else(|| Error::InvalidArgument(format!("no Young measure at snapshot {n}, cell {cell}")))?;
        let mut avg = 0.0;
        for &(v, p) in atoms {
            let s = sign(v - k);
            avg += p * ((v - k).abs() * dt_phi + s * (flux.law.value(v) - hk) * grad_x - s * hk * div * phi);
        }
        r += w * avg;
    }
    for term in boundary {
        r -= term.weight * term.theta * boundary_entropy_flux(&term.normal, k, term.u_b, term.b);
    }
    Ok(r)
}
