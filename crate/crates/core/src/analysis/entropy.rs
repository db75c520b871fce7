//! Discrete evaluation of the weak Kruzkov entropy inequality
//!
//! ```text
//! R = ∫∫ (U(u) ∂_t φ + ⟨dφ, F(u)⟩ + S(u) φ) ω dt + ∫ U(u₀) φ(0) ω ≥ 0,
//! S(ū) = (div_ω F)(ū) − ∂_u U(ū) (div_ω f)(ū) = −sgn(ū − k) h(k) div_ω X,
//! ```
//!
//! by midpoint quadrature in space and the trapezoid rule over snapshots.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flux::{sign, FluxField, SamplePoint};
use crate::fv::{FaceCoefficients, Trajectory};
use crate::geometry::vec3::{self, Vec3};
use crate::geometry::{periodic_delta, Mesh, Topology};

/// `(1 − r²)³` bump in space times a `(1 − s²)³` bump in time.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: usize,
    pub center_cell: usize,
    pub center: Vec3,
    /// Support radius in the manifold's own distance.
    pub radius: f64,
    pub time_center: f64,
    pub time_radius: f64,
    pub topology: Topology,
}

impl TestFunction {
    pub fn new(
        mesh: &Mesh,
        id: usize,
        center_cell: usize,
        radius: f64,
        time_center: f64,
        time_radius: f64,
    ) -> Result<Self> {
        let cell = mesh.cells.get(center_cell).ok_or(Error::UnknownId {
            kind: "cell",
            id: center_cell,
        })?;
        let max_radius = match mesh.topology {
            Topology::Sphere => std::f64::consts::PI - 1e-6,
            _ => 0.5,
        };
        if !(radius > 0.0 && radius <= max_radius) {
            return Err(Error::InvalidArgument(format!(
                "test function radius {radius} outside (0, {max_radius}]"
            )));
        }
        if !(time_radius > 0.0 && time_center.is_finite()) {
            return Err(Error::InvalidArgument(
                "test function needs a positive time radius".into(),
            ));
        }
        Ok(TestFunction {
            id,
            center_cell,
            center: cell.barycenter,
            radius,
            time_center,
            time_radius,
            topology: mesh.topology,
        })
    }

    pub fn time_support(&self) -> (f64, f64) {
        (self.time_center - self.time_radius, self.time_center + self.time_radius)
    }

    /// Spatial factor and its gradient (ambient coordinates, tangent on the sphere).
    fn spatial(&self, x: &Vec3) -> (f64, Vec3) {
        let rho2 = self.radius * self.radius;
        let (r2, grad_r2) = match self.topology {
            Topology::Sphere => {
                let theta = vec3::angle(&self.center, x);
                let ratio = if theta < 1e-8 { 1.0 } else { theta / theta.sin() };
                let tangential = vec3::sub(&self.center, &vec3::scale(x, vec3::dot(&self.center, x)));
                (theta * theta / rho2, vec3::scale(&tangential, -2.0 * ratio / rho2))
            }
            topo => {
                let d0 = x[0] - self.center[0];
                let d1 = x[1] - self.center[1];
                let delta = match topo {
                    Topology::Circle => [periodic_delta(d0), 0.0, 0.0],
                    Topology::Torus => [periodic_delta(d0), periodic_delta(d1), 0.0],
                    _ => [d0, 0.0, 0.0],
                };
                (vec3::dot(&delta, &delta) / rho2, vec3::scale(&delta, 2.0 / rho2))
            }
        };
        let s = 1.0 - r2;
        if s <= 0.0 {
            return (0.0, [0.0; 3]);
        }
        (s * s * s, vec3::scale(&grad_r2, -3.0 * s * s))
    }

    fn temporal(&self, t: f64) -> (f64, f64) {
        let r = (t - self.time_center) / self.time_radius;
        let s = 1.0 - r * r;
        if s <= 0.0 {
            return (0.0, 0.0);
        }
        (s * s * s, -6.0 * s * s * r / self.time_radius)
    }

    pub fn value(&self, t: f64, x: &Vec3) -> f64 {
        self.spatial(x).0 * self.temporal(t).0
    }

    pub fn time_derivative(&self, t: f64, x: &Vec3) -> f64 {
        self.spatial(x).0 * self.temporal(t).1
    }

    pub fn gradient(&self, t: f64, x: &Vec3) -> Vec3 {
        vec3::scale(&self.spatial(x).1, self.temporal(t).0)
    }
}

fn nearest_cell(mesh: &Mesh, p: &Vec3) -> usize {
    mesh.cells
        .iter()
        .min_by(|a, b| {
            mesh.topology
                .distance(&a.barycenter, p)
                .total_cmp(&mesh.topology.distance(&b.barycenter, p))
        })
        .map(|c| c.id)
        .unwrap_or(0)
}

/// 3 spatial centres × 3 radii × 3 time placements, plus one bump whose
/// support reaches `t = 0` so that the initial-data term is exercised.
pub fn standard_battery(mesh: &Mesh, t_final: f64) -> Result<Vec<TestFunction>> {
    let (centers, radii): (Vec<Vec3>, [f64; 3]) = match mesh.topology {
        Topology::Sphere => (
            vec![
                vec3::normalize(&[0.2, 0.1, 1.0]),
                [1.0, 0.0, 0.0],
                vec3::normalize(&[-0.5, 0.5, -0.7]),
            ],
            [0.3, 0.5, 0.8],
        ),
        Topology::Torus => (
            vec![[0.25, 0.25, 0.0], [0.5, 0.75, 0.0], [0.8, 0.4, 0.0]],
            [0.1, 0.2, 0.3],
        ),
        _ => (vec![[0.2, 0.0, 0.0], [0.5, 0.0, 0.0], [0.8, 0.0, 0.0]], [0.1, 0.2, 0.3]),
    };
    let quarter = 0.25 * t_final;
    let mut out = Vec::with_capacity(28);
    for c in &centers {
        let cell = nearest_cell(mesh, c);
        for &r in &radii {
            for tc in [quarter, 2.0 * quarter, 3.0 * quarter] {
                out.push(TestFunction::new(mesh, out.len(), cell, r, tc, quarter)?);
            }
        }
    }
    let cell = nearest_cell(mesh, &centers[1]);
    out.push(TestFunction::new(mesh, out.len(), cell, radii[1], 0.0, 0.5 * t_final)?);
    Ok(out)
}

/// `n` evenly spaced Kruzkov indices spanning `[lo, hi]` widened by 10%.
pub fn kruzkov_indices(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let pad = 0.1 * (hi - lo).abs().max(1e-3);
    let (a, b) = (lo.min(hi) - pad, lo.max(hi) + pad);
    let n = n.max(2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Constant in `tol_entropy(h) = C h^{1/2}`: ten times the worst `|R| / h^{1/2}`
/// of Godunov linear advection of `0.5 + sin 2πx` on the circle (`n = 50`,
/// `T = 1`), rounded up.
pub const ENTROPY_TOL_CONSTANT: f64 = 0.13;

pub fn tol_entropy(h: f64, scale: f64) -> f64 {
    ENTROPY_TOL_CONSTANT * scale * h.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResidualReport {
    pub k: f64,
    pub test_fn: usize,
    pub residual: f64,
    pub h: f64,
    pub snapshots: usize,
    pub tolerance: f64,
    /// `residual < −tolerance`.
    pub violated: bool,
}

/// Precomputed quadrature of one test function against a trajectory.
pub(crate) struct BumpQuadrature {
    /// (snapshot, cell, `w_n |K|`, `∂_t φ`, `⟨dφ, X⟩`, `φ`, `div_ω X`)
    pub entries: Vec<(usize, usize, f64, f64, f64, f64, f64)>,
    /// (cell, `|K| φ(0, x_K)`)
    pub initial: Vec<(usize, f64)>,
}

pub(crate) fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { times[i] - times[i - 1] } else { 0.0 };
            let right = if i + 1 < n { times[i + 1] - times[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

pub(crate) fn cell_divergence(mesh: &Mesh, flux: &FluxField) -> Vec<f64> {
    match &flux.divergence {
        Some(d) => mesh
            .cells
            .iter()
            .map(|c| {
                d(&SamplePoint {
                    x: c.barycenter,
                    omega: mesh.volume_form.weights[c.id],
                })
            })
            .collect(),
        None => {
            let coeffs = FaceCoefficients::new(mesh, flux);
            mesh.cells
                .iter()
                .map(|c| coeffs.cell_defect[c.id] / c.measure)
                .collect()
        }
    }
}

pub(crate) fn bump_quadrature(
    mesh: &Mesh,
    times: &[f64],
    flux: &FluxField,
    divergence: &[f64],
    phi: &TestFunction,
) -> Result<BumpQuadrature> {
    let (t_lo, t_hi) = phi.time_support();
    let t_end = *times.last().unwrap_or(&0.0);
    if t_hi > t_end * (1.0 + 1e-12) + 1e-14 || t_lo < -phi.time_radius {
        return Err(Error::InvalidArgument(format!(
            "test function {} is supported on [{t_lo}, {t_hi}], beyond the trajectory [0, {t_end}]",
            phi.id
        )));
    }
    let weights = trapezoid_weights(times);
    let mut spatial = Vec::new();
    for c in &mesh.cells {
        let (value, grad) = phi.spatial(&c.barycenter);
        if value == 0.0 && grad == [0.0; 3] {
            continue;
        }
        let x = flux.field.eval(&SamplePoint {
            x: c.barycenter,
            omega: mesh.volume_form.weights[c.id],
        });
        spatial.push((c.id, c.measure, value, vec3::dot(&grad, &x)));
    }
    let mut entries = Vec::new();
    for (n, &t) in times.iter().enumerate() {
        let (tv, td) = phi.temporal(t);
        if tv == 0.0 && td == 0.0 {
            continue;
        }
        for &(cell, measure, sv, gx) in &spatial {
            entries.push((
                n,
                cell,
                weights[n] * measure,
                sv * td,
                gx * tv,
                sv * tv,
                divergence[cell],
            ));
        }
    }
    let (t0, _) = phi.temporal(times.first().copied().unwrap_or(0.0));
    let initial = if t0 == 0.0 {
        Vec::new()
    } else {
        spatial
            .iter()
            .map(|&(cell, measure, sv, _)| (cell, measure * sv * t0))
            .collect()
    };
    Ok(BumpQuadrature { entries, initial })
}

fn residual_from(quad: &BumpQuadrature, traj: &Trajectory, flux: &FluxField, k: f64) -> f64 {
    let hk = flux.law.value(k);
    let mut r = 0.0;
    for &(n, cell, w, dt_phi, grad_x, phi, div) in &quad.entries {
        let u = traj.snapshots[n].values[cell];
        let s = sign(u - k);
        let entropy_flux = s * (flux.law.value(u) - hk);
        r += w * ((u - k).abs() * dt_phi + entropy_flux * grad_x - s * hk * div * phi);
    }
    let u0 = &traj.snapshots[0].values;
    for &(cell, w) in &quad.initial {
        r += w * (u0[cell] - k).abs();
    }
    r
}

fn snapshot_times(traj: &Trajectory) -> Vec<f64> {
    traj.snapshots.iter().map(|s| s.time).collect()
}

/// Left-hand side of the weak Kruzkov inequality for index `k`, reported raw.
pub fn entropy_residual(
    traj: &Trajectory,
    flux: &FluxField,
    k: f64,
    test_fn: &TestFunction,
    tolerance: f64,
) -> Result<EntropyResidualReport> {
    let divergence = cell_divergence(&traj.mesh, flux);
    let quad = bump_quadrature(&traj.mesh, &snapshot_times(traj), flux, &divergence, test_fn)?;
    let residual = residual_from(&quad, traj, flux, k);
    Ok(EntropyResidualReport {
        k,
        test_fn: test_fn.id,
        residual,
        h: traj.mesh.h_max(),
        snapshots: traj.snapshots.len(),
        tolerance,
        violated: residual < -tolerance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyBattery {
    pub reports: Vec<EntropyResidualReport>,
    pub worst: f64,
    pub worst_k: f64,
    pub worst_test_fn: usize,
    pub violations: usize,
    pub tolerance: f64,
}

/// Every index against every test function, evaluated in parallel over test
/// functions and merged in index order.
pub fn entropy_battery(
    traj: &Trajectory,
    flux: &FluxField,
    ks: &[f64],
    battery: &[TestFunction],
    tolerance: f64,
) -> Result<EntropyBattery> {
    let divergence = cell_divergence(&traj.mesh, flux);
    let times = snapshot_times(traj);
    let h = traj.mesh.h_max();
    let per_fn: Vec<Vec<EntropyResidualReport>> = battery
        .par_iter()
        .map(|phi| -> Result<Vec<EntropyResidualReport>> {
            let quad = bump_quadrature(&traj.mesh, &times, flux, &divergence, phi)?;
            Ok(ks
                .iter()
                .map(|&k| {
                    let residual = residual_from(&quad, traj, flux, k);
                    EntropyResidualReport {
                        k,
                        test_fn: phi.id,
                        residual,
                        h,
                        snapshots: times.len(),
                        tolerance,
                        violated: residual < -tolerance,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let reports: Vec<EntropyResidualReport> = per_fn.into_iter().flatten().collect();
    let worst = reports
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .ok_or_else(|| Error::InvalidArgument("empty entropy battery".into()))?;
    Ok(EntropyBattery {
        worst: worst.residual,
        worst_k: worst.k,
        worst_test_fn: worst.test_fn,
        violations: reports.iter().filter(|r| r.violated).count(),
        tolerance,
        reports,
    })
}

/// A stationary Burgers expansion shock (`−1` left of `x = 1/2`, `+1` right of
/// it) on a circle mesh, recorded at `steps + 1` uniform times. It is a weak
/// solution but violates the entropy condition at `x = 1/2`.
pub fn expansion_shock_trajectory(mesh: std::sync::Arc<Mesh>, t_final: f64, steps: usize) -> Trajectory {
    let values: Vec<f64> = mesh
        .cells
        .iter()
        .map(|c| if c.barycenter[0] < 0.5 { -1.0 } else { 1.0 })
        .collect();
    let mut traj = Trajectory::new(mesh);
    for i in 0..=steps.max(1) {
        let t = t_final * i as f64 / steps.max(1) as f64;
        traj.push_snapshot(t, values.clone(), 1.0, 0.0);
    }
    traj
}
