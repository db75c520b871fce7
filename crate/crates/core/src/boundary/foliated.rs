use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::{make_product_flux, ScalarLaw, VectorField};
use crate::fv::{numerical_flux, SchemeConfig, Snapshot, SnapshotSchedule, StepDiagnostics, Trajectory};
use crate::geometry::{BoundaryTag, FaceNeighbor, FoliatedSpacetime, SpatialTopology};

use super::face_coefficient;

/// Spacetime flux `f(ū) = (f^t(ū), f^x(ū))` on a (1+1) strip. The law
/// `div_g f(u) = 0` for `g = −dt² + a(t)² dx²` reads
/// `∂_t(a f^t(u)) + ∂_x(a f^x(u)) = 0`.
#[derive(Debug, Clone)]
pub struct SpacetimeFlux {
    pub time: ScalarLaw,
    pub space: ScalarLaw,
}

impl SpacetimeFlux {
    /// `f = (ū, h(ū))`: the flat scalar law `∂_t u + ∂_x h(u) = 0`.
    pub fn flat(space: ScalarLaw) -> Self {
        SpacetimeFlux {
            time: ScalarLaw::Linear { slope: 1.0 },
            space,
        }
    }
}

#[derive(Clone)]
pub enum BoundaryValue {
    Constant(f64),
    TimeDependent(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for BoundaryValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryValue::Constant(c) => write!(f, "Constant({c})"),
            BoundaryValue::TimeDependent(_) => write!(f, "TimeDependent(..)"),
        }
    }
}

impl BoundaryValue {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            BoundaryValue::Constant(c) => *c,
            BoundaryValue::TimeDependent(f) => f(t),
        }
    }
}

/// Prescribed data `u_B`: cell values on the initial leaf and, on an
/// interval, values on the two time-like sides.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub initial: Vec<f64>,
    pub left: Option<BoundaryValue>,
    pub right: Option<BoundaryValue>,
    pub sup_bound: f64,
}

impl BoundaryData {
    pub fn new(
        initial: Vec<f64>,
        left: Option<BoundaryValue>,
        right: Option<BoundaryValue>,
        sup_bound: f64,
    ) -> Result<Self> {
        if !(sup_bound >= 0.0 && sup_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sup bound must be finite, got {sup_bound}"
            )));
        }
        if let Some((i, v)) = initial
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > sup_bound)
        {
            return Err(Error::InvalidArgument(format!(
                "initial value {v} in cell {i} exceeds the sup bound {sup_bound}"
            )));
        }
        let data = BoundaryData {
            initial,
            left,
            right,
            sup_bound,
        };
        for tag in [BoundaryTag::Left, BoundaryTag::Right] {
            if data.side(tag).is_some() {
                data.value(tag, 0.0)?;
            }
        }
        Ok(data)
    }

    pub fn side(&self, tag: BoundaryTag) -> Option<&BoundaryValue> {
        match tag {
            BoundaryTag::Left => self.left.as_ref(),
            BoundaryTag::Right => self.right.as_ref(),
        }
    }

    /// `u_B` on a time-like side at time `t`, checked against the sup bound.
    pub fn value(&self, tag: BoundaryTag, t: f64) -> Result<f64> {
        let side = self
            .side(tag)
            .ok_or_else(|| Error::InvalidArgument(format!("no boundary data on the {tag:?} side")))?;
        let v = side.at(t);
        if !v.is_finite() || v.abs() > self.sup_bound * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "boundary value {v} on the {tag:?} side at t = {t} exceeds the sup bound {}",
                self.sup_bound
            )));
        }
        Ok(v)
    }

    /// `‖u_B − v_B‖` over the boundary up to time `t`: the initial leaf
    /// (measure `a(0) dx`) plus `∫_0^t |u_B − v_B| ds` on each time-like side.
    pub fn l1_distance(&self, other: &BoundaryData, spacetime: &FoliatedSpacetime, t: f64) -> f64 {
        let a0 = spacetime.scale_at(0.0);
        let initial: f64 = spacetime
            .spatial
            .cells
            .iter()
            .map(|c| a0 * c.chart_measure * (self.initial[c.id] - other.initial[c.id]).abs())
            .sum();
        let mut sides = 0.0;
        for tag in [BoundaryTag::Left, BoundaryTag::Right] {
            let (Some(p), Some(q)) = (self.side(tag), other.side(tag)) else {
                continue;
            };
            sides += match (p, q) {
                (BoundaryValue::Constant(a), BoundaryValue::Constant(b)) => t * (a - b).abs(),
                _ => {
                    const PANELS: usize = 512;
                    let dt = t / PANELS as f64;
                    (0..=PANELS)
                        .map(|i| {
                            let s = i as f64 * dt;
                            let w = if i == 0 || i == PANELS { 0.5 } else { 1.0 };
                            w * (p.at(s) - q.at(s)).abs()
                        })
                        .sum::<f64>()
                        * dt
                }
            };
        }
        initial + sides
    }
}

const TIMELIKE_SAMPLES: usize = 257;

fn check_time_like(flux: &SpacetimeFlux, bound: f64) -> Result<()> {
    for i in 0..TIMELIKE_SAMPLES {
        let u = -bound + 2.0 * bound * i as f64 / (TIMELIKE_SAMPLES - 1) as f64;
        let rate = flux.time.derivative(u);
        if !(rate > 0.0) {
            return Err(Error::NotTimeLike {
                u,
                x: 0.0,
                t: 0.0,
                rate,
            });
        }
    }
    Ok(())
}

fn min_derivative(law: &ScalarLaw, lo: f64, hi: f64) -> f64 {
    match law {
        ScalarLaw::Linear { slope } => *slope,
        _ => (0..=64)
            .map(|i| law.derivative(lo + (hi - lo) * i as f64 / 64.0))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Evolves the leafwise balance `∂_t(a f^t(u)) + ∂_x(a f^x(u)) = 0` on the
/// strip, starting from `u_B` on the initial leaf. The time-like sides of an
/// interval strip take ghost-state Riemann fluxes against `u_B`.
///
/// With `v = f^t(u)`, one step reads
/// `a_{n+1} v_K^{n+1} = a_n (v_K^n − (Δt/|K|) Σ_e q_{K,e}(u^n))`.
pub fn evolve_foliated(
    spacetime: &FoliatedSpacetime,
    flux: &SpacetimeFlux,
    data: &BoundaryData,
    scheme: &SchemeConfig,
    schedule: &SnapshotSchedule,
) -> Result<Trajectory> {
    let mesh = spacetime.spatial.clone();
    scheme.validate(1, &flux.space)?;
    if data.initial.len() != mesh.n_cells() {
        return Err(Error::Mismatch(format!(
            "{} initial values for {} cells",
            data.initial.len(),
            mesh.n_cells()
        )));
    }
    if spacetime.topology == SpatialTopology::Interval {
        for tag in [BoundaryTag::Left, BoundaryTag::Right] {
            if data.side(tag).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "missing boundary data on the {tag:?} side"
                )));
            }
        }
        if !flux.space.supports_exact_riemann() {
            return Err(Error::UnsupportedFlux(
                "boundary fluxes need a convex or concave law".into(),
            ));
        }
    }
    check_time_like(flux, data.sup_bound)?;

    let space_flux = make_product_flux(flux.space.clone(), VectorField::Constant([1.0, 0.0, 0.0]));
    let phi: Vec<f64> = (0..mesh.n_faces())
        .map(|f| face_coefficient(&mesh, &space_flux, f))
        .collect();
    let phi_abs: Vec<f64> = phi.iter().map(|p| p.abs()).collect();

    let horizon = spacetime.horizon;
    let targets = schedule.targets(horizon);
    let mut u = data.initial.clone();
    let mut traj = Trajectory::new(mesh.clone());
    let leaf_mass = |a: f64, u: &[f64]| -> f64 {
        a * mesh
            .cells
            .iter()
            .map(|c| c.measure * flux.time.value(u[c.id]))
            .sum::<f64>()
    };
    let a0 = spacetime.scale_at(0.0);
    traj.snapshots.push(Snapshot {
        time: 0.0,
        values: u.clone(),
        leaf_scale: a0,
        mass: leaf_mass(a0, &u),
        boundary_inflow: 0.0,
    });

    let mut t = 0.0;
    let mut inflow = 0.0;
    let mut step_index = 0;
    let mut target_idx = 0;
    while target_idx < targets.len() {
        let next = targets[target_idx];
        let cap = next - t;

        let ghosts: Vec<Option<f64>> = mesh
            .faces
            .iter()
            .map(|f| match f.neighbor {
                FaceNeighbor::Boundary(tag) => data.value(tag, t).map(Some),
                FaceNeighbor::Cell(_) => Ok(None),
            })
            .collect::<Result<_>>()?;
        let (mut lo, mut hi) = u
            .iter()
            .chain(ghosts.iter().flatten())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if let Some((a, b)) = scheme.speed_range {
            lo = lo.min(a.min(b));
            hi = hi.max(a.max(b));
        }
        let speed = flux.space.max_speed(lo, hi) / min_derivative(&flux.time, lo, hi);
        let mut dt = f64::INFINITY;
        for cell in &mesh.cells {
            let rate: f64 = cell.faces.iter().map(|&(fid, _)| speed * phi_abs[fid]).sum();
            if rate > 0.0 {
                dt = dt.min(2.0 * cell.measure / rate);
            }
        }
        dt = (scheme.cfl * dt).min(cap);
        let lands = dt >= cap * (1.0 - 1e-12);
        if lands {
            dt = cap;
        }

        let a_now = spacetime.scale_at(t);
        let t_new = if lands { next } else { t + dt };
        let a_next = spacetime.scale_at(t_new);
        if !(a_next > 0.0 && a_next.is_finite()) {
            return Err(Error::NonPositiveScaleFactor {
                t: t_new,
                value: a_next,
            });
        }

        let mut acc = vec![0.0; u.len()];
        for f in &mesh.faces {
            match f.neighbor {
                FaceNeighbor::Cell(nb) => {
                    let q = numerical_flux(
                        scheme.numerical_flux,
                        &flux.space,
                        phi[f.id],
                        phi_abs[f.id],
                        u[f.owner],
                        u[nb],
                    );
                    acc[f.owner] += q;
                    acc[nb] -= q;
                }
                FaceNeighbor::Boundary(_) => {
                    let q = flux.space.godunov(phi[f.id], u[f.owner], ghosts[f.id].unwrap());
                    acc[f.owner] += q;
                    inflow -= dt * a_now * q;
                }
            }
        }
        let ratio = a_now / a_next;
        let (old_lo, old_hi) = (lo, hi);
        let mut next_u = Vec::with_capacity(u.len());
        for c in &mesh.cells {
            let v = flux.time.value(u[c.id]);
            let v_new = ratio * (v - dt / c.measure * acc[c.id]);
            let u_new = flux.time.invert_increasing(v_new, old_lo, old_hi);
            if !u_new.is_finite() {
                return Err(Error::SolverAbort {
                    step: step_index,
                    cell: c.id,
                });
            }
            next_u.push(u_new);
        }
        u = next_u;
        t = t_new;

        let (min, max) = u
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let mass = leaf_mass(a_next, &u);
        traj.diagnostics.push(StepDiagnostics {
            step: step_index,
            time: t,
            dt,
            mass,
            min,
            max,
            l1_norm: a_next * mesh.cells.iter().map(|c| c.measure * u[c.id].abs()).sum::<f64>(),
        });
        step_index += 1;
        if lands || matches!(schedule, SnapshotSchedule::EveryStep) {
            traj.snapshots.push(Snapshot {
                time: t,
                values: u.clone(),
                leaf_scale: a_next,
                mass,
                boundary_inflow: inflow,
            });
        }
        if lands {
            target_idx += 1;
        }
    }
    Ok(traj)
}

/// Running maximum over output times `t ≤ T` of
/// `‖u(t) − v(t)‖_{L¹(H_t)} / ‖u_B − v_B‖_{L¹(∂M ∩ [0,t])}`, for two runs with
/// the same snapshot times. Times with identical data up to `t` are skipped.
pub fn stability_constants(
    spacetime: &FoliatedSpacetime,
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    data_u: &BoundaryData,
    data_v: &BoundaryData,
) -> Result<Vec<(f64, f64)>> {
    if traj_u.snapshots.len() != traj_v.snapshots.len() {
        return Err(Error::Mismatch("trajectories have different snapshot counts".into()));
    }
    let mut running: f64 = 0.0;
    let mut out = Vec::new();
    for (a, b) in traj_u.snapshots.iter().zip(&traj_v.snapshots) {
        if a.time != b.time {
            return Err(Error::Mismatch(format!(
                "snapshot times {} and {} differ",
                a.time, b.time
            )));
        }
        if a.time == 0.0 {
            continue;
        }
        let dist: f64 = spacetime
            .spatial
            .cells
            .iter()
            .map(|c| a.leaf_scale * c.chart_measure * (a.values[c.id] - b.values[c.id]).abs())
            .sum();
        let bdist = data_u.l1_distance(data_v, spacetime, a.time);
        if bdist > 0.0 {
            running = running.max(dist / bdist);
            out.push((a.time, running));
        }
    }
    Ok(out)
}
