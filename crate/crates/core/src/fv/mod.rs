//! Explicit first-order monotone finite volume scheme.
//!
//! The update is
//!
//! ```text
//! u_K^{n+1} = u_K^n − (Δt/|K|_ω) Σ_{e∈∂K} q_{K,e}(u_K, u_L) + Δt s_K
//! ```
//!
//! with a two-point monotone flux `q` consistent with the face-integrated
//! normal flux `φ_e(ū) = Σ_q w_q ⟨N, f(ū, x_q)⟩ ω̄(x_q)`, and a per-cell term
//! `s_K` that handles the discrete divergence of the flux at fixed `ū`.

mod trajectory;

use std::sync::Arc;

pub use trajectory::{Snapshot, SnapshotSchedule, State, StepDiagnostics, Trajectory};

use crate::error::{Error, Result};
use crate::flux::{FluxField, SamplePoint, ScalarLaw};
use crate::geometry::vec3;
use crate::geometry::{FaceNeighbor, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericalFluxKind {
    /// Local Lax–Friedrichs (Rusanov).
    LaxFriedrichs,
    /// Exact scalar Riemann flux, 1D meshes only.
    Godunov1d,
}

/// How the discrete divergence of `f(ū, ·)` is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompatibilityMode {
    /// Subtract each cell's constant-state defect so that constants are
    /// stationary: the discrete form of `div_ω f(ū) = 0`.
    Corrected,
    /// Keep the raw fluxes; when the analytic `div_ω X` is known, replace the
    /// discrete divergence at fixed `ū` by the analytic one as a source.
    SourceTerm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub numerical_flux: NumericalFluxKind,
    pub cfl: f64,
    pub mode: CompatibilityMode,
    /// Extra range included when bounding wave speeds for the time step.
    pub speed_range: Option<(f64, f64)>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            numerical_flux: NumericalFluxKind::LaxFriedrichs,
            cfl: 0.9,
            mode: CompatibilityMode::Corrected,
            speed_range: None,
        }
    }
}

impl SchemeConfig {
    pub fn new(numerical_flux: NumericalFluxKind, cfl: f64, mode: CompatibilityMode) -> Self {
        SchemeConfig {
            numerical_flux,
            cfl,
            mode,
            speed_range: None,
        }
    }

    pub fn validate(&self, dimension: usize, law: &ScalarLaw) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "CFL number {} outside (0, 1]",
                self.cfl
            )));
        }
        if self.numerical_flux == NumericalFluxKind::Godunov1d {
            if dimension != 1 {
                return Err(Error::InvalidArgument("godunov-1d requires a 1D mesh".into()));
            }
            if !law.supports_exact_riemann() {
                return Err(Error::UnsupportedFlux(
                    "godunov-1d needs a convex or concave scalar law".into(),
                ));
            }
        }
        Ok(())
    }
}

/// `φ_e(ū)` oriented outward from the owner of `face`, by face quadrature.
pub fn face_flux(mesh: &Mesh, flux: &FluxField, face: usize, u: f64) -> f64 {
    mesh.faces[face]
        .nodes
        .iter()
        .map(|q| {
            let p = SamplePoint {
                x: q.point,
                omega: q.omega,
            };
            q.weight * vec3::dot(&q.normal, &flux.eval(u, &p)) * q.omega
        })
        .sum()
}

/// `φ_e(ū)` oriented outward from `cell`; antisymmetric under owner swap.
pub fn face_flux_from(mesh: &Mesh, flux: &FluxField, face: usize, cell: usize, u: f64) -> Result<f64> {
    let f = mesh
        .faces
        .get(face)
        .ok_or(Error::UnknownId { kind: "face", id: face })?;
    if f.owner == cell {
        Ok(face_flux(mesh, flux, face, u))
    } else if f.neighbor == FaceNeighbor::Cell(cell) {
        Ok(-face_flux(mesh, flux, face, u))
    } else {
        Err(Error::InvalidArgument(format!(
            "cell {cell} is not adjacent to face {face}"
        )))
    }
}

/// Face integrals of the vector factor `X`, so that `φ_e(ū) = h(ū) Φ_e`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceCoefficients {
    /// `Φ_e = Σ_q w_q ⟨N, X(x_q)⟩ ω̄(x_q)`, owner-outward.
    pub normal_flux: Vec<f64>,
    /// `Σ_q w_q |⟨N, X(x_q)⟩| ω̄(x_q)`.
    pub normal_flux_abs: Vec<f64>,
    /// `Σ_{e∈∂K} ±Φ_e`: the constant-state defect per unit `h(ū)`.
    pub cell_defect: Vec<f64>,
    /// Analytic `div_ω X` at cell barycentres, when known.
    pub analytic_divergence: Option<Vec<f64>>,
}

impl FaceCoefficients {
    pub fn new(mesh: &Mesh, flux: &FluxField) -> Self {
        let mut normal_flux = Vec::with_capacity(mesh.n_faces());
        let mut normal_flux_abs = Vec::with_capacity(mesh.n_faces());
        for f in &mesh.faces {
            let (mut s, mut a) = (0.0, 0.0);
            for q in &f.nodes {
                let p = SamplePoint {
                    x: q.point,
                    omega: q.omega,
                };
                let xn = vec3::dot(&q.normal, &flux.field.eval(&p));
                s += q.weight * xn * q.omega;
                a += q.weight * xn.abs() * q.omega;
            }
            normal_flux.push(s);
            normal_flux_abs.push(a);
        }
        let cell_defect = mesh
            .cells
            .iter()
            .map(|c| c.faces.iter().map(|&(fid, s)| s * normal_flux[fid]).sum())
            .collect();
        let analytic_divergence = flux.divergence.as_ref().map(|d| {
            mesh.cells
                .iter()
                .map(|c| {
                    d(&SamplePoint {
                        x: c.barycenter,
                        omega: mesh.volume_form.weights[c.id],
                    })
                })
                .collect()
        });
        FaceCoefficients {
            normal_flux,
            normal_flux_abs,
            cell_defect,
            analytic_divergence,
        }
    }
}

/// Two-point flux through a face with `φ(ū) = phi·h(ū)`, from the owner
/// state `uk` to the neighbour state `ul`.
pub fn numerical_flux(kind: NumericalFluxKind, law: &ScalarLaw, phi: f64, phi_abs: f64, uk: f64, ul: f64) -> f64 {
    match kind {
        NumericalFluxKind::LaxFriedrichs => {
            let alpha = phi_abs * law.max_speed(uk, ul);
            0.5 * phi * (law.value(uk) + law.value(ul)) - 0.5 * alpha * (ul - uk)
        }
        NumericalFluxKind::Godunov1d => law.godunov(phi, uk, ul),
    }
}

/// Explicit monotone finite volume solver on a closed mesh.
#[derive(Debug, Clone)]
pub struct FvSolver {
    mesh: Arc<Mesh>,
    flux: FluxField,
    scheme: SchemeConfig,
    coeffs: FaceCoefficients,
}

impl FvSolver {
    pub fn new(mesh: Arc<Mesh>, flux: FluxField, scheme: SchemeConfig) -> Result<Self> {
        scheme.validate(mesh.dimension, &flux.law)?;
        if !mesh.is_closed() {
            return Err(Error::InvalidArgument(
                "the closed-manifold solver needs a mesh without boundary".into(),
            ));
        }
        let coeffs = FaceCoefficients::new(&mesh, &flux);
        Ok(FvSolver {
            mesh,
            flux,
            scheme,
            coeffs,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn flux(&self) -> &FluxField {
        &self.flux
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn coefficients(&self) -> &FaceCoefficients {
        &self.coeffs
    }

    /// `q_{K,e}(uk, ul)` with `K` the owner of `face`.
    pub fn numerical_flux(&self, face: usize, uk: f64, ul: f64) -> f64 {
        numerical_flux(
            self.scheme.numerical_flux,
            &self.flux.law,
            self.coeffs.normal_flux[face],
            self.coeffs.normal_flux_abs[face],
            uk,
            ul,
        )
    }

    fn uses_analytic_source(&self) -> bool {
        self.scheme.mode == CompatibilityMode::SourceTerm && self.coeffs.analytic_divergence.is_some()
    }

    /// `Δt = cfl · min_K 2|K|_ω / (Σ_e λ_e + δ_K)`, with `λ_e = L·Σ_q w_q|⟨N,X⟩|ω̄`,
    /// `L` the largest `|h'|` on the data range and `δ_K` the divergence
    /// defect rate. Returns `cap` when every wave speed vanishes.
    pub fn cfl_timestep(&self, values: &[f64], cap: f64) -> f64 {
        let (mut lo, mut hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if let Some((a, b)) = self.scheme.speed_range {
            lo = lo.min(a.min(b));
            hi = hi.max(a.max(b));
        }
        let speed = self.flux.law.max_speed(lo, hi);
        let mut dt = f64::INFINITY;
        for cell in &self.mesh.cells {
            let mut rate: f64 = cell
                .faces
                .iter()
                .map(|&(fid, _)| speed * self.coeffs.normal_flux_abs[fid])
                .sum();
            rate += speed * self.coeffs.cell_defect[cell.id].abs();
            if self.uses_analytic_source() {
                let div = self.coeffs.analytic_divergence.as_ref().unwrap()[cell.id];
                rate += speed * cell.measure * div.abs();
            }
            if rate > 0.0 {
                dt = dt.min(2.0 * cell.measure / rate);
            }
        }
        (self.scheme.cfl * dt).min(cap)
    }

    fn source(&self, cell: usize, u: f64) -> f64 {
        let measure = self.mesh.cells[cell].measure;
        match self.scheme.mode {
            CompatibilityMode::Corrected => self.flux.law.value(u) * self.coeffs.cell_defect[cell] / measure,
            CompatibilityMode::SourceTerm => match &self.coeffs.analytic_divergence {
                Some(div) => self.flux.law.value(u) * (self.coeffs.cell_defect[cell] / measure - div[cell]),
                None => 0.0,
            },
        }
    }

    /// Net outward flux `Σ_e q_{K,e}` of every cell, accumulated in face order.
    pub fn flux_balance(&self, values: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; values.len()];
        for f in &self.mesh.faces {
            if let FaceNeighbor::Cell(nb) = f.neighbor {
                let q = self.numerical_flux(f.id, values[f.owner], values[nb]);
                acc[f.owner] += q;
                acc[nb] -= q;
            }
        }
        acc
    }

    fn advance(&self, values: &[f64], dt: f64) -> Vec<f64> {
        let acc = self.flux_balance(values);
        let corrected = self.scheme.mode == CompatibilityMode::Corrected;
        self.mesh
            .cells
            .iter()
            .map(|c| {
                let u = values[c.id];
                let new = u - dt / c.measure * acc[c.id] + dt * self.source(c.id, u);
                if corrected {
                    self.snap_to_stencil(c.id, values, new)
                } else {
                    new
                }
            })
            .collect()
    }

    /// The corrected update is monotone and fixes constants, so its exact value
    /// lies in the range of the cell and its neighbours. Overshoots of a few
    /// ulps are rounding and are pulled back; anything larger is left alone.
    fn snap_to_stencil(&self, cell: usize, values: &[f64], new: f64) -> f64 {
        let (mut lo, mut hi) = (values[cell], values[cell]);
        for &(fid, _) in &self.mesh.cells[cell].faces {
            let f = &self.mesh.faces[fid];
            if let FaceNeighbor::Cell(nb) = f.neighbor {
                let other = if f.owner == cell { nb } else { f.owner };
                lo = lo.min(values[other]);
                hi = hi.max(values[other]);
            }
        }
        let slack = 16.0 * f64::EPSILON * lo.abs().max(hi.abs());
        if new < lo && new >= lo - slack {
            lo
        } else if new > hi && new <= hi + slack {
            hi
        } else {
            new
        }
    }

    /// One forward Euler step. `step_index` is only used in error reports.
    pub fn step(&self, state: &State, dt: f64, step_index: usize) -> Result<State> {
        if state.values.len() != self.mesh.n_cells() {
            return Err(Error::Mismatch("state length differs from cell count".into()));
        }
        let values = self.advance(&state.values, dt);
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::SolverAbort { step: step_index, cell });
        }
        Ok(State {
            mesh: state.mesh.clone(),
            time: state.time + dt,
            values,
        })
    }

    /// Evolves to `t_final`, landing exactly on every snapshot time.
    pub fn evolve(&self, state0: &State, t_final: f64, schedule: &SnapshotSchedule) -> Result<Trajectory> {
        let mut out = self.evolve_group(&[state0], t_final, schedule)?;
        Ok(out.pop().unwrap())
    }

    /// Evolves two initial states with one shared time-step sequence (the
    /// smaller admissible step of the two at every step).
    pub fn evolve_pair(
        &self,
        u0: &State,
        v0: &State,
        t_final: f64,
        schedule: &SnapshotSchedule,
    ) -> Result<(Trajectory, Trajectory)> {
        let mut out = self.evolve_group(&[u0, v0], t_final, schedule)?;
        let v = out.pop().unwrap();
        let u = out.pop().unwrap();
        Ok((u, v))
    }

    fn evolve_group(&self, initial: &[&State], t_final: f64, schedule: &SnapshotSchedule) -> Result<Vec<Trajectory>> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        for s in initial {
            if s.values.len() != self.mesh.n_cells() {
                return Err(Error::Mismatch("state length differs from cell count".into()));
            }
        }
        let targets = schedule.targets(t_final);
        let mut values: Vec<Vec<f64>> = initial.iter().map(|s| s.values.clone()).collect();
        let mut trajs: Vec<Trajectory> = values
            .iter()
            .map(|v| {
                let mut tr = Trajectory::new(self.mesh.clone());
                tr.push_snapshot(0.0, v.clone(), 1.0, 0.0);
                tr
            })
            .collect();
        let mut t = 0.0;
        let mut step_index = 0;
        let mut target_idx = 0;
        while target_idx < targets.len() {
            let next = targets[target_idx];
            let cap = next - t;
            let mut dt = values
                .iter()
                .map(|v| self.cfl_timestep(v, cap))
                .fold(f64::INFINITY, f64::min);
            let lands = dt >= cap * (1.0 - 1e-12);
            if lands {
                dt = cap;
            }
            for (v, tr) in values.iter_mut().zip(trajs.iter_mut()) {
                let new = self.advance(v, dt);
                if let Some(cell) = new.iter().position(|x| !x.is_finite()) {
                    return Err(Error::SolverAbort { step: step_index, cell });
                }
                *v = new;
                let t_new = if lands { next } else { t + dt };
                tr.record_step(step_index, t_new, dt, v, 1.0);
            }
            t = if lands { next } else { t + dt };
            step_index += 1;
            let snap = lands || matches!(schedule, SnapshotSchedule::EveryStep);
            if snap {
                for (v, tr) in values.iter().zip(trajs.iter_mut()) {
                    tr.push_snapshot(t, v.clone(), 1.0, 0.0);
                }
            }
            if lands {
                target_idx += 1;
            }
        }
        Ok(trajs)
    }
}
