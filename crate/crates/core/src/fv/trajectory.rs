use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Cell, Mesh};

/// Cell averages on a mesh at one time.
#[derive(Debug, Clone)]
pub struct State {
    pub mesh: Arc<Mesh>,
    pub time: f64,
    pub values: Vec<f64>,
}

impl State {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::Mismatch(format!(
                "{} values for {} cells",
                values.len(),
                mesh.n_cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite initial value in cell {i}")));
        }
        Ok(State {
            mesh,
            time: 0.0,
            values,
        })
    }

    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(&Cell) -> f64) -> Self {
        let values = mesh.cells.iter().map(f).collect();
        State {
            mesh,
            time: 0.0,
            values,
        }
    }

    /// `Σ_K |K|_ω u_K`.
    pub fn mass(&self) -> f64 {
        weighted_sum(&self.mesh, &self.values, |v| v)
    }

    /// `Σ_K |K|_ω |u_K|`.
    pub fn l1_norm(&self) -> f64 {
        weighted_sum(&self.mesh, &self.values, f64::abs)
    }

    pub fn range(&self) -> (f64, f64) {
        value_range(&self.values)
    }
}

pub(crate) fn weighted_sum(mesh: &Mesh, values: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    mesh.cells.iter().zip(values).map(|(c, &v)| c.measure * g(v)).sum()
}

pub(crate) fn value_range(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotSchedule {
    /// Output at these times (and always at the final time).
    Times(Vec<f64>),
    EveryStep,
}

impl SnapshotSchedule {
    /// Sorted output times in `(0, t_final]`, ending at `t_final`.
    pub fn targets(&self, t_final: f64) -> Vec<f64> {
        let mut out: Vec<f64> = match self {
            SnapshotSchedule::Times(ts) => ts.iter().copied().filter(|&t| t > 0.0 && t < t_final).collect(),
            SnapshotSchedule::EveryStep => Vec::new(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out.push(t_final);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
    /// Scale factor of the leaf (1 off the foliated setting).
    pub leaf_scale: f64,
    /// Total conserved quantity `a(t) Σ |K| v_K`.
    pub mass: f64,
    /// Net boundary inflow accumulated up to this time.
    pub boundary_inflow: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    /// Time after the step.
    pub time: f64,
    pub dt: f64,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    pub l1_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mesh: Arc<Mesh>,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        Trajectory {
            mesh,
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub(crate) fn push_snapshot(&mut self, time: f64, values: Vec<f64>, leaf_scale: f64, inflow: f64) {
        let mass = leaf_scale * weighted_sum(&self.mesh, &values, |v| v);
        self.snapshots.push(Snapshot {
            time,
            values,
            leaf_scale,
            mass,
            boundary_inflow: inflow,
        });
    }

    pub(crate) fn record_step(&mut self, step: usize, time: f64, dt: f64, values: &[f64], leaf_scale: f64) {
        let (min, max) = value_range(values);
        self.diagnostics.push(StepDiagnostics {
            step,
            time,
            dt,
            mass: leaf_scale * weighted_sum(&self.mesh, values, |v| v),
            min,
            max,
            l1_norm: leaf_scale * weighted_sum(&self.mesh, values, f64::abs),
        });
    }

    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectory has at least the initial snapshot")
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_near(&self, t: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
            .expect("trajectory has at least the initial snapshot")
    }

    pub fn time_steps(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.dt).collect()
    }
}
