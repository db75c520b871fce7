use std::sync::Arc;

use super::{build_circle_mesh, build_interval_mesh, Mesh, WeightRule};
use crate::error::{Error, Result};

/// Scale factor `a(t)` of the metric `g = −dt² + a(t)² dx²`.
#[derive(Clone)]
pub enum ScaleFactor {
    Constant(f64),
    /// `a0 + rate·t`
    Linear {
        a0: f64,
        rate: f64,
    },
    /// `a0·exp(rate·t)`
    Exponential {
        a0: f64,
        rate: f64,
    },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for ScaleFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScaleFactor::Constant(c) => write!(f, "Constant({c})"),
            ScaleFactor::Linear { a0, rate } => write!(f, "Linear({a0} + {rate} t)"),
            ScaleFactor::Exponential { a0, rate } => write!(f, "Exponential({a0} e^({rate} t))"),
            ScaleFactor::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl ScaleFactor {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScaleFactor::Constant(c) => *c,
            ScaleFactor::Linear { a0, rate } => a0 + rate * t,
            ScaleFactor::Exponential { a0, rate } => a0 * (rate * t).exp(),
            ScaleFactor::Custom(f) => f(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialTopology {
    Circle,
    Interval,
}

/// A (1+1)-dimensional spacetime `[0, T] × S` foliated by the space-like
/// leaves `H_t = {t} × S`, with metric `−dt² + a(t)² dx²`. The volume form is
/// `dv = a(t) dt dx` and each leaf carries the measure `a(t) dx`.
#[derive(Debug, Clone)]
pub struct FoliatedSpacetime {
    pub spatial: Arc<Mesh>,
    pub horizon: f64,
    pub scale: ScaleFactor,
    /// Smallest sampled value of `a` on `[0, T]`.
    pub scale_lower_bound: f64,
    pub topology: SpatialTopology,
}

impl FoliatedSpacetime {
    pub fn scale_at(&self, t: f64) -> f64 {
        self.scale.eval(t)
    }

    /// `∫_{H_t} a(t) dx`.
    pub fn leaf_volume(&self, t: f64) -> f64 {
        let chart: f64 = self.spatial.cells.iter().map(|c| c.chart_measure).sum();
        self.scale_at(t) * chart
    }

    /// Leaf measure of one spatial cell at time `t`.
    pub fn leaf_cell_measure(&self, cell: usize, t: f64) -> f64 {
        self.scale_at(t) * self.spatial.cells[cell].chart_measure
    }
}

const SCALE_SAMPLES: usize = 1000;

/// Builds the foliated strip over a circle or `[0, 1]` with `n_cells` cells.
/// On an interval the two time-like sides carry the `Left`/`Right` tags.
pub fn build_flrw_strip(
    n_cells: usize,
    horizon: f64,
    scale: ScaleFactor,
    topology: SpatialTopology,
) -> Result<FoliatedSpacetime> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let mut lower = f64::INFINITY;
    for i in 0..=SCALE_SAMPLES {
        let t = horizon * i as f64 / SCALE_SAMPLES as f64;
        let a = scale.eval(t);
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::NonPositiveScaleFactor { t, value: a });
        }
        lower = lower.min(a);
    }
    let unit = WeightRule::Uniform(1.0);
    let spatial = match topology {
        SpatialTopology::Circle => build_circle_mesh(n_cells, &unit)?,
        SpatialTopology::Interval => build_interval_mesh(n_cells, &unit)?,
    };
    Ok(FoliatedSpacetime {
        spatial: Arc::new(spatial),
        horizon,
        scale,
        scale_lower_bound: lower,
        topology,
    })
}
