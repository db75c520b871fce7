//! JSON run configuration. Unknown keys are rejected and every semantic
//! problem is collected before anything is computed.

use std::path::Path;

use manifold_fv::geometry::MAX_SPHERE_LEVEL;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub geometry: GeometrySpec,
    pub flux: FluxSpec,
    pub initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub scheme: SchemeSpec,
    pub t_final: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometrySpec {
    Circle {
        n: usize,
        #[serde(default)]
        weight: WeightSpec,
    },
    Torus {
        nx: usize,
        ny: usize,
        #[serde(default)]
        weight: WeightSpec,
    },
    Sphere {
        level: u32,
    },
    Strip {
        n: usize,
        #[serde(default)]
        topology: StripTopology,
        #[serde(default)]
        scale: ScaleSpec,
    },
}

impl GeometrySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeometrySpec::Circle { .. } => "circle",
            GeometrySpec::Torus { .. } => "torus",
            GeometrySpec::Sphere { .. } => "sphere",
            GeometrySpec::Strip { .. } => "strip",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            GeometrySpec::Circle { .. } | GeometrySpec::Strip { .. } => 1,
            _ => 2,
        }
    }

    /// The same geometry refined `steps` times (cells doubled per direction,
    /// or one more sphere subdivision).
    pub fn refined(&self, steps: u32) -> GeometrySpec {
        let f = 1usize << steps;
        match self.clone() {
            GeometrySpec::Circle { n, weight } => GeometrySpec::Circle { n: n * f, weight },
            GeometrySpec::Torus { nx, ny, weight } => GeometrySpec::Torus {
                nx: nx * f,
                ny: ny * f,
                weight,
            },
            GeometrySpec::Sphere { level } => GeometrySpec::Sphere { level: level + steps },
            GeometrySpec::Strip { n, topology, scale } => GeometrySpec::Strip {
                n: n * f,
                topology,
                scale,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StripTopology {
    Circle,
    #[default]
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    Uniform {
        value: f64,
    },
    /// `mean + amplitude · sin(2π x)`, sampled as a smooth density.
    Sine {
        mean: f64,
        amplitude: f64,
    },
    /// Alternating `low`/`high` cells (torus only).
    Checkerboard {
        low: f64,
        high: f64,
    },
    PerCell {
        values: Vec<f64>,
    },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Uniform { value: 1.0 }
    }
}

impl WeightSpec {
    pub fn is_unit(&self) -> bool {
        *self == WeightSpec::Uniform { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScaleSpec {
    Constant { value: f64 },
    Linear { a0: f64, rate: f64 },
    Exponential { a0: f64, rate: f64 },
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSpec {
    pub id: FluxId,
    /// Advection speed on the circle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    /// Torus velocity, scaled by `1/ω̄` for the weighted fluxes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxId {
    AdvectionCircle,
    BurgersCircle,
    TorusWeightedAdvection,
    /// `h(ū) (1, 0)` on a torus with a non-uniform density: not divergence-free.
    TorusIncompatible,
    SphereRotation,
    BurgersStrip,
}

impl FluxId {
    pub fn name(self) -> &'static str {
        match self {
            FluxId::AdvectionCircle => "advection-circle",
            FluxId::BurgersCircle => "burgers-circle",
            FluxId::TorusWeightedAdvection => "torus-weighted-advection",
            FluxId::TorusIncompatible => "torus-incompatible",
            FluxId::SphereRotation => "sphere-rotation",
            FluxId::BurgersStrip => "burgers-strip",
        }
    }

    pub fn geometry_kind(self) -> &'static str {
        match self {
            FluxId::AdvectionCircle | FluxId::BurgersCircle => "circle",
            FluxId::TorusWeightedAdvection | FluxId::TorusIncompatible => "torus",
            FluxId::SphereRotation => "sphere",
            FluxId::BurgersStrip => "strip",
        }
    }

    pub fn is_compatible(self) -> bool {
        self != FluxId::TorusIncompatible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawSpec {
    Linear,
    Burgers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant {
        value: f64,
    },
    /// `mean + amplitude · sin(2π frequency x_axis)`.
    Sine {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_u32")]
        frequency: u32,
        #[serde(default)]
        axis: usize,
    },
    CosineBell {
        center: [f64; 3],
        radius: f64,
        #[serde(default = "one")]
        height: f64,
        #[serde(default)]
        background: f64,
    },
    /// `left` for `x_0 < position`, `right` beyond.
    Riemann {
        left: f64,
        right: f64,
        #[serde(default = "half")]
        position: f64,
    },
    /// `inside` on `[start, end]`, `outside` elsewhere (first coordinate).
    Box {
        start: f64,
        end: f64,
        #[serde(default = "one")]
        inside: f64,
        #[serde(default)]
        outside: f64,
    },
    /// Independent uniform draws per cell from the run seed.
    Random {
        low: f64,
        high: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub left: f64,
    pub right: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    #[serde(default)]
    pub numerical_flux: NumericalFluxSpec,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub mode: ModeSpec,
    /// Values always included when bounding wave speeds; two runs that share
    /// a range wide enough for both take identical time steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_range: Option<[f64; 2]>,
}

fn default_cfl() -> f64 {
    0.9
}

impl Default for SchemeSpec {
    fn default() -> Self {
        SchemeSpec {
            numerical_flux: NumericalFluxSpec::default(),
            cfl: default_cfl(),
            mode: ModeSpec::default(),
            speed_range: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericalFluxSpec {
    #[default]
    LaxFriedrichs,
    Godunov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    #[default]
    Corrected,
    SourceTerm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Multiplier on the calibrated entropy tolerance.
    #[serde(default = "one")]
    pub entropy_scale: f64,
    #[serde(default = "default_slack")]
    pub contraction_slack: f64,
    #[serde(default = "default_slack")]
    pub conservation: f64,
    /// Trace tolerance is `trace_scale · h^{1/2}`.
    #[serde(default = "half")]
    pub trace_scale: f64,
    /// Smallest accepted fitted rate in `converge`.
    #[serde(default = "half")]
    pub min_rate: f64,
    #[serde(default = "default_k_count")]
    pub kruzkov_indices: usize,
}

fn default_slack() -> f64 {
    1e-12
}

fn default_k_count() -> usize {
    33
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            entropy_scale: 1.0,
            contraction_slack: default_slack(),
            conservation: default_slack(),
            trace_scale: half(),
            min_rate: half(),
            kruzkov_indices: default_k_count(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, Vec<String>> {
        serde_json::from_str(text).map_err(|e| vec![format!("config parse error: {e}")])
    }

    pub fn load(path: &Path) -> Result<RunConfig, Vec<String>> {
        let text =
            std::fs::read_to_string(path).map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
        Self::from_json(&text)
    }

    /// Every semantic problem with the configuration, in a fixed order.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errs.push(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            errs.push(format!("t_final must be positive and finite, got {}", self.t_final));
        }
        for &t in &self.snapshot_times {
            if !(t.is_finite() && t > 0.0 && t <= self.t_final) {
                errs.push(format!("snapshot time {t} outside (0, t_final]"));
            }
        }
        self.validate_geometry(&mut errs);
        self.validate_flux(&mut errs);
        self.validate_initial(&mut errs);
        self.validate_boundary(&mut errs);
        self.validate_scheme(&mut errs);
        let tol = &self.tolerances;
        for (name, v) in [
            ("entropy_scale", tol.entropy_scale),
            ("contraction_slack", tol.contraction_slack),
            ("conservation", tol.conservation),
            ("trace_scale", tol.trace_scale),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        if !tol.min_rate.is_finite() {
            errs.push("tolerances.min_rate must be finite".into());
        }
        if tol.kruzkov_indices < 2 {
            errs.push(format!(
                "tolerances.kruzkov_indices must be at least 2, got {}",
                tol.kruzkov_indices
            ));
        }
        errs
    }

    fn validate_geometry(&self, errs: &mut Vec<String>) {
        let check_weight = |w: &WeightSpec, cells: usize, torus: bool, errs: &mut Vec<String>| match w {
            WeightSpec::Uniform { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    errs.push(format!("uniform weight must be positive, got {value}"));
                }
            }
            WeightSpec::Sine { mean, amplitude } => {
                if !(mean.is_finite() && amplitude.is_finite() && mean - amplitude.abs() > 0.0) {
                    errs.push(format!(
                        "sine weight {mean} + {amplitude} sin(2πx) is not bounded below by a positive constant"
                    ));
                }
            }
            WeightSpec::Checkerboard { low, high } => {
                if !torus {
                    errs.push("checkerboard weights need a torus geometry".into());
                }
                if !(*low > 0.0 && *high > 0.0 && low.is_finite() && high.is_finite()) {
                    errs.push(format!("checkerboard weights must be positive, got {low} and {high}"));
                }
            }
            WeightSpec::PerCell { values } => {
                if values.len() != cells {
                    errs.push(format!(
                        "per-cell weight list has {} entries for {cells} cells",
                        values.len()
                    ));
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
                    errs.push(format!("per-cell weight {v} in cell {i} is not positive"));
                }
            }
        };
        match &self.geometry {
            GeometrySpec::Circle { n, weight } => {
                if *n < 3 {
                    errs.push(format!("circle needs at least 3 cells, got {n}"));
                }
                check_weight(weight, *n, false, errs);
            }
            GeometrySpec::Torus { nx, ny, weight } => {
                if *nx < 3 || *ny < 3 {
                    errs.push(format!("torus needs at least 3×3 cells, got {nx}×{ny}"));
                }
                check_weight(weight, nx * ny, true, errs);
            }
            GeometrySpec::Sphere { level } => {
                if *level > MAX_SPHERE_LEVEL {
                    errs.push(format!("sphere level {level} exceeds the maximum {MAX_SPHERE_LEVEL}"));
                }
            }
            GeometrySpec::Strip { n, scale, .. } => {
                if *n < 3 {
                    errs.push(format!("strip needs at least 3 cells, got {n}"));
                }
                let ok = match scale {
                    ScaleSpec::Constant { value } => *value > 0.0 && value.is_finite(),
                    ScaleSpec::Linear { a0, rate } | ScaleSpec::Exponential { a0, rate } => {
                        *a0 > 0.0 && a0.is_finite() && rate.is_finite()
                    }
                };
                if !ok {
                    errs.push(format!("scale factor {scale:?} is not positive at t = 0"));
                }
            }
        }
    }

    fn validate_flux(&self, errs: &mut Vec<String>) {
        let f = &self.flux;
        let geometry = self.geometry.kind();
        if f.id.geometry_kind() != geometry {
            errs.push(format!(
                "flux {} needs a {} geometry, got {geometry}",
                f.id.name(),
                f.id.geometry_kind()
            ));
        }
        let allowed: &[&str] = match f.id {
            FluxId::AdvectionCircle => &["speed"],
            FluxId::BurgersCircle | FluxId::BurgersStrip => &[],
            FluxId::TorusWeightedAdvection => &["velocity", "law"],
            FluxId::TorusIncompatible => &["law"],
            FluxId::SphereRotation => &["axis", "law"],
        };
        for (name, present) in [
            ("speed", f.speed.is_some()),
            ("velocity", f.velocity.is_some()),
            ("axis", f.axis.is_some()),
            ("law", f.law.is_some()),
        ] {
            if present && !allowed.contains(&name) {
                errs.push(format!("flux {} takes no parameter {name}", f.id.name()));
            }
        }
        if let Some(s) = f.speed {
            if !s.is_finite() {
                errs.push(format!("flux speed must be finite, got {s}"));
            }
        }
        if let Some(v) = f.velocity {
            if !v.iter().all(|c| c.is_finite()) {
                errs.push(format!("flux velocity {v:?} must be finite"));
            }
        }
        if let Some(a) = f.axis {
            if !a.iter().all(|c| c.is_finite()) || a.iter().all(|&c| c == 0.0) {
                errs.push(format!("rotation axis {a:?} must be finite and non-zero"));
            }
        }
        if f.id == FluxId::TorusIncompatible {
            if let GeometrySpec::Torus { weight, .. } = &self.geometry {
                if !matches!(weight, WeightSpec::Sine { .. } | WeightSpec::Uniform { .. }) {
                    errs.push("torus-incompatible needs a uniform or sine weight".into());
                }
            }
        }
    }

    fn validate_initial(&self, errs: &mut Vec<String>) {
        let finite = |vs: &[f64]| vs.iter().all(|v| v.is_finite());
        match &self.initial {
            InitialSpec::Constant { value } => {
                if !value.is_finite() {
                    errs.push("constant initial value must be finite".into());
                }
            }
            InitialSpec::Sine {
                mean,
                amplitude,
                frequency,
                axis,
            } => {
                if !finite(&[*mean, *amplitude]) {
                    errs.push("sine profile parameters must be finite".into());
                }
                if *frequency == 0 {
                    errs.push("sine profile frequency must be at least 1".into());
                }
                if *axis > 2 {
                    errs.push(format!("sine profile axis {axis} must be 0, 1 or 2"));
                }
            }
            InitialSpec::CosineBell {
                center,
                radius,
                height,
                background,
            } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    errs.push(format!("cosine-bell radius must be positive, got {radius}"));
                }
                if !finite(center) || !finite(&[*height, *background]) {
                    errs.push("cosine-bell parameters must be finite".into());
                }
                if matches!(self.geometry, GeometrySpec::Sphere { .. }) && center.iter().all(|&c| c == 0.0) {
                    errs.push("cosine-bell center on the sphere must be non-zero".into());
                }
            }
            InitialSpec::Riemann { left, right, position } => {
                if !finite(&[*left, *right, *position]) {
                    errs.push("riemann profile parameters must be finite".into());
                }
            }
            InitialSpec::Box {
                start,
                end,
                inside,
                outside,
            } => {
                if !finite(&[*start, *end, *inside, *outside]) {
                    errs.push("box profile parameters must be finite".into());
                } else if !(start < end) {
                    errs.push(format!("box profile needs start < end, got [{start}, {end}]"));
                }
            }
            InitialSpec::Random { low, high } => {
                if !(finite(&[*low, *high]) && low < high) {
                    errs.push(format!("random profile needs finite low < high, got [{low}, {high}]"));
                }
            }
        }
    }

    fn validate_boundary(&self, errs: &mut Vec<String>) {
        let needs = matches!(
            self.geometry,
            GeometrySpec::Strip {
                topology: StripTopology::Interval,
                ..
            }
        );
        match (&self.boundary, needs) {
            (None, true) => errs.push("an interval strip needs boundary data".into()),
            (Some(_), false) => errs.push("boundary data given for a geometry without boundary".into()),
            (Some(b), true) => {
                if !(b.left.is_finite() && b.right.is_finite()) {
                    errs.push("boundary values must be finite".into());
                }
                if let Some(s) = b.sup_bound {
                    if !(s > 0.0 && s.is_finite()) {
                        errs.push(format!("boundary sup_bound must be positive, got {s}"));
                    } else if b.left.abs() > s || b.right.abs() > s {
                        errs.push(format!("boundary values exceed sup_bound {s}"));
                    }
                }
            }
            (None, false) => {}
        }
    }

    fn validate_scheme(&self, errs: &mut Vec<String>) {
        let s = &self.scheme;
        if !(s.cfl > 0.0 && s.cfl <= 1.0) {
            errs.push(format!("scheme.cfl must lie in (0, 1], got {}", s.cfl));
        }
        if s.numerical_flux == NumericalFluxSpec::Godunov && self.geometry.dimension() != 1 {
            errs.push("the godunov flux needs a 1D geometry".into());
        }
        if let Some(r) = s.speed_range {
            if !r.iter().all(|v| v.is_finite()) {
                errs.push(format!("scheme.speed_range {r:?} must be finite"));
            }
        }
        if s.mode == ModeSpec::SourceTerm && matches!(self.geometry, GeometrySpec::Strip { .. }) {
            errs.push("source-term mode is not available on the strip".into());
        }
    }
}
