//! Parameter-dependent flux fields `f(ū, x)` and their entropy pairs.
//!
//! Every built-in flux has the product form `f(ū, x) = h(ū) X(x)`: a scalar
//! law `h` times a vector field `X`. When `div_ω X = 0` the flux is
//! geometry-compatible for every `ū`.

mod certify;
mod entropy;

use std::sync::Arc;

pub use certify::{
    check_derivative, check_geometry_compatibility, check_growth, CompatibilityReport, GrowthCertificate, OneForm,
    DEFAULT_COMPAT_TOL,
};
pub use entropy::{kruzkov_pair, sign, verify_entropy_pair, EntropyPair, EntropyPairCheck};

use crate::error::{Error, Result};
use crate::geometry::vec3::{self, Vec3};

/// Curvature class of a scalar law, used by the exact Riemann flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Convex,
    Concave,
    Unknown,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct CustomLaw {
    value: ScalarFn,
    derivative: ScalarFn,
    shape: Shape,
    critical_points: Vec<f64>,
}

/// Scalar factor `h(ū)` of a product flux.
#[derive(Clone)]
pub enum ScalarLaw {
    Zero,
    /// `slope · ū`
    Linear {
        slope: f64,
    },
    /// `coefficient · ū² / 2`; Burgers for `coefficient = 1`.
    Quadratic {
        coefficient: f64,
    },
    Custom(CustomLaw),
}

impl std::fmt::Debug for ScalarLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarLaw::Zero => write!(f, "Zero"),
            ScalarLaw::Linear { slope } => write!(f, "Linear({slope})"),
            ScalarLaw::Quadratic { coefficient } => write!(f, "Quadratic({coefficient})"),
            ScalarLaw::Custom(c) => write!(f, "Custom({:?})", c.shape),
        }
    }
}

impl ScalarLaw {
    pub fn burgers() -> Self {
        ScalarLaw::Quadratic { coefficient: 1.0 }
    }

    /// A user law. The derivative is mandatory.
    pub fn custom(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: Option<ScalarFn>,
        shape: Shape,
        critical_points: Vec<f64>,
    ) -> Result<Self> {
        let derivative =
            derivative.ok_or_else(|| Error::UnsupportedFlux("scalar law supplied without its derivative".into()))?;
        Ok(ScalarLaw::Custom(CustomLaw {
            value: Arc::new(value),
            derivative,
            shape,
            critical_points,
        }))
    }

    pub fn value(&self, u: f64) -> f64 {
        match self {
            ScalarLaw::Zero => 0.0,
            ScalarLaw::Linear { slope } => slope * u,
            ScalarLaw::Quadratic { coefficient } => 0.5 * coefficient * u * u,
            ScalarLaw::Custom(c) => (c.value)(u),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            ScalarLaw::Zero => 0.0,
            ScalarLaw::Linear { slope } => *slope,
            ScalarLaw::Quadratic { coefficient } => coefficient * u,
            ScalarLaw::Custom(c) => (c.derivative)(u),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            ScalarLaw::Zero | ScalarLaw::Linear { .. } => Shape::Convex,
            ScalarLaw::Quadratic { coefficient } if *coefficient >= 0.0 => Shape::Convex,
            ScalarLaw::Quadratic { .. } => Shape::Concave,
            ScalarLaw::Custom(c) => c.shape,
        }
    }

    /// Whether the exact (Godunov) Riemann flux can be evaluated.
    pub fn supports_exact_riemann(&self) -> bool {
        self.shape() != Shape::Unknown
    }

    /// `max |h'|` over `[lo, hi]`.
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        match self {
            ScalarLaw::Zero => 0.0,
            ScalarLaw::Linear { slope } => slope.abs(),
            ScalarLaw::Quadratic { coefficient } => coefficient.abs() * lo.abs().max(hi.abs()),
            ScalarLaw::Custom(c) => {
                let ends = (c.derivative)(lo).abs().max((c.derivative)(hi).abs());
                if c.shape != Shape::Unknown {
                    return ends;
                }
                const SAMPLES: usize = 256;
                (1..SAMPLES).fold(ends, |m, i| {
                    let u = lo + (hi - lo) * i as f64 / SAMPLES as f64;
                    m.max((c.derivative)(u).abs())
                })
            }
        }
    }

    fn critical_points(&self) -> &[f64] {
        match self {
            ScalarLaw::Quadratic { .. } => &[0.0],
            ScalarLaw::Custom(c) => &c.critical_points,
            _ => &[],
        }
    }

    /// Extremum of `s·h` over `[lo, hi]`, the minimum when `want_min`.
    fn scaled_extremum(&self, s: f64, lo: f64, hi: f64, want_min: bool) -> f64 {
        let pick = |a: f64, b: f64| if want_min { a.min(b) } else { a.max(b) };
        let mut best = pick(s * self.value(lo), s * self.value(hi));
        let mut found_interior = false;
        for &c in self.critical_points() {
            if c > lo && c < hi {
                best = pick(best, s * self.value(c));
                found_interior = true;
            }
        }
        if let ScalarLaw::Custom(c) = self {
            if c.critical_points.is_empty() && c.shape != Shape::Unknown && !found_interior {
                // unimodal: golden-section search for the interior extremum
                let sign = if want_min { 1.0 } else { -1.0 };
                let g = |u: f64| sign * s * self.value(u);
                let (mut a, mut b) = (lo, hi);
                let r = (5f64.sqrt() - 1.0) / 2.0;
                for _ in 0..200 {
                    let x1 = b - r * (b - a);
                    let x2 = a + r * (b - a);
                    if g(x1) < g(x2) {
                        b = x2;
                    } else {
                        a = x1;
                    }
                }
                best = pick(best, s * self.value(0.5 * (a + b)));
            }
        }
        best
    }

    /// Exact Riemann flux of `G(ū) = s·h(ū)` between `left` and `right`:
    /// `min_{[a,b]} G` when `a ≤ b`, `max_{[b,a]} G` otherwise.
    pub fn godunov(&self, s: f64, left: f64, right: f64) -> f64 {
        if left == right {
            return s * self.value(left);
        }
        if left < right {
            self.scaled_extremum(s, left, right, true)
        } else {
            self.scaled_extremum(s, right, left, false)
        }
    }

    /// Solves `h(ū) = v` for a strictly increasing law.
    pub fn invert_increasing(&self, v: f64, guess_lo: f64, guess_hi: f64) -> f64 {
        if let ScalarLaw::Linear { slope } = self {
            return v / slope;
        }
        let (mut lo, mut hi) = (guess_lo.min(guess_hi), guess_lo.max(guess_hi));
        let mut width = (hi - lo).max(1.0);
        while self.value(lo) > v {
            lo -= width;
            width *= 2.0;
        }
        width = (hi - lo).max(1.0);
        while self.value(hi) < v {
            hi += width;
            width *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Location and local volume-form density at which a flux is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub x: Vec3,
    pub omega: f64,
}

type FieldFn = Arc<dyn Fn(&SamplePoint) -> Vec3 + Send + Sync>;
type DivergenceFn = Arc<dyn Fn(&SamplePoint) -> f64 + Send + Sync>;

/// Vector factor `X(x)` of a product flux.
#[derive(Clone)]
pub enum VectorField {
    Constant(Vec3),
    /// `V / ω̄(x)`: `ω̄ X` is constant, so `div_ω X = 0` for any density.
    WeightedConstant(Vec3),
    /// Solid-body rotation `axis × x` on the unit sphere.
    Rotation {
        axis: Vec3,
    },
    Custom(FieldFn),
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorField::Constant(v) => write!(f, "Constant({v:?})"),
            VectorField::WeightedConstant(v) => write!(f, "WeightedConstant({v:?})"),
            VectorField::Rotation { axis } => write!(f, "Rotation({axis:?})"),
            VectorField::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl VectorField {
    pub fn eval(&self, p: &SamplePoint) -> Vec3 {
        match self {
            VectorField::Constant(v) => *v,
            VectorField::WeightedConstant(v) => vec3::scale(v, 1.0 / p.omega),
            VectorField::Rotation { axis } => vec3::cross(axis, &p.x),
            VectorField::Custom(f) => f(p),
        }
    }
}

/// Product flux `f(ū, x) = h(ū) X(x)`.
#[derive(Clone)]
pub struct FluxField {
    pub name: String,
    pub law: ScalarLaw,
    pub field: VectorField,
    /// Analytic `div_ω X`, when known. Used by the source-term mode.
    pub divergence: Option<DivergenceFn>,
}

impl std::fmt::Debug for FluxField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FluxField")
            .field("name", &self.name)
            .field("law", &self.law)
            .field("field", &self.field)
            .field("analytic_divergence", &self.divergence.is_some())
            .finish()
    }
}

impl FluxField {
    pub fn eval(&self, u: f64, p: &SamplePoint) -> Vec3 {
        vec3::scale(&self.field.eval(p), self.law.value(u))
    }

    /// `∂_u f(ū, x)`.
    pub fn du(&self, u: f64, p: &SamplePoint) -> Vec3 {
        vec3::scale(&self.field.eval(p), self.law.derivative(u))
    }

    /// `(div_ω f)(ū)` at `p` from the analytic divergence of `X`, if known.
    pub fn analytic_divergence(&self, u: f64, p: &SamplePoint) -> Option<f64> {
        self.divergence.as_ref().map(|d| self.law.value(u) * d(p))
    }

    pub fn with_divergence(mut self, div: impl Fn(&SamplePoint) -> f64 + Send + Sync + 'static) -> Self {
        self.divergence = Some(Arc::new(div));
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `f(ū, x) = h(ū) X(x)`.
pub fn make_product_flux(law: ScalarLaw, field: VectorField) -> FluxField {
    let divergence: Option<DivergenceFn> = match &field {
        VectorField::WeightedConstant(_) | VectorField::Rotation { .. } => Some(Arc::new(|_| 0.0)),
        VectorField::Constant(_) => None,
        VectorField::Custom(_) => None,
    };
    FluxField {
        name: "product".into(),
        law,
        field,
        divergence,
    }
}

/// Solid-body rotation about `axis` (normalized) on the unit sphere, scaled
/// by `h(ū)`. Killing fields are divergence-free for the area form.
pub fn make_rotation_flux_sphere(law: ScalarLaw, axis: Vec3) -> Result<FluxField> {
    let n = vec3::norm(&axis);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidArgument("rotation axis must be non-zero".into()));
    }
    Ok(make_product_flux(
        law,
        VectorField::Rotation {
            axis: vec3::scale(&axis, 1.0 / n),
        },
    )
    .named("sphere-rotation"))
}
