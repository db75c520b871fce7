//! Boundary conditions in the weak entropy sense on foliated (1+1)
//! spacetimes: the boundary entropy flux, the admissible trace sets, face
//! classification, ghost-state boundary fluxes and leafwise evolution.

mod foliated;
mod trace;

use std::sync::Arc;

pub use foliated::{evolve_foliated, stability_constants, BoundaryData, BoundaryValue, SpacetimeFlux};
pub use trace::{extract_weak_trace, weak_trace_window, TraceEstimate};

use crate::error::{Error, Result};
use crate::flux::{sign, FluxField, SamplePoint};
use crate::geometry::vec3::{self, Vec3};
use crate::geometry::Mesh;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The scalar `g(ū) = ⟨N, f(ū)⟩` at one boundary point, with its derivative.
#[derive(Clone)]
pub struct NormalFlux {
    value: ScalarFn,
    derivative: ScalarFn,
}

impl std::fmt::Debug for NormalFlux {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("NormalFlux(..)")
    }
}

impl NormalFlux {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NormalFlux {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    /// `⟨N, f(ū, p)⟩` for a spatial flux field and a (co)normal `N`.
    pub fn from_field(flux: &FluxField, p: &SamplePoint, normal: &Vec3) -> Self {
        let xn = vec3::dot(normal, &flux.field.eval(p));
        let (l1, l2) = (flux.law.clone(), flux.law.clone());
        NormalFlux::new(move |u| xn * l1.value(u), move |u| xn * l2.derivative(u))
    }

    /// `N_t f^t(ū) + N_x f^x(ū)` for a spacetime flux and a conormal `(N_t, N_x)`.
    pub fn spacetime(flux: &SpacetimeFlux, conormal: [f64; 2]) -> Self {
        let (a, b) = (flux.clone(), flux.clone());
        let [nt, nx] = conormal;
        NormalFlux::new(
            move |u| nt * a.time.value(u) + nx * a.space.value(u),
            move |u| nt * b.time.derivative(u) + nx * b.space.derivative(u),
        )
    }

    pub fn value(&self, u: f64) -> f64 {
        (self.value)(u)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        (self.derivative)(u)
    }
}

/// `E_N(u_B, ū) = ⟨N, F(u_B)⟩ + ∂_u U(u_B) ⟨N, f(ū) − f(u_B)⟩` for the Kruzkov
/// pair with index `k`, which simplifies to `sgn(u_B − k)(g(ū) − g(k))`.
pub fn boundary_entropy_flux(g: &NormalFlux, k: f64, u_b: f64, u: f64) -> f64 {
    let s = sign(u_b - k);
    let f_b = s * (g.value(u_b) - g.value(k));
    f_b + s * (g.value(u) - g.value(u_b))
}

/// `⟨N, F(ū)⟩ = sgn(ū − k)(g(ū) − g(k))`.
pub fn normal_entropy_flux(g: &NormalFlux, k: f64, u: f64) -> f64 {
    sign(u - k) * (g.value(u) - g.value(k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub admissible: bool,
    /// Index with the largest `E_N(u_B, ū) − ⟨N, F(ū)⟩`.
    pub worst_k: f64,
    /// That largest difference; `≤ 0` when every inequality holds strictly.
    pub violation: f64,
}

/// Whether `ū` lies in the admissible set of `u_B`: `E_N(u_B, ū) ≤ ⟨N, F(ū)⟩
/// + tol` for every `k` in `k_grid`.
pub fn admissible_membership(g: &NormalFlux, u_b: f64, u: f64, k_grid: &[f64], tol: f64) -> Membership {
    let mut worst_k = f64::NAN;
    let mut violation = f64::NEG_INFINITY;
    for &k in k_grid {
        let d = boundary_entropy_flux(g, k, u_b, u) - normal_entropy_flux(g, k, u);
        if d > violation {
            violation = d;
            worst_k = k;
        }
    }
    Membership {
        admissible: violation <= tol,
        worst_k,
        violation,
    }
}

/// `n` evenly spaced indices over `[min(a,b) − margin, max(a,b) + margin]`.
pub fn kruzkov_grid(a: f64, b: f64, margin: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = (a.min(b) - margin, a.max(b) + margin);
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Whether the boundary piece is time-like (a side of the strip) or one of
/// the space-like leaves bounding it in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceCausality {
    TimeLike,
    SpaceLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceClass {
    /// `⟨N, ∂_u f⟩ < 0` throughout: characteristics enter.
    Inflow,
    /// `⟨N, ∂_u f⟩ > 0` throughout: the condition is vacuous.
    Outflow,
    SonicOrMixed,
    /// Space-like with entering characteristics: the trace must equal `u_B`.
    SpacelikeInitial,
    /// Space-like with leaving characteristics: no condition.
    SpacelikeFinal,
}

impl FaceClass {
    pub fn name(self) -> &'static str {
        match self {
            FaceClass::Inflow => "inflow",
            FaceClass::Outflow => "outflow",
            FaceClass::SonicOrMixed => "sonic/mixed",
            FaceClass::SpacelikeInitial => "spacelike-initial",
            FaceClass::SpacelikeFinal => "spacelike-final",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFaceClass {
    pub face: usize,
    pub class: FaceClass,
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
    pub min_speed: f64,
    pub max_speed: f64,
}

/// Classifies a boundary piece by the sign of `⟨N, ∂_u f(ū)⟩` at `samples`
/// evenly spaced values of `u_range` (endpoints included).
pub fn classify_boundary_face(
    g: &NormalFlux,
    face: usize,
    causality: FaceCausality,
    u_range: (f64, f64),
    samples: usize,
) -> Result<BoundaryFaceClass> {
    if !(u_range.0.is_finite() && u_range.1.is_finite()) {
        return Err(Error::InvalidArgument("classification range must be finite".into()));
    }
    let (lo, hi) = (u_range.0.min(u_range.1), u_range.0.max(u_range.1));
    let samples = samples.max(2);
    let (mut neg, mut zero, mut pos) = (0, 0, 0);
    let (mut min_speed, mut max_speed) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..samples {
        let u = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let d = g.derivative(u);
        min_speed = min_speed.min(d);
        max_speed = max_speed.max(d);
        if d > 0.0 {
            pos += 1;
        } else if d < 0.0 {
            neg += 1;
        } else {
            zero += 1;
        }
    }
    let class = match (causality, neg, zero, pos) {
        (FaceCausality::TimeLike, 0, 0, _) => FaceClass::Outflow,
        (FaceCausality::TimeLike, _, 0, 0) => FaceClass::Inflow,
        (FaceCausality::SpaceLike, _, 0, 0) => FaceClass::SpacelikeInitial,
        (FaceCausality::SpaceLike, 0, 0, _) => FaceClass::SpacelikeFinal,
        _ => FaceClass::SonicOrMixed,
    };
    Ok(BoundaryFaceClass {
        face,
        class,
        negative: neg,
        zero,
        positive: pos,
        min_speed,
        max_speed,
    })
}

/// Owner-outward `Σ_q w_q ⟨N, X⟩ ω̄` of a face.
pub(crate) fn face_coefficient(mesh: &Mesh, flux: &FluxField, face: usize) -> f64 {
    mesh.faces[face]
        .nodes
        .iter()
        .map(|q| {
            let p = SamplePoint {
                x: q.point,
                omega: q.omega,
            };
            q.weight * vec3::dot(&q.normal, &flux.field.eval(&p)) * q.omega
        })
        .sum()
}

/// Exact Riemann flux between the interior state and the ghost state `u_B`,
/// outward through a boundary face of a 1D mesh.
pub fn godunov_boundary_flux(mesh: &Mesh, flux: &FluxField, face: usize, u_inside: f64, u_b: f64) -> Result<f64> {
    if mesh.dimension != 1 {
        return Err(Error::InvalidArgument(
            "boundary fluxes are only supported on 1D meshes".into(),
        ));
    }
    let f = mesh
        .faces
        .get(face)
        .ok_or(Error::UnknownId { kind: "face", id: face })?;
    if !f.is_boundary() {
        return Err(Error::InvalidArgument(format!("face {face} is not a boundary face")));
    }
    if !flux.law.supports_exact_riemann() {
        return Err(Error::UnsupportedFlux(
            "boundary flux needs a convex or concave law".into(),
        ));
    }
    Ok(flux.law.godunov(face_coefficient(mesh, flux, face), u_inside, u_b))
}
