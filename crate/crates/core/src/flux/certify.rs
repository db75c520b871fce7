use std::sync::Arc;

use super::{FluxField, SamplePoint};
use crate::fv::{face_flux, FaceCoefficients};
use crate::geometry::vec3::{self, Vec3};
use crate::geometry::Mesh;

/// Default tolerance for fluxes that are divergence-free by construction.
pub const DEFAULT_COMPAT_TOL: f64 = 1e-10;

/// Worst discrete divergence `|Σ_{e∈∂K} φ_e(ū)| / |K|_ω` over cells and
/// sampled states, before and after the constant-state correction.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub raw_defect: f64,
    pub corrected_defect: f64,
    pub worst_cell: usize,
    pub worst_u: f64,
    pub tolerance: f64,
    pub compatible: bool,
}

pub fn check_geometry_compatibility(
    mesh: &Mesh,
    flux: &FluxField,
    u_samples: &[f64],
    tolerance: f64,
) -> CompatibilityReport {
    let coeffs = FaceCoefficients::new(mesh, flux);
    let mut raw: f64 = 0.0;
    let mut corrected: f64 = 0.0;
    let mut worst = (0, 0.0);
    for cell in &mesh.cells {
        for &u in u_samples {
            let sum: f64 = cell
                .faces
                .iter()
                .map(|&(fid, s)| s * face_flux(mesh, flux, fid, u))
                .sum();
            let d = sum.abs() / cell.measure;
            if d > raw {
                raw = d;
                worst = (cell.id, u);
            }
            let defect = flux.law.value(u) * coeffs.cell_defect[cell.id];
            corrected = corrected.max((sum - defect).abs() / cell.measure);
        }
    }
    CompatibilityReport {
        raw_defect: raw,
        corrected_defect: corrected,
        worst_cell: worst.0,
        worst_u: worst.1,
        tolerance,
        compatible: raw <= tolerance,
    }
}

/// A 1-form field `α` paired against the flux.
#[derive(Clone)]
pub enum OneForm {
    Constant(Vec3),
    Field(Arc<dyn Fn(&SamplePoint) -> Vec3 + Send + Sync>),
}

impl OneForm {
    fn eval(&self, p: &SamplePoint) -> Vec3 {
        match self {
            OneForm::Constant(v) => *v,
            OneForm::Field(f) => f(p),
        }
    }
}

/// Least constants `C_α` with `|⟨α, f(ū)⟩| ≤ C_α (1 + |ū|)` on the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCertificate {
    pub constants: Vec<f64>,
    pub u_range: (f64, f64),
    pub u_samples: usize,
    pub points: usize,
    /// Estimated growth exponent of `sup |⟨α, f⟩|` between half and full range.
    pub growth_exponents: Vec<Option<f64>>,
    /// Exponent noticeably above one: faster than linear growth.
    pub superlinear: Vec<bool>,
}

pub fn check_growth(
    flux: &FluxField,
    alphas: &[OneForm],
    points: &[SamplePoint],
    u_range: (f64, f64),
    n_u: usize,
) -> GrowthCertificate {
    let (lo, hi) = (u_range.0.min(u_range.1), u_range.0.max(u_range.1));
    let n_u = n_u.max(2);
    let us: Vec<f64> = (0..n_u).map(|i| lo + (hi - lo) * i as f64 / (n_u - 1) as f64).collect();
    let sup_at = |alpha: &OneForm, r: f64| -> f64 {
        [-r, r]
            .iter()
            .filter(|&&u| u >= lo - 1e-15 && u <= hi + 1e-15)
            .flat_map(|&u| {
                points
                    .iter()
                    .map(move |p| vec3::dot(&alpha.eval(p), &flux.eval(u, p)).abs())
            })
            .fold(0.0, f64::max)
    };
    let reach = lo.abs().max(hi.abs());
    let mut constants = Vec::with_capacity(alphas.len());
    let mut exponents = Vec::with_capacity(alphas.len());
    let mut superlinear = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let c = us
            .iter()
            .flat_map(|&u| {
                points
                    .iter()
                    .map(move |p| vec3::dot(&alpha.eval(p), &flux.eval(u, p)).abs() / (1.0 + u.abs()))
            })
            .fold(0.0, f64::max);
        constants.push(c);
        let full = sup_at(alpha, reach);
        let half = sup_at(alpha, 0.5 * reach);
        let exponent = (half > 0.0 && full > 0.0).then(|| (full / half).log2());
        superlinear.push(exponent.is_some_and(|p| p > 1.05));
        exponents.push(exponent);
    }
    GrowthCertificate {
        constants,
        u_range: (lo, hi),
        u_samples: n_u,
        points: points.len(),
        growth_exponents: exponents,
        superlinear,
    }
}

/// Largest relative disagreement between `∂_u f` and a central difference.
pub fn check_derivative(flux: &FluxField, u_samples: &[f64], points: &[SamplePoint], step: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for &u in u_samples {
        for p in points {
            let fp = flux.eval(u + step, p);
            let fm = flux.eval(u - step, p);
            let d = flux.du(u, p);
            for c in 0..3 {
                let fd = (fp[c] - fm[c]) / (2.0 * step);
                worst = worst.max((fd - d[c]).abs() / d[c].abs().max(1.0));
            }
        }
    }
    worst
}
