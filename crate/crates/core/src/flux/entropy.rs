use std::sync::Arc;

use super::{FluxField, SamplePoint};
use crate::geometry::vec3::{self, Vec3};

/// `sgn` with `sgn(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type EntropyFluxFn = Arc<dyn Fn(f64, &SamplePoint) -> Vec3 + Send + Sync>;

/// Convex entropy `U` with entropy flux `F`, `∂_u F = ∂_u U · ∂_u f`.
#[derive(Clone)]
pub struct EntropyPair {
    entropy: ScalarFn,
    entropy_derivative: ScalarFn,
    flux: EntropyFluxFn,
    /// Index `k` when this is the Kruzkov pair `|ū − k|`.
    pub kruzkov: Option<f64>,
}

impl std::fmt::Debug for EntropyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EntropyPair").field("kruzkov", &self.kruzkov).finish()
    }
}

impl EntropyPair {
    pub fn new(
        entropy: impl Fn(f64) -> f64 + Send + Sync + 'static,
        entropy_derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        flux: impl Fn(f64, &SamplePoint) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        EntropyPair {
            entropy: Arc::new(entropy),
            entropy_derivative: Arc::new(entropy_derivative),
            flux: Arc::new(flux),
            kruzkov: None,
        }
    }

    /// `U(ū) = ū`, `F = f`.
    pub fn identity(flux: &FluxField) -> Self {
        let f = flux.clone();
        EntropyPair::new(|u| u, |_| 1.0, move |u, p| f.eval(u, p))
    }

    pub fn entropy(&self, u: f64) -> f64 {
        (self.entropy)(u)
    }

    pub fn entropy_derivative(&self, u: f64) -> f64 {
        (self.entropy_derivative)(u)
    }

    pub fn flux(&self, u: f64, p: &SamplePoint) -> Vec3 {
        (self.flux)(u, p)
    }
}

/// Kruzkov pair `U = |ū − k|`, `F = sgn(ū − k)(f(ū) − f(k))`.
pub fn kruzkov_pair(flux: &FluxField, k: f64) -> EntropyPair {
    let f = flux.clone();
    let mut pair = EntropyPair::new(
        move |u| (u - k).abs(),
        move |u| sign(u - k),
        move |u, p| {
            let s = sign(u - k);
            if s == 0.0 {
                return [0.0; 3];
            }
            // h(ū)X − h(k)X, factored through the scalar law
            vec3::scale(&f.field.eval(p), s * (f.law.value(u) - f.law.value(k)))
        },
    );
    pair.kruzkov = Some(k);
    pair
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyPairCheck {
    /// `max |∂_u F − ∂_u U ∂_u f|` over the evaluated samples.
    pub max_residual: f64,
    pub evaluated: usize,
    /// Samples within `kink_margin` of a Kruzkov kink.
    pub skipped_at_kink: usize,
}

/// Finite-difference check of `∂_u F = ∂_u U ∂_u f` (componentwise).
pub fn verify_entropy_pair(
    pair: &EntropyPair,
    flux: &FluxField,
    u_samples: &[f64],
    points: &[SamplePoint],
    step: f64,
    kink_margin: f64,
) -> EntropyPairCheck {
    let mut max_residual: f64 = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for &u in u_samples {
        if let Some(k) = pair.kruzkov {
            if (u - k).abs() < kink_margin.max(step) {
                skipped += points.len();
                continue;
            }
        }
        let du_entropy = (pair.entropy(u + step) - pair.entropy(u - step)) / (2.0 * step);
        for p in points {
            let fp = pair.flux(u + step, p);
            let fm = pair.flux(u - step, p);
            let df = flux.du(u, p);
            for c in 0..3 {
                let dfc = (fp[c] - fm[c]) / (2.0 * step);
                max_residual = max_residual.max((dfc - du_entropy * df[c]).abs());
            }
            evaluated += 1;
        }
    }
    EntropyPairCheck {
        max_residual,
        evaluated,
        skipped_at_kink: skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{make_product_flux, ScalarLaw, VectorField};

    fn pt(x: f64) -> SamplePoint {
        SamplePoint {
            x: [x, 0.0, 0.0],
            omega: 1.0,
        }
    }

    #[test]
    fn kruzkov_zero_on_linear_flux() {
        let f = make_product_flux(ScalarLaw::Linear { slope: 1.0 }, VectorField::Constant([1.0, 0.0, 0.0]));
        let pair = kruzkov_pair(&f, 0.0);
        for u in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            assert_eq!(pair.entropy(u), u.abs());
            assert_eq!(pair.flux(u, &pt(0.3))[0], u.abs());
        }
    }

    #[test]
    fn kink_point_vanishes() {
        let f = make_product_flux(ScalarLaw::burgers(), VectorField::Constant([1.0, 0.0, 0.0]));
        let pair = kruzkov_pair(&f, 0.4);
        assert_eq!(pair.entropy(0.4), 0.0);
        assert_eq!(pair.flux(0.4, &pt(0.1)), [0.0; 3]);
        assert_eq!(pair.entropy_derivative(0.4), 0.0);
    }

    #[test]
    fn burgers_kruzkov_compatibility_by_finite_differences() {
        let f = make_product_flux(ScalarLaw::burgers(), VectorField::Constant([1.0, 0.0, 0.0]));
        let pair = kruzkov_pair(&f, 1.0);
        for u in [-1.0, 0.5, 2.0] {
            let expect = sign(u - 1.0) * (0.5 * u * u - 0.5);
            assert!((pair.flux(u, &pt(0.0))[0] - expect).abs() < 1e-15);
        }
        let check = verify_entropy_pair(&pair, &f, &[-1.0, 0.5, 2.0], &[pt(0.0)], 1e-4, 1e-3);
        assert!(check.max_residual < 1e-6, "{check:?}");
        assert_eq!(check.skipped_at_kink, 0);
    }

    #[test]
    fn samples_at_the_kink_are_skipped() {
        let f = make_product_flux(ScalarLaw::burgers(), VectorField::Constant([1.0, 0.0, 0.0]));
        let pair = kruzkov_pair(&f, 0.0);
        let check = verify_entropy_pair(&pair, &f, &[0.0, 1.0], &[pt(0.0), pt(0.5)], 1e-4, 1e-3);
        assert_eq!(check.skipped_at_kink, 2);
        assert_eq!(check.evaluated, 2);
    }

    #[test]
    fn identity_entropy_is_exact() {
        let f = make_product_flux(ScalarLaw::burgers(), VectorField::Constant([0.3, -1.0, 0.0]));
        let pair = EntropyPair::identity(&f);
        let check = verify_entropy_pair(&pair, &f, &[-1.0, 0.25, 2.0], &[pt(0.0)], 0.5, 0.0);
        // quadratic flux: central differences are exact up to rounding
        assert!(check.max_residual < 1e-14);
    }

    #[test]
    fn quadratic_entropy_with_tabulated_flux() {
        // U = u², F(u) = ∫₀^u 2v ∂_u f(v) dv computed by Simpson's rule
        let f = make_product_flux(
            ScalarLaw::custom(
                |u: f64| u.sin() + u,
                Some(Arc::new(|u: f64| u.cos() + 1.0)),
                crate::flux::Shape::Unknown,
                vec![],
            )
            .unwrap(),
            VectorField::Constant([1.0, 0.0, 0.0]),
        );
        let simpson = |u: f64| {
            let n = 400;
            let h = u / n as f64;
            let g = |v: f64| 2.0 * v * (v.cos() + 1.0);
            let mut s = g(0.0) + g(u);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
            }
            s * h / 3.0
        };
        let pair = EntropyPair::new(|u| u * u, |u| 2.0 * u, move |u, _| [simpson(u), 0.0, 0.0]);
        let check = verify_entropy_pair(&pair, &f, &[-1.5, -0.2, 0.8, 2.0], &[pt(0.0)], 1e-3, 0.0);
        assert!(check.max_residual < 1e-6, "{check:?}");
    }
}
