//! Closed-form entropy solutions used as references.

use crate::geometry::vec3::{self, Vec3};

/// Self-similar solution `u(x/t)` of the Burgers Riemann problem.
pub fn burgers_riemann(left: f64, right: f64, xi: f64) -> f64 {
    if left > right {
        let speed = 0.5 * (left + right);
        if xi < speed {
            left
        } else {
            right
        }
    } else if xi <= left {
        left
    } else if xi >= right {
        right
    } else {
        xi
    }
}

/// Smooth Burgers solution on the unit circle before shock formation: solves
/// `u = u0(x − u t)` by bisection on the foot point. `bound` is `sup |u0|`.
pub fn burgers_characteristics(u0: impl Fn(f64) -> f64, bound: f64, t: f64, x: f64) -> f64 {
    // ξ ↦ ξ + t u0(ξ) is increasing before the shock time
    let (mut lo, mut hi) = (x - t * bound - 1e-12, x + t * bound + 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid + t * u0(mid.rem_euclid(1.0)) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    u0((0.5 * (lo + hi)).rem_euclid(1.0))
}

/// Burgers solution for `u0 = 1` on `[a, b]`, `0` elsewhere, valid until the
/// fan from `a` meets the shock from `b` at `t = 2(b − a)`.
pub fn burgers_pulse(a: f64, b: f64, t: f64, x: f64) -> f64 {
    let shock = b + 0.5 * t;
    if x <= a || x >= shock {
        0.0
    } else if x < a + t {
        (x - a) / t
    } else {
        1.0
    }
}

/// `u0(x − c t)` on the unit circle.
pub fn circle_transport(u0: impl Fn(f64) -> f64, speed: f64, t: f64, x: f64) -> f64 {
    u0((x - speed * t).rem_euclid(1.0))
}

/// Solid-body rotation at unit angular speed about `axis`: `u0(R(−t) x)`.
pub fn sphere_rotation(u0: impl Fn(&Vec3) -> f64, axis: &Vec3, t: f64, x: &Vec3) -> f64 {
    u0(&vec3::rotate(x, &vec3::normalize(axis), -t))
}

/// `½(1 + cos(π r / R))` for geodesic distance `r < R` from `center`, else 0.
pub fn cosine_bell(center: &Vec3, radius: f64, x: &Vec3) -> f64 {
    let r = vec3::angle(center, x);
    if r < radius {
        0.5 * (1.0 + (std::f64::consts::PI * r / radius).cos())
    } else {
        0.0
    }
}
