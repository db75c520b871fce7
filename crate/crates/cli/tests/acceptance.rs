//! Acceptance suite: every criterion runs in sequence and prints one
//! `PASS`/`FAIL` line. The process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use manifold_fv::analysis::oracles::{
    burgers_characteristics, burgers_pulse, circle_transport, cosine_bell, sphere_rotation,
};
use manifold_fv::analysis::{
    contraction_check, convergence_rate, default_radius_rule, empirical_young_measure, entropy_battery,
    entropy_residual, expansion_shock_trajectory, initial_leaf_terms, kruzkov_indices, l1_distance, l1_error,
    max_principle_check, measure_valued_residual, standard_battery, tol_entropy, YoungMeasureField,
};
use manifold_fv::boundary::{
    admissible_membership, classify_boundary_face, evolve_foliated, kruzkov_grid, weak_trace_window, BoundaryData,
    BoundaryValue, FaceCausality, FaceClass, NormalFlux, SpacetimeFlux,
};
use manifold_fv::flux::{make_product_flux, make_rotation_flux_sphere, FluxField, ScalarLaw, VectorField};
use manifold_fv::fv::{
    CompatibilityMode, FvSolver, NumericalFluxKind, SchemeConfig, SnapshotSchedule, State, Trajectory,
};
use manifold_fv::geometry::{
    build_circle_mesh, build_flrw_strip, build_sphere_mesh, build_torus_mesh, BoundaryTag, Mesh, ScaleFactor,
    SpatialTopology, WeightRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use NumericalFluxKind::{Godunov1d, LaxFriedrichs};

type Outcome = Result<String, String>;
type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn scheme(kind: NumericalFluxKind, cfl: f64, mode: CompatibilityMode) -> SchemeConfig {
    SchemeConfig::new(kind, cfl, mode)
}

fn linear() -> ScalarLaw {
    ScalarLaw::Linear { slope: 1.0 }
}

fn sine_weight(mean: f64, amplitude: f64) -> WeightRule {
    WeightRule::smooth(move |x| mean + amplitude * (2.0 * PI * x[0]).sin())
}

fn sci(values: &[f64], digits: usize) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.digits$e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn random_values(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// A closed mesh with a compatible flux and the schemes it supports.
struct Case {
    label: String,
    mesh: Arc<Mesh>,
    flux: FluxField,
    kinds: Vec<NumericalFluxKind>,
}

fn compatible_cases() -> Vec<Case> {
    let mut out = Vec::new();
    let circles = [
        ("circle uniform", build_circle_mesh(64, &WeightRule::Uniform(1.0))),
        ("circle sine-weight", build_circle_mesh(64, &sine_weight(2.0, 1.0))),
    ];
    for (name, mesh) in circles {
        let mesh = Arc::new(mesh.unwrap());
        for (lname, law) in [("advection", linear()), ("burgers", ScalarLaw::burgers())] {
            out.push(Case {
                label: format!("{name} {lname}"),
                mesh: mesh.clone(),
                flux: make_product_flux(law, VectorField::WeightedConstant([1.0, 0.0, 0.0])),
                kinds: vec![LaxFriedrichs, Godunov1d],
            });
        }
    }
    let tori = [
        ("torus uniform", build_torus_mesh(12, 12, &WeightRule::Uniform(1.0))),
        (
            "torus checkerboard",
            build_torus_mesh(12, 12, &WeightRule::checkerboard(12, 12, 1.0, 3.0)),
        ),
        ("torus sine-weight", build_torus_mesh(12, 12, &sine_weight(2.0, 1.5))),
    ];
    for (name, mesh) in tori {
        let mesh = Arc::new(mesh.unwrap());
        for (lname, law) in [("advection", linear()), ("burgers", ScalarLaw::burgers())] {
            out.push(Case {
                label: format!("{name} {lname}"),
                mesh: mesh.clone(),
                flux: make_product_flux(law, VectorField::WeightedConstant([1.0, 0.5, 0.0])),
                kinds: vec![LaxFriedrichs],
            });
        }
    }
    let sphere = Arc::new(build_sphere_mesh(2).unwrap());
    for (lname, law) in [("rotation", linear()), ("burgers rotation", ScalarLaw::burgers())] {
        out.push(Case {
            label: format!("sphere {lname}"),
            mesh: sphere.clone(),
            flux: make_rotation_flux_sphere(law, [0.0, 0.0, 1.0]).unwrap(),
            kinds: vec![LaxFriedrichs],
        });
    }
    out
}

/// Steps `n` times at the CFL step, calling `visit` after each step.
fn march(solver: &FvSolver, u0: State, n: usize, mut visit: impl FnMut(&State)) -> Result<(), String> {
    let mut s = u0;
    for i in 0..n {
        let dt = solver.cfl_timestep(&s.values, f64::INFINITY);
        s = solver.step(&s, dt, i).map_err(|e| e.to_string())?;
        visit(&s);
    }
    Ok(())
}

fn criterion_constants() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for case in compatible_cases() {
        for &kind in &case.kinds {
            for mode in [CompatibilityMode::Corrected, CompatibilityMode::SourceTerm] {
                let solver = FvSolver::new(case.mesh.clone(), case.flux.clone(), scheme(kind, 0.9, mode))
                    .map_err(|e| e.to_string())?;
                for c in [0.7, -1.3] {
                    let u0 = State::from_fn(case.mesh.clone(), |_| c);
                    let mut dev: f64 = 0.0;
                    march(&solver, u0, 1000, |s| {
                        dev = s.values.iter().fold(dev, |m, v| m.max((v - c).abs()));
                    })?;
                    runs += 1;
                    if dev > 1e-12 {
                        return Err(format!("{} {kind:?} {mode:?} c={c}: deviation {dev:.3e}", case.label));
                    }
                    worst = worst.max(dev);
                }
            }
        }
    }
    Ok(format!(
        "{runs} runs x 1000 steps, worst |u - c| = {worst:.2e} (limit 1e-12)"
    ))
}

fn criterion_conservation() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in compatible_cases() {
        for &kind in &case.kinds {
            let solver = FvSolver::new(
                case.mesh.clone(),
                case.flux.clone(),
                scheme(kind, 0.9, CompatibilityMode::Corrected),
            )
            .map_err(|e| e.to_string())?;
            let u0 = State::new(
                case.mesh.clone(),
                random_values(&mut rng, case.mesh.n_cells(), -1.0, 1.0),
            )
            .map_err(|e| e.to_string())?;
            let m0 = u0.mass();
            let scale = m0.abs().max(1.0);
            let mut drift: f64 = 0.0;
            march(&solver, u0, 1000, |s| drift = drift.max((s.mass() - m0).abs() / scale))?;
            runs += 1;
            if drift > 1e-12 {
                return Err(format!("{} {kind:?}: relative drift {drift:.3e}", case.label));
            }
            worst = worst.max(drift);
        }
    }
    Ok(format!(
        "{runs} random runs x 1000 steps, worst relative mass drift = {worst:.2e} (limit 1e-12)"
    ))
}

/// Seeded pair runs on the compatible contraction matrix, kept for the max
/// principle check.
struct PairRuns {
    label: String,
    pairs: Vec<(Trajectory, Trajectory)>,
}

fn contraction_matrix() -> Result<Vec<PairRuns>, String> {
    let circle = Arc::new(build_circle_mesh(200, &sine_weight(2.0, 1.0)).unwrap());
    let torus = Arc::new(build_torus_mesh(32, 32, &WeightRule::checkerboard(32, 32, 1.0, 3.0)).unwrap());
    let setups = [
        (
            "circle n=200 burgers godunov",
            circle.clone(),
            ScalarLaw::burgers(),
            [1.0, 0.0, 0.0],
            Godunov1d,
            0.5,
        ),
        (
            "circle n=200 advection lax-friedrichs",
            circle,
            linear(),
            [1.0, 0.0, 0.0],
            LaxFriedrichs,
            0.5,
        ),
        (
            "torus 32x32 burgers lax-friedrichs",
            torus.clone(),
            ScalarLaw::burgers(),
            [1.0, 0.5, 0.0],
            LaxFriedrichs,
            0.2,
        ),
        (
            "torus 32x32 advection lax-friedrichs",
            torus,
            linear(),
            [1.0, 0.5, 0.0],
            LaxFriedrichs,
            0.2,
        ),
    ];
    let mut out = Vec::new();
    for (label, mesh, law, v, kind, t) in setups {
        let flux = make_product_flux(law, VectorField::WeightedConstant(v));
        let solver = FvSolver::new(mesh.clone(), flux, scheme(kind, 0.9, CompatibilityMode::Corrected))
            .map_err(|e| e.to_string())?;
        let mut pairs = Vec::new();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = State::new(mesh.clone(), random_values(&mut rng, mesh.n_cells(), -1.0, 1.0)).unwrap();
            let b = State::new(mesh.clone(), random_values(&mut rng, mesh.n_cells(), -1.0, 1.0)).unwrap();
            pairs.push(
                solver
                    .evolve_pair(&a, &b, t, &SnapshotSchedule::EveryStep)
                    .map_err(|e| e.to_string())?,
            );
        }
        out.push(PairRuns {
            label: label.to_string(),
            pairs,
        });
    }
    Ok(out)
}

/// Burgers on a sine-weighted 8x8 torus with a constant field, whose
/// divergence does not vanish, run in source-term mode.
fn incompatible_growth() -> Result<(f64, usize), String> {
    let (mean, amp) = (2.0, 1.5);
    let mesh = Arc::new(build_torus_mesh(8, 8, &sine_weight(mean, amp)).unwrap());
    let flux =
        make_product_flux(ScalarLaw::burgers(), VectorField::Constant([1.0, 0.0, 0.0])).with_divergence(move |p| {
            2.0 * PI * amp * (2.0 * PI * p.x[0]).cos() / (mean + amp * (2.0 * PI * p.x[0]).sin())
        });
    let solver = FvSolver::new(
        mesh.clone(),
        flux,
        scheme(LaxFriedrichs, 0.9, CompatibilityMode::SourceTerm),
    )
    .map_err(|e| e.to_string())?;
    let (mut worst, mut growing) = (f64::NEG_INFINITY, 0);
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = State::new(mesh.clone(), random_values(&mut rng, 64, -1.0, 1.0)).unwrap();
        let b = State::new(mesh.clone(), random_values(&mut rng, 64, -1.0, 1.0)).unwrap();
        let (u, v) = solver
            .evolve_pair(&a, &b, 1.0, &SnapshotSchedule::EveryStep)
            .map_err(|e| e.to_string())?;
        let report = contraction_check(&u, &v).map_err(|e| e.to_string())?;
        worst = worst.max(report.max_increase);
        growing += usize::from(!report.nonincreasing);
    }
    Ok((worst, growing))
}

fn criterion_contraction(matrix: &[PairRuns]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for runs in matrix {
        for (seed, (u, v)) in runs.pairs.iter().enumerate() {
            let r = contraction_check(u, v).map_err(|e| e.to_string())?;
            if !r.nonincreasing {
                return Err(format!(
                    "{} seed {seed}: distance grew by {:.3e}",
                    runs.label, r.max_increase
                ));
            }
            worst = worst.max(r.max_increase);
        }
    }
    let (growth, growing) = incompatible_growth()?;
    if growing == 0 {
        return Err(format!(
            "compatible pairs contract, but the incompatible demo showed no growth (worst step {growth:.3e})"
        ));
    }
    Ok(format!(
        "compatible: {} pairs nonincreasing, worst step change {worst:.2e} (slack 1e-12); \
         incompatible demo (not claimed): {growing}/20 pairs grow, worst step increase {growth:.2e}",
        matrix.len() * 20
    ))
}

fn criterion_max_principle(matrix: &[PairRuns], strips: &[(Trajectory, (f64, f64))]) -> Outcome {
    let mut checked = 0;
    for runs in matrix {
        for (seed, (u, v)) in runs.pairs.iter().enumerate() {
            for tr in [u, v] {
                let r = max_principle_check(tr, None);
                if !r.holds {
                    return Err(format!(
                        "{} seed {seed}: range [{}, {}] left [{}, {}]",
                        runs.label, r.observed_min, r.observed_max, r.initial_min, r.initial_max
                    ));
                }
                checked += 1;
            }
        }
    }
    let sphere = Arc::new(build_sphere_mesh(3).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for law in [linear(), ScalarLaw::burgers()] {
        let solver = FvSolver::new(
            sphere.clone(),
            make_rotation_flux_sphere(law, [0.3, 0.0, 1.0]).unwrap(),
            SchemeConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        let u0 = State::new(sphere.clone(), random_values(&mut rng, sphere.n_cells(), -1.0, 2.0)).unwrap();
        let tr = solver
            .evolve(&u0, 1.0, &SnapshotSchedule::EveryStep)
            .map_err(|e| e.to_string())?;
        if !max_principle_check(&tr, None).holds {
            return Err("sphere random run left its initial range".into());
        }
        checked += 1;
    }
    for (tr, range) in strips {
        if !max_principle_check(tr, Some(*range)).holds {
            return Err("half-line strip run left the range of its data".into());
        }
        checked += 1;
    }
    Ok(format!(
        "{checked} trajectories checked at every step, no bound violated"
    ))
}

/// A monotone run at three refinement levels.
struct Ladder {
    label: &'static str,
    runs: Vec<Trajectory>,
    flux: FluxField,
    t_final: f64,
}

fn ladder(
    label: &'static str,
    meshes: Vec<Arc<Mesh>>,
    flux: FluxField,
    kind: NumericalFluxKind,
    u0: impl Fn(&[f64; 3]) -> f64,
    t_final: f64,
) -> Result<Ladder, String> {
    let runs = meshes
        .into_iter()
        .map(|m| {
            let solver = FvSolver::new(m.clone(), flux.clone(), scheme(kind, 0.9, CompatibilityMode::Corrected))
                .map_err(|e| e.to_string())?;
            let s = State::from_fn(m, |c| u0(&c.barycenter));
            solver
                .evolve(&s, t_final, &SnapshotSchedule::EveryStep)
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ladder {
        label,
        runs,
        flux,
        t_final,
    })
}

fn circles(ns: [usize; 3], weight: &WeightRule) -> Vec<Arc<Mesh>> {
    ns.iter()
        .map(|&n| Arc::new(build_circle_mesh(n, weight).unwrap()))
        .collect()
}

fn criterion_entropy() -> Outcome {
    let unit = WeightRule::Uniform(1.0);
    let sine = |x: &[f64; 3]| 0.5 + (2.0 * PI * x[0]).sin();
    let circle_flux = |law| make_product_flux(law, VectorField::WeightedConstant([1.0, 0.0, 0.0]));
    let ladders = vec![
        ladder(
            "circle burgers lax-friedrichs",
            circles([50, 100, 200], &unit),
            circle_flux(ScalarLaw::burgers()),
            LaxFriedrichs,
            sine,
            1.0,
        )?,
        ladder(
            "circle burgers godunov",
            circles([50, 100, 200], &unit),
            circle_flux(ScalarLaw::burgers()),
            Godunov1d,
            sine,
            1.0,
        )?,
        ladder(
            "circle advection godunov",
            circles([50, 100, 200], &unit),
            circle_flux(linear()),
            Godunov1d,
            sine,
            1.0,
        )?,
        ladder(
            "weighted circle burgers lax-friedrichs",
            circles([50, 100, 200], &sine_weight(2.0, 1.0)),
            circle_flux(ScalarLaw::burgers()),
            LaxFriedrichs,
            sine,
            0.5,
        )?,
        ladder(
            "torus burgers lax-friedrichs",
            [16, 32, 64]
                .iter()
                .map(|&n| Arc::new(build_torus_mesh(n, n, &WeightRule::Uniform(1.0)).unwrap()))
                .collect(),
            make_product_flux(ScalarLaw::burgers(), VectorField::WeightedConstant([1.0, 0.5, 0.0])),
            LaxFriedrichs,
            |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos(),
            0.3,
        )?,
        ladder(
            "sphere rotation lax-friedrichs",
            (2..=4).map(|l| Arc::new(build_sphere_mesh(l).unwrap())).collect(),
            make_rotation_flux_sphere(linear(), [0.0, 0.0, 1.0]).unwrap(),
            LaxFriedrichs,
            |x| cosine_bell(&[1.0, 0.0, 0.0], 1.0, x),
            1.0,
        )?,
    ];
    let mut lines = Vec::new();
    let mut evaluations = 0;
    for l in &ladders {
        let mut magnitudes = Vec::new();
        for tr in &l.runs {
            let battery = standard_battery(&tr.mesh, l.t_final).map_err(|e| e.to_string())?;
            let (lo, hi) = tr.snapshots[0]
                .values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let ks = kruzkov_indices(lo, hi, 33);
            let tol = tol_entropy(tr.mesh.h_max(), 1.0);
            let b = entropy_battery(tr, &l.flux, &ks, &battery, tol).map_err(|e| e.to_string())?;
            evaluations += b.reports.len();
            if battery.len() != 28 || b.reports.len() != 28 * 33 {
                return Err(format!("{}: unexpected battery size {}", l.label, b.reports.len()));
            }
            if b.violations > 0 {
                return Err(format!(
                    "{} h={:.4}: {} residuals below -{tol:.3e}, worst {:.3e}",
                    l.label,
                    tr.mesh.h_max(),
                    b.violations,
                    b.worst
                ));
            }
            magnitudes.push(b.worst.min(0.0).abs());
        }
        if !magnitudes.windows(2).all(|w| w[1] < w[0]) {
            return Err(format!(
                "{}: worst residual magnitudes {} do not decrease",
                l.label,
                sci(&magnitudes, 3)
            ));
        }
        lines.push(format!("{} {:.1e}", l.label, magnitudes[2]));
    }
    let mesh = Arc::new(build_circle_mesh(100, &WeightRule::Uniform(1.0)).unwrap());
    let fake = expansion_shock_trajectory(mesh.clone(), 0.5, 50);
    let battery = standard_battery(&mesh, 0.5).map_err(|e| e.to_string())?;
    let tol = tol_entropy(mesh.h_max(), 1.0);
    let flagged = entropy_battery(
        &fake,
        &circle_flux(ScalarLaw::burgers()),
        &kruzkov_indices(-1.0, 1.0, 33),
        &battery,
        tol,
    )
    .map_err(|e| e.to_string())?;
    if flagged.violations == 0 {
        return Err(format!(
            "expansion shock not flagged, worst residual {:.3e}",
            flagged.worst
        ));
    }
    Ok(format!(
        "{} ladders, {evaluations} residuals all >= -tol, magnitudes decrease (finest: {}); expansion shock flagged \
         ({} violations, worst {:.3e} < -{tol:.3e})",
        ladders.len(),
        lines.join(", "),
        flagged.violations,
        flagged.worst
    ))
}

#[allow(clippy::too_many_arguments)]
fn rate_of(
    label: &str,
    meshes: Vec<Arc<Mesh>>,
    flux: &FluxField,
    sch: &SchemeConfig,
    u0: &dyn Fn(&[f64; 3]) -> f64,
    exact: &dyn Fn(&[f64; 3]) -> f64,
    t_final: f64,
    min_rate: f64,
) -> Outcome {
    let mut errors = Vec::new();
    for m in meshes {
        let solver = FvSolver::new(m.clone(), flux.clone(), sch.clone()).map_err(|e| e.to_string())?;
        let s = State::from_fn(m.clone(), |c| u0(&c.barycenter));
        let tr = solver
            .evolve(&s, t_final, &SnapshotSchedule::Times(vec![]))
            .map_err(|e| e.to_string())?;
        let e = l1_error(&m, &tr.final_snapshot().values, |c| exact(&c.barycenter)).map_err(|e| e.to_string())?;
        errors.push((m.h_max(), e));
    }
    let rate = convergence_rate(&errors).map_err(|e| e.to_string())?;
    let errs: Vec<f64> = errors.iter().map(|e| e.1).collect();
    if !errs.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!("{label}: errors {} not strictly decreasing", sci(&errs, 3)));
    }
    if rate < min_rate {
        return Err(format!(
            "{label}: rate {rate:.3} < {min_rate} (errors {})",
            sci(&errs, 3)
        ));
    }
    Ok(format!("{label} {rate:.3}"))
}

fn criterion_convergence() -> Outcome {
    let unit = WeightRule::Uniform(1.0);
    let half = scheme(Godunov1d, 0.5, CompatibilityMode::Corrected);
    let adv = make_product_flux(linear(), VectorField::WeightedConstant([1.0, 0.0, 0.0]));
    let burgers = make_product_flux(ScalarLaw::burgers(), VectorField::WeightedConstant([1.0, 0.0, 0.0]));
    let sine = |x: f64| (2.0 * PI * x).sin();
    let box_ = |x: f64| if (0.2..0.5).contains(&x) { 1.0 } else { 0.0 };
    let bell = |x: &[f64; 3]| cosine_bell(&[1.0, 0.0, 0.0], 1.0, x);
    let axis = [0.0, 0.0, 1.0];
    let results = [
        rate_of(
            "circle transport",
            circles([100, 200, 400], &unit),
            &adv,
            &half,
            &|x| sine(x[0]),
            &|x| circle_transport(sine, 1.0, 1.0, x[0]),
            1.0,
            0.7,
        ),
        rate_of(
            "pre-shock burgers",
            circles([100, 200, 400], &unit),
            &burgers,
            &half,
            &|x| sine(x[0]),
            &|x| burgers_characteristics(sine, 1.0, 0.1, x[0]),
            0.1,
            0.7,
        ),
        rate_of(
            "post-shock burgers",
            circles([100, 200, 400], &unit),
            &burgers,
            &half,
            &|x| box_(x[0]),
            &|x| burgers_pulse(0.2, 0.5, 0.3, x[0]),
            0.3,
            0.5,
        ),
        rate_of(
            "sphere rotation",
            (3..=5).map(|l| Arc::new(build_sphere_mesh(l).unwrap())).collect(),
            &make_rotation_flux_sphere(linear(), axis).unwrap(),
            &SchemeConfig::default(),
            &bell,
            &|x| sphere_rotation(bell, &axis, 2.0 * PI, x),
            2.0 * PI,
            0.5,
        ),
    ];
    let mut parts = Vec::new();
    for r in results {
        parts.push(r?);
    }
    Ok(format!("fitted rates: {} (>= 0.7, 0.7, 0.5, 0.5)", parts.join(", ")))
}

/// Flat half-line Burgers runs on `[0, 1]` for three data sets at three
/// levels each. The runs are pushed to `strips` with their data range.
fn criterion_boundary(strips: &mut Vec<(Trajectory, (f64, f64))>) -> Outcome {
    let cases = [(-0.5, 1.0, -0.5), (-2.0, 1.0, -2.0), (0.5, -0.3, 0.5)];
    let flux = SpacetimeFlux::flat(ScalarLaw::burgers());
    let left = NormalFlux::spacetime(&flux, [0.0, -1.0]);
    let right = NormalFlux::spacetime(&flux, [0.0, 1.0]);
    let mut finest = Vec::new();
    for (u0, ul, ur) in cases {
        let mut per_level = Vec::new();
        for n in [100, 200, 400] {
            let st = build_flrw_strip(n, 1.0, ScaleFactor::Constant(1.0), SpatialTopology::Interval)
                .map_err(|e| e.to_string())?;
            let data = BoundaryData::new(
                vec![u0; n],
                Some(BoundaryValue::Constant(ul)),
                Some(BoundaryValue::Constant(ur)),
                2.0,
            )
            .map_err(|e| e.to_string())?;
            let tr = evolve_foliated(
                &st,
                &flux,
                &data,
                &scheme(Godunov1d, 0.9, CompatibilityMode::Corrected),
                &SnapshotSchedule::EveryStep,
            )
            .map_err(|e| e.to_string())?;
            let h = st.spatial.h_max();
            let tol = 0.5 * h.sqrt();
            let mut worst: f64 = 0.0;
            for t in [0.25, 0.5, 0.75, 1.0] {
                for (tag, u_b, g) in [(BoundaryTag::Left, ul, &left), (BoundaryTag::Right, ur, &right)] {
                    let trace = weak_trace_window(&tr, tag, 2, t, h.sqrt()).map_err(|e| e.to_string())?;
                    let m = admissible_membership(g, u_b, trace.value, &kruzkov_grid(u_b, trace.value, 0.5, 129), tol);
                    if !m.admissible {
                        return Err(format!(
                            "u0={u0} u_B={u_b} n={n} t={t} {tag:?}: trace {:.4} violates by {:.3e} > {tol:.3e}",
                            trace.value, m.violation
                        ));
                    }
                    worst = worst.max(m.violation);
                }
            }
            per_level.push(worst);
            strips.push((tr, (u0.min(ul).min(ur), u0.max(ul).max(ur))));
        }
        if !per_level.windows(2).all(|w| w[1] <= w[0] + 1e-14) || per_level[2] > 0.5 * per_level[0].max(1e-14) {
            return Err(format!(
                "u0={u0} u_B={ul}: violations {} do not shrink",
                sci(&per_level, 3)
            ));
        }
        finest.push(per_level[2]);
    }
    // Brute force against the classical set for Burgers at a left boundary.
    let classical = |u_b: f64, u: f64| {
        if u_b >= 0.0 {
            u == u_b || u <= -u_b
        } else {
            u <= 0.0
        }
    };
    let values: Vec<f64> = (0..=200).map(|i| -2.0 + 4.0 * i as f64 / 200.0).collect();
    let mut agreement = Vec::new();
    for nk in [33, 129, 513] {
        let ks: Vec<f64> = (0..nk).map(|i| -2.5 + 5.0 * i as f64 / (nk - 1) as f64).collect();
        let (mut hit, mut total) = (0, 0);
        for u_b in [-1.0, -0.3, 0.5, 1.0] {
            for &u in &values {
                let m = admissible_membership(&left, u_b, u, &ks, 1e-12);
                hit += usize::from(m.admissible == classical(u_b, u));
                total += 1;
            }
        }
        agreement.push(hit as f64 / total as f64);
    }
    if agreement[2] < 0.95 {
        return Err(format!(
            "grid agreement with the classical set {agreement:.4?} < 95% at the finest grid"
        ));
    }
    Ok(format!(
        "all traces admissible at t = 0.25..1 for n = 100/200/400, finest violations {finest_s}; \
         agreement with the classical set {:.1}% / {:.1}% / {:.1}% for 33/129/513 indices",
        100.0 * agreement[0],
        100.0 * agreement[1],
        100.0 * agreement[2],
        finest_s = sci(&finest, 1)
    ))
}

fn criterion_spacelike() -> Outcome {
    let laws: Vec<(RealFn, RealFn)> = vec![
        (Arc::new(|u| u), Arc::new(|_| 1.0)),
        (Arc::new(|u| 2.0 * u), Arc::new(|_| 2.0)),
        (Arc::new(|u| u + u * u * u / 3.0), Arc::new(|u| 1.0 + u * u)),
        (Arc::new(|u| u + 0.5 * u.sin()), Arc::new(|u| 1.0 + 0.5 * u.cos())),
        (Arc::new(f64::exp), Arc::new(f64::exp)),
    ];
    let targets: Vec<f64> = (0..9).map(|i| -1.95 + 0.45 * i as f64).collect();
    let (mut configs, mut matched) = (0, 0);
    for (value, deriv) in &laws {
        // `a(t)` of the leaf scales the conormal; sign is what matters.
        for scale in [1.0, 0.4, 3.0] {
            for side in [-1.0, 1.0] {
                let (v, d) = (value.clone(), deriv.clone());
                let g = NormalFlux::new(move |u| side * scale * v(u), move |u| side * scale * d(u));
                let class = classify_boundary_face(&g, 0, FaceCausality::SpaceLike, (-2.0, 2.0), 41)
                    .map_err(|e| e.to_string())?
                    .class;
                let expected = if side < 0.0 {
                    FaceClass::SpacelikeInitial
                } else {
                    FaceClass::SpacelikeFinal
                };
                if class != expected {
                    return Err(format!("leaf classified {} for conormal sign {side}", class.name()));
                }
                for &u_b in &targets {
                    // grid values that only differ from u_B by roundoff are replaced by u_B itself
                    let mut samples: Vec<f64> = (0..=40)
                        .map(|i| -2.0 + 0.1 * i as f64)
                        .filter(|u| (u - u_b).abs() > 1e-9)
                        .collect();
                    samples.push(u_b);
                    let admitted: Vec<f64> = samples
                        .iter()
                        .copied()
                        .filter(|&u| {
                            admissible_membership(&g, u_b, u, &kruzkov_grid(u_b, u, 0.5, 129), 1e-12).admissible
                        })
                        .collect();
                    let singleton = admitted.iter().all(|&u| u == u_b) && admitted.contains(&u_b);
                    let full = admitted.len() == samples.len();
                    configs += 1;
                    matched += usize::from(if side < 0.0 { singleton } else { full });
                }
            }
        }
    }
    if matched != configs {
        return Err(format!("{matched}/{configs} configurations match the sign analysis"));
    }
    Ok(format!(
        "{matched}/{configs} configurations match: entering conormal gives {{u_B}}, leaving conormal the full range"
    ))
}

fn criterion_flat_reduction() -> Outcome {
    let n = 128;
    let times = SnapshotSchedule::Times(vec![0.1, 0.2, 0.3, 0.4]);
    let profiles: [(&str, RealFn); 2] = [
        ("sine", Arc::new(|x| 0.5 + (2.0 * PI * x).sin())),
        ("riemann", Arc::new(|x| if x < 0.5 { 1.0 } else { -0.5 })),
    ];
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for (lname, law) in [("burgers", ScalarLaw::burgers()), ("advection", linear())] {
        for kind in [LaxFriedrichs, Godunov1d] {
            for (pname, u0) in &profiles {
                let sch = scheme(kind, 0.9, CompatibilityMode::Corrected);
                let st = build_flrw_strip(n, 0.5, ScaleFactor::Constant(1.0), SpatialTopology::Circle)
                    .map_err(|e| e.to_string())?;
                let init: Vec<f64> = st.spatial.cells.iter().map(|c| u0(c.barycenter[0])).collect();
                let data = BoundaryData::new(init.clone(), None, None, 2.0).map_err(|e| e.to_string())?;
                let strip = evolve_foliated(&st, &SpacetimeFlux::flat(law.clone()), &data, &sch, &times)
                    .map_err(|e| e.to_string())?;
                let mesh = Arc::new(build_circle_mesh(n, &WeightRule::Uniform(1.0)).unwrap());
                let solver = FvSolver::new(
                    mesh.clone(),
                    make_product_flux(law.clone(), VectorField::Constant([1.0, 0.0, 0.0])),
                    sch,
                )
                .map_err(|e| e.to_string())?;
                let closed = solver
                    .evolve(&State::new(mesh.clone(), init).unwrap(), 0.5, &times)
                    .map_err(|e| e.to_string())?;
                if strip.snapshots.len() != closed.snapshots.len() {
                    return Err(format!("{lname} {kind:?} {pname}: snapshot counts differ"));
                }
                for (a, b) in strip.snapshots.iter().zip(&closed.snapshots) {
                    if a.time != b.time {
                        return Err(format!(
                            "{lname} {kind:?} {pname}: snapshot times {} vs {}",
                            a.time, b.time
                        ));
                    }
                    let d = l1_distance(&mesh, &a.values, &b.values).map_err(|e| e.to_string())?;
                    worst = worst.max(d);
                    compared += 1;
                }
                if worst > 1e-12 {
                    return Err(format!("{lname} {kind:?} {pname}: L1 gap {worst:.3e} > 1e-12"));
                }
            }
        }
    }
    Ok(format!(
        "{compared} snapshots compared, worst L1 gap {worst:.2e} (limit 1e-12)"
    ))
}

fn criterion_young() -> Outcome {
    let unit = WeightRule::Uniform(1.0);
    let flux = make_product_flux(ScalarLaw::burgers(), VectorField::WeightedConstant([1.0, 0.0, 0.0]));
    let sch = scheme(Godunov1d, 0.9, CompatibilityMode::Corrected);
    let runs = circles([100, 200, 400], &unit)
        .into_iter()
        .map(|m| {
            let solver = FvSolver::new(m.clone(), flux.clone(), sch.clone()).map_err(|e| e.to_string())?;
            let s = State::from_fn(m, |c| (2.0 * PI * c.barycenter[0]).sin());
            solver
                .evolve(&s, 0.3, &SnapshotSchedule::Times(vec![0.1, 0.2]))
                .map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&Trajectory> = runs.iter().collect();
    let mut finest = Vec::new();
    for x in [0.05, 0.15, 0.3, 0.7, 0.85] {
        let y = empirical_young_measure(&refs, 0.3, &[x, 0.0, 0.0], default_radius_rule).map_err(|e| e.to_string())?;
        let var: Vec<f64> = y.levels.iter().map(|l| l.variance).collect();
        if !var.windows(2).all(|w| w[1] < w[0]) {
            return Err(format!(
                "variance at x = {x} does not strictly decrease: {}",
                sci(&var, 3)
            ));
        }
        finest.push(var[2]);
    }

    let m = Arc::new(build_circle_mesh(60, &unit).unwrap());
    let solver = FvSolver::new(m.clone(), flux.clone(), sch).map_err(|e| e.to_string())?;
    let tr = solver
        .evolve(
            &State::from_fn(m.clone(), |c| 0.5 + (2.0 * PI * c.barycenter[0]).sin()),
            0.4,
            &SnapshotSchedule::EveryStep,
        )
        .map_err(|e| e.to_string())?;
    let dirac = YoungMeasureField::dirac(&tr);
    let mut gap: f64 = 0.0;
    let mut count = 0;
    for phi in standard_battery(&m, 0.4).map_err(|e| e.to_string())? {
        let boundary = initial_leaf_terms(&tr, &phi);
        for k in kruzkov_indices(-0.5, 1.5, 9) {
            let a = entropy_residual(&tr, &flux, k, &phi, 0.0)
                .map_err(|e| e.to_string())?
                .residual;
            let b = measure_valued_residual(&tr, &dirac, k, &phi, &flux, &boundary).map_err(|e| e.to_string())?;
            gap = gap.max((a - b).abs());
            count += 1;
        }
    }
    if gap > 1e-10 {
        return Err(format!("Dirac reduction differs by {gap:.3e}"));
    }
    Ok(format!(
        "variance strictly decreases at 5 points (finest {finest_s}); Dirac reduction matches on {count} pairs \
         within {gap:.1e}",
        finest_s = sci(&finest, 1)
    ))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn criterion_determinism() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let invocations: [(&str, &str); 3] = [
        ("run", "torus_incompatible.json"),
        ("verify", "torus_incompatible.json"),
        ("verify", "burgers_half_line.json"),
    ];
    let mut files = 0;
    for (i, (cmd, cfg)) in invocations.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = tmp.path().join(format!("{i}-{rep}"));
            let status = Command::new(env!("CARGO_BIN_EXE_mfv"))
                .arg(cmd)
                .arg("--config")
                .arg(configs.join(cfg))
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?
                .status;
            if status.code().is_none_or(|c| c > 1) {
                return Err(format!("mfv {cmd} {cfg} exited with {status}"));
            }
            outputs.push(csv_files(&out));
        }
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            return Err(format!("mfv {cmd} {cfg}: CSV outputs differ between invocations"));
        }
        files += outputs[0].len();
    }
    Ok(format!(
        "{} invocation pairs, {files} CSV files byte-identical",
        invocations.len()
    ))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn main() {
    let started = Instant::now();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, (outcome, secs): (Outcome, f64)| match outcome {
        Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{secs:.1}s]"),
        Err(detail) => {
            failed += 1;
            println!("criterion {n:>2} FAIL  {name}: {detail} [{secs:.1}s]");
        }
    };

    report(1, "constant preservation", timed(criterion_constants));
    report(2, "conservation", timed(criterion_conservation));
    let (matrix, matrix_secs) = timed(contraction_matrix);
    let (contraction, secs) = timed(|| {
        matrix
            .as_ref()
            .map_err(Clone::clone)
            .and_then(|m| criterion_contraction(m))
    });
    report(3, "L1 contraction", (contraction, secs + matrix_secs));
    // the half-line runs feed the max principle check as well
    let mut strips = Vec::new();
    let boundary = timed(|| criterion_boundary(&mut strips));
    report(
        4,
        "max principle",
        timed(|| {
            matrix
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|m| criterion_max_principle(m, &strips))
        }),
    );
    report(5, "entropy inequality", timed(criterion_entropy));
    report(6, "oracle convergence", timed(criterion_convergence));
    report(7, "boundary admissibility", boundary);
    report(8, "space-like dichotomy", timed(criterion_spacelike));
    report(9, "flat reduction", timed(criterion_flat_reduction));
    report(10, "Young-measure concentration", timed(criterion_young));
    report(11, "determinism", timed(criterion_determinism));

    println!(
        "acceptance: {} of 11 criteria passed in {:.1}s",
        11 - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
