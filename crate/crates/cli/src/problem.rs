//! Turns a validated configuration into meshes, fluxes, data and oracles.

use std::f64::consts::PI;
use std::sync::Arc;

use manifold_fv::analysis::oracles;
use manifold_fv::boundary::{evolve_foliated, BoundaryData, BoundaryValue, SpacetimeFlux};
use manifold_fv::flux::{make_product_flux, make_rotation_flux_sphere, FluxField, ScalarLaw, VectorField};
use manifold_fv::fv::{
    CompatibilityMode, FvSolver, NumericalFluxKind, SchemeConfig, SnapshotSchedule, State, Trajectory,
};
use manifold_fv::geometry::vec3::{self, Vec3};
use manifold_fv::geometry::{
    build_circle_mesh, build_flrw_strip, build_sphere_mesh, build_torus_mesh, FoliatedSpacetime, Mesh, ScaleFactor,
    SpatialTopology, Topology, WeightRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    FluxId, GeometrySpec, InitialSpec, LawSpec, ModeSpec, NumericalFluxSpec, RunConfig, ScaleSpec, StripTopology,
    WeightSpec,
};

pub type PointFn = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

pub enum Domain {
    Closed(Arc<Mesh>),
    Strip(FoliatedSpacetime),
}

pub struct Problem {
    pub config: RunConfig,
    pub domain: Domain,
    /// Spatial flux; on the strip this is `h(ū)` along `+x`.
    pub flux: FluxField,
    pub scheme: SchemeConfig,
    pub initial: Vec<f64>,
    pub boundary: Option<BoundaryData>,
}

fn weight_rule(spec: &WeightSpec, torus: Option<(usize, usize)>) -> WeightRule {
    match spec.clone() {
        WeightSpec::Uniform { value } => WeightRule::Uniform(value),
        WeightSpec::Sine { mean, amplitude } => WeightRule::smooth(move |x| mean + amplitude * (2.0 * PI * x[0]).sin()),
        WeightSpec::Checkerboard { low, high } => {
            let (nx, ny) = torus.unwrap_or((1, 1));
            WeightRule::checkerboard(nx, ny, low, high)
        }
        WeightSpec::PerCell { values } => WeightRule::PerCell(values),
    }
}

fn law(spec: Option<LawSpec>, default: LawSpec) -> ScalarLaw {
    match spec.unwrap_or(default) {
        LawSpec::Linear => ScalarLaw::Linear { slope: 1.0 },
        LawSpec::Burgers => ScalarLaw::burgers(),
    }
}

/// Pointwise initial profile, `None` for per-cell random data.
pub fn point_profile(spec: &InitialSpec, topology: Topology) -> Option<PointFn> {
    let f: PointFn = match spec.clone() {
        InitialSpec::Constant { value } => Arc::new(move |_| value),
        InitialSpec::Sine {
            mean,
            amplitude,
            frequency,
            axis,
        } => Arc::new(move |x| mean + amplitude * (2.0 * PI * frequency as f64 * x[axis]).sin()),
        InitialSpec::CosineBell {
            center,
            radius,
            height,
            background,
        } => {
            if topology == Topology::Sphere {
                let c = vec3::normalize(&center);
                Arc::new(move |x| background + height * oracles::cosine_bell(&c, radius, x))
            } else {
                Arc::new(move |x| {
                    let r = topology.distance(&center, x);
                    if r < radius {
                        background + height * 0.5 * (1.0 + (PI * r / radius).cos())
                    } else {
                        background
                    }
                })
            }
        }
        InitialSpec::Riemann { left, right, position } => Arc::new(move |x| if x[0] < position { left } else { right }),
        InitialSpec::Box {
            start,
            end,
            inside,
            outside,
        } => Arc::new(move |x| if x[0] >= start && x[0] <= end { inside } else { outside }),
        InitialSpec::Random { .. } => return None,
    };
    Some(f)
}

/// Cell values of the initial profile; random data draw from `seed`.
pub fn initial_values(spec: &InitialSpec, mesh: &Mesh, seed: u64) -> Vec<f64> {
    match (spec, point_profile(spec, mesh.topology)) {
        (InitialSpec::Random { low, high }, _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..mesh.n_cells()).map(|_| rng.gen_range(*low..*high)).collect()
        }
        (_, Some(f)) => mesh.cells.iter().map(|c| f(&c.barycenter)).collect(),
        (_, None) => unreachable!("only random data lack a point profile"),
    }
}

fn scheme_config(config: &RunConfig) -> SchemeConfig {
    let s = &config.scheme;
    SchemeConfig {
        numerical_flux: match s.numerical_flux {
            NumericalFluxSpec::LaxFriedrichs => NumericalFluxKind::LaxFriedrichs,
            NumericalFluxSpec::Godunov => NumericalFluxKind::Godunov1d,
        },
        cfl: s.cfl,
        mode: match s.mode {
            ModeSpec::Corrected => CompatibilityMode::Corrected,
            ModeSpec::SourceTerm => CompatibilityMode::SourceTerm,
        },
        speed_range: s.speed_range.map(|[a, b]| (a, b)),
    }
}

fn build_flux(config: &RunConfig) -> manifold_fv::Result<FluxField> {
    let f = &config.flux;
    Ok(match f.id {
        FluxId::AdvectionCircle => make_product_flux(
            ScalarLaw::Linear {
                slope: f.speed.unwrap_or(1.0),
            },
            VectorField::WeightedConstant([1.0, 0.0, 0.0]),
        ),
        FluxId::BurgersCircle => {
            make_product_flux(ScalarLaw::burgers(), VectorField::WeightedConstant([1.0, 0.0, 0.0]))
        }
        FluxId::TorusWeightedAdvection => {
            let [vx, vy] = f.velocity.unwrap_or([1.0, 0.5]);
            make_product_flux(
                law(f.law, LawSpec::Linear),
                VectorField::WeightedConstant([vx, vy, 0.0]),
            )
        }
        FluxId::TorusIncompatible => {
            let flux = make_product_flux(law(f.law, LawSpec::Burgers), VectorField::Constant([1.0, 0.0, 0.0]));
            match &config.geometry {
                // div_ω (1, 0) = ∂_x ω̄ / ω̄
                GeometrySpec::Torus {
                    weight: WeightSpec::Sine { mean, amplitude },
                    ..
                } => {
                    let (m, a) = (*mean, *amplitude);
                    flux.with_divergence(move |p| {
                        2.0 * PI * a * (2.0 * PI * p.x[0]).cos() / (m + a * (2.0 * PI * p.x[0]).sin())
                    })
                }
                _ => flux.with_divergence(|_| 0.0),
            }
        }
        FluxId::SphereRotation => {
            make_rotation_flux_sphere(law(f.law, LawSpec::Linear), f.axis.unwrap_or([0.0, 0.0, 1.0]))?
        }
        FluxId::BurgersStrip => make_product_flux(ScalarLaw::burgers(), VectorField::Constant([1.0, 0.0, 0.0])),
    }
    .named(f.id.name()))
}

impl Problem {
    /// Builds everything the configuration describes. Expects a config that
    /// passed [`RunConfig::validate`].
    pub fn build(config: &RunConfig) -> manifold_fv::Result<Problem> {
        let domain = match &config.geometry {
            GeometrySpec::Circle { n, weight } => {
                Domain::Closed(Arc::new(build_circle_mesh(*n, &weight_rule(weight, None))?))
            }
            GeometrySpec::Torus { nx, ny, weight } => Domain::Closed(Arc::new(build_torus_mesh(
                *nx,
                *ny,
                &weight_rule(weight, Some((*nx, *ny))),
            )?)),
            GeometrySpec::Sphere { level } => Domain::Closed(Arc::new(build_sphere_mesh(*level)?)),
            GeometrySpec::Strip { n, topology, scale } => {
                let scale = match scale {
                    ScaleSpec::Constant { value } => ScaleFactor::Constant(*value),
                    ScaleSpec::Linear { a0, rate } => ScaleFactor::Linear { a0: *a0, rate: *rate },
                    ScaleSpec::Exponential { a0, rate } => ScaleFactor::Exponential { a0: *a0, rate: *rate },
                };
                let topology = match topology {
                    StripTopology::Circle => SpatialTopology::Circle,
                    StripTopology::Interval => SpatialTopology::Interval,
                };
                Domain::Strip(build_flrw_strip(*n, config.t_final, scale, topology)?)
            }
        };
        let mesh = match &domain {
            Domain::Closed(m) => m.clone(),
            Domain::Strip(s) => s.spatial.clone(),
        };
        let initial = initial_values(&config.initial, &mesh, config.seed);
        let boundary = match &domain {
            Domain::Strip(_) => {
                let (left, right, sup) = match &config.boundary {
                    Some(b) => (Some(b.left), Some(b.right), b.sup_bound),
                    None => (None, None, None),
                };
                let observed = initial
                    .iter()
                    .chain(left.iter())
                    .chain(right.iter())
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                Some(BoundaryData::new(
                    initial.clone(),
                    left.map(BoundaryValue::Constant),
                    right.map(BoundaryValue::Constant),
                    sup.unwrap_or(observed),
                )?)
            }
            Domain::Closed(_) => None,
        };
        Ok(Problem {
            config: config.clone(),
            domain,
            flux: build_flux(config)?,
            scheme: scheme_config(config),
            initial,
            boundary,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        match &self.domain {
            Domain::Closed(m) => m,
            Domain::Strip(s) => &s.spatial,
        }
    }

    pub fn is_strip(&self) -> bool {
        matches!(self.domain, Domain::Strip(_))
    }

    pub fn spacetime_flux(&self) -> SpacetimeFlux {
        SpacetimeFlux::flat(self.flux.law.clone())
    }

    pub fn solve(&self, schedule: &SnapshotSchedule) -> manifold_fv::Result<Trajectory> {
        self.solve_from(&self.initial, schedule)
    }

    pub fn solve_from(&self, initial: &[f64], schedule: &SnapshotSchedule) -> manifold_fv::Result<Trajectory> {
        match &self.domain {
            Domain::Closed(mesh) => {
                let solver = FvSolver::new(mesh.clone(), self.flux.clone(), self.scheme.clone())?;
                let u0 = State::new(mesh.clone(), initial.to_vec())?;
                solver.evolve(&u0, self.config.t_final, schedule)
            }
            Domain::Strip(st) => {
                let mut data = self.boundary.clone().expect("strip problems carry boundary data");
                data.initial = initial.to_vec();
                let data = BoundaryData::new(data.initial, data.left, data.right, data.sup_bound)?;
                evolve_foliated(st, &self.spacetime_flux(), &data, &self.scheme, schedule)
            }
        }
    }

    /// Two runs on a closed mesh sharing one step sequence.
    pub fn solve_pair(
        &self,
        u0: &[f64],
        v0: &[f64],
        schedule: &SnapshotSchedule,
    ) -> manifold_fv::Result<(Trajectory, Trajectory)> {
        let Domain::Closed(mesh) = &self.domain else {
            return Err(manifold_fv::Error::InvalidArgument(
                "paired runs need a closed mesh".into(),
            ));
        };
        let solver = FvSolver::new(mesh.clone(), self.flux.clone(), self.scheme.clone())?;
        solver.evolve_pair(
            &State::new(mesh.clone(), u0.to_vec())?,
            &State::new(mesh.clone(), v0.to_vec())?,
            self.config.t_final,
            schedule,
        )
    }

    /// Exact solution at time `t` as a function of position, when one is
    /// registered for this flux, profile, density and time.
    pub fn oracle(&self, t: f64) -> Option<PointFn> {
        let c = &self.config;
        let unit_weight = match &c.geometry {
            GeometrySpec::Circle { weight, .. } | GeometrySpec::Torus { weight, .. } => weight.is_unit(),
            GeometrySpec::Sphere { .. } => true,
            GeometrySpec::Strip { .. } => false,
        };
        if !unit_weight {
            return None;
        }
        let u0 = point_profile(&c.initial, self.mesh().topology)?;
        if let InitialSpec::Constant { value } = c.initial {
            return Some(Arc::new(move |_| value));
        }
        match c.flux.id {
            FluxId::AdvectionCircle => {
                let speed = c.flux.speed.unwrap_or(1.0);
                Some(Arc::new(move |x| {
                    oracles::circle_transport(|s| u0(&[s, 0.0, 0.0]), speed, t, x[0])
                }))
            }
            FluxId::TorusWeightedAdvection if c.flux.law.unwrap_or(LawSpec::Linear) == LawSpec::Linear => {
                let [vx, vy] = c.flux.velocity.unwrap_or([1.0, 0.5]);
                Some(Arc::new(move |x| {
                    u0(&[(x[0] - vx * t).rem_euclid(1.0), (x[1] - vy * t).rem_euclid(1.0), 0.0])
                }))
            }
            FluxId::SphereRotation if c.flux.law.unwrap_or(LawSpec::Linear) == LawSpec::Linear => {
                let axis = c.flux.axis.unwrap_or([0.0, 0.0, 1.0]);
                Some(Arc::new(move |x| oracles::sphere_rotation(|y| u0(y), &axis, t, x)))
            }
            FluxId::BurgersCircle => burgers_oracle(&c.initial, t),
            _ => None,
        }
    }
}

fn burgers_oracle(spec: &InitialSpec, t: f64) -> Option<PointFn> {
    match *spec {
        InitialSpec::Sine {
            mean,
            amplitude,
            frequency,
            axis: 0,
        } => {
            // characteristics cross at t = 1 / max(-u0')
            let steepest = 2.0 * PI * frequency as f64 * amplitude.abs();
            if t * steepest >= 1.0 {
                return None;
            }
            let u0 = move |x: f64| mean + amplitude * (2.0 * PI * frequency as f64 * x).sin();
            let bound = mean.abs() + amplitude.abs();
            Some(Arc::new(move |x| oracles::burgers_characteristics(u0, bound, t, x[0])))
        }
        InitialSpec::Box {
            start,
            end,
            inside,
            outside,
        } if outside == 0.0 && inside > 0.0 => {
            // u = c w(c t, x) for the unit pulse w, valid until the fan meets the shock
            let s = inside * t;
            let fits = start >= 0.0 && end + 0.5 * s < 1.0 && s <= 2.0 * (end - start);
            fits.then(|| -> PointFn { Arc::new(move |x| inside * oracles::burgers_pulse(start, end, s, x[0])) })
        }
        _ => None,
    }
}
