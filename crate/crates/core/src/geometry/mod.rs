//! Meshes on the supported manifolds and the volume form carried by them.
//!
//! A [`Mesh`] stores, for every cell, its ω-measure `|K|_ω = ∫_K ω` and, for
//! every face, the oriented unit normal 1-form together with quadrature nodes
//! carrying the trace of the volume-form density. These are the discrete
//! carriers of the weak pairing `∫ ⟨dθ, f(u)⟩ ω` used by the solver.

mod circle;
mod foliation;
mod sphere;
mod torus;
pub mod vec3;

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
pub use circle::{build_circle_mesh, build_interval_mesh};
pub use foliation::{build_flrw_strip, FoliatedSpacetime, ScaleFactor, SpatialTopology};
pub use sphere::{build_sphere_mesh, MAX_SPHERE_LEVEL};
pub use torus::build_torus_mesh;
use vec3::Vec3;

/// Global shape of the meshed manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Circle,
    Torus,
    Sphere,
    Interval,
}

impl Topology {
    pub fn is_closed(self) -> bool {
        !matches!(self, Topology::Interval)
    }

    pub fn name(self) -> &'static str {
        match self {
            Topology::Circle => "circle",
            Topology::Torus => "torus",
            Topology::Sphere => "sphere",
            Topology::Interval => "interval-strip",
        }
    }

    /// Intrinsic distance between two points given in the mesh's coordinates.
    pub fn distance(self, a: &Vec3, b: &Vec3) -> f64 {
        match self {
            Topology::Circle => periodic_delta(b[0] - a[0]).abs(),
            Topology::Interval => (b[0] - a[0]).abs(),
            Topology::Torus => {
                let dx = periodic_delta(b[0] - a[0]);
                let dy = periodic_delta(b[1] - a[1]);
                dx.hypot(dy)
            }
            Topology::Sphere => vec3::angle(a, b),
        }
    }
}

/// Wraps a coordinate difference on the unit period into `[-1/2, 1/2)`.
pub fn periodic_delta(d: f64) -> f64 {
    d - (d + 0.5).floor()
}

/// Which side of a 1D interval a boundary face sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceNeighbor {
    Cell(usize),
    Boundary(BoundaryTag),
}

/// A face quadrature node: position, weight in the face's own measure, the
/// owner-outward unit normal 1-form at the node, and the trace of `ω̄` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub point: Vec3,
    pub weight: f64,
    pub normal: Vec3,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    /// `|K|_ω`.
    pub measure: f64,
    /// Coordinate (unweighted) measure of the cell.
    pub chart_measure: f64,
    pub barycenter: Vec3,
    /// Incircle diameter (2D) or length (1D).
    pub h: f64,
    /// Faces bounding the cell, with `+1` when the cell owns the face.
    pub faces: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: usize,
    pub owner: usize,
    pub neighbor: FaceNeighbor,
    /// Geometric measure `|e|` (arc length, segment length, or 1 for points).
    pub measure: f64,
    /// Owner-outward unit normal at the face midpoint.
    pub normal: Vec3,
    /// Representative trace of `ω̄` on the face (mean over nodes).
    pub omega: f64,
    /// `|ω̄_K − ω̄_L|` for interior faces, zero on boundary faces.
    pub weight_jump: f64,
    pub nodes: Vec<QuadNode>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.neighbor, FaceNeighbor::Boundary(_))
    }

    pub fn neighbor_cell(&self) -> Option<usize> {
        match self.neighbor {
            FaceNeighbor::Cell(c) => Some(c),
            FaceNeighbor::Boundary(_) => None,
        }
    }
}

/// How the volume-form density is evaluated away from cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// One value per cell; jumps across faces are allowed.
    PiecewiseConstant,
    /// A closure sampled at cell midpoints and face quadrature nodes.
    Smooth,
}

/// Per-cell weights `ω̄_K` of `ω = ω̄ dx¹…dxⁿ` and the uniform lower bound `ω_*`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeForm {
    pub weights: Vec<f64>,
    pub lower_bound: f64,
    pub mode: WeightMode,
}

pub type WeightFn = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

/// Rule producing the volume-form density of a mesh.
#[derive(Clone)]
pub enum WeightRule {
    Uniform(f64),
    PerCell(Vec<f64>),
    Smooth(WeightFn),
}

impl std::fmt::Debug for WeightRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightRule::Uniform(c) => write!(f, "Uniform({c})"),
            WeightRule::PerCell(w) => write!(f, "PerCell({} values)", w.len()),
            WeightRule::Smooth(_) => write!(f, "Smooth(..)"),
        }
    }
}

impl WeightRule {
    pub fn smooth(f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static) -> Self {
        WeightRule::Smooth(Arc::new(f))
    }

    /// Alternating `low`/`high` weights on an `nx × ny` torus grid.
    pub fn checkerboard(nx: usize, ny: usize, low: f64, high: f64) -> Self {
        let w = (0..nx * ny)
            .map(|id| {
                if (id % nx + id / nx).is_multiple_of(2) {
                    low
                } else {
                    high
                }
            })
            .collect();
        WeightRule::PerCell(w)
    }

    fn mode(&self) -> WeightMode {
        match self {
            WeightRule::Smooth(_) => WeightMode::Smooth,
            _ => WeightMode::PiecewiseConstant,
        }
    }
}

/// Cell geometry before the volume form is attached.
#[derive(Debug, Clone)]
pub(crate) struct RawCell {
    pub chart_measure: f64,
    pub barycenter: Vec3,
    pub h: f64,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct RawFace {
    pub owner: usize,
    pub neighbor: FaceNeighbor,
    pub measure: f64,
    pub normal: Vec3,
    /// `(point, weight, normal)` triples.
    pub nodes: Vec<(Vec3, f64, Vec3)>,
}

/// A discretized manifold with its volume form. Immutable once built.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dimension: usize,
    pub topology: Topology,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub volume_form: VolumeForm,
    pub total_volume: f64,
    /// Vertex coordinates and per-cell vertex lists, used for export.
    pub points: Vec<Vec3>,
    pub cell_vertices: Vec<Vec<usize>>,
    /// Per-cell tangent frames (sphere only).
    pub tangent_frames: Option<Vec<[Vec3; 2]>>,
}

pub(crate) struct MeshParts {
    pub dimension: usize,
    pub topology: Topology,
    pub cells: Vec<RawCell>,
    pub faces: Vec<RawFace>,
    pub points: Vec<Vec3>,
    pub tangent_frames: Option<Vec<[Vec3; 2]>>,
}

impl MeshParts {
    /// Attaches the volume form and checks the mesh invariants.
    pub fn finish(self, rule: &WeightRule) -> Result<Mesh> {
        let n = self.cells.len();
        let weights: Vec<f64> = match rule {
            WeightRule::Uniform(c) => vec![*c; n],
            WeightRule::PerCell(w) => {
                if w.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "per-cell weight list has {} entries for {} cells",
                        w.len(),
                        n
                    )));
                }
                w.clone()
            }
            WeightRule::Smooth(f) => self.cells.iter().map(|c| f(&c.barycenter)).collect(),
        };
        for (cell, &value) in weights.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveWeight { cell, value });
            }
        }
        let lower_bound = weights.iter().copied().fold(f64::INFINITY, f64::min);

        let mut cells: Vec<Cell> = self
            .cells
            .iter()
            .enumerate()
            .map(|(id, c)| Cell {
                id,
                measure: weights[id] * c.chart_measure,
                chart_measure: c.chart_measure,
                barycenter: c.barycenter,
                h: c.h,
                faces: Vec::new(),
            })
            .collect();

        let mut faces = Vec::with_capacity(self.faces.len());
        for (id, f) in self.faces.into_iter().enumerate() {
            let (trace, jump) = match f.neighbor {
                FaceNeighbor::Cell(nb) => {
                    if nb == f.owner || nb >= n {
                        return Err(Error::InvalidArgument(format!("face {id} has invalid neighbour {nb}")));
                    }
                    (
                        0.5 * (weights[f.owner] + weights[nb]),
                        (weights[f.owner] - weights[nb]).abs(),
                    )
                }
                FaceNeighbor::Boundary(_) => (weights[f.owner], 0.0),
            };
            let nodes: Vec<QuadNode> = f
                .nodes
                .iter()
                .map(|&(point, weight, normal)| QuadNode {
                    point,
                    weight,
                    normal,
                    omega: match rule {
                        WeightRule::Smooth(w) => w(&point),
                        _ => trace,
                    },
                })
                .collect();
            let omega =
                nodes.iter().map(|q| q.weight * q.omega).sum::<f64>() / nodes.iter().map(|q| q.weight).sum::<f64>();
            cells[f.owner].faces.push((id, 1.0));
            if let FaceNeighbor::Cell(nb) = f.neighbor {
                cells[nb].faces.push((id, -1.0));
            }
            faces.push(Face {
                id,
                owner: f.owner,
                neighbor: f.neighbor,
                measure: f.measure,
                normal: f.normal,
                omega,
                weight_jump: jump,
                nodes,
            });
        }

        let total_volume: f64 = cells.iter().map(|c| c.measure).sum();
        let mesh = Mesh {
            dimension: self.dimension,
            topology: self.topology,
            cells,
            faces,
            volume_form: VolumeForm {
                weights,
                lower_bound,
                mode: rule.mode(),
            },
            total_volume,
            points: self.points,
            cell_vertices: self.cells.into_iter().map(|c| c.vertices).collect(),
            tangent_frames: self.tangent_frames,
        };
        mesh.check_invariants()?;
        Ok(mesh)
    }
}

/// Normal data of a face as seen from one of its cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceNormalData {
    pub normal: Vec3,
    pub measure: f64,
    pub nodes: Vec<QuadNode>,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn is_closed(&self) -> bool {
        self.faces.iter().all(|f| !f.is_boundary())
    }

    pub fn cell_measure(&self, cell: usize) -> Result<f64> {
        self.cells
            .get(cell)
            .map(|c| c.measure)
            .ok_or(Error::UnknownId { kind: "cell", id: cell })
    }

    /// Normal, measure and quadrature nodes of `face` oriented outward from
    /// `from_cell`. Querying from the non-owner flips every normal.
    pub fn face_normal_data(&self, face: usize, from_cell: usize) -> Result<FaceNormalData> {
        let f = self
            .faces
            .get(face)
            .ok_or(Error::UnknownId { kind: "face", id: face })?;
        if from_cell >= self.cells.len() {
            return Err(Error::UnknownId {
                kind: "cell",
                id: from_cell,
            });
        }
        let sign = if f.owner == from_cell {
            1.0
        } else if f.neighbor == FaceNeighbor::Cell(from_cell) {
            -1.0
        } else {
            return Err(Error::InvalidArgument(format!(
                "cell {from_cell} is not adjacent to face {face}"
            )));
        };
        Ok(FaceNormalData {
            normal: vec3::scale(&f.normal, sign),
            measure: f.measure,
            nodes: f
                .nodes
                .iter()
                .map(|q| QuadNode {
                    normal: vec3::scale(&q.normal, sign),
                    ..*q
                })
                .collect(),
        })
    }

    pub fn h_max(&self) -> f64 {
        self.cells.iter().map(|c| c.h).fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        self.cells.iter().map(|c| c.h).fold(f64::INFINITY, f64::min)
    }

    pub fn h_mean(&self) -> f64 {
        self.cells.iter().map(|c| c.h).sum::<f64>() / self.cells.len() as f64
    }

    pub fn max_weight_jump(&self) -> f64 {
        self.faces.iter().map(|f| f.weight_jump).fold(0.0, f64::max)
    }

    /// Boundary faces carrying `tag`.
    pub fn boundary_faces(&self, tag: BoundaryTag) -> impl Iterator<Item = &Face> {
        self.faces
            .iter()
            .filter(move |f| f.neighbor == FaceNeighbor::Boundary(tag))
    }

    /// Checks that every cell lies above a caller-supplied `ω_*`.
    pub fn check_lower_bound(&self, omega_star: f64) -> Result<()> {
        if !(omega_star > 0.0) {
            return Err(Error::InvalidArgument("ω_* must be positive".into()));
        }
        for (cell, &value) in self.volume_form.weights.iter().enumerate() {
            if value < omega_star {
                return Err(Error::WeightBelowBound {
                    cell,
                    value,
                    bound: omega_star,
                });
            }
        }
        Ok(())
    }

    /// Norm of `Σ_e s_e N_e |e|` for `cell`, evaluated in the cell's own
    /// chart. For sphere cells the chart is the gnomonic projection onto the
    /// tangent plane at the barycentre, which maps geodesic edges to segments.
    pub fn closure_defect(&self, cell: usize) -> Result<f64> {
        let c = self
            .cells
            .get(cell)
            .ok_or(Error::UnknownId { kind: "cell", id: cell })?;
        let sum = match self.topology {
            Topology::Sphere => {
                let frames = self.tangent_frames.as_ref().expect("sphere frames");
                let [e1, e2] = frames[cell];
                let b = c.barycenter;
                let verts = &self.cell_vertices[cell];
                let proj: Vec<[f64; 2]> = verts
                    .iter()
                    .map(|&v| {
                        let p = self.points[v];
                        let s = vec3::scale(&p, 1.0 / vec3::dot(&p, &b));
                        [vec3::dot(&s, &e1), vec3::dot(&s, &e2)]
                    })
                    .collect();
                let mut acc = [0.0, 0.0];
                for i in 0..proj.len() {
                    let a = proj[i];
                    let bb = proj[(i + 1) % proj.len()];
                    // outward normal times length of a counter-clockwise edge
                    acc[0] += bb[1] - a[1];
                    acc[1] -= bb[0] - a[0];
                }
                [acc[0], acc[1], 0.0]
            }
            _ => {
                let mut acc = [0.0; 3];
                for &(fid, s) in &c.faces {
                    let f = &self.faces[fid];
                    acc = vec3::add(&acc, &vec3::scale(&f.normal, s * f.measure));
                }
                acc
            }
        };
        Ok(vec3::norm(&sum))
    }

    fn check_invariants(&self) -> Result<()> {
        let sum: f64 = self.cells.iter().map(|c| c.measure).sum();
        if (sum - self.total_volume).abs() > 1e-12 * self.total_volume.abs() {
            return Err(Error::InvalidArgument("volume partition mismatch".into()));
        }
        for c in &self.cells {
            if !(c.measure > 0.0 && c.h > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "cell {} has non-positive measure or size",
                    c.id
                )));
            }
        }
        for f in &self.faces {
            if !(f.measure > 0.0) {
                return Err(Error::InvalidArgument(format!("face {} has zero measure", f.id)));
            }
            if (vec3::norm(&f.normal) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("face {} normal not unit", f.id)));
            }
        }
        if self.topology.is_closed() && !self.is_closed() {
            return Err(Error::InvalidArgument("closed topology has boundary faces".into()));
        }
        Ok(())
    }

    /// Plain-text summary: counts, total volume and size statistics.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "topology: {}", self.topology.name());
        let _ = writeln!(s, "dimension: {}", self.dimension);
        let _ = writeln!(s, "cells: {}", self.n_cells());
        let _ = writeln!(s, "faces: {}", self.n_faces());
        let _ = writeln!(
            s,
            "boundary faces: {}",
            self.faces.iter().filter(|f| f.is_boundary()).count()
        );
        let _ = writeln!(s, "total omega-volume: {:.16e}", self.total_volume);
        let _ = writeln!(s, "omega lower bound: {:.16e}", self.volume_form.lower_bound);
        let _ = writeln!(s, "max omega face jump: {:.16e}", self.max_weight_jump());
        let _ = writeln!(s, "h min: {:.16e}", self.h_min());
        let _ = writeln!(s, "h mean: {:.16e}", self.h_mean());
        let _ = writeln!(s, "h max: {:.16e}", self.h_max());
        s
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_unit(n: usize) -> Vec<(f64, f64)> {
    let (x, w): (&[f64], &[f64]) = match n {
        1 => (&[0.0], &[2.0]),
        2 => (&[-0.577_350_269_189_625_8, 0.577_350_269_189_625_8], &[1.0, 1.0]),
        6 => (
            &[
                -0.932_469_514_203_152,
                -0.661_209_386_466_264_5,
                -0.238_619_186_083_196_9,
                0.238_619_186_083_196_9,
                0.661_209_386_466_264_5,
                0.932_469_514_203_152,
            ],
            &[
                0.171_324_492_379_170_3,
                0.360_761_573_048_138_6,
                0.467_913_934_572_691,
                0.467_913_934_572_691,
                0.360_761_573_048_138_6,
                0.171_324_492_379_170_3,
            ],
        ),
        _ => panic!("unsupported Gauss order {n}"),
    };
    x.iter().zip(w).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}
