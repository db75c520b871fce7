//! The four subcommands. Each one returns its process exit code and always
//! leaves a `manifest.json` in the output directory when one is known.

use std::path::{Path, PathBuf};
use std::time::Instant;

use manifold_fv::analysis::{
    conservation_check, contraction_check, convergence_rate, entropy_battery, kruzkov_indices, l1_error,
    max_principle_check, standard_battery, tol_entropy, TestFunction,
};
use manifold_fv::boundary::{admissible_membership, kruzkov_grid, weak_trace_window, NormalFlux};
use manifold_fv::fv::{CompatibilityMode, SnapshotSchedule, Trajectory};
use manifold_fv::geometry::{BoundaryTag, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GeometrySpec, RunConfig, ScaleSpec};
use crate::output::{
    fmt_f64, read_csv, vtk_string, MeshFingerprint, OutputDir, RunManifest, SnapshotRecord, Status, Verdict,
};
use crate::problem::Problem;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

/// Mass balance slack on the strip, where boundary inflow is accumulated
/// separately from the update.
const BALANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance_scale: f64,
}

/// Failure modes that end a command early.
enum Stop {
    Config(Vec<String>),
    Abort(String),
    Io(String),
}

impl From<std::io::Error> for Stop {
    fn from(e: std::io::Error) -> Self {
        Stop::Io(e.to_string())
    }
}

fn solver_stop(e: manifold_fv::Error) -> Stop {
    match e {
        manifold_fv::Error::SolverAbort { .. } => Stop::Abort(e.to_string()),
        other => Stop::Config(vec![other.to_string()]),
    }
}

struct Session {
    started: Instant,
    manifest: RunManifest,
    out_dir: Option<PathBuf>,
}

impl Session {
    fn new(command: &str) -> Session {
        Session {
            started: Instant::now(),
            manifest: RunManifest::new(command),
            out_dir: None,
        }
    }

    /// Loads and validates the configuration, applying the command-line
    /// overrides, and fixes the output directory.
    fn load(&mut self, opts: &Options) -> Result<RunConfig, Stop> {
        self.out_dir = opts.out.clone();
        let mut errs = Vec::new();
        if !(opts.tolerance_scale > 0.0 && opts.tolerance_scale.is_finite()) {
            errs.push(format!(
                "--tolerance-scale must be positive, got {}",
                opts.tolerance_scale
            ));
        }
        let mut cfg = match RunConfig::load(&opts.config) {
            Ok(c) => c,
            Err(mut e) => {
                errs.append(&mut e);
                return Err(Stop::Config(errs));
            }
        };
        if let Some(seed) = opts.seed {
            cfg.seed = seed;
        }
        if self.out_dir.is_none() {
            self.out_dir = cfg.output_dir.as_ref().map(PathBuf::from);
        }
        self.manifest.config = serde_json::to_value(&cfg).unwrap_or(serde_json::Value::Null);
        self.manifest.seed = Some(cfg.seed);
        errs.extend(cfg.validate());
        if self.out_dir.is_none() {
            errs.push("no output directory: pass --out or set output_dir".into());
        }
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Stop::Config(errs))
        }
    }

    fn finish(mut self, result: Result<(), Stop>, files: Option<OutputDir>) -> i32 {
        let code = match result {
            Ok(()) => {
                if self.manifest.verdicts.iter().any(|v| v.status == Status::Fail) {
                    EXIT_CHECK_FAILURE
                } else {
                    EXIT_PASS
                }
            }
            Err(Stop::Config(errs)) => {
                self.manifest.errors.extend(errs);
                EXIT_CONFIG
            }
            Err(Stop::Abort(msg)) => {
                self.manifest.errors.push(msg);
                EXIT_ABORT
            }
            Err(Stop::Io(msg)) => {
                self.manifest.errors.push(format!("i/o error: {msg}"));
                EXIT_CONFIG
            }
        };
        for e in &self.manifest.errors {
            eprintln!("error: {e}");
        }
        if let Some(files) = files {
            self.manifest.files = files.files;
        }
        self.manifest.exit_code = code;
        self.manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        if let Some(dir) = &self.out_dir {
            if let Err(e) = self.manifest.write(dir) {
                eprintln!("error: cannot write manifest: {e}");
            }
        }
        code
    }
}

fn leaf_measures(traj: &Trajectory, index: usize) -> Vec<f64> {
    let s = &traj.snapshots[index];
    traj.mesh.cells.iter().map(|c| c.measure * s.leaf_scale).collect()
}

fn write_snapshots(
    traj: &Trajectory,
    seed: u64,
    out: &mut OutputDir,
    manifest: &mut RunManifest,
) -> std::io::Result<()> {
    for (i, s) in traj.snapshots.iter().enumerate() {
        let measures = leaf_measures(traj, i);
        let rows: Vec<Vec<String>> = traj
            .mesh
            .cells
            .iter()
            .map(|c| {
                vec![
                    c.id.to_string(),
                    fmt_f64(c.barycenter[0]),
                    fmt_f64(c.barycenter[1]),
                    fmt_f64(c.barycenter[2]),
                    fmt_f64(measures[c.id]),
                    fmt_f64(s.values[c.id]),
                ]
            })
            .collect();
        let csv = format!("snapshot_{i:04}.csv");
        let vtk = format!("snapshot_{i:04}.vtk");
        out.write_csv(&csv, seed, &["cell", "x", "y", "z", "measure", "u"], &rows)?;
        out.write_text(&vtk, &vtk_string(&traj.mesh, &s.values, &measures, s.time, seed))?;
        manifest.snapshots.push(SnapshotRecord {
            index: i,
            time: s.time,
            csv,
            vtk,
        });
    }
    Ok(())
}

fn conservation_verdict(problem: &Problem, traj: &Trajectory, tol: f64) -> Verdict {
    if problem.is_strip() {
        let m0 = traj.snapshots[0].mass;
        let worst = traj
            .snapshots
            .iter()
            .map(|s| (s.mass - m0 - s.boundary_inflow).abs() / m0.abs().max(1.0))
            .fold(0.0, f64::max);
        let tol = BALANCE_TOL * tol / 1e-12;
        return Verdict::from_bool(
            "mass-balance",
            worst <= tol,
            format!("max |m(t) - m(0) - inflow(t)| = {worst:.3e} (tolerance {tol:.1e})"),
        );
    }
    let drift = conservation_check(traj);
    if problem.scheme.mode == CompatibilityMode::SourceTerm && !problem.config.flux.id.is_compatible() {
        return Verdict::new(
            "conservation",
            Status::NotClaimed,
            format!("relative drift {drift:.3e}; the source term exchanges mass for an incompatible flux"),
        );
    }
    Verdict::from_bool(
        "conservation",
        drift <= tol,
        format!("relative drift {drift:.3e} (tolerance {tol:.1e})"),
    )
}

fn max_principle_verdict(problem: &Problem, traj: &Trajectory) -> Verdict {
    let extra = problem
        .config
        .boundary
        .as_ref()
        .map(|b| (b.left.min(b.right), b.left.max(b.right)));
    let r = max_principle_check(traj, extra);
    let detail = format!(
        "observed [{}, {}] within [{}, {}]",
        r.observed_min, r.observed_max, r.initial_min, r.initial_max
    );
    if problem.scheme.mode == CompatibilityMode::SourceTerm && !problem.config.flux.id.is_compatible() {
        return Verdict::new("max-principle", Status::NotClaimed, detail);
    }
    Verdict::from_bool("max-principle", r.holds, detail)
}

fn report_text(title: &str, cfg: &RunConfig, scale: f64, verdicts: &[Verdict], extra: &[String]) -> String {
    let mut s = format!("{title}\n");
    s += &format!(
        "geometry {} | flux {} | t_final {} | seed {}\n",
        cfg.geometry.kind(),
        cfg.flux.id.name(),
        cfg.t_final,
        cfg.seed
    );
    let t = &cfg.tolerances;
    s += &format!(
        "tolerances: entropy_scale {} contraction_slack {:e} conservation {:e} trace_scale {} min_rate {} tolerance_scale {}\n",
        t.entropy_scale, t.contraction_slack, t.conservation, t.trace_scale, t.min_rate, scale
    );
    for line in extra {
        s += line;
        s.push('\n');
    }
    for v in verdicts {
        let status = match v.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotClaimed => "NOT CLAIMED",
            Status::NotApplicable => "N/A",
        };
        s += &format!("[{status}] {}: {}\n", v.check, v.detail);
    }
    s
}

pub fn cmd_run(opts: &Options) -> i32 {
    let mut session = Session::new("run");
    let mut out = None;
    let result = (|| -> Result<(), Stop> {
        let cfg = session.load(opts)?;
        let problem = Problem::build(&cfg).map_err(|e| Stop::Config(vec![e.to_string()]))?;
        let dir = OutputDir::create(session.out_dir.as_ref().unwrap())?;
        let out = out.insert(dir);
        session.manifest.mesh = Some(MeshFingerprint::of(problem.mesh()));
        let traj = problem
            .solve(&SnapshotSchedule::Times(cfg.snapshot_times.clone()))
            .map_err(solver_stop)?;
        write_snapshots(&traj, cfg.seed, out, &mut session.manifest)?;

        // step 0 is the initial state; the oracle column is filled at snapshots
        let mut errors = Vec::new();
        let mut oracle_at = |time: f64| -> Option<f64> {
            let snap = traj.snapshots.iter().find(|s| s.time == time)?;
            let exact = problem.oracle(time)?;
            let e = l1_error(&traj.mesh, &snap.values, |c| exact(&c.barycenter)).ok()?;
            errors.push((time, e));
            Some(e)
        };
        let s0 = &traj.snapshots[0];
        let (lo, hi) = s0
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let l1_0: f64 = traj
            .mesh
            .cells
            .iter()
            .map(|c| c.measure * s0.leaf_scale * s0.values[c.id].abs())
            .sum();
        let mut rows = vec![vec![
            "0".to_string(),
            fmt_f64(0.0),
            fmt_f64(0.0),
            fmt_f64(s0.mass),
            fmt_f64(lo),
            fmt_f64(hi),
            fmt_f64(l1_0),
            oracle_at(0.0).map(fmt_f64).unwrap_or_default(),
        ]];
        for d in &traj.diagnostics {
            rows.push(vec![
                (d.step + 1).to_string(),
                fmt_f64(d.time),
                fmt_f64(d.dt),
                fmt_f64(d.mass),
                fmt_f64(d.min),
                fmt_f64(d.max),
                fmt_f64(d.l1_norm),
                oracle_at(d.time).map(fmt_f64).unwrap_or_default(),
            ]);
        }
        out.write_csv(
            "diagnostics.csv",
            cfg.seed,
            &["step", "time", "dt", "mass", "min", "max", "l1_norm", "oracle_l1_error"],
            &rows,
        )?;

        let tol = cfg.tolerances.conservation * opts.tolerance_scale;
        let mut verdicts = vec![
            conservation_verdict(&problem, &traj, tol),
            max_principle_verdict(&problem, &traj),
        ];
        match errors.iter().rev().find(|(t, _)| *t > 0.0) {
            Some(&(t, e)) => verdicts.push(Verdict::new(
                "oracle-error",
                Status::Pass,
                format!("L1 error {e:.6e} at t = {t}"),
            )),
            None => verdicts.push(Verdict::new(
                "oracle-error",
                Status::NotApplicable,
                "no oracle beyond t = 0",
            )),
        }
        let extra = vec![format!(
            "{} steps, {} snapshots, {}",
            traj.diagnostics.len(),
            traj.snapshots.len(),
            traj.mesh.summary()
        )];
        out.write_text(
            "report.txt",
            &report_text("mfv run", &cfg, opts.tolerance_scale, &verdicts, &extra),
        )?;
        session.manifest.verdicts = verdicts;
        Ok(())
    })();
    session.finish(result, out)
}

pub fn cmd_converge(opts: &Options, levels: u32) -> i32 {
    let mut session = Session::new("converge");
    let mut out = None;
    let result = (|| -> Result<(), Stop> {
        let loaded = session.load(opts);
        let mut errs = match &loaded {
            Err(Stop::Config(e)) => e.clone(),
            Err(_) => return loaded.map(|_| ()),
            Ok(_) => Vec::new(),
        };
        if levels < 3 {
            errs.push(format!("a convergence study needs at least 3 levels, got {levels}"));
        }
        let cfg = match loaded {
            Ok(c) if errs.is_empty() => c,
            _ => return Err(Stop::Config(errs)),
        };
        let problems = (0..levels)
            .map(|i| {
                let mut c = cfg.clone();
                c.geometry = cfg.geometry.refined(i);
                Problem::build(&c)
            })
            .collect::<manifold_fv::Result<Vec<Problem>>>()
            .map_err(|e| Stop::Config(vec![e.to_string()]))?;
        if problems[0].oracle(cfg.t_final).is_none() {
            return Err(Stop::Config(vec![format!(
                "no exact oracle is registered for flux {} with this initial profile, density and horizon",
                cfg.flux.id.name()
            )]));
        }
        let dir = OutputDir::create(session.out_dir.as_ref().unwrap())?;
        let out = out.insert(dir);
        let mut table = Vec::new();
        let mut rows = Vec::new();
        for (level, p) in problems.iter().enumerate() {
            let traj = p.solve(&SnapshotSchedule::Times(Vec::new())).map_err(solver_stop)?;
            let exact = p.oracle(cfg.t_final).expect("oracle checked on the coarsest level");
            let err = l1_error(&traj.mesh, &traj.final_snapshot().values, |c| exact(&c.barycenter))
                .map_err(|e| Stop::Abort(e.to_string()))?;
            let h = traj.mesh.h_max();
            table.push((h, err));
            rows.push(vec![
                level.to_string(),
                traj.mesh.n_cells().to_string(),
                fmt_f64(h),
                fmt_f64(err),
            ]);
        }
        out.write_csv("convergence.csv", cfg.seed, &["level", "cells", "h", "l1_error"], &rows)?;
        let rate = convergence_rate(&table).map_err(|e| Stop::Abort(e.to_string()))?;
        let decreasing = table.windows(2).all(|w| w[1].1 < w[0].1);
        let verdicts = vec![
            Verdict::from_bool(
                "rate",
                rate >= cfg.tolerances.min_rate,
                format!("fitted L1 rate {rate:.4} (minimum {})", cfg.tolerances.min_rate),
            ),
            Verdict::from_bool(
                "errors-decrease",
                decreasing,
                table
                    .iter()
                    .map(|(_, e)| format!("{e:.4e}"))
                    .collect::<Vec<_>>()
                    .join(" > "),
            ),
        ];
        out.write_text(
            "report.txt",
            &report_text(
                "mfv converge",
                &cfg,
                opts.tolerance_scale,
                &verdicts,
                &[format!("levels {levels}")],
            ),
        )?;
        session.manifest.verdicts = verdicts;
        Ok(())
    })();
    session.finish(result, out)
}

/// Bumps whose spatial support stays inside the interval, so no boundary
/// terms enter the weak inequality.
fn interior_bumps(battery: Vec<TestFunction>) -> Vec<TestFunction> {
    battery
        .into_iter()
        .filter(|b| b.topology != Topology::Interval || (b.center[0] > b.radius && b.center[0] + b.radius < 1.0))
        .collect()
}

fn entropy_verdict(problem: &Problem, traj: &Trajectory, scale: f64, out: &mut OutputDir) -> Result<Verdict, Stop> {
    let cfg = &problem.config;
    if let GeometrySpec::Strip { scale: s, .. } = &cfg.geometry {
        if *s != (ScaleSpec::Constant { value: 1.0 }) {
            return Ok(Verdict::new(
                "entropy",
                Status::NotApplicable,
                "battery covers flat strips only",
            ));
        }
    }
    let battery = interior_bumps(standard_battery(&traj.mesh, cfg.t_final).map_err(|e| Stop::Abort(e.to_string()))?);
    let (lo, hi) = traj.snapshots[0]
        .values
        .iter()
        .chain(cfg.boundary.iter().flat_map(|b| [&b.left, &b.right]))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let ks = kruzkov_indices(lo, hi, cfg.tolerances.kruzkov_indices);
    let h = traj.mesh.h_max();
    let tol = tol_entropy(h, cfg.tolerances.entropy_scale * scale);
    let report = entropy_battery(traj, &problem.flux, &ks, &battery, tol).map_err(|e| Stop::Abort(e.to_string()))?;
    let rows: Vec<Vec<String>> = report
        .reports
        .iter()
        .map(|r| {
            vec![
                r.test_fn.to_string(),
                fmt_f64(r.k),
                fmt_f64(r.residual),
                fmt_f64(r.tolerance),
                r.violated.to_string(),
            ]
        })
        .collect();
    out.write_csv(
        "entropy.csv",
        cfg.seed,
        &["test_fn", "k", "residual", "tolerance", "violated"],
        &rows,
    )?;
    Ok(Verdict::from_bool(
        "entropy",
        report.violations == 0,
        format!(
            "{} bumps x {} indices, worst residual {:.4e} (k = {:.4}, bump {}), tolerance {:.4e}, {} violations",
            battery.len(),
            ks.len(),
            report.worst,
            report.worst_k,
            report.worst_test_fn,
            tol,
            report.violations
        ),
    ))
}

fn contraction_verdict(problem: &Problem, scale: f64, out: &mut OutputDir) -> Result<Verdict, Stop> {
    let cfg = &problem.config;
    let u0 = &problem.initial;
    let (lo, hi) = u0
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let amplitude = 0.25 * (hi - lo).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let v0: Vec<f64> = u0.iter().map(|u| u + amplitude * rng.gen_range(-1.0..1.0)).collect();
    let (tu, tv) = problem
        .solve_pair(u0, &v0, &SnapshotSchedule::EveryStep)
        .map_err(solver_stop)?;
    let report = contraction_check(&tu, &tv).map_err(|e| Stop::Abort(e.to_string()))?;
    let rows: Vec<Vec<String>> = tu
        .snapshots
        .iter()
        .zip(&report.distances)
        .map(|(s, d)| vec![fmt_f64(s.time), fmt_f64(*d)])
        .collect();
    out.write_csv("contraction.csv", cfg.seed, &["time", "l1_distance"], &rows)?;
    let slack = cfg.tolerances.contraction_slack * scale;
    let detail = format!(
        "{} steps, distance {:.6e} -> {:.6e}, largest stepwise increase {:.3e}",
        report.distances.len() - 1,
        report.distances[0],
        report.distances[report.distances.len() - 1],
        report.max_increase
    );
    if problem.scheme.mode == CompatibilityMode::SourceTerm && !cfg.flux.id.is_compatible() {
        let grew = report.max_increase > slack;
        return Ok(Verdict::new(
            "contraction",
            Status::NotClaimed,
            format!(
                "{detail}; incompatible flux: the distance {} (growth is allowed here)",
                if grew { "grew" } else { "did not grow" }
            ),
        ));
    }
    Ok(Verdict::from_bool(
        "contraction",
        report.max_increase <= slack,
        format!("{detail} (slack {slack:.1e})"),
    ))
}

fn membership_verdict(problem: &Problem, traj: &Trajectory, scale: f64, out: &mut OutputDir) -> Result<Verdict, Stop> {
    let cfg = &problem.config;
    let Some(b) = &cfg.boundary else {
        return Ok(Verdict::new(
            "boundary-membership",
            Status::NotApplicable,
            "no time-like boundary",
        ));
    };
    let h = traj.mesh.h_max();
    let tol = cfg.tolerances.trace_scale * h.sqrt() * scale;
    let mut times: Vec<f64> = cfg
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t < cfg.t_final)
        .collect();
    times.push(cfg.t_final);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let law = problem.flux.law.clone();
    let (l1, l2, r1, r2) = (law.clone(), law.clone(), law.clone(), law);
    let sides = [
        (
            BoundaryTag::Left,
            "left",
            b.left,
            NormalFlux::new(move |u| -l1.value(u), move |u| -l2.derivative(u)),
        ),
        (
            BoundaryTag::Right,
            "right",
            b.right,
            NormalFlux::new(move |u| r1.value(u), move |u| r2.derivative(u)),
        ),
    ];
    let mut rows = Vec::new();
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for &t in &times {
        for (tag, name, u_b, g) in &sides {
            let trace = weak_trace_window(traj, *tag, 2, t, h.sqrt()).map_err(|e| Stop::Abort(e.to_string()))?;
            let grid = kruzkov_grid(*u_b, trace.value, 0.5, 129);
            let m = admissible_membership(g, *u_b, trace.value, &grid, tol);
            failures += usize::from(!m.admissible);
            worst = worst.max(m.violation);
            rows.push(vec![
                fmt_f64(t),
                trace.face.to_string(),
                name.to_string(),
                fmt_f64(trace.value),
                fmt_f64(*u_b),
                m.admissible.to_string(),
                fmt_f64(m.worst_k),
                fmt_f64(m.violation),
            ]);
        }
    }
    out.write_csv(
        "membership.csv",
        cfg.seed,
        &[
            "t",
            "face",
            "side",
            "trace",
            "u_b",
            "admissible",
            "worst_k",
            "violation",
        ],
        &rows,
    )?;
    Ok(Verdict::from_bool(
        "boundary-membership",
        failures == 0,
        format!(
            "{} face-time pairs, {failures} outside the admissible set, largest violation {worst:.3e} (tolerance {tol:.3e})",
            rows.len()
        ),
    ))
}

pub fn cmd_verify(opts: &Options) -> i32 {
    let mut session = Session::new("verify");
    let mut out = None;
    let result = (|| -> Result<(), Stop> {
        let cfg = session.load(opts)?;
        let problem = Problem::build(&cfg).map_err(|e| Stop::Config(vec![e.to_string()]))?;
        let dir = OutputDir::create(session.out_dir.as_ref().unwrap())?;
        let out = out.insert(dir);
        session.manifest.mesh = Some(MeshFingerprint::of(problem.mesh()));
        let scale = opts.tolerance_scale;
        let traj = problem.solve(&SnapshotSchedule::EveryStep).map_err(solver_stop)?;
        let mut verdicts = vec![
            conservation_verdict(&problem, &traj, cfg.tolerances.conservation * scale),
            max_principle_verdict(&problem, &traj),
            entropy_verdict(&problem, &traj, scale, out)?,
        ];
        if problem.is_strip() {
            verdicts.push(Verdict::new(
                "contraction",
                Status::NotApplicable,
                "boundary data enter the stability estimate",
            ));
            verdicts.push(membership_verdict(&problem, &traj, scale, out)?);
        } else {
            verdicts.push(contraction_verdict(&problem, scale, out)?);
            verdicts.push(Verdict::new(
                "boundary-membership",
                Status::NotApplicable,
                "closed manifold",
            ));
        }
        let extra = vec![format!("{} steps, {}", traj.diagnostics.len(), traj.mesh.summary())];
        out.write_text("report.txt", &report_text("mfv verify", &cfg, scale, &verdicts, &extra))?;
        session.manifest.verdicts = verdicts;
        Ok(())
    })();
    session.finish(result, out)
}

fn snapshot_columns(dir: &Path, file: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let (header, rows) = read_csv(&dir.join(file))?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("{file} has no column {name}"))
    };
    let (mi, ui) = (col("measure")?, col("u")?);
    let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("bad number {s} in {file}: {e}"));
    let mut measures = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    for r in &rows {
        measures.push(parse(&r[mi])?);
        values.push(parse(&r[ui])?);
    }
    Ok((measures, values))
}

pub fn cmd_compare(run_a: &Path, run_b: &Path, out_dir: &Path, tolerance_scale: f64) -> i32 {
    let mut session = Session::new("compare");
    session.out_dir = Some(out_dir.to_path_buf());
    session.manifest.config = serde_json::json!({
        "run_a": run_a.display().to_string(),
        "run_b": run_b.display().to_string(),
    });
    let mut out = None;
    let result = (|| -> Result<(), Stop> {
        let mut errs = Vec::new();
        if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
            errs.push(format!("--tolerance-scale must be positive, got {tolerance_scale}"));
        }
        let (ma, mb) = match (RunManifest::read(run_a), RunManifest::read(run_b)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                errs.extend(a.err());
                errs.extend(b.err());
                return Err(Stop::Config(errs));
            }
        };
        match (&ma.mesh, &mb.mesh) {
            (Some(a), Some(b)) if a == b => {}
            (Some(_), Some(_)) => errs.push("runs live on different meshes".into()),
            _ => errs.push("a manifest carries no mesh description".into()),
        }
        if ma.snapshots.is_empty() {
            errs.push("run a has no snapshots".into());
        }
        let times = |m: &RunManifest| m.snapshots.iter().map(|s| s.time).collect::<Vec<f64>>();
        if times(&ma) != times(&mb) {
            errs.push("runs have different snapshot times".into());
        }
        if !errs.is_empty() {
            return Err(Stop::Config(errs));
        }
        let seed = ma.seed.unwrap_or(0);
        session.manifest.seed = Some(seed);
        session.manifest.mesh = ma.mesh.clone();
        let mut rows = Vec::new();
        let mut distances = Vec::new();
        for (sa, sb) in ma.snapshots.iter().zip(&mb.snapshots) {
            let (measure, u) = snapshot_columns(run_a, &sa.csv).map_err(|e| Stop::Config(vec![e]))?;
            let (_, v) = snapshot_columns(run_b, &sb.csv).map_err(|e| Stop::Config(vec![e]))?;
            if u.len() != v.len() {
                return Err(Stop::Config(vec![format!(
                    "snapshot {} has different cell counts",
                    sa.index
                )]));
            }
            let d: f64 = measure
                .iter()
                .zip(u.iter().zip(&v))
                .map(|(m, (a, b))| m * (a - b).abs())
                .sum();
            distances.push(d);
            rows.push(vec![sa.index.to_string(), fmt_f64(sa.time), fmt_f64(d)]);
        }
        let dir = OutputDir::create(out_dir)?;
        let out = out.insert(dir);
        out.write_csv("distances.csv", seed, &["snapshot", "time", "l1_distance"], &rows)?;
        let slack = 1e-12 * tolerance_scale;
        let max_increase = distances
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = distances.len() < 2 || max_increase <= slack;
        let verdict = Verdict::from_bool(
            "nonincreasing-distance",
            ok,
            format!(
                "{} snapshots, distance {:.6e} -> {:.6e}",
                distances.len(),
                distances[0],
                distances[distances.len() - 1]
            ),
        );
        let mut text = format!("mfv compare\nrun a: {}\nrun b: {}\n", run_a.display(), run_b.display());
        text += &format!(
            "[{}] {}: {}\n",
            if ok { "PASS" } else { "FAIL" },
            verdict.check,
            verdict.detail
        );
        out.write_text("report.txt", &text)?;
        session.manifest.verdicts = vec![verdict];
        Ok(())
    })();
    session.finish(result, out)
}
