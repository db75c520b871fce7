//! Artifact writers: CSV, legacy VTK, plain-text reports and the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use manifold_fv::geometry::Mesh;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// An output directory that remembers the checksum of everything written.
#[derive(Debug)]
pub struct OutputDir {
    pub root: PathBuf,
    pub files: Vec<FileRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<OutputDir> {
        fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        fs::write(self.root.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// CSV with a leading `# seed = N` comment line.
    pub fn write_csv(&mut self, name: &str, seed: u64, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
        let bytes = csv_bytes(seed, header, rows)?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> std::io::Result<()> {
        self.write_bytes(name, text.as_bytes())
    }
}

pub fn csv_bytes(seed: u64, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<Vec<u8>> {
    let mut buf = format!("# seed = {seed}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// Reads a CSV written by [`csv_bytes`] into its header and rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), String> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let header = r
        .headers()
        .map_err(|e| format!("bad header in {}: {e}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| format!("bad row in {}: {e}", path.display()))?;
    Ok((header, rows))
}

fn vtk_cell_type(mesh: &Mesh, verts: usize) -> u8 {
    match (mesh.dimension, verts) {
        (1, _) => 3,
        (_, 3) => 5,
        (_, 4) => 9,
        _ => 7,
    }
}

/// Legacy ASCII unstructured grid with `u` and the `ω`-measure as cell data.
pub fn vtk_string(mesh: &Mesh, values: &[f64], measures: &[f64], time: f64, seed: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{} t={} seed={seed}", mesh.topology.name(), fmt_f64(time));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.points.len());
    for p in &mesh.points {
        let _ = writeln!(s, "{} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]));
    }
    let size: usize = mesh.cell_vertices.iter().map(|v| v.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", mesh.cell_vertices.len());
    for v in &mesh.cell_vertices {
        let ids: Vec<String> = v.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", v.len(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.cell_vertices.len());
    for v in &mesh.cell_vertices {
        let _ = writeln!(s, "{}", vtk_cell_type(mesh, v.len()));
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
    for (name, data) in [("u", values), ("measure", measures)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in data {
            let _ = writeln!(s, "{}", fmt_f64(*v));
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotClaimed,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(check: &str, status: Status, detail: impl Into<String>) -> Verdict {
        Verdict {
            check: check.to_string(),
            status,
            detail: detail.into(),
        }
    }

    pub fn from_bool(check: &str, ok: bool, detail: impl Into<String>) -> Verdict {
        Verdict::new(check, if ok { Status::Pass } else { Status::Fail }, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFingerprint {
    pub topology: String,
    pub cells: usize,
    pub total_volume: f64,
    pub measures_sha256: String,
}

impl MeshFingerprint {
    pub fn of(mesh: &Mesh) -> MeshFingerprint {
        let text: String = mesh.cells.iter().map(|c| fmt_f64(c.measure) + "\n").collect();
        MeshFingerprint {
            topology: mesh.topology.name().to_string(),
            cells: mesh.n_cells(),
            total_volume: mesh.total_volume,
            measures_sha256: sha256_hex(text.as_bytes()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub index: usize,
    pub time: f64,
    pub csv: String,
    pub vtk: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshFingerprint>,
    #[serde(default)]
    pub snapshots: Vec<SnapshotRecord>,
    pub files: Vec<FileRecord>,
    pub verdicts: Vec<Verdict>,
    pub errors: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: serde_json::Value::Null,
            seed: None,
            wall_clock_seconds: 0.0,
            exit_code: 0,
            mesh: None,
            snapshots: Vec::new(),
            files: Vec::new(),
            verdicts: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        fs::write(dir.join("manifest.json"), text + "\n")
    }

    pub fn read(dir: &Path) -> Result<RunManifest, String> {
        let path = dir.join("manifest.json");
        let text = fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad manifest {}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use manifold_fv::geometry::{build_torus_mesh, WeightRule};

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_round_trip_skips_seed_line() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        let rows = vec![vec!["1".into(), fmt_f64(0.25)], vec!["2".into(), fmt_f64(-3.0)]];
        out.write_csv("a.csv", 11, &["id", "value"], &rows).unwrap();
        let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert!(text.starts_with("# seed = 11\nid,value\n"));
        let (h, r) = read_csv(&dir.path().join("a.csv")).unwrap();
        assert_eq!(h, vec!["id", "value"]);
        assert_eq!(r, rows);
        assert_eq!(out.files[0].sha256, sha256_hex(text.as_bytes()));
        assert_eq!(out.files[0].bytes, text.len());
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn vtk_counts() {
        let m = build_torus_mesh(3, 3, &WeightRule::Uniform(1.0)).unwrap();
        let u = vec![0.5; 9];
        let measures: Vec<f64> = m.cells.iter().map(|c| c.measure).collect();
        let s = vtk_string(&m, &u, &measures, 0.0, 1);
        assert!(s.contains("POINTS 16 double"));
        assert!(s.contains("CELLS 9 45"));
        assert_eq!(s.lines().filter(|l| *l == "9").count(), 9);
        assert!(s.contains("CELL_DATA 9"));
    }
}
