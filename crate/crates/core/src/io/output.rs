//! CSV and legacy-VTK emission plus the run manifest.

use crate::fem::dofmap::{DofMap, Field};
use crate::mesh::Mesh;
use crate::model::SystemState;
use crate::scalar::Real;
use crate::scenarios::LoadDisplacementRecord;
use crate::solver::timeloop::ConvergenceLog;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Full float precision: 17 significant digits, locale-free.
fn full<T: Real>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

/// Load-displacement history CSV.
pub fn write_load_csv<T: Real>(
    path: &Path,
    records: &[LoadDisplacementRecord<T>],
) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("step,t,displacement_mm,Fx_kN,Fy_kN,Fx_deg_kN,Fy_deg_kN,newton_iters\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.step,
            full(r.time),
            full(r.displacement),
            full(r.fx),
            full(r.fy),
            full(r.fx_degraded),
            full(r.fy_degraded),
            r.newton_iters
        ));
    }
    std::fs::write(path, out)
}

/// Per-step Newton history CSV.
pub fn write_convergence_csv<T: Real>(
    path: &Path,
    log: &ConvergenceLog<T>,
) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("step,t,iters,final_residual,ls_cuts,active_set_size\n");
    for s in &log.steps {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.step,
            full(s.time),
            s.iterations,
            full(s.final_residual),
            s.line_search_cuts,
            s.active_set_size
        ));
    }
    std::fs::write(path, out)
}

/// Legacy ASCII VTK unstructured-grid snapshot: displacements (padded to
/// 3 components), phase field, pressure and multiplier at the mesh nodes,
/// quad cells of type 9.
pub fn write_vtk<T: Real>(
    path: &Path,
    mesh: &Mesh<T>,
    dm: &DofMap,
    state: &SystemState<T>,
    time: T,
) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(&format!("phase-field state at t = {}\n", full(time)));
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let n = mesh.n_nodes();
    out.push_str(&format!("POINTS {n} double\n"));
    for p in mesh.coords() {
        out.push_str(&format!("{} {} 0\n", full(p[0]), full(p[1])));
    }
    let m = mesh.n_cells();
    out.push_str(&format!("CELLS {m} {}\n", 5 * m));
    for cell in mesh.cells() {
        out.push_str(&format!(
            "4 {} {} {} {}\n",
            cell.nodes[0], cell.nodes[1], cell.nodes[2], cell.nodes[3]
        ));
    }
    out.push_str(&format!("CELL_TYPES {m}\n"));
    for _ in 0..m {
        out.push_str("9\n");
    }
    out.push_str(&format!("POINT_DATA {n}\n"));

    // Displacements: mesh nodes are the leading displacement scalars.
    let u = state.block(dm, Field::U);
    out.push_str("VECTORS displacement double\n");
    for node in 0..n {
        out.push_str(&format!(
            "{} {} 0\n",
            full(u[dm.u_global(node, 0)]),
            full(u[dm.u_global(node, 1)])
        ));
    }
    let mut scalar_field = |name: &str, values: Box<dyn Fn(usize) -> T + '_>| {
        out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
        for node in 0..n {
            out.push_str(&format!("{}\n", full(values(node))));
        }
    };
    let phi = state.block(dm, Field::Phi);
    scalar_field("phase_field", Box::new(|node| phi[node]));
    if !dm.block(Field::P).is_empty() {
        let p = state.block(dm, Field::P);
        scalar_field("pressure", Box::new(|node| p[node]));
    }
    if !dm.block(Field::Tau).is_empty() {
        let tau = state.block(dm, Field::Tau);
        scalar_field("multiplier", Box::new(|node| tau[node]));
    }
    std::fs::write(path, out)
}

/// Mesh-only export for inspection.
pub fn write_mesh_vtk<T: Real>(path: &Path, mesh: &Mesh<T>) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let n = mesh.n_nodes();
    out.push_str(&format!("POINTS {n} double\n"));
    for p in mesh.coords() {
        out.push_str(&format!("{} {} 0\n", full(p[0]), full(p[1])));
    }
    let m = mesh.n_cells();
    out.push_str(&format!("CELLS {m} {}\n", 5 * m));
    for cell in mesh.cells() {
        out.push_str(&format!(
            "4 {} {} {} {}\n",
            cell.nodes[0], cell.nodes[1], cell.nodes[2], cell.nodes[3]
        ));
    }
    out.push_str(&format!("CELL_TYPES {m}\n"));
    for _ in 0..m {
        out.push_str("9\n");
    }
    std::fs::write(path, out)
}

/// Run manifest: effective configuration, code version, timestamps and
/// SHA-256 checksums of the emitted files. Written atomically at run end.
pub struct RunManifest {
    pub config_echo: String,
    pub version: String,
    pub started_unix: u64,
    files: Vec<(PathBuf, String)>,
}

impl RunManifest {
    pub fn new(config_echo: String) -> Self {
        Self {
            config_echo,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: unix_now(),
            files: Vec::new(),
        }
    }

    /// Register an emitted file; the checksum is computed immediately.
    pub fn add_file(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.files.push((path.to_path_buf(), hex(&digest)));
        Ok(())
    }

    /// Write `manifest.txt` into `dir` via a temporary file and rename.
    pub fn write_atomic(&self, dir: &Path) -> std::io::Result<PathBuf> {
        let mut out = String::new();
        out.push_str(&format!("version = {}\n", self.version));
        out.push_str(&format!("started_unix = {}\n", self.started_unix));
        out.push_str(&format!("finished_unix = {}\n", unix_now()));
        out.push_str("\n[config]\n");
        out.push_str(&self.config_echo);
        out.push_str("\n[checksums]\n");
        for (path, sum) in &self.files {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.to_string_lossy().into_owned());
            out.push_str(&format!("{name} = sha256:{sum}\n"));
        }
        let tmp = dir.join("manifest.txt.tmp");
        let final_path = dir.join("manifest.txt");
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(out.as_bytes())?;
        file.sync_all()?;
        std::fs::rename(&tmp, &final_path)?;
        Ok(final_path)
    }
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::dofmap::ElementPairing;
    use crate::mesh::build_unit_square_mesh;

    #[test]
    fn csv_has_one_row_per_record_and_full_precision() {
        let records = vec![
            LoadDisplacementRecord {
                step: 1,
                time: 1e-4,
                displacement: 1e-4,
                fx: 1.0 / 3.0,
                fy: -2e-7,
                fx_degraded: 0.3333333,
                fy_degraded: 0.0,
                newton_iters: 2,
            };
            3
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("load.csv");
        write_load_csv(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("step,t,"));
        // 17 significant digits round-trip exactly.
        let fx_field = lines[1].split(',').nth(3).unwrap();
        assert_eq!(fx_field.parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn vtk_snapshot_is_well_formed() {
        let mesh = build_unit_square_mesh::<f64>(2);
        let dm = DofMap::build(&mesh, ElementPairing::MixedQ2Q1Q1Q1Star, true);
        let state = SystemState::intact(&dm);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap_0.vtk");
        write_vtk(&path, &mesh, &dm, &state, 0.0).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0"));
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("CELLS 4 20"));
        assert!(text.contains("CELL_TYPES 4"));
        assert!(text.contains("VECTORS displacement double"));
        assert!(text.contains("SCALARS phase_field double 1"));
        assert!(text.contains("SCALARS pressure double 1"));
        assert!(text.contains("SCALARS multiplier double 1"));
    }

    #[test]
    fn manifest_checksums_match_files() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("data.csv");
        std::fs::write(&file, b"a,b\n1,2\n").unwrap();
        let mut manifest = RunManifest::new("scenario = shear\n".into());
        manifest.add_file(&file).unwrap();
        let path = manifest.write_atomic(dir.path()).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let digest = Sha256::digest(b"a,b\n1,2\n");
        assert!(text.contains(&format!("data.csv = sha256:{}", hex(&digest))));
        assert!(!dir.path().join("manifest.txt.tmp").exists());
    }
}
